//! Uniform volume grid, grid functions and trapezoid quadrature.

use crate::error::{Error, Result};

/// Sums longer than this use compensated (Neumaier) accumulation.
const COMPENSATED_THRESHOLD: usize = 100_000;

/// Uniform grid `xi_i = i * h` on `[0, H]` (nodes `0..=m`) plus an optional
/// absorbing extension (nodes `m+1..=m_xi`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    h_max: f64,
    m: usize,
    m_xi: usize,
    h: f64,
}

impl GridSpec {
    pub fn new(h_max: f64, m: usize, m_xi: usize) -> Result<Self> {
        if !(h_max.is_finite() && h_max > 0.0) {
            return Err(Error::InvalidGrid(format!("H must be positive, got {h_max}")));
        }
        if m < 2 {
            return Err(Error::InvalidGrid(format!("M must be at least 2, got {m}")));
        }
        if m_xi < m {
            return Err(Error::InvalidGrid(format!("Mxi ({m_xi}) must be >= M ({m})")));
        }
        Ok(GridSpec {
            h_max,
            m,
            m_xi,
            h: h_max / m as f64,
        })
    }

    /// Upper end `H` of the physical region.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// Index of the last physical node (`xi_M = H`).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Index of the last node including the absorbing layer.
    pub fn m_xi(&self) -> usize {
        self.m_xi
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// Number of stored nodes, `m_xi + 1`.
    pub fn len(&self) -> usize {
        self.m_xi + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.m {
            self.h_max
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            values: (0..self.len()).map(|i| f(self.node(i))).collect(),
        }
    }

    pub fn zeros(&self) -> GridFunction {
        GridFunction {
            values: vec![0.0; self.len()],
        }
    }

    pub(crate) fn check(&self, f: &GridFunction) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::GridMismatch {
                expected: self.len(),
                actual: f.len(),
            });
        }
        Ok(())
    }
}

/// Node values `f(xi_i)` for `i = 0..=m_xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(values: Vec<f64>) -> Self {
        GridFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, alpha: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    /// First node holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for GridFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Plain or compensated sum depending on length.
pub(crate) fn sum(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    if values.len() > COMPENSATED_THRESHOLD {
        neumaier_sum(values)
    } else {
        values.sum()
    }
}

pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0_f64;
    let mut c = 0.0_f64;
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

/// Trapezoid rule on a raw slice with spacing `h`, over indices `lo..=hi`.
pub(crate) fn trapezoid_slice(values: &[f64], h: f64, lo: usize, hi: usize) -> f64 {
    if lo == hi {
        return 0.0;
    }
    let inner = sum(values[lo + 1..hi].iter().copied());
    h * (0.5 * (values[lo] + values[hi]) + inner)
}

/// `h * (f_lo/2 + f_{lo+1} + ... + f_{hi-1} + f_hi/2)`.
pub fn trapezoid(grid: &GridSpec, f: &GridFunction, i_lo: usize, i_hi: usize) -> Result<f64> {
    grid.check(f)?;
    if i_lo > i_hi || i_hi > grid.m_xi() {
        return Err(Error::IndexOutOfRange {
            lo: i_lo,
            hi: i_hi,
            len: grid.len(),
        });
    }
    Ok(trapezoid_slice(&f.values, grid.step(), i_lo, i_hi))
}

/// Zeroth and first moments `(n, V)` of `phi` over `[0, xi_upper]`.
pub fn moments_to(grid: &GridSpec, phi: &GridFunction, upper: usize) -> Result<(f64, f64)> {
    grid.check(phi)?;
    if upper > grid.m_xi() {
        return Err(Error::IndexOutOfRange {
            lo: 0,
            hi: upper,
            len: grid.len(),
        });
    }
    Ok(moments_slice(grid, &phi.values, upper))
}

/// Moments over the physical region `[0, H]`.
pub fn moments(grid: &GridSpec, phi: &GridFunction) -> Result<(f64, f64)> {
    moments_to(grid, phi, grid.m())
}

pub(crate) fn moments_slice(grid: &GridSpec, phi: &[f64], upper: usize) -> (f64, f64) {
    let h = grid.step();
    let n = trapezoid_slice(phi, h, 0, upper);
    if upper == 0 {
        return (n, 0.0);
    }
    let first = |i: usize| grid.node(i) * phi[i];
    let inner = sum((1..upper).map(first));
    let v = h * (0.5 * (first(0) + first(upper)) + inner);
    (n, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_matches_examples() {
        let g = GridSpec::new(20.0, 4000, 4000).unwrap();
        assert!((g.step() - 0.005).abs() < 1e-15);
        assert_eq!(g.node(4000), 20.0);

        let g = GridSpec::new(1.0, 2, 2).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.5, 1.0]);

        let g = GridSpec::new(400.0, 40_000, 40_000).unwrap();
        assert!((g.step() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(GridSpec::new(0.0, 10, 10).is_err());
        assert!(GridSpec::new(-1.0, 10, 10).is_err());
        assert!(GridSpec::new(1.0, 1, 1).is_err());
        assert!(GridSpec::new(1.0, 10, 9).is_err());
    }

    #[test]
    fn absorbing_layer_nodes_continue_uniformly() {
        let g = GridSpec::new(10.0, 100, 150).unwrap();
        assert_eq!(g.len(), 151);
        assert!((g.node(150) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_examples() {
        let g = GridSpec::new(20.0, 4000, 4000).unwrap();
        let one = g.sample(|_| 1.0);
        assert!((trapezoid(&g, &one, 0, 4000).unwrap() - 20.0).abs() < 1e-12);

        let g2 = GridSpec::new(1.0, 2, 2).unwrap();
        let lin = g2.sample(|x| x);
        assert_eq!(trapezoid(&g2, &lin, 0, 2).unwrap(), 0.5);
        assert_eq!(trapezoid(&g2, &lin, 1, 1).unwrap(), 0.0);

        let e = g.sample(|x| (-x).exp());
        let exact = 1.0 - (-20.0_f64).exp();
        // Error is about h^2/12.
        assert!((trapezoid(&g, &e, 0, 4000).unwrap() - exact).abs() < 2.5e-6);
    }

    #[test]
    fn trapezoid_rejects_bad_ranges() {
        let g = GridSpec::new(1.0, 4, 4).unwrap();
        let f = g.zeros();
        assert!(matches!(trapezoid(&g, &f, 3, 2), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(trapezoid(&g, &f, 0, 5), Err(Error::IndexOutOfRange { .. })));
        let other = GridFunction::from_values(vec![0.0; 3]);
        assert!(matches!(trapezoid(&g, &other, 0, 2), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn moments_examples() {
        let g = GridSpec::new(20.0, 4000, 4000).unwrap();
        let e = g.sample(|x| (-x).exp());
        let (n, v) = moments(&g, &e).unwrap();
        assert!((n - 1.0).abs() < 1e-5);
        assert!((v - 1.0).abs() < 1e-5);

        assert_eq!(moments(&g, &g.zeros()).unwrap(), (0.0, 0.0));

        let gauss = g.sample(|x| 2.0 * (-x * x).exp());
        let (_, v) = moments(&g, &gauss).unwrap();
        assert!((v - 1.0).abs() < 1e-5);
    }

    #[test]
    fn moments_default_to_physical_region() {
        let g = GridSpec::new(10.0, 100, 200).unwrap();
        let one = g.sample(|_| 1.0);
        let (n, _) = moments(&g, &one).unwrap();
        assert!((n - 10.0).abs() < 1e-12);
        let (n_full, _) = moments_to(&g, &one, 200).unwrap();
        assert!((n_full - 20.0).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let vals = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 1000));
        assert!((neumaier_sum(vals) - (1.0 + 1e-13)).abs() < 1e-18);
    }
}
