//! Coagulation kernels in separated form `A(x, y) = sum_a u_a(x) v_a(y)`.
//!
//! Factors are stored as samples on the grid nodes. The diffusion and
//! ballistic kernels are singular at zero volume; their factors are
//! evaluated with the volume clamped to `max(xi, h/2)`, which keeps every
//! entry finite. This is an approximation confined to the first node.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub const DEFAULT_RANK_CAP: usize = 64;

/// Coarse pivot-search stride for cross approximation.
const COARSE_STRIDE: usize = 16;
/// Random full-grid pairs used to validate the stopping criterion.
const VALIDATION_SAMPLES: usize = 1000;

/// Dense access to kernel values at grid node pairs.
pub trait KernelEntries {
    fn grid(&self) -> &GridSpec;
    /// `A(xi_i, xi_j)`.
    fn entry(&self, i: usize, j: usize) -> f64;
}

/// Rank-R factorization of a kernel sampled on a grid.
#[derive(Debug, Clone)]
pub struct LowRankKernel {
    grid: GridSpec,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    /// `Some(c)` when `v_a = c * u_a` on every node.
    proportional: Vec<Option<f64>>,
    label: String,
}

impl LowRankKernel {
    pub fn from_factors(
        grid: GridSpec,
        u: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if u.is_empty() || u.len() != v.len() {
            return Err(Error::param("kernel", "factor lists must be non-empty and of equal rank"));
        }
        for f in u.iter().chain(v.iter()) {
            if f.len() != grid.len() {
                return Err(Error::GridMismatch {
                    expected: grid.len(),
                    actual: f.len(),
                });
            }
            if let Some(i) = f.iter().position(|x| !x.is_finite()) {
                let x = grid.node(i);
                return Err(Error::NonFiniteKernel { xi: x, eta: x });
            }
        }
        let proportional = u.iter().zip(&v).map(|(a, b)| proportionality(a, b)).collect();
        Ok(LowRankKernel {
            grid,
            u,
            v,
            proportional,
            label: label.into(),
        })
    }

    pub fn rank(&self) -> usize {
        self.u.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn u(&self, alpha: usize) -> &[f64] {
        &self.u[alpha]
    }

    pub fn v(&self, alpha: usize) -> &[f64] {
        &self.v[alpha]
    }

    pub(crate) fn proportional(&self, alpha: usize) -> Option<f64> {
        self.proportional[alpha]
    }

    /// Reconstructed `A(xi_i, xi_j)`.
    pub fn reconstruct(&self, i: usize, j: usize) -> f64 {
        self.u.iter().zip(&self.v).map(|(u, v)| u[i] * v[j]).sum()
    }
}

impl KernelEntries for LowRankKernel {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.reconstruct(i, j)
    }
}

/// A kernel evaluated directly from its formula at (clamped) node coordinates.
pub struct FormulaKernel<F> {
    grid: GridSpec,
    f: F,
    clamp: bool,
}

impl<F: Fn(f64, f64) -> f64> FormulaKernel<F> {
    pub fn new(grid: GridSpec, f: F) -> Self {
        FormulaKernel { grid, f, clamp: false }
    }

    /// Evaluate with coordinates clamped to `max(xi, h/2)`.
    pub fn clamped(grid: GridSpec, f: F) -> Self {
        FormulaKernel { grid, f, clamp: true }
    }
}

impl<F: Fn(f64, f64) -> f64> KernelEntries for FormulaKernel<F> {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let (x, y) = if self.clamp {
            (clamped_node(&self.grid, i), clamped_node(&self.grid, j))
        } else {
            (self.grid.node(i), self.grid.node(j))
        };
        (self.f)(x, y)
    }
}

fn proportionality(u: &[f64], v: &[f64]) -> Option<f64> {
    let k = u.iter().position(|x| *x != 0.0)?;
    let c = v[k] / u[k];
    let tol = 1e-14 * (1.0 + c.abs());
    u.iter()
        .zip(v)
        .all(|(a, b)| (b - c * a).abs() <= tol * b.abs().max(a.abs() * c.abs()))
        .then_some(c)
}

pub(crate) fn clamped_node(grid: &GridSpec, i: usize) -> f64 {
    grid.node(i).max(0.5 * grid.step())
}

/// `(x/y)^(1/3) + (y/x)^(1/3) + 2`.
pub fn diffusion_formula(x: f64, y: f64) -> f64 {
    (x / y).cbrt() + (y / x).cbrt() + 2.0
}

/// `(x^(1/3) + y^(1/3))^2 * sqrt(1/x + 1/y)`.
pub fn ballistic_formula(x: f64, y: f64) -> f64 {
    let s = x.cbrt() + y.cbrt();
    s * s * (1.0 / x + 1.0 / y).sqrt()
}

/// Rank-1 constant kernel `A = a0`.
pub fn kernel_constant(a0: f64, grid: &GridSpec) -> Result<LowRankKernel> {
    if !(a0.is_finite() && a0 >= 0.0) {
        return Err(Error::param("A0", format!("must be a nonnegative number, got {a0}")));
    }
    let n = grid.len();
    LowRankKernel::from_factors(*grid, vec![vec![a0; n]], vec![vec![1.0; n]], "constant")
}

/// Exact rank-3 factorization of the diffusion kernel.
pub fn kernel_diffusion(grid: &GridSpec) -> Result<LowRankKernel> {
    let x: Vec<f64> = (0..grid.len()).map(|i| clamped_node(grid, i)).collect();
    let c: Vec<f64> = x.iter().map(|x| x.cbrt()).collect();
    let ic: Vec<f64> = c.iter().map(|c| 1.0 / c).collect();
    let one = vec![1.0; grid.len()];
    let two = vec![2.0; grid.len()];
    LowRankKernel::from_factors(
        *grid,
        vec![c.clone(), ic.clone(), one],
        vec![ic, c, two],
        "diffusion",
    )
}

/// Cross approximation of the ballistic kernel to relative accuracy `eps`.
pub fn kernel_ballistic(grid: &GridSpec, eps: f64) -> Result<LowRankKernel> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("must lie in (0, 1), got {eps}")));
    }
    let g = *grid;
    let half = 0.5 * g.step();
    let mut k = cross_approximate(
        move |x, y| ballistic_formula(x.max(half), y.max(half)),
        grid,
        eps,
        DEFAULT_RANK_CAP,
    )?;
    k.label = "ballistic".into();
    Ok(k)
}

/// Residual bookkeeping for a growing cross approximation.
struct Cross<'a, F> {
    f: &'a F,
    grid: &'a GridSpec,
    nodes: Vec<f64>,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl<F: Fn(f64, f64) -> f64> Cross<'_, F> {
    fn sample(&self, i: usize, j: usize) -> Result<f64> {
        let (x, y) = (self.nodes[i], self.nodes[j]);
        let a = (self.f)(x, y);
        if !a.is_finite() {
            return Err(Error::NonFiniteKernel { xi: x, eta: y });
        }
        Ok(a)
    }

    fn approx(&self, i: usize, j: usize) -> f64 {
        self.u.iter().zip(&self.v).map(|(u, v)| u[i] * v[j]).sum()
    }

    /// Adds the cross through pivot `(i, j)`; returns false if the residual
    /// pivot vanished.
    fn add_term(&mut self, i: usize, j: usize) -> Result<bool> {
        let n = self.grid.len();
        let pivot = self.sample(i, j)? - self.approx(i, j);
        if pivot == 0.0 || !pivot.is_finite() {
            return Ok(false);
        }
        let mut col = Vec::with_capacity(n);
        let mut row = Vec::with_capacity(n);
        for k in 0..n {
            col.push(self.sample(k, j)? - self.approx(k, j));
            row.push((self.sample(i, k)? - self.approx(i, k)) / pivot);
        }
        self.u.push(col);
        self.v.push(row);
        Ok(true)
    }
}

/// Adaptive cross approximation of `kernel_fn` on the grid.
///
/// Pivots are chosen by full search of the relative residual over a coarse
/// index set (every 16th node plus the powers of two, so the small-volume end
/// is resolved). When the coarse residual drops below `eps` the result is
/// checked on random full-grid pairs; a failing pair is added to the coarse
/// set and the iteration continues.
pub fn cross_approximate<F>(
    kernel_fn: F,
    grid: &GridSpec,
    eps: f64,
    rank_cap: usize,
) -> Result<LowRankKernel>
where
    F: Fn(f64, f64) -> f64,
{
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("must lie in (0, 1), got {eps}")));
    }
    let n = grid.len();
    let mut idx: Vec<usize> = (0..n).step_by(COARSE_STRIDE).collect();
    let mut p = 1;
    while p < n {
        idx.push(p);
        p *= 2;
    }
    idx.push(n - 1);
    idx.sort_unstable();
    idx.dedup();

    let mut cross = Cross {
        f: &kernel_fn,
        grid,
        nodes: grid.nodes(),
        u: Vec::new(),
        v: Vec::new(),
    };

    // Coarse matrix values and residual, stored row-major over `idx`.
    let mut values = Vec::new();
    for &i in &idx {
        for &j in &idx {
            values.push(cross.sample(i, j)?);
        }
    }
    let scale = values.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    if scale == 0.0 {
        return LowRankKernel::from_factors(*grid, vec![vec![0.0; n]], vec![vec![0.0; n]], "cross");
    }
    let floor = 1e-14 * scale;
    let rel = |residual: f64, value: f64| residual.abs() / value.abs().max(floor);
    let mut residual = values.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_aca0);

    loop {
        let k = idx.len();
        let (best, worst) = residual
            .iter()
            .zip(&values)
            .map(|(r, a)| rel(*r, *a))
            .enumerate()
            .fold((0, -1.0), |acc, (p, e)| if e > acc.1 { (p, e) } else { acc });

        if worst <= eps && !cross.u.is_empty() {
            // Validate on random full-grid pairs.
            let mut fail = None;
            let mut fail_err = eps;
            for _ in 0..VALIDATION_SAMPLES {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                let a = cross.sample(i, j)?;
                let e = rel(a - cross.approx(i, j), a);
                if e > fail_err {
                    fail_err = e;
                    fail = Some((i, j));
                }
            }
            let Some((fi, fj)) = fail else {
                return LowRankKernel::from_factors(*grid, cross.u, cross.v, "cross");
            };
            // Grow the coarse set with the failing row and column.
            let mut grown: Vec<usize> = idx.clone();
            for x in [fi, fj] {
                if !grown.contains(&x) {
                    grown.push(x);
                }
            }
            grown.sort_unstable();
            values.clear();
            residual.clear();
            for &i in &grown {
                for &j in &grown {
                    let a = cross.sample(i, j)?;
                    values.push(a);
                    residual.push(a - cross.approx(i, j));
                }
            }
            idx = grown;
            continue;
        }

        if cross.u.len() >= rank_cap {
            return Err(Error::RankCapExhausted {
                eps,
                rank_cap,
                residual: worst,
            });
        }
        let (pi, pj) = (idx[best / k], idx[best % k]);
        if !cross.add_term(pi, pj)? {
            return Err(Error::RankCapExhausted {
                eps,
                rank_cap: cross.u.len(),
                residual: worst,
            });
        }
        let (u, v) = (cross.u.last().unwrap(), cross.v.last().unwrap());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                residual[a * k + b] -= u[i] * v[j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node_index(grid: &GridSpec, x: f64) -> usize {
        (x / grid.step()).round() as usize
    }

    #[test]
    fn constant_kernel() {
        let g = GridSpec::new(10.0, 100, 100).unwrap();
        let k = kernel_constant(1.0, &g).unwrap();
        assert_eq!(k.rank(), 1);
        for i in (0..=100).step_by(7) {
            for j in (0..=100).step_by(11) {
                assert_eq!(k.reconstruct(i, j), 1.0);
            }
        }
        let z = kernel_constant(0.0, &g).unwrap();
        assert_eq!(z.reconstruct(3, 4), 0.0);

        let k = kernel_constant(2.5, &g).unwrap();
        let (i, j) = (node_index(&g, 0.3), node_index(&g, 7.1));
        assert_eq!(k.reconstruct(i, j), 2.5);
        assert!(kernel_constant(-1.0, &g).is_err());
        assert_eq!(k.proportional(0), Some(1.0 / 2.5));
    }

    #[test]
    fn diffusion_kernel_values() {
        let g = GridSpec::new(10.0, 10, 10).unwrap();
        let k = kernel_diffusion(&g).unwrap();
        assert_eq!(k.rank(), 3);
        assert!((k.reconstruct(1, 1) - 4.0).abs() < 1e-14);
        assert!((k.reconstruct(8, 1) - 4.5).abs() < 1e-14);
        assert!((k.reconstruct(1, 8) - 4.5).abs() < 1e-14);
        assert!(k.reconstruct(0, 5).is_finite());
    }

    #[test]
    fn diffusion_reconstruction_matches_formula() {
        let g = GridSpec::new(20.0, 400, 400).unwrap();
        let k = kernel_diffusion(&g).unwrap();
        for i in 1..=400 {
            for j in 1..=400 {
                let a = diffusion_formula(g.node(i), g.node(j));
                assert!((k.reconstruct(i, j) - a).abs() / a <= 1e-12);
            }
        }
    }

    #[test]
    fn ballistic_kernel_on_reference_grid() {
        let g = GridSpec::new(20.0, 4000, 4000).unwrap();
        let eps = 1e-6;
        let k = kernel_ballistic(&g, eps).unwrap();
        assert!(k.rank() <= 20, "rank {}", k.rank());
        let i = node_index(&g, 1.0);
        assert!((k.reconstruct(i, i) - 4.0 * 2f64.sqrt()).abs() <= eps * 4.0 * 2f64.sqrt());

        // Full validity region, every 3rd node in each direction.
        let mut worst = 0.0_f64;
        for i in (1..=4000).step_by(3) {
            for j in (1..=4000).step_by(3) {
                let a = ballistic_formula(g.node(i), g.node(j));
                worst = worst.max((k.reconstruct(i, j) - a).abs() / a);
                let sym = (k.reconstruct(i, j) - k.reconstruct(j, i)).abs() / a;
                assert!(sym <= 2.0 * eps);
            }
        }
        assert!(worst <= eps, "worst relative error {worst:e}");
    }

    #[test]
    fn cross_approximation_finds_exact_ranks() {
        let g = GridSpec::new(5.0, 500, 500).unwrap();
        let c = cross_approximate(|_, _| 3.0, &g, 1e-10, 8).unwrap();
        assert_eq!(c.rank(), 1);
        let s = cross_approximate(|x, y| x + y, &g, 1e-10, 8).unwrap();
        assert_eq!(s.rank(), 2);
        let half = 0.5 * g.step();
        let d = cross_approximate(
            move |x, y| diffusion_formula(x.max(half), y.max(half)),
            &g,
            1e-12,
            8,
        )
        .unwrap();
        assert!(d.rank() <= 3, "rank {}", d.rank());
    }

    #[test]
    fn cross_approximation_errors() {
        let g = GridSpec::new(5.0, 200, 200).unwrap();
        let err = cross_approximate(|x, y| (-(x - y) * (x - y)).exp(), &g, 1e-12, 2).unwrap_err();
        assert!(matches!(err, Error::RankCapExhausted { .. }));
        let err = cross_approximate(|x, y| 1.0 / (x * y), &g, 1e-6, 8).unwrap_err();
        assert!(matches!(err, Error::NonFiniteKernel { .. }));
    }
}
