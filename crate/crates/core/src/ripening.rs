//! Finite differences for the ripening transport term
//! `delta^gamma * (kappa * dphi/dxi - chi * d2phi/dxi2)` and the exponential
//! absorbing layer.
//!
//! Interior nodes use central differences. The end nodes use the
//! second-order one-sided stencils
//! `(-3f0 + 4f1 - f2) / 2h` and `(2f0 - 5f1 + 4f2 - f3) / h^2` (mirrored at
//! the right end). No boundary condition is imposed at `xi = 0`.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::params::PhysParams;

fn require_nodes(phi: &[f64], n: usize) -> Result<()> {
    if phi.len() < n {
        return Err(Error::InvalidGrid(format!(
            "stencil needs at least {n} nodes, grid has {}",
            phi.len()
        )));
    }
    Ok(())
}

pub(crate) fn first_derivative_into(phi: &[f64], h: f64, out: &mut [f64]) {
    let n = phi.len();
    let inv2h = 0.5 / h;
    out[0] = (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) * inv2h;
    for i in 1..n - 1 {
        out[i] = (phi[i + 1] - phi[i - 1]) * inv2h;
    }
    out[n - 1] = (phi[n - 3] - 4.0 * phi[n - 2] + 3.0 * phi[n - 1]) * inv2h;
}

pub(crate) fn second_derivative_into(phi: &[f64], h: f64, out: &mut [f64]) {
    let n = phi.len();
    let inv = 1.0 / (h * h);
    out[0] = (2.0 * phi[0] - 5.0 * phi[1] + 4.0 * phi[2] - phi[3]) * inv;
    for i in 1..n - 1 {
        out[i] = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) * inv;
    }
    out[n - 1] = (-phi[n - 4] + 4.0 * phi[n - 3] - 5.0 * phi[n - 2] + 2.0 * phi[n - 1]) * inv;
}

/// One-sided derivative at node 0.
pub fn left_derivative(phi: &[f64], h: f64) -> f64 {
    (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * h)
}

pub fn first_derivative(grid: &GridSpec, phi: &GridFunction) -> Result<GridFunction> {
    grid.check(phi)?;
    require_nodes(phi.as_slice(), 3)?;
    let mut out = vec![0.0; phi.len()];
    first_derivative_into(phi.as_slice(), grid.step(), &mut out);
    Ok(GridFunction::from_values(out))
}

pub fn second_derivative(grid: &GridSpec, phi: &GridFunction) -> Result<GridFunction> {
    grid.check(phi)?;
    require_nodes(phi.as_slice(), 4)?;
    let mut out = vec![0.0; phi.len()];
    second_derivative_into(phi.as_slice(), grid.step(), &mut out);
    Ok(GridFunction::from_values(out))
}

/// `delta^gamma`, rejecting negative supersaturation for fractional gamma.
pub fn growth_factor(delta: f64, gamma: f64) -> Option<f64> {
    if gamma.fract() == 0.0 && gamma.abs() < i32::MAX as f64 {
        Some(delta.powi(gamma as i32))
    } else if delta >= 0.0 {
        Some(delta.powf(gamma))
    } else {
        None
    }
}

/// Writes `delta^gamma * (kappa * D1 - chi * D2)` into `out`, using `d1`/`d2`
/// as scratch. Returns the growth factor used.
pub(crate) fn ripening_into(
    phi: &[f64],
    h: f64,
    growth: f64,
    params: &PhysParams,
    d1: &mut [f64],
    d2: &mut [f64],
    out: &mut [f64],
) {
    if growth == 0.0 || (params.kappa == 0.0 && params.chi == 0.0) {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    first_derivative_into(phi, h, d1);
    second_derivative_into(phi, h, d2);
    let (k, c) = (growth * params.kappa, growth * params.chi);
    for ((o, a), b) in out.iter_mut().zip(d1.iter()).zip(d2.iter()) {
        *o = k * a - c * b;
    }
}

pub fn ripening_term(
    grid: &GridSpec,
    phi: &GridFunction,
    delta: f64,
    params: &PhysParams,
) -> Result<GridFunction> {
    grid.check(phi)?;
    require_nodes(phi.as_slice(), 4)?;
    let growth = growth_factor(delta, params.gamma).ok_or(Error::Exhausted {
        delta,
        step: 0,
        tau: f64::NAN,
    })?;
    let n = phi.len();
    let (mut d1, mut d2, mut out) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    ripening_into(phi.as_slice(), grid.step(), growth, params, &mut d1, &mut d2, &mut out);
    Ok(GridFunction::from_values(out))
}

/// Exponential damping of the absorbing layer `i = M+1 ..= Mxi`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorberConfig {
    d: f64,
    start: usize,
    factors: Vec<f64>,
}

impl AbsorberConfig {
    pub fn new(grid: &GridSpec, d: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::param("d", format!("must be nonnegative, got {d}")));
        }
        let m = grid.m();
        let factors = (m + 1..=grid.m_xi())
            .map(|i| (-d * (i - m) as f64 * grid.step()).exp())
            .collect();
        Ok(AbsorberConfig { d, start: m, factors })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Damping factor for node `i` (1 inside the physical region).
    pub fn factor(&self, i: usize) -> f64 {
        if i <= self.start {
            1.0
        } else {
            self.factors[i - self.start - 1]
        }
    }

    pub(crate) fn apply_slice(&self, phi: &mut [f64]) {
        for (p, f) in phi[self.start + 1..].iter_mut().zip(&self.factors) {
            *p *= f;
        }
    }
}

pub fn apply_absorber(phi: &mut GridFunction, cfg: &AbsorberConfig) -> Result<()> {
    let expected = cfg.start + 1 + cfg.factors.len();
    if phi.len() != expected {
        return Err(Error::GridMismatch {
            expected,
            actual: phi.len(),
        });
    }
    cfg.apply_slice(&mut phi.values);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kappa: f64, chi: f64, gamma: f64) -> PhysParams {
        PhysParams {
            gamma,
            kappa,
            chi,
            ..PhysParams::default()
        }
    }

    #[test]
    fn derivatives_exact_on_low_degree() {
        let g = GridSpec::new(1.0, 10, 10).unwrap();
        let d = first_derivative(&g, &g.sample(|x| x)).unwrap();
        assert!(d.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let d = first_derivative(&g, &g.sample(|x| x * x)).unwrap();
        for i in 0..=10 {
            assert!((d[i] - 2.0 * g.node(i)).abs() < 1e-12, "node {i}");
        }
        let d2 = second_derivative(&g, &g.sample(|x| x)).unwrap();
        assert!(d2.values.iter().all(|v| v.abs() < 1e-10));
        let d2 = second_derivative(&g, &g.sample(|x| x * x)).unwrap();
        assert!(d2.values.iter().all(|v| (v - 2.0).abs() < 1e-9));
        let c = g.sample(|_| 3.0);
        assert!(first_derivative(&g, &c).unwrap().values.iter().all(|v| v.abs() < 1e-12));
        assert!(second_derivative(&g, &c).unwrap().values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn derivatives_need_enough_nodes() {
        let g = GridSpec::new(1.0, 2, 2).unwrap();
        let f = g.sample(|x| x);
        assert!(first_derivative(&g, &f).is_ok());
        assert!(second_derivative(&g, &f).is_err());
    }

    fn max_err(v: &GridFunction, g: &GridSpec, f: impl Fn(f64) -> f64, range: std::ops::Range<usize>) -> f64 {
        range.map(|i| (v[i] - f(g.node(i))).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn derivatives_converge_second_order() {
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        for m in [100, 200, 400] {
            let g = GridSpec::new(5.0, m, m).unwrap();
            let phi = g.sample(|x| (-x).exp());
            let d1 = first_derivative(&g, &phi).unwrap();
            let d2 = second_derivative(&g, &phi).unwrap();
            e1.push(max_err(&d1, &g, |x| -(-x).exp(), 0..m + 1));
            e2.push(max_err(&d2, &g, |x| (-x).exp(), 1..m));
        }
        for e in [&e1, &e2] {
            for w in e.windows(2) {
                assert!((w[0] / w[1]).log2() >= 1.9, "{e:?}");
            }
        }
    }

    #[test]
    fn ripening_term_examples() {
        let g = GridSpec::new(10.0, 2000, 2000).unwrap();
        let phi = g.sample(|x| (-x).exp());
        let zero = ripening_term(&g, &phi, 0.2, &params(0.0, 0.0, 1.0)).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
        let zero = ripening_term(&g, &phi, 0.0, &params(0.2, 0.01, 1.0)).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));

        let r = ripening_term(&g, &phi, 0.2, &params(0.2, 0.01, 1.0)).unwrap();
        for i in 0..=2000 {
            let x = g.node(i);
            assert!((r[i] + 0.042 * (-x).exp()).abs() < 1e-5, "node {i}");
        }
    }

    #[test]
    fn ripening_term_rejects_negative_delta_for_fractional_gamma() {
        let g = GridSpec::new(1.0, 10, 10).unwrap();
        let phi = g.sample(|x| x);
        assert!(matches!(
            ripening_term(&g, &phi, -0.1, &params(0.2, 0.1, 0.5)),
            Err(Error::Exhausted { .. })
        ));
        assert!(ripening_term(&g, &phi, -0.1, &params(0.2, 0.1, 1.0)).is_ok());
    }

    #[test]
    fn absorber_examples() {
        let g = GridSpec::new(20.0, 4000, 4000).unwrap();
        let a = AbsorberConfig::new(&g, 5.0).unwrap();
        let mut phi = g.sample(|x| x + 1.0);
        let before = phi.clone();
        apply_absorber(&mut phi, &a).unwrap();
        assert_eq!(phi, before);

        let g = GridSpec::new(20.0, 4000, 4100).unwrap();
        let a = AbsorberConfig::new(&g, 5.0).unwrap();
        assert!((a.factor(4010) - 0.778_800_783_071_404_9).abs() < 1e-12);
        let mut phi = g.sample(|_| 1.0);
        apply_absorber(&mut phi, &a).unwrap();
        assert!(phi.values[..=4000].iter().all(|v| *v == 1.0));
        assert!((phi[4010] - (-0.25_f64).exp()).abs() < 1e-12);
        for w in phi.values[4000..].windows(2) {
            assert!(w[1] <= w[0] && w[1] > 0.0);
        }

        let a0 = AbsorberConfig::new(&g, 0.0).unwrap();
        let mut phi = g.sample(|_| 1.0);
        apply_absorber(&mut phi, &a0).unwrap();
        assert!(phi.values.iter().all(|v| *v == 1.0));
        assert!(AbsorberConfig::new(&g, -1.0).is_err());
    }

    #[test]
    fn absorber_repeats_compound() {
        let g = GridSpec::new(10.0, 100, 140).unwrap();
        let a = AbsorberConfig::new(&g, 5.0).unwrap();
        let mut phi = g.sample(|_| 2.0);
        for _ in 0..3 {
            apply_absorber(&mut phi, &a).unwrap();
        }
        for i in 101..=140 {
            assert!((phi[i] - 2.0 * a.factor(i).powi(3)).abs() < 1e-14);
        }
    }
}
