//! The four initial particle-volume distributions, normalized to share one
//! initial new-phase volume `V(0)` on the simulation grid.

use crate::error::{Error, Result};
use crate::grid::{moments_slice, GridFunction, GridSpec};
use crate::params::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialKind {
    /// `phi00 * exp(-b0 xi)`, the reference solution's own initial state.
    Exp,
    /// `C1 * exp(-1.6 b0 xi)`.
    PertExp,
    /// `C2 * exp(-xi^2)`.
    Gaus,
    /// `C3 * exp(-(xi - 2)^2 / 4)`.
    Gaus2,
}

impl InitialKind {
    pub const ALL: [InitialKind; 4] = [
        InitialKind::Exp,
        InitialKind::PertExp,
        InitialKind::Gaus,
        InitialKind::Gaus2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InitialKind::Exp => "exp",
            InitialKind::PertExp => "pert_exp",
            InitialKind::Gaus => "gaus",
            InitialKind::Gaus2 => "gaus2",
        }
    }

    fn shape(self, b0: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| match self {
            InitialKind::Exp => (-b0 * x).exp(),
            InitialKind::PertExp => (-1.6 * b0 * x).exp(),
            InitialKind::Gaus => (-x * x).exp(),
            InitialKind::Gaus2 => (-(x - 2.0) * (x - 2.0) / 4.0).exp(),
        }
    }
}

impl std::str::FromStr for InitialKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        InitialKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown initial `{s}` (expected exp | pert_exp | gaus | gaus2)"))
    }
}

/// A resolved initial condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialSpec {
    pub kind: InitialKind,
    pub target_v0: f64,
    /// Amplitude multiplying the shape function.
    pub c: f64,
}

/// Discrete `V(0)` of the `exp` initial condition on this grid.
pub fn exp_volume(grid: &GridSpec, params: &PhysParams) -> f64 {
    let g = grid.sample(InitialKind::Exp.shape(params.b0));
    params.phi00 * moments_slice(grid, g.as_slice(), grid.m()).1
}

/// Resolves the amplitude for `kind`. For `exp` the amplitude is `phi00`
/// and the target volume is derived from it; otherwise the amplitude is
/// chosen so the discrete `V(0)` over `[0, H]` equals `target_v0` (default:
/// the `exp` volume).
pub fn resolve(
    kind: InitialKind,
    grid: &GridSpec,
    params: &PhysParams,
    target_v0: Option<f64>,
) -> Result<InitialSpec> {
    if kind == InitialKind::Exp {
        return Ok(InitialSpec {
            kind,
            target_v0: exp_volume(grid, params),
            c: params.phi00,
        });
    }
    let target = target_v0.unwrap_or_else(|| exp_volume(grid, params));
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::param("target_V0", format!("must be positive, got {target}")));
    }
    let g = grid.sample(kind.shape(params.b0));
    let shape_v = moments_slice(grid, g.as_slice(), grid.m()).1;
    if shape_v <= 0.0 || shape_v.is_nan() {
        return Err(Error::InvalidGrid(format!(
            "first moment of the `{}` shape vanishes on this grid",
            kind.name()
        )));
    }
    Ok(InitialSpec {
        kind,
        target_v0: target,
        c: target / shape_v,
    })
}

pub fn make_initial(
    kind: InitialKind,
    grid: &GridSpec,
    params: &PhysParams,
    target_v0: Option<f64>,
) -> Result<GridFunction> {
    let spec = resolve(kind, grid, params, target_v0)?;
    let shape = kind.shape(params.b0);
    Ok(grid.sample(|x| spec.c * shape(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v0(grid: &GridSpec, phi: &GridFunction) -> f64 {
        moments_slice(grid, phi.as_slice(), grid.m()).1
    }

    #[test]
    fn exp_volume_is_close_to_one() {
        let g = GridSpec::new(20.0, 4000, 4000).unwrap();
        let p = PhysParams::default();
        let phi = make_initial(InitialKind::Exp, &g, &p, None).unwrap();
        assert!((v0(&g, &phi) - 1.0).abs() < 5e-6);
        assert_eq!(phi[0], 1.0);
    }

    #[test]
    fn amplitudes_match_closed_forms() {
        let g = GridSpec::new(20.0, 4000, 4000).unwrap();
        let p = PhysParams::default();
        let c1 = resolve(InitialKind::PertExp, &g, &p, Some(1.0)).unwrap().c;
        assert!((c1 - 2.56).abs() < 1e-4, "{c1}");
        let c2 = resolve(InitialKind::Gaus, &g, &p, Some(1.0)).unwrap().c;
        assert!((c2 - 2.0).abs() < 1e-4, "{c2}");
        // int_0^inf xi exp(-(xi-2)^2/4) = 2 sqrt(pi) (1 + erf 1) + 2/e.
        let c3 = resolve(InitialKind::Gaus2, &g, &p, Some(1.0)).unwrap().c;
        assert!((c3 - 1.0 / 7.267_963_115).abs() < 1e-5, "{c3}");
    }

    #[test]
    fn all_kinds_share_v0() {
        let g = GridSpec::new(100.0, 10_000, 10_000).unwrap();
        let p = PhysParams::default();
        let target = exp_volume(&g, &p);
        for kind in InitialKind::ALL {
            let phi = make_initial(kind, &g, &p, None).unwrap();
            assert!((v0(&g, &phi) - target).abs() <= 1e-10 * target, "{kind:?}");
            assert!(phi.values[..=g.m()].iter().all(|x| *x >= 0.0));
            assert!(phi[0] > 0.0);
            assert!(phi[g.m()] < 1e-12 * phi.max_abs());
        }
    }

    #[test]
    fn amplitude_scales_with_target() {
        let g = GridSpec::new(20.0, 2000, 2000).unwrap();
        let p = PhysParams::default();
        for kind in [InitialKind::PertExp, InitialKind::Gaus, InitialKind::Gaus2] {
            let a = resolve(kind, &g, &p, Some(1.0)).unwrap().c;
            let b = resolve(kind, &g, &p, Some(2.0)).unwrap().c;
            assert!((b - 2.0 * a).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in InitialKind::ALL {
            assert_eq!(kind.name().parse::<InitialKind>().unwrap(), kind);
        }
        assert!("gauss".parse::<InitialKind>().is_err());
    }
}
