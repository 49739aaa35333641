//! Physical parameters in dimensional and dimensionless form.

use crate::error::{Error, Result};

/// Dimensionless model constants.
///
/// `mass_const` is the conserved combination `Q + c_i - c_s` in the balance
/// `V + c_s * delta = mass_const`. A simulation overwrites it with
/// `V(0) + c_s * delta0` computed from its discrete initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Growth-law exponent.
    pub gamma: f64,
    /// Migration coefficient.
    pub kappa: f64,
    /// Volume-diffusion coefficient.
    pub chi: f64,
    /// Saturation concentration.
    pub c_s: f64,
    pub delta0: f64,
    pub mass_const: f64,
    /// `Phi(0, 0)`.
    pub phi00: f64,
    /// Initial exponential rate of the reference solution.
    pub b0: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            gamma: 1.0,
            kappa: 0.2,
            chi: 0.01,
            c_s: 10.0,
            delta0: 0.2,
            mass_const: 1.0 + 10.0 * 0.2,
            phi00: 1.0,
            b0: 1.0,
        }
    }
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(key, format!("must be positive, got {v}")))
            }
        };
        let nonneg = |key: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(key, format!("must be nonnegative, got {v}")))
            }
        };
        positive("gamma", self.gamma)?;
        nonneg("kappa", self.kappa)?;
        nonneg("chi", self.chi)?;
        positive("cs", self.c_s)?;
        positive("delta0", self.delta0)?;
        positive("phi00", self.phi00)?;
        positive("b0", self.b0)?;
        if !self.mass_const.is_finite() {
            return Err(Error::param("mass_const", "must be finite"));
        }
        Ok(())
    }

    /// Same parameters with the mass constant set from an initial volume.
    pub fn with_initial_volume(mut self, v0: f64) -> Self {
        self.mass_const = v0 + self.c_s * self.delta0;
        self
    }
}

/// Dimensional inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalParams {
    /// Constant coagulation kernel.
    pub a0: f64,
    /// Growth-rate constant in `dv/dt = k_g (c - c_s)^gamma`.
    pub k_g: f64,
    pub gamma: f64,
    /// Diffusion intensity in volume space, `D_v = d_o dv/dt`.
    pub d_o: f64,
    pub c_s: f64,
    pub c_i: f64,
    pub q: f64,
    /// Initial number density `N(0)`.
    pub n0: f64,
    /// Initial new-phase volume per unit volume of space.
    pub v0: f64,
    /// `Phi(0,0)` and `b0` of the reference exponential initial state.
    pub phi00: f64,
    pub b0: f64,
}

/// Converts dimensional parameters to the dimensionless model.
///
/// `kappa = k_g c_s^gamma / A0`, `chi = d_o kappa N(0)`, and the initial
/// supersaturation follows from the mass balance `c(0) = Q + c_i - V(0)`.
pub fn nondimensionalize(dp: &DimensionalParams) -> Result<PhysParams> {
    for (key, v) in [
        ("A0", dp.a0),
        ("k_g", dp.k_g),
        ("gamma", dp.gamma),
        ("cs", dp.c_s),
        ("c_i", dp.c_i),
        ("N0", dp.n0),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(key, format!("must be positive, got {v}")));
        }
    }
    for (key, v) in [("d_o", dp.d_o), ("Q", dp.q), ("V0", dp.v0)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::param(key, format!("must be nonnegative, got {v}")));
        }
    }
    let kappa = dp.k_g * dp.c_s.powf(dp.gamma) / dp.a0;
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::param("kappa", format!("derived value {kappa} is not positive")));
    }
    let chi = dp.d_o * kappa * dp.n0;
    let c0 = dp.q + dp.c_i - dp.v0;
    let delta0 = (c0 - dp.c_s) / dp.c_s;
    let p = PhysParams {
        gamma: dp.gamma,
        kappa,
        chi,
        c_s: dp.c_s,
        delta0,
        mass_const: dp.q + dp.c_i - dp.c_s,
        phi00: dp.phi00,
        b0: dp.b0,
    };
    p.validate()?;
    Ok(p)
}
