//! Exact parametric solution of the constant-kernel system.
//!
//! With `b` the decay rate of the exponential distribution:
//!
//! ```text
//! delta(b) = [delta0^(1-g) + kappa(1-g)/c_s (ln(b^2/b0^2) + 2 chi (b-b0)/kappa)]^(1/(1-g))   (g != 1)
//!          = delta0 (b/b0)^(2 kappa/c_s) exp(2 chi (b-b0)/c_s)                             (g == 1)
//! h(b)     = -phi00 b^2 / (2 b0^2) + b^2 * int_{b0}^{b} delta^g(s) (kappa + chi s) / s ds
//! tau(b)   = int_{b0}^{b} ds / h(s)
//! n = -2h/b,  V = -2h/b^2,  phi(xi) = -2h exp(-b xi)
//! ```
//!
//! Both integrals are tabulated with the trapezoid rule on a uniform,
//! descending `b` grid; values between nodes extend the same rule over the
//! partial interval, so `h` and `tau` are continuous in `b`.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::params::PhysParams;

pub const DEFAULT_NODES: usize = 40_000;
/// Lower end of the tabulated range, relative to `b0`.
pub const DEFAULT_B_MIN_RATIO: f64 = 1e-2;

/// Closed-form supersaturation along the parametric curve.
pub fn delta_of_b(b: f64, params: &PhysParams) -> Result<f64> {
    let PhysParams {
        gamma,
        kappa,
        chi,
        c_s,
        delta0,
        b0,
        ..
    } = *params;
    if !(b > 0.0 && b <= b0 * (1.0 + 1e-12)) {
        return Err(Error::OracleDomain(format!("b={b} outside (0, b0={b0}]")));
    }
    if gamma == 1.0 {
        return Ok(delta0 * (b / b0).powf(2.0 * kappa / c_s) * (2.0 * chi * (b - b0) / c_s).exp());
    }
    // kappa * (ln + 2 chi (b - b0) / kappa), written to allow kappa = 0.
    let drive = kappa * (b * b / (b0 * b0)).ln() + 2.0 * chi * (b - b0);
    let bracket = delta0.powf(1.0 - gamma) + (1.0 - gamma) / c_s * drive;
    if bracket < 0.0 {
        return Err(Error::OracleDomain(format!(
            "supersaturation bracket is negative at b={b} (critical point reached)"
        )));
    }
    Ok(bracket.powf(1.0 / (1.0 - gamma)))
}

fn integrand(b: f64, delta: f64, params: &PhysParams) -> f64 {
    delta.powf(params.gamma) * (params.kappa + params.chi * b) / b
}

/// Tabulated parametric solution.
#[derive(Debug, Clone)]
pub struct ParametricSolution {
    params: PhysParams,
    b: Vec<f64>,
    delta: Vec<f64>,
    /// `int_{b0}^{b_k}` of the `h` integrand (nonpositive).
    integral: Vec<f64>,
    h: Vec<f64>,
    tau: Vec<f64>,
}

/// Exact state at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactState {
    pub b: f64,
    pub phi: GridFunction,
    pub n: f64,
    pub v: f64,
    pub delta: f64,
}

impl ParametricSolution {
    /// Table on `DEFAULT_NODES` nodes from `b0` down to `b0 * 1e-2`, which
    /// covers `tau` beyond 100 for the reference parameter sets.
    pub fn new(params: &PhysParams) -> Result<Self> {
        Self::with_nodes(params, DEFAULT_NODES, params.b0 * DEFAULT_B_MIN_RATIO)
    }

    /// Table on `nodes` uniform nodes from `b0` down to `b_min`. If the
    /// supersaturation leaves its domain before `b_min`, the table stops at
    /// the last valid node.
    pub fn with_nodes(params: &PhysParams, nodes: usize, b_min: f64) -> Result<Self> {
        params.validate()?;
        if nodes < 2 {
            return Err(Error::param("nodes", "need at least 2 parameter nodes"));
        }
        if !(b_min > 0.0 && b_min < params.b0) {
            return Err(Error::param("b_min", format!("must lie in (0, b0), got {b_min}")));
        }
        let b0 = params.b0;
        let db = (b0 - b_min) / (nodes - 1) as f64;
        let mut sol = ParametricSolution {
            params: *params,
            b: Vec::with_capacity(nodes),
            delta: Vec::with_capacity(nodes),
            integral: Vec::with_capacity(nodes),
            h: Vec::with_capacity(nodes),
            tau: Vec::with_capacity(nodes),
        };
        let h_start = -params.phi00 / (2.0 * b0 * b0);
        for k in 0..nodes {
            let b = if k == nodes - 1 { b_min } else { b0 - k as f64 * db };
            let Ok(delta) = delta_of_b(b, params) else {
                break;
            };
            let f = integrand(b, delta, params);
            let (integral, tau, h) = if k == 0 {
                (0.0, 0.0, b * b * h_start)
            } else {
                let prev = k - 1;
                let step = sol.b[prev] - b;
                let fp = integrand(sol.b[prev], sol.delta[prev], params);
                let integral = sol.integral[prev] - 0.5 * step * (fp + f);
                let h = b * b * (h_start + integral);
                if h >= 0.0 || h.is_nan() {
                    break;
                }
                let tau = sol.tau[prev] - 0.5 * step * (1.0 / sol.h[prev] + 1.0 / h);
                (integral, tau, h)
            };
            sol.b.push(b);
            sol.delta.push(delta);
            sol.integral.push(integral);
            sol.h.push(h);
            sol.tau.push(tau);
        }
        if sol.b.len() < 2 {
            return Err(Error::OracleDomain("parametric curve is empty below b0".into()));
        }
        Ok(sol)
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn b_grid(&self) -> &[f64] {
        &self.b
    }

    pub fn delta_table(&self) -> &[f64] {
        &self.delta
    }

    pub fn h_table(&self) -> &[f64] {
        &self.h
    }

    pub fn tau_table(&self) -> &[f64] {
        &self.tau
    }

    pub fn tau_max(&self) -> f64 {
        *self.tau.last().expect("table has at least two nodes")
    }

    pub fn b_min(&self) -> f64 {
        *self.b.last().expect("table has at least two nodes")
    }

    /// Table interval `k` with `b_k >= b >= b_{k+1}`.
    fn interval(&self, b: f64) -> Result<usize> {
        let b0 = self.b[0];
        if !(b <= b0 * (1.0 + 1e-12) && b >= self.b_min()) {
            return Err(Error::OracleDomain(format!(
                "b={b} outside tabulated range [{}, {b0}]",
                self.b_min()
            )));
        }
        let k = self.b.partition_point(|&x| x > b);
        Ok(k.saturating_sub(1).min(self.b.len() - 2))
    }

    fn integral_at(&self, b: f64, k: usize) -> Result<(f64, f64)> {
        let delta = delta_of_b(b, &self.params)?;
        let fk = integrand(self.b[k], self.delta[k], &self.params);
        let f = integrand(b, delta, &self.params);
        Ok((self.integral[k] - 0.5 * (self.b[k] - b) * (fk + f), delta))
    }

    pub fn h_of_b(&self, b: f64) -> Result<f64> {
        let k = self.interval(b)?;
        let (integral, _) = self.integral_at(b, k)?;
        let b0 = self.params.b0;
        Ok(b * b * (-self.params.phi00 / (2.0 * b0 * b0) + integral))
    }

    pub fn tau_of_b(&self, b: f64) -> Result<f64> {
        let k = self.interval(b)?;
        let h = self.h_of_b(b)?;
        if h >= 0.0 || h.is_nan() {
            return Err(Error::OracleDomain(format!("h(b) = {h} is not negative at b={b}")));
        }
        Ok(self.tau[k] - 0.5 * (self.b[k] - b) * (1.0 / self.h[k] + 1.0 / h))
    }

    pub fn n_of_b(&self, b: f64) -> Result<f64> {
        Ok(-2.0 * self.h_of_b(b)? / b)
    }

    pub fn v_of_b(&self, b: f64) -> Result<f64> {
        Ok(-2.0 * self.h_of_b(b)? / (b * b))
    }

    /// Parameter value `b` with `tau(b) = t`.
    pub fn invert_tau(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::OracleDomain(format!("time must be nonnegative, got {t}")));
        }
        if t == 0.0 {
            return Ok(self.b[0]);
        }
        if t > self.tau_max() {
            return Err(Error::OracleRange {
                t,
                tau_max: self.tau_max(),
            });
        }
        let k = self.tau.partition_point(|&x| x < t).clamp(1, self.tau.len() - 1);
        // tau increases as b decreases: hi_b has the smaller tau.
        let (mut hi_b, mut lo_b) = (self.b[k - 1], self.b[k]);
        let span = self.tau[k] - self.tau[k - 1];
        let guess = if span > 0.0 {
            hi_b - (hi_b - lo_b) * (t - self.tau[k - 1]) / span
        } else {
            0.5 * (hi_b + lo_b)
        };
        let mut b = guess;
        for _ in 0..200 {
            let f = self.tau_of_b(b)? - t;
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                lo_b = b;
            } else {
                hi_b = b;
            }
            if hi_b - lo_b <= 1e-15 * hi_b {
                break;
            }
            b = 0.5 * (hi_b + lo_b);
        }
        Ok(b)
    }

    /// Exact distribution and moments at time `t` on the given grid.
    pub fn exact_state(&self, t: f64, grid: &GridSpec) -> Result<ExactState> {
        let b = self.invert_tau(t)?;
        let h = self.h_of_b(b)?;
        let amp = -2.0 * h;
        Ok(ExactState {
            b,
            phi: grid.sample(|x| amp * (-b * x).exp()),
            n: amp / b,
            v: amp / (b * b),
            delta: delta_of_b(b, &self.params)?,
        })
    }
}
