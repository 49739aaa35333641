//! Explicit Euler integration of the coupled coagulation/ripening system.
//!
//! One step evaluates the coagulation operators and the ripening term at the
//! current state, updates `phi`, damps the absorbing layer, then recomputes
//! the moments over `[0, H]` and the supersaturation from the mass balance.

use crate::coagulation::{coagulation_into, Backend, OperatorWorkspace};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{moments_slice, GridFunction, GridSpec};
use crate::initial::make_initial;
use crate::kernels::LowRankKernel;
use crate::params::PhysParams;
use crate::ripening::{growth_factor, left_derivative, ripening_into, AbsorberConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpec {
    pub t_final: f64,
    pub m_tau: usize,
    pub snapshot_times: Vec<f64>,
}

impl TimeSpec {
    pub fn new(t_final: f64, m_tau: usize, snapshot_times: Vec<f64>) -> Result<Self> {
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::param("T", format!("must be nonnegative, got {t_final}")));
        }
        if m_tau == 0 {
            return Err(Error::param("Mtau", "must be at least 1"));
        }
        if let Some(s) = snapshot_times
            .iter()
            .find(|s| !(s.is_finite() && **s >= 0.0 && **s <= t_final * (1.0 + 1e-12)))
        {
            return Err(Error::param("snapshots", format!("time {s} outside [0, {t_final}]")));
        }
        Ok(TimeSpec {
            t_final,
            m_tau,
            snapshot_times,
        })
    }

    pub fn h_tau(&self) -> f64 {
        self.t_final / self.m_tau as f64
    }

    /// Step index at which a snapshot for time `s` is taken.
    pub fn snapshot_step(&self, s: f64) -> usize {
        if self.t_final == 0.0 {
            return 0;
        }
        ((s / self.h_tau()).round() as usize).min(self.m_tau)
    }
}

/// Supersaturation from the mass balance; negative values are tagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Supersaturation {
    Active(f64),
    Exhausted(f64),
}

impl Supersaturation {
    pub fn value(self) -> f64 {
        match self {
            Supersaturation::Active(d) | Supersaturation::Exhausted(d) => d,
        }
    }
}

/// `delta = (mass_const - V) / c_s`.
pub fn update_supersaturation(v: f64, params: &PhysParams) -> Supersaturation {
    let d = (params.mass_const - v) / params.c_s;
    if d < 0.0 {
        Supersaturation::Exhausted(d)
    } else {
        Supersaturation::Active(d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub tau: f64,
    pub phi: GridFunction,
    pub delta: f64,
    pub n: f64,
    pub v: f64,
    pub step_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CflStatus {
    Pass,
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflReport {
    pub status: CflStatus,
    /// `h^2 / (2 chi delta^gamma)`, infinite when there is no diffusion.
    pub diffusion_bound: f64,
    /// `h / (kappa delta^gamma)`, infinite when there is no migration.
    pub advection_bound: f64,
    pub h_tau: f64,
}

/// Explicit stability guard for the transport part; a warning does not abort.
pub fn check_cfl(params: &PhysParams, grid: &GridSpec, h_tau: f64, delta_max: f64) -> CflReport {
    let growth = delta_max.abs().powf(params.gamma);
    let h = grid.step();
    let bound = |num: f64, coef: f64| {
        if coef * growth > 0.0 {
            num / (coef * growth)
        } else {
            f64::INFINITY
        }
    };
    let diffusion_bound = bound(h * h, 2.0 * params.chi);
    let advection_bound = bound(h, params.kappa);
    let status = if h_tau <= diffusion_bound && h_tau <= advection_bound {
        CflStatus::Pass
    } else {
        CflStatus::Warn
    };
    CflReport {
        status,
        diffusion_bound,
        advection_bound,
        h_tau,
    }
}

/// A running simulation: state plus the operators and scratch it owns.
#[derive(Debug)]
pub struct Simulation {
    grid: GridSpec,
    params: PhysParams,
    kernel: LowRankKernel,
    ws: OperatorWorkspace,
    absorber: AbsorberConfig,
    backend: Backend,
    state: SimState,
    gain: Vec<f64>,
    loss: Vec<f64>,
    rip: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Simulation {
    /// Starts from `phi0`; the mass constant is set to `V(0) + c_s delta0`.
    pub fn new(
        grid: GridSpec,
        kernel: LowRankKernel,
        params: PhysParams,
        absorber: AbsorberConfig,
        backend: Backend,
        phi0: GridFunction,
    ) -> Result<Self> {
        params.validate()?;
        grid.check(&phi0)?;
        if *crate::kernels::KernelEntries::grid(&kernel) != grid {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                actual: crate::kernels::KernelEntries::grid(&kernel).len(),
            });
        }
        if grid.len() < 4 {
            return Err(Error::InvalidGrid("the stepper needs at least 4 nodes".into()));
        }
        if let Some(node) = phi0.first_non_finite() {
            return Err(Error::NonFinite {
                node,
                step: 0,
                tau: 0.0,
            });
        }
        let (n, v) = moments_slice(&grid, phi0.as_slice(), grid.m());
        let params = params.with_initial_volume(v);
        let len = grid.len();
        Ok(Simulation {
            ws: OperatorWorkspace::new(&grid),
            grid,
            params,
            kernel,
            absorber,
            backend,
            state: SimState {
                tau: 0.0,
                phi: phi0,
                delta: params.delta0,
                n,
                v,
                step_index: 0,
            },
            gain: vec![0.0; len],
            loss: vec![0.0; len],
            rip: vec![0.0; len],
            d1: vec![0.0; len],
            d2: vec![0.0; len],
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kernel(&self) -> &LowRankKernel {
        &self.kernel
    }

    /// Advances one explicit Euler step of size `h_tau`.
    pub fn step(&mut self, h_tau: f64) -> Result<()> {
        let st = &mut self.state;
        let next_step = st.step_index + 1;
        let growth = growth_factor(st.delta, self.params.gamma).ok_or(Error::Exhausted {
            delta: st.delta,
            step: st.step_index,
            tau: st.tau,
        })?;
        let h = self.grid.step();
        let phi = &mut st.phi.values;
        coagulation_into(
            self.backend,
            &self.kernel,
            phi,
            &mut self.ws,
            &mut self.gain,
            &mut self.loss,
        );
        ripening_into(phi, h, growth, &self.params, &mut self.d1, &mut self.d2, &mut self.rip);
        for (((p, g), l), r) in phi.iter_mut().zip(&self.gain).zip(&self.loss).zip(&self.rip) {
            *p += h_tau * (g - *p * l - r);
        }
        self.absorber.apply_slice(phi);
        if let Some(node) = phi.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                node,
                step: next_step,
                tau: st.tau + h_tau,
            });
        }
        let (n, v) = moments_slice(&self.grid, phi, self.grid.m());
        let delta = match update_supersaturation(v, &self.params) {
            Supersaturation::Exhausted(d) if self.params.gamma.fract() != 0.0 => {
                return Err(Error::Exhausted {
                    delta: d,
                    step: next_step,
                    tau: st.tau + h_tau,
                })
            }
            s => s.value(),
        };
        st.n = n;
        st.v = v;
        st.delta = delta;
        st.tau += h_tau;
        st.step_index = next_step;
        Ok(())
    }

    /// Sets the time explicitly (avoids drift from repeated addition).
    pub(crate) fn set_tau(&mut self, tau: f64) {
        self.state.tau = tau;
    }
}

/// Single Euler step as a pure function of the input state.
pub fn euler_step(
    state: &SimState,
    kernel: &LowRankKernel,
    params: &PhysParams,
    absorber: &AbsorberConfig,
    backend: Backend,
    h_tau: f64,
) -> Result<SimState> {
    let grid = *crate::kernels::KernelEntries::grid(kernel);
    let mut sim = Simulation::new(
        grid,
        kernel.clone(),
        *params,
        absorber.clone(),
        backend,
        state.phi.clone(),
    )?;
    sim.params.mass_const = params.mass_const;
    sim.state = state.clone();
    sim.step(h_tau)?;
    Ok(sim.state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub tau: f64,
    pub n: f64,
    pub v: f64,
    pub delta: f64,
    /// `phi(0)` and the one-sided `dphi/dxi(0)`.
    pub phi0: f64,
    pub dphi0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub requested: f64,
    pub tau: f64,
    pub step: usize,
    pub phi: GridFunction,
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub params: PhysParams,
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<SeriesPoint>,
    pub cfl: CflReport,
}

impl Trajectory {
    /// Snapshot taken for requested time `s`.
    pub fn snapshot(&self, s: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|p| p.requested == s)
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots
            .iter()
            .max_by_key(|s| s.step)
            .expect("trajectory always holds the final state")
    }
}

fn series_point(sim: &Simulation) -> SeriesPoint {
    let st = sim.state();
    SeriesPoint {
        tau: st.tau,
        n: st.n,
        v: st.v,
        delta: st.delta,
        phi0: st.phi[0],
        dphi0: left_derivative(st.phi.as_slice(), sim.grid.step()),
    }
}

/// Runs the configured experiment from its configured initial condition.
pub fn run(cfg: &RunConfig) -> Result<Trajectory> {
    let grid = cfg.grid()?;
    let phi0 = make_initial(cfg.initial, &grid, &cfg.params, None)?;
    run_from(cfg, phi0)
}

/// Runs the configured experiment from an explicit initial condition.
///
/// Snapshots are recorded at every requested time (rounded to the nearest
/// step) and always at `T`; the series is recorded every `series_stride`
/// steps and at `T`.
pub fn run_from(cfg: &RunConfig, phi0: GridFunction) -> Result<Trajectory> {
    let grid = cfg.grid()?;
    let kernel = cfg.kernel.build(&grid)?;
    let absorber = AbsorberConfig::new(&grid, cfg.d)?;
    let time = cfg.time()?;
    let mut sim = Simulation::new(grid, kernel, cfg.params, absorber, cfg.backend, phi0)?;
    let h_tau = time.h_tau();
    let cfl = check_cfl(sim.params(), &grid, h_tau, cfg.params.delta0);

    let mut wanted: Vec<(usize, f64)> = time
        .snapshot_times
        .iter()
        .map(|&s| (time.snapshot_step(s), s))
        .collect();
    if !wanted.iter().any(|(k, _)| *k == time.m_tau) && time.t_final > 0.0 {
        wanted.push((time.m_tau, time.t_final));
    }
    if time.t_final == 0.0 && wanted.is_empty() {
        wanted.push((0, 0.0));
    }
    wanted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let steps = if time.t_final == 0.0 { 0 } else { time.m_tau };
    let stride = cfg.series_stride.max(1);
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut series = Vec::new();
    let mut next = 0;

    for j in 0..=steps {
        if j > 0 {
            sim.step(h_tau)?;
            sim.set_tau(j as f64 * h_tau);
        }
        if j % stride == 0 || j == steps {
            series.push(series_point(&sim));
        }
        while next < wanted.len() && wanted[next].0 == j {
            let st = sim.state();
            snapshots.push(Snapshot {
                requested: wanted[next].1,
                tau: st.tau,
                step: j,
                phi: st.phi.clone(),
                delta: st.delta,
            });
            next += 1;
        }
    }
    Ok(Trajectory {
        grid,
        params: *sim.params(),
        snapshots,
        series,
        cfl,
    })
}
