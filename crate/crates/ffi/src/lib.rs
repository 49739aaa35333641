//! C ABI for the coagrip solver.
//!
//! Every fallible function returns a [`CoagripStatus`]; on failure the
//! message is available from [`coagrip_last_error`] on the same thread.
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coagrip::ripening::AbsorberConfig;
use coagrip::{make_initial, Error, ParametricSolution, PhysParams, RunConfig, Simulation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoagripStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    OracleDomain = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Physical parameters of the dimensionless model.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CoagripParams {
    pub gamma: f64,
    pub kappa: f64,
    pub chi: f64,
    pub c_s: f64,
    pub delta0: f64,
    pub phi00: f64,
    pub b0: f64,
}

/// Scalar summary of a state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CoagripMoments {
    pub tau: f64,
    pub n: f64,
    pub v: f64,
    pub delta: f64,
}

/// Running simulation built from a configuration text.
pub struct CoagripSimulation {
    sim: Simulation,
    h_tau: f64,
}

/// Tabulated exact solution for the constant kernel.
pub struct CoagripOracle {
    sol: ParametricSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CoagripStatus, msg: impl Into<String>) -> CoagripStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> CoagripStatus {
    match e.exit_code() {
        3 => CoagripStatus::Numerical,
        4 => CoagripStatus::OracleDomain,
        _ => CoagripStatus::InvalidArgument,
    }
}

fn from_error(e: Error) -> CoagripStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

fn guard(f: impl FnOnce() -> CoagripStatus) -> CoagripStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CoagripStatus::Panic, "internal panic"),
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn coagrip_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn coagrip_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reference parameter set (gamma = 1, kappa = 0.2, chi = 0.01, ...).
#[no_mangle]
pub extern "C" fn coagrip_params_default() -> CoagripParams {
    let p = PhysParams::default();
    CoagripParams {
        gamma: p.gamma,
        kappa: p.kappa,
        chi: p.chi,
        c_s: p.c_s,
        delta0: p.delta0,
        phi00: p.phi00,
        b0: p.b0,
    }
}

/// Builds a simulation from `key = value` configuration text. The initial
/// state is the configured initial condition at `tau = 0`.
///
/// # Safety
/// `config` must be a NUL-terminated string or null; `out` must be a valid
/// pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn coagrip_simulation_new(
    config: *const c_char,
    out: *mut *mut CoagripSimulation,
) -> CoagripStatus {
    guard(|| {
        if out.is_null() {
            return fail(CoagripStatus::NullPointer, "out is null");
        }
        let text = if config.is_null() {
            String::new()
        } else {
            match CStr::from_ptr(config).to_str() {
                Ok(s) => s.to_owned(),
                Err(_) => return fail(CoagripStatus::InvalidArgument, "config is not UTF-8"),
            }
        };
        let built = (|| -> coagrip::Result<CoagripSimulation> {
            let cfg = RunConfig::parse(&text)?;
            let grid = cfg.grid()?;
            let kernel = cfg.kernel.build(&grid)?;
            let absorber = AbsorberConfig::new(&grid, cfg.d)?;
            let phi0 = make_initial(cfg.initial, &grid, &cfg.params, None)?;
            let h_tau = cfg.time()?.h_tau();
            let sim = Simulation::new(grid, kernel, cfg.params, absorber, cfg.backend, phi0)?;
            Ok(CoagripSimulation { sim, h_tau })
        })();
        match built {
            Ok(s) => {
                *out = Box::into_raw(Box::new(s));
                CoagripStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Advances the simulation by `steps` steps of the configured size.
///
/// # Safety
/// `sim` must be a handle from `coagrip_simulation_new` or null.
#[no_mangle]
pub unsafe extern "C" fn coagrip_simulation_step(sim: *mut CoagripSimulation, steps: usize) -> CoagripStatus {
    guard(|| {
        let Some(s) = sim.as_mut() else {
            return fail(CoagripStatus::NullPointer, "simulation is null");
        };
        for _ in 0..steps {
            if let Err(e) = s.sim.step(s.h_tau) {
                return from_error(e);
            }
        }
        CoagripStatus::Ok
    })
}

/// Writes the current time, moments and supersaturation.
///
/// # Safety
/// `sim` must be a valid handle or null; `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn coagrip_simulation_moments(
    sim: *const CoagripSimulation,
    out: *mut CoagripMoments,
) -> CoagripStatus {
    guard(|| {
        let (Some(s), false) = (sim.as_ref(), out.is_null()) else {
            return fail(CoagripStatus::NullPointer, "null argument");
        };
        let st = s.sim.state();
        *out = CoagripMoments {
            tau: st.tau,
            n: st.n,
            v: st.v,
            delta: st.delta,
        };
        CoagripStatus::Ok
    })
}

/// Number of grid nodes (length of the distribution array).
///
/// # Safety
/// `sim` must be a valid handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn coagrip_simulation_len(sim: *const CoagripSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.sim.grid().len())
}

/// Copies the distribution into `buf` (`len` doubles).
///
/// # Safety
/// `sim` must be a valid handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn coagrip_simulation_phi(
    sim: *const CoagripSimulation,
    buf: *mut f64,
    len: usize,
) -> CoagripStatus {
    guard(|| {
        let (Some(s), false) = (sim.as_ref(), buf.is_null()) else {
            return fail(CoagripStatus::NullPointer, "null argument");
        };
        let phi = s.sim.state().phi.as_slice();
        if len < phi.len() {
            return fail(
                CoagripStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", phi.len()),
            );
        }
        ptr::copy_nonoverlapping(phi.as_ptr(), buf, phi.len());
        CoagripStatus::Ok
    })
}

/// # Safety
/// `sim` must be a handle from `coagrip_simulation_new`, or null.
#[no_mangle]
pub unsafe extern "C" fn coagrip_simulation_free(sim: *mut CoagripSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Tabulates the exact solution for the given parameters.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn coagrip_oracle_new(
    params: *const CoagripParams,
    out: *mut *mut CoagripOracle,
) -> CoagripStatus {
    guard(|| {
        let (Some(p), false) = (params.as_ref(), out.is_null()) else {
            return fail(CoagripStatus::NullPointer, "null argument");
        };
        let phys = PhysParams {
            gamma: p.gamma,
            kappa: p.kappa,
            chi: p.chi,
            c_s: p.c_s,
            delta0: p.delta0,
            phi00: p.phi00,
            b0: p.b0,
            ..PhysParams::default()
        }
        .with_initial_volume(p.phi00 / (p.b0 * p.b0));
        match ParametricSolution::new(&phys) {
            Ok(sol) => {
                *out = Box::into_raw(Box::new(CoagripOracle { sol }));
                CoagripStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Exact moments and decay rate `b` at time `t`.
///
/// # Safety
/// `oracle` must be a valid handle; `out` and `b` must be writable (`b` may be null).
#[no_mangle]
pub unsafe extern "C" fn coagrip_oracle_at(
    oracle: *const CoagripOracle,
    t: f64,
    out: *mut CoagripMoments,
    b: *mut f64,
) -> CoagripStatus {
    guard(|| {
        let (Some(o), false) = (oracle.as_ref(), out.is_null()) else {
            return fail(CoagripStatus::NullPointer, "null argument");
        };
        let eval = || -> coagrip::Result<(f64, CoagripMoments)> {
            let bv = o.sol.invert_tau(t)?;
            let delta = coagrip::analytic::delta_of_b(bv, o.sol.params())?;
            Ok((
                bv,
                CoagripMoments {
                    tau: t,
                    n: o.sol.n_of_b(bv)?,
                    v: o.sol.v_of_b(bv)?,
                    delta,
                },
            ))
        };
        match eval() {
            Ok((bv, m)) => {
                *out = m;
                if !b.is_null() {
                    *b = bv;
                }
                CoagripStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `oracle` must be a handle from `coagrip_oracle_new`, or null.
#[no_mangle]
pub unsafe extern "C" fn coagrip_oracle_free(oracle: *mut CoagripOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}
