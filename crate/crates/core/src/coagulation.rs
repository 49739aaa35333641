//! Gain (`L1`) and loss (`L2`) coagulation operators on the uniform grid.
//!
//! ```text
//! L1(phi)(xi_i) = 1/2 * trap_{eta in [0, xi_i]} A(eta, xi_i - eta) phi(eta) phi(xi_i - eta)
//! L2(phi)(xi_i) = trap_{eta in [0, xi_Mxi]} A(xi_i, eta) phi(eta)
//! ```
//!
//! The naive paths evaluate these sums directly in O(M^2). The fast paths
//! use the separated kernel form: `L2` reduces to R weighted sums and `L1`
//! to R zero-padded linear convolutions computed with real FFTs.

use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::grid::{trapezoid_slice, GridFunction, GridSpec};
use crate::kernels::{KernelEntries, LowRankKernel};

/// FFT buffers and plans bound to one grid.
pub struct OperatorWorkspace {
    grid: GridSpec,
    fft_len: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    a: Vec<f64>,
    b: Vec<f64>,
    spec_a: Vec<Complex<f64>>,
    spec_b: Vec<Complex<f64>>,
    acc: Vec<Complex<f64>>,
    conv: Vec<f64>,
    scratch_fwd: Vec<Complex<f64>>,
    scratch_inv: Vec<Complex<f64>>,
}

impl std::fmt::Debug for OperatorWorkspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorWorkspace")
            .field("grid", &self.grid)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl OperatorWorkspace {
    pub fn new(grid: &GridSpec) -> Self {
        let fft_len = (2 * grid.len()).next_power_of_two();
        let mut planner = RealFftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let spec_a = forward.make_output_vec();
        OperatorWorkspace {
            grid: *grid,
            fft_len,
            a: forward.make_input_vec(),
            b: forward.make_input_vec(),
            spec_b: spec_a.clone(),
            acc: spec_a.clone(),
            spec_a,
            conv: inverse.make_output_vec(),
            scratch_fwd: forward.make_scratch_vec(),
            scratch_inv: inverse.make_scratch_vec(),
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    fn check(&self, kernel: &LowRankKernel, phi: &GridFunction) -> Result<()> {
        if *kernel.grid() != self.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.len(),
                actual: kernel.grid().len(),
            });
        }
        self.grid.check(phi)
    }
}

fn check_pair<K: KernelEntries + ?Sized>(kernel: &K, phi: &GridFunction) -> Result<()> {
    kernel.grid().check(phi)
}

/// Direct O(M^2) evaluation of the gain operator.
pub fn l1_naive<K: KernelEntries + ?Sized>(kernel: &K, phi: &GridFunction) -> Result<GridFunction> {
    check_pair(kernel, phi)?;
    let h = kernel.grid().step();
    let p = phi.as_slice();
    let mut out = vec![0.0; p.len()];
    for (i, o) in out.iter_mut().enumerate().skip(1) {
        let mut s = 0.0;
        for k in 0..=i {
            s += kernel.entry(k, i - k) * p[k] * p[i - k];
        }
        let ends = 0.5 * (kernel.entry(0, i) * p[0] * p[i] + kernel.entry(i, 0) * p[i] * p[0]);
        *o = 0.5 * h * (s - ends);
    }
    Ok(GridFunction::from_values(out))
}

/// Direct O(M^2) evaluation of the loss operator over the full grid.
pub fn l2_naive<K: KernelEntries + ?Sized>(kernel: &K, phi: &GridFunction) -> Result<GridFunction> {
    check_pair(kernel, phi)?;
    let h = kernel.grid().step();
    let p = phi.as_slice();
    let last = p.len() - 1;
    let out = (0..p.len())
        .map(|i| {
            let inner: f64 = (1..last).map(|j| kernel.entry(i, j) * p[j]).sum();
            h * (0.5 * (kernel.entry(i, 0) * p[0] + kernel.entry(i, last) * p[last]) + inner)
        })
        .collect();
    Ok(GridFunction::from_values(out))
}

/// FFT evaluation of the gain operator, writing into `out`.
pub fn l1_fast_into(
    kernel: &LowRankKernel,
    phi: &[f64],
    ws: &mut OperatorWorkspace,
    out: &mut [f64],
) {
    let n = phi.len();
    let h = ws.grid.step();
    let inv = 1.0 / ws.fft_len as f64;
    ws.acc.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
    // Trapezoid end corrections: sum_a a_a(0) b_a(i) + a_a(i) b_a(0).
    out.iter_mut().for_each(|o| *o = 0.0);

    for alpha in 0..kernel.rank() {
        let (u, v) = (kernel.u(alpha), kernel.v(alpha));
        for k in 0..n {
            ws.a[k] = u[k] * phi[k];
        }
        ws.a[n..].iter_mut().for_each(|x| *x = 0.0);
        let (a0, b0) = (ws.a[0], v[0] * phi[0]);
        for k in 0..n {
            out[k] += a0 * v[k] * phi[k] + ws.a[k] * b0;
        }
        ws.forward
            .process_with_scratch(&mut ws.a, &mut ws.spec_a, &mut ws.scratch_fwd)
            .expect("fft buffer sizes are fixed by the workspace");
        match kernel.proportional(alpha) {
            Some(c) => {
                for (acc, s) in ws.acc.iter_mut().zip(&ws.spec_a) {
                    *acc += s * s * c;
                }
            }
            None => {
                for k in 0..n {
                    ws.b[k] = v[k] * phi[k];
                }
                ws.b[n..].iter_mut().for_each(|x| *x = 0.0);
                ws.forward
                    .process_with_scratch(&mut ws.b, &mut ws.spec_b, &mut ws.scratch_fwd)
                    .expect("fft buffer sizes are fixed by the workspace");
                for ((acc, sa), sb) in ws.acc.iter_mut().zip(&ws.spec_a).zip(&ws.spec_b) {
                    *acc += sa * sb;
                }
            }
        }
    }
    // The c2r transform requires purely real DC and Nyquist bins.
    let last = ws.acc.len() - 1;
    ws.acc[0].im = 0.0;
    ws.acc[last].im = 0.0;
    ws.inverse
        .process_with_scratch(&mut ws.acc, &mut ws.conv, &mut ws.scratch_inv)
        .expect("fft buffer sizes are fixed by the workspace");
    out[0] = 0.0;
    for (o, c) in out[1..n].iter_mut().zip(&ws.conv[1..n]) {
        *o = 0.5 * h * (c * inv - 0.5 * *o);
    }
}

/// Separable evaluation of the loss operator, writing into `out`.
pub fn l2_fast_into(kernel: &LowRankKernel, phi: &[f64], ws: &OperatorWorkspace, out: &mut [f64]) {
    let h = ws.grid.step();
    let last = phi.len() - 1;
    out.iter_mut().for_each(|o| *o = 0.0);
    for alpha in 0..kernel.rank() {
        let (u, v) = (kernel.u(alpha), kernel.v(alpha));
        let s = if last == 0 {
            0.0
        } else {
            let inner: f64 = (1..last).map(|j| v[j] * phi[j]).sum();
            h * (0.5 * (v[0] * phi[0] + v[last] * phi[last]) + inner)
        };
        for (o, uu) in out.iter_mut().zip(u) {
            *o += uu * s;
        }
    }
}

pub fn l1_fast(
    kernel: &LowRankKernel,
    phi: &GridFunction,
    ws: &mut OperatorWorkspace,
) -> Result<GridFunction> {
    ws.check(kernel, phi)?;
    let mut out = vec![0.0; phi.len()];
    l1_fast_into(kernel, phi.as_slice(), ws, &mut out);
    Ok(GridFunction::from_values(out))
}

pub fn l2_fast(
    kernel: &LowRankKernel,
    phi: &GridFunction,
    ws: &OperatorWorkspace,
) -> Result<GridFunction> {
    ws.check(kernel, phi)?;
    let mut out = vec![0.0; phi.len()];
    l2_fast_into(kernel, phi.as_slice(), ws, &mut out);
    Ok(GridFunction::from_values(out))
}

/// Which evaluation path the stepper uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Fast,
    Naive,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Fast => "fast",
            Backend::Naive => "naive",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fast" => Ok(Backend::Fast),
            "naive" => Ok(Backend::Naive),
            other => Err(format!("unknown backend `{other}` (expected fast | naive)")),
        }
    }
}

/// Evaluates `(L1, L2)` into the given buffers with the selected backend.
pub(crate) fn coagulation_into(
    backend: Backend,
    kernel: &LowRankKernel,
    phi: &[f64],
    ws: &mut OperatorWorkspace,
    gain: &mut [f64],
    loss: &mut [f64],
) {
    match backend {
        Backend::Fast => {
            l1_fast_into(kernel, phi, ws, gain);
            l2_fast_into(kernel, phi, ws, loss);
        }
        Backend::Naive => {
            let f = GridFunction::from_values(phi.to_vec());
            let g = l1_naive(kernel, &f).expect("grid checked by caller");
            let l = l2_naive(kernel, &f).expect("grid checked by caller");
            gain.copy_from_slice(&g.values);
            loss.copy_from_slice(&l.values);
        }
    }
}

/// Zeroth moment over the full grid, used by tests of the constant kernel.
pub fn full_grid_mass(grid: &GridSpec, phi: &GridFunction) -> f64 {
    trapezoid_slice(phi.as_slice(), grid.step(), 0, grid.m_xi())
}
