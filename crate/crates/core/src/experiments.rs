//! Experiment drivers behind the `solver` subcommands, and CSV output.
//!
//! CSV files carry a header row and print numbers with 17 significant
//! digits. Snapshots are `xi,phi`, series are `tau,n,V,delta`, comparison
//! files are `xi,phi_num,phi_exact,abs_err,rel_err`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analytic::ParametricSolution;
use crate::coagulation::{l1_fast, l1_naive, l2_fast, l2_naive, OperatorWorkspace};
use crate::config::{KernelChoice, RunConfig};
use crate::error::{Error, Result};
use crate::grid::{trapezoid_slice, GridFunction, GridSpec};
use crate::initial::{make_initial, InitialKind};
use crate::stepper::{run_from, SeriesPoint, Trajectory};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

pub fn write_phi_csv(path: &Path, grid: &GridSpec, phi: &GridFunction) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "xi,phi")?;
    for (i, p) in phi.values.iter().enumerate() {
        writeln!(w, "{},{}", num(grid.node(i)), num(*p))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_csv(path: &Path, series: &[SeriesPoint]) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "tau,n,V,delta")?;
    for s in series {
        writeln!(w, "{},{},{},{}", num(s.tau), num(s.n), num(s.v), num(s.delta))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diff_csv(
    path: &Path,
    grid: &GridSpec,
    num_phi: &GridFunction,
    exact: &GridFunction,
) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "xi,phi_num,phi_exact,abs_err,rel_err")?;
    for i in 0..num_phi.len() {
        let (a, b) = (num_phi[i], exact[i]);
        let abs = (a - b).abs();
        let rel = if b != 0.0 { abs / b.abs() } else { f64::NAN };
        writeln!(w, "{},{},{},{},{}", num(grid.node(i)), num(a), num(b), num(abs), num(rel))?;
    }
    w.flush()?;
    Ok(())
}

fn time_tag(t: f64) -> String {
    format!("T{t}")
}

fn require_constant(cfg: &RunConfig) -> Result<()> {
    match cfg.kernel {
        KernelChoice::Constant { .. } => Ok(()),
        other => Err(Error::Unsupported(format!(
            "the exact reference solution exists only for the constant kernel (got `{}`)",
            other.name()
        ))),
    }
}

/// Relative errors of `num` against `exact` on nodes `0..=upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l2: f64,
}

pub fn relative_errors(grid: &GridSpec, num: &[f64], exact: &[f64], upper: usize) -> ErrorNorms {
    let h = grid.step();
    let diff: Vec<f64> = (0..=upper).map(|i| num[i] - exact[i]).collect();
    let linf_d = diff.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let linf_e = exact[..=upper].iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let l2_d = trapezoid_slice(&sq(&diff), h, 0, upper).sqrt();
    let l2_e = trapezoid_slice(&sq(&exact[..=upper]), h, 0, upper).sqrt();
    ErrorNorms {
        linf: linf_d / linf_e,
        l2: l2_d / l2_e,
    }
}

fn times_xi(grid: &GridSpec, phi: &[f64]) -> Vec<f64> {
    phi.iter().enumerate().map(|(i, p)| grid.node(i) * p).collect()
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub t: f64,
    pub phi: ErrorNorms,
    pub xi_phi: ErrorNorms,
    /// `min(phi) / max(phi)` of the numerical solution over `[0, H]`.
    pub undershoot: f64,
    pub b: f64,
    pub numeric: GridFunction,
    pub exact: GridFunction,
    pub trajectory: Trajectory,
}

/// Runs the solver and the exact solution to `T` and compares them on `[0, H]`.
pub fn verify(cfg: &RunConfig, out: Option<&Path>) -> Result<VerifyReport> {
    require_constant(cfg)?;
    if cfg.initial != InitialKind::Exp {
        return Err(Error::Unsupported(
            "verification starts from the reference `exp` initial condition".into(),
        ));
    }
    let grid = cfg.grid()?;
    let phi0 = make_initial(InitialKind::Exp, &grid, &cfg.params, None)?;
    let traj = run_from(cfg, phi0)?;
    let scaled = scaled_params(cfg);
    let oracle = ParametricSolution::new(&scaled)?;
    let last = traj.last();
    let exact = oracle.exact_state(last.tau, &grid)?;
    let upper = grid.m();
    let numeric = last.phi.clone();
    let phi_err = relative_errors(&grid, numeric.as_slice(), exact.phi.as_slice(), upper);
    let xi_err = relative_errors(
        &grid,
        &times_xi(&grid, numeric.as_slice()),
        &times_xi(&grid, exact.phi.as_slice()),
        upper,
    );
    let max = numeric.values[..=upper].iter().cloned().fold(f64::MIN, f64::max);
    let min = numeric.values[..=upper].iter().cloned().fold(f64::MAX, f64::min);
    if let Some(dir) = out {
        write_phi_csv(&dir.join("verify_phi_num.csv"), &grid, &numeric)?;
        write_phi_csv(&dir.join("verify_phi_exact.csv"), &grid, &exact.phi)?;
        write_diff_csv(&dir.join("verify_diff.csv"), &grid, &numeric, &exact.phi)?;
        write_series_csv(&dir.join("verify_series.csv"), &traj.series)?;
    }
    Ok(VerifyReport {
        t: last.tau,
        phi: phi_err,
        xi_phi: xi_err,
        undershoot: min / max,
        b: exact.b,
        numeric,
        exact: exact.phi,
        trajectory: traj,
    })
}

/// Reference parameters with the conserved constant of the exact solution.
fn scaled_params(cfg: &RunConfig) -> crate::params::PhysParams {
    let p = cfg.params;
    p.with_initial_volume(p.phi00 / (p.b0 * p.b0))
}

/// Per-kind deviations from the universal distribution at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorRow {
    pub kind: InitialKind,
    pub t: f64,
    /// `max |phi - phi_exact| / phi_exact` over the tail window.
    pub tail: f64,
    /// The same metric over the small-volume window.
    pub small: f64,
    pub v0: f64,
}

#[derive(Debug, Clone)]
pub struct AttractorReport {
    pub rows: Vec<AttractorRow>,
    pub series: Vec<(InitialKind, Vec<SeriesPoint>)>,
}

impl AttractorReport {
    pub fn row(&self, kind: InitialKind, t: f64) -> Option<&AttractorRow> {
        self.rows.iter().find(|r| r.kind == kind && r.t == t)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AttractorWindows {
    pub tail_lo: f64,
    pub tail_hi: f64,
    pub small_hi: f64,
}

impl Default for AttractorWindows {
    fn default() -> Self {
        AttractorWindows {
            tail_lo: 10.0,
            tail_hi: 50.0,
            small_hi: 1.0,
        }
    }
}

fn max_rel_in(grid: &GridSpec, num: &[f64], exact: &[f64], lo: f64, hi: f64) -> f64 {
    (0..=grid.m())
        .filter(|&i| {
            let x = grid.node(i);
            x >= lo - 1e-12 && x <= hi + 1e-12
        })
        .map(|i| (num[i] - exact[i]).abs() / exact[i])
        .fold(0.0, f64::max)
}

/// Runs every initial kind and measures its distance to the exact solution
/// at each configured snapshot time.
pub fn attractor(
    cfg: &RunConfig,
    kinds: &[InitialKind],
    windows: AttractorWindows,
    out: Option<&Path>,
) -> Result<AttractorReport> {
    require_constant(cfg)?;
    let grid = cfg.grid()?;
    let oracle = ParametricSolution::new(&scaled_params(cfg))?;
    let runs: Vec<Result<(InitialKind, f64, Trajectory)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| {
                let grid = &grid;
                scope.spawn(move || -> Result<(InitialKind, f64, Trajectory)> {
                    let phi0 = make_initial(kind, grid, &cfg.params, None)?;
                    let v0 = crate::grid::moments(grid, &phi0)?.1;
                    Ok((kind, v0, run_from(cfg, phi0)?))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("attractor worker panicked"))
            .collect()
    });

    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut exact_written = Vec::new();
    for r in runs {
        let (kind, v0, traj) = r?;
        for snap in &traj.snapshots {
            let exact = oracle.exact_state(snap.tau, &grid)?;
            let (n, e) = (snap.phi.as_slice(), exact.phi.as_slice());
            rows.push(AttractorRow {
                kind,
                t: snap.requested,
                tail: max_rel_in(&grid, n, e, windows.tail_lo, windows.tail_hi),
                small: max_rel_in(&grid, n, e, 0.0, windows.small_hi),
                v0,
            });
            if let Some(dir) = out {
                let tag = time_tag(snap.requested);
                write_attractor_csv(&dir.join(format!("attractor_{}_{tag}.csv", kind.name())), &grid, n)?;
                if !exact_written.contains(&snap.step) {
                    write_attractor_csv(&dir.join(format!("attractor_analytic_{tag}.csv")), &grid, e)?;
                    exact_written.push(snap.step);
                }
            }
        }
        if let Some(dir) = out {
            write_series_csv(&dir.join(format!("attractor_{}_series.csv", kind.name())), &traj.series)?;
        }
        series.push((kind, traj.series));
    }
    if let Some(dir) = out {
        let mut w = writer(&dir.join("attractor_metrics.csv"))?;
        writeln!(w, "initial,T,tail_dev,small_dev,V0")?;
        for r in &rows {
            writeln!(w, "{},{},{},{},{}", r.kind.name(), num(r.t), num(r.tail), num(r.small), num(r.v0))?;
        }
        w.flush()?;
    }
    Ok(AttractorReport { rows, series })
}

fn write_attractor_csv(path: &Path, grid: &GridSpec, phi: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "xi,phi,xi_phi")?;
    for (i, p) in phi.iter().enumerate() {
        let x = grid.node(i);
        writeln!(w, "{},{},{}", num(x), num(*p), num(x * p))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub m: usize,
    /// Median seconds for one `L1 + L2` evaluation.
    pub t_fast: f64,
    pub t_naive: Option<f64>,
    /// Max relative fast-vs-naive deviation, when the naive path ran.
    pub deviation: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn rel_dev(a: &GridFunction, b: &GridFunction) -> f64 {
    let scale = b.max_abs().max(f64::MIN_POSITIVE);
    a.values
        .iter()
        .zip(&b.values)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

/// Times the coagulation operators on grids with `M = sizes[k]` intervals
/// over `[0, H]`. The naive path is skipped above `naive_cap`.
pub fn bench(
    cfg: &RunConfig,
    sizes: &[usize],
    naive_cap: usize,
    reps: usize,
    out: Option<&Path>,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &m in sizes {
        let grid = GridSpec::new(cfg.h_max, m, m)?;
        let kernel = cfg.kernel.build(&grid)?;
        let phi = make_initial(cfg.initial, &grid, &cfg.params, None)?;
        let mut ws = OperatorWorkspace::new(&grid);
        let mut fast = Vec::new();
        let mut last = None;
        for _ in 0..reps.max(1) {
            let t0 = Instant::now();
            let g = l1_fast(&kernel, &phi, &mut ws)?;
            let l = l2_fast(&kernel, &phi, &ws)?;
            fast.push(t0.elapsed().as_secs_f64());
            last = Some((g, l));
        }
        let (g, l) = last.expect("at least one repetition");
        let (t_naive, deviation) = if m <= naive_cap {
            let mut times = Vec::new();
            let mut dev = 0.0_f64;
            for _ in 0..reps.clamp(1, 3) {
                let t0 = Instant::now();
                let gn = l1_naive(&kernel, &phi)?;
                let ln = l2_naive(&kernel, &phi)?;
                times.push(t0.elapsed().as_secs_f64());
                dev = rel_dev(&g, &gn).max(rel_dev(&l, &ln));
            }
            (Some(median(times)), Some(dev))
        } else {
            (None, None)
        };
        rows.push(BenchRow {
            m,
            t_fast: median(fast),
            t_naive,
            deviation,
        });
    }
    if let Some(dir) = out {
        let mut w = writer(&dir.join("bench.csv"))?;
        writeln!(w, "M,t_fast,t_naive")?;
        for r in &rows {
            let tn = r.t_naive.map(num).unwrap_or_default();
            writeln!(w, "{},{},{}", r.m, num(r.t_fast), tn)?;
        }
        w.flush()?;
    }
    Ok(rows)
}

/// Writes the parametric table `(b, tau, delta, n, V)` and the exact
/// distribution at every snapshot time.
pub fn analytic(cfg: &RunConfig, out: &Path) -> Result<ParametricSolution> {
    let grid = cfg.grid()?;
    let sol = ParametricSolution::new(&scaled_params(cfg))?;
    let mut w = writer(&out.join("analytic_table.csv"))?;
    writeln!(w, "b,tau,delta,n,V")?;
    for k in 0..sol.b_grid().len() {
        let (b, h) = (sol.b_grid()[k], sol.h_table()[k]);
        writeln!(
            w,
            "{},{},{},{},{}",
            num(b),
            num(sol.tau_table()[k]),
            num(sol.delta_table()[k]),
            num(-2.0 * h / b),
            num(-2.0 * h / (b * b))
        )?;
    }
    w.flush()?;
    for &t in &cfg.snapshots {
        let s = sol.exact_state(t, &grid)?;
        write_phi_csv(&out.join(format!("analytic_phi_{}.csv", time_tag(t))), &grid, &s.phi)?;
    }
    Ok(sol)
}

/// Runs the configured simulation and writes the `(tau, n, V, delta)` series.
pub fn moments(cfg: &RunConfig, out: &Path) -> Result<Trajectory> {
    let traj = crate::stepper::run(cfg)?;
    write_series_csv(&out.join("series.csv"), &traj.series)?;
    Ok(traj)
}

/// Runs the configured simulation and writes every snapshot and the series.
pub fn run_and_write(cfg: &RunConfig, out: &Path) -> Result<Trajectory> {
    let traj = crate::stepper::run(cfg)?;
    for s in &traj.snapshots {
        write_phi_csv(
            &out.join(format!("snapshot_{}.csv", time_tag(s.requested))),
            &traj.grid,
            &s.phi,
        )?;
    }
    write_series_csv(&out.join("series.csv"), &traj.series)?;
    Ok(traj)
}

/// Output directory: explicit override, else the configured one.
pub fn out_dir(cfg: &RunConfig, over: Option<PathBuf>) -> PathBuf {
    over.unwrap_or_else(|| cfg.out_dir.clone())
}
