use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coagrip::experiments::{self, AttractorWindows};
use coagrip::{InitialKind, Result, RunConfig};

#[derive(Parser)]
#[command(name = "solver", about = "Coagulation and ripening of particle-volume distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` from the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the numerical solution with the exact one (constant kernel).
    Verify(Common),
    /// Run every initial condition and measure convergence to the exact solution.
    Attractor {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10.0)]
        tail_lo: f64,
        #[arg(long, default_value_t = 50.0)]
        tail_hi: f64,
        #[arg(long, default_value_t = 1.0)]
        small_hi: f64,
    },
    /// Time the fast and naive coagulation operators.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated list of interval counts.
        #[arg(long, value_delimiter = ',', default_values_t = [1024usize, 2048, 4096, 8192])]
        sizes: Vec<usize>,
        /// Largest size for which the naive operators are timed.
        #[arg(long, default_value_t = 8192)]
        naive_cap: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Tabulate the exact parametric solution.
    Analytic(Common),
    /// Write the moment and supersaturation series of one run.
    Moments(Common),
    /// Run one simulation and write its snapshots and series.
    Run(Common),
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let cfg = match &common.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    let out = experiments::out_dir(&cfg, common.out.clone());
    Ok((cfg, out))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Verify(common) => {
            let (cfg, out) = load(&common)?;
            let r = experiments::verify(&cfg, Some(&out))?;
            println!("T = {}  b = {:.10}", r.t, r.b);
            println!("phi     rel Linf = {:.6e}  rel L2 = {:.6e}", r.phi.linf, r.phi.l2);
            println!("xi*phi  rel Linf = {:.6e}  rel L2 = {:.6e}", r.xi_phi.linf, r.xi_phi.l2);
            println!("min/max phi = {:.3e}", r.undershoot);
        }
        Command::Attractor { common, tail_lo, tail_hi, small_hi } => {
            let (cfg, out) = load(&common)?;
            let windows = AttractorWindows { tail_lo, tail_hi, small_hi };
            let rep = experiments::attractor(&cfg, &InitialKind::ALL, windows, Some(&out))?;
            println!("{:<10} {:>8} {:>14} {:>14}", "initial", "T", "tail_dev", "small_dev");
            for r in &rep.rows {
                println!("{:<10} {:>8} {:>14.6e} {:>14.6e}", r.kind.name(), r.t, r.tail, r.small);
            }
        }
        Command::Bench { common, sizes, naive_cap, reps } => {
            let (cfg, out) = load(&common)?;
            let rows = experiments::bench(&cfg, &sizes, naive_cap, reps, Some(&out))?;
            println!("{:>8} {:>14} {:>14}", "M", "t_fast[s]", "t_naive[s]");
            for r in rows {
                let naive = r.t_naive.map(|t| format!("{t:.6e}")).unwrap_or_else(|| "-".into());
                println!("{:>8} {:>14.6e} {:>14}", r.m, r.t_fast, naive);
            }
        }
        Command::Analytic(common) => {
            let (cfg, out) = load(&common)?;
            let sol = experiments::analytic(&cfg, &out)?;
            println!("tabulated tau in [0, {:.6}] (b down to {:.3e})", sol.tau_max(), sol.b_min());
        }
        Command::Moments(common) => {
            let (cfg, out) = load(&common)?;
            let traj = experiments::moments(&cfg, &out)?;
            let s = traj.series.last().expect("series is never empty");
            println!("tau = {}  n = {:.10e}  V = {:.10e}  delta = {:.10e}", s.tau, s.n, s.v, s.delta);
        }
        Command::Run(common) => {
            let (cfg, out) = load(&common)?;
            let traj = experiments::run_and_write(&cfg, &out)?;
            println!("{} snapshots written to {}", traj.snapshots.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
