//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment; keys are case-sensitive.
//! Missing keys take the defaults below, unknown keys are rejected.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `gamma` | 1 | growth-law exponent |
//! | `kappa` | 0.2 | migration coefficient |
//! | `chi` | 0.01 | volume-diffusion coefficient |
//! | `cs` | 10 | saturation concentration |
//! | `delta0` | 0.2 | initial supersaturation |
//! | `phi00` | 1 | `Phi(0,0)` |
//! | `b0` | 1 | initial exponential rate |
//! | `H` | 20 | physical volume cutoff |
//! | `M` | 4000 | physical intervals |
//! | `Mxi` | `M` | intervals including the absorbing layer |
//! | `T` | 0.5 | final time |
//! | `Mtau` | 20000 | time steps |
//! | `d` | 5 | absorber strength |
//! | `kernel` | constant | `constant`, `diffusion` or `ballistic` |
//! | `A0` | 1 | constant-kernel value |
//! | `eps` | 1e-6 | ballistic cross-approximation tolerance |
//! | `backend` | fast | `fast` or `naive` |
//! | `initial` | exp | `exp`, `pert_exp`, `gaus` or `gaus2` |
//! | `snapshots` | `T` | comma-separated snapshot times |
//! | `out_dir` | out | output directory |
//! | `series_stride` | 1 | steps between series records |

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::coagulation::Backend;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::initial::InitialKind;
use crate::kernels::{kernel_ballistic, kernel_constant, kernel_diffusion, LowRankKernel};
use crate::params::PhysParams;
use crate::ripening::AbsorberConfig;
use crate::stepper::TimeSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelChoice {
    Constant { a0: f64 },
    Diffusion,
    Ballistic { eps: f64 },
}

impl KernelChoice {
    pub fn name(&self) -> &'static str {
        match self {
            KernelChoice::Constant { .. } => "constant",
            KernelChoice::Diffusion => "diffusion",
            KernelChoice::Ballistic { .. } => "ballistic",
        }
    }

    pub fn build(&self, grid: &GridSpec) -> Result<LowRankKernel> {
        match *self {
            KernelChoice::Constant { a0 } => kernel_constant(a0, grid),
            KernelChoice::Diffusion => kernel_diffusion(grid),
            KernelChoice::Ballistic { eps } => kernel_ballistic(grid, eps),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PhysParams,
    pub h_max: f64,
    pub m: usize,
    pub m_xi: usize,
    pub t_final: f64,
    pub m_tau: usize,
    pub d: f64,
    pub kernel: KernelChoice,
    /// Kept so that `A0` / `eps` survive a round trip when the other
    /// kernel is selected.
    pub a0: f64,
    pub eps: f64,
    pub backend: Backend,
    pub initial: InitialKind,
    pub snapshots: Vec<f64>,
    pub out_dir: PathBuf,
    pub series_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: PhysParams::default(),
            h_max: 20.0,
            m: 4000,
            m_xi: 4000,
            t_final: 0.5,
            m_tau: 20_000,
            d: 5.0,
            kernel: KernelChoice::Constant { a0: 1.0 },
            a0: 1.0,
            eps: 1e-6,
            backend: Backend::Fast,
            initial: InitialKind::Exp,
            snapshots: vec![0.5],
            out_dir: PathBuf::from("out"),
            series_stride: 1,
        }
    }
}

const KEYS: &[&str] = &[
    "gamma",
    "kappa",
    "chi",
    "cs",
    "delta0",
    "phi00",
    "b0",
    "H",
    "M",
    "Mxi",
    "T",
    "Mtau",
    "d",
    "kernel",
    "A0",
    "eps",
    "backend",
    "initial",
    "snapshots",
    "out_dir",
    "series_stride",
];

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::ConfigParse {
        line,
        msg: format!("`{key}` expects a number, got `{value}`"),
    })
}

fn parse_usize(key: &str, value: &str, line: usize) -> Result<usize> {
    value.parse::<usize>().map_err(|_| Error::ConfigParse {
        line,
        msg: format!("`{key}` expects a nonnegative integer, got `{value}`"),
    })
}

impl RunConfig {
    /// Parses and validates configuration text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut kernel_name = "constant".to_string();
        let mut seen: Vec<&str> = Vec::new();
        let mut mxi = None;
        let mut snapshots = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("expected `key = value`, got `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&key) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("unknown key `{key}`"),
                });
            };
            if seen.contains(&key) {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            seen.push(key);
            let p = &mut cfg.params;
            match key {
                "gamma" => p.gamma = parse_f64(key, value, line)?,
                "kappa" => p.kappa = parse_f64(key, value, line)?,
                "chi" => p.chi = parse_f64(key, value, line)?,
                "cs" => p.c_s = parse_f64(key, value, line)?,
                "delta0" => p.delta0 = parse_f64(key, value, line)?,
                "phi00" => p.phi00 = parse_f64(key, value, line)?,
                "b0" => p.b0 = parse_f64(key, value, line)?,
                "H" => cfg.h_max = parse_f64(key, value, line)?,
                "M" => cfg.m = parse_usize(key, value, line)?,
                "Mxi" => mxi = Some(parse_usize(key, value, line)?),
                "T" => cfg.t_final = parse_f64(key, value, line)?,
                "Mtau" => cfg.m_tau = parse_usize(key, value, line)?,
                "d" => cfg.d = parse_f64(key, value, line)?,
                "kernel" => kernel_name = value.to_string(),
                "A0" => cfg.a0 = parse_f64(key, value, line)?,
                "eps" => cfg.eps = parse_f64(key, value, line)?,
                "backend" => {
                    cfg.backend = value
                        .parse()
                        .map_err(|msg| Error::ConfigParse { line, msg })?
                }
                "initial" => {
                    cfg.initial = value
                        .parse()
                        .map_err(|msg| Error::ConfigParse { line, msg })?
                }
                "snapshots" => {
                    let times = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_f64(key, s, line))
                        .collect::<Result<Vec<_>>>()?;
                    snapshots = Some(times);
                }
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                "series_stride" => cfg.series_stride = parse_usize(key, value, line)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }
        cfg.m_xi = mxi.unwrap_or(cfg.m);
        cfg.snapshots = snapshots.unwrap_or_else(|| vec![cfg.t_final]);
        cfg.kernel = match kernel_name.as_str() {
            "constant" => KernelChoice::Constant { a0: cfg.a0 },
            "diffusion" => KernelChoice::Diffusion,
            "ballistic" => KernelChoice::Ballistic { eps: cfg.eps },
            other => {
                return Err(Error::param(
                    "kernel",
                    format!("unknown kernel `{other}` (expected constant | diffusion | ballistic)"),
                ))
            }
        };
        // Keep the conserved constant consistent with the reference volume.
        cfg.params.mass_const = cfg.params.phi00 / (cfg.params.b0 * cfg.params.b0)
            + cfg.params.c_s * cfg.params.delta0;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid()?;
        self.time()?;
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::param("d", format!("must be nonnegative, got {}", self.d)));
        }
        if !(self.a0.is_finite() && self.a0 >= 0.0) {
            return Err(Error::param("A0", format!("must be nonnegative, got {}", self.a0)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::param("eps", format!("must lie in (0, 1), got {}", self.eps)));
        }
        if self.series_stride == 0 {
            return Err(Error::param("series_stride", "must be at least 1"));
        }
        if self.m + 1 < 4 {
            return Err(Error::param("M", "the stepper needs at least 4 nodes"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.h_max, self.m, self.m_xi).map_err(|e| match e {
            Error::InvalidGrid(msg) => Error::param(
                if msg.starts_with("H") {
                    "H"
                } else if msg.starts_with("Mxi") {
                    "Mxi"
                } else {
                    "M"
                },
                msg,
            ),
            other => other,
        })
    }

    pub fn time(&self) -> Result<TimeSpec> {
        TimeSpec::new(self.t_final, self.m_tau, self.snapshots.clone())
    }

    pub fn absorber(&self) -> Result<AbsorberConfig> {
        AbsorberConfig::new(&self.grid()?, self.d)
    }

    /// Serializes every key explicitly; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("gamma", p.gamma.to_string());
        kv("kappa", p.kappa.to_string());
        kv("chi", p.chi.to_string());
        kv("cs", p.c_s.to_string());
        kv("delta0", p.delta0.to_string());
        kv("phi00", p.phi00.to_string());
        kv("b0", p.b0.to_string());
        kv("H", self.h_max.to_string());
        kv("M", self.m.to_string());
        kv("Mxi", self.m_xi.to_string());
        kv("T", self.t_final.to_string());
        kv("Mtau", self.m_tau.to_string());
        kv("d", self.d.to_string());
        kv("kernel", self.kernel.name().to_string());
        kv("A0", self.a0.to_string());
        kv("eps", self.eps.to_string());
        kv("backend", self.backend.name().to_string());
        kv("initial", self.initial.name().to_string());
        kv(
            "snapshots",
            self.snapshots
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("out_dir", self.out_dir.display().to_string());
        kv("series_stride", self.series_stride.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_reference_defaults() {
        let c = RunConfig::parse("").unwrap();
        let p = c.params;
        assert_eq!((p.gamma, p.kappa, p.chi, p.delta0, p.c_s), (1.0, 0.2, 0.01, 0.2, 10.0));
        assert_eq!((c.h_max, c.m, c.m_xi), (20.0, 4000, 4000));
        assert_eq!((c.t_final, c.m_tau, c.d), (0.5, 20_000, 5.0));
        assert_eq!(c.snapshots, vec![0.5]);
        assert_eq!(c.kernel, KernelChoice::Constant { a0: 1.0 });
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn second_reference_configuration() {
        let c = RunConfig::parse("gamma = 0.5\nchi = 0.1\nT = 1.0\nMtau = 40000").unwrap();
        assert_eq!((c.params.gamma, c.params.chi, c.t_final, c.m_tau), (0.5, 0.1, 1.0, 40_000));
        assert_eq!(c.snapshots, vec![1.0]);
        assert_eq!(c.params.kappa, 0.2);
    }

    #[test]
    fn validation_names_key() {
        match RunConfig::parse("gamma = -1") {
            Err(Error::InvalidParameter { key, .. }) => assert_eq!(key, "gamma"),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("M = 10\nMxi = 5") {
            Err(Error::InvalidParameter { key, .. }) => assert_eq!(key, "Mxi"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match RunConfig::parse("# comment\nkappa = 0.1\nGamma = 1") {
            Err(Error::ConfigParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(RunConfig::parse("H 20"), Err(Error::ConfigParse { line: 1, .. })));
        assert!(matches!(RunConfig::parse("M = x"), Err(Error::ConfigParse { line: 1, .. })));
        assert!(matches!(
            RunConfig::parse("T = 1\nT = 2"),
            Err(Error::ConfigParse { line: 2, .. })
        ));
        assert!(RunConfig::parse("kernel = gaussian").is_err());
        assert!(RunConfig::parse("initial = flat").is_err());
    }

    #[test]
    fn comments_and_kernel_selection() {
        let c = RunConfig::parse(
            "kernel = ballistic # free molecular\neps = 1e-4\nsnapshots = 0.1, 0.25 ,0.5\n",
        )
        .unwrap();
        assert_eq!(c.kernel, KernelChoice::Ballistic { eps: 1e-4 });
        assert_eq!(c.snapshots, vec![0.1, 0.25, 0.5]);
    }

    #[test]
    fn serialize_round_trip() {
        let c = RunConfig::parse(
            "gamma = 0.5\nkernel = diffusion\nMxi = 4200\nsnapshots = 0.1,0.3\nout_dir = /tmp/x y\nseries_stride = 7\nbackend = naive\ninitial = gaus2",
        )
        .unwrap();
        assert_eq!(RunConfig::parse(&c.serialize()).unwrap(), c);
    }
}
