//! Command-line arguments and their validated, defaults-filled form.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use haarint::ComplexMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::matrix_file;

#[derive(Parser, Debug)]
#[command(name = "haarint", version, about = "Integrals over blocks of Haar-random unitary matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mixed moment of Haar entries: sampling against the pairing formula.
    Moment(CommonArgs),
    /// Ball integrals and Haar expectations by every applicable route.
    Exact(CommonArgs),
    /// Saddle point of exp(N Re Tr(A Y)).
    SaddleLinear(CommonArgs),
    /// Saddle point of the quartic double integral.
    SaddleQuartic(CommonArgs),
    /// Table of h(q) and its frozen-c variant.
    SweepH(CommonArgs),
    /// Run a named validation suite.
    Compare(CommonArgs),
}

impl Command {
    pub fn parts(self) -> (CommandKind, CommonArgs) {
        match self {
            Command::Moment(a) => (CommandKind::Moment, a),
            Command::Exact(a) => (CommandKind::Exact, a),
            Command::SaddleLinear(a) => (CommandKind::SaddleLinear, a),
            Command::SaddleQuartic(a) => (CommandKind::SaddleQuartic, a),
            Command::SweepH(a) => (CommandKind::SweepH, a),
            Command::Compare(a) => (CommandKind::Compare, a),
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Dimension N of the unitary group.
    #[arg(long)]
    pub n: Option<usize>,
    /// Block size.
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// A scalar (times the q x q identity) or a matrix file.
    #[arg(long)]
    pub y: Option<String>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub suite: Option<String>,
    /// Moment factors `i j k l`, separated by `;`.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long, value_enum)]
    pub integrand: Option<IntegrandKind>,
    /// Extra determinant power for `det-power`.
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long)]
    pub q_min: Option<f64>,
    #[arg(long)]
    pub q_bar: Option<f64>,
    #[arg(long)]
    pub q_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Moment,
    Exact,
    SaddleLinear,
    SaddleQuartic,
    SweepH,
    Compare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrandKind {
    /// `det(1 - A*A)^power` times the block density.
    DetPower,
    Constant,
    /// `|A_11|^2`.
    AbsSq,
    /// `exp(N Re Tr(A Y))`.
    ExpLinear,
}

/// A validated run. Every default is filled in so the record reproduces the
/// run on its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y: Option<ComplexMatrix>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tol: Option<f64>,
    pub format: Format,
    /// Not part of the record, so reports do not depend on where they land.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pattern: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub integrand: Option<IntegrandKind>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<usize>,
    /// Set when the seed was generated rather than given.
    #[serde(skip)]
    pub seed_generated: bool,
}

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn require<T>(v: Option<T>, flag: &str, cmd: &str) -> CliResult<T> {
    match v {
        Some(v) => Ok(v),
        None => usage(format!("{cmd} needs --{flag}")),
    }
}

fn positive(v: f64, flag: &str) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        usage(format!("--{flag} must be positive and finite, got {v}"))
    }
}

fn fresh_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
    (nanos as u64) ^ ((nanos >> 64) as u64) ^ u64::from(std::process::id()).rotate_left(32)
}

/// Reads `--y`: a number, or a path to a matrix file.
pub fn parse_y(spec: &str, q: Option<usize>) -> CliResult<ComplexMatrix> {
    if let Ok(s) = spec.trim().parse::<f64>() {
        if !s.is_finite() {
            return usage(format!("--y must be finite, got {spec}"));
        }
        return Ok(ComplexMatrix::scaled_identity(q.unwrap_or(1), s));
    }
    let path = std::path::Path::new(spec);
    if !path.exists() {
        return usage(format!("--y {spec:?} is neither a number nor an existing file"));
    }
    let m = matrix_file::read(path)?;
    if let Some(q) = q {
        if m.rows() != q || m.cols() != q {
            return usage(format!("--y is {} x {} but --q is {q}", m.rows(), m.cols()));
        }
    }
    Ok(m)
}

impl RunConfig {
    pub fn from_args(command: CommandKind, a: CommonArgs) -> CliResult<Self> {
        let name = match command {
            CommandKind::Moment => "moment",
            CommandKind::Exact => "exact",
            CommandKind::SaddleLinear => "saddle-linear",
            CommandKind::SaddleQuartic => "saddle-quartic",
            CommandKind::SweepH => "sweep-h",
            CommandKind::Compare => "compare",
        };
        let format = a.format.unwrap_or(if command == CommandKind::SweepH { Format::Csv } else { Format::Json });
        if format == Format::Csv && command != CommandKind::SweepH {
            return usage("CSV output is only available for sweep-h");
        }
        if let Some(t) = a.tol {
            positive(t, "tol")?;
        }
        if let Some(s) = a.samples {
            if s < 2 {
                return usage("--samples must be at least 2");
            }
        }
        let mut cfg = RunConfig {
            command,
            n: None,
            q: None,
            beta: None,
            y: None,
            samples: None,
            seed: None,
            tol: None,
            format,
            out: a.out.clone(),
            suite: None,
            pattern: None,
            integrand: None,
            power: None,
            q_min: None,
            q_bar: None,
            q_max: None,
            grid: None,
            seed_generated: false,
        };
        let randomized = |cfg: &mut RunConfig, samples: u64| {
            cfg.samples = Some(a.samples.unwrap_or(samples));
            cfg.seed_generated = a.seed.is_none();
            cfg.seed = Some(a.seed.unwrap_or_else(fresh_seed));
        };
        match command {
            CommandKind::Moment => {
                cfg.n = Some(require(a.n, "n", name)?);
                cfg.pattern = Some(require(a.pattern.clone(), "pattern", name)?);
                randomized(&mut cfg, haarint::mc::DEFAULT_SINGLE_SAMPLES);
            }
            CommandKind::Exact => {
                let n = require(a.n, "n", name)?;
                let q = a.q.unwrap_or(1);
                let integrand = a.integrand.unwrap_or(IntegrandKind::DetPower);
                cfg.n = Some(n);
                cfg.q = Some(q);
                cfg.integrand = Some(integrand);
                cfg.tol = Some(a.tol.unwrap_or(1e-8));
                match integrand {
                    IntegrandKind::DetPower => {
                        let p = a.power.unwrap_or(0.0);
                        if !(p >= 0.0) || !p.is_finite() {
                            return usage(format!("--power must be non-negative, got {p}"));
                        }
                        cfg.power = Some(p);
                    }
                    IntegrandKind::ExpLinear => {
                        cfg.y = Some(parse_y(&require(a.y.clone(), "y", name)?, Some(q))?);
                    }
                    IntegrandKind::Constant | IntegrandKind::AbsSq => {}
                }
                randomized(&mut cfg, haarint::mc::DEFAULT_SINGLE_SAMPLES);
            }
            CommandKind::SaddleLinear => {
                let y = parse_y(&require(a.y.clone(), "y", name)?, a.q)?;
                cfg.n = Some(require(a.n, "n", name)?);
                cfg.q = Some(y.rows());
                cfg.y = Some(y);
                cfg.tol = Some(a.tol.unwrap_or(1e-10));
            }
            CommandKind::SaddleQuartic => {
                cfg.beta = Some(positive(require(a.beta, "beta", name)?, "beta")?);
                cfg.q = Some(a.q.unwrap_or(1));
                cfg.n = Some(require(a.n, "n", name)?);
                cfg.tol = Some(a.tol.unwrap_or(1e-10));
            }
            CommandKind::SweepH => {
                let q_min = positive(require(a.q_min, "q-min", name)?, "q-min")?;
                let q_max = a.q_max.unwrap_or(50.0 * q_min);
                if !(q_max > q_min) {
                    return usage(format!("--q-max ({q_max}) must exceed --q-min ({q_min})"));
                }
                if let Some(qb) = a.q_bar {
                    if !(qb >= q_min) {
                        return usage(format!("--q-bar ({qb}) must be at least --q-min ({q_min})"));
                    }
                }
                let grid = a.grid.unwrap_or(200);
                if grid < 2 {
                    return usage("--grid needs at least 2 points");
                }
                cfg.q_min = Some(q_min);
                cfg.q_bar = a.q_bar;
                cfg.q_max = Some(q_max);
                cfg.grid = Some(grid);
            }
            CommandKind::Compare => {
                let suite = require(a.suite.clone(), "suite", name)?;
                if !crate::suites::SUITES.iter().any(|s| s.name == suite) {
                    return usage(format!("unknown suite {suite:?}; valid suites: {}", crate::suites::suite_names().join(", ")));
                }
                cfg.suite = Some(suite);
                cfg.seed = Some(a.seed.unwrap_or(crate::suites::DEFAULT_SEED));
                cfg.samples = a.samples;
            }
        }
        if let Some(n) = cfg.n {
            if n == 0 {
                return usage("--n must be positive");
            }
        }
        if cfg.q == Some(0) {
            return usage("--q must be positive");
        }
        Ok(cfg)
    }
}
