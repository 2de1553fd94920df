//! Command-line front end: chains, root tables, fixed-point scans, the
//! period-doubled curve, branch traces, the full atlas, and the property
//! suite, each emitting deterministic CSV/JSON/SVG artifacts plus a run
//! manifest.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::path::{Path, PathBuf};

pub mod commands;

pub const PRECISION_CEILING_ENV: &str = "SUBHARMONICS_PRECISION_CEILING";

#[derive(Parser, Debug)]
#[command(
    name = "subharmonics",
    about = "Bifurcation atlas of subharmonic coexistence states of the piecewise-forced periodic predator-prey system",
    version
)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Starting working precision in bits.
    #[arg(long, global = true)]
    pub precision_bits: Option<usize>,
    /// Precision ceiling in bits (also via SUBHARMONICS_PRECISION_CEILING).
    #[arg(long, global = true)]
    pub precision_ceiling: Option<usize>,
    /// Tolerance as a rational: "1/1024", "0.001", or "1e-30".
    #[arg(long, global = true)]
    pub tol: Option<String>,
    /// Which artifact kinds to write.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatChoice>,
    /// Seed for the randomized property suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for branch tracing.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Key-value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatChoice {
    Csv,
    Json,
    Svg,
    All,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the polynomial chain and verify its structure.
    Chain {
        #[arg(long, default_value_t = 13)]
        n_max: usize,
        /// Run the full structural check including the divisor grid.
        #[arg(long)]
        check: bool,
    },
    /// Isolate, refine, and interlace-check the positive roots.
    Roots {
        #[arg(long, default_value_t = 13)]
        n_max: usize,
        /// Refinement width for the table (rational or scientific).
        #[arg(long)]
        width: Option<String>,
        /// Also write the ladder diagram.
        #[arg(long)]
        svg: bool,
    },
    /// Scan the fixed points of one map at one parameter value.
    FixedPoints {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        a_value: String,
    },
    /// The period-doubled analysis: solve at (A, B), trace the global curve.
    TwoPeriodic {
        #[arg(long)]
        a_value: String,
        /// Second parameter for a single solve (defaults to A).
        #[arg(long)]
        b_value: Option<String>,
        #[arg(long, default_value = "8")]
        b_max: String,
        #[arg(long, default_value_t = 24)]
        steps: usize,
        #[arg(long)]
        svg: bool,
    },
    /// Trace one branch from one seed root.
    Branch {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 0)]
        root_index: usize,
        #[arg(long, value_enum, default_value_t = SideArg::Plus)]
        side: SideArg,
        #[arg(long, default_value = "3")]
        a_max: String,
    },
    /// Build the full atlas: ownership, branches, census, diagram.
    Atlas {
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value = "3")]
        a_max: String,
        #[arg(long)]
        svg: bool,
    },
    /// Run the numbered property suite.
    Check {},
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideArg {
    Plus,
    Minus,
}

/// Effective run configuration after merging defaults, the config file, the
/// environment, and command-line flags (ascending precedence).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out: PathBuf,
    pub precision_bits: usize,
    pub precision_ceiling: usize,
    pub tol: BigRational,
    pub format: FormatChoice,
    pub seed: u64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out: PathBuf::from("out"),
            precision_bits: 128,
            precision_ceiling: 16384,
            tol: BigRational::new(BigInt::one(), BigInt::one() << 40),
            format: FormatChoice::All,
            seed: 0x5eed_cafe,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn policy(&self) -> subharmonics::PrecisionPolicy {
        subharmonics::PrecisionPolicy {
            start_bits: self.precision_bits,
            ceiling_bits: self.precision_ceiling.max(self.precision_bits),
        }
    }

    pub fn wants(&self, kind: FormatChoice) -> bool {
        self.format == FormatChoice::All || self.format == kind
    }

    /// Deterministic key=value echo for the manifest.
    pub fn echo(&self) -> String {
        format!(
            "format={:?}\nout={}\nprecision_bits={}\nprecision_ceiling={}\nseed={}\ntol={}\nworkers={}\n",
            self.format,
            self.out.display(),
            self.precision_bits,
            self.precision_ceiling,
            self.seed,
            self.tol,
            self.workers,
        )
    }
}

/// Parses "p/q", integers, plain decimals, and scientific notation into an
/// exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        bail!("empty rational");
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().context("numerator")?;
        let d: BigInt = den.trim().parse().context("denominator")?;
        if d.is_zero() {
            bail!("zero denominator");
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp10) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().context("exponent")?),
        None => (t, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let negative = int_part.starts_with('-');
    let digits: String = format!(
        "{}{}",
        int_part.trim_start_matches(['-', '+']),
        frac_part
    );
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        bail!("malformed rational: {text}");
    }
    let mut value = BigRational::new(digits.parse::<BigInt>()?, BigInt::one());
    let shift = exp10 - frac_part.len() as i64;
    let ten = BigRational::from(BigInt::from(10));
    match shift.cmp(&0) {
        std::cmp::Ordering::Greater => {
            for _ in 0..shift {
                value *= &ten;
            }
        }
        std::cmp::Ordering::Less => {
            for _ in 0..(-shift) {
                value /= &ten;
            }
        }
        std::cmp::Ordering::Equal => {}
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {} is not key=value: {line}", lineno + 1);
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Merges defaults <- config file <- environment <- flags.
pub fn resolve_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        for (k, v) in read_config_file(path)? {
            match k.as_str() {
                "out" => cfg.out = PathBuf::from(v),
                "precision_bits" => cfg.precision_bits = v.parse()?,
                "precision_ceiling" => cfg.precision_ceiling = v.parse()?,
                "tol" => cfg.tol = parse_rational(&v)?,
                "seed" => cfg.seed = v.parse()?,
                "workers" => cfg.workers = v.parse()?,
                "format" => {
                    cfg.format = match v.as_str() {
                        "csv" => FormatChoice::Csv,
                        "json" => FormatChoice::Json,
                        "svg" => FormatChoice::Svg,
                        "all" => FormatChoice::All,
                        other => bail!("unknown format {other}"),
                    }
                }
                other => bail!("unknown config key {other}"),
            }
        }
    }
    if let Ok(v) = std::env::var(PRECISION_CEILING_ENV) {
        cfg.precision_ceiling = v
            .parse()
            .with_context(|| format!("{PRECISION_CEILING_ENV} must be an integer"))?;
    }
    if let Some(v) = &args.out {
        cfg.out = v.clone();
    }
    if let Some(v) = args.precision_bits {
        cfg.precision_bits = v;
    }
    if let Some(v) = args.precision_ceiling {
        cfg.precision_ceiling = v;
    }
    if let Some(v) = &args.tol {
        cfg.tol = parse_rational(v)?;
    }
    if let Some(v) = args.format {
        cfg.format = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if cfg.tol <= BigRational::zero() {
        bail!("tol must be positive");
    }
    if cfg.precision_bits > cfg.precision_ceiling {
        bail!("precision_bits exceeds precision_ceiling");
    }
    Ok(cfg)
}

/// Runs a parsed invocation; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let cfg = resolve_config(&cli.run)?;
    let started = std::time::Instant::now();
    let (name, code) = match &cli.command {
        Command::Chain { n_max, check } => ("chain", commands::cmd_chain(&cfg, *n_max, *check)?),
        Command::Roots { n_max, width, svg } => {
            let width = match width {
                Some(w) => Some(parse_rational(w)?),
                None => None,
            };
            ("roots", commands::cmd_roots(&cfg, *n_max, width, *svg)?)
        }
        Command::FixedPoints { order, a_value } => (
            "fixed-points",
            commands::cmd_fixed_points(&cfg, *order, &parse_rational(a_value)?)?,
        ),
        Command::TwoPeriodic {
            a_value,
            b_value,
            b_max,
            steps,
            svg,
        } => {
            let a = parse_rational(a_value)?;
            let b = match b_value {
                Some(b) => Some(parse_rational(b)?),
                None => None,
            };
            (
                "two-periodic",
                commands::cmd_two_periodic(&cfg, &a, b.as_ref(), &parse_rational(b_max)?, *steps, *svg)?,
            )
        }
        Command::Branch {
            order,
            root_index,
            side,
            a_max,
        } => (
            "branch",
            commands::cmd_branch(&cfg, *order, *root_index, *side, &parse_rational(a_max)?)?,
        ),
        Command::Atlas { n_max, a_max, svg } => (
            "atlas",
            commands::cmd_atlas(&cfg, *n_max, &parse_rational(a_max)?, *svg)?,
        ),
        Command::Check {} => ("check", commands::cmd_check(&cfg)?),
    };
    commands::write_manifest(&cfg, name, started.elapsed())?;
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/4").unwrap(), BigRational::new(BigInt::from(3), BigInt::from(4)));
        assert_eq!(parse_rational("2").unwrap(), BigRational::from(BigInt::from(2)));
        assert_eq!(
            parse_rational("0.125").unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(8))
        );
        assert_eq!(
            parse_rational("1e-3").unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(1000))
        );
        assert_eq!(
            parse_rational("-2.5e2").unwrap(),
            BigRational::from(BigInt::from(-250))
        );
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }
}
