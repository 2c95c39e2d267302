//! Front end of the `mirrorrad` command: argument parsing, validation,
//! dispatch and table output.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 numerical failure.

mod commands;
pub mod grid;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mirrorrad::quadrature::QuadratureConfig;
use mirrorrad::spectrum::Field;
use serde_json::{Map, Value};

use crate::grid::GridSpec;
use crate::table::Format;

/// Overrides the default relative tolerance when `--rel-tol` is absent.
pub const RTOL_ENV: &str = "MIRRORRAD_RTOL";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<mirrorrad::Error> for CliError {
    fn from(e: mirrorrad::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mirrorrad", version, about = "Particle creation by a mirror on a collapse trajectory (c = ħ = 1)")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// β-Bogoliubov coefficients on an (ω, ω′) grid.
    Beta {
        #[command(flatten)]
        common: Common,
        /// Out frequency ω: `value` or `min:max:count[:log]`.
        #[arg(long)]
        omega: GridSpec,
        /// In frequency ω′: `value` or `min:max:count[:log]`.
        #[arg(long)]
        omega_prime: GridSpec,
        #[arg(long, value_enum, default_value_t = ChannelArg::Rr)]
        channel: ChannelArg,
    },
    /// One observable tabulated over ω.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        observable: ObservableArg,
        #[arg(long)]
        omega: GridSpec,
        /// Fixed ω′ for `beta-sq`.
        #[arg(long)]
        omega_prime: Option<f64>,
    },
    /// Particle number per mode N_ω.
    Nomega {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: GridSpec,
    },
    /// Radiated energy of the semi-transparent scalar mirror.
    Energy {
        #[command(flatten)]
        common: Common,
    },
    /// Response F(ω) of an inertial detector and the rate P(ω).
    Detector {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: GridSpec,
    },
    /// Reflected and transmitted mode functions on the mirror.
    Modes {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: f64,
        /// Retarded time grid.
        #[arg(long, allow_hyphen_values = true)]
        u: GridSpec,
    },
    /// Integrability report for the trajectory; without `--u0` the collapse
    /// never stops.
    CheckTrajectory {
        #[command(flatten)]
        common: Common,
        /// ω for the optional large-ω′ decay fit.
        #[arg(long, requires = "decay_omega_prime")]
        decay_omega: Option<f64>,
        /// ω′ grid for the decay fit, beyond the thermal window.
        #[arg(long, requires = "decay_omega")]
        decay_omega_prime: Option<GridSpec>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Scalar,
    Dirac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MirrorArg {
    Perfect,
    Semitransparent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Numeric,
    Asymptotic,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Rr,
    Rl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObservableArg {
    BetaSq,
    NOmega,
    ResponseF,
    ResponseP,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = FieldArg::Scalar)]
    field: FieldArg,
    /// Defaults to `semitransparent` when `--alpha` is given, else `perfect`.
    #[arg(long, value_enum)]
    mirror: Option<MirrorArg>,
    /// Collapse rate k.
    #[arg(long)]
    k: f64,
    /// Retarded time at which the collapse stops.
    #[arg(long)]
    u0: Option<f64>,
    /// Mirror coupling α (semi-transparent mirror).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Numeric)]
    method: MethodArg,
    /// Relative tolerance of the quadratures; falls back to $MIRRORRAD_RTOL.
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// `csv` by default; `json` for check-trajectory.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for grid rows (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    /// Add the generation time to the JSON metadata.
    #[arg(long)]
    stamp: bool,
    /// Scalar reflected mode with the literal exponent, which is
    /// discontinuous at u0.
    #[arg(long)]
    literal_modes: bool,
    /// Dirac coefficients from `conj(ψ^out)·ψ^in` instead of the transpose.
    #[arg(long)]
    conjugate_product: bool,
}

/// Validated run parameters shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub field: Field,
    pub mirror: MirrorArg,
    pub k: f64,
    pub u0: Option<f64>,
    pub alpha: Option<f64>,
    pub method: MethodArg,
    pub quadrature: QuadratureConfig,
    pub literal_modes: bool,
    pub conjugate_product: bool,
}

impl RunConfig {
    pub fn wants_numeric(&self) -> bool {
        self.method != MethodArg::Asymptotic
    }

    pub fn wants_asymptotic(&self) -> bool {
        self.method != MethodArg::Numeric
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn rel_tol_from_env() -> Result<Option<f64>, CliError> {
    match std::env::var(RTOL_ENV) {
        Ok(s) => {
            let v: f64 =
                s.trim().parse().map_err(|_| CliError::Validation(format!("{RTOL_ENV}=`{s}` is not a number")))?;
            Ok(Some(positive(RTOL_ENV, v)?))
        }
        Err(_) => Ok(None),
    }
}

fn validate(command: &'static str, c: &Common) -> Result<RunConfig, CliError> {
    positive("k", c.k)?;
    if let Some(u0) = c.u0 {
        if !(u0 >= 0.0 && u0.is_finite()) {
            return Err(CliError::Validation(format!("--u0 must be finite and non-negative, got {u0}")));
        }
    }
    let mirror = c.mirror.unwrap_or(if c.alpha.is_some() { MirrorArg::Semitransparent } else { MirrorArg::Perfect });
    match (mirror, c.alpha) {
        (MirrorArg::Semitransparent, None) => {
            return Err(CliError::Validation("--mirror semitransparent requires --alpha".into()))
        }
        (MirrorArg::Perfect, Some(_)) => {
            return Err(CliError::Validation("--alpha is only meaningful with --mirror semitransparent".into()))
        }
        (_, Some(a)) if !(a >= 0.0 && a.is_finite()) => {
            return Err(CliError::Validation(format!("--alpha must be finite and non-negative, got {a}")))
        }
        _ => {}
    }
    let mut quadrature = QuadratureConfig::default();
    if let Some(r) = c.rel_tol {
        quadrature.rel_tol = positive("rel-tol", r)?;
    } else if let Some(r) = rel_tol_from_env()? {
        quadrature.rel_tol = r;
    }
    if let Some(a) = c.abs_tol {
        quadrature.abs_tol = positive("abs-tol", a)?;
    }
    if c.jobs == Some(0) {
        return Err(CliError::Validation("--jobs must be at least 1".into()));
    }
    Ok(RunConfig {
        command,
        field: match c.field {
            FieldArg::Scalar => Field::Scalar,
            FieldArg::Dirac => Field::Dirac,
        },
        mirror,
        k: c.k,
        u0: c.u0,
        alpha: c.alpha,
        method: c.method,
        quadrature,
        literal_modes: c.literal_modes,
        conjugate_product: c.conjugate_product,
    })
}

fn metadata(rc: &RunConfig, extra: Map<String, Value>, stamp: bool) -> Map<String, Value> {
    let num = |v: f64| serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number);
    let mut m = Map::new();
    m.insert("tool".into(), "mirrorrad".into());
    m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    m.insert("units".into(), "c = hbar = 1".into());
    m.insert("command".into(), rc.command.into());
    m.insert("field".into(), rc.field.tag().into());
    m.insert(
        "mirror".into(),
        match rc.mirror {
            MirrorArg::Perfect => "perfect",
            MirrorArg::Semitransparent => "semitransparent",
        }
        .into(),
    );
    m.insert("k".into(), num(rc.k));
    m.insert("u0".into(), rc.u0.map_or(Value::Null, num));
    m.insert("alpha".into(), rc.alpha.map_or(Value::Null, num));
    m.insert(
        "method".into(),
        match rc.method {
            MethodArg::Numeric => "numeric",
            MethodArg::Asymptotic => "asymptotic",
            MethodArg::Both => "both",
        }
        .into(),
    );
    m.insert("rel_tol".into(), num(rc.quadrature.rel_tol));
    m.insert("abs_tol".into(), num(rc.quadrature.abs_tol));
    m.insert("literal_modes".into(), rc.literal_modes.into());
    m.insert("conjugate_product".into(), rc.conjugate_product.into());
    m.extend(extra);
    if stamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        m.insert("stamp_unix_seconds".into(), secs.into());
    }
    m
}

/// Runs a parsed command. The table goes to `--output` when given;
/// otherwise its bytes are returned for stdout.
pub fn execute(cli: Cli) -> Result<Vec<u8>, CliError> {
    let (name, common) = match &cli.command {
        Command::Beta { common, .. } => ("beta", common),
        Command::Spectrum { common, .. } => ("spectrum", common),
        Command::Nomega { common, .. } => ("nomega", common),
        Command::Energy { common } => ("energy", common),
        Command::Detector { common, .. } => ("detector", common),
        Command::Modes { common, .. } => ("modes", common),
        Command::CheckTrajectory { common, .. } => ("check-trajectory", common),
    };
    let rc = validate(name, common)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = common.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::Validation(format!("cannot start worker pool: {e}")))?;

    let out = pool.install(|| match &cli.command {
        Command::Beta { omega, omega_prime, channel, .. } => commands::beta(&rc, omega, omega_prime, *channel),
        Command::Spectrum { observable, omega, omega_prime, .. } => {
            commands::spectrum(&rc, *observable, omega, *omega_prime)
        }
        Command::Nomega { omega, .. } => commands::nomega(&rc, omega),
        Command::Energy { .. } => commands::energy(&rc),
        Command::Detector { omega, .. } => commands::detector(&rc, omega),
        Command::Modes { omega, u, .. } => commands::modes(&rc, *omega, u),
        Command::CheckTrajectory { decay_omega, decay_omega_prime, .. } => {
            commands::check_trajectory(&rc, decay_omega.zip(decay_omega_prime.as_ref()))
        }
    })?;

    let default_format = if name == "check-trajectory" { Format::Json } else { Format::Csv };
    let mut buf = Vec::new();
    match common.format.unwrap_or(default_format) {
        Format::Csv => out.table.write_csv(&mut buf).map_err(|e| CliError::Numeric(e.to_string()))?,
        Format::Json => {
            let v = out.table.to_json(metadata(&rc, out.metadata, common.stamp));
            let s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Numeric(e.to_string()))?;
            buf.extend_from_slice(s.as_bytes());
            buf.push(b'\n');
        }
    }
    match &common.output {
        Some(path) => {
            std::fs::write(path, &buf)
                .map_err(|e| CliError::Validation(format!("cannot write --output {}: {e}", path.display())))?;
            Ok(Vec::new())
        }
        None => Ok(buf),
    }
}

/// Parses `args` (program name first) and runs the command; argument errors
/// map to [`CliError::Validation`].
pub fn run_args<I, T>(args: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Validation(e.to_string()))?;
    execute(cli)
}

