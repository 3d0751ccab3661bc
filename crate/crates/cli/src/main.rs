//! `carnot`: exact and numerical computations on graded nilpotent groups.
//!
//! Every subcommand produces one artifact (JSON or CSV). It goes to
//! `<out>/<subcommand>.<ext>` when `--out` is given and to stdout otherwise; a
//! short human summary always goes to stderr. Exit codes: 0 on success, 1 on a
//! validation failure (bad flags, malformed or inconsistent group, failed
//! numerical check), 2 on I/O errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use carnot_core::group_file::{bundled_json, bundled_names, parse_group};
use carnot_core::GradedLieAlgebra;
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "carnot", version, about = "Graded nilpotent groups: group laws, coadjoint strata, tangent groupoid numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate antisymmetry, Jacobi and dilation compatibility
    CheckAlgebra { group: String },
    /// BCH group law and its structural checks
    GroupLaw { group: String },
    /// Left- and right-invariant vector fields
    VectorFields { group: String },
    /// The homogeneous operator Σ ±X_j^{2q/q_j}, q the lcm of the weights
    Rockland { group: String },
    /// Coadjoint strata of sampled covectors
    Strata { group: String },
    /// Dimension sequences and jump sets of sampled covectors
    OrbitDims { group: String },
    /// Vergne polarizations of sampled covectors
    Polarization { group: String },
    /// Dilation average of a mean-zero Schwartz function
    Type0Kernel { group: String },
    /// Zoom covariance of the t-slice representation
    ZoomDemo { group: String },
    /// Convergence of the averaged operator under widening cutoffs
    FixOperator { group: String },
    /// Decay of ‖σ_λ(f) * g*‖ in λ for mean-zero f, g
    DecayProbe { group: String },
    /// Run the full acceptance suite
    ReportAll,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Opts {
    /// Points per grid axis (odd)
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Grid half-width
    #[arg(long, global = true)]
    grid_r: Option<f64>,
    #[arg(long, global = true)]
    lambda_min: Option<f64>,
    #[arg(long, global = true)]
    lambda_max: Option<f64>,
    /// Number of λ values or quadrature nodes, depending on the subcommand
    #[arg(long, global = true)]
    n_lambda: Option<usize>,
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Pass threshold for numerical checks
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<carnot_core::NumericError> for CliError {
    fn from(e: carnot_core::NumericError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<carnot_core::LieError> for CliError {
    fn from(e: carnot_core::LieError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Result of one subcommand.
pub struct Artifact {
    pub json: serde_json::Value,
    pub csv: Option<String>,
    pub summary: String,
    pub ok: bool,
}

/// Checked numeric parameters, with per-subcommand defaults filled in by
/// the accessors.
pub struct Params {
    pub grid_n: Option<usize>,
    pub grid_r: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub n_lambda: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub tol: Option<f64>,
}

impl Params {
    fn from_opts(o: &Opts) -> Result<Self, CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if let Some(n) = o.grid_n {
            if n == 0 || n % 2 == 0 {
                return bad(format!("--grid-n must be odd and positive, got {n}"));
            }
        }
        for (name, v) in [("--grid-r", o.grid_r), ("--lambda-min", o.lambda_min), ("--lambda-max", o.lambda_max), ("--tol", o.tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if o.n_lambda == Some(0) {
            return bad("--n-lambda must be positive".into());
        }
        if o.samples == 0 {
            return bad("--samples must be positive".into());
        }
        if let (Some(a), Some(b)) = (o.lambda_min, o.lambda_max) {
            if a >= b {
                return bad(format!("--lambda-min {a} must be below --lambda-max {b}"));
            }
        }
        Ok(Params {
            grid_n: o.grid_n,
            grid_r: o.grid_r,
            lambda_min: o.lambda_min,
            lambda_max: o.lambda_max,
            n_lambda: o.n_lambda,
            samples: o.samples,
            seed: o.seed,
            tol: o.tol,
        })
    }
}

/// A path to a group file, or a bundled name (with or without `.json`).
fn load_group(arg: &str) -> Result<GradedLieAlgebra, CliError> {
    let path = PathBuf::from(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{arg}: {e}")))?
    } else {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
        match bundled_json(stem) {
            Some(j) if path.parent().is_none_or(|p| p.as_os_str().is_empty()) => j.to_string(),
            _ => {
                return Err(CliError::Io(format!(
                    "{arg}: no such file, and not a bundled group ({})",
                    bundled_names().join(", ")
                )))
            }
        }
    };
    parse_group(&text).map_err(|e| CliError::Validation(format!("{arg}: {e}")))
}

fn emit(name: &str, art: &Artifact, format: Format, out: Option<&PathBuf>) -> Result<(), CliError> {
    let (body, ext) = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&art.json).expect("JSON values always serialize");
            s.push('\n');
            (s, "json")
        }
        Format::Csv => match &art.csv {
            Some(c) => (c.clone(), "csv"),
            None => return Err(CliError::Validation(format!("{name} has no CSV output; use --format json"))),
        },
    };
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let file = dir.join(format!("{name}.{ext}"));
            std::fs::write(&file, body).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
            eprintln!("wrote {}", file.display());
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    carnot_core::numeric::reduce::configure_threads();
    let p = Params::from_opts(&cli.opts)?;
    let (name, art) = match &cli.command {
        Command::CheckAlgebra { group } => ("check-algebra", commands::check_algebra(&load_group(group)?)),
        Command::ReportAll => ("report-all", commands::report_all()),
        cmd => {
            let (name, group) = match cmd {
                Command::GroupLaw { group } => ("group-law", group),
                Command::VectorFields { group } => ("vector-fields", group),
                Command::Rockland { group } => ("rockland", group),
                Command::Strata { group } => ("strata", group),
                Command::OrbitDims { group } => ("orbit-dims", group),
                Command::Polarization { group } => ("polarization", group),
                Command::Type0Kernel { group } => ("type0-kernel", group),
                Command::ZoomDemo { group } => ("zoom-demo", group),
                Command::FixOperator { group } => ("fix-operator", group),
                Command::DecayProbe { group } => ("decay-probe", group),
                Command::CheckAlgebra { .. } | Command::ReportAll => unreachable!(),
            };
            let alg = load_group(group)?;
            let violations = alg.validate();
            if !violations.is_empty() {
                let listed: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
                return Err(CliError::Validation(format!("{group} is not a valid graded algebra:\n{}", listed.join("\n"))));
            }
            let art = match name {
                "group-law" => commands::group_law(&alg)?,
                "vector-fields" => commands::vector_fields(&alg)?,
                "rockland" => commands::rockland(&alg)?,
                "strata" => commands::strata(&alg, &p),
                "orbit-dims" => commands::orbit_dims(&alg, &p)?,
                "polarization" => commands::polarization(&alg, &p),
                "type0-kernel" => commands::type0_kernel(&alg, &p)?,
                "zoom-demo" => commands::zoom_demo(&alg, &p)?,
                "fix-operator" => commands::fix_operator(&alg, &p)?,
                _ => commands::decay_probe(&alg, &p)?,
            };
            (name, art)
        }
    };
    emit(name, &art, cli.opts.format, cli.opts.out.as_ref())?;
    eprintln!("{}", art.summary);
    Ok(art.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
