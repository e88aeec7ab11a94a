//! Command implementations for the `detsurf` binary.
//!
//! Tensor arguments are either a path to a tensor file (JSON or text) or the
//! name of an embedded fixture such as `T001` or `Q1`.

use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use detsurf::equivalence::{compare, orbit_table, OrbitGroup, DEFAULT_VERDICT_TOL};
use detsurf::invariants::{fingerprint, Backend, FingerprintConfig, InvariantError, MethodInfo};
use detsurf::io::{
    export_obj, fixtures, parse_tensor, serialize_tensor, write_report, PairVerdict, Report, ReportFormat, TensorFormat,
};
use detsurf::quadrature::{load_design, QuadratureError};
use detsurf::surface::{convexity_check, curvature_census, singularity_scan, surface_mesh, SurfaceError};
use detsurf::{det_poly, Definiteness, HomogeneousPolynomial, Tensor3};

/// Exit statuses of the binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const DEFINITENESS: i32 = 3;
    pub const ACCURACY: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("definiteness failure: {0}")]
    Definiteness(String),
    #[error("accuracy not reached: {0}")]
    Accuracy(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => exit::PARSE,
            CliError::Definiteness(_) => exit::DEFINITENESS,
            CliError::Accuracy(_) => exit::ACCURACY,
            CliError::Other(_) => exit::OTHER,
        }
    }
}

impl From<InvariantError> for CliError {
    fn from(e: InvariantError) -> Self {
        match e {
            InvariantError::NotDefinite(_) | InvariantError::Surface(SurfaceError::DefinitenessViolation { .. }) => {
                CliError::Definiteness(e.to_string())
            }
            InvariantError::Quadrature(QuadratureError::AccuracyNotReached { .. }) => CliError::Accuracy(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<detsurf::equivalence::EquivalenceError> for CliError {
    fn from(e: detsurf::equivalence::EquivalenceError) -> Self {
        match e {
            detsurf::equivalence::EquivalenceError::Invariant(inner) => inner.into(),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::DefinitenessViolation { .. } => CliError::Definiteness(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "detsurf", version, about = "Invariants of determinant-polynomial surfaces for tensor non-equivalence")]
#[command(after_help = "Thread count: set RAYON_NUM_THREADS. Results do not depend on it.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the determinant polynomial.
    Detpoly {
        /// Tensor file or fixture name.
        tensor: String,
    },
    /// Test whether the determinant polynomial is definite.
    Check {
        tensor: String,
        #[arg(long, default_value_t = 48)]
        resolution: usize,
    },
    /// Compute the invariant fingerprint of one or more tensors.
    Invariants {
        #[arg(required = true)]
        tensors: Vec<String>,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare two tensors and report a verdict.
    Compare {
        first: String,
        second: String,
        /// Relative tolerance for the verdict.
        #[arg(long, default_value_t = DEFAULT_VERDICT_TOL)]
        rel_tol: f64,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fingerprints of a tensor and random transforms of it.
    Orbit {
        tensor: String,
        #[arg(long, value_enum, default_value_t = GroupArg::Sl3)]
        group: GroupArg,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Count elliptic, hyperbolic and parabolic lattice points.
    Census {
        tensor: String,
        #[arg(long, default_value_t = 64)]
        res_s: usize,
        #[arg(long, default_value_t = 128)]
        res_t: usize,
        /// Zero band for K; defaults to 1e-8 times the largest |K|.
        #[arg(long)]
        zero_tol: Option<f64>,
        /// Also list points with small gradient or flat second form.
        #[arg(long)]
        singular_tol: Option<f64>,
    },
    /// Write an OBJ mesh of the surface to stdout or a file.
    Mesh {
        tensor: String,
        #[arg(long, default_value_t = 64)]
        res_s: usize,
        #[arg(long, default_value_t = 128)]
        res_t: usize,
        #[arg(long, short)]
        output: Option<std::path::PathBuf>,
    },
    /// List the embedded fixtures, or print one as a tensor file.
    Fixtures {
        name: Option<String>,
        #[arg(long, value_enum, default_value_t = TensorFormatArg::Json)]
        format: TensorFormatArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GroupArg {
    Sl3,
    Gl3,
    Sl443,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Adaptive,
    Mc,
    Design,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReportFormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TensorFormatArg {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Adaptive)]
    pub backend: BackendArg,
    /// Relative tolerance of the adaptive backend.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Cell budget of the adaptive backend.
    #[arg(long, default_value_t = 400_000)]
    pub max_cells: usize,
    /// Design point file (3 reals per point).
    #[arg(long)]
    pub design_file: Option<std::path::PathBuf>,
    /// Declared strength of the design file.
    #[arg(long, default_value_t = 20)]
    pub design_strength: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lattice rows for the census and convexity check.
    #[arg(long, default_value_t = 64)]
    pub lattice_s: usize,
    #[arg(long, default_value_t = 128)]
    pub lattice_t: usize,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = ReportFormatArg::Csv)]
    pub format: ReportFormatArg,
    /// Record the wall-clock time in the report.
    #[arg(long)]
    pub timestamp: bool,
}

/// Resolves a tensor argument: an existing file, else a fixture name.
pub fn load_tensor(arg: &str) -> Result<Tensor3, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Other(format!("{arg}: {e}")))?;
        let t = parse_tensor(&text).map_err(|e| CliError::Parse(format!("{arg}: {e}")))?;
        if t.label().is_none() {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg).to_string();
            return Ok(t.with_label(stem));
        }
        return Ok(t);
    }
    fixtures::fixture(arg)
        .ok_or_else(|| CliError::Parse(format!("{arg}: no such file and no fixture of that name")))
}

fn polynomial(t: &Tensor3) -> Result<HomogeneousPolynomial, CliError> {
    det_poly(t).map_err(|e| CliError::Other(e.to_string()))
}

fn require_definite(f: &HomogeneousPolynomial) -> Result<HomogeneousPolynomial, CliError> {
    Ok(detsurf::invariants::prepare(f)?)
}

impl MethodArgs {
    pub fn config(&self) -> Result<FingerprintConfig, CliError> {
        let backend = match self.backend {
            BackendArg::Adaptive => Backend::Adaptive { rel_tol: self.tol, max_cells: self.max_cells },
            BackendArg::Mc => Backend::MonteCarlo { samples: self.mc_samples, seed: self.seed },
            BackendArg::Design => {
                let path = self
                    .design_file
                    .as_ref()
                    .ok_or_else(|| CliError::Other("--backend design requires --design-file".into()))?;
                let raw = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
                let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("design");
                let d = load_design(&raw, self.design_strength, name)
                    .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
                Backend::Design(d)
            }
        };
        Ok(FingerprintConfig { lattice: (self.lattice_s, self.lattice_t), ..FingerprintConfig::with_backend(backend) })
    }
}

fn new_report(config: &FingerprintConfig, seed: Option<u64>, output: &OutputArgs) -> Report {
    let mut r = Report::new(MethodInfo::for_backend(&config.backend));
    r.seed = seed;
    if output.timestamp {
        r.generated_at_unix =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    r
}

fn render(report: &Report, output: &OutputArgs) -> Result<String, CliError> {
    let format = match output.format {
        ReportFormatArg::Csv => ReportFormat::Csv,
        ReportFormatArg::Json => ReportFormat::Json,
    };
    write_report(report, format).map_err(|e| CliError::Other(e.to_string()))
}

fn label_of(t: &Tensor3, arg: &str) -> String {
    t.label().unwrap_or(arg).to_string()
}

/// Runs a parsed command and returns what should be printed on stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Detpoly { tensor } => {
            let f = polynomial(&load_tensor(&tensor)?)?;
            Ok(format!("{f}\n"))
        }
        Command::Check { tensor, resolution } => {
            let f = polynomial(&load_tensor(&tensor)?)?;
            if resolution < 8 {
                return Err(CliError::Other("--resolution must be at least 8".into()));
            }
            match f.definiteness(resolution) {
                Definiteness::PositiveDefinite => Ok("positive definite\n".into()),
                Definiteness::NegativeDefinite => Ok("negative definite\n".into()),
                Definiteness::Indefinite { witness } => Err(CliError::Definiteness(format!(
                    "indefinite: sign changes at direction ({:.6}, {:.6}, {:.6})",
                    witness[0], witness[1], witness[2]
                ))),
                Definiteness::Inconclusive { min_abs, location } => Err(CliError::Definiteness(format!(
                    "inconclusive: |f| = {min_abs:.3e} at direction ({:.6}, {:.6}, {:.6})",
                    location[0], location[1], location[2]
                ))),
            }
        }
        Command::Invariants { tensors, method, output } => {
            let config = method.config()?;
            let mut report = new_report(&config, matches!(method.backend, BackendArg::Mc).then_some(method.seed), &output);
            for arg in &tensors {
                let t = load_tensor(arg)?;
                let f = polynomial(&t)?;
                report.fingerprints.push(fingerprint(&f, &label_of(&t, arg), &config)?);
            }
            render(&report, &output)
        }
        Command::Compare { first, second, rel_tol, method, output } => {
            let config = method.config()?;
            let mut report = new_report(&config, matches!(method.backend, BackendArg::Mc).then_some(method.seed), &output);
            let (t1, t2) = (load_tensor(&first)?, load_tensor(&second)?);
            let mut l1 = label_of(&t1, &first);
            let mut l2 = label_of(&t2, &second);
            if l1 == l2 {
                l1.push_str("-a");
                l2.push_str("-b");
            }
            let fp1 = fingerprint(&polynomial(&t1)?, &l1, &config)?;
            let fp2 = fingerprint(&polynomial(&t2)?, &l2, &config)?;
            let verdict = compare(&fp1, &fp2, rel_tol)?;
            report.fingerprints = vec![fp1, fp2];
            report.verdicts.push(PairVerdict { left: l1, right: l2, verdict });
            render(&report, &output)
        }
        Command::Orbit { tensor, group, count, method, output } => {
            let config = method.config()?;
            let t = load_tensor(&tensor)?;
            require_definite(&polynomial(&t)?)?;
            let group = match group {
                GroupArg::Sl3 => OrbitGroup::SL3,
                GroupArg::Gl3 => OrbitGroup::GL3,
                GroupArg::Sl443 => OrbitGroup::SL4xSL4xSL3,
            };
            let label = label_of(&t, &tensor);
            let table = orbit_table(&t.with_label(label), group, count, method.seed, &config)?;
            let mut report = new_report(&config, Some(method.seed), &output);
            report.fingerprints = table.rows;
            render(&report, &output)
        }
        Command::Census { tensor, res_s, res_t, zero_tol, singular_tol } => {
            let f = require_definite(&polynomial(&load_tensor(&tensor)?)?)?;
            let c = curvature_census(&f, res_s, res_t, zero_tol)?;
            let convex = convexity_check(&f, res_s, res_t, 1e-9)?;
            let mut out = format!(
                "k_plus,k_minus,k_zero,convex\n{},{},{},{}\n",
                c.k_plus,
                c.k_minus,
                c.k_zero,
                convex.is_convex()
            );
            if let Some(tol) = singular_tol {
                out.push_str("\ns,t,grad_norm,gauss_curv\n");
                for fl in singularity_scan(&f, res_s, res_t, tol)? {
                    out.push_str(&format!("{:.12},{:.12},{:.6e},{:.6e}\n", fl.s, fl.t, fl.grad_norm, fl.gauss_curv));
                }
            }
            Ok(out)
        }
        Command::Mesh { tensor, res_s, res_t, output } => {
            let f = require_definite(&polynomial(&load_tensor(&tensor)?)?)?;
            let obj = export_obj(&surface_mesh(&f, res_s, res_t)?);
            match output {
                Some(path) => {
                    std::fs::write(&path, obj).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
                    Ok(String::new())
                }
                None => Ok(obj),
            }
        }
        Command::Fixtures { name, format } => match name {
            None => Ok(fixtures::all().iter().map(|(n, _)| format!("{n}\n")).collect()),
            Some(n) => {
                let t = fixtures::fixture(&n).ok_or_else(|| CliError::Parse(format!("no fixture named {n}")))?;
                let fmt = match format {
                    TensorFormatArg::Json => TensorFormat::Json,
                    TensorFormatArg::Text => TensorFormat::Text,
                };
                serialize_tensor(&t, fmt).map_err(|e| CliError::Other(e.to_string()))
            }
        },
    }
}
