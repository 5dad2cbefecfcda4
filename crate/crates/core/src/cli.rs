//! Command-line front end.
//!
//! Exit codes: 0 success, 1 the theorem audit found a violation, 2 usage or
//! argument errors, 3 file I/O or malformed input files.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audit::{self, AuditOptions};
use crate::cone::{MonteCarloConfig, VertexCone, DEFAULT_SAMPLES};
use crate::error::Error;
use crate::geometry::{Point, Simplex, SimplexKind, DEFAULT_MEMBERSHIP_TOL};
use crate::io::{self, IoError};
use crate::optimizer::{self, BuiltinObjective, Objective};
use crate::partition::{Partition, RefineStrategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDING: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable holding the default Monte-Carlo seed.
pub const SEED_ENV: &str = "REGPART_SEED";

#[derive(Debug, Parser)]
#[command(name = "regpart", version, about = "Build, refine and audit regular simplicial partitions")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build root simplices, refine them, and write the partition as JSON.
    Refine(RefineArgs),
    /// Audit the intersection-number bound on a partition file.
    Verify(VerifyArgs),
    /// Estimate solid-angle fractions of tangent cones of one simplex.
    Cone(ConeArgs),
    /// Run simplicial branch-and-bound on a built-in objective over [0,1]^d.
    Optimize(OptimizeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RootKind {
    /// Kuhn triangulation of the unit cube.
    Kuhn,
    /// Simplices read from --input.
    File,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    BisectAllLeaves,
    BisectLargestLeaf,
}

impl From<StrategyArg> for RefineStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::BisectAllLeaves => RefineStrategy::BisectAllLeaves,
            StrategyArg::BisectLargestLeaf => RefineStrategy::BisectLargestLeaf,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CanonicalArg {
    UnitCorner,
    Regular,
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[arg(long, value_enum, default_value = "kuhn")]
    root: RootKind,
    /// Simplex JSON file (one object or an array) when --root file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    steps: usize,
    #[arg(long, value_enum, default_value = "bisect-all-leaves")]
    strategy: StrategyArg,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Monte-Carlo samples per cone.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, env = SEED_ENV, default_value_t = crate::sampling::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Partition JSON file.
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    mc: McArgs,
    /// Write the per-check CSV report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Audit every (leaf, vertex) pair instead of a capped subsample.
    #[arg(long)]
    full_audit: bool,
}

#[derive(Debug, Args)]
struct ConeArgs {
    /// Canonical simplex to use (needs --dim).
    #[arg(long, value_enum, conflicts_with = "input")]
    canonical: Option<CanonicalArg>,
    #[arg(long)]
    dim: Option<usize>,
    /// Simplex JSON file; the first simplex is used.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Vertex index; all vertices when neither --vertex nor --point is set.
    #[arg(long, conflicts_with = "point")]
    vertex: Option<usize>,
    /// Comma-separated point coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_MEMBERSHIP_TOL)]
    tol: f64,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// sphere, shifted-sphere, linear or constant.
    #[arg(long)]
    objective: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 5000)]
    budget: usize,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Write the iteration trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Io(IoError),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Io(e)
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parse `args` (including the program name) and dispatch.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Refine(a) => refine(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Cone(a) => cone(a, out),
        Command::Optimize(a) => optimize(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_IO
        }
    }
}

fn mc_config(a: &McArgs) -> std::result::Result<MonteCarloConfig, Failure> {
    Ok(MonteCarloConfig::new(a.samples, a.seed)?)
}

fn refine(a: RefineArgs, out: &mut dyn Write) -> CmdResult {
    let mut p = match a.root {
        RootKind::Kuhn => {
            let d = a.dim.ok_or_else(|| Failure::Usage("--dim is required with --root kuhn".into()))?;
            Partition::kuhn(d)?
        }
        RootKind::File => {
            let path = a
                .input
                .as_ref()
                .ok_or_else(|| Failure::Usage("--input is required with --root file".into()))?;
            let roots = io::read_simplices(path)?;
            let d = roots
                .first()
                .map(Simplex::dim)
                .ok_or_else(|| Failure::Usage("simplex file holds no simplices".into()))?;
            if let Some(want) = a.dim {
                if want != d {
                    return Err(Error::DimensionMismatch { expected: want, found: d }.into());
                }
            }
            Partition::from_roots(d, roots)?
        }
    };
    p.refine(a.steps, a.strategy.into())?;
    io::write_file(&a.output, &io::partition_to_json(&p))?;
    let eta = p.min_regularity()?;
    let (_, _, valence) = p.max_valence()?;
    let _ = writeln!(out, "leaves={} eta_min={eta} max_valence={valence}", p.leaf_count());
    Ok(EXIT_OK)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let mc = mc_config(&a.mc)?;
    let p = io::read_partition(&a.input)?;
    let opts = AuditOptions {
        full_audit: a.full_audit,
        ..AuditOptions::default()
    };
    let report = audit::verify_theorem_with(&p, &mc, &opts)?;
    if let Some(path) = &a.report {
        io::write_file(path, &io::report_csv(&report))?;
    }
    let verdict = if report.passes() { "PASS" } else { "FAIL" };
    let _ = writeln!(
        out,
        "eta_min={} N={:.2} max_valence={}",
        report.eta_min, report.theoretical_bound, report.max_observed_valence
    );
    let _ = writeln!(
        out,
        "vertex_checks={} violations={} decomposition_checks={} violations={} {verdict}",
        report.per_vertex_checks.len(),
        report.vertex_violations(),
        report.decomposition_checks.len(),
        report.decomposition_violations()
    );
    Ok(if report.passes() { EXIT_OK } else { EXIT_FINDING })
}

fn cone(a: ConeArgs, out: &mut dyn Write) -> CmdResult {
    let mc = mc_config(&a.mc)?;
    let simplex = match (&a.canonical, &a.input) {
        (Some(kind), None) => {
            let d = a.dim.ok_or_else(|| Failure::Usage("--dim is required with --canonical".into()))?;
            let kind = match kind {
                CanonicalArg::UnitCorner => SimplexKind::UnitCorner,
                CanonicalArg::Regular => SimplexKind::Regular,
            };
            Simplex::canonical(kind, d)?
        }
        (None, Some(path)) => io::read_simplices(path)?
            .into_iter()
            .next()
            .ok_or_else(|| Failure::Usage("simplex file holds no simplices".into()))?,
        _ => return Err(Failure::Usage("exactly one of --canonical or --input is required".into())),
    };

    let mut cones: Vec<(String, VertexCone)> = Vec::new();
    if let Some(coords) = a.point {
        let p = Point::new(coords)?;
        cones.push((format!("{}:p", simplex.id()), VertexCone::at_point(&simplex, &p, a.tol)?));
    } else {
        let vertices: Vec<usize> = match a.vertex {
            Some(j) if j > simplex.dim() => {
                return Err(Failure::Usage(format!("vertex {j} out of range 0..={}", simplex.dim())))
            }
            Some(j) => vec![j],
            None => (0..=simplex.dim()).collect(),
        };
        for j in vertices {
            cones.push((format!("{}:v{j}", simplex.id()), VertexCone::at_vertex(&simplex, j)?));
        }
    }

    let estimates: Vec<_> = cones.iter().map(|(_, c)| c.solid_angle_fraction(&mc)).collect();
    let csv = io::estimates_csv(cones.iter().map(|(id, _)| id.as_str()).zip(&estimates));
    match &a.report {
        Some(path) => io::write_file(path, &csv)?,
        None => {
            let _ = write!(out, "{csv}");
        }
    }
    if a.report.is_some() {
        let rho = simplex.regularity_ratio();
        let bound = crate::cone::per_simplex_angle_bound(rho, simplex.dim());
        for ((id, _), e) in cones.iter().zip(&estimates) {
            let _ = writeln!(out, "{id} fraction={} stderr={} bound={bound}", e.fraction, e.stderr);
        }
    }
    Ok(EXIT_OK)
}

fn optimize(a: OptimizeArgs, out: &mut dyn Write) -> CmdResult {
    let objective: BuiltinObjective = a.objective.parse()?;
    let f = objective.in_dim(a.dim);
    let roots = Partition::kuhn(a.dim)?;
    let r = optimizer::optimize(&f, roots, a.budget, a.tol)?;
    if let Some(path) = &a.trace {
        io::write_file(path, &io::trace_csv(&r.trace))?;
    }
    let _ = writeln!(
        out,
        "incumbent={:?} value={} gap={} lower_bound={} evaluations={} leaves_explored={} lipschitz={}",
        r.incumbent.coords(),
        r.value,
        r.gap,
        r.global_lower_bound,
        r.evaluations,
        r.leaves_explored,
        f.lipschitz()
    );
    Ok(EXIT_OK)
}
