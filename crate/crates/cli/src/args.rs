use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ctppop", version, about = "Constant-trace moment relaxations of polynomial optimization problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a random POP from one of the benchmark families.
    Generate(GenerateArgs),
    /// Certify the constant trace property and write the certificate.
    Certify(CertifyArgs),
    /// Certify, assemble, scale and solve the relaxation.
    Solve(SolveArgs),
    /// Solve a grid of generated instances and print one row per instance.
    Bench(BenchArgs),
    /// Write the standard-form SDP of the relaxation.
    ExportSdp(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Cgal,
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    JsonLines,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Certification LP.
    Lp,
    /// Closed-form certificate (ball, annulus, equivalent-degree POPs).
    ClosedForm,
    /// Closed form when it applies, LP otherwise.
    Auto,
}

/// Where the POP comes from: a file (`-` for stdin) or the generator.
#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// POP text file, or `-` for stdin. `solve` also accepts an exported SDP.
    pub input: Option<PathBuf>,
    /// Generate instead of reading: family name (ball, annulus, box, simplex,
    /// ball-ts, box-ts, cs-ball, cs-box, csts-ball, csts-box).
    #[arg(long, requires = "n", conflicts_with = "input")]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of equality constraints (family default when omitted).
    #[arg(long)]
    pub l: Option<usize>,
    /// Clique width of the sparse families.
    #[arg(long)]
    pub u: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct RelaxArgs {
    /// Relaxation order k (defaults to k_min).
    #[arg(long)]
    pub order: Option<usize>,
    /// Use the clique decomposition (the POP's own cliques when given).
    #[arg(long)]
    pub cs: bool,
    /// Add the equivalent-degree constraints for the ball bound R, as `R=<val>`.
    #[arg(long, value_name = "R=<val>", value_parser = parse_radius)]
    pub reformulate: Option<f64>,
    #[arg(long, value_enum, default_value_t = Method::Lp)]
    pub method: Method,
    /// Use this certificate instead of certifying.
    #[arg(long)]
    pub cert: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverChoice::Cgal)]
    pub solver: SolverChoice,
    /// Stopping tolerance (1e-3 dense CGAL, 1e-2 blocks CGAL, 1e-4 spectral).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Bound on the CGAL dual norm.
    #[arg(long = "cap-K", default_value_t = 1e6)]
    pub cap_k: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Keep only AX − b during CGAL and rebuild X at the end.
    #[arg(long)]
    pub implicit: bool,
    /// Run every kernel on the calling thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub u: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub relax: RelaxArgs,
    /// Certificate file (stdout when omitted in csv/json mode).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub relax: RelaxArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Also write the report (one JSON line) here.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Progress rows (CSV: t, primal, dual, feasibility, gap) go here.
    #[arg(long)]
    pub progress: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub relax: RelaxArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Families, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "ball")]
    pub family: Vec<String>,
    /// Problem sizes, comma separated (may be empty).
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub n: Vec<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub u: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    /// Solvers, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cgal,spectral")]
    pub solvers: Vec<SolverChoice>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "cap-K", default_value_t = 1e6)]
    pub cap_k: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub implicit: bool,
    /// Decompose the sparse families into cliques.
    #[arg(long)]
    pub cs: bool,
    #[arg(long, value_enum, default_value_t = Method::Lp)]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Instances per grid point (seeds seed, seed+1, ...).
    #[arg(long, default_value_t = 1)]
    pub repeats: u64,
    /// Solve instances one after the other.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn parse_radius(s: &str) -> Result<f64, String> {
    let v = s.strip_prefix("R=").ok_or_else(|| format!("expected R=<val>, got '{}'", s))?;
    let r: f64 = v.parse().map_err(|_| format!("bad radius '{}'", v))?;
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(format!("radius must be positive, got {}", r))
    }
}
