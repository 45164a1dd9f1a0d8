use std::fs;
use std::io::Read;
use std::path::Path;
use std::time::{Duration, Instant};

use ctp_core::cspattern::{clique_structure, CliqueStructure, SparsityError};
use ctp_core::ctpcert::{certificate_from_text, certify, CertError, CertMethod, CtpCertificate};
use ctp_core::par::Parallelism;
use ctp_core::popmodel::{generate, parse_pop, reformulate_equivalent_degree, Family, GeneratorSpec, PopError, PopInstance};
use ctp_core::sdpbuild::{assemble, scale, sdp_from_text, SdpError, StandardSdp};
use ctp_core::solvers::{cgal_solve, cgal_solve_blocks, spectral_solve, CgalOptions, SolverError, SolverReport, SpectralOptions};

use crate::args::{InputArgs, Method, RelaxArgs, SolverArgs, SolverChoice};

/// Failure with its exit status.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Cert(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Cert(_) => 3,
            CliError::Numerical(_) => 5,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Parse(m) | CliError::Cert(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<PopError> for CliError {
    fn from(e: PopError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<SparsityError> for CliError {
    fn from(e: SparsityError) -> Self {
        CliError::Parse(format!("clique structure: {}", e))
    }
}

impl From<CertError> for CliError {
    fn from(e: CertError) -> Self {
        match e {
            CertError::Order { .. } | CertError::Parse(_) => CliError::Parse(e.to_string()),
            CertError::Infeasible { .. } => CliError::Cert(format!(
                "{}\nhint: if the feasible set lies in a ball ‖x‖² ≤ R, retry with --reformulate R=<val>",
                e
            )),
            _ => CliError::Cert(e.to_string()),
        }
    }
}

impl From<SdpError> for CliError {
    fn from(e: SdpError) -> Self {
        match e {
            SdpError::Parse(_) => CliError::Parse(e.to_string()),
            SdpError::Cert(c) => c.into(),
            SdpError::Mismatch(_) => CliError::Parse(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Invalid(_) => CliError::Parse(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(format!("stdin: {}", e)))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e)))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e)))
}

pub fn parse_family(name: &str) -> Result<Family, CliError> {
    name.parse::<Family>().map_err(CliError::from)
}

pub fn spec_for(family: Family, n: usize, l: Option<usize>, u: Option<usize>, seed: u64) -> GeneratorSpec {
    GeneratorSpec { family, n, l, u, seed }
}

/// A POP or an already assembled SDP.
pub enum Loaded {
    Pop(PopInstance),
    Sdp(StandardSdp),
}

fn is_sdp_text(text: &str) -> bool {
    text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).is_some_and(|l| l.starts_with("sdp"))
}

pub fn load(input: &InputArgs, allow_sdp: bool) -> Result<Loaded, CliError> {
    if let Some(name) = &input.family {
        let n = input.n.ok_or_else(|| CliError::Parse("--family needs --n".into()))?;
        let spec = spec_for(parse_family(name)?, n, input.l, input.u, input.seed);
        return Ok(Loaded::Pop(generate(&spec)?.pop));
    }
    let path = input.input.as_ref().ok_or_else(|| CliError::Parse("give an input file or --family/--n".into()))?;
    let text = read_text(path)?;
    if is_sdp_text(&text) {
        if !allow_sdp {
            return Err(CliError::Parse("expected a POP file, got an SDP".into()));
        }
        return Ok(Loaded::Sdp(sdp_from_text(&text)?));
    }
    Ok(Loaded::Pop(parse_pop(&text)?.pop))
}

pub fn load_pop(input: &InputArgs) -> Result<PopInstance, CliError> {
    match load(input, false)? {
        Loaded::Pop(p) => Ok(p),
        Loaded::Sdp(_) => unreachable!(),
    }
}

pub fn cert_method(m: Method) -> CertMethod {
    match m {
        Method::Lp => CertMethod::Lp,
        Method::ClosedForm => CertMethod::ClosedForm,
        Method::Auto => CertMethod::ClosedFormOrLp,
    }
}

/// POP after reformulation, with its order and clique structure.
pub struct Prepared {
    pub pop: PopInstance,
    pub k: usize,
    pub cs: Option<CliqueStructure>,
}

pub fn prepare(pop: PopInstance, order: Option<usize>, use_cs: bool, reformulate: Option<f64>) -> Result<Prepared, CliError> {
    let pop = match reformulate {
        Some(r) => reformulate_equivalent_degree(&pop, r)?.pop,
        None => pop,
    };
    let k = order.unwrap_or_else(|| pop.kmin());
    let cs = if use_cs { Some(clique_structure(&pop)?) } else { None };
    if let Some(cs) = &cs {
        let missing = cs.cliques_without_ball(&pop);
        if !missing.is_empty() {
            let ids: Vec<String> = missing.iter().map(|j| (j + 1).to_string()).collect();
            eprintln!("warning: no ball constraint on clique(s) {}; convergence of the hierarchy is not guaranteed", ids.join(","));
        }
    }
    Ok(Prepared { pop, k, cs })
}

pub fn certificate(p: &Prepared, relax: &RelaxArgs, mode: Parallelism) -> Result<CtpCertificate, CliError> {
    if let Some(path) = &relax.cert {
        let cert = certificate_from_text(&read_text(path)?)?;
        if cert.order != p.k {
            return Err(CliError::Parse(format!("certificate is for order {}, relaxation order is {}", cert.order, p.k)));
        }
        return Ok(cert);
    }
    Ok(certify(&p.pop, p.k, p.cs.as_ref(), cert_method(relax.method), mode)?)
}

pub fn mode_for(sequential: bool) -> Parallelism {
    if sequential {
        Parallelism::Sequential
    } else {
        Parallelism::default()
    }
}

/// Unscaled SDP, with the prepared POP and certificate when it came from one.
pub struct Built {
    pub sdp: StandardSdp,
    pub prepared: Option<(Prepared, CtpCertificate)>,
    pub certify: Duration,
    pub assemble: Duration,
}

/// Certifies (unless an SDP was given) and assembles.
pub fn build_sdp(loaded: Loaded, relax: &RelaxArgs, mode: Parallelism) -> Result<Built, CliError> {
    match loaded {
        Loaded::Sdp(sdp) => Ok(Built { sdp, prepared: None, certify: Duration::ZERO, assemble: Duration::ZERO }),
        Loaded::Pop(pop) => {
            let p = prepare(pop, relax.order, relax.cs, relax.reformulate)?;
            let t = Instant::now();
            let cert = certificate(&p, relax, mode)?;
            let tc = t.elapsed();
            let t = Instant::now();
            let sdp = assemble(&p.pop, &cert, p.cs.as_ref())?;
            Ok(Built { sdp, prepared: Some((p, cert)), certify: tc, assemble: t.elapsed() })
        }
    }
}

/// Scales and runs the chosen solver (blocks CGAL when there are several
/// trace groups).
pub fn run_solver(sdp: &StandardSdp, s: &SolverArgs, seed: u64, mode: Parallelism) -> Result<(StandardSdp, SolverReport), CliError> {
    let scaled = scale(sdp, mode)?;
    let report = match s.solver {
        SolverChoice::Cgal => {
            let blocks = scaled.groups.len() > 1;
            let base = if blocks { CgalOptions::blocks() } else { CgalOptions::dense() };
            let opts = CgalOptions {
                cap_k: s.cap_k,
                eps: s.eps.unwrap_or(base.eps),
                max_iter: s.max_iter.unwrap_or(base.max_iter),
                implicit: s.implicit,
                seed,
                mode,
                ..base
            };
            if blocks {
                cgal_solve_blocks(&scaled, &opts)?
            } else {
                cgal_solve(&scaled, &opts)?
            }
        }
        SolverChoice::Spectral => {
            let base = SpectralOptions::default();
            let opts = SpectralOptions {
                eps: s.eps.unwrap_or(base.eps),
                max_iter: s.max_iter.unwrap_or(base.max_iter),
                seed,
                mode,
                ..base
            };
            spectral_solve(&scaled, &opts)?
        }
    };
    Ok((scaled, report))
}
