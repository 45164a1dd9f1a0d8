//! Constant-trace certificates: the certification LP (dense and per
//! clique), closed-form certificates for ball/annulus and
//! equivalent-degree structures, serialization and verification.

mod build;
mod cert;
mod closed;
pub mod lp;
mod verify;

pub use build::{build_ctp_lp_parts, CtpLp};
pub use cert::{certificate_from_text, certificate_to_text, group_from_lp, CtpCertificate, GroupCertificate, GRAM_TOL};
pub use lp::{solve_lp, Bound, LinearProgram, LpError, LpSolution, LpStatus, PHASE1_TOL};
pub use verify::{verify_certificate, VerifyReport, IDENTITY_TOL, PROBE_TOL};

use crate::cspattern::{CliqueStructure, SparsityError};
use crate::par::{self, Parallelism};
use crate::polycore::{PolyError, Polynomial};
use crate::popmodel::PopInstance;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertError {
    #[error("relaxation order k={k} is below k_min={kmin}")]
    Order { k: usize, kmin: usize },
    #[error("certification LP of group {group} is infeasible (phase-1 objective {phase1:.3e}); CTP not certified, consider reformulate_equivalent_degree")]
    Infeasible { group: usize, phase1: f64 },
    #[error("certification LP is unbounded")]
    Unbounded,
    #[error("no closed-form certificate for this constraint structure")]
    NotApplicable,
    #[error("invalid LP solution: {0}")]
    InvalidSolution(String),
    #[error("certificate invalid: {0}")]
    Invalid(String),
    #[error("certificate does not match the problem: {0}")]
    Mismatch(String),
    #[error("certificate syntax: {0}")]
    Parse(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sparsity(#[from] SparsityError),
}

/// How certificates are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CertMethod {
    /// Solve the certification LP.
    #[default]
    Lp,
    /// Closed form only; fails with [`CertError::NotApplicable`] otherwise.
    ClosedForm,
    /// Closed form when the structure matches, LP otherwise.
    ClosedFormOrLp,
}

/// Dense certification LP of the whole POP.
pub fn build_ctp_lp(pop: &PopInstance, k: usize) -> Result<CtpLp, CertError> {
    let kmin = pop.kmin();
    if k < kmin {
        return Err(CertError::Order { k, kmin });
    }
    build_ctp_lp_parts(pop.n, &pop.g, &pop.h, k)
}

fn local_parts(pop: &PopInstance, cs: &CliqueStructure, j: usize) -> Result<(Vec<Polynomial>, Vec<Polynomial>), CertError> {
    let vars = &cs.cliques[j];
    let pick = |polys: &[Polynomial], idx: &[usize], kind: &str| -> Result<Vec<Polynomial>, CertError> {
        idx.iter()
            .map(|&i| {
                polys[i].restrict(vars).ok_or_else(|| {
                    CertError::Sparsity(SparsityError::Unassignable { which: format!("{}{}", kind, i + 1), vars: polys[i].variables() })
                })
            })
            .collect()
    };
    Ok((pick(&pop.g, &cs.ineq[j], "g")?, pick(&pop.h, &cs.eq[j], "h")?))
}

/// Certification LP of clique `j`, in the clique's local variables.
pub fn build_ctp_lp_clique(pop: &PopInstance, k: usize, cs: &CliqueStructure, j: usize) -> Result<CtpLp, CertError> {
    let kmin = pop.kmin();
    if k < kmin {
        return Err(CertError::Order { k, kmin });
    }
    let (g, h) = local_parts(pop, cs, j)?;
    build_ctp_lp_parts(cs.cliques[j].len(), &g, &h, k)
}

/// a = ξ*, P = diag(√G) for the dense LP.
pub fn certificate_from_lp(pop: &PopInstance, k: usize, lp: &CtpLp, sol: &LpSolution) -> Result<CtpCertificate, CertError> {
    let g = group_from_lp(lp, sol, (0..pop.n).collect(), (0..pop.m()).collect(), (0..pop.l()).collect())?;
    Ok(CtpCertificate { order: k, groups: vec![g] })
}

fn certify_group(
    pop: &PopInstance,
    k: usize,
    vars: Vec<usize>,
    ineq: Vec<usize>,
    eq: Vec<usize>,
    g: &[Polynomial],
    h: &[Polynomial],
    method: CertMethod,
) -> Result<GroupCertificate, CertError> {
    let n = vars.len();
    if method != CertMethod::Lp {
        match closed::closed_form_parts(n, g, k) {
            Ok(cf) => {
                let scaling = cf.gram.iter().map(|b| b.iter().map(|v| v.sqrt()).collect()).collect();
                let ideal = vec![Vec::new(); eq.len()];
                return Ok(GroupCertificate { trace: cf.trace, variables: vars, ineq, eq, scaling, ideal });
            }
            Err(e) if method == CertMethod::ClosedForm => return Err(e),
            Err(_) => {}
        }
    }
    let _ = pop;
    let lp = build_ctp_lp_parts(n, g, h, k)?;
    let sol = solve_lp(&lp.lp)?;
    group_from_lp(&lp, &sol, vars, ineq, eq)
}

/// Closed-form certificate of the whole POP (or per clique when `cs` is
/// given); never touches the LP.
pub fn closed_form_certificate(pop: &PopInstance, k: usize, cs: Option<&CliqueStructure>) -> Result<CtpCertificate, CertError> {
    certify(pop, k, cs, CertMethod::ClosedForm, Parallelism::Sequential)
}

/// Certifies the POP densely (`cs = None`) or clique by clique. Per-clique
/// problems are independent and may run in parallel; the result does not
/// depend on the execution mode.
pub fn certify(
    pop: &PopInstance,
    k: usize,
    cs: Option<&CliqueStructure>,
    method: CertMethod,
    mode: Parallelism,
) -> Result<CtpCertificate, CertError> {
    let kmin = pop.kmin();
    if k < kmin {
        return Err(CertError::Order { k, kmin });
    }
    let groups = match cs {
        None => vec![certify_group(
            pop,
            k,
            (0..pop.n).collect(),
            (0..pop.m()).collect(),
            (0..pop.l()).collect(),
            &pop.g,
            &pop.h,
            method,
        )?],
        Some(cs) => {
            let results = par::map_range(mode, cs.len(), |j| {
                let (g, h) = local_parts(pop, cs, j)?;
                certify_group(pop, k, cs.cliques[j].clone(), cs.ineq[j].clone(), cs.eq[j].clone(), &g, &h, method)
                    .map_err(|e| match e {
                        CertError::Infeasible { phase1, .. } => CertError::Infeasible { group: j + 1, phase1 },
                        other => other,
                    })
            });
            results.into_iter().collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(CtpCertificate { order: k, groups })
}
