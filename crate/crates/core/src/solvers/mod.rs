//! First-order solvers for constant-trace SDPs.
//!
//! All solvers work on a scaled [`StandardSdp`] (every group has trace 1,
//! ‖A‖ ≤ 1, ‖C‖_F = 1) and report values in the original units.
//!
//! * [`cgal_solve`] / [`cgal_solve_blocks`]: conditional-gradient augmented
//!   Lagrangian. Each step needs one smallest eigenvector per trace group.
//! * [`spectral_solve`]: maximises the concave dual function
//!   φ(y) = Σ_j a_j λ_min(C_j − A_jᵀy) + bᵀy with a proximal bundle method
//!   and recovers a primal from the eigenvectors at the final y.

mod cgal;
mod oracle;
mod recover;
mod spectral;

pub use cgal::{cgal_solve, cgal_solve_blocks, CgalOptions, ShiftRule};
pub use recover::{recover_primal, Recovery, CLUSTER_CAP, CLUSTER_REL};
pub use spectral::{dual_function, spectral_solve, DualEval, SpectralOptions};

use std::fmt;
use std::time::Duration;

use crate::numerics::DenseSym;
use crate::sdpbuild::StandardSdp;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("the SDP must be scaled before solving")]
    NotScaled,
    #[error("{0}")]
    Invalid(String),
    #[error("eigensolver did not converge at iteration {iteration} (block {block})")]
    Eigen { iteration: usize, block: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Cgal,
    CgalBlocks,
    Spectral,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Cgal => "cgal",
            SolverKind::CgalBlocks => "cgal-blocks",
            SolverKind::Spectral => "spectral",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// Spectral ascent made no progress for a long stretch.
    Stagnated,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max-iterations",
            Termination::Stagnated => "stagnated",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timing {
    pub eigen: Duration,
    pub update: Duration,
    pub recovery: Duration,
    pub total: Duration,
}

/// One line of the progress stream (scaled units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProgressRow {
    pub t: usize,
    pub primal: f64,
    pub dual: f64,
    pub feasibility: f64,
    pub gap: f64,
}

impl ProgressRow {
    pub const CSV_HEADER: &'static str = "t,primal,dual,feasibility,gap";

    pub fn to_csv(&self) -> String {
        format!("{},{:e},{:e},{:e},{:e}", self.t, self.primal, self.dual, self.feasibility, self.gap)
    }
}

/// Per-iteration invariant checks of explicit CGAL runs (worst values seen).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Audit {
    /// max |trace(X_j) − a_j| over groups and iterations.
    pub trace_error: f64,
    /// min λ_min(X_t) over blocks and iterations.
    pub min_eigenvalue: f64,
    /// max ‖y_t‖.
    pub max_dual_norm: f64,
    /// max ‖w_t − (AX_t − b)‖_∞ (running residual against a recomputation).
    pub residual_drift: f64,
    /// max of dual surrogate − primal over iterations (weak duality slack).
    pub duality_violation: f64,
}

impl Audit {
    fn new() -> Self {
        Audit {
            trace_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_dual_norm: 0.0,
            residual_drift: 0.0,
            duality_violation: f64::NEG_INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverReport {
    pub solver: SolverKind,
    /// Headline value: primal for CGAL, φ(ȳ) for the spectral method.
    pub value: f64,
    /// ⟨C, X⟩ of the final iterate, or of the aggregated bundle primal for
    /// the spectral method (original units).
    pub primal: f64,
    /// Lagrangian bound Σ_j a_j λ_min(·) − bᵀz (original units).
    pub dual: f64,
    /// ‖AX − b‖ / max(1, ‖b‖) on the scaled problem.
    pub feasibility: f64,
    /// |primal − dual| / (1 + max(|primal|, |dual|)) on the scaled problem.
    pub gap: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub timing: Timing,
    /// Trace constants of the groups in original units.
    pub group_traces: Vec<f64>,
    /// Final dual vector of the scaled problem (sign as in C + Aᵀy).
    pub y: Vec<f64>,
    /// Final primal blocks of the scaled problem (explicit CGAL only).
    pub x: Option<Vec<DenseSym>>,
    /// Primal rebuilt from eigenvectors (implicit CGAL, spectral).
    pub recovery: Option<Recovery>,
    pub log: Vec<ProgressRow>,
    pub audit: Option<Audit>,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// Best available primal blocks in original units.
    pub fn primal_blocks(&self, sdp: &StandardSdp) -> Option<Vec<DenseSym>> {
        let x = self.x.as_ref().or(self.recovery.as_ref().map(|r| &r.x))?;
        Some(sdp.unscale_primal(x))
    }

    pub fn all_finite(&self) -> bool {
        [self.value, self.primal, self.dual, self.feasibility, self.gap].iter().all(|v| v.is_finite())
    }
}

pub(crate) fn relative_gap(p: f64, d: f64) -> f64 {
    (p - d).abs() / (1.0 + p.abs().max(d.abs()))
}

pub(crate) fn check_scaled(sdp: &StandardSdp) -> Result<(), SolverError> {
    if sdp.scaling.is_none() {
        return Err(SolverError::NotScaled);
    }
    if sdp.blocks.is_empty() || sdp.groups.is_empty() {
        return Err(SolverError::Invalid("SDP has no blocks".into()));
    }
    Ok(())
}
