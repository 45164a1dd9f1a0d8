//! Polynomial optimization problems, the paper-style random QCQP
//! generators, and the equivalent-degree reformulation.

mod generate;
mod reformulate;
pub mod text;

pub use generate::{generate, Family, GeneratedPop, GeneratorSpec};
pub use reformulate::{reformulate_equivalent_degree, Reformulation};
pub use text::{parse_pop, pop_to_text, ParsedPop};

use crate::cspattern::CliqueStructure;
use crate::polycore::{PolyError, Polynomial};

/// min f(x) s.t. g_i(x) ≥ 0, h_j(x) = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PopInstance {
    pub n: usize,
    pub f: Polynomial,
    pub g: Vec<Polynomial>,
    pub h: Vec<Polynomial>,
    pub cliques: Option<CliqueStructure>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PopError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),
    #[error("polynomial {which} has {got} variables, expected {n}")]
    Arity { which: String, got: usize, n: usize },
}

impl PopInstance {
    pub fn new(f: Polynomial, g: Vec<Polynomial>, h: Vec<Polynomial>) -> Result<Self, PopError> {
        let pop = PopInstance { n: f.n(), f, g, h, cliques: None };
        pop.check()?;
        Ok(pop)
    }

    pub fn check(&self) -> Result<(), PopError> {
        let bad = |which: String, p: &Polynomial| {
            if p.n() != self.n {
                Err(PopError::Arity { which, got: p.n(), n: self.n })
            } else {
                Ok(())
            }
        };
        bad("f".into(), &self.f)?;
        for (i, p) in self.g.iter().enumerate() {
            bad(format!("g{}", i + 1), p)?;
        }
        for (j, p) in self.h.iter().enumerate() {
            bad(format!("h{}", j + 1), p)?;
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.g.len()
    }

    pub fn l(&self) -> usize {
        self.h.len()
    }

    /// Smallest admissible relaxation order, max(⌈f⌉, ⌈g_i⌉, ⌈h_j⌉), at least 1.
    pub fn kmin(&self) -> usize {
        let mut k = self.f.half_ceil_degree();
        for p in self.g.iter().chain(&self.h) {
            k = k.max(p.half_ceil_degree());
        }
        k.max(1) as usize
    }
}

/// Residuals of a point against the constraints.
#[derive(Clone, Debug)]
pub struct FeasibilityReport {
    pub g_values: Vec<f64>,
    pub h_values: Vec<f64>,
    pub objective: f64,
    pub feasible: bool,
}

pub const FEAS_TOL: f64 = 1e-8;

pub fn validate(pop: &PopInstance, point: &[f64]) -> Result<FeasibilityReport, PopError> {
    validate_tol(pop, point, FEAS_TOL)
}

pub fn validate_tol(pop: &PopInstance, point: &[f64], tol: f64) -> Result<FeasibilityReport, PopError> {
    let g_values = pop.g.iter().map(|p| p.eval(point)).collect::<Result<Vec<_>, _>>()?;
    let h_values = pop.h.iter().map(|p| p.eval(point)).collect::<Result<Vec<_>, _>>()?;
    let feasible = g_values.iter().all(|&v| v >= -tol) && h_values.iter().all(|&v| v.abs() <= tol);
    Ok(FeasibilityReport { objective: pop.f.eval(point)?, g_values, h_values, feasible })
}
