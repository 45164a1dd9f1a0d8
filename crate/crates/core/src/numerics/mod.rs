//! Matrix-free kernels: smallest eigenpairs of symmetric operators,
//! operator-norm estimates and least squares over the unit simplex.

mod dense;
mod lanczos;
mod simplex_ls;

pub use dense::sym_eig;
pub use lanczos::{smallest_cluster, smallest_eig, smallest_eigs, EigOptions, EigPair, EigResult};
pub use simplex_ls::{product_simplex_ls, project_simplex, simplex_ls, simplex_qp, SimplexLs};

use crate::par::{fill_chunks, Parallelism};

/// A symmetric linear map given by its action. `apply` must be linear and
/// symmetric; it may be called from several threads at once.
pub trait SymOperator {
    fn dim(&self) -> usize;
    /// y ← M x (y arrives zeroed).
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense symmetric matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSym {
    n: usize,
    data: Vec<f64>,
    pub mode: Parallelism,
}

impl DenseSym {
    pub fn zeros(n: usize) -> Self {
        DenseSym { n, data: vec![0.0; n * n], mode: Parallelism::default() }
    }

    /// Symmetrises the input: entry (i,j) becomes ½(a_ij + a_ji).
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = DenseSym::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Adds v at (i,j) and (j,i) (once on the diagonal).
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
        if i != j {
            self.data[j * self.n + i] += v;
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(|c| c.to_vec()).collect()
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Adds s·M.
    pub fn axpy(&mut self, s: f64, m: &DenseSym) {
        for (a, b) in self.data.iter_mut().zip(&m.data) {
            *a += s * b;
        }
    }

    /// Adds s·uuᵀ.
    pub fn rank_one(&mut self, s: f64, u: &[f64]) {
        let n = self.n;
        for i in 0..n {
            let su = s * u[i];
            let row = &mut self.data[i * n..(i + 1) * n];
            for (r, uj) in row.iter_mut().zip(u) {
                *r += su * uj;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

impl SymOperator for DenseSym {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let chunk = (4096 / n.max(1)).max(8);
        let mode = if n >= 128 { self.mode } else { Parallelism::Sequential };
        fill_chunks(mode, y, chunk, |i| dot(&self.data[i * n..(i + 1) * n], x));
    }
}

/// −M.
pub struct Negated<'a>(pub &'a dyn SymOperator);

impl SymOperator for Negated<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Operator given by a closure.
pub struct FnOperator<F: Fn(&[f64], &mut [f64])> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64], &mut [f64])> SymOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// Margin applied to norm estimates so they bound the true value.
pub const NORM_INFLATION: f64 = 1.01;

#[derive(Clone, Copy, Debug)]
pub struct NormEstimate {
    /// √λ_max of the Gram operator.
    pub estimate: f64,
    /// `estimate` inflated by 1%.
    pub upper: f64,
    pub converged: bool,
}

/// ‖A‖ from the Gram operator y ↦ A(Aᵀy), via the largest eigenvalue
/// (Lanczos on the negated operator).
pub fn operator_norm(gram: &dyn SymOperator, tol: f64, seed: u64) -> NormEstimate {
    if gram.dim() == 0 {
        return NormEstimate { estimate: 0.0, upper: 0.0, converged: true };
    }
    let opts = EigOptions { tol: tol * 1e-2, seed, ..EigOptions::default() };
    let r = smallest_eig(&Negated(gram), &opts);
    let lam = (-r.value()).max(0.0);
    let estimate = lam.sqrt();
    NormEstimate { estimate, upper: estimate * NORM_INFLATION, converged: r.converged }
}
