use std::collections::BTreeMap;

use super::{Monomial, PolyError};

/// Sparse real polynomial in n variables, terms kept in graded-lex order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(n);
        p.add_term(Monomial::one(n), c);
        p
    }

    /// The polynomial x_j (0-based).
    pub fn var(n: usize, j: usize) -> Self {
        let mut p = Polynomial::zero(n);
        p.add_term(Monomial::var(n, j), 1.0);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, f64)>>(n: usize, terms: I) -> Self {
        let mut p = Polynomial::zero(n);
        for (m, c) in terms {
            assert_eq!(m.n(), n, "monomial length does not match n");
            p.add_term(m, c);
        }
        p
    }

    /// Σ_{j ∈ vars} w_j x_j².
    pub fn weighted_square_sum(n: usize, vars: &[usize], weights: &[f64]) -> Self {
        let mut p = Polynomial::zero(n);
        for (&j, &w) in vars.iter().zip(weights) {
            p.add_term(Monomial::from_sparse(n, &[(j, 2)]), w);
        }
        p
    }

    /// ‖x‖² over all variables.
    pub fn norm_sq(n: usize) -> Self {
        let vars: Vec<usize> = (0..n).collect();
        Polynomial::weighted_square_sum(n, &vars, &vec![1.0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&Monomial::one(self.n))
    }

    /// Adds `c·m`, dropping the term if it cancels to exactly zero.
    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v == 0.0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    fn check(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.n != other.n {
            return Err(PolyError::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(other)?;
        let mut out = Polynomial::zero(self.n);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.n, 1.0);
        for _ in 0..k {
            out = out.mul(self).expect("same n");
        }
        out
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        if s != 0.0 {
            for (m, c) in self.terms() {
                out.add_term(m.clone(), c * s);
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (a, c) in self.terms() {
            out.add_term(a.mul(m), c);
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.n {
            return Err(PolyError::DimensionMismatch { left: self.n, right: point.len() });
        }
        Ok(self.terms().map(|(m, c)| c * m.eval(point)).sum())
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// ⌈deg(p)/2⌉.
    pub fn half_ceil_degree(&self) -> u32 {
        self.degree().div_ceil(2)
    }

    /// Sorted indices of variables that appear with a non-zero exponent.
    pub fn variables(&self) -> Vec<usize> {
        let mut used = vec![false; self.n];
        for m in self.terms.keys() {
            for (j, _) in m.support() {
                used[j] = true;
            }
        }
        (0..self.n).filter(|&j| used[j]).collect()
    }

    /// Keeps only the terms of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Polynomial {
        Polynomial::from_terms(
            self.n,
            self.terms().filter(|(m, _)| m.degree() == d).map(|(m, c)| (m.clone(), c)),
        )
    }

    /// Restricts to local variables `vars` (global indices, sorted).
    pub fn restrict(&self, vars: &[usize]) -> Option<Polynomial> {
        let mut out = Polynomial::zero(vars.len());
        for (m, c) in self.terms() {
            out.add_term(m.restrict(vars)?, c);
        }
        Some(out)
    }

    /// Lifts a polynomial over local variables `vars` back to n variables.
    pub fn extend(&self, n: usize, vars: &[usize]) -> Polynomial {
        Polynomial::from_terms(n, self.terms().map(|(m, c)| (m.extend(n, vars), c)))
    }

    /// Largest |coefficient difference| against `other`.
    pub fn max_abs_diff(&self, other: &Polynomial) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, c) in self.terms() {
            worst = worst.max((c - other.coeff(m)).abs());
        }
        for (m, c) in other.terms() {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.abs());
            }
        }
        worst
    }
}
