use std::collections::BTreeMap;
use std::ops::Range;

use super::lp::{Bound, LinearProgram};
use super::CertError;
use crate::polycore::{build_basis, Monomial, MonomialBasis, Polynomial};

/// LP whose feasible points are identities
/// ξ = v_kᵀG₀v_k + Σ g_i v_{k−⌈g_i⌉}ᵀG_i v_{k−⌈g_i⌉} + Σ h_j v_{2(k−⌈h_j⌉)}ᵀu_j
/// with diagonal G ⪰ I. Column 0 is ξ; then the diagonals of G₀, G_1, …;
/// then the u_j coefficient vectors. Rows are monomials, graded-lex sorted.
#[derive(Clone, Debug)]
pub struct CtpLp {
    pub n: usize,
    pub k: usize,
    pub lp: LinearProgram,
    /// Row monomials.
    pub rows: Vec<Monomial>,
    /// Column ranges of G₀ (index 0) and each G_i.
    pub gram_cols: Vec<Range<usize>>,
    /// Column ranges of each u_j.
    pub ideal_cols: Vec<Range<usize>>,
    /// Bases indexing each Gram diagonal (orders k, k−⌈g_i⌉).
    pub gram_bases: Vec<MonomialBasis>,
    /// Bases indexing each u_j (orders 2(k−⌈h_j⌉)).
    pub ideal_bases: Vec<MonomialBasis>,
}

impl CtpLp {
    pub fn ncols(&self) -> usize {
        self.lp.ncols()
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }
}

/// Builds the certification LP for constraints `g`, `h` in `n` variables.
pub fn build_ctp_lp_parts(n: usize, g: &[Polynomial], h: &[Polynomial], k: usize) -> Result<CtpLp, CertError> {
    let order = |p: &Polynomial| p.half_ceil_degree() as usize;
    let kmin = g.iter().chain(h).map(order).max().unwrap_or(1).max(1);
    if k < kmin {
        return Err(CertError::Order { k, kmin });
    }
    let mut gram_bases = vec![build_basis(n, k)?];
    for gi in g {
        gram_bases.push(build_basis(n, k - order(gi))?);
    }
    let ideal_bases: Vec<MonomialBasis> =
        h.iter().map(|hj| build_basis(n, 2 * (k - order(hj)))).collect::<Result<_, _>>()?;

    // column entries keyed by monomial first, rows numbered afterwards
    let mut cols: Vec<Vec<(Monomial, f64)>> = Vec::new();
    cols.push(vec![(Monomial::one(n), -1.0)]);
    let mut gram_cols = Vec::new();
    for (b, basis) in gram_bases.iter().enumerate() {
        let start = cols.len();
        for alpha in basis.monomials() {
            let sq = alpha.doubled();
            if b == 0 {
                cols.push(vec![(sq, 1.0)]);
            } else {
                cols.push(g[b - 1].terms().map(|(gm, c)| (gm.mul(&sq), c)).collect());
            }
        }
        gram_cols.push(start..cols.len());
    }
    let mut ideal_cols = Vec::new();
    for (j, basis) in ideal_bases.iter().enumerate() {
        let start = cols.len();
        for alpha in basis.monomials() {
            cols.push(h[j].terms().map(|(hm, c)| (hm.mul(alpha), c)).collect());
        }
        ideal_cols.push(start..cols.len());
    }
    let mut row_index: BTreeMap<Monomial, usize> = BTreeMap::new();
    for c in &cols {
        for (m, _) in c {
            row_index.entry(m.clone()).or_insert(0);
        }
    }
    for (i, v) in row_index.values_mut().enumerate() {
        *v = i;
    }
    let rows: Vec<Monomial> = row_index.keys().cloned().collect();
    let mut lp = LinearProgram::new(rows.len());
    let n_gram_end = gram_cols.last().map(|r| r.end).unwrap_or(1);
    for (ci, c) in cols.into_iter().enumerate() {
        let entries = c.into_iter().map(|(m, v)| (row_index[&m], v)).collect();
        let (cost, bound) = if ci == 0 {
            (1.0, Bound::Free)
        } else if ci < n_gram_end {
            (0.0, Bound::Lower(1.0))
        } else {
            (0.0, Bound::Free)
        };
        lp.add_column(entries, cost, bound);
    }
    // ξ column was entered with −1 on the constant row, so the row reads
    // Σ(contributions) − ξ = 0 and minimising ξ is a plain cost of +1.
    Ok(CtpLp { n, k, lp, rows, gram_cols, ideal_cols, gram_bases, ideal_bases })
}
