use std::collections::HashMap;

use super::{Monomial, PolyError};

/// Number of monomials of degree at most `d` in `n` variables, C(n+d, n).
pub fn basis_size(n: usize, d: usize) -> Result<usize, PolyError> {
    if n == 0 {
        return Err(PolyError::SizeOverflow { n, d });
    }
    // C(n+d, d) built incrementally; every partial product is itself a binomial.
    let mut acc: u128 = 1;
    for i in 1..=d as u128 {
        acc = acc
            .checked_mul(n as u128 + i)
            .ok_or(PolyError::SizeOverflow { n, d })?
            / i;
    }
    usize::try_from(acc).map_err(|_| PolyError::SizeOverflow { n, d })
}

/// All exponent vectors α with |α| ≤ d, graded-lex sorted, with inverse lookup.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    n: usize,
    d: usize,
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

/// Largest basis we are willing to materialise.
const MAX_BASIS: usize = 10_000_000;

pub fn build_basis(n: usize, d: usize) -> Result<MonomialBasis, PolyError> {
    let size = basis_size(n, d)?;
    if size > MAX_BASIS {
        return Err(PolyError::SizeOverflow { n, d });
    }
    let mut monos = Vec::with_capacity(size);
    let mut buf = vec![0u32; n];
    for deg in 0..=d as u32 {
        fill(&mut buf, 0, deg, &mut monos);
    }
    let index = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    Ok(MonomialBasis { n, d, monos, index })
}

fn fill(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Monomial>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(Monomial::new(buf.to_vec()));
        buf[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        buf[pos] = e;
        fill(buf, pos + 1, remaining - e, out);
    }
    buf[pos] = 0;
}

impl MonomialBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monos
    }

    pub fn get(&self, i: usize) -> &Monomial {
        &self.monos[i]
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// v_d(z): all basis monomials evaluated at `z`.
    pub fn eval_all(&self, z: &[f64]) -> Vec<f64> {
        self.monos.iter().map(|m| m.eval(z)).collect()
    }
}
