//! Certificates read off square-monomial expansions, without an LP.
//!
//! Two structures are recognised on a group's constraints (in local
//! variables):
//! * balls and annuli on variable subsets: every g_i is c − ‖x(T)‖² or
//!   ‖x(T)‖² − c, lower bounds paired with an upper bound on the same T,
//!   and the T cover all variables;
//! * equivalent degree: the last constraint is R − ‖x‖², and the one before
//!   it closes Σ g_i (1+‖x‖²)^{u−⌈g_i⌉} to a positive constant L.

use super::CertError;
use crate::polycore::{
    build_basis, expand_lambda_series, expand_one_plus_weighted_norm_pow, square_coefficients, Polynomial,
};

/// Scaling blocks and trace constant for one group, or `None` if neither
/// structure matches.
pub(crate) struct ClosedForm {
    pub trace: f64,
    pub gram: Vec<Vec<f64>>,
}

/// `Some((vars, c, sign))` when p = c + sign·Σ_{j∈vars} x_j².
fn square_sum_shape(p: &Polynomial) -> Option<(Vec<usize>, f64, f64)> {
    let mut vars = Vec::new();
    let mut sign = 0.0;
    for (m, c) in p.terms() {
        if m.is_constant() {
            continue;
        }
        let s = m.support();
        if s.len() != 1 || s[0].1 != 2 || c.abs() != 1.0 {
            return None;
        }
        if sign == 0.0 {
            sign = c;
        } else if sign != c {
            return None;
        }
        vars.push(s[0].0);
    }
    if vars.is_empty() {
        return None;
    }
    Some((vars, p.constant_term(), sign))
}

fn ball_annulus(n: usize, g: &[Polynomial], k: u32) -> Option<ClosedForm> {
    let shapes: Vec<_> = g.iter().map(square_sum_shape).collect::<Option<_>>()?;
    let mut delta = vec![0.0; g.len()];
    let mut weights = vec![0.0; n];
    let mut r_total = 0.0;
    let mut paired = vec![false; g.len()];
    for (i, (vars, c, sign)) in shapes.iter().enumerate() {
        if *sign < 0.0 {
            if !(*c > 0.0) {
                return None;
            }
            continue;
        }
        // lower bound ‖x(T)‖² ≥ −c: find an unpaired upper bound on the same T
        let lo = -c;
        if !(lo > 0.0) {
            return None;
        }
        let partner = shapes
            .iter()
            .enumerate()
            .position(|(q, (v2, c2, s2))| !paired[q] && *s2 < 0.0 && v2 == vars && *c2 > lo)?;
        paired[partner] = true;
        paired[i] = true;
        let hi = shapes[partner].1;
        delta[i] = lo / (hi - lo);
        delta[partner] = hi / (hi - lo);
        r_total += lo;
    }
    for (i, (vars, c, sign)) in shapes.iter().enumerate() {
        if *sign < 0.0 {
            r_total += c;
            if !paired[i] {
                delta[i] = 1.0;
            }
            for &v in vars {
                weights[v] += 1.0;
            }
        }
    }
    if weights.contains(&0.0) {
        return None;
    }
    let theta = expand_one_plus_weighted_norm_pow(&weights, k);
    let lambda = expand_lambda_series(&weights, r_total, k);
    let mut gram = vec![square_coefficients(&theta, build_basis(n, k as usize).ok()?.monomials())];
    let b1 = build_basis(n, k as usize - 1).ok()?;
    let eta = square_coefficients(&lambda, b1.monomials());
    for d in &delta {
        gram.push(eta.iter().map(|e| d * e).collect());
    }
    Some(ClosedForm { trace: (r_total + 1.0).powi(k as i32), gram })
}

fn equivalent_degree(n: usize, g: &[Polynomial], k: u32) -> Option<ClosedForm> {
    let m = g.len();
    if m < 2 {
        return None;
    }
    let (vars, r, sign) = square_sum_shape(&g[m - 1])?;
    if sign > 0.0 || !(r > 0.0) || vars.len() != n {
        return None;
    }
    let slack = &g[m - 2];
    let u = g[..m - 2].iter().map(|p| p.half_ceil_degree()).max().unwrap_or(0).max(slack.half_ceil_degree());
    if u == 0 || slack.half_ceil_degree() != u || k < u {
        return None;
    }
    let base = Polynomial::constant(n, 1.0).add(&Polynomial::norm_sq(n)).ok()?;
    let mut total = slack.clone();
    for p in &g[..m - 2] {
        total = total.add(&p.mul(&base.pow(u - p.half_ceil_degree())).ok()?).ok()?;
    }
    let l = total.constant_term();
    let scale = 1.0 + total.max_abs_coeff();
    if !(l > 0.0) || total.terms().any(|(mm, c)| !mm.is_constant() && c.abs() > 1e-12 * scale) {
        return None;
    }
    let ones = vec![1.0; n];
    let theta = |t: u32| expand_one_plus_weighted_norm_pow(&ones, t);
    let g0 = theta(k).sub(&theta(k - u).scale(l / (l + 1.0))).ok()?;
    let mut gram = vec![square_coefficients(&g0, build_basis(n, k as usize).ok()?.monomials())];
    for p in &g[..m - 1] {
        let d = k - p.half_ceil_degree();
        let sigma = theta(d).scale(1.0 / (l + 1.0));
        gram.push(square_coefficients(&sigma, build_basis(n, d as usize).ok()?.monomials()));
    }
    let lambda = expand_lambda_series(&ones, r, k);
    gram.push(square_coefficients(&lambda, build_basis(n, k as usize - 1).ok()?.monomials()));
    Some(ClosedForm { trace: (r + 1.0).powi(k as i32), gram })
}

/// Tries both structures on constraints `g` (local variables).
pub(crate) fn closed_form_parts(n: usize, g: &[Polynomial], k: usize) -> Result<ClosedForm, CertError> {
    if k == 0 {
        return Err(CertError::Order { k, kmin: 1 });
    }
    let k = k as u32;
    let cf = ball_annulus(n, g, k)
        .or_else(|| equivalent_degree(n, g, k))
        .ok_or(CertError::NotApplicable)?;
    if cf.gram.iter().flatten().any(|v| !(*v > 0.0)) {
        return Err(CertError::NotApplicable);
    }
    Ok(cf)
}
