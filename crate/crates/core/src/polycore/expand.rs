use super::{Monomial, Polynomial};

/// 1 + Σ_j u_j x_j², the weighted squared norm shifted by one.
fn one_plus_weighted(u: &[f64]) -> Polynomial {
    let n = u.len();
    let mut p = Polynomial::constant(n, 1.0);
    for (j, &w) in u.iter().enumerate() {
        p.add_term(Monomial::from_sparse(n, &[(j, 2)]), w);
    }
    p
}

/// (1 + Σ_j u_j x_j²)^k. Its support is exactly {2α : |α| ≤ k}.
///
/// The weight multiplies x_j² directly: with u_j counting how many
/// constraint groups contain x_j, this is Σ_i ‖x(T_i)‖².
pub fn expand_one_plus_weighted_norm_pow(u: &[f64], k: u32) -> Polynomial {
    one_plus_weighted(u).pow(k)
}

/// Λ_{k−1} = Σ_{j=0}^{k−1} (R+1)^j (1 + Σ u_i x_i²)^{k−1−j}.
pub fn expand_lambda_series(u: &[f64], r: f64, k: u32) -> Polynomial {
    let n = u.len();
    let base = one_plus_weighted(u);
    let mut out = Polynomial::zero(n);
    let mut pw = Polynomial::constant(n, 1.0);
    for i in 0..k {
        // term with (1+‖x‖²)^i carries (R+1)^{k−1−i}
        let w = (r + 1.0).powi((k - 1 - i) as i32);
        out = out.add(&pw.scale(w)).expect("same n");
        if i + 1 < k {
            pw = pw.mul(&base).expect("same n");
        }
    }
    out
}

/// Coefficient of x^{2α} in `p` for each α of `basis`-like list; used to read
/// θ and λ weights off the square-monomial expansions.
pub fn square_coefficients(p: &Polynomial, alphas: &[Monomial]) -> Vec<f64> {
    alphas.iter().map(|a| p.coeff(&a.doubled())).collect()
}
