use super::{PopError, PopInstance};
use crate::polycore::Polynomial;

/// Output of [`reformulate_equivalent_degree`].
#[derive(Clone, Debug)]
pub struct Reformulation {
    /// g ∪ {L − Σ g̃_i, R − ‖x‖²}; f and h unchanged.
    pub pop: PopInstance,
    /// g̃_i = g_i (1+‖x‖²)^{u−⌈g_i⌉}, all of half-degree u.
    pub homogenized: Vec<Polynomial>,
    pub u: usize,
    /// L = (R+1)^u Σ ‖g_i‖₁.
    pub l_const: f64,
    pub radius_sq: f64,
}

/// Appends the two redundant constraints that give the POP an
/// LP-certifiable constant trace. The caller asserts S(g) lies in the ball
/// ‖x‖² ≤ R.
pub fn reformulate_equivalent_degree(pop: &PopInstance, r: f64) -> Result<Reformulation, PopError> {
    if !(r > 0.0) {
        return Err(PopError::InvalidSpec(format!("radius bound R must be positive, got {}", r)));
    }
    let n = pop.n;
    let ball = Polynomial::constant(n, r).sub(&Polynomial::norm_sq(n))?;
    let mut out = pop.clone();
    out.cliques = None;
    if pop.g.is_empty() {
        out.g.push(ball);
        return Ok(Reformulation { pop: out, homogenized: Vec::new(), u: 1, l_const: 0.0, radius_sq: r });
    }
    let u = pop.g.iter().map(|g| g.half_ceil_degree()).max().unwrap_or(1).max(1);
    let base = Polynomial::constant(n, 1.0).add(&Polynomial::norm_sq(n))?;
    let homogenized: Vec<Polynomial> = pop
        .g
        .iter()
        .map(|g| g.mul(&base.pow(u - g.half_ceil_degree())))
        .collect::<Result<_, _>>()?;
    let l_const = (r + 1.0).powi(u as i32) * pop.g.iter().map(|g| g.l1_norm()).sum::<f64>();
    let mut slack = Polynomial::constant(n, l_const);
    for gt in &homogenized {
        slack = slack.sub(gt)?;
    }
    out.g.push(slack);
    out.g.push(ball);
    Ok(Reformulation { pop: out, homogenized, u: u as usize, l_const, radius_sq: r })
}
