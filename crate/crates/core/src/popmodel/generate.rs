use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{PopError, PopInstance};
use crate::cspattern::CliqueStructure;
use crate::polycore::{build_basis, Monomial, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Ball,
    Annulus,
    Box,
    Simplex,
    BallTs,
    BoxTs,
    CsBall,
    CsBox,
    CstsBall,
    CstsBox,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Ball,
        Family::Annulus,
        Family::Box,
        Family::Simplex,
        Family::BallTs,
        Family::BoxTs,
        Family::CsBall,
        Family::CsBox,
        Family::CstsBall,
        Family::CstsBox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ball => "ball",
            Family::Annulus => "annulus",
            Family::Box => "box",
            Family::Simplex => "simplex",
            Family::BallTs => "ball-ts",
            Family::BoxTs => "box-ts",
            Family::CsBall => "cs-ball",
            Family::CsBox => "cs-box",
            Family::CstsBall => "csts-ball",
            Family::CstsBox => "csts-box",
        }
    }

    pub fn is_sparse(self) -> bool {
        matches!(self, Family::CsBall | Family::CsBox | Family::CstsBall | Family::CstsBox)
    }

    /// Only total-degree-2 terms in f and h (constants of h aside).
    fn quadratic_only(self) -> bool {
        matches!(self, Family::BallTs | Family::BoxTs | Family::CstsBall | Family::CstsBox)
    }

    fn is_box(self) -> bool {
        matches!(self, Family::Box | Family::BoxTs | Family::CsBox | Family::CstsBox)
    }

    /// Number of equality constraints when none is requested explicitly.
    pub fn default_l(self, n: usize) -> usize {
        match self {
            Family::Ball | Family::Annulus | Family::BallTs => n.div_ceil(4),
            _ => n.div_ceil(7),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = PopError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| PopError::InvalidSpec(format!("unknown family '{}'", s)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    /// Number of equality constraints; `None` picks [`Family::default_l`].
    pub l: Option<usize>,
    /// Clique width for the sparse families.
    pub u: Option<usize>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize) -> Self {
        GeneratorSpec { family, n, l: Some(0), u: None, seed: 0 }
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = Some(l);
        self
    }

    pub fn with_u(mut self, u: usize) -> Self {
        self.u = Some(u);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedPop {
    pub pop: PopInstance,
    pub planted: Vec<f64>,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random_range(-1.0..1.0);
        if v != -1.0 {
            return v;
        }
    }
}

/// Random polynomial of degree ≤ 2 in the variables `vars`, coefficients
/// uniform on (−1, 1). The constant term is drawn only when `constant`.
fn random_quadratic(rng: &mut ChaCha8Rng, n: usize, vars: &[usize], quadratic_only: bool, constant: bool) -> Polynomial {
    let basis = build_basis(vars.len(), 2).expect("small basis");
    let mut p = Polynomial::zero(n);
    for m in basis.monomials() {
        let d = m.degree();
        if d == 0 && !constant {
            continue;
        }
        if quadratic_only && d != 2 {
            continue;
        }
        p.add_term(m.extend(n, vars), uniform(rng));
    }
    p
}

/// Uniform point of the d-dimensional ball with radius `r`.
fn ball_point(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    if d == 0 {
        return Vec::new();
    }
    let mut x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rad = r * rng.random::<f64>().powf(1.0 / d as f64);
    for v in &mut x {
        *v *= rad / norm;
    }
    x
}

/// Clique layout of the sparse families: I_1 = [u], I_j = {u(j−1), …, uj},
/// last clique runs to n (1-based in that description, 0-based here).
pub(crate) fn chain_cliques(n: usize, u: usize) -> Vec<Vec<usize>> {
    if n <= u {
        return vec![(0..n).collect()];
    }
    let p = if n.is_multiple_of(u) { n / u } else { n / u + 1 };
    let mut out = vec![(0..u).collect::<Vec<_>>()];
    for j in 2..=p {
        let lo = u * (j - 1) - 1;
        let hi = if j == p { n - 1 } else { u * j - 1 };
        out.push((lo..=hi).collect());
    }
    out
}

pub fn generate(spec: &GeneratorSpec) -> Result<GeneratedPop, PopError> {
    let n = spec.n;
    if n == 0 {
        return Err(PopError::InvalidSpec("n must be positive".into()));
    }
    let fam = spec.family;
    let l = spec.l.unwrap_or_else(|| fam.default_l(n));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let qonly = fam.quadratic_only();
    if fam.is_sparse() {
        let u = spec.u.ok_or_else(|| PopError::InvalidSpec(format!("{} needs a clique width u", fam)))?;
        if u < 2 {
            return Err(PopError::InvalidSpec("clique width u must be at least 2".into()));
        }
        return Ok(generate_sparse(fam, n, l, u, qonly, &mut rng));
    }
    if fam == Family::Simplex && n < 1 {
        return Err(PopError::InvalidSpec("simplex needs n ≥ 1".into()));
    }
    let all: Vec<usize> = (0..n).collect();
    let f = random_quadratic(&mut rng, n, &all, qonly, !qonly);
    let nsq = Polynomial::norm_sq(n);
    let one = Polynomial::constant(n, 1.0);
    let (g, planted) = match fam {
        Family::Ball | Family::BallTs => (vec![one.sub(&nsq)?], ball_point(&mut rng, n, 1.0)),
        Family::Annulus => {
            let g1 = nsq.sub(&Polynomial::constant(n, 0.5))?;
            let g2 = one.sub(&nsq)?;
            let a = loop {
                let x = ball_point(&mut rng, n, 1.0);
                if x.iter().map(|v| v * v).sum::<f64>() >= 0.5 {
                    break x;
                }
            };
            (vec![g1, g2], a)
        }
        Family::Box | Family::BoxTs => {
            let c = 1.0 / n as f64;
            let g = (0..n)
                .map(|j| {
                    let mut p = Polynomial::constant(n, c);
                    p.add_term(Monomial::from_sparse(n, &[(j, 2)]), -1.0);
                    p
                })
                .collect();
            let half = c.sqrt();
            let a = (0..n).map(|_| half * uniform(&mut rng)).collect();
            (g, a)
        }
        Family::Simplex => {
            let mut g: Vec<Polynomial> = (0..n).map(|j| Polynomial::var(n, j)).collect();
            let mut s = one.clone();
            for j in 0..n {
                s.add_term(Monomial::var(n, j), -1.0);
            }
            g.push(s);
            g.push(one.sub(&nsq)?);
            // n+1 exponential spacings normalised to sum one, last one dropped
            let e: Vec<f64> = (0..=n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let tot: f64 = e.iter().sum();
            (g, e[..n].iter().map(|v| v / tot).collect())
        }
        _ => unreachable!(),
    };
    let h = (0..l).map(|_| planted_equality(&mut rng, n, &all, qonly, &planted)).collect();
    let pop = PopInstance::new(f, g, h)?;
    Ok(GeneratedPop { pop, planted })
}

/// Random h with zero constant, then h_0 := −Σ h_α a^α so that h(a) = 0.
fn planted_equality(rng: &mut ChaCha8Rng, n: usize, vars: &[usize], qonly: bool, a: &[f64]) -> Polynomial {
    let mut h = random_quadratic(rng, n, vars, qonly, false);
    let v = h.eval(a).expect("arity");
    h.add_term(Monomial::one(n), -v);
    h
}

fn generate_sparse(fam: Family, n: usize, l: usize, u: usize, qonly: bool, rng: &mut ChaCha8Rng) -> GeneratedPop {
    let cliques = chain_cliques(n, u);
    let p = cliques.len();
    let mut f = Polynomial::zero(n);
    for c in &cliques {
        f = f.add(&random_quadratic(rng, n, c, qonly, !qonly)).expect("same n");
    }
    let mut g = Vec::new();
    let mut ineq = vec![Vec::new(); p];
    let mut planted = vec![0.0; n];
    if fam.is_box() {
        // every clique bounds all of its own variables, shared ones twice
        let c = 1.0 / u as f64;
        for (j, cl) in cliques.iter().enumerate() {
            for &v in cl {
                let mut q = Polynomial::constant(n, c);
                q.add_term(Monomial::from_sparse(n, &[(v, 2)]), -1.0);
                ineq[j].push(g.len());
                g.push(q);
            }
        }
        for x in planted.iter_mut() {
            *x = c.sqrt() * uniform(rng);
        }
    } else {
        let mut assigned = vec![false; n];
        for (j, cl) in cliques.iter().enumerate() {
            let mut q = Polynomial::constant(n, 1.0);
            for &v in cl {
                q.add_term(Monomial::from_sparse(n, &[(v, 2)]), -1.0);
            }
            ineq[j].push(g.len());
            g.push(q);
            let used: f64 = cl.iter().filter(|&&v| assigned[v]).map(|&v| planted[v] * planted[v]).sum();
            let free: Vec<usize> = cl.iter().copied().filter(|&v| !assigned[v]).collect();
            let pt = ball_point(rng, free.len(), (1.0 - used).max(0.0).sqrt());
            for (&v, x) in free.iter().zip(pt) {
                planted[v] = x;
                assigned[v] = true;
            }
        }
    }
    let r = l / p;
    let mut h = Vec::with_capacity(l);
    let mut eq = vec![Vec::new(); p];
    for (j, cl) in cliques.iter().enumerate() {
        let count = if j + 1 == p { l - r * (p - 1) } else { r };
        for _ in 0..count {
            eq[j].push(h.len());
            h.push(planted_equality(rng, n, cl, qonly, &planted));
        }
    }
    let mut pop = PopInstance::new(f, g, h).expect("consistent arity");
    pop.cliques = Some(CliqueStructure { cliques, ineq, eq });
    GeneratedPop { pop, planted }
}
