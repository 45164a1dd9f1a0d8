use super::dense::sym_eig;
use super::dot;

/// Result of [`simplex_ls`].
#[derive(Clone, Debug)]
pub struct SimplexLs {
    /// Weights on the unit simplex.
    pub weights: Vec<f64>,
    /// ½‖b − Σ ξ_j d_j‖².
    pub objective: f64,
    /// Largest KKT violation of the returned weights.
    pub kkt_residual: f64,
}

/// Euclidean projection onto {ξ ≥ 0, Σξ = 1} (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

#[derive(Clone)]
struct Quad {
    g: Vec<Vec<f64>>,
    c: Vec<f64>,
    b2: f64,
}

impl Quad {
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.g.iter().zip(&self.c).map(|(row, ci)| dot(row, x) - ci).collect()
    }

    fn raw_value(&self, x: &[f64]) -> f64 {
        let gx: Vec<f64> = self.g.iter().map(|row| dot(row, x)).collect();
        0.5 * dot(x, &gx) - dot(&self.c, x) + 0.5 * self.b2
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.b2 > 0.0 {
            self.raw_value(x).max(0.0)
        } else {
            self.raw_value(x)
        }
    }

    /// max over j of the KKT violation with multiplier μ = ξᵀ∇.
    fn kkt(&self, x: &[f64]) -> f64 {
        let gr = self.grad(x);
        let mu = dot(x, &gr);
        gr.iter()
            .zip(x)
            .map(|(&gj, &xj)| if xj > 0.0 { (gj - mu).abs() } else { (mu - gj).max(0.0) })
            .fold(0.0, f64::max)
    }
}

/// Minimiser of the quadratic on the affine hull of `support`, by
/// pseudo-inverse of the bordered KKT matrix (G may be singular).
fn affine_min(q: &Quad, support: &[usize], r: usize) -> Vec<f64> {
    let s = support.len();
    let mut k = vec![vec![0.0; s + 1]; s + 1];
    let mut rhs = vec![0.0; s + 1];
    for (a, &i) in support.iter().enumerate() {
        for (bb, &j) in support.iter().enumerate() {
            k[a][bb] = q.g[i][j];
        }
        k[a][s] = 1.0;
        k[s][a] = 1.0;
        rhs[a] = q.c[i];
    }
    rhs[s] = 1.0;
    let (vals, vecs) = sym_eig(&k);
    let big = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut sol = vec![0.0; s + 1];
    for (j, &lam) in vals.iter().enumerate() {
        if lam.abs() <= 1e-13 * big {
            continue;
        }
        let proj: f64 = (0..=s).map(|i| vecs[i][j] * rhs[i]).sum::<f64>() / lam;
        for i in 0..=s {
            sol[i] += proj * vecs[i][j];
        }
    }
    let mut x = vec![0.0; r];
    for (a, &i) in support.iter().enumerate() {
        x[i] = sol[a];
    }
    x
}

/// min ½‖b − Σ ξ_j d_j‖² over the unit simplex. Accelerated projected
/// gradient in Gram form, then a primal active-set refinement so that the
/// KKT conditions hold to rounding.
pub fn simplex_ls(d: &[Vec<f64>], b: &[f64]) -> SimplexLs {
    assert!(!d.is_empty(), "simplex_ls needs at least one vector");
    let q = Quad {
        g: d.iter().map(|di| d.iter().map(|dj| dot(di, dj)).collect()).collect(),
        c: d.iter().map(|di| dot(di, b)).collect(),
        b2: dot(b, b),
    };
    solve_quad(q)
}

/// min ½ξᵀGξ + eᵀξ over the unit simplex (G positive semidefinite). The
/// reported objective is that value.
pub fn simplex_qp(g: &[Vec<f64>], e: &[f64]) -> SimplexLs {
    assert!(!e.is_empty(), "simplex_qp needs at least one variable");
    let q = Quad { g: g.to_vec(), c: e.iter().map(|v| -v).collect(), b2: 0.0 };
    let mut out = solve_quad(q.clone());
    out.objective = q.raw_value(&out.weights);
    out
}

fn solve_quad(q: Quad) -> SimplexLs {
    let r = q.c.len();
    if r == 1 {
        return SimplexLs { weights: vec![1.0], objective: q.value(&[1.0]), kkt_residual: 0.0 };
    }
    let lip = sym_eig(&q.g).0.last().copied().unwrap_or(0.0).max(1e-300);
    let mut x = vec![1.0 / r as f64; r];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let scale = 1.0 + q.c.iter().fold(0.0f64, |m, v| m.max(v.abs())) + lip;
    for _ in 0..5000 {
        let gr = q.grad(&y);
        let xn = project_simplex(&y.iter().zip(&gr).map(|(yi, gi)| yi - gi / lip).collect::<Vec<_>>());
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / tn;
        y = xn.iter().zip(&x).map(|(a, b)| a + mom * (a - b)).collect();
        let step = xn.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = xn;
        t = tn;
        if step <= 1e-15 && q.kkt(&x) <= 1e-12 * scale {
            break;
        }
    }

    // active-set refinement from the accelerated iterate
    let tol = 1e-13 * scale;
    let mut support: Vec<usize> = (0..r).filter(|&j| x[j] > 1e-12).collect();
    if support.is_empty() {
        support.push(0);
        x = vec![0.0; r];
        x[0] = 1.0;
    }
    let mut best = x.clone();
    for _ in 0..(10 * r + 10) {
        let target = affine_min(&q, &support, r);
        let neg = support.iter().any(|&j| target[j] < 0.0);
        if neg {
            // move from x towards target until a weight hits zero
            let mut step = 1.0f64;
            let mut hit = support[0];
            for &j in &support {
                if target[j] < 0.0 && x[j] - target[j] > 0.0 {
                    let s = x[j] / (x[j] - target[j]);
                    if s < step {
                        step = s;
                        hit = j;
                    }
                }
            }
            for j in 0..r {
                x[j] += step * (target[j] - x[j]);
            }
            x[hit] = 0.0;
            support.retain(|&j| j != hit && x[j] > 0.0);
            if support.is_empty() {
                break;
            }
            continue;
        }
        x = target;
        let gr = q.grad(&x);
        let mu = dot(&x, &gr);
        let enter = (0..r)
            .filter(|j| !support.contains(j))
            .min_by(|&a, &b| gr[a].total_cmp(&gr[b]))
            .filter(|&j| gr[j] < mu - tol);
        match enter {
            Some(j) => {
                support.push(j);
                support.sort_unstable();
            }
            None => break,
        }
    }
    let mut xs: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let sum: f64 = xs.iter().sum();
    if sum > 0.0 {
        xs.iter_mut().for_each(|v| *v /= sum);
    }
    if q.value(&xs) <= q.value(&best) {
        best = xs;
    }
    SimplexLs { objective: q.value(&best), kkt_residual: q.kkt(&best), weights: best }
}

/// min ½‖b − Σ ξ_j d_j‖² where the weights of each group (given per column)
/// lie on their own unit simplex. One group reduces to [`simplex_ls`];
/// otherwise accelerated projected gradient is used.
pub fn product_simplex_ls(d: &[Vec<f64>], b: &[f64], group_of: &[usize]) -> SimplexLs {
    assert_eq!(d.len(), group_of.len());
    let ngroups = group_of.iter().map(|g| g + 1).max().unwrap_or(0);
    if ngroups <= 1 {
        return simplex_ls(d, b);
    }
    let r = d.len();
    let q = Quad {
        g: d.iter().map(|di| d.iter().map(|dj| dot(di, dj)).collect()).collect(),
        c: d.iter().map(|di| dot(di, b)).collect(),
        b2: dot(b, b),
    };
    let members: Vec<Vec<usize>> = (0..ngroups).map(|k| (0..r).filter(|&j| group_of[j] == k).collect()).collect();
    let project = |v: &[f64]| {
        let mut out = vec![0.0; r];
        for m in &members {
            if m.is_empty() {
                continue;
            }
            let p = project_simplex(&m.iter().map(|&j| v[j]).collect::<Vec<_>>());
            for (&j, pj) in m.iter().zip(p) {
                out[j] = pj;
            }
        }
        out
    };
    let lip = sym_eig(&q.g).0.last().copied().unwrap_or(0.0).max(1e-300);
    let mut x = project(&vec![0.0; r]);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..20000 {
        let gr = q.grad(&y);
        let xn = project(&y.iter().zip(&gr).map(|(yi, gi)| yi - gi / lip).collect::<Vec<_>>());
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / tn;
        y = xn.iter().zip(&x).map(|(a, b)| a + mom * (a - b)).collect();
        let step = xn.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = xn;
        t = tn;
        if step <= 1e-15 {
            break;
        }
    }
    // KKT per group
    let gr = q.grad(&x);
    let mut kkt = 0.0f64;
    for m in &members {
        let mu: f64 = m.iter().map(|&j| x[j] * gr[j]).sum();
        for &j in m {
            let v = if x[j] > 0.0 { (gr[j] - mu).abs() } else { (mu - gr[j]).max(0.0) };
            kkt = kkt.max(v);
        }
    }
    SimplexLs { objective: q.value(&x), kkt_residual: kkt, weights: x }
}
