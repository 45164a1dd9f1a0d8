use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dense::sym_eig;
use super::{dot, norm, SymOperator};

/// Controls for [`smallest_eigs`].
#[derive(Clone, Debug)]
pub struct EigOptions {
    /// Converged when ‖Mu − λu‖ ≤ tol·(1+|λ|) for every requested pair.
    pub tol: f64,
    /// Budget of operator applications.
    pub max_matvecs: usize,
    /// Seed of the random start vectors.
    pub seed: u64,
    /// Subspace size at which the basis is restarted.
    pub krylov_dim: usize,
    /// Vectors added per expansion step.
    pub block: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions { tol: 1e-9, max_matvecs: 20_000, seed: 0, krylov_dim: 40, block: 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigPair {
    pub value: f64,
    /// Unit vector, largest-magnitude entry positive.
    pub vector: Vec<f64>,
    /// ‖Mu − λu‖.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct EigResult {
    /// Ascending by value.
    pub pairs: Vec<EigPair>,
    pub converged: bool,
    pub matvecs: usize,
}

impl EigResult {
    pub fn value(&self) -> f64 {
        self.pairs[0].value
    }

    pub fn vector(&self) -> &[f64] {
        &self.pairs[0].vector
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Orthogonalises the candidates against `basis` (two Gram-Schmidt passes)
/// and appends the ones that keep a meaningful component.
fn append_orthonormal(basis: &mut Vec<Vec<f64>>, cands: Vec<Vec<f64>>) -> usize {
    let mut added = 0;
    for mut w in cands {
        let before = norm(&w);
        if before == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in basis.iter() {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let after = norm(&w);
        if after <= 1e-10 * before {
            continue;
        }
        for wi in w.iter_mut() {
            *wi /= after;
        }
        basis.push(w);
        added += 1;
    }
    added
}

fn fix_sign(v: &mut [f64]) {
    let mut big = 0.0;
    let mut sgn = 1.0;
    for &x in v.iter() {
        if x.abs() > big {
            big = x.abs();
            sgn = x.signum();
        }
    }
    if sgn < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

struct Ritz {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

fn combine(basis: &[Vec<f64>], coeffs: &[Vec<f64>], j: usize, n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (i, b) in basis.iter().enumerate() {
        let c = coeffs[i][j];
        if c != 0.0 {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += c * bi;
            }
        }
    }
    x
}

fn rayleigh_ritz(basis: &[Vec<f64>], images: &[Vec<f64>], take: usize, n: usize) -> Ritz {
    let m = basis.len();
    let mut h = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    let (vals, y) = sym_eig(&h);
    let take = take.min(m);
    let mut r = Ritz { values: vals[..take].to_vec(), vectors: vec![], images: vec![], residuals: vec![] };
    for j in 0..take {
        let x = combine(basis, &y, j, n);
        let mx = combine(images, &y, j, n);
        let res = mx.iter().zip(&x).map(|(a, b)| (a - vals[j] * b).powi(2)).sum::<f64>().sqrt();
        r.vectors.push(x);
        r.images.push(mx);
        r.residuals.push(res);
    }
    r
}

/// The `count` smallest eigenpairs by block Lanczos with full
/// reorthogonalisation and thick restarts. `start` vectors (e.g. the
/// previous solution of a slowly changing operator) seed the first block.
pub fn smallest_eigs(op: &dyn SymOperator, count: usize, opts: &EigOptions, start: &[Vec<f64>]) -> EigResult {
    let n = op.dim();
    assert!(n >= 1, "operator of dimension 0");
    let count = count.clamp(1, n);
    let s = opts.block.max(1).min(n);
    let maxdim = opts.krylov_dim.max(count + 2 * s + 2).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut matvecs = 0;
    let apply = |x: &[f64], matvecs: &mut usize| {
        let mut y = vec![0.0; n];
        op.apply(x, &mut y);
        *matvecs += 1;
        y
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(maxdim + s);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(maxdim + s);
    let mut first: Vec<Vec<f64>> = start.iter().filter(|v| v.len() == n).take(s).cloned().collect();
    while first.len() < s {
        first.push(random_vec(&mut rng, n));
    }
    append_orthonormal(&mut basis, first);
    while basis.is_empty() {
        append_orthonormal(&mut basis, vec![random_vec(&mut rng, n)]);
    }
    for b in &basis {
        images.push(apply(b, &mut matvecs));
    }
    let mut last = 0..basis.len();
    let mut steps = 0usize;
    loop {
        let full = basis.len() >= maxdim;
        steps += 1;
        if full || (basis.len() >= count && steps.is_multiple_of(3)) || matvecs >= opts.max_matvecs {
            let keep = if full { (maxdim / 2).max(count + s).min(basis.len()) } else { count };
            let ritz = rayleigh_ritz(&basis, &images, keep, n);
            let ok = (0..count).all(|j| ritz.residuals[j] <= opts.tol * (1.0 + ritz.values[j].abs()));
            let exhausted = matvecs >= opts.max_matvecs;
            if ok || exhausted || basis.len() == n {
                let pairs = (0..count)
                    .map(|j| {
                        let mut v = ritz.vectors[j].clone();
                        fix_sign(&mut v);
                        EigPair { value: ritz.values[j], vector: v, residual: ritz.residuals[j] }
                    })
                    .collect();
                return EigResult { pairs, converged: ok, matvecs };
            }
            if full {
                // thick restart: keep the wanted Ritz vectors, continue from
                // the residual directions of the leading ones
                let residual_block: Vec<Vec<f64>> = (0..s.min(keep))
                    .map(|j| ritz.images[j].iter().zip(&ritz.vectors[j]).map(|(a, b)| a - ritz.values[j] * b).collect())
                    .collect();
                // Ritz vectors of an orthonormal basis are orthonormal
                basis = ritz.vectors;
                images = ritz.images;
                let at = basis.len();
                append_orthonormal(&mut basis, residual_block);
                for b in &basis[at..] {
                    images.push(apply(b, &mut matvecs));
                }
                last = at..basis.len();
                if last.is_empty() {
                    let at = basis.len();
                    append_orthonormal(&mut basis, vec![random_vec(&mut rng, n)]);
                    for b in &basis[at..] {
                        images.push(apply(b, &mut matvecs));
                    }
                    last = at..basis.len();
                }
                continue;
            }
        }
        let cands: Vec<Vec<f64>> = images[last.clone()].to_vec();
        let at = basis.len();
        let room = maxdim + s - at;
        let mut cands = cands;
        cands.truncate(room.max(1));
        append_orthonormal(&mut basis, cands);
        if basis.len() == at && at < n {
            // invariant subspace reached: restart the search elsewhere
            append_orthonormal(&mut basis, vec![random_vec(&mut rng, n)]);
        }
        for b in &basis[at..] {
            images.push(apply(b, &mut matvecs));
        }
        last = at..basis.len();
    }
}

pub fn smallest_eig(op: &dyn SymOperator, opts: &EigOptions) -> EigResult {
    smallest_eigs(op, 1, opts, &[])
}

/// All eigenpairs within `rel·(1+|λ_min|)` of λ_min, at most `cap`. The
/// search widens (block size 4) while the last computed value is still in
/// the cluster.
pub fn smallest_cluster(op: &dyn SymOperator, opts: &EigOptions, rel: f64, cap: usize, start: &[Vec<f64>]) -> EigResult {
    let n = op.dim();
    let mut o = opts.clone();
    o.block = o.block.max(4).min(n);
    let mut want = 4.min(n).max(1);
    let mut warm: Vec<Vec<f64>> = start.to_vec();
    loop {
        let r = smallest_eigs(op, want, &o, &warm);
        let lmin = r.pairs[0].value;
        let thr = lmin + rel * (1.0 + lmin.abs());
        let inside = r.pairs.iter().filter(|p| p.value <= thr).count();
        if inside < want || want >= n || want > cap {
            let mut r = r;
            r.pairs.truncate(inside.min(cap).max(1));
            return r;
        }
        warm = r.pairs.iter().map(|p| p.vector.clone()).collect();
        want = (want * 2).min(n).min(cap + 1);
        o.krylov_dim = o.krylov_dim.max(want * 3);
    }
}
