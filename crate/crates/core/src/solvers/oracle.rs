use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::{norm, smallest_cluster, smallest_eigs, sym_eig, DenseSym, EigOptions};

/// Blocks up to this size are diagonalised directly.
const DENSE_LIMIT: usize = 32;

/// Weight of the random component added to a warm start.
const WARM_MIX: f64 = 1e-2;

pub(crate) struct BlockEig {
    pub value: f64,
    pub vector: Vec<f64>,
    pub converged: bool,
}

/// Smallest eigenpair of one block, warm-started from `warm` when given.
pub(crate) fn block_min(m: &DenseSym, tol: f64, warm: Option<&[f64]>, seed: u64) -> BlockEig {
    let n = m.n();
    if n <= DENSE_LIMIT {
        let (vals, vecs) = sym_eig(&m.rows());
        let mut u: Vec<f64> = (0..n).map(|i| vecs[i][0]).collect();
        fix_sign(&mut u);
        return BlockEig { value: vals[0], vector: u, converged: true };
    }
    let opts = EigOptions { tol, seed, max_matvecs: 20_000 + 20 * n, ..EigOptions::default() };
    // A pure warm start can sit in an invariant subspace of a symmetric
    // problem and never see the true minimiser; mix in a random direction.
    let start: Vec<Vec<f64>> = warm
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let s = WARM_MIX / norm(&r).max(f64::MIN_POSITIVE);
            vec![w.iter().zip(&r).map(|(a, b)| a + s * b).collect()]
        })
        .unwrap_or_default();
    let r = smallest_eigs(m, 1, &opts, &start);
    BlockEig { value: r.value(), vector: r.vector().to_vec(), converged: r.converged }
}

/// Eigenpairs of one block within `rel·(1+|λ_min|)` of its λ_min, at most `cap`.
pub(crate) fn block_cluster(m: &DenseSym, rel: f64, cap: usize, seed: u64) -> Vec<(f64, Vec<f64>)> {
    let n = m.n();
    if n <= DENSE_LIMIT {
        let (vals, vecs) = sym_eig(&m.rows());
        let thr = vals[0] + rel * (1.0 + vals[0].abs());
        return (0..n)
            .take_while(|&j| vals[j] <= thr)
            .take(cap)
            .map(|j| {
                let mut u: Vec<f64> = (0..n).map(|i| vecs[i][j]).collect();
                fix_sign(&mut u);
                (vals[j], u)
            })
            .collect();
    }
    let opts = EigOptions { tol: 1e-10, seed, max_matvecs: 50_000 + 50 * n, ..EigOptions::default() };
    smallest_cluster(m, &opts, rel, cap, &[]).pairs.into_iter().map(|p| (p.value, p.vector)).collect()
}

fn fix_sign(v: &mut [f64]) {
    let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Smallest eigenvalue of a dense block (used by the audit).
pub(crate) fn dense_min(m: &DenseSym) -> f64 {
    if m.n() == 0 {
        return 0.0;
    }
    sym_eig(&m.rows()).0[0]
}
