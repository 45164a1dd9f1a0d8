use super::oracle::block_cluster;
use super::SolverError;
use crate::numerics::{norm, product_simplex_ls, DenseSym};
use crate::par::{map_range, Parallelism};
use crate::sdpbuild::StandardSdp;

/// Eigenvalues within this relative distance of λ_min count as one cluster.
pub const CLUSTER_REL: f64 = 1e-6;
/// At most this many eigenvectors per group enter the recovery.
pub const CLUSTER_CAP: usize = 15;

/// Primal rebuilt as X_j = a_j Σ ξ_i u_i u_iᵀ (scaled problem).
#[derive(Clone, Debug)]
pub struct Recovery {
    pub x: Vec<DenseSym>,
    /// ⟨C, X⟩ on the scaled problem.
    pub primal: f64,
    /// ‖AX − b‖ / max(1, ‖b‖).
    pub feasibility: f64,
    /// Eigenvectors used per group.
    pub rank: Vec<usize>,
}

/// Takes the smallest-eigenvalue cluster of every group of C + Aᵀz and fits
/// the constraints with simplex weights (one simplex per group).
pub fn recover_primal(sdp: &StandardSdp, z: &[f64], mode: Parallelism) -> Result<Recovery, SolverError> {
    let mut mats = sdp.zero_blocks();
    sdp.c_plus_at(1.0, z, &mut mats, mode);
    let clusters = map_range(mode, mats.len(), |b| block_cluster(&mats[b], CLUSTER_REL, CLUSTER_CAP, 0x7ec0 + b as u64));

    // candidates per group: (block, vector)
    let mut cands: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    let mut rank = Vec::with_capacity(sdp.groups.len());
    for (gi, g) in sdp.groups.iter().enumerate() {
        let lmin = g
            .blocks
            .clone()
            .filter_map(|b| clusters[b].first().map(|p| p.0))
            .fold(f64::INFINITY, f64::min);
        if !lmin.is_finite() {
            return Err(SolverError::Numerical(format!("no eigenpair for group {}", gi)));
        }
        let thr = lmin + CLUSTER_REL * (1.0 + lmin.abs());
        let mut pool: Vec<(f64, usize, &Vec<f64>)> = g
            .blocks
            .clone()
            .flat_map(|b| clusters[b].iter().filter(|p| p.0 <= thr).map(move |p| (p.0, b, &p.1)))
            .collect();
        pool.sort_by(|a, b| a.0.total_cmp(&b.0));
        pool.truncate(CLUSTER_CAP);
        rank.push(pool.len());
        for (_, b, u) in pool {
            cands.push((gi, b, u.clone()));
        }
    }

    let cols: Vec<Vec<f64>> = cands
        .iter()
        .map(|(gi, b, u)| {
            let mut col = vec![0.0; sdp.zeta()];
            sdp.add_a_rank_one(*b, u, sdp.groups[*gi].trace, &mut col);
            col
        })
        .collect();
    let group_of: Vec<usize> = cands.iter().map(|c| c.0).collect();
    let fit = product_simplex_ls(&cols, &sdp.b, &group_of);

    let mut x = sdp.zero_blocks();
    for ((gi, b, u), w) in cands.iter().zip(&fit.weights) {
        if *w > 0.0 {
            x[*b].rank_one(w * sdp.groups[*gi].trace, u);
        }
    }
    let primal = sdp.c.dot_dense(&x);
    let ax = sdp.apply_a(&x, mode);
    let res: Vec<f64> = ax.iter().zip(&sdp.b).map(|(a, b)| a - b).collect();
    let feasibility = norm(&res) / norm(&sdp.b).max(1.0);
    Ok(Recovery { x, primal, feasibility, rank })
}
