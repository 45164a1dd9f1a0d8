use std::time::Instant;

use super::oracle::block_min;
use super::recover::recover_primal;
use super::{check_scaled, relative_gap, ProgressRow, SolverError, SolverKind, SolverReport, Termination, Timing};
use crate::numerics::{dot, norm, simplex_qp};
use crate::par::{map_range, Parallelism};
use crate::sdpbuild::StandardSdp;

#[derive(Clone, Debug)]
pub struct SpectralOptions {
    /// Stop when the aggregated primal has relative gap and residual ≤ eps.
    pub eps: f64,
    pub max_iter: usize,
    /// Cuts kept in the bundle.
    pub bundle_size: usize,
    /// Serious step when actual increase ≥ this fraction of the predicted one.
    pub descent: f64,
    /// No improvement above `stall_tol` for this many steps ends the run.
    pub stall_steps: usize,
    pub stall_tol: f64,
    pub log_every: usize,
    pub seed: u64,
    pub mode: Parallelism,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            eps: 1e-4,
            max_iter: 20_000,
            bundle_size: 20,
            descent: 0.1,
            stall_steps: 200,
            stall_tol: 1e-10,
            log_every: 100,
            seed: 0,
            mode: Parallelism::default(),
        }
    }
}

/// φ(y) with one supergradient.
#[derive(Clone, Debug)]
pub struct DualEval {
    pub value: f64,
    /// b − Σ_j a_j A(u_j u_jᵀ).
    pub supergradient: Vec<f64>,
    /// Σ_j a_j ⟨C, u_j u_jᵀ⟩ (objective of the atom behind the supergradient).
    pub atom_objective: f64,
    /// Eigenvector per block (warm starts).
    pub vectors: Vec<Vec<f64>>,
}

/// φ(y) = Σ_j a_j λ_min(C_j − A_jᵀy) + bᵀy on the scaled problem.
pub fn dual_function(sdp: &StandardSdp, y: &[f64], mode: Parallelism) -> Result<DualEval, SolverError> {
    let mut state = Oracle::new(sdp, mode, 0);
    state.eval(y, 0)
}

struct Oracle<'a> {
    sdp: &'a StandardSdp,
    mats: Vec<crate::numerics::DenseSym>,
    warm: Vec<Option<Vec<f64>>>,
    neg: Vec<f64>,
    mode: Parallelism,
    seed: u64,
}

impl<'a> Oracle<'a> {
    fn new(sdp: &'a StandardSdp, mode: Parallelism, seed: u64) -> Self {
        let mut mats = sdp.zero_blocks();
        mats.iter_mut().for_each(|m| m.mode = mode);
        Oracle { sdp, mats, warm: vec![None; sdp.blocks.len()], neg: vec![0.0; sdp.zeta()], mode, seed }
    }

    fn eval(&mut self, y: &[f64], iteration: usize) -> Result<DualEval, SolverError> {
        let sdp = self.sdp;
        for (n, v) in self.neg.iter_mut().zip(y) {
            *n = -v;
        }
        sdp.c_plus_at(1.0, &self.neg, &mut self.mats, self.mode);
        let mats = &self.mats;
        let warm = &self.warm;
        let seed = self.seed;
        let eigs = map_range(self.mode, mats.len(), |b| {
            block_min(&mats[b], 1e-9, warm[b].as_deref(), seed.wrapping_add(b as u64))
        });
        if let Some(b) = eigs.iter().position(|e| !e.converged) {
            return Err(SolverError::Eigen { iteration, block: b });
        }
        let mut value = dot(&sdp.b, y);
        let mut g = sdp.b.clone();
        let mut atom_objective = 0.0;
        for grp in &sdp.groups {
            let b = grp.blocks.clone().min_by(|&p, &q| eigs[p].value.total_cmp(&eigs[q].value)).unwrap();
            value += grp.trace * eigs[b].value;
            sdp.add_a_rank_one(b, &eigs[b].vector, -grp.trace, &mut g);
            atom_objective += grp.trace * sdp.c_rank_one(b, &eigs[b].vector);
        }
        if !value.is_finite() {
            return Err(SolverError::Numerical(format!("non-finite dual value at iteration {}", iteration)));
        }
        let vectors: Vec<Vec<f64>> = eigs.into_iter().map(|e| e.vector).collect();
        for (w, v) in self.warm.iter_mut().zip(&vectors) {
            *w = Some(v.clone());
        }
        Ok(DualEval { value, supergradient: g, atom_objective, vectors })
    }
}

/// Cut h(y) = off + gᵀy ≥ φ(y); `obj` is the objective of its atom so that
/// aggregated cuts carry the objective of the aggregated primal.
#[derive(Clone)]
struct Cut {
    g: Vec<f64>,
    off: f64,
    obj: f64,
}

/// Maximises φ by a proximal bundle method, then recovers a primal from the
/// eigenvectors at the final center.
pub fn spectral_solve(sdp: &StandardSdp, opts: &SpectralOptions) -> Result<SolverReport, SolverError> {
    check_scaled(sdp)?;
    if !(opts.eps > 0.0) || opts.bundle_size < 2 {
        return Err(SolverError::Invalid("ε must be positive and the bundle must hold two cuts".into()));
    }
    let start = Instant::now();
    let mut timing = Timing::default();
    let zeta = sdp.zeta();
    let bnorm = norm(&sdp.b).max(1.0);
    let mut oracle = Oracle::new(sdp, opts.mode, opts.seed);

    let mut center = vec![0.0; zeta];
    let t0 = Instant::now();
    let first = oracle.eval(&center, 0)?;
    timing.eigen += t0.elapsed();
    let mut fc = first.value;
    let mut bundle = vec![Cut { off: fc - dot(&first.supergradient, &center), g: first.supergradient, obj: first.atom_objective }];
    let g0 = norm(&bundle[0].g);
    let mut mu = g0.max(1e-8);
    let (mu_min, mu_max) = (mu * 1e-8, mu * 1e8);

    let mut log = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    let mut best = fc;
    let mut last_gain = 0usize;
    let mut agg_primal = bundle[0].obj;
    let mut agg_res = g0;
    let mut predicted;

    for it in 1..=opts.max_iter {
        iterations = it;
        let t1 = Instant::now();
        let gram: Vec<Vec<f64>> =
            bundle.iter().map(|ci| bundle.iter().map(|cj| dot(&ci.g, &cj.g) / mu).collect()).collect();
        let errs: Vec<f64> = bundle.iter().map(|c| (c.off + dot(&c.g, &center) - fc).max(0.0)).collect();
        let qp = simplex_qp(&gram, &errs);
        let xi = qp.weights;
        let mut gh = vec![0.0; zeta];
        let mut eh = 0.0;
        let mut offh = 0.0;
        let mut objh = 0.0;
        for ((c, &w), &e) in bundle.iter().zip(&xi).zip(&errs) {
            if w == 0.0 {
                continue;
            }
            for (a, b) in gh.iter_mut().zip(&c.g) {
                *a += w * b;
            }
            eh += w * e;
            offh += w * c.off;
            objh += w * c.obj;
        }
        let gn2 = dot(&gh, &gh);
        predicted = eh + gn2 / mu;
        agg_primal = objh;
        agg_res = gn2.sqrt();
        timing.update += t1.elapsed();

        // The aggregate cut is φ's model at the aggregated primal
        // X̂ = Σ ξ_i U_i: its residual is ĝ and its objective objh.
        let agg_gap = relative_gap(agg_primal, fc);
        if opts.log_every > 0 && it % opts.log_every == 0 {
            log.push(ProgressRow { t: it, primal: agg_primal, dual: fc, feasibility: agg_res / bnorm, gap: agg_gap });
        }
        if agg_gap <= opts.eps && agg_res / bnorm <= opts.eps {
            termination = Termination::Converged;
            break;
        }

        let trial: Vec<f64> = center.iter().zip(&gh).map(|(c, g)| c + g / mu).collect();
        let t2 = Instant::now();
        let ev = oracle.eval(&trial, it)?;
        timing.eigen += t2.elapsed();
        let gain = ev.value - fc;
        let new_cut = Cut { off: ev.value - dot(&ev.supergradient, &trial), g: ev.supergradient, obj: ev.atom_objective };

        // weight update by interpolation of the ratio actual/predicted
        let rho = if predicted > 0.0 { gain / predicted } else { 0.0 };
        let mu_int = 2.0 * mu * (1.0 - rho);
        if gain >= opts.descent * predicted {
            center = trial;
            fc = ev.value;
            if rho > 0.5 {
                mu = mu_int.max(mu / 10.0).max(mu_min);
            }
        } else {
            let err_new = (new_cut.off + dot(&new_cut.g, &center) - fc).max(0.0);
            if err_new > 10.0 * predicted {
                mu = mu_int.min(10.0 * mu).min(mu_max);
            }
        }
        if fc > best + opts.stall_tol {
            best = fc;
            last_gain = it;
        } else if it - last_gain >= opts.stall_steps {
            termination = Termination::Stagnated;
            break;
        }

        // keep active cuts, fold the rest into the aggregate when full
        let agg = Cut { g: gh, off: offh, obj: objh };
        let mut active: Vec<(f64, Cut)> =
            bundle.into_iter().zip(&xi).filter(|(_, &w)| w > 1e-12).map(|(c, &w)| (w, c)).collect();
        if active.len() + 1 > opts.bundle_size {
            active.sort_by(|a, b| b.0.total_cmp(&a.0));
            active.truncate(opts.bundle_size - 2);
            active.push((0.0, agg));
        }
        let mut kept: Vec<Cut> = active.into_iter().map(|(_, c)| c).collect();
        kept.push(new_cut);
        bundle = kept;
    }

    let t3 = Instant::now();
    let neg: Vec<f64> = center.iter().map(|v| -v).collect();
    let rec = recover_primal(sdp, &neg, opts.mode)?;
    timing.recovery = t3.elapsed();
    timing.total = start.elapsed();
    let info = sdp.scaling.as_ref().expect("checked");
    Ok(SolverReport {
        solver: SolverKind::Spectral,
        value: sdp.unscale_objective(fc),
        // the aggregated primal is what the stopping test measured
        primal: sdp.unscale_objective(agg_primal),
        dual: sdp.unscale_objective(fc),
        feasibility: agg_res / bnorm,
        gap: relative_gap(agg_primal, fc),
        iterations,
        termination,
        timing,
        group_traces: info.group_trace.clone(),
        y: neg,
        x: None,
        recovery: Some(rec),
        log,
        audit: None,
    })
}
