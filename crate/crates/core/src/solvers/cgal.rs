use std::time::Instant;

use super::oracle::{block_min, dense_min};
use super::recover::recover_primal;
use super::{check_scaled, relative_gap, Audit, ProgressRow, SolverError, SolverKind, SolverReport, Termination, Timing};
use crate::numerics::{dot, norm, DenseSym};
use crate::par::{map_range, Parallelism};
use crate::sdpbuild::StandardSdp;

/// Multiplier of the residual in the eigen step C + Aᵀ(y + σ(AX − b)).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftRule {
    /// σ = β_t = √(t+1): gradient of the augmented Lagrangian.
    Beta,
    /// σ = η_t = 2/(t+1).
    Eta,
}

#[derive(Clone, Debug)]
pub struct CgalOptions {
    /// Bound on ‖y‖.
    pub cap_k: f64,
    pub eps: f64,
    pub max_iter: usize,
    /// Keep only w = AX − b; a primal is rebuilt at the end.
    pub implicit: bool,
    pub shift: ShiftRule,
    /// Check the iterate invariants at every step (explicit mode; costly).
    pub audit: bool,
    /// Progress row every this many iterations (0 = never).
    pub log_every: usize,
    pub seed: u64,
    pub mode: Parallelism,
}

impl CgalOptions {
    pub fn dense() -> Self {
        CgalOptions {
            cap_k: 1e6,
            eps: 1e-3,
            max_iter: 1_000_000,
            implicit: false,
            shift: ShiftRule::Beta,
            audit: false,
            log_every: 100,
            seed: 0,
            mode: Parallelism::default(),
        }
    }

    pub fn blocks() -> Self {
        CgalOptions { eps: 1e-2, max_iter: 500_000, ..CgalOptions::dense() }
    }
}

impl Default for CgalOptions {
    fn default() -> Self {
        CgalOptions::dense()
    }
}

/// CGAL on an SDP with a single trace group.
pub fn cgal_solve(sdp: &StandardSdp, opts: &CgalOptions) -> Result<SolverReport, SolverError> {
    check_scaled(sdp)?;
    if sdp.groups.len() != 1 {
        return Err(SolverError::Invalid(format!(
            "cgal_solve needs one trace group, got {}; use cgal_solve_blocks",
            sdp.groups.len()
        )));
    }
    run(sdp, opts, SolverKind::Cgal)
}

/// CGAL with one eigenstep per trace group.
pub fn cgal_solve_blocks(sdp: &StandardSdp, opts: &CgalOptions) -> Result<SolverReport, SolverError> {
    check_scaled(sdp)?;
    run(sdp, opts, SolverKind::CgalBlocks)
}

/// Largest γ ≥ 0 with ‖y + γw‖ ≤ K (y inside the ball).
fn ball_step(y: &[f64], w: &[f64], k: f64) -> f64 {
    let ww = dot(w, w);
    if ww == 0.0 {
        return f64::INFINITY;
    }
    let yw = dot(y, w);
    let yy = dot(y, y);
    let disc = (yw * yw - ww * (yy - k * k)).max(0.0);
    // stable root of ww γ² + 2 yw γ + (yy − K²) = 0
    let q = -(yw + yw.signum() * disc.sqrt());
    let root = if yw >= 0.0 { (k * k - yy) / (yw + disc.sqrt()) } else { q / ww };
    root.max(0.0)
}

fn run(sdp: &StandardSdp, opts: &CgalOptions, kind: SolverKind) -> Result<SolverReport, SolverError> {
    if !(opts.cap_k > 0.0) || !(opts.eps > 0.0) {
        return Err(SolverError::Invalid("K and ε must be positive".into()));
    }
    let start = Instant::now();
    let mut timing = Timing::default();
    let zeta = sdp.zeta();
    let nb = sdp.blocks.len();
    let traces: Vec<f64> = sdp.groups.iter().map(|g| g.trace).collect();
    let trace_sq: f64 = traces.iter().map(|a| a * a).sum();
    // scaled problems have ‖A‖ ≤ 1
    let a_norm = 1.0;
    let bnorm = norm(&sdp.b).max(1.0);
    let explicit = !opts.implicit;

    let mut y = vec![0.0; zeta];
    let mut w: Vec<f64> = sdp.b.iter().map(|v| -v).collect();
    let mut z = vec![0.0; zeta];
    let mut pobj = 0.0;
    let mut x: Option<Vec<DenseSym>> = explicit.then(|| sdp.zero_blocks());
    let mut mats = sdp.zero_blocks();
    mats.iter_mut().for_each(|m| m.mode = opts.mode);
    let mut warm: Vec<Option<Vec<f64>>> = vec![None; nb];
    let mut log = Vec::new();
    let mut audit = (opts.audit && explicit).then(Audit::new);

    let mut dual = f64::NEG_INFINITY;
    let mut gap = f64::INFINITY;
    let mut feas = norm(&w) / bnorm;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    for t in 1..=opts.max_iter {
        let beta = ((t + 1) as f64).sqrt();
        let eta = 2.0 / (t + 1) as f64;
        let sigma = match opts.shift {
            ShiftRule::Beta => beta,
            ShiftRule::Eta => eta,
        };
        for ((zi, yi), wi) in z.iter_mut().zip(&y).zip(&w) {
            *zi = yi + sigma * wi;
        }

        let t0 = Instant::now();
        sdp.c_plus_at(1.0, &z, &mut mats, opts.mode);
        let tol = (0.1 * eta).max(1e-9);
        let eigs = map_range(opts.mode, nb, |b| {
            block_min(&mats[b], tol, warm[b].as_deref(), opts.seed.wrapping_add(b as u64))
        });
        timing.eigen += t0.elapsed();
        if let Some(b) = eigs.iter().position(|e| !e.converged) {
            return Err(SolverError::Eigen { iteration: t, block: b });
        }
        let mut picks = Vec::with_capacity(sdp.groups.len());
        let mut lam_sum = 0.0;
        for (gi, g) in sdp.groups.iter().enumerate() {
            let b = g.blocks.clone().min_by(|&p, &q| eigs[p].value.total_cmp(&eigs[q].value)).unwrap();
            lam_sum += traces[gi] * eigs[b].value;
            picks.push(b);
        }
        let d = lam_sum - dot(&sdp.b, &z);
        if !d.is_finite() {
            return Err(SolverError::Numerical(format!("non-finite dual bound at iteration {}", t)));
        }

        // stopping test on X_{t−1}
        if t > 1 {
            dual = d;
            feas = norm(&w) / bnorm;
            gap = relative_gap(pobj, d);
            if let Some(a) = audit.as_mut() {
                a.duality_violation = a.duality_violation.max(d - pobj);
            }
            if opts.log_every > 0 && (t - 1) % opts.log_every == 0 {
                log.push(ProgressRow { t: t - 1, primal: pobj, dual: d, feasibility: feas, gap });
            }
            if gap <= opts.eps && feas <= opts.eps {
                termination = Termination::Converged;
                iterations = t - 1;
                break;
            }
        }

        let t1 = Instant::now();
        let mut atom = vec![0.0; zeta];
        let mut catom = 0.0;
        for (gi, &b) in picks.iter().enumerate() {
            let u = &eigs[b].vector;
            sdp.add_a_rank_one(b, u, traces[gi], &mut atom);
            catom += traces[gi] * sdp.c_rank_one(b, u);
        }
        pobj = (1.0 - eta) * pobj + eta * catom;
        for ((wi, ai), bi) in w.iter_mut().zip(&atom).zip(&sdp.b) {
            *wi = (1.0 - eta) * *wi + eta * (ai - bi);
        }
        if let Some(xb) = x.as_mut() {
            xb.iter_mut().for_each(|m| m.scale(1.0 - eta));
            for (gi, &b) in picks.iter().enumerate() {
                xb[b].rank_one(eta * traces[gi], &eigs[b].vector);
            }
        }

        let ww = dot(&w, &w);
        let mut gamma = 1.0f64;
        if ww > 0.0 {
            gamma = gamma.min(beta * eta * eta * trace_sq * a_norm * a_norm / ww);
        }
        gamma = gamma.min(ball_step(&y, &w, opts.cap_k));
        for (yi, wi) in y.iter_mut().zip(&w) {
            *yi += gamma * wi;
        }
        let yn = norm(&y);
        if yn > opts.cap_k {
            y.iter_mut().for_each(|v| *v *= opts.cap_k / yn);
        }
        timing.update += t1.elapsed();

        for (b, e) in eigs.into_iter().enumerate() {
            warm[b] = Some(e.vector);
        }
        iterations = t;

        if let (Some(a), Some(xb)) = (audit.as_mut(), x.as_ref()) {
            for (gi, g) in sdp.groups.iter().enumerate() {
                let tr: f64 = xb[g.blocks.clone()].iter().map(|m| m.trace()).sum();
                a.trace_error = a.trace_error.max((tr - traces[gi]).abs());
            }
            for m in xb {
                a.min_eigenvalue = a.min_eigenvalue.min(dense_min(m));
            }
            a.max_dual_norm = a.max_dual_norm.max(norm(&y));
            let ax = sdp.apply_a(xb, opts.mode);
            for ((ai, bi), wi) in ax.iter().zip(&sdp.b).zip(&w) {
                a.residual_drift = a.residual_drift.max((ai - bi - wi).abs());
            }
        }
    }
    if termination != Termination::Converged {
        feas = norm(&w) / bnorm;
        gap = relative_gap(pobj, dual);
    }

    let recovery = if opts.implicit {
        let t2 = Instant::now();
        let r = recover_primal(sdp, &z, opts.mode)?;
        timing.recovery = t2.elapsed();
        Some(r)
    } else {
        None
    };
    timing.total = start.elapsed();
    let info = sdp.scaling.as_ref().expect("checked");
    Ok(SolverReport {
        solver: kind,
        value: sdp.unscale_objective(pobj),
        primal: sdp.unscale_objective(pobj),
        dual: sdp.unscale_objective(dual),
        feasibility: feas,
        gap,
        iterations,
        termination,
        timing,
        group_traces: info.group_trace.clone(),
        y,
        x,
        recovery,
        log,
        audit,
    })
}
