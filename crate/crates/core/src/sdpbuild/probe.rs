use super::{BlockKind, SdpError, StandardSdp};
use crate::numerics::DenseSym;
use crate::par::Parallelism;
use crate::polycore::build_basis;
use crate::popmodel::PopInstance;

/// Blocks of X = P D_k(y) P for y the moments of the Dirac measure at `z`
/// (divided by the group traces when the problem is scaled). With
/// `conjugate = false` the P factors are left out.
pub fn dirac_blocks(sdp: &StandardSdp, pop: &PopInstance, z: &[f64], conjugate: bool) -> Result<Vec<DenseSym>, SdpError> {
    if z.len() != pop.n {
        return Err(SdpError::Mismatch(format!("point has {} coordinates, problem has {}", z.len(), pop.n)));
    }
    let mut out = Vec::with_capacity(sdp.blocks.len());
    for info in &sdp.blocks {
        let local: Vec<f64> = info.variables.iter().map(|&v| z[v]).collect();
        let basis = build_basis(local.len(), info.degree)?;
        let mut w = match info.kind {
            BlockKind::Moment => 1.0,
            BlockKind::Localizing(i) => pop.g[i].eval(z)?,
            BlockKind::Imported => return Err(SdpError::Mismatch("imported problem has no moment structure".into())),
        };
        if let Some(s) = &sdp.scaling {
            w /= s.group_trace[info.group];
        }
        let mut v = basis.eval_all(&local);
        if conjugate {
            v.iter_mut().zip(&info.scaling).for_each(|(x, p)| *x *= p);
        }
        let mut m = DenseSym::zeros(info.size);
        m.rank_one(w, &v);
        out.push(m);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub probes: usize,
    /// Largest |trace(X_group) − a_group| / (1 + a_group).
    pub trace_residual: f64,
    /// Largest |⟨A_r, X⟩ − b_r|.
    pub feasibility: f64,
    /// Largest |⟨C, X⟩ − f(z)| in original units.
    pub objective_gap: f64,
}

pub const PROBE_TOL: f64 = 1e-8;

/// Checks the constant trace on Dirac moment matrices at the given points
/// (which must lie in V(h)); also reports how well they satisfy the rows
/// and reproduce f.
pub fn trace_probe(sdp: &StandardSdp, pop: &PopInstance, points: &[Vec<f64>]) -> Result<ProbeReport, SdpError> {
    let mut rep = ProbeReport { probes: points.len(), trace_residual: 0.0, feasibility: 0.0, objective_gap: 0.0 };
    for (pi, z) in points.iter().enumerate() {
        let x = dirac_blocks(sdp, pop, z, true)?;
        for (gi, g) in sdp.groups.iter().enumerate() {
            let t: f64 = x[g.blocks.clone()].iter().map(|m| m.trace()).sum();
            let r = (t - g.trace).abs() / (1.0 + g.trace);
            rep.trace_residual = rep.trace_residual.max(r);
            if r > PROBE_TOL {
                return Err(SdpError::Probe(format!(
                    "point {}: group {} (blocks {:?}) has trace {} instead of {}",
                    pi, gi + 1, g.blocks, t, g.trace
                )));
            }
        }
        let ax = sdp.apply_a(&x, Parallelism::Sequential);
        for (v, b) in ax.iter().zip(&sdp.b) {
            rep.feasibility = rep.feasibility.max((v - b).abs());
        }
        let obj = sdp.unscale_objective(sdp.c.dot_dense(&x));
        rep.objective_gap = rep.objective_gap.max((obj - pop.f.eval(z)?).abs());
    }
    Ok(rep)
}
