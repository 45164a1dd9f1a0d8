use super::{SdpError, StandardSdp};
use crate::numerics::{operator_norm, FnOperator};
use crate::par::Parallelism;

/// Factors applied by [`scale`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleInfo {
    /// Original objective = scaled objective × this (it is ‖C‖_F after the
    /// trace normalisation).
    pub objective: f64,
    /// Scaled row r = trace-normalised row r / row[r]; b scaled alike.
    pub row: Vec<f64>,
    /// Trace constant divided out of each group.
    pub group_trace: Vec<f64>,
    /// Upper estimate of ‖A‖ after row normalisation.
    pub op_norm: f64,
}

/// Relative accuracy of the ‖A‖ estimate.
pub const NORM_TOL: f64 = 1e-6;

/// Rescales so that every group has trace 1, all rows have the same
/// Frobenius norm, ‖A‖ ≤ 1 (the norm estimate is inflated by 1%), and
/// ‖C‖_F = 1. Factors are kept for unscaling.
pub fn scale(sdp: &StandardSdp, mode: Parallelism) -> Result<StandardSdp, SdpError> {
    if sdp.scaling.is_some() {
        return Err(SdpError::Mismatch("problem is already scaled".into()));
    }
    let mut out = sdp.clone();
    let group_trace: Vec<f64> = out.groups.iter().map(|g| g.trace).collect();
    for (b, info) in sdp.blocks.iter().enumerate() {
        let a = group_trace[info.group];
        out.a[b].iter_mut().for_each(|t| t.val *= a);
        out.c.blocks[b].iter_mut().for_each(|e| e.2 *= a);
    }
    for g in out.groups.iter_mut() {
        g.trace = 1.0;
    }

    let mut row: Vec<f64> = out.row_norms_sq().iter().map(|v| v.sqrt()).collect();
    if let Some(r) = row.iter().position(|&v| v == 0.0) {
        return Err(SdpError::Mismatch(format!("constraint row {} is empty", r)));
    }
    for blk in out.a.iter_mut() {
        blk.iter_mut().for_each(|t| t.val /= row[t.row as usize]);
    }

    let zeta = out.zeta();
    let norm = if zeta == 0 {
        1.0
    } else {
        let gram = {
            let sdp = &out;
            FnOperator {
                dim: zeta,
                f: move |y: &[f64], res: &mut [f64]| {
                    let mut blocks = sdp.zero_blocks();
                    sdp.c_plus_at(0.0, y, &mut blocks, mode);
                    res.copy_from_slice(&sdp.apply_a(&blocks, mode));
                },
            }
        };
        operator_norm(&gram, NORM_TOL, 0x5eed).upper
    };
    for blk in out.a.iter_mut() {
        blk.iter_mut().for_each(|t| t.val /= norm);
    }
    for (r, b) in row.iter_mut().zip(out.b.iter_mut()) {
        *r *= norm;
        *b /= *r;
    }

    let cnorm = out.c.frobenius_sq().sqrt();
    if cnorm == 0.0 {
        return Err(SdpError::DegenerateObjective);
    }
    out.c.blocks.iter_mut().flatten().for_each(|e| e.2 /= cnorm);
    out.scaling = Some(ScaleInfo { objective: cnorm, row, group_trace, op_norm: norm });
    Ok(out)
}
