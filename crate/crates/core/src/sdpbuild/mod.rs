//! Standard-form SDPs with constant trace.
//!
//! The moment relaxation of a POP is written over one PSD block per moment
//! or localizing matrix. Equality rows tie entries that share a moment
//! (Hankel rows), bind localizing entries to the moment block, impose the
//! ideal constraints and fix y₀ = 1. The variable is then changed to
//! X = P D(y) P with P the certificate's diagonal scaling, so every feasible
//! X has trace a (per clique group in the sparse case).

mod assemble;
mod probe;
mod scale;
mod text;

pub use assemble::{assemble, assemble_cs, assemble_dense, dense_zeta, MomentIndexMap};
pub use probe::{dirac_blocks, trace_probe, ProbeReport};
pub use scale::{scale, ScaleInfo};
pub use text::{sdp_from_text, sdp_to_text};

use std::ops::Range;

use crate::ctpcert::CertError;
use crate::cspattern::SparsityError;
use crate::numerics::DenseSym;
use crate::par::{for_each_mut, map_range, Parallelism};
use crate::polycore::{Monomial, PolyError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("certificate does not match the problem: {0}")]
    Mismatch(String),
    #[error("objective is identically zero")]
    DegenerateObjective,
    #[error("trace probe failed: {0}")]
    Probe(String),
    #[error("sdp text: {0}")]
    Parse(String),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sparsity(#[from] SparsityError),
}

/// What a PSD block represents.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockKind {
    /// Moment matrix of a group.
    Moment,
    /// Localizing matrix of inequality `g` (global index).
    Localizing(usize),
    /// Read from text; no moment structure attached.
    Imported,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockInfo {
    pub size: usize,
    pub group: usize,
    pub kind: BlockKind,
    /// Global variable indices of the group.
    pub variables: Vec<usize>,
    /// Order of the monomial basis indexing rows and columns.
    pub degree: usize,
    /// Diagonal of P on this block.
    pub scaling: Vec<f64>,
}

/// Blocks sharing one trace constant.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpGroup {
    pub trace: f64,
    pub blocks: Range<usize>,
}

/// Upper-triangle entry (i ≤ j) of a symmetric block; the value sits at
/// both (i,j) and (j,i).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triplet {
    pub row: u32,
    pub i: u32,
    pub j: u32,
    pub val: f64,
}

/// Symmetric block-diagonal matrix, upper triangles per block.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BlockSymMatrix {
    pub blocks: Vec<Vec<(u32, u32, f64)>>,
}

impl BlockSymMatrix {
    pub fn frobenius_sq(&self) -> f64 {
        self.blocks.iter().flatten().map(|&(i, j, v)| if i == j { v * v } else { 2.0 * v * v }).sum()
    }

    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// ⟨M, X⟩ for dense blocks.
    pub fn dot_dense(&self, x: &[DenseSym]) -> f64 {
        self.blocks
            .iter()
            .zip(x)
            .map(|(es, xb)| es.iter().map(|&(i, j, v)| sym_weight(i, j) * v * xb.get(i as usize, j as usize)).sum::<f64>())
            .sum()
    }
}

fn sym_weight(i: u32, j: u32) -> f64 {
    if i == j {
        1.0
    } else {
        2.0
    }
}

/// Provenance of a constraint row.
#[derive(Clone, Debug, PartialEq)]
pub enum RowKind {
    /// Entry (i,j) of a moment block equals the representative entry of its
    /// moment.
    Hankel { block: usize, entry: (usize, usize), rep: (usize, usize) },
    /// Entry of a localizing block equals its moment combination.
    Localizing { block: usize, entry: (usize, usize) },
    /// L(h·x^γ) = 0 (γ in the group's local variables).
    Ideal { group: usize, eq: usize, gamma: Monomial },
    /// y₀ = 1 on a group.
    Normalization { group: usize },
    /// A moment shared by two groups.
    Overlap { first: usize, other: usize, alpha: Vec<(usize, u32)> },
    /// Read from text.
    Imported,
}

/// Rows by family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RowCounts {
    pub hankel: usize,
    pub localizing: usize,
    pub ideal: usize,
    pub normalization: usize,
    pub overlap: usize,
}

/// min ⟨C, X⟩ s.t. ⟨A_r, X⟩ = b_r, X = diag(X_1, …, X_ω) ⪰ 0.
/// Constraint entries are stored per block, sorted by (row, i, j).
#[derive(Clone, Debug, PartialEq)]
pub struct StandardSdp {
    pub order: usize,
    pub blocks: Vec<BlockInfo>,
    pub groups: Vec<SdpGroup>,
    pub c: BlockSymMatrix,
    pub a: Vec<Vec<Triplet>>,
    pub b: Vec<f64>,
    pub rows: Vec<RowKind>,
    /// Present once [`scale`] has been applied.
    pub scaling: Option<ScaleInfo>,
}

impl StandardSdp {
    /// ζ, the number of equality rows.
    pub fn zeta(&self) -> usize {
        self.b.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    /// s^max.
    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.size).max().unwrap_or(0)
    }

    /// Trace of any feasible X (sum over groups).
    pub fn total_trace(&self) -> f64 {
        self.groups.iter().map(|g| g.trace).sum()
    }

    pub fn max_group_trace(&self) -> f64 {
        self.groups.iter().map(|g| g.trace).fold(0.0, f64::max)
    }

    pub fn nnz(&self) -> usize {
        self.a.iter().map(|b| b.len()).sum()
    }

    pub fn row_counts(&self) -> RowCounts {
        let mut c = RowCounts::default();
        for r in &self.rows {
            match r {
                RowKind::Hankel { .. } => c.hankel += 1,
                RowKind::Localizing { .. } => c.localizing += 1,
                RowKind::Ideal { .. } => c.ideal += 1,
                RowKind::Normalization { .. } => c.normalization += 1,
                RowKind::Overlap { .. } => c.overlap += 1,
                RowKind::Imported => {}
            }
        }
        c
    }

    /// Row r as a block matrix (linear scan; meant for checks and export).
    pub fn constraint(&self, r: usize) -> BlockSymMatrix {
        let blocks = self
            .a
            .iter()
            .map(|es| es.iter().filter(|t| t.row as usize == r).map(|t| (t.i, t.j, t.val)).collect())
            .collect();
        BlockSymMatrix { blocks }
    }

    /// ‖A_r‖_F² for every row.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.zeta()];
        for t in self.a.iter().flatten() {
            out[t.row as usize] += sym_weight(t.i, t.j) * t.val * t.val;
        }
        out
    }

    /// A(X) for dense blocks.
    pub fn apply_a(&self, x: &[DenseSym], mode: Parallelism) -> Vec<f64> {
        let parts = map_range(mode, self.blocks.len(), |b| {
            let xb = &x[b];
            self.a[b]
                .iter()
                .map(|t| (t.row, sym_weight(t.i, t.j) * t.val * xb.get(t.i as usize, t.j as usize)))
                .collect::<Vec<_>>()
        });
        let mut out = vec![0.0; self.zeta()];
        for p in parts {
            for (r, v) in p {
                out[r as usize] += v;
            }
        }
        out
    }

    /// s·A(uuᵀ) added to `out`, with u living on block `b`.
    pub fn add_a_rank_one(&self, b: usize, u: &[f64], s: f64, out: &mut [f64]) {
        for t in &self.a[b] {
            let v = sym_weight(t.i, t.j) * t.val * u[t.i as usize] * u[t.j as usize];
            out[t.row as usize] += s * v;
        }
    }

    /// ⟨C, uuᵀ⟩ with u on block `b`.
    pub fn c_rank_one(&self, b: usize, u: &[f64]) -> f64 {
        self.c.blocks[b].iter().map(|&(i, j, v)| sym_weight(i, j) * v * u[i as usize] * u[j as usize]).sum()
    }

    /// Overwrites `out` with the blocks of σC + Aᵀz.
    pub fn c_plus_at(&self, sigma: f64, z: &[f64], out: &mut [DenseSym], mode: Parallelism) {
        for_each_mut(mode, out, |b, m| {
            m.clear();
            for &(i, j, v) in &self.c.blocks[b] {
                m.add_sym(i as usize, j as usize, sigma * v);
            }
            for t in &self.a[b] {
                let w = z[t.row as usize];
                if w != 0.0 {
                    m.add_sym(t.i as usize, t.j as usize, w * t.val);
                }
            }
        });
    }

    /// Zeroed dense blocks of the right sizes.
    pub fn zero_blocks(&self) -> Vec<DenseSym> {
        self.blocks.iter().map(|b| DenseSym::zeros(b.size)).collect()
    }

    /// Objective of the original (unscaled) problem for a value of this one.
    pub fn unscale_objective(&self, v: f64) -> f64 {
        match &self.scaling {
            Some(s) => v * s.objective,
            None => v,
        }
    }

    /// Dual vector of the original problem for a dual vector of this one
    /// (rows were divided by `row`).
    pub fn unscale_dual(&self, z: &[f64]) -> Vec<f64> {
        match &self.scaling {
            Some(s) => z.iter().zip(&s.row).map(|(zi, r)| zi * s.objective / r).collect(),
            None => z.to_vec(),
        }
    }

    /// Original blocks from blocks of this problem.
    pub fn unscale_primal(&self, x: &[DenseSym]) -> Vec<DenseSym> {
        let mut out = x.to_vec();
        if let Some(s) = &self.scaling {
            for (b, m) in out.iter_mut().enumerate() {
                m.scale(s.group_trace[self.blocks[b].group]);
            }
        }
        out
    }
}
