use std::collections::{BTreeMap, HashMap};

use super::{BlockInfo, BlockKind, BlockSymMatrix, RowKind, SdpError, SdpGroup, StandardSdp, Triplet};
use crate::cspattern::CliqueStructure;
use crate::ctpcert::{CtpCertificate, GroupCertificate};
use crate::polycore::{basis_size, build_basis, Monomial, MonomialBasis, Polynomial};
use crate::popmodel::PopInstance;

/// For a moment block of order k: each entry (μ,ν) owns the moment μ+ν; the
/// representative of a moment is its first entry in row-major upper-triangle
/// order, i.e. the graded-lex minimal pair.
#[derive(Clone, Debug)]
pub struct MomentIndexMap {
    basis: MonomialBasis,
    rep: HashMap<Monomial, (usize, usize)>,
}

impl MomentIndexMap {
    pub fn new(n: usize, k: usize) -> Result<Self, SdpError> {
        let basis = build_basis(n, k)?;
        let mut rep = HashMap::with_capacity(basis_size(n, 2 * k)?);
        let ms = basis.monomials();
        for a in 0..ms.len() {
            for b in a..ms.len() {
                rep.entry(ms[a].mul(&ms[b])).or_insert((a, b));
            }
        }
        Ok(MomentIndexMap { basis, rep })
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Number of distinct moments, s(2k).
    pub fn moments(&self) -> usize {
        self.rep.len()
    }

    pub fn representative(&self, alpha: &Monomial) -> Option<(usize, usize)> {
        self.rep.get(alpha).copied()
    }

    pub fn owner(&self, i: usize, j: usize) -> Monomial {
        self.basis.get(i).mul(self.basis.get(j))
    }

    pub fn is_representative(&self, i: usize, j: usize) -> bool {
        let (i, j) = (i.min(j), i.max(j));
        self.rep.get(&self.owner(i, j)) == Some(&(i, j))
    }
}

/// ζ_k of the dense assembly from the block and moment counts.
pub fn dense_zeta(n: usize, k: usize, g: &[Polynomial], h: &[Polynomial]) -> Result<usize, SdpError> {
    let s = |d: usize| basis_size(n, d);
    let sk = s(k)?;
    let mut z = 1 + sk * (sk + 1) / 2 - s(2 * k)?;
    for gi in g {
        let t = s(k - gi.half_ceil_degree() as usize)?;
        z += t * (t + 1) / 2;
    }
    for hj in h {
        z += s(2 * (k - hj.half_ceil_degree() as usize))?;
    }
    Ok(z)
}

/// Accumulates one row's entries keyed by (block, i, j) with i ≤ j.
#[derive(Default)]
struct RowBuf {
    entries: BTreeMap<(usize, usize, usize), f64>,
}

impl RowBuf {
    /// Adds `v` times the functional X ↦ X_ij.
    fn entry(&mut self, block: usize, i: usize, j: usize, v: f64) {
        let (i, j) = (i.min(j), i.max(j));
        let w = if i == j { v } else { 0.5 * v };
        *self.entries.entry((block, i, j)).or_insert(0.0) += w;
    }
}

struct Builder {
    blocks: Vec<BlockInfo>,
    a: Vec<Vec<Triplet>>,
    b: Vec<f64>,
    rows: Vec<RowKind>,
}

impl Builder {
    fn push(&mut self, buf: RowBuf, rhs: f64, kind: RowKind) {
        let r = self.b.len() as u32;
        for ((blk, i, j), v) in buf.entries {
            if v != 0.0 {
                let p = &self.blocks[blk].scaling;
                self.a[blk].push(Triplet { row: r, i: i as u32, j: j as u32, val: v / (p[i] * p[j]) });
            }
        }
        self.b.push(rhs);
        self.rows.push(kind);
    }
}

/// Per-group data needed after its own rows are emitted.
struct GroupCtx {
    moment_block: usize,
    map: MomentIndexMap,
}

fn check_group(k: usize, grp: &GroupCertificate, g: &[Polynomial]) -> Result<(), SdpError> {
    if grp.scaling.len() != grp.ineq.len() + 1 {
        return Err(SdpError::Mismatch("scaling block count differs from inequality count".into()));
    }
    let nv = grp.variables.len();
    let sizes = std::iter::once(k).chain(grp.ineq.iter().map(|&i| {
        let d = g.get(i).map(|p| p.half_ceil_degree() as usize).unwrap_or(usize::MAX);
        k.saturating_sub(d)
    }));
    for (b, (d, p)) in sizes.zip(&grp.scaling).enumerate() {
        if basis_size(nv, d)? != p.len() {
            return Err(SdpError::Mismatch(format!("block {} has {} scaling entries, expected {}", b, p.len(), basis_size(nv, d)?)));
        }
    }
    Ok(())
}

fn emit_group(
    bld: &mut Builder,
    pop: &PopInstance,
    k: usize,
    gidx: usize,
    grp: &GroupCertificate,
) -> Result<GroupCtx, SdpError> {
    let vars = &grp.variables;
    let nv = vars.len();
    let local = |p: &Polynomial, what: &str| {
        p.restrict(vars).ok_or_else(|| SdpError::Mismatch(format!("{} uses variables outside group {}", what, gidx + 1)))
    };
    let g: Vec<Polynomial> = grp
        .ineq
        .iter()
        .map(|&i| pop.g.get(i).ok_or_else(|| SdpError::Mismatch(format!("g{} missing", i + 1))).and_then(|p| local(p, "inequality")))
        .collect::<Result<_, _>>()?;
    let h: Vec<Polynomial> = grp
        .eq
        .iter()
        .map(|&j| pop.h.get(j).ok_or_else(|| SdpError::Mismatch(format!("h{} missing", j + 1))).and_then(|p| local(p, "equality")))
        .collect::<Result<_, _>>()?;
    for p in g.iter().chain(&h) {
        if p.half_ceil_degree() as usize > k {
            return Err(SdpError::Mismatch(format!("order {} is below a constraint's half degree", k)));
        }
    }

    let map = MomentIndexMap::new(nv, k)?;
    let mb = bld.blocks.len();
    bld.blocks.push(BlockInfo {
        size: map.basis().len(),
        group: gidx,
        kind: BlockKind::Moment,
        variables: vars.clone(),
        degree: k,
        scaling: grp.scaling[0].clone(),
    });
    bld.a.push(Vec::new());
    let mut loc_bases = Vec::new();
    for (t, (&gi, gp)) in grp.ineq.iter().zip(&g).enumerate() {
        let d = k - gp.half_ceil_degree() as usize;
        let basis = build_basis(nv, d)?;
        bld.blocks.push(BlockInfo {
            size: basis.len(),
            group: gidx,
            kind: BlockKind::Localizing(gi),
            variables: vars.clone(),
            degree: d,
            scaling: grp.scaling[t + 1].clone(),
        });
        bld.a.push(Vec::new());
        loc_bases.push(basis);
    }
    let rep = |m: &Monomial| map.representative(m).expect("moment within order 2k");

    // Hankel rows
    let ms = map.basis().monomials();
    for a in 0..ms.len() {
        for b in a..ms.len() {
            let r = rep(&ms[a].mul(&ms[b]));
            if r != (a, b) {
                let mut buf = RowBuf::default();
                buf.entry(mb, a, b, 1.0);
                buf.entry(mb, r.0, r.1, -1.0);
                bld.push(buf, 0.0, RowKind::Hankel { block: mb, entry: (a, b), rep: r });
            }
        }
    }
    // localizing rows: −X_i[μ,ν] + Σ_γ g_γ y_{μ+ν+γ} = 0
    for (t, (gp, basis)) in g.iter().zip(&loc_bases).enumerate() {
        let blk = mb + 1 + t;
        let lm = basis.monomials();
        for a in 0..lm.len() {
            for b in a..lm.len() {
                let base = lm[a].mul(&lm[b]);
                let mut buf = RowBuf::default();
                buf.entry(blk, a, b, -1.0);
                for (gm, c) in gp.terms() {
                    let (p, q) = rep(&base.mul(gm));
                    buf.entry(mb, p, q, c);
                }
                bld.push(buf, 0.0, RowKind::Localizing { block: blk, entry: (a, b) });
            }
        }
    }
    // ideal rows: Σ_β h_β y_{β+γ} = 0 for |γ| ≤ 2(k − ⌈h⌉)
    for (e, hp) in h.iter().enumerate() {
        let basis = build_basis(nv, 2 * (k - hp.half_ceil_degree() as usize))?;
        for gamma in basis.monomials() {
            let mut buf = RowBuf::default();
            for (hm, c) in hp.terms() {
                let (p, q) = rep(&gamma.mul(hm));
                buf.entry(mb, p, q, c);
            }
            bld.push(buf, 0.0, RowKind::Ideal { group: gidx, eq: grp.eq[e], gamma: gamma.clone() });
        }
    }
    Ok(GroupCtx { moment_block: mb, map })
}

fn emit_normalization(bld: &mut Builder, gidx: usize, ctx: &GroupCtx) {
    let mut buf = RowBuf::default();
    buf.entry(ctx.moment_block, 0, 0, 1.0);
    bld.push(buf, 1.0, RowKind::Normalization { group: gidx });
}

fn finish(bld: Builder, k: usize, cert: &CtpCertificate, c: BlockSymMatrix) -> StandardSdp {
    let mut groups = Vec::new();
    let mut start = 0;
    for (j, grp) in cert.groups.iter().enumerate() {
        let end = bld.blocks.iter().rposition(|b| b.group == j).map(|p| p + 1).unwrap_or(start);
        groups.push(SdpGroup { trace: grp.trace, blocks: start..end });
        start = end;
    }
    let mut a = bld.a;
    for blk in a.iter_mut() {
        blk.sort_by_key(|t| (t.row, t.i, t.j));
    }
    StandardSdp { order: k, blocks: bld.blocks, groups, c, a, b: bld.b, rows: bld.rows, scaling: None }
}

fn objective(
    pop: &PopInstance,
    cert: &CtpCertificate,
    ctxs: &[GroupCtx],
    blocks: &[BlockInfo],
) -> Result<BlockSymMatrix, SdpError> {
    let mut acc: Vec<BTreeMap<(usize, usize), f64>> = vec![BTreeMap::new(); blocks.len()];
    for (m, c) in pop.f.terms() {
        let supp: Vec<usize> = m.support().iter().map(|&(v, _)| v).collect();
        let gi = cert
            .groups
            .iter()
            .position(|g| supp.iter().all(|v| g.variables.binary_search(v).is_ok()))
            .ok_or_else(|| SdpError::Mismatch(format!("objective monomial {} fits no group", m)))?;
        let local = m.restrict(&cert.groups[gi].variables).expect("support checked");
        let ctx = &ctxs[gi];
        let (p, q) = ctx
            .map
            .representative(&local)
            .ok_or_else(|| SdpError::Mismatch(format!("objective degree exceeds 2k at {}", m)))?;
        let w = if p == q { c } else { 0.5 * c };
        *acc[ctx.moment_block].entry((p, q)).or_insert(0.0) += w;
    }
    let blocks = acc
        .into_iter()
        .zip(blocks)
        .map(|(mp, info)| {
            mp.into_iter()
                .filter(|&(_, v)| v != 0.0)
                .map(|((i, j), v)| (i as u32, j as u32, v / (info.scaling[i] * info.scaling[j])))
                .collect()
        })
        .collect();
    Ok(BlockSymMatrix { blocks })
}

fn empty_builder() -> Builder {
    Builder { blocks: Vec::new(), a: Vec::new(), b: Vec::new(), rows: Vec::new() }
}

/// Dense assembly from a single-group certificate.
pub fn assemble_dense(pop: &PopInstance, k: usize, cert: &CtpCertificate) -> Result<StandardSdp, SdpError> {
    if cert.order != k {
        return Err(SdpError::Mismatch(format!("certificate is for order {}, not {}", cert.order, k)));
    }
    if cert.groups.len() != 1 {
        return Err(SdpError::Mismatch("dense assembly needs a single-group certificate".into()));
    }
    let grp = &cert.groups[0];
    if grp.variables != (0..pop.n).collect::<Vec<_>>()
        || grp.ineq != (0..pop.m()).collect::<Vec<_>>()
        || grp.eq != (0..pop.l()).collect::<Vec<_>>()
    {
        return Err(SdpError::Mismatch("certificate group does not cover the whole problem".into()));
    }
    check_group(k, grp, &pop.g)?;
    let mut bld = empty_builder();
    let ctx = emit_group(&mut bld, pop, k, 0, grp)?;
    emit_normalization(&mut bld, 0, &ctx);
    let c = objective(pop, cert, std::slice::from_ref(&ctx), &bld.blocks)?;
    Ok(finish(bld, k, cert, c))
}

/// Clique-grouped assembly: each clique contributes its own Hankel,
/// localizing, ideal and normalization rows; then every moment shared by
/// several cliques gets |T|−1 consistency rows.
pub fn assemble_cs(pop: &PopInstance, k: usize, cert: &CtpCertificate, cs: &CliqueStructure) -> Result<StandardSdp, SdpError> {
    if cert.order != k {
        return Err(SdpError::Mismatch(format!("certificate is for order {}, not {}", cert.order, k)));
    }
    cs.validate(pop)?;
    if cert.groups.len() != cs.len() {
        return Err(SdpError::Mismatch(format!("{} certificate groups for {} cliques", cert.groups.len(), cs.len())));
    }
    for (j, grp) in cert.groups.iter().enumerate() {
        if grp.variables != cs.cliques[j] || grp.ineq != cs.ineq[j] || grp.eq != cs.eq[j] {
            return Err(SdpError::Mismatch(format!("group {} differs from clique {}", j + 1, j + 1)));
        }
        check_group(k, grp, &pop.g)?;
    }
    let mut bld = empty_builder();
    let mut ctxs = Vec::with_capacity(cs.len());
    for (j, grp) in cert.groups.iter().enumerate() {
        let ctx = emit_group(&mut bld, pop, k, j, grp)?;
        emit_normalization(&mut bld, j, &ctx);
        ctxs.push(ctx);
    }

    // shared moments: supports inside variables that belong to ≥ 2 cliques
    let mut count = vec![0usize; pop.n];
    for cl in &cs.cliques {
        for &v in cl {
            count[v] += 1;
        }
    }
    let mut shared: BTreeMap<(u32, Vec<(usize, u32)>), Vec<usize>> = BTreeMap::new();
    for (j, cl) in cs.cliques.iter().enumerate() {
        let sv: Vec<usize> = cl.iter().copied().filter(|&v| count[v] >= 2).collect();
        if sv.is_empty() {
            continue;
        }
        let basis = build_basis(sv.len(), 2 * k)?;
        for m in basis.monomials().iter().skip(1) {
            let alpha: Vec<(usize, u32)> = m.support().into_iter().map(|(t, e)| (sv[t], e)).collect();
            shared.entry((m.degree(), alpha)).or_default().push(j);
        }
    }
    for ((_, alpha), owners) in shared {
        if owners.len() < 2 {
            continue;
        }
        let locate = |j: usize| {
            let vars = &cs.cliques[j];
            let loc: Vec<(usize, u32)> = alpha.iter().map(|&(v, e)| (vars.binary_search(&v).unwrap(), e)).collect();
            let m = Monomial::from_sparse(vars.len(), &loc);
            let r = ctxs[j].map.representative(&m).expect("shared moment within order");
            (ctxs[j].moment_block, r)
        };
        let (b0, r0) = locate(owners[0]);
        for &o in &owners[1..] {
            let (b1, r1) = locate(o);
            let mut buf = RowBuf::default();
            buf.entry(b0, r0.0, r0.1, 1.0);
            buf.entry(b1, r1.0, r1.1, -1.0);
            bld.push(buf, 0.0, RowKind::Overlap { first: owners[0], other: o, alpha: alpha.clone() });
        }
    }
    let c = objective(pop, cert, &ctxs, &bld.blocks)?;
    Ok(finish(bld, k, cert, c))
}

/// Dense or clique assembly depending on the certificate.
pub fn assemble(pop: &PopInstance, cert: &CtpCertificate, cs: Option<&CliqueStructure>) -> Result<StandardSdp, SdpError> {
    match cs {
        Some(cs) => assemble_cs(pop, cert.order, cert, cs),
        None => assemble_dense(pop, cert.order, cert),
    }
}
