use std::fmt::Write;

use super::{BlockInfo, BlockKind, BlockSymMatrix, RowKind, SdpError, SdpGroup, StandardSdp, Triplet};

fn join<T: ToString>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Sparse text form. Indices are 0-based; each entry (i ≤ j) stands for
/// both symmetric positions. Values use the shortest round-trip notation.
pub fn sdp_to_text(sdp: &StandardSdp) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "sdp blocks={} zeta={} trace={:e}", join(sdp.sizes()), sdp.zeta(), sdp.total_trace());
    for (j, g) in sdp.groups.iter().enumerate() {
        let _ = writeln!(s, "group {} trace={:e} blocks={}", j, g.trace, join(g.blocks.clone()));
    }
    for (b, es) in sdp.c.blocks.iter().enumerate() {
        for &(i, j, v) in es {
            let _ = writeln!(s, "C {} {} {} {:e}", b, i, j, v);
        }
    }
    // row-major order
    let mut all: Vec<(u32, usize, u32, u32, f64)> =
        sdp.a.iter().enumerate().flat_map(|(b, es)| es.iter().map(move |t| (t.row, b, t.i, t.j, t.val))).collect();
    all.sort_by_key(|e| (e.0, e.1, e.2, e.3));
    for (r, b, i, j, v) in all {
        let _ = writeln!(s, "A {} {} {} {} {:e}", r, b, i, j, v);
    }
    for (r, v) in sdp.b.iter().enumerate() {
        if *v != 0.0 {
            let _ = writeln!(s, "b {} {:e}", r, v);
        }
    }
    s
}

pub fn sdp_from_text(text: &str) -> Result<StandardSdp, SdpError> {
    let bad = |line: usize, msg: &str| SdpError::Parse(format!("line {}: {}", line + 1, msg));
    let mut sizes: Option<Vec<usize>> = None;
    let mut zeta = 0usize;
    let mut groups: Vec<SdpGroup> = Vec::new();
    let mut c = BlockSymMatrix::default();
    let mut a: Vec<Vec<Triplet>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
        let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad index"));
        match toks[0] {
            "sdp" => {
                for tok in &toks[1..] {
                    if let Some(v) = tok.strip_prefix("blocks=") {
                        let sz = if v.is_empty() { vec![] } else { v.split(',').map(idx).collect::<Result<Vec<_>, _>>()? };
                        c.blocks = vec![Vec::new(); sz.len()];
                        a = vec![Vec::new(); sz.len()];
                        sizes = Some(sz);
                    } else if let Some(v) = tok.strip_prefix("zeta=") {
                        zeta = idx(v)?;
                        b = vec![0.0; zeta];
                    }
                }
            }
            "group" => {
                let mut trace = None;
                let mut blocks = None;
                for tok in &toks[2..] {
                    if let Some(v) = tok.strip_prefix("trace=") {
                        trace = Some(num(v)?);
                    } else if let Some(v) = tok.strip_prefix("blocks=") {
                        let bl = v.split(',').map(idx).collect::<Result<Vec<_>, _>>()?;
                        let (lo, hi) = (bl[0], bl[bl.len() - 1] + 1);
                        if bl != (lo..hi).collect::<Vec<_>>() {
                            return Err(bad(ln, "group blocks must be consecutive"));
                        }
                        blocks = Some(lo..hi);
                    }
                }
                match (trace, blocks) {
                    (Some(trace), Some(blocks)) => groups.push(SdpGroup { trace, blocks }),
                    _ => return Err(bad(ln, "group needs trace= and blocks=")),
                }
            }
            "C" | "A" | "b" => {
                let sz = sizes.as_ref().ok_or_else(|| bad(ln, "entry before header"))?;
                let want = match toks[0] {
                    "C" => 5,
                    "A" => 6,
                    _ => 3,
                };
                if toks.len() != want {
                    return Err(bad(ln, "wrong field count"));
                }
                if toks[0] == "b" {
                    let r = idx(toks[1])?;
                    *b.get_mut(r).ok_or_else(|| bad(ln, "row out of range"))? = num(toks[2])?;
                    continue;
                }
                let off = if toks[0] == "A" { 1 } else { 0 };
                let row = if off == 1 { idx(toks[1])? } else { 0 };
                let (blk, i, j, v) = (idx(toks[1 + off])?, idx(toks[2 + off])?, idx(toks[3 + off])?, num(toks[4 + off])?);
                if blk >= sz.len() || i > j || j >= sz[blk] || (off == 1 && row >= zeta) {
                    return Err(bad(ln, "entry out of range"));
                }
                if off == 1 {
                    a[blk].push(Triplet { row: row as u32, i: i as u32, j: j as u32, val: v });
                } else {
                    c.blocks[blk].push((i as u32, j as u32, v));
                }
            }
            _ => return Err(bad(ln, "unknown record")),
        }
    }
    let sizes = sizes.ok_or_else(|| SdpError::Parse("missing 'sdp' header".into()))?;
    if groups.is_empty() || groups.iter().map(|g| g.blocks.len()).sum::<usize>() != sizes.len() {
        return Err(SdpError::Parse("groups must cover all blocks".into()));
    }
    let mut blocks = Vec::with_capacity(sizes.len());
    for (gi, g) in groups.iter().enumerate() {
        for bi in g.blocks.clone() {
            blocks.push(BlockInfo {
                size: sizes[bi],
                group: gi,
                kind: BlockKind::Imported,
                variables: Vec::new(),
                degree: 0,
                scaling: vec![1.0; sizes[bi]],
            });
        }
    }
    for blk in a.iter_mut() {
        blk.sort_by_key(|t| (t.row, t.i, t.j));
    }
    Ok(StandardSdp { order: 0, blocks, groups, c, a, b, rows: vec![RowKind::Imported; zeta], scaling: None })
}
