//! Line-oriented POP format.
//!
//! ```text
//! pop n=2
//! min x1 + x2
//! st 1 - x1^2 - x2^2 >= 0
//! st x1*x2 - 0.25 == 0
//! ```
//!
//! Blank lines and `#` comments are ignored, except `# planted <values>`
//! which records a known feasible point. Optional
//! `clique vars=1,2 ineq=1 eq=` lines (1-based) fix a clique structure.

use std::fmt::Write;

use super::{PopError, PopInstance};
use crate::cspattern::CliqueStructure;
use crate::polycore::{parse_polynomial, text::to_text, Polynomial};

#[derive(Clone, Debug)]
pub struct ParsedPop {
    pub pop: PopInstance,
    pub planted: Option<Vec<f64>>,
}

pub fn pop_to_text(pop: &PopInstance, planted: Option<&[f64]>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "pop n={}", pop.n);
    if let Some(a) = planted {
        let vals: Vec<String> = a.iter().map(|v| format!("{:e}", v)).collect();
        let _ = writeln!(s, "# planted {}", vals.join(" "));
    }
    let _ = writeln!(s, "min {}", to_text(&pop.f));
    for g in &pop.g {
        let _ = writeln!(s, "st {} >= 0", to_text(g));
    }
    for h in &pop.h {
        let _ = writeln!(s, "st {} == 0", to_text(h));
    }
    if let Some(cs) = &pop.cliques {
        let list = |v: &[usize]| v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
        for j in 0..cs.cliques.len() {
            let _ = writeln!(
                s,
                "clique vars={} ineq={} eq={}",
                list(&cs.cliques[j]),
                list(&cs.ineq[j]),
                list(&cs.eq[j])
            );
        }
    }
    s
}

fn index_list(line: usize, txt: &str) -> Result<Vec<usize>, PopError> {
    if txt.is_empty() {
        return Ok(Vec::new());
    }
    txt.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(PopError::Parse { line, msg: format!("bad index '{}'", t) }),
        })
        .collect()
}

pub fn parse_pop(text: &str) -> Result<ParsedPop, PopError> {
    let mut n: Option<usize> = None;
    let mut f: Option<Polynomial> = None;
    let mut g = Vec::new();
    let mut h = Vec::new();
    let mut planted = None;
    let mut cliques = CliqueStructure::default();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            if let Some(vals) = rest.trim().strip_prefix("planted") {
                let pt = vals
                    .split_whitespace()
                    .map(|v| v.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| PopError::Parse { line, msg: format!("planted point: {}", e) })?;
                planted = Some(pt);
            }
            continue;
        }
        let perr = |msg: String| PopError::Parse { line, msg };
        if let Some(rest) = t.strip_prefix("pop") {
            let v = rest.trim().strip_prefix("n=").ok_or_else(|| perr("expected 'pop n=<int>'".into()))?;
            let nn: usize = v.trim().parse().map_err(|_| perr(format!("bad n '{}'", v)))?;
            if nn == 0 {
                return Err(perr("n must be positive".into()));
            }
            n = Some(nn);
            continue;
        }
        let nn = n.ok_or_else(|| perr("missing 'pop n=<int>' header".into()))?;
        let poly = |s: &str| parse_polynomial(nn, s).map_err(|e| perr(e.to_string()));
        if let Some(rest) = t.strip_prefix("min ") {
            if f.is_some() {
                return Err(perr("duplicate objective".into()));
            }
            f = Some(poly(rest)?);
        } else if let Some(rest) = t.strip_prefix("st ") {
            if let Some(lhs) = rest.strip_suffix(">= 0") {
                g.push(poly(lhs)?);
            } else if let Some(lhs) = rest.strip_suffix("== 0") {
                h.push(poly(lhs)?);
            } else {
                return Err(perr("constraint must end with '>= 0' or '== 0'".into()));
            }
        } else if let Some(rest) = t.strip_prefix("clique ") {
            let mut vars = None;
            let mut ineq = Vec::new();
            let mut eq = Vec::new();
            for tok in rest.split_whitespace() {
                if let Some(v) = tok.strip_prefix("vars=") {
                    vars = Some(index_list(line, v)?);
                } else if let Some(v) = tok.strip_prefix("ineq=") {
                    ineq = index_list(line, v)?;
                } else if let Some(v) = tok.strip_prefix("eq=") {
                    eq = index_list(line, v)?;
                } else {
                    return Err(perr(format!("unknown clique field '{}'", tok)));
                }
            }
            cliques.cliques.push(vars.ok_or_else(|| perr("clique without vars=".into()))?);
            cliques.ineq.push(ineq);
            cliques.eq.push(eq);
        } else {
            return Err(perr(format!("unrecognised line '{}'", t)));
        }
    }
    let n = n.ok_or(PopError::Parse { line: 0, msg: "missing header".into() })?;
    let f = f.unwrap_or_else(|| Polynomial::zero(n));
    let mut pop = PopInstance::new(f, g, h)?;
    if !cliques.cliques.is_empty() {
        cliques.validate(&pop).map_err(|e| PopError::Parse { line: 0, msg: e.to_string() })?;
        pop.cliques = Some(cliques);
    }
    if let Some(p) = &planted {
        if p.len() != n {
            return Err(PopError::Parse { line: 0, msg: format!("planted point has {} entries, n={}", p.len(), n) });
        }
    }
    Ok(ParsedPop { pop, planted })
}
