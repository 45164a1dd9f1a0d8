use std::fmt::Write;

use super::build::CtpLp;
use super::lp::{LpSolution, LpStatus};
use super::CertError;

/// Trace constant and diagonal scaling for one block group (the whole
/// problem when dense, one clique otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupCertificate {
    /// Trace constant a of this group.
    pub trace: f64,
    /// Global indices of the group's variables, increasing.
    pub variables: Vec<usize>,
    /// Global indices of the inequalities whose localizing blocks follow the
    /// moment block, in block order.
    pub ineq: Vec<usize>,
    /// Global indices of the equalities handled by this group.
    pub eq: Vec<usize>,
    /// Diagonal of P per block: moment block first, then one per `ineq`.
    pub scaling: Vec<Vec<f64>>,
    /// Coefficients of the ideal multipliers, one vector per `eq`, over the
    /// graded-lex basis of degree 2(k − ⌈h_j⌉). Empty vectors mean zero.
    pub ideal: Vec<Vec<f64>>,
}

impl GroupCertificate {
    /// Diagonals of G = P².
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.scaling.iter().map(|b| b.iter().map(|p| p * p).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CtpCertificate {
    pub order: usize,
    pub groups: Vec<GroupCertificate>,
}

impl CtpCertificate {
    /// Largest trace constant over the groups (a^max in the tables).
    pub fn max_trace(&self) -> f64 {
        self.groups.iter().map(|g| g.trace).fold(0.0, f64::max)
    }

    pub fn is_dense(&self) -> bool {
        self.groups.len() == 1
    }
}

pub const GRAM_TOL: f64 = 1e-9;

/// a = ξ*, P = diag(√G).
pub fn group_from_lp(
    lp: &CtpLp,
    sol: &LpSolution,
    variables: Vec<usize>,
    ineq: Vec<usize>,
    eq: Vec<usize>,
) -> Result<GroupCertificate, CertError> {
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(CertError::Infeasible { group: 0, phase1: sol.phase1_objective }),
        LpStatus::Unbounded => return Err(CertError::Unbounded),
    }
    let xi = sol.x[0];
    if !(xi > 0.0) {
        return Err(CertError::InvalidSolution(format!("trace constant {} is not positive", xi)));
    }
    let mut scaling = Vec::with_capacity(lp.gram_cols.len());
    for r in &lp.gram_cols {
        let mut block = Vec::with_capacity(r.len());
        for c in r.clone() {
            let gv = sol.x[c];
            if gv < 1.0 - GRAM_TOL {
                return Err(CertError::InvalidSolution(format!("Gram diagonal entry {} below 1", gv)));
            }
            block.push(gv.max(1.0).sqrt());
        }
        scaling.push(block);
    }
    let ideal = lp.ideal_cols.iter().map(|r| sol.x[r.clone()].to_vec()).collect();
    Ok(GroupCertificate { trace: xi, variables, ineq, eq, scaling, ideal })
}

fn list(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{:.16e}", x)).collect::<Vec<_>>().join(" ")
}

/// Text form: one header, then per group a `group` line followed by `P`
/// lines (one per block) and `U` lines (one per equality). Values carry 17
/// significant digits so parsing recovers them exactly.
pub fn certificate_to_text(cert: &CtpCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "ctp k={} groups={}", cert.order, cert.groups.len());
    for (j, g) in cert.groups.iter().enumerate() {
        let _ = writeln!(
            s,
            "group {} a={:.16e} vars={} ineq={} eq={}",
            j + 1,
            g.trace,
            list(&g.variables),
            list(&g.ineq),
            list(&g.eq)
        );
        for (b, p) in g.scaling.iter().enumerate() {
            let _ = writeln!(s, "P {} {}", b, floats(p));
        }
        for (e, u) in g.ideal.iter().enumerate() {
            let _ = writeln!(s, "U {} {}", e + 1, floats(u));
        }
    }
    s
}

pub fn certificate_from_text(text: &str) -> Result<CtpCertificate, CertError> {
    let bad = |line: usize, msg: &str| CertError::Parse(format!("line {}: {}", line, msg));
    let mut order = None;
    let mut groups: Vec<GroupCertificate> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut toks = t.split_whitespace();
        let head = toks.next().unwrap();
        let kv = |tok: &str, key: &str| tok.strip_prefix(key).map(|s| s.to_string());
        let idx = |s: &str| -> Result<Vec<usize>, CertError> {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(',')
                .map(|x| x.parse::<usize>().ok().filter(|&v| v >= 1).map(|v| v - 1).ok_or_else(|| bad(line, "bad index")))
                .collect()
        };
        let nums = |it: std::str::SplitWhitespace| -> Result<Vec<f64>, CertError> {
            it.map(|x| x.parse::<f64>().map_err(|_| bad(line, "bad number"))).collect()
        };
        match head {
            "ctp" => {
                for tok in toks {
                    if let Some(v) = kv(tok, "k=") {
                        order = Some(v.parse::<usize>().map_err(|_| bad(line, "bad k"))?);
                    }
                }
            }
            "group" => {
                let _ = toks.next();
                let mut g = GroupCertificate {
                    trace: f64::NAN,
                    variables: vec![],
                    ineq: vec![],
                    eq: vec![],
                    scaling: vec![],
                    ideal: vec![],
                };
                for tok in toks {
                    if let Some(v) = kv(tok, "a=") {
                        g.trace = v.parse().map_err(|_| bad(line, "bad a"))?;
                    } else if let Some(v) = kv(tok, "vars=") {
                        g.variables = idx(&v)?;
                    } else if let Some(v) = kv(tok, "ineq=") {
                        g.ineq = idx(&v)?;
                    } else if let Some(v) = kv(tok, "eq=") {
                        g.eq = idx(&v)?;
                    } else {
                        return Err(bad(line, "unknown group field"));
                    }
                }
                groups.push(g);
            }
            "P" | "U" => {
                let g = groups.last_mut().ok_or_else(|| bad(line, "block before group"))?;
                let _ = toks.next();
                let v = nums(toks)?;
                if head == "P" {
                    g.scaling.push(v);
                } else {
                    g.ideal.push(v);
                }
            }
            _ => return Err(bad(line, "unknown record")),
        }
    }
    let order = order.ok_or_else(|| CertError::Parse("missing 'ctp k=' header".into()))?;
    for g in &groups {
        if !(g.trace > 0.0) || g.scaling.len() != g.ineq.len() + 1 || g.scaling.iter().flatten().any(|p| !(*p > 0.0)) {
            return Err(CertError::Parse("group has non-positive trace, scaling or wrong block count".into()));
        }
    }
    Ok(CtpCertificate { order, groups })
}
