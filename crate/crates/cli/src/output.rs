use std::time::Duration;

use ctp_core::ctpcert::CtpCertificate;
use ctp_core::sdpbuild::StandardSdp;
use ctp_core::solvers::SolverReport;
use serde_json::{json, Value};

use crate::args::Format;

/// Sizes of an SDP as reported in the tables.
pub struct SdpSummary {
    pub omega: usize,
    pub s_max: usize,
    pub zeta: usize,
    pub groups: usize,
    pub a: Vec<f64>,
}

impl SdpSummary {
    pub fn of(sdp: &StandardSdp) -> Self {
        SdpSummary {
            omega: sdp.blocks.len(),
            s_max: sdp.max_block(),
            zeta: sdp.zeta(),
            groups: sdp.groups.len(),
            a: sdp.groups.iter().map(|g| g.trace).collect(),
        }
    }

    pub fn a_max(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max)
    }
}

pub struct SolveContext {
    pub n: Option<usize>,
    pub order: Option<usize>,
    pub sdp: SdpSummary,
    pub certify: Duration,
    pub assemble: Duration,
}

pub fn solve_json(ctx: &SolveContext, r: &SolverReport) -> Value {
    json!({
        "solver": r.solver.to_string(),
        "n": ctx.n,
        "order": ctx.order,
        "groups": ctx.sdp.groups,
        "omega": ctx.sdp.omega,
        "s_max": ctx.sdp.s_max,
        "zeta": ctx.sdp.zeta,
        "a": ctx.sdp.a,
        "a_max": ctx.sdp.a_max(),
        "value": r.value,
        "primal": r.primal,
        "dual": r.dual,
        "feasibility": r.feasibility,
        "gap": r.gap,
        "iterations": r.iterations,
        "termination": r.termination.to_string(),
        "recovered_feasibility": r.recovery.as_ref().map(|x| x.feasibility),
        "time_certify": ctx.certify.as_secs_f64(),
        "time_assemble": ctx.assemble.as_secs_f64(),
        "time_solve": r.timing.total.as_secs_f64(),
    })
}

const SOLVE_CSV: &str =
    "solver,n,order,groups,omega,s_max,zeta,a_max,value,primal,dual,feasibility,gap,iterations,termination,time_certify,time_assemble,time_solve";

fn opt(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_solve(ctx: &SolveContext, r: &SolverReport, format: Format) -> String {
    match format {
        Format::JsonLines => format!("{}\n", solve_json(ctx, r)),
        Format::Csv => format!(
            "{}\n{},{},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{:.6},{:.6},{:.6}\n",
            SOLVE_CSV,
            r.solver,
            opt(ctx.n),
            opt(ctx.order),
            ctx.sdp.groups,
            ctx.sdp.omega,
            ctx.sdp.s_max,
            ctx.sdp.zeta,
            ctx.sdp.a_max(),
            r.value,
            r.primal,
            r.dual,
            r.feasibility,
            r.gap,
            r.iterations,
            r.termination,
            ctx.certify.as_secs_f64(),
            ctx.assemble.as_secs_f64(),
            r.timing.total.as_secs_f64()
        ),
        Format::Human => {
            let mut s = String::new();
            let a: Vec<String> = ctx.sdp.a.iter().map(|v| format!("{}", v)).collect();
            s.push_str(&format!(
                "relaxation   k={} blocks={} s_max={} zeta={} groups={} a={}\n",
                opt(ctx.order),
                ctx.sdp.omega,
                ctx.sdp.s_max,
                ctx.sdp.zeta,
                ctx.sdp.groups,
                a.join(",")
            ));
            s.push_str(&format!("solver       {} ({} after {} iterations)\n", r.solver, r.termination, r.iterations));
            s.push_str(&format!("value        {:.8}\n", r.value));
            s.push_str(&format!("primal/dual  {:.8} / {:.8}\n", r.primal, r.dual));
            s.push_str(&format!("feasibility  {:.3e}   gap {:.3e}\n", r.feasibility, r.gap));
            if let Some(rec) = &r.recovery {
                s.push_str(&format!("recovered X  rank {:?}, feasibility {:.3e}\n", rec.rank, rec.feasibility));
            }
            s.push_str(&format!(
                "time         certify {:.3}s  assemble {:.3}s  solve {:.3}s\n",
                ctx.certify.as_secs_f64(),
                ctx.assemble.as_secs_f64(),
                r.timing.total.as_secs_f64()
            ));
            s
        }
    }
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

pub fn render_certificate(cert: &CtpCertificate, format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Human => {
            s.push_str(&format!("order k={}  groups={}  a_max={}\n", cert.order, cert.groups.len(), cert.max_trace()));
            for (j, g) in cert.groups.iter().enumerate() {
                s.push_str(&format!("group {}  a={}  variables={}\n", j + 1, g.trace, g.variables.len()));
                for (b, p) in g.scaling.iter().enumerate() {
                    let (lo, hi) = range(p);
                    let what = if b == 0 { "moment".to_string() } else { format!("g{}", g.ineq[b - 1] + 1) };
                    s.push_str(&format!("  P[{}] {:<8} size {:>5}  min {:.6}  max {:.6}\n", b, what, p.len(), lo, hi));
                }
            }
        }
        Format::Csv => {
            s.push_str("group,a,variables,block,size,p_min,p_max\n");
            for (j, g) in cert.groups.iter().enumerate() {
                for (b, p) in g.scaling.iter().enumerate() {
                    let (lo, hi) = range(p);
                    s.push_str(&format!("{},{:e},{},{},{},{:e},{:e}\n", j + 1, g.trace, g.variables.len(), b, p.len(), lo, hi));
                }
            }
        }
        Format::JsonLines => {
            for (j, g) in cert.groups.iter().enumerate() {
                let blocks: Vec<Value> = g
                    .scaling
                    .iter()
                    .map(|p| {
                        let (lo, hi) = range(p);
                        json!({"size": p.len(), "p_min": lo, "p_max": hi})
                    })
                    .collect();
                let v = json!({"group": j + 1, "order": cert.order, "a": g.trace, "variables": g.variables.len(), "blocks": blocks});
                s.push_str(&format!("{}\n", v));
            }
        }
    }
    s
}
