use std::time::Instant;

use ctp_core::par::{map_range, Parallelism};
use ctp_core::popmodel::{generate, Family};
use ctp_core::solvers::SolverReport;
use serde_json::{json, Map, Value};

use crate::args::{BenchArgs, Format, RelaxArgs, SolverArgs, SolverChoice};
use crate::output::SdpSummary;
use crate::pipeline::{build_sdp, parse_family, run_solver, spec_for, CliError, Loaded};

struct Instance {
    family: Family,
    n: usize,
    seed: u64,
}

struct Row {
    family: Family,
    n: usize,
    l: usize,
    u: Option<usize>,
    seed: u64,
    /// Cliques and largest clique when decomposed.
    p: usize,
    u_max: usize,
    sdp: Option<SdpSummary>,
    /// (value, seconds) per solver; NaN when the solver failed.
    solves: Vec<(f64, f64)>,
    note: String,
}

fn solver_name(s: SolverChoice) -> &'static str {
    match s {
        SolverChoice::Cgal => "cgal",
        SolverChoice::Spectral => "spectral",
    }
}

fn note_of(name: &str, r: &SolverReport) -> Option<String> {
    (!r.converged()).then(|| format!("{}: {}", name, r.termination))
}

fn run_instance(args: &BenchArgs, inst: &Instance, mode: Parallelism) -> Row {
    let spec = spec_for(inst.family, inst.n, args.l, args.u, inst.seed);
    let mut row = Row {
        family: inst.family,
        n: inst.n,
        l: spec.l.unwrap_or_else(|| inst.family.default_l(inst.n)),
        u: args.u,
        seed: inst.seed,
        p: 1,
        u_max: inst.n,
        sdp: None,
        solves: vec![(f64::NAN, f64::NAN); args.solvers.len()],
        note: String::new(),
    };
    let pop = match generate(&spec) {
        Ok(g) => g.pop,
        Err(e) => {
            row.note = e.to_string();
            return row;
        }
    };
    let relax = RelaxArgs {
        order: args.order,
        cs: args.cs && inst.family.is_sparse(),
        reformulate: None,
        method: args.method,
        cert: None,
    };
    let built = build_sdp(Loaded::Pop(pop), &relax, mode);
    let (sdp, prepared) = match built {
        Ok(b) => (b.sdp, b.prepared),
        Err(e) => {
            row.note = e.message().lines().next().unwrap_or("").to_string();
            return row;
        }
    };
    if let Some((p, _)) = &prepared {
        if let Some(cs) = &p.cs {
            row.p = cs.len();
            row.u_max = cs.max_clique();
        }
    }
    row.sdp = Some(SdpSummary::of(&sdp));
    let mut notes = Vec::new();
    for (i, &s) in args.solvers.iter().enumerate() {
        let sargs = SolverArgs {
            solver: s,
            eps: args.eps,
            cap_k: args.cap_k,
            max_iter: args.max_iter,
            implicit: args.implicit,
            sequential: true,
        };
        let t = Instant::now();
        match run_solver(&sdp, &sargs, inst.seed, mode) {
            Ok((_, r)) => {
                row.solves[i] = (r.value, t.elapsed().as_secs_f64());
                notes.extend(note_of(solver_name(s), &r));
            }
            Err(e) => notes.push(format!("{}: {}", solver_name(s), e.message())),
        }
    }
    row.note = notes.join("; ");
    row
}

fn header(solvers: &[SolverChoice]) -> Vec<String> {
    let mut h: Vec<String> =
        ["family", "n", "l", "u", "seed", "p", "u_max", "omega", "s_max", "zeta", "a_max"].iter().map(|s| s.to_string()).collect();
    for &s in solvers {
        h.push(format!("{}_val", solver_name(s)));
        h.push(format!("{}_time", solver_name(s)));
    }
    h.push("note".into());
    h
}

fn cells(row: &Row) -> Vec<String> {
    let mut c = vec![
        row.family.to_string(),
        row.n.to_string(),
        row.l.to_string(),
        row.u.map(|u| u.to_string()).unwrap_or_default(),
        row.seed.to_string(),
        row.p.to_string(),
        row.u_max.to_string(),
    ];
    match &row.sdp {
        Some(s) => {
            c.extend([s.omega.to_string(), s.s_max.to_string(), s.zeta.to_string(), format!("{}", s.a_max())]);
        }
        None => c.extend(std::iter::repeat_n(String::new(), 4)),
    }
    for &(v, t) in &row.solves {
        c.push(if v.is_nan() { String::new() } else { format!("{:.6}", v) });
        c.push(if t.is_nan() { String::new() } else { format!("{:.3}", t) });
    }
    c.push(row.note.replace(',', ";"));
    c
}

fn row_json(head: &[String], row: &Row) -> Value {
    let mut m = Map::new();
    for (h, v) in head.iter().zip(cells(row)) {
        let val = match v.parse::<f64>() {
            Ok(x) if h != "family" && h != "note" => json!(x),
            _ if v.is_empty() && h != "note" => Value::Null,
            _ => json!(v),
        };
        m.insert(h.clone(), val);
    }
    Value::Object(m)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<String, CliError> {
    let families = args.family.iter().map(|f| parse_family(f)).collect::<Result<Vec<_>, _>>()?;
    let mut grid = Vec::new();
    for &family in &families {
        for &n in &args.n {
            for r in 0..args.repeats {
                grid.push(Instance { family, n, seed: args.seed + r });
            }
        }
    }
    // instances in parallel, each solve on one thread; rows stay in grid order
    let outer = if args.sequential { Parallelism::Sequential } else { Parallelism::default() };
    let rows = map_range(outer, grid.len(), |i| run_instance(args, &grid[i], Parallelism::Sequential));

    let head = header(&args.solvers);
    let mut out = String::new();
    match args.format {
        Format::Csv => {
            out.push_str(&head.join(","));
            out.push('\n');
            for r in &rows {
                out.push_str(&cells(r).join(","));
                out.push('\n');
            }
        }
        Format::JsonLines => {
            for r in &rows {
                out.push_str(&format!("{}\n", row_json(&head, r)));
            }
        }
        Format::Human => {
            let table: Vec<Vec<String>> = std::iter::once(head.clone()).chain(rows.iter().map(cells)).collect();
            let widths: Vec<usize> = (0..head.len()).map(|j| table.iter().map(|r| r[j].len()).max().unwrap_or(0)).collect();
            for r in &table {
                let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{:>w$}", c, w = w)).collect();
                out.push_str(line.join("  ").trim_end());
                out.push('\n');
            }
        }
    }
    Ok(out)
}
