mod args;
mod bench;
mod output;
mod pipeline;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ctp_core::ctpcert::certificate_to_text;
use ctp_core::popmodel::{generate, pop_to_text};
use ctp_core::sdpbuild::sdp_to_text;
use ctp_core::solvers::ProgressRow;

use args::{CertifyArgs, Cli, Command, ExportArgs, Format, GenerateArgs, SolveArgs};
use output::{render_certificate, render_solve, solve_json, SdpSummary, SolveContext};
use pipeline::{build_sdp, load, mode_for, parse_family, prepare, run_solver, spec_for, write_text, CliError};

/// Exit status for a report that stopped before the tolerance was met.
const NOT_CONVERGED: u8 = 4;

fn emit(text: &str, path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {}", e)))
        }
    }
}

fn cmd_generate(a: &GenerateArgs) -> Result<u8, CliError> {
    let spec = spec_for(parse_family(&a.family)?, a.n, a.l, a.u, a.seed);
    let g = generate(&spec)?;
    emit(&pop_to_text(&g.pop, Some(&g.planted)), a.output.as_deref())?;
    Ok(0)
}

fn cmd_certify(a: &CertifyArgs) -> Result<u8, CliError> {
    let mode = mode_for(false);
    let pop = pipeline::load_pop(&a.input)?;
    let p = prepare(pop, a.relax.order, a.relax.cs, a.relax.reformulate)?;
    let cert = pipeline::certificate(&p, &a.relax, mode)?;
    if let Some(path) = &a.output {
        write_text(path, &certificate_to_text(&cert))?;
    }
    emit(&render_certificate(&cert, a.format), None)?;
    Ok(0)
}

fn cmd_export(a: &ExportArgs) -> Result<u8, CliError> {
    let loaded = load(&a.input, false)?;
    let built = build_sdp(loaded, &a.relax, mode_for(false))?;
    emit(&sdp_to_text(&built.sdp), a.output.as_deref())?;
    Ok(0)
}

fn cmd_solve(a: &SolveArgs) -> Result<u8, CliError> {
    let mode = mode_for(a.solver.sequential);
    let loaded = load(&a.input, true)?;
    let n = match &loaded {
        pipeline::Loaded::Pop(p) => Some(p.n),
        pipeline::Loaded::Sdp(_) => None,
    };
    let pipeline::Built { sdp, prepared, certify, assemble } = build_sdp(loaded, &a.relax, mode)?;
    let order = prepared.as_ref().map(|(p, _)| p.k).or(Some(sdp.order)).filter(|&k| k > 0);
    let (_, report) = run_solver(&sdp, &a.solver, a.input.seed, mode)?;
    if !report.all_finite() {
        return Err(CliError::Numerical("solver produced non-finite values".into()));
    }
    let ctx = SolveContext { n, order, sdp: SdpSummary::of(&sdp), certify, assemble };
    if let Some(path) = &a.progress {
        let mut s = format!("{}\n", ProgressRow::CSV_HEADER);
        for row in &report.log {
            s.push_str(&row.to_csv());
            s.push('\n');
        }
        write_text(path, &s)?;
    }
    if let Some(path) = &a.output {
        write_text(path, &format!("{}\n", solve_json(&ctx, &report)))?;
    }
    emit(&render_solve(&ctx, &report, a.format), None)?;
    if report.converged() {
        Ok(0)
    } else {
        if a.format == Format::Human {
            eprintln!("warning: stopped before reaching the tolerance ({})", report.termination);
        }
        Ok(NOT_CONVERGED)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            // clap reports usage errors with 2 and help/version with 0
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Solve(a) => cmd_solve(a),
        Command::ExportSdp(a) => cmd_export(a),
        Command::Bench(a) => bench::cmd_bench(a).and_then(|s| emit(&s, None).map(|_| 0)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
