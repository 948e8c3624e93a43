use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use fluxmap::genlib::{parse_genlib, BuiltinParams};
use fluxmap::mapped::write_mapped_blif;
use fluxmap::netlist::parse_blif;
use fluxmap::peephole::PeepholeConfig;
use fluxmap::pipeline::{map_netlist, verify_mapping, MapConfig};
use fluxmap::report::write_run_report;

/// Map a combinational BLIF netlist onto an SFQ cell library with
/// path-balancing DFFs and splitter trees.
#[derive(Parser, Debug)]
#[command(name = "fluxmap", version)]
struct Args {
    /// Input netlist (BLIF subset).
    #[arg(long)]
    input: PathBuf,
    /// Cell library (genlib subset).
    #[arg(long)]
    lib: PathBuf,
    /// Mapped BLIF destination; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report destination; standard error when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// PSD tuning iterations.
    #[arg(short = 'i', default_value_t = 5)]
    iterations: usize,
    /// Cut size (2..=6); defaults to min(6, widest library gate).
    #[arg(short = 'k')]
    cut_size: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    dff_delay: f64,
    #[arg(long, default_value_t = 1.0)]
    dff_area: f64,
    #[arg(long, default_value_t = 1.0)]
    splitter_delay: f64,
    #[arg(long, default_value_t = 1.0)]
    splitter_area: f64,
    /// Also align all primary outputs to the same level.
    #[arg(long)]
    balance_outputs: bool,
    /// Depth-optimal mapping with area tie-break that ignores balancing.
    #[arg(long)]
    baseline: bool,
    /// Check balance, splitter legality and equivalence before writing.
    #[arg(long)]
    verify: bool,
}

fn run(args: &Args) -> Result<(), String> {
    let read = |p: &PathBuf| fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
    let blif = read(&args.input)?;
    let genlib = read(&args.lib)?;
    let raw = parse_blif(&blif).map_err(|e| format!("{}: {e}", args.input.display()))?;
    let params = BuiltinParams {
        dff_delay: args.dff_delay,
        dff_area: args.dff_area,
        splitter_delay: args.splitter_delay,
        splitter_area: args.splitter_area,
    };
    let lib = parse_genlib(&genlib, params).map_err(|e| format!("{}: {e}", args.lib.display()))?;
    let cfg = MapConfig {
        cut_size: args.cut_size,
        peephole: PeepholeConfig::with_iterations(args.iterations),
        balance_outputs: args.balance_outputs,
        baseline: args.baseline,
        ..MapConfig::default()
    };
    let outcome = map_netlist(&raw, &lib, &cfg).map_err(|e| e.to_string())?;
    if args.verify {
        verify_mapping(&raw, &outcome.network, &lib).map_err(|e| e.to_string())?;
        log::info!("verification passed");
    }
    let text = write_mapped_blif(&outcome.network, &lib).map_err(|e| e.to_string())?;
    let report = write_run_report(&outcome.run_report(cfg.mode_name()));
    match &args.output {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{text}"),
    }
    match &args.report {
        Some(p) => fs::write(p, report).map_err(|e| format!("{}: {e}", p.display()))?,
        None => eprint!("{report}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
