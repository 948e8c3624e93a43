//! The full mapping flow: subject graph, cuts, depth/DFF program, cover
//! recovery, balancing, splitters, then PSD tuning.

use std::time::Instant;

use log::info;

use crate::balance::{check_balanced, check_splitters, required_dffs};
use crate::cuts::{enumerate_cuts, CutParams};
use crate::dp::{minimize_depth_pb, recover_cover, DpParams};
use crate::error::MapError;
use crate::genlib::CellLibrary;
use crate::mapped::MappedNetwork;
use crate::matcher::Matcher;
use crate::netlist::RawNetlist;
use crate::oracle::{check_equivalence, Equivalence, Simulate, WithLibrary};
use crate::peephole::{finish, tune_cover, PeepholeConfig, RemapContext, StageDelayModel};
use crate::report::{MapStats, RunReport};
use crate::subject::{build_subject_graph, SubjectGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    /// Cut size; `None` uses `min(6, widest gate)`.
    pub cut_size: Option<usize>,
    pub max_cuts: Option<usize>,
    pub peephole: PeepholeConfig,
    pub balance_outputs: bool,
    /// Depth first, area second, balancing ignored.
    pub baseline: bool,
    /// Override of the level window of the default mode (see [`DpParams`]);
    /// `None` keeps [`DpParams::DEFAULT_SLACK`].
    pub level_slack: Option<u32>,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            cut_size: None,
            max_cuts: Some(CutParams::DEFAULT_MAX_CUTS),
            peephole: PeepholeConfig::default(),
            balance_outputs: false,
            baseline: false,
            level_slack: None,
        }
    }
}

impl MapConfig {
    pub fn dp_params(&self) -> DpParams {
        let mut p = if self.baseline {
            DpParams::baseline()
        } else {
            DpParams::sfq()
        };
        if !self.baseline && self.level_slack.is_some() {
            p.level_slack = self.level_slack;
        }
        p.balance_outputs = self.balance_outputs;
        p
    }

    pub fn mode_name(&self) -> &'static str {
        if self.baseline {
            "baseline"
        } else {
            "sfq"
        }
    }
}

#[derive(Debug, Clone)]
pub struct MapOutcome {
    /// Balanced, splitter-legal network before PSD tuning.
    pub phase1: MappedNetwork,
    pub phase1_stats: MapStats,
    /// Network after PSD tuning.
    pub network: MappedNetwork,
    pub stats: MapStats,
    pub cut_size: usize,
    pub dropped_cuts: usize,
    pub balance_dffs: usize,
    pub output_dffs: usize,
    pub accepted_moves: usize,
}

impl MapOutcome {
    pub fn run_report(&self, mode: &'static str) -> RunReport {
        RunReport {
            model: self.network.model_name.clone(),
            mode,
            cut_size: self.cut_size,
            phase1: self.phase1_stats,
            final_stats: self.stats,
            balance_dffs: self.balance_dffs,
            output_dffs: self.output_dffs,
            dropped_cuts: self.dropped_cuts,
            accepted_moves: self.accepted_moves,
        }
    }
}

pub fn resolve_cut_size(lib: &CellLibrary, cut_size: Option<usize>) -> Result<usize, MapError> {
    let k = cut_size.unwrap_or_else(|| lib.default_cut_size());
    if !(2..=6).contains(&k) {
        return Err(MapError::BadCutSize(k));
    }
    Ok(k)
}

/// Map a parsed netlist.
pub fn map_netlist(raw: &RawNetlist, lib: &CellLibrary, cfg: &MapConfig) -> Result<MapOutcome, MapError> {
    let start = Instant::now();
    let graph = build_subject_graph(raw);
    map_graph_from(&graph, lib, cfg, start)
}

/// Map a subject graph directly.
pub fn map_graph(graph: &SubjectGraph, lib: &CellLibrary, cfg: &MapConfig) -> Result<MapOutcome, MapError> {
    map_graph_from(graph, lib, cfg, Instant::now())
}

fn map_graph_from(
    graph: &SubjectGraph,
    lib: &CellLibrary,
    cfg: &MapConfig,
    start: Instant,
) -> Result<MapOutcome, MapError> {
    let k = resolve_cut_size(lib, cfg.cut_size)?;
    let cuts = enumerate_cuts(
        graph,
        CutParams {
            k,
            max_cuts: cfg.max_cuts,
        },
    );
    if cuts.dropped > 0 {
        info!("cut cap dropped {} cuts", cuts.dropped);
    }
    let matcher = Matcher::new(lib);
    let table = minimize_depth_pb(graph, &cuts, lib, &matcher, cfg.dp_params())?;
    let cover = recover_cover(&table, graph, &cuts, lib, graph.model_name())?;
    let model = StageDelayModel::from_library(lib);
    let phase1 = finish(&cover, cfg.balance_outputs);
    let phase1_stats = MapStats::measure(&phase1, lib, &model, start.elapsed().as_secs_f64(), 0);
    info!(
        "phase 1: depth {} dffs {} psd {}",
        phase1_stats.logical_depth, phase1_stats.dff_count, phase1_stats.psd
    );
    let ctx = RemapContext {
        graph,
        cuts: &cuts,
        lib,
        table: &table,
        model,
        balance_outputs: cfg.balance_outputs,
    };
    let tuned = tune_cover(&cover, &ctx, &cfg.peephole);
    let (balance_dffs, output_dffs) = required_dffs(&tuned.cover, cfg.balance_outputs);
    let runtime = |s: MapStats| MapStats {
        runtime_s: start.elapsed().as_secs_f64(),
        iterations: tuned.iterations,
        ..s
    };
    // an unchanged cover balances to the phase 1 network
    let (network, stats) = if tuned.changed {
        let network = finish(&tuned.cover, cfg.balance_outputs);
        let stats = MapStats::measure(&network, lib, &model, 0.0, 0);
        (network, runtime(stats))
    } else {
        (phase1.clone(), runtime(phase1_stats))
    };
    info!(
        "final: depth {} dffs {} psd {}",
        stats.logical_depth, stats.dff_count, stats.psd
    );
    Ok(MapOutcome {
        phase1,
        phase1_stats,
        network,
        stats,
        cut_size: k,
        dropped_cuts: cuts.dropped,
        balance_dffs,
        output_dffs,
        accepted_moves: tuned.accepted,
    })
}

/// Structural and functional check of a mapped network against its source.
pub fn verify_mapping(source: &dyn Simulate, net: &MappedNetwork, lib: &CellLibrary) -> Result<(), MapError> {
    let unbalanced = check_balanced(net, net.outputs_balanced);
    if !unbalanced.is_empty() {
        return Err(MapError::Unverified(format!("{} unbalanced cells", unbalanced.len())));
    }
    if let Some(v) = check_splitters(net).into_iter().next() {
        return Err(MapError::Unverified(v));
    }
    match check_equivalence(source, &WithLibrary(net, lib))? {
        Equivalence::Equivalent { .. } => Ok(()),
        Equivalence::Counterexample { output, pattern } => Err(MapError::NotEquivalent {
            output,
            pattern: pattern
                .iter()
                .map(|(n, v)| format!("{n}={}", *v as u8))
                .collect::<Vec<_>>()
                .join(" "),
        }),
    }
}
