//! Stage delay, PSD and the iterative worst-stage remapper.
//!
//! A stage is one clocked cell plus the splitter tree on its output. PSD,
//! the product of the worst stage delay and the logical depth, estimates
//! input-to-output latency. The tuner works on the unbalanced cover; the
//! balanced network is derived from the final cover, and candidate scores
//! account for the DFF chains and splitter trees it will contain.

mod moves;

use log::debug;

use crate::balance::{dff_chains, insert_splitters, required_dffs, splitter_levels};
use crate::cuts::CutSet;
use crate::dp::MatchTable;
use crate::genlib::CellLibrary;
use crate::mapped::{CellId, CellKind, Driver, MappedNetwork, NetId, Sink};
use crate::subject::SubjectGraph;

pub use moves::replica_counts;
use moves::{plans, CoverState, Plan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageDelayModel {
    pub splitter_delay: f64,
    pub interconnect_delay: f64,
}

impl StageDelayModel {
    pub fn from_library(lib: &CellLibrary) -> Self {
        StageDelayModel {
            splitter_delay: lib.splitter.delay,
            interconnect_delay: 0.0,
        }
    }
}

fn cell_delay(lib: &CellLibrary, kind: CellKind) -> f64 {
    match kind {
        CellKind::Gate(g) => lib.gates[g].delay,
        CellKind::Dff => lib.dff.delay,
        CellKind::Splitter => lib.splitter.delay,
        CellKind::Const(_) => 0.0,
    }
}

/// Splitter levels between a net and its furthest real sink. Before
/// splitter insertion this is `splitter_levels(sinks)`; afterwards it
/// follows the inserted trees.
fn fanout_levels(net: &MappedNetwork, sinks: &[Vec<Sink>], n: NetId) -> u32 {
    let list = &sinks[n];
    let through = list
        .iter()
        .filter_map(|s| match s {
            Sink::Pin(c, _) if net.cells[*c].kind == CellKind::Splitter => Some(
                1 + net.cells[*c]
                    .outputs
                    .iter()
                    .map(|o| fanout_levels(net, sinks, *o))
                    .max()
                    .unwrap_or(0),
            ),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let direct = list.len();
    if direct == 1 {
        through
    } else {
        splitter_levels(direct) + through
    }
}

fn stage_delay_with(
    net: &MappedNetwork,
    lib: &CellLibrary,
    model: &StageDelayModel,
    sinks: &[Vec<Sink>],
    c: CellId,
) -> f64 {
    let cell = &net.cells[c];
    let levels = cell
        .outputs
        .iter()
        .map(|o| fanout_levels(net, sinks, *o))
        .max()
        .unwrap_or(0);
    cell_delay(lib, cell.kind) + levels as f64 * model.splitter_delay + model.interconnect_delay
}

/// Delay of the stage a clocked cell starts: its own delay, the splitter
/// tree on its output and interconnect. `None` for splitters and constants.
pub fn stage_delay(net: &MappedNetwork, lib: &CellLibrary, model: &StageDelayModel, cell: CellId) -> Option<f64> {
    if !net.cells[cell].kind.is_clocked() {
        return None;
    }
    let sinks = net.sinks();
    Some(stage_delay_with(net, lib, model, &sinks, cell))
}

/// Stage delay of every cell (`None` for unclocked cells).
pub fn stage_delays(net: &MappedNetwork, lib: &CellLibrary, model: &StageDelayModel) -> Vec<Option<f64>> {
    let sinks = net.sinks();
    (0..net.cells.len())
        .map(|c| {
            net.cells[c]
                .kind
                .is_clocked()
                .then(|| stage_delay_with(net, lib, model, &sinks, c))
        })
        .collect()
}

pub fn worst_stage_delay(net: &MappedNetwork, lib: &CellLibrary, model: &StageDelayModel) -> f64 {
    stage_delays(net, lib, model).into_iter().flatten().fold(0.0, f64::max)
}

/// Worst stage delay times logical depth.
pub fn psd(net: &MappedNetwork, lib: &CellLibrary, model: &StageDelayModel) -> f64 {
    let depth = net.logical_depth();
    if depth == 0 {
        return 0.0;
    }
    worst_stage_delay(net, lib, model) * depth as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeepholeConfig {
    pub iterations: usize,
    pub init_fanout_count: usize,
    pub max_fanout_count: usize,
}

impl Default for PeepholeConfig {
    fn default() -> Self {
        PeepholeConfig {
            iterations: 5,
            init_fanout_count: 2,
            max_fanout_count: 8,
        }
    }
}

impl PeepholeConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        PeepholeConfig {
            iterations,
            ..Self::default()
        }
    }
}

/// Everything the remapper needs besides the cover itself.
pub struct RemapContext<'a> {
    pub graph: &'a SubjectGraph,
    pub cuts: &'a CutSet,
    pub lib: &'a CellLibrary,
    pub table: &'a MatchTable,
    pub model: StageDelayModel,
    pub balance_outputs: bool,
}

/// Worst stage, depth and PSD of the balanced network a cover turns into,
/// computed on the cover itself: per-pin DFF chains leave every gate's sink
/// count unchanged and DFFs drive one sink each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverMetrics {
    pub worst_stage: f64,
    pub depth: u32,
    pub psd: f64,
}

pub fn cover_metrics(cover: &MappedNetwork, ctx: &RemapContext) -> CoverMetrics {
    let mut worst = worst_stage_delay(cover, ctx.lib, &ctx.model);
    let (internal, outputs) = required_dffs(cover, ctx.balance_outputs);
    if internal + outputs > 0 {
        worst = worst.max(ctx.lib.dff.delay + ctx.model.interconnect_delay);
    }
    let depth = cover.logical_depth();
    CoverMetrics {
        worst_stage: worst,
        depth,
        psd: if depth == 0 { 0.0 } else { worst * depth as f64 },
    }
}

/// Balanced, splitter-legal network for a cover.
pub fn finish(cover: &MappedNetwork, balance_outputs: bool) -> MappedNetwork {
    insert_splitters(&dff_chains(cover, balance_outputs))
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub cover: MappedNetwork,
    pub network: MappedNetwork,
    /// Iterations that searched for a move (no-op turns after the fanout
    /// cap ran out are not counted).
    pub iterations: usize,
    pub accepted: usize,
}

#[derive(Debug, Clone)]
pub struct CoverTuning {
    pub cover: MappedNetwork,
    pub changed: bool,
    pub iterations: usize,
    pub accepted: usize,
}

/// Tune_PSD: repeatedly remap the cell with the worst stage delay.
///
/// Each turn tries every alternative realization of that cell's literal
/// (other matches, or an inverter on the opposite phase) combined with
/// replication so no replica drives more than the current fanout count.
/// The best candidate is kept if global PSD strictly drops without
/// deepening the network; otherwise the fanout count grows by one.
/// Candidates are scored incrementally; only the accepted one is built.
pub fn tune_psd(cover: &MappedNetwork, ctx: &RemapContext, cfg: &PeepholeConfig) -> TuneResult {
    let t = tune_cover(cover, ctx, cfg);
    let network = finish(&t.cover, ctx.balance_outputs);
    TuneResult {
        cover: t.cover,
        network,
        iterations: t.iterations,
        accepted: t.accepted,
    }
}

/// The tuning loop of [`tune_psd`] without building the final network.
/// `changed` is false when the returned cover equals the input cover.
pub fn tune_cover(cover: &MappedNetwork, ctx: &RemapContext, cfg: &PeepholeConfig) -> CoverTuning {
    let swept = cfg.iterations > 0 && has_dead_cells(cover);
    let mut cur = if swept { cover.sweep() } else { cover.clone() };
    let mut state = CoverState::new(&cur, ctx);
    let mut cap = cfg.init_fanout_count.max(1);
    let mut iterations = 0;
    let mut accepted = 0;
    for turn in 0..cfg.iterations {
        if cap > cfg.max_fanout_count {
            break;
        }
        iterations += 1;
        let Some(w) = state.worst_cell(&cur) else {
            cap += 1;
            continue;
        };
        let mut best: Option<(CoverMetrics, usize, Plan)> = None;
        for plan in plans(&cur, &state, ctx, w, cap) {
            let (m, g) = state.evaluate(&cur, ctx, w, &plan);
            let better = match &best {
                None => true,
                Some((bm, bg, _)) => {
                    m.psd < bm.psd
                        || (m.psd == bm.psd && m.depth < bm.depth)
                        || (m.psd == bm.psd && m.depth == bm.depth && g < *bg)
                }
            };
            if better {
                best = Some((m, g, plan));
            }
        }
        let metrics = state.metrics;
        match best {
            Some((m, _, plan)) if m.psd < metrics.psd && m.depth <= metrics.depth => {
                debug!("turn {turn}: psd {} -> {} (cap {cap})", metrics.psd, m.psd);
                cur = state.apply(&cur, w, &plan);
                state = CoverState::new(&cur, ctx);
                accepted += 1;
            }
            _ => {
                debug!("turn {turn}: no improving move (cap {cap})");
                cap += 1;
            }
        }
    }
    CoverTuning {
        cover: cur,
        changed: swept || accepted > 0,
        iterations,
        accepted,
    }
}

fn has_dead_cells(cover: &MappedNetwork) -> bool {
    cover
        .sinks()
        .iter()
        .enumerate()
        .any(|(n, s)| s.is_empty() && matches!(cover.nets[n].driver, Driver::Cell(..)))
}

/// Check incremental scoring against a full recompute for every move the
/// tuner would consider on each gate of a swept cover, for fanout caps up
/// to `cap`. Returns the number of moves checked.
pub fn audit_moves(cover: &MappedNetwork, ctx: &RemapContext, cap: usize) -> Result<usize, String> {
    let cover = cover.sweep();
    let state = CoverState::new(&cover, ctx);
    let full = cover_metrics(&cover, ctx);
    if !same(&state.metrics, &full) {
        return Err(format!("cached metrics {:?} differ from {:?}", state.metrics, full));
    }
    let mut checked = 0;
    for w in 0..cover.cells.len() {
        if !matches!(cover.cells[w].kind, CellKind::Gate(_)) {
            continue;
        }
        for c in 1..=cap.max(1) {
            for plan in plans(&cover, &state, ctx, w, c) {
                let (m, g) = state.evaluate(&cover, ctx, w, &plan);
                let built = state.apply(&cover, w, &plan);
                let want = cover_metrics(&built, ctx);
                if !same(&m, &want) || g != built.gate_count() {
                    return Err(format!(
                        "cell {w} cap {c} {plan:?}: incremental {m:?}/{g} gates, full {want:?}/{} gates",
                        built.gate_count()
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn same(a: &CoverMetrics, b: &CoverMetrics) -> bool {
    a.depth == b.depth && (a.worst_stage - b.worst_stage).abs() < 1e-9 && (a.psd - b.psd).abs() < 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_lib() -> CellLibrary {
        crate::genlib::parse_genlib(
            concat!(
                "GATE buf 1 O=a; PIN * NONINV 1 999 5 0 5 0\n",
                "GATE and2 2 O=a*b; PIN * NONINV 1 999 5 0 5 0\n",
            ),
            crate::genlib::BuiltinParams::default(),
        )
        .unwrap()
    }

    fn fanout_net(k: usize) -> (MappedNetwork, CellId) {
        let mut n = MappedNetwork::new("t");
        let a = n.add_input("a");
        let g = n.add_cell(CellKind::Gate(0), vec![a], vec!["g".into()], None);
        let out = n.cells[g].outputs[0];
        for i in 0..k {
            let c = n.add_cell(CellKind::Gate(0), vec![out], vec![format!("y{i}")], None);
            n.add_output(format!("y{i}"), n.cells[c].outputs[0]);
        }
        (n, g)
    }

    #[test]
    fn stage_delay_examples() {
        let lib = unit_lib();
        let model = StageDelayModel::from_library(&lib);
        for (k, want) in [(1, 5.0), (2, 6.0), (4, 7.0)] {
            let (n, g) = fanout_net(k);
            assert_eq!(stage_delay(&n, &lib, &model, g), Some(want));
            let split = insert_splitters(&n);
            assert_eq!(stage_delay(&split, &lib, &model, g), Some(want));
        }
    }

    #[test]
    fn psd_of_wires_is_zero() {
        let lib = unit_lib();
        let mut n = MappedNetwork::new("w");
        let a = n.add_input("a");
        n.add_output("y", a);
        assert_eq!(psd(&n, &lib, &StageDelayModel::from_library(&lib)), 0.0);
    }

    #[test]
    fn psd_is_product() {
        let lib = unit_lib();
        let (n, _) = fanout_net(2);
        let model = StageDelayModel::from_library(&lib);
        assert_eq!(n.logical_depth(), 2);
        assert_eq!(psd(&n, &lib, &model), 12.0);
    }

    #[test]
    fn replica_counts_cover_each_depth_once() {
        assert_eq!(replica_counts(8, 2), vec![4, 8]);
        assert_eq!(replica_counts(8, 8), vec![1, 2, 4, 8]);
        assert_eq!(replica_counts(5, 3), vec![2, 3, 5]);
        assert_eq!(replica_counts(1, 2), vec![1]);
    }

    fn fanout_blif() -> String {
        let mut b = String::from(".model fo\n.inputs a b c d e f g h\n.outputs");
        for i in 0..8 {
            b += &format!(" y{i}");
        }
        b += "\n.names a b c t\n111 1\n.names t d u\n10 1\n01 1\n";
        let xs = ["c", "d", "e", "f", "g", "h", "a", "u"];
        for (i, x) in xs.iter().enumerate() {
            let op = if i % 2 == 0 { "11 1" } else { "1- 1\n-1 1" };
            b += &format!(".names t {x} y{i}\n{op}\n");
        }
        b + ".end\n"
    }

    fn audit(lib_text: &str, balance_outputs: bool) -> usize {
        use crate::cuts::{enumerate_cuts, CutParams};
        use crate::dp::{minimize_depth_pb, recover_cover, DpParams};
        use crate::matcher::Matcher;
        let lib = crate::genlib::parse_genlib(lib_text, crate::genlib::BuiltinParams::default()).unwrap();
        let raw = crate::netlist::parse_blif(&fanout_blif()).unwrap();
        let graph = crate::subject::build_subject_graph(&raw);
        let cuts = enumerate_cuts(&graph, CutParams::new(lib.default_cut_size()));
        let params = DpParams {
            balance_outputs,
            ..DpParams::sfq()
        };
        let table = minimize_depth_pb(&graph, &cuts, &lib, &Matcher::new(&lib), params).unwrap();
        let cover = recover_cover(&table, &graph, &cuts, &lib, "fo").unwrap();
        let ctx = RemapContext {
            graph: &graph,
            cuts: &cuts,
            lib: &lib,
            table: &table,
            model: StageDelayModel::from_library(&lib),
            balance_outputs,
        };
        audit_moves(&cover, &ctx, 4).unwrap()
    }

    #[test]
    fn incremental_scores_match_full_recompute() {
        for text in [
            include_str!("../../data/mcnc.genlib"),
            include_str!("../../data/sfq.genlib"),
        ] {
            for bo in [false, true] {
                assert!(audit(text, bo) > 0);
            }
        }
    }
}
