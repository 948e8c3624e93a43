//! Depth-optimal mapping with path-balancing DFF count as the tie-break.
//!
//! Every subject-graph literal (node and phase) gets a minimum depth `D`
//! (one level per clocked gate). On top of that, for each level `l` the
//! literal may be needed at, the table holds the fewest balancing DFFs of a
//! realization whose output sits exactly at `l`. A consumer that needs the
//! literal at level `L` pays `min over l <= L` of that count plus `L - l`
//! padding DFFs, which is the balance cost `B` of its input. The value at
//! `l = D` is the classic min-depth, min-DFF recurrence; the upper levels
//! let a slower realization of a fast subtree win when it saves padding.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::balance::NameGen;
use crate::cuts::CutSet;
use crate::error::MapError;
use crate::genlib::{CellLibrary, GateId};
use crate::mapped::{CellKind, MappedNetwork, NetId};
use crate::matcher::{Match, Matcher};
use crate::subject::{Lit, NodeId, NodeKind, SubjectGraph};
use crate::truth;

pub const INF: u32 = u32::MAX;

/// DFFs needed to bring every input up to the latest one: `sum(max - l_i)`.
pub fn balance_cost(levels: &[u32]) -> u32 {
    let hi = levels.iter().copied().max().unwrap_or(0);
    levels.iter().map(|l| hi - l).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Depth, then balancing DFFs, then area.
    DepthDffs,
    /// Depth, then area; balancing is not considered. Comparison baseline.
    DepthArea,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpParams {
    pub objective: Objective,
    /// How many levels above its minimum depth a literal may be realized at.
    /// `None` means as high as any consumer can use, which makes the tables
    /// grow with circuit depth; `Some(0)` restricts every node to its
    /// min-depth solutions.
    pub level_slack: Option<u32>,
    /// Raise every output to the deepest output level.
    pub balance_outputs: bool,
}

impl DpParams {
    /// Level window of the default mode. Bounded so the tables stay
    /// linear in circuit size; wider windows rarely save more DFFs.
    pub const DEFAULT_SLACK: u32 = 4;

    pub fn sfq() -> Self {
        DpParams {
            objective: Objective::DepthDffs,
            level_slack: Some(Self::DEFAULT_SLACK),
            balance_outputs: false,
        }
    }

    pub fn baseline() -> Self {
        DpParams {
            objective: Objective::DepthArea,
            level_slack: Some(0),
            balance_outputs: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cost {
    /// Balancing DFFs; fractional once shared subtrees are split among
    /// their consumers.
    pub dffs: f64,
    pub area: f64,
}

impl Cost {
    pub const INF: Cost = Cost {
        dffs: f64::INFINITY,
        area: f64::INFINITY,
    };
    pub const ZERO: Cost = Cost { dffs: 0.0, area: 0.0 };

    pub fn is_finite(&self) -> bool {
        self.dffs.is_finite()
    }

    fn add(self, o: Cost) -> Cost {
        if !self.is_finite() || !o.is_finite() {
            return Cost::INF;
        }
        Cost {
            dffs: self.dffs + o.dffs,
            area: self.area + o.area,
        }
    }

    fn pad(self, n: u32) -> Cost {
        if !self.is_finite() {
            return self;
        }
        Cost {
            dffs: self.dffs + n as f64,
            area: self.area,
        }
    }

    fn cmp_by(&self, o: &Cost, obj: Objective) -> Ordering {
        match (self.is_finite(), o.is_finite()) {
            (false, false) => return Ordering::Equal,
            (false, true) => return Ordering::Greater,
            (true, false) => return Ordering::Less,
            _ => {}
        }
        match obj {
            Objective::DepthDffs => self.dffs.total_cmp(&o.dffs).then(self.area.total_cmp(&o.area)),
            Objective::DepthArea => self.area.total_cmp(&o.area).then(self.dffs.total_cmp(&o.dffs)),
        }
    }
}

/// A gate-based way to realize a literal: match `m` on mapping cut `cut`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub cut: u32,
    pub m: Match,
    /// Minimum depth of this candidate.
    pub depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Choice {
    None,
    /// A primary input in positive phase.
    Input,
    Gate(Candidate),
    /// Inverter on the gate realization of the opposite phase.
    Inv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Slot {
    cost: Cost,
    choice: Choice,
}

const EMPTY: Slot = Slot {
    cost: Cost::INF,
    choice: Choice::None,
};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pad {
    cost: Cost,
    level: u32,
}

#[derive(Debug, Clone, Default)]
struct LitTable {
    base: u32,
    gate: Vec<Slot>,
    all: Vec<Slot>,
    gate_pad: Vec<Pad>,
    all_pad: Vec<Pad>,
}

impl LitTable {
    fn lookup(pads: &[Pad], base: u32, level: u32) -> Pad {
        if pads.is_empty() || level < base {
            return Pad {
                cost: Cost::INF,
                level: INF,
            };
        }
        let idx = (level - base) as usize;
        if idx < pads.len() {
            pads[idx]
        } else {
            let last = pads[pads.len() - 1];
            Pad {
                cost: last.cost.pad((idx - (pads.len() - 1)) as u32),
                level: last.level,
            }
        }
    }
}

/// Per-literal DP state.
#[derive(Debug, Clone)]
pub struct MatchTable {
    pub params: DpParams,
    d_gate: Vec<u32>,
    d_min: Vec<u32>,
    required: Vec<u32>,
    cands: Vec<Vec<Candidate>>,
    tables: Vec<LitTable>,
    inv_area: f64,
    has_inverter: bool,
}

impl MatchTable {
    /// Minimum depth of a literal (`INF` if unrealizable).
    pub fn depth(&self, lit: Lit) -> u32 {
        self.d_min[lit.index()]
    }

    /// Minimum depth using a gate at the literal's own node (no inverter).
    pub fn gate_depth(&self, lit: Lit) -> u32 {
        self.d_gate[lit.index()]
    }

    /// Estimated balancing DFFs of the literal at its minimum depth (exact
    /// on trees).
    pub fn dffs(&self, lit: Lit) -> Option<f64> {
        self.cost_at(lit, self.depth(lit)).map(|c| c.dffs)
    }

    /// Cost of having `lit` available at `level` (padding included).
    pub fn cost_at(&self, lit: Lit, level: u32) -> Option<Cost> {
        let t = &self.tables[lit.index()];
        let p = LitTable::lookup(&t.all_pad, t.base, level);
        p.cost.is_finite().then_some(p.cost)
    }

    /// Chosen realization of a literal at its minimum depth.
    pub fn best(&self, lit: Lit) -> Choice {
        let d = self.depth(lit);
        if d == INF {
            return Choice::None;
        }
        let t = &self.tables[lit.index()];
        let p = LitTable::lookup(&t.all_pad, t.base, d);
        if p.level == INF {
            return Choice::None;
        }
        t.all[(p.level - t.base) as usize].choice
    }

    /// All gate candidates of a node, both phases.
    pub fn candidates(&self, node: NodeId) -> &[Candidate] {
        &self.cands[node as usize]
    }

    /// Highest level at which the literal may be consumed (`INF` if unused).
    pub fn required_level(&self, lit: Lit) -> u32 {
        self.required[lit.index()]
    }

    /// What the table picks for `lit` when a consumer needs it at `level`:
    /// the exact level of the realization and its choice. With `gate_only`
    /// the inverter option is excluded.
    pub fn realization(&self, lit: Lit, level: u32, gate_only: bool) -> Option<(u32, Choice)> {
        let pad = if gate_only {
            self.gate_pad(lit, level)
        } else {
            self.all_pad(lit, level)
        };
        if !pad.cost.is_finite() {
            return None;
        }
        let slot = if gate_only {
            self.gate_slot(lit, pad.level)
        } else {
            self.all_slot(lit, pad.level)
        };
        Some((pad.level, slot.choice))
    }

    fn better(&self, a: &Cost, b: &Cost) -> bool {
        a.cmp_by(b, self.params.objective) == Ordering::Less
    }

    fn gate_pad(&self, lit: Lit, level: u32) -> Pad {
        let t = &self.tables[lit.index()];
        LitTable::lookup(&t.gate_pad, t.base, level)
    }

    fn all_pad(&self, lit: Lit, level: u32) -> Pad {
        let t = &self.tables[lit.index()];
        LitTable::lookup(&t.all_pad, t.base, level)
    }

    fn gate_slot(&self, lit: Lit, level: u32) -> Slot {
        let t = &self.tables[lit.index()];
        t.gate[(level - t.base) as usize]
    }

    fn all_slot(&self, lit: Lit, level: u32) -> Slot {
        let t = &self.tables[lit.index()];
        t.all[(level - t.base) as usize]
    }
}

/// Leaf literals a candidate reads, in cut-leaf order.
pub fn candidate_leaves(cuts: &CutSet, node: NodeId, c: &Candidate) -> Vec<Lit> {
    let cut = &cuts.mapping_cuts(node)[c.cut as usize];
    cut.leaves()
        .iter()
        .enumerate()
        .map(|(j, l)| Lit::new(*l, c.m.leaf_negated(j)))
        .collect()
}

/// Compute the match table (Minimize_Depth_PBOverhead).
pub fn minimize_depth_pb(
    graph: &SubjectGraph,
    cuts: &CutSet,
    lib: &CellLibrary,
    matcher: &Matcher,
    params: DpParams,
) -> Result<MatchTable, MapError> {
    let n = graph.len();
    let inv_area = lib.inverter.map(|g| lib.gates[g].area);
    let mut t = MatchTable {
        params,
        d_gate: vec![INF; 2 * n],
        d_min: vec![INF; 2 * n],
        required: vec![INF; 2 * n],
        cands: vec![Vec::new(); n],
        tables: vec![LitTable::default(); 2 * n],
        inv_area: inv_area.unwrap_or(0.0),
        has_inverter: inv_area.is_some(),
    };

    // minimum depths
    for id in 0..n as NodeId {
        let pos = Lit::new(id, false);
        let neg = Lit::new(id, true);
        match graph.kind(id) {
            NodeKind::Const1 => continue,
            NodeKind::Input => t.d_gate[pos.index()] = 0,
            NodeKind::And(..) => {
                let mut list = Vec::new();
                for (ci, cut) in cuts.mapping_cuts(id).iter().enumerate() {
                    for m in matcher.match_cut(cut) {
                        let mut depth = 0u32;
                        for (j, leaf) in cut.leaves().iter().enumerate() {
                            let d = t.d_min[Lit::new(*leaf, m.leaf_negated(j)).index()];
                            depth = depth.max(d);
                        }
                        if depth == INF {
                            continue;
                        }
                        let c = Candidate {
                            cut: ci as u32,
                            m: *m,
                            depth: depth + 1,
                        };
                        let lit = if m.output_inverted { neg } else { pos };
                        t.d_gate[lit.index()] = t.d_gate[lit.index()].min(c.depth);
                        list.push(c);
                    }
                }
                t.cands[id as usize] = list;
            }
        }
        for (a, b) in [(pos, neg), (neg, pos)] {
            let via_inv = if inv_area.is_some() && t.d_gate[b.index()] != INF {
                t.d_gate[b.index()] + 1
            } else {
                INF
            };
            t.d_min[a.index()] = t.d_gate[a.index()].min(via_inv);
        }
    }

    // required levels, from the outputs down
    let targets = output_targets(graph, &t, params.balance_outputs);
    for (o, target) in graph.outputs().iter().zip(&targets) {
        if o.lit.node() == 0 {
            continue;
        }
        if t.d_min[o.lit.index()] == INF {
            return Err(unmatchable(graph, cuts, &t, o.lit, &o.name));
        }
        let r = &mut t.required[o.lit.index()];
        *r = if *r == INF { *target } else { (*r).max(*target) };
    }
    for id in (1..n as NodeId).rev() {
        let lits = [Lit::new(id, false), Lit::new(id, true)];
        for lit in lits {
            let r = t.required[lit.index()];
            if r != INF {
                let cap = params.level_slack.map(|s| t.d_min[lit.index()] + s).unwrap_or(INF);
                t.required[lit.index()] = r.min(cap).max(t.d_min[lit.index()]);
            }
        }
        if inv_area.is_some() {
            for (a, b) in [(lits[0], lits[1]), (lits[1], lits[0])] {
                let ra = t.required[a.index()];
                if ra != INF && t.d_gate[b.index()] != INF && t.d_gate[b.index()] < ra {
                    let rb = &mut t.required[b.index()];
                    *rb = if *rb == INF { ra - 1 } else { (*rb).max(ra - 1) };
                }
            }
            for lit in lits {
                let r = t.required[lit.index()];
                if r != INF {
                    let cap = params.level_slack.map(|s| t.d_min[lit.index()] + s).unwrap_or(INF);
                    t.required[lit.index()] = r.min(cap).max(t.d_min[lit.index()]);
                }
            }
        }
        for c in &t.cands[id as usize] {
            let lit = Lit::new(id, c.m.output_inverted);
            let r = t.required[lit.index()];
            if r == INF || c.depth > r {
                continue;
            }
            let cut = &cuts.mapping_cuts(id)[c.cut as usize];
            for (j, leaf) in cut.leaves().iter().enumerate() {
                let l = Lit::new(*leaf, c.m.leaf_negated(j));
                let rl = &mut t.required[l.index()];
                *rl = if *rl == INF { r - 1 } else { (*rl).max(r - 1) };
            }
        }
    }

    let refs = subject_refs(graph);
    fill_tables(&mut t, graph, cuts, lib, &refs);
    if params.objective == Objective::DepthDffs {
        // second pass: share subtree costs among the consumers the first
        // cover actually has
        let cover = recover_cover(&t, graph, cuts, lib, graph.model_name())?;
        let refs = cover_refs(&cover, 2 * n);
        fill_tables(&mut t, graph, cuts, lib, &refs);
    }
    Ok(t)
}

/// Consumers of each literal estimated from subject-graph fanout.
fn subject_refs(graph: &SubjectGraph) -> Vec<f64> {
    graph
        .fanout_counts()
        .iter()
        .flat_map(|f| {
            let r = (*f).max(1) as f64;
            [r, r]
        })
        .collect()
}

/// Consumers of each literal's net in a recovered cover.
fn cover_refs(cover: &MappedNetwork, lits: usize) -> Vec<f64> {
    let mut refs = vec![1.0; lits];
    let sinks = cover.sinks();
    for cell in &cover.cells {
        if let Some(lit) = cell.origin {
            refs[lit.index()] = sinks[cell.outputs[0]].len().max(1) as f64;
        }
    }
    refs
}

/// Cost of reading a realization through `p` at `level`: the realization's
/// own cost is split among `refs` consumers, the padding DFFs sit on this
/// consumer's pin alone.
fn flow(p: Pad, level: u32, refs: f64) -> Cost {
    if !p.cost.is_finite() {
        return Cost::INF;
    }
    let padding = (level - p.level) as f64;
    Cost {
        dffs: (p.cost.dffs - padding) / refs + padding,
        area: p.cost.area / refs,
    }
}

/// Level-indexed DFF tables, bottom-up.
fn fill_tables(t: &mut MatchTable, graph: &SubjectGraph, cuts: &CutSet, lib: &CellLibrary, refs: &[f64]) {
    let n = graph.len();
    let params = t.params;
    for id in 0..n as NodeId {
        if graph.kind(id) == NodeKind::Const1 {
            continue;
        }
        let lits = [Lit::new(id, false), Lit::new(id, true)];
        for lit in lits {
            let d = t.d_min[lit.index()];
            if d == INF {
                continue;
            }
            let top = match t.required[lit.index()] {
                INF => d,
                r => r.max(d),
            };
            let len = (top - d + 1) as usize;
            let mut gate = vec![EMPTY; len];
            if graph.kind(id) == NodeKind::Input && !lit.is_complemented() {
                gate[0] = Slot {
                    cost: Cost::ZERO,
                    choice: Choice::Input,
                };
            }
            for c in &t.cands[id as usize] {
                if c.m.output_inverted != lit.is_complemented() {
                    continue;
                }
                let cut = &cuts.mapping_cuts(id)[c.cut as usize];
                let gate_area = lib.gates[c.m.gate].area;
                for level in c.depth.max(d)..=top {
                    let mut cost = Cost {
                        dffs: 0.0,
                        area: gate_area,
                    };
                    for (j, leaf) in cut.leaves().iter().enumerate() {
                        let l = Lit::new(*leaf, c.m.leaf_negated(j));
                        cost = cost.add(flow(t.all_pad(l, level - 1), level - 1, refs[l.index()]));
                    }
                    let slot = &mut gate[(level - d) as usize];
                    if t.better(&cost, &slot.cost) {
                        *slot = Slot {
                            cost,
                            choice: Choice::Gate(*c),
                        };
                    }
                }
            }
            let gate_pad = running_pad(&gate, d, params.objective);
            let tab = &mut t.tables[lit.index()];
            tab.base = d;
            tab.gate = gate;
            tab.gate_pad = gate_pad;
        }
        for (a, b) in [(lits[0], lits[1]), (lits[1], lits[0])] {
            let d = t.d_min[a.index()];
            if d == INF {
                continue;
            }
            let mut all = t.tables[a.index()].gate.clone();
            if t.has_inverter && t.d_gate[b.index()] != INF {
                for (i, slot) in all.iter_mut().enumerate() {
                    let level = d + i as u32;
                    if level == 0 {
                        continue;
                    }
                    let src = flow(t.gate_pad(b, level - 1), level - 1, refs[b.index()]);
                    let cost = src.add(Cost {
                        dffs: 0.0,
                        area: t.inv_area,
                    });
                    if t.better(&cost, &slot.cost) {
                        *slot = Slot {
                            cost,
                            choice: Choice::Inv,
                        };
                    }
                }
            }
            t.tables[a.index()].all = all;
        }
        for lit in lits {
            let d = t.d_min[lit.index()];
            if d == INF {
                continue;
            }
            let pads = running_pad(&t.tables[lit.index()].all, d, params.objective);
            t.tables[lit.index()].all_pad = pads;
        }
    }
}

fn running_pad(slots: &[Slot], base: u32, obj: Objective) -> Vec<Pad> {
    let mut out: Vec<Pad> = Vec::with_capacity(slots.len());
    for (i, s) in slots.iter().enumerate() {
        let mut best = Pad {
            cost: s.cost,
            level: if s.cost.is_finite() { base + i as u32 } else { INF },
        };
        if let Some(prev) = out.last() {
            let padded = prev.cost.pad(1);
            if padded.cmp_by(&best.cost, obj) != Ordering::Greater && prev.cost.is_finite() {
                // prefer the lower realization on ties
                if padded.cmp_by(&best.cost, obj) == Ordering::Less || !best.cost.is_finite() {
                    best = Pad {
                        cost: padded,
                        level: prev.level,
                    };
                }
            }
        }
        out.push(best);
    }
    out
}

fn output_targets(graph: &SubjectGraph, t: &MatchTable, balance_outputs: bool) -> Vec<u32> {
    let depths: Vec<u32> = graph
        .outputs()
        .iter()
        .map(|o| if o.lit.node() == 0 { 0 } else { t.d_min[o.lit.index()] })
        .collect();
    if balance_outputs {
        let hi = depths.iter().copied().filter(|d| *d != INF).max().unwrap_or(0);
        vec![hi; depths.len()]
    } else {
        depths
    }
}

fn unmatchable(graph: &SubjectGraph, cuts: &CutSet, t: &MatchTable, lit: Lit, name: &str) -> MapError {
    if graph.is_input(lit.node()) {
        return MapError::NoInverter(name.to_string());
    }
    // lowest node in the cone without any gate realization
    let mut stack = vec![lit.node()];
    let mut seen = std::collections::HashSet::new();
    let mut culprit = lit.node();
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        if let Some((a, b)) = graph.fanins(id) {
            if t.d_gate[Lit::new(id, false).index()] == INF && t.d_gate[Lit::new(id, true).index()] == INF {
                culprit = culprit.min(id);
            }
            stack.push(a.node());
            stack.push(b.node());
        }
    }
    let functions = cuts
        .mapping_cuts(culprit)
        .iter()
        .map(|c| format!("{:?}:{}", c.leaves(), truth::to_bits(c.function, c.size())))
        .collect::<Vec<_>>()
        .join(", ");
    MapError::Unmatchable {
        node: culprit,
        functions,
    }
}

// ---------------------------------------------------------------------------
// cover recovery

#[derive(Debug, Clone, Copy, PartialEq)]
enum Realize {
    Gate(Candidate),
    Inv,
    Input,
}

/// Decide one realization (and its exact level) for every literal the
/// outputs need, then instantiate cells (NetworkFromMap).
pub fn recover_cover(
    table: &MatchTable,
    graph: &SubjectGraph,
    cuts: &CutSet,
    lib: &CellLibrary,
    model_name: &str,
) -> Result<MappedNetwork, MapError> {
    let n = graph.len();
    let mut req = vec![INF; 2 * n];
    let targets = output_targets(graph, table, table.params.balance_outputs);
    for (o, target) in graph.outputs().iter().zip(&targets) {
        if o.lit.node() == 0 {
            continue;
        }
        if table.depth(o.lit) == INF {
            return Err(unmatchable(graph, cuts, table, o.lit, &o.name));
        }
        req[o.lit.index()] = req[o.lit.index()].min(*target);
    }
    let mut chosen: Vec<Option<(Realize, u32)>> = vec![None; 2 * n];
    for id in (1..n as NodeId).rev() {
        let p = Lit::new(id, false);
        let q = Lit::new(id, true);
        let decided = resolve_node(table, p, q, req[p.index()], req[q.index()]);
        for (lit, r) in [(p, decided.0), (q, decided.1)] {
            let Some((realize, level)) = r else { continue };
            chosen[lit.index()] = Some((realize, level));
            if let Realize::Gate(c) = realize {
                for leaf in candidate_leaves(cuts, id, &c) {
                    let slot = &mut req[leaf.index()];
                    *slot = (*slot).min(level - 1);
                }
            }
        }
    }
    instantiate(graph, cuts, lib, &chosen, model_name)
}

type Decision = (Option<(Realize, u32)>, Option<(Realize, u32)>);

/// Realizations for both phases of one node given the lowest level each is
/// requested at. Never lets the two phases invert each other.
fn resolve_node(t: &MatchTable, p: Lit, q: Lit, rp: u32, rq: u32) -> Decision {
    let gate_of = |lit: Lit, level: u32| -> Option<(Realize, u32, Cost)> {
        let pad = t.gate_pad(lit, level);
        if !pad.cost.is_finite() {
            return None;
        }
        let r = match t.gate_slot(lit, pad.level).choice {
            Choice::Gate(c) => Realize::Gate(c),
            Choice::Input => Realize::Input,
            _ => return None,
        };
        Some((r, pad.level, pad.cost))
    };
    let any_of = |lit: Lit, level: u32| -> Option<(Realize, u32, Cost)> {
        let pad = t.all_pad(lit, level);
        if !pad.cost.is_finite() {
            return None;
        }
        let r = match t.all_slot(lit, pad.level).choice {
            Choice::Gate(c) => Realize::Gate(c),
            Choice::Input => Realize::Input,
            Choice::Inv => Realize::Inv,
            Choice::None => return None,
        };
        Some((r, pad.level, pad.cost))
    };
    let strip = |x: Option<(Realize, u32, Cost)>| x.map(|(r, l, _)| (r, l));
    match (rp != INF, rq != INF) {
        (false, false) => (None, None),
        (true, false) | (false, true) => {
            let (a, b, ra) = if rp != INF { (p, q, rp) } else { (q, p, rq) };
            let first = any_of(a, ra);
            let mut second = None;
            if let Some((Realize::Inv, l, _)) = first {
                second = strip(gate_of(b, l - 1));
            }
            if rp != INF {
                (strip(first), second)
            } else {
                (second, strip(first))
            }
        }
        (true, true) => {
            let mut options: Vec<(Cost, Decision)> = Vec::new();
            if let (Some(a), Some(b)) = (gate_of(p, rp), gate_of(q, rq)) {
                options.push((a.2.add(b.2), (Some((a.0, a.1)), Some((b.0, b.1)))));
            }
            if rq > 0 {
                if let Some(a) = gate_of(p, rp.min(rq - 1)) {
                    let cost = a.2.add(Cost {
                        dffs: 0.0,
                        area: t.inv_area,
                    });
                    if t.has_inverter {
                        options.push((cost, (Some((a.0, a.1)), Some((Realize::Inv, a.1 + 1)))));
                    }
                }
            }
            if rp > 0 {
                if let Some(b) = gate_of(q, rq.min(rp - 1)) {
                    let cost = b.2.add(Cost {
                        dffs: 0.0,
                        area: t.inv_area,
                    });
                    if t.has_inverter {
                        options.push((cost, (Some((Realize::Inv, b.1 + 1)), Some((b.0, b.1)))));
                    }
                }
            }
            let mut best: Option<(Cost, Decision)> = None;
            for o in options {
                if best.as_ref().is_none_or(|b| t.better(&o.0, &b.0)) {
                    best = Some(o);
                }
            }
            best.map(|b| b.1).unwrap_or((None, None))
        }
    }
}

fn instantiate(
    graph: &SubjectGraph,
    cuts: &CutSet,
    lib: &CellLibrary,
    chosen: &[Option<(Realize, u32)>],
    model_name: &str,
) -> Result<MappedNetwork, MapError> {
    let mut net = MappedNetwork::new(model_name);
    let mut lit_net: HashMap<Lit, NetId> = HashMap::new();
    for (i, id) in graph.inputs().iter().enumerate() {
        let nid = net.add_input(graph.input_names()[i].clone());
        lit_net.insert(Lit::new(*id, false), nid);
    }
    let input_names: std::collections::HashSet<&str> = graph.input_names().iter().map(|s| s.as_str()).collect();
    // first output (in declaration order) naming each literal
    let mut po_name: HashMap<Lit, &str> = HashMap::new();
    for o in graph.outputs() {
        if !input_names.contains(o.name.as_str()) {
            po_name.entry(o.lit).or_insert(o.name.as_str());
        }
    }
    let mut names = NameGen::with_reserved(
        graph
            .input_names()
            .iter()
            .cloned()
            .chain(graph.outputs().iter().map(|o| o.name.clone())),
    );
    let name_for = |lit: Lit, names: &mut NameGen| -> String {
        match po_name.get(&lit) {
            Some(n) => n.to_string(),
            None => names.fresh(&format!(
                "n{}{}",
                lit.node(),
                if lit.is_complemented() { "_b" } else { "" }
            )),
        }
    };
    let inv: Option<GateId> = lib.inverter;
    for id in 1..graph.len() as NodeId {
        let p = Lit::new(id, false);
        let q = Lit::new(id, true);
        // gate-realized phase first so an inverter can read it
        let mut order = [p, q];
        if matches!(chosen[p.index()], Some((Realize::Inv, _))) {
            order = [q, p];
        }
        for lit in order {
            let Some((realize, _)) = chosen[lit.index()] else {
                continue;
            };
            match realize {
                Realize::Input => {}
                Realize::Gate(c) => {
                    let leaves = candidate_leaves(cuts, id, &c);
                    let gate = &lib.gates[c.m.gate];
                    let inputs: Vec<NetId> = (0..gate.fanin_count())
                        .map(|pin| lit_net[&leaves[c.m.pin_leaf[pin] as usize]])
                        .collect();
                    let name = name_for(lit, &mut names);
                    let cell = net.add_cell(CellKind::Gate(c.m.gate), inputs, vec![name], Some(lit));
                    lit_net.insert(lit, net.cells[cell].outputs[0]);
                }
                Realize::Inv => {
                    let src = lit_net[&!lit];
                    let name = name_for(lit, &mut names);
                    let g = inv.expect("inverter realization without an inverter cell");
                    let cell = net.add_cell(CellKind::Gate(g), vec![src], vec![name], Some(lit));
                    lit_net.insert(lit, net.cells[cell].outputs[0]);
                }
            }
        }
    }
    for o in graph.outputs() {
        let nid = if o.lit.node() == 0 {
            let value = o.lit == Lit::TRUE;
            let cell = net.add_cell(CellKind::Const(value), vec![], vec![o.name.clone()], None);
            net.cells[cell].outputs[0]
        } else {
            *lit_net
                .get(&o.lit)
                .ok_or_else(|| MapError::NoInverter(o.name.clone()))?
        };
        net.add_output(o.name.clone(), nid);
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::{enumerate_cuts, CutParams};
    use crate::genlib::{parse_genlib, BuiltinParams};

    fn lib(text: &str) -> CellLibrary {
        parse_genlib(text, BuiltinParams::default()).unwrap()
    }

    const AND_INV: &str = "GATE inv 1 O=!a; PIN * INV 1 999 1 0 1 0\nGATE and2 2 O=a*b; PIN * NONINV 1 999 1 0 1 0\n";

    fn map(g: &SubjectGraph, l: &CellLibrary, params: DpParams) -> (MatchTable, MappedNetwork) {
        let cuts = enumerate_cuts(g, CutParams::unbounded(l.default_cut_size()));
        let m = Matcher::new(l);
        let t = minimize_depth_pb(g, &cuts, l, &m, params).unwrap();
        let net = recover_cover(&t, g, &cuts, l, "t").unwrap();
        (t, net)
    }

    #[test]
    fn single_and() {
        let l = lib(AND_INV);
        let mut g = SubjectGraph::new();
        let a = g.add_input("a");
        let b = g.add_input("b");
        let y = g.and(a, b);
        g.add_output("y", y);
        let (t, net) = map(&g, &l, DpParams::sfq());
        assert_eq!(t.depth(y), 1);
        assert_eq!(t.dffs(y), Some(0.0));
        assert_eq!(net.gate_count(), 1);
        assert_eq!(net.logical_depth(), 1);
    }

    #[test]
    fn inverted_output_uses_inverter() {
        let l = lib(AND_INV);
        let mut g = SubjectGraph::new();
        let a = g.add_input("a");
        let b = g.add_input("b");
        let y = g.and(a, b);
        g.add_output("y", !y);
        let (t, net) = map(&g, &l, DpParams::sfq());
        assert_eq!(t.depth(!y), 2);
        assert_eq!(net.gate_count(), 2);
        assert_eq!(net.simulate_words(&l, &[0b1010, 0b1100])[0] & 0xF, 0b0111);
    }

    #[test]
    fn buffer_network() {
        let l = lib(AND_INV);
        let mut g = SubjectGraph::new();
        let a = g.add_input("a");
        g.add_output("y", a);
        g.add_output("z", !a);
        let (_, net) = map(&g, &l, DpParams::sfq());
        assert_eq!(net.gate_count(), 1);
        assert_eq!(net.outputs[0].net, net.inputs[0]);
    }

    #[test]
    fn missing_inverter_is_reported() {
        let l = lib("GATE and2 2 O=a*b; PIN * NONINV 1 999 1 0 1 0\n");
        let mut g = SubjectGraph::new();
        let a = g.add_input("a");
        g.add_output("z", !a);
        let cuts = enumerate_cuts(&g, CutParams::new(2));
        let m = Matcher::new(&l);
        let err = minimize_depth_pb(&g, &cuts, &l, &m, DpParams::sfq()).unwrap_err();
        assert_eq!(err, MapError::NoInverter("z".into()));
    }

    #[test]
    fn slower_subtree_avoids_padding() {
        // y = (a & b) & !(c & d & e) where the right side is two levels
        // deep; with nand2 and and2 the left side can be realized at level 1
        // (and2, padded by one DFF) or at level 2 (nand2 + inv, no DFF).
        let l = lib(concat!(
            "GATE inv 1 O=!a; PIN * INV 1 999 1 0 1 0\n",
            "GATE and2 2 O=a*b; PIN * NONINV 1 999 1 0 1 0\n",
            "GATE nand2 2 O=!(a*b); PIN * INV 1 999 1 0 1 0\n",
        ));
        let mut g = SubjectGraph::new();
        let v: Vec<Lit> = ["a", "b", "c", "d", "e"].iter().map(|n| g.add_input(*n)).collect();
        let ab = g.and(v[0], v[1]);
        let cd = g.and(v[2], v[3]);
        let cde = g.and(cd, v[4]);
        let y = g.and(ab, !cde);
        g.add_output("y", y);
        let (t, net) = map(&g, &l, DpParams::sfq());
        let bal = crate::balance::insert_dffs(&net, false);
        assert_eq!(t.depth(y), net.logical_depth());
        assert_eq!(t.dffs(y), Some(bal.dff_count() as f64));
    }
}
