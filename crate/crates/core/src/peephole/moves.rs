//! Candidate moves on one cell and their incremental scoring.
//!
//! A move is a plan: a few new cells (a different realization of the cell's
//! literal plus whatever support it needs) and a replica count. Plans are
//! scored against a cached analysis of the cover by touching only the cells
//! whose fanout, level or liveness changes; the cover is rebuilt only for
//! the accepted plan.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use crate::balance::{splitter_levels, NameGen};
use crate::dp::{balance_cost, candidate_leaves, Choice};
use crate::mapped::{CellId, CellKind, Driver, MappedNetwork, NetId, Sink};
use crate::subject::Lit;

use super::{cell_delay, CoverMetrics, RemapContext};

/// A net of the cover or the output of a plan's `i`-th new cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Src {
    Old(NetId),
    New(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct NewCell {
    kind: CellKind,
    inputs: Vec<Src>,
    origin: Lit,
    level: u32,
    base: String,
}

#[derive(Debug, Clone)]
pub(crate) struct Plan {
    cells: Vec<NewCell>,
    /// Realization that takes over the cell's sinks; `Old` keeps the cell.
    head: Src,
    replicas: usize,
}

fn stage_of(ctx: &RemapContext, kind: CellKind, fanout: u32) -> Option<f64> {
    kind.is_clocked().then(|| {
        cell_delay(ctx.lib, kind)
            + splitter_levels(fanout as usize) as f64 * ctx.model.splitter_delay
            + ctx.model.interconnect_delay
    })
}

fn level_rule(kind: CellKind, inputs: impl Iterator<Item = u32>) -> u32 {
    let mut any = false;
    let mut hi = 0;
    for l in inputs {
        any = true;
        hi = hi.max(l);
    }
    match kind {
        CellKind::Gate(_) | CellKind::Dff if any => hi + 1,
        CellKind::Splitter => hi,
        _ => 0,
    }
}

/// Largest key whose count stays positive after applying `delta`.
fn max_key<K: Ord + Copy + std::hash::Hash>(hist: &BTreeMap<K, usize>, delta: &HashMap<K, i64>) -> Option<K> {
    let kept = hist
        .iter()
        .rev()
        .find(|(k, c)| **c as i64 + delta.get(k).copied().unwrap_or(0) > 0)
        .map(|(k, _)| *k);
    let added = delta
        .iter()
        .filter(|(k, d)| **d > 0 && !hist.contains_key(k))
        .map(|(k, _)| *k)
        .max();
    kept.max(added)
}

fn bump<K: Eq + std::hash::Hash>(m: &mut HashMap<K, i64>, k: K, by: i64) {
    *m.entry(k).or_insert(0) += by;
}

/// Cached analysis of a cover. Stage delays are kept as `f64` bit patterns,
/// which order like the values for non-negative delays.
pub(crate) struct CoverState {
    pub(crate) levels: Vec<u32>,
    fanout: Vec<u32>,
    sinks: Vec<Vec<Sink>>,
    topo_pos: Vec<usize>,
    stage: Vec<Option<f64>>,
    stage_hist: BTreeMap<u64, usize>,
    balance: Vec<u32>,
    internal_dffs: i64,
    out_hist: BTreeMap<u32, usize>,
    out_sum: i64,
    gates: usize,
    avail: HashMap<Lit, Vec<(NetId, bool)>>,
    pub(crate) metrics: CoverMetrics,
}

impl CoverState {
    pub(crate) fn new(cover: &MappedNetwork, ctx: &RemapContext) -> Self {
        let levels = cover.net_levels();
        let sinks = cover.sinks();
        let fanout: Vec<u32> = sinks.iter().map(|s| s.len() as u32).collect();
        let mut topo_pos = vec![0; cover.cells.len()];
        for (i, c) in cover.topo_order().into_iter().enumerate() {
            topo_pos[c] = i;
        }
        let mut stage = Vec::with_capacity(cover.cells.len());
        let mut stage_hist = BTreeMap::new();
        let mut balance = Vec::with_capacity(cover.cells.len());
        let mut internal = 0i64;
        let mut avail: HashMap<Lit, Vec<(NetId, bool)>> = HashMap::new();
        for (i, id) in ctx.graph.inputs().iter().enumerate() {
            avail
                .entry(Lit::new(*id, false))
                .or_default()
                .push((cover.inputs[i], true));
        }
        for cell in &cover.cells {
            let fo = cell.outputs.first().map(|o| fanout[*o]).unwrap_or(0);
            let s = stage_of(ctx, cell.kind, fo);
            if let Some(d) = s {
                *stage_hist.entry(d.to_bits()).or_insert(0) += 1;
            }
            stage.push(s);
            let b = if cell.kind.is_clocked() && !cell.inputs.is_empty() {
                let lv: Vec<u32> = cell.inputs.iter().map(|n| levels[*n]).collect();
                balance_cost(&lv)
            } else {
                0
            };
            internal += b as i64;
            balance.push(b);
            if let (Some(lit), CellKind::Gate(g)) = (cell.origin, cell.kind) {
                let is_gate = Some(g) != ctx.lib.inverter;
                avail.entry(lit).or_default().push((cell.outputs[0], is_gate));
            }
        }
        let mut out_hist = BTreeMap::new();
        let mut out_sum = 0i64;
        for o in &cover.outputs {
            *out_hist.entry(levels[o.net]).or_insert(0) += 1;
            out_sum += levels[o.net] as i64;
        }
        let mut s = CoverState {
            levels,
            fanout,
            sinks,
            topo_pos,
            stage,
            stage_hist,
            balance,
            internal_dffs: internal,
            out_hist,
            out_sum,
            gates: cover.gate_count(),
            avail,
            metrics: CoverMetrics {
                worst_stage: 0.0,
                depth: 0,
                psd: 0.0,
            },
        };
        s.metrics = s.combine(ctx, cover.outputs.len(), &HashMap::new(), 0, &HashMap::new(), 0);
        s
    }

    fn combine(
        &self,
        ctx: &RemapContext,
        outputs: usize,
        stage_delta: &HashMap<u64, i64>,
        dff_delta: i64,
        out_delta: &HashMap<u32, i64>,
        out_sum_delta: i64,
    ) -> CoverMetrics {
        let mut worst = max_key(&self.stage_hist, stage_delta)
            .map(f64::from_bits)
            .unwrap_or(0.0);
        let depth = max_key(&self.out_hist, out_delta).unwrap_or(0);
        let mut dffs = self.internal_dffs + dff_delta;
        if ctx.balance_outputs {
            dffs += outputs as i64 * depth as i64 - (self.out_sum + out_sum_delta);
        }
        if dffs > 0 {
            worst = worst.max(ctx.lib.dff.delay + ctx.model.interconnect_delay);
        }
        CoverMetrics {
            worst_stage: worst,
            depth,
            psd: if depth == 0 { 0.0 } else { worst * depth as f64 },
        }
    }

    /// Gate with the worst stage delay; ties go to higher fanout, then lower id.
    pub(crate) fn worst_cell(&self, cover: &MappedNetwork) -> Option<CellId> {
        let mut best: Option<(f64, u32, CellId)> = None;
        for (c, d) in self.stage.iter().enumerate() {
            let (Some(d), CellKind::Gate(_)) = (d, cover.cells[c].kind) else {
                continue;
            };
            let fo = self.fanout[cover.cells[c].outputs[0]];
            let take = match best {
                None => true,
                Some((bd, bf, _)) => *d > bd || (*d == bd && fo > bf),
            };
            if take {
                best = Some((*d, fo, c));
            }
        }
        best.map(|b| b.2)
    }

    fn replica_inputs(&self, cover: &MappedNetwork, w: CellId, plan: &Plan) -> (CellKind, Vec<Src>, u32) {
        match plan.head {
            Src::Old(n) => {
                let c = &cover.cells[w];
                (c.kind, c.inputs.iter().map(|x| Src::Old(*x)).collect(), self.levels[n])
            }
            Src::New(i) => {
                let c = &plan.cells[i];
                (c.kind, c.inputs.clone(), c.level)
            }
        }
    }

    /// Metrics and gate count of the swept cover the plan produces.
    pub(crate) fn evaluate(
        &self,
        cover: &MappedNetwork,
        ctx: &RemapContext,
        w: CellId,
        plan: &Plan,
    ) -> (CoverMetrics, usize) {
        let out_net = cover.cells[w].outputs[0];
        let (rkind, rinputs, rlevel) = self.replica_inputs(cover, w, plan);
        let first_copy = plan.cells.len();
        let total_new = first_copy + plan.replicas - 1;
        let new_kind = |i: usize| if i < first_copy { plan.cells[i].kind } else { rkind };
        let new_inputs = |i: usize| {
            if i < first_copy {
                &plan.cells[i].inputs
            } else {
                &rinputs
            }
        };
        let new_level = |i: usize| if i < first_copy { plan.cells[i].level } else { rlevel };

        let mut fan_delta: HashMap<NetId, i64> = HashMap::new();
        let mut new_fan = vec![0u32; total_new];
        for i in 0..total_new {
            for s in new_inputs(i) {
                match *s {
                    Src::Old(n) => bump(&mut fan_delta, n, 1),
                    Src::New(j) => new_fan[j] += 1,
                }
            }
        }
        let replicas: Vec<Src> = std::iter::once(plan.head)
            .chain((first_copy..total_new).map(Src::New))
            .collect();
        let list = &self.sinks[out_net];
        let mut pin_override: HashMap<(CellId, usize), Src> = HashMap::new();
        let mut out_override: HashMap<usize, Src> = HashMap::new();
        for (k, s) in list.iter().enumerate() {
            let target = replicas[k * plan.replicas / list.len()];
            match target {
                Src::New(j) => new_fan[j] += 1,
                Src::Old(n) => bump(&mut fan_delta, n, 1),
            }
            if target != Src::Old(out_net) {
                match *s {
                    Sink::Pin(c, p) => {
                        pin_override.insert((c, p), target);
                    }
                    Sink::Output(o) => {
                        out_override.insert(o, target);
                    }
                }
            }
        }
        bump(&mut fan_delta, out_net, -(list.len() as i64));

        // cells left without sinks disappear, recursively
        let mut dead: HashSet<CellId> = HashSet::new();
        let mut stack: Vec<NetId> = fan_delta.iter().filter(|(_, d)| **d < 0).map(|(n, _)| *n).collect();
        while let Some(n) = stack.pop() {
            if self.fanout[n] as i64 + fan_delta.get(&n).copied().unwrap_or(0) != 0 {
                continue;
            }
            let Driver::Cell(c, _) = cover.nets[n].driver else {
                continue;
            };
            if !dead.insert(c) {
                continue;
            }
            for i in &cover.cells[c].inputs {
                bump(&mut fan_delta, *i, -1);
                stack.push(*i);
            }
        }

        let mut stage_delta: HashMap<u64, i64> = HashMap::new();
        let mut gates = self.gates as i64;
        for (&n, &d) in &fan_delta {
            if d == 0 {
                continue;
            }
            let Driver::Cell(c, _) = cover.nets[n].driver else {
                continue;
            };
            if dead.contains(&c) {
                continue;
            }
            let old = self.stage[c];
            let new = stage_of(ctx, cover.cells[c].kind, (self.fanout[n] as i64 + d) as u32);
            if old != new {
                if let Some(o) = old {
                    bump(&mut stage_delta, o.to_bits(), -1);
                }
                if let Some(x) = new {
                    bump(&mut stage_delta, x.to_bits(), 1);
                }
            }
        }
        let mut dff_delta = 0i64;
        for &c in &dead {
            if let Some(o) = self.stage[c] {
                bump(&mut stage_delta, o.to_bits(), -1);
            }
            dff_delta -= self.balance[c] as i64;
            if matches!(cover.cells[c].kind, CellKind::Gate(_) | CellKind::Const(_)) {
                gates -= 1;
            }
        }
        for (i, fo) in new_fan.iter().enumerate() {
            if let Some(x) = stage_of(ctx, new_kind(i), *fo) {
                bump(&mut stage_delta, x.to_bits(), 1);
            }
            if matches!(new_kind(i), CellKind::Gate(_) | CellKind::Const(_)) {
                gates += 1;
            }
        }

        // levels downstream of the reassigned sinks
        let mut lv_over: HashMap<NetId, u32> = HashMap::new();
        let src_level = |s: Src, lv_over: &HashMap<NetId, u32>| match s {
            Src::Old(n) => lv_over.get(&n).copied().unwrap_or(self.levels[n]),
            Src::New(i) => new_level(i),
        };
        let mut heap: BinaryHeap<Reverse<(usize, CellId)>> = BinaryHeap::new();
        let mut queued: HashSet<CellId> = HashSet::new();
        for &(c, _) in pin_override.keys() {
            if queued.insert(c) {
                heap.push(Reverse((self.topo_pos[c], c)));
            }
        }
        let mut changed_nets: Vec<NetId> = Vec::new();
        while let Some(Reverse((_, c))) = heap.pop() {
            let cell = &cover.cells[c];
            let ins: Vec<u32> = cell
                .inputs
                .iter()
                .enumerate()
                .map(|(p, n)| src_level(pin_override.get(&(c, p)).copied().unwrap_or(Src::Old(*n)), &lv_over))
                .collect();
            if cell.kind.is_clocked() && !ins.is_empty() {
                dff_delta += balance_cost(&ins) as i64 - self.balance[c] as i64;
            }
            let lv = level_rule(cell.kind, ins.into_iter());
            for &o in &cell.outputs {
                let cur = lv_over.get(&o).copied().unwrap_or(self.levels[o]);
                if lv == cur {
                    continue;
                }
                lv_over.insert(o, lv);
                changed_nets.push(o);
                for s in &self.sinks[o] {
                    if let Sink::Pin(r, _) = s {
                        if queued.insert(*r) {
                            heap.push(Reverse((self.topo_pos[*r], *r)));
                        }
                    }
                }
            }
        }
        for i in 0..total_new {
            let kind = new_kind(i);
            let ins: Vec<u32> = new_inputs(i).iter().map(|s| src_level(*s, &lv_over)).collect();
            if kind.is_clocked() && !ins.is_empty() {
                dff_delta += balance_cost(&ins) as i64;
            }
        }

        let mut out_delta: HashMap<u32, i64> = HashMap::new();
        let mut out_sum_delta = 0i64;
        let mut move_output = |o: usize, new: u32, out_delta: &mut HashMap<u32, i64>| {
            let old = self.levels[cover.outputs[o].net];
            if old != new {
                bump(out_delta, old, -1);
                bump(out_delta, new, 1);
                out_sum_delta += new as i64 - old as i64;
            }
        };
        for (&o, &s) in &out_override {
            move_output(o, src_level(s, &lv_over), &mut out_delta);
        }
        for n in &changed_nets {
            for s in &self.sinks[*n] {
                if let Sink::Output(o) = s {
                    if !out_override.contains_key(o) {
                        move_output(*o, lv_over[n], &mut out_delta);
                    }
                }
            }
        }
        let m = self.combine(
            ctx,
            cover.outputs.len(),
            &stage_delta,
            dff_delta,
            &out_delta,
            out_sum_delta,
        );
        (m, gates.max(0) as usize)
    }

    /// The swept cover a plan produces.
    pub(crate) fn apply(&self, cover: &MappedNetwork, w: CellId, plan: &Plan) -> MappedNetwork {
        let out_net = cover.cells[w].outputs[0];
        let mut net = cover.clone();
        let mut names = NameGen::for_network(cover);
        let mut ids: Vec<NetId> = Vec::with_capacity(plan.cells.len());
        let resolve = |s: &Src, ids: &[NetId]| match *s {
            Src::Old(n) => n,
            Src::New(i) => ids[i],
        };
        for nc in &plan.cells {
            let inputs = nc.inputs.iter().map(|s| resolve(s, &ids)).collect();
            let name = names.fresh(&nc.base);
            let c = net.add_cell(nc.kind, inputs, vec![name], Some(nc.origin));
            ids.push(net.cells[c].outputs[0]);
        }
        let head = resolve(&plan.head, &ids);
        let Driver::Cell(driver, _) = net.nets[head].driver else {
            return net.sweep();
        };
        let lit = cover.cells[w].origin;
        let mut replicas = vec![head];
        for _ in 1..plan.replicas {
            let kind = net.cells[driver].kind;
            let inputs = net.cells[driver].inputs.clone();
            let name = names.fresh(&format!("{}_r", cover.nets[out_net].name));
            let c = net.add_cell(kind, inputs, vec![name], lit);
            replicas.push(net.cells[c].outputs[0]);
        }
        // contiguous chunks whose sizes differ by at most one
        let list = &self.sinks[out_net];
        for (k, s) in list.iter().enumerate() {
            let target = replicas[k * plan.replicas / list.len()];
            match *s {
                Sink::Pin(c, p) => net.cells[c].inputs[p] = target,
                Sink::Output(o) => net.outputs[o].net = target,
            }
        }
        net.sweep()
    }
}

/// Grows one plan's support on top of the cached cover, reusing existing
/// realizations of literals where they are shallow enough.
struct PlanBuilder<'s, 'a, 'c> {
    state: &'s CoverState,
    ctx: &'a RemapContext<'c>,
    base_nets: usize,
    cells: Vec<NewCell>,
    avail: HashMap<Lit, Vec<(Src, bool)>>,
}

impl<'s, 'a, 'c> PlanBuilder<'s, 'a, 'c> {
    fn new(state: &'s CoverState, ctx: &'a RemapContext<'c>, base_nets: usize) -> Self {
        PlanBuilder {
            state,
            ctx,
            base_nets,
            cells: Vec::new(),
            avail: HashMap::new(),
        }
    }

    fn level(&self, s: Src) -> u32 {
        match s {
            Src::Old(n) => self.state.levels[n],
            Src::New(i) => self.cells[i].level,
        }
    }

    fn order_key(&self, s: Src) -> usize {
        match s {
            Src::Old(n) => n,
            Src::New(i) => self.base_nets + i,
        }
    }

    fn add(&mut self, kind: CellKind, inputs: Vec<Src>, base: String, origin: Lit) -> Src {
        let level = level_rule(kind, inputs.iter().map(|s| self.level(*s)));
        let s = Src::New(self.cells.len());
        let is_gate = !matches!(kind, CellKind::Gate(g) if Some(g) == self.ctx.lib.inverter);
        self.cells.push(NewCell {
            kind,
            inputs,
            origin,
            level,
            base,
        });
        self.avail.entry(origin).or_default().push((s, is_gate));
        s
    }

    fn name_for(lit: Lit) -> String {
        format!("n{}{}", lit.node(), if lit.is_complemented() { "_b" } else { "" })
    }

    /// A signal carrying `lit` at level `<= level`.
    fn materialize(&mut self, lit: Lit, level: u32, gate_only: bool) -> Option<Src> {
        let old = self
            .state
            .avail
            .get(&lit)
            .into_iter()
            .flatten()
            .map(|(n, g)| (Src::Old(*n), *g));
        let new = self.avail.get(&lit).into_iter().flatten().copied();
        let found = old
            .chain(new)
            .filter(|(s, g)| (*g || !gate_only) && self.level(*s) <= level)
            .min_by_key(|(s, _)| (self.level(*s), self.order_key(*s)))
            .map(|x| x.0);
        if found.is_some() {
            return found;
        }
        let (exact, choice) = self.ctx.table.realization(lit, level, gate_only)?;
        match choice {
            Choice::Input => self
                .state
                .avail
                .get(&lit)
                .and_then(|l| l.first())
                .map(|x| Src::Old(x.0)),
            Choice::Gate(c) => {
                let leaves = candidate_leaves(self.ctx.cuts, lit.node(), &c);
                let mut nets = Vec::with_capacity(leaves.len());
                for l in leaves {
                    nets.push(self.materialize(l, exact - 1, false)?);
                }
                let gate = &self.ctx.lib.gates[c.m.gate];
                let inputs = (0..gate.fanin_count())
                    .map(|p| nets[c.m.pin_leaf[p] as usize])
                    .collect();
                Some(self.add(CellKind::Gate(c.m.gate), inputs, Self::name_for(lit), lit))
            }
            Choice::Inv => {
                let src = self.materialize(!lit, exact - 1, true)?;
                let inv = self.ctx.lib.inverter?;
                Some(self.add(CellKind::Gate(inv), vec![src], Self::name_for(lit), lit))
            }
            Choice::None => None,
        }
    }
}

/// Replica counts worth trying for a cell with `fanout` sinks under `cap`:
/// the fewest replicas reaching each distinct splitter depth, starting from
/// `ceil(fanout / cap)`.
pub fn replica_counts(fanout: usize, cap: usize) -> Vec<usize> {
    if fanout == 0 {
        return vec![1];
    }
    let mut out = Vec::new();
    let mut last = u32::MAX;
    for r in fanout.div_ceil(cap.max(1))..=fanout {
        let lv = splitter_levels(fanout.div_ceil(r));
        if lv < last {
            out.push(r);
            last = lv;
        }
    }
    out
}

/// Every move on cell `w`: each realization of its literal (the current
/// cell, other matches within its level, an inverter on the opposite phase)
/// combined with each useful replica count under the fanout cap.
pub(crate) fn plans(cover: &MappedNetwork, state: &CoverState, ctx: &RemapContext, w: CellId, cap: usize) -> Vec<Plan> {
    let cell = &cover.cells[w];
    let Some(lit) = cell.origin else {
        return Vec::new();
    };
    let out_net = cell.outputs[0];
    let fanout = state.fanout[out_net] as usize;
    let level = state.levels[out_net];
    let counts = replica_counts(fanout, cap);
    let base_nets = cover.nets.len();
    let head_name = format!("{}_r", cover.nets[out_net].name);

    let mut alts: Vec<(Vec<NewCell>, Src)> = vec![(Vec::new(), Src::Old(out_net))];
    let mut seen: Vec<(CellKind, Vec<Src>)> = vec![(cell.kind, cell.inputs.iter().map(|n| Src::Old(*n)).collect())];
    if level > 0 {
        for c in ctx.table.candidates(lit.node()) {
            if c.m.output_inverted != lit.is_complemented() || c.depth > level {
                continue;
            }
            let mut b = PlanBuilder::new(state, ctx, base_nets);
            let leaves = candidate_leaves(ctx.cuts, lit.node(), c);
            let mut nets = Vec::with_capacity(leaves.len());
            for l in &leaves {
                match b.materialize(*l, level - 1, false) {
                    Some(n) => nets.push(n),
                    None => break,
                }
            }
            if nets.len() != leaves.len() {
                continue;
            }
            let gate = &ctx.lib.gates[c.m.gate];
            let inputs: Vec<Src> = (0..gate.fanin_count())
                .map(|p| nets[c.m.pin_leaf[p] as usize])
                .collect();
            let kind = CellKind::Gate(c.m.gate);
            if seen.iter().any(|(k, i)| *k == kind && *i == inputs) {
                continue;
            }
            seen.push((kind, inputs.clone()));
            let head = b.add(kind, inputs, head_name.clone(), lit);
            alts.push((b.cells, head));
        }
        if let Some(inv) = ctx.lib.inverter {
            let mut b = PlanBuilder::new(state, ctx, base_nets);
            if let Some(src) = b.materialize(!lit, level - 1, true) {
                let kind = CellKind::Gate(inv);
                if !seen.iter().any(|(k, i)| *k == kind && *i == [src]) {
                    let head = b.add(kind, vec![src], head_name.clone(), lit);
                    alts.push((b.cells, head));
                }
            }
        }
    }

    let mut out = Vec::new();
    for (i, (cells, head)) in alts.into_iter().enumerate() {
        for &r in &counts {
            if i == 0 && r == 1 {
                continue;
            }
            out.push(Plan {
                cells: cells.clone(),
                head,
                replicas: r,
            });
        }
    }
    out
}
