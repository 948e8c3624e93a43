//! Brute-force reference implementations.
//!
//! Nothing here shares code with the cut enumerator, the matcher or the
//! mapper's dynamic program: cuts come from testing every leaf subset of a
//! cone, matches from trying every pin assignment and phase, and covers from
//! explicit enumeration. Equivalence checking is also here, since it is the
//! same kind of exhaustive reference and the CLI's `--verify` uses it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::error::MapError;
use crate::genlib::{CellLibrary, GateId};
use crate::mapped::MappedNetwork;
use crate::netlist::RawNetlist;
use crate::subject::{Lit, NodeId, NodeKind, SubjectGraph};

/// Largest graph the cover enumerator accepts (AND nodes).
pub const MAX_ORACLE_NODES: usize = 25;
/// Budget on complete covers visited by [`exhaustive_map`].
pub const MAX_COVERS: usize = 2_000_000;

// ---------------------------------------------------------------------------
// cuts and matches

/// Function of `root` over `leaves` as a vector of output bits indexed by
/// minterm (leaf `i` is bit `i` of the index). `None` if not a cut.
pub fn brute_cut_function(g: &SubjectGraph, root: NodeId, leaves: &[NodeId]) -> Option<Vec<bool>> {
    let n = leaves.len();
    let mut out = Vec::with_capacity(1 << n);
    for m in 0..(1usize << n) {
        let mut memo: HashMap<NodeId, bool> = HashMap::new();
        for (i, l) in leaves.iter().enumerate() {
            memo.insert(*l, (m >> i) & 1 == 1);
        }
        out.push(eval_node(g, root, &mut memo)?);
    }
    Some(out)
}

fn eval_node(g: &SubjectGraph, id: NodeId, memo: &mut HashMap<NodeId, bool>) -> Option<bool> {
    if let Some(v) = memo.get(&id) {
        return Some(*v);
    }
    let v = match g.kind(id) {
        NodeKind::Const1 => true,
        NodeKind::Input => return None,
        NodeKind::And(a, b) => {
            let x = eval_node(g, a.node(), memo)? ^ a.is_complemented();
            let y = eval_node(g, b.node(), memo)? ^ b.is_complemented();
            x && y
        }
    };
    memo.insert(id, v);
    Some(v)
}

fn cone(g: &SubjectGraph, root: NodeId) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        if n == 0 || !seen.insert(n) {
            continue;
        }
        if let NodeKind::And(a, b) = g.kind(n) {
            stack.push(a.node());
            stack.push(b.node());
        }
    }
    seen
}

fn separates(g: &SubjectGraph, root: NodeId, leaves: &BTreeSet<NodeId>) -> bool {
    fn walk(g: &SubjectGraph, n: NodeId, leaves: &BTreeSet<NodeId>, top: bool) -> bool {
        if !top && leaves.contains(&n) {
            return true;
        }
        match g.kind(n) {
            NodeKind::Const1 => true,
            NodeKind::Input => false,
            NodeKind::And(a, b) => walk(g, a.node(), leaves, false) && walk(g, b.node(), leaves, false),
        }
    }
    walk(g, root, leaves, true)
}

fn subsets(items: &[NodeId], max: usize) -> Vec<Vec<NodeId>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(items: &[NodeId], start: usize, max: usize, cur: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, i + 1, max, cur, out);
            cur.pop();
        }
    }
    rec(items, 0, max, &mut cur, &mut out);
    out
}

/// Every minimal cut of `root` with at most `k` leaves, the trivial cut
/// excluded, sorted by (size, leaves).
pub fn brute_cuts(g: &SubjectGraph, root: NodeId, k: usize) -> Vec<Vec<NodeId>> {
    let mut candidates: Vec<NodeId> = cone(g, root).into_iter().filter(|n| *n != root).collect();
    candidates.sort();
    let mut cuts: Vec<Vec<NodeId>> = subsets(&candidates, k)
        .into_iter()
        .filter(|s| separates(g, root, &s.iter().copied().collect()))
        .collect();
    // minimal: no proper subset is itself a cut
    let all: BTreeSet<Vec<NodeId>> = cuts.iter().cloned().collect();
    cuts.retain(|c| {
        subsets(c, c.len())
            .into_iter()
            .filter(|s| s.len() < c.len())
            .all(|s| !all.contains(&s))
    });
    cuts.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    cuts
}

/// One way of implementing a cut with a gate, described by the literal each
/// gate pin reads.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BruteMatch {
    pub gate: GateId,
    /// For each gate pin: (leaf index, read complemented).
    pub pins: Vec<(usize, bool)>,
    pub output_inverted: bool,
}

fn gate_output(lib: &CellLibrary, gate: GateId, pin_values: &[bool]) -> bool {
    let m: usize = pin_values.iter().enumerate().map(|(i, v)| (*v as usize) << i).sum();
    (lib.gates[gate].function >> m) & 1 == 1
}

/// All gate realizations of a cut function, one per (gate, leaf phases,
/// output phase).
pub fn brute_matches(lib: &CellLibrary, function: &[bool], n: usize) -> Vec<BruteMatch> {
    let mut out: BTreeMap<(GateId, Vec<bool>, bool), BruteMatch> = BTreeMap::new();
    let leaves: Vec<usize> = (0..n).collect();
    let perms = permutations(&leaves);
    for (gid, gate) in lib.gates.iter().enumerate() {
        if gate.fanin_count() != n || n == 0 {
            continue;
        }
        for perm in &perms {
            for neg in 0..(1usize << n) {
                let pins: Vec<(usize, bool)> = perm.iter().map(|l| (*l, (neg >> l) & 1 == 1)).collect();
                let realized: Vec<bool> = (0..(1usize << n))
                    .map(|m| {
                        let vals: Vec<bool> = pins.iter().map(|(l, c)| ((m >> l) & 1 == 1) ^ c).collect();
                        gate_output(lib, gid, &vals)
                    })
                    .collect();
                for inv in [false, true] {
                    if realized.iter().zip(function).all(|(r, f)| (*r ^ inv) == *f) {
                        let phases: Vec<bool> = (0..n).map(|l| (neg >> l) & 1 == 1).collect();
                        out.entry((gid, phases, inv)).or_insert(BruteMatch {
                            gate: gid,
                            pins: pins.clone(),
                            output_inverted: inv,
                        });
                    }
                }
            }
        }
    }
    out.into_values().collect()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// realizations

/// How one literal is produced in a cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Realization {
    Input,
    Gate {
        gate: GateId,
        leaves: Vec<NodeId>,
        /// Literal read by each gate pin.
        pins: Vec<Lit>,
    },
    /// Inverter reading the opposite phase of the same node.
    Inverter,
}

impl Realization {
    fn reads(&self, lit: Lit) -> Vec<Lit> {
        match self {
            Realization::Input => Vec::new(),
            Realization::Gate { pins, .. } => pins.clone(),
            Realization::Inverter => vec![!lit],
        }
    }
}

/// Every realization of every literal of the graph.
struct Options {
    by_lit: HashMap<Lit, Vec<Realization>>,
}

impl Options {
    fn build(g: &SubjectGraph, lib: &CellLibrary, k: usize) -> Options {
        let mut by_lit: HashMap<Lit, Vec<Realization>> = HashMap::new();
        for id in 1..g.len() as NodeId {
            let pos = Lit::new(id, false);
            let neg = Lit::new(id, true);
            match g.kind(id) {
                NodeKind::Const1 => continue,
                NodeKind::Input => by_lit.entry(pos).or_default().push(Realization::Input),
                NodeKind::And(..) => {
                    for leaves in brute_cuts(g, id, k) {
                        let f = brute_cut_function(g, id, &leaves).expect("cut");
                        for m in brute_matches(lib, &f, leaves.len()) {
                            let pins = m.pins.iter().map(|(l, c)| Lit::new(leaves[*l], *c)).collect();
                            let lit = if m.output_inverted { neg } else { pos };
                            by_lit.entry(lit).or_default().push(Realization::Gate {
                                gate: m.gate,
                                leaves: leaves.clone(),
                                pins,
                            });
                        }
                    }
                }
            }
            if lib.inverter.is_some() {
                by_lit.entry(pos).or_default().push(Realization::Inverter);
                by_lit.entry(neg).or_default().push(Realization::Inverter);
            }
        }
        Options { by_lit }
    }

    fn of(&self, lit: Lit) -> &[Realization] {
        self.by_lit.get(&lit).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// A complete cover: one realization per used literal.
pub type Cover = BTreeMap<Lit, Realization>;

/// Level of every literal in a cover and its total balancing DFF count
/// (sum over gates of `max input level - input level`). `None` if the cover
/// is cyclic or incomplete.
pub fn evaluate_cover(cover: &Cover) -> Option<(BTreeMap<Lit, u32>, u64)> {
    fn level(lit: Lit, cover: &Cover, memo: &mut BTreeMap<Lit, u32>, active: &mut BTreeSet<Lit>) -> Option<u32> {
        if let Some(l) = memo.get(&lit) {
            return Some(*l);
        }
        if !active.insert(lit) {
            return None;
        }
        let r = cover.get(&lit)?;
        let l = match r {
            Realization::Input => 0,
            _ => {
                let mut hi = 0;
                for x in r.reads(lit) {
                    hi = hi.max(level(x, cover, memo, active)?);
                }
                hi + 1
            }
        };
        active.remove(&lit);
        memo.insert(lit, l);
        Some(l)
    }
    let mut memo = BTreeMap::new();
    let mut active = BTreeSet::new();
    for lit in cover.keys() {
        level(*lit, cover, &mut memo, &mut active)?;
    }
    let mut dffs = 0u64;
    for (lit, r) in cover {
        let ins: Vec<u32> = r.reads(*lit).iter().map(|x| memo[x]).collect();
        if let Some(hi) = ins.iter().max() {
            dffs += ins.iter().map(|l| (hi - l) as u64).sum::<u64>();
        }
    }
    Some((memo, dffs))
}

/// Lexicographic optimum over all covers of the graph's outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub min_depth: u32,
    pub min_dffs_at_min_depth: u64,
    /// Cover achieving the optimum.
    pub witness: Cover,
    pub covers_visited: usize,
}

/// Enumerate every legal cover of the outputs (each used literal gets one
/// realization; an inverter needs a gate on the opposite phase) and return
/// the minimum (depth, DFF count).
pub fn exhaustive_map(g: &SubjectGraph, lib: &CellLibrary, k: usize) -> Result<OracleResult, MapError> {
    if g.and_count() > MAX_ORACLE_NODES {
        return Err(MapError::TooLarge(format!(
            "{} AND nodes exceed the oracle limit of {MAX_ORACLE_NODES}",
            g.and_count()
        )));
    }
    let opts = Options::build(g, lib, k);
    let roots: BTreeSet<Lit> = g.outputs().iter().map(|o| o.lit).filter(|l| l.node() != 0).collect();
    let mut best: Option<(u32, u64, Cover)> = None;
    let mut visited = 0usize;
    let mut cover = Cover::new();
    let mut pending: BTreeSet<Lit> = roots.clone();
    search(&opts, &roots, &mut cover, &mut pending, &mut best, &mut visited)?;
    let (d, f, w) = best.ok_or_else(|| MapError::Unverified("no legal cover".into()))?;
    Ok(OracleResult {
        min_depth: d,
        min_dffs_at_min_depth: f,
        witness: w,
        covers_visited: visited,
    })
}

fn search(
    opts: &Options,
    roots: &BTreeSet<Lit>,
    cover: &mut Cover,
    pending: &mut BTreeSet<Lit>,
    best: &mut Option<(u32, u64, Cover)>,
    visited: &mut usize,
) -> Result<(), MapError> {
    let next = pending.iter().rev().find(|l| !cover.contains_key(l)).copied();
    let Some(lit) = next else {
        *visited += 1;
        if *visited > MAX_COVERS {
            return Err(MapError::TooLarge("cover budget exhausted".into()));
        }
        if let Some((levels, dffs)) = evaluate_cover(cover) {
            let depth = roots.iter().map(|r| levels[r]).max().unwrap_or(0);
            if best.as_ref().is_none_or(|(d, f, _)| (depth, dffs) < (*d, *f)) {
                *best = Some((depth, dffs, cover.clone()));
            }
        }
        return Ok(());
    };
    for r in opts.of(lit) {
        if *r == Realization::Inverter {
            // the opposite phase must come from a gate
            if matches!(cover.get(&!lit), Some(Realization::Inverter)) {
                continue;
            }
        }
        let added: Vec<Lit> = r.reads(lit).into_iter().filter(|x| pending.insert(*x)).collect();
        cover.insert(lit, r.clone());
        search(opts, roots, cover, pending, best, visited)?;
        cover.remove(&lit);
        for x in added {
            pending.remove(&x);
        }
    }
    Ok(())
}

/// Independent second enumerator for trees: the set of all reachable
/// (level, DFF) pairs of each literal, combined bottom-up. Valid only when
/// no literal is shared (every node has one consumer).
pub fn tree_outcomes(g: &SubjectGraph, lib: &CellLibrary, k: usize, root: Lit) -> BTreeSet<(u32, u64)> {
    let opts = Options::build(g, lib, k);
    let mut memo: HashMap<(Lit, bool), BTreeSet<(u32, u64)>> = HashMap::new();
    outcomes(&opts, root, false, &mut memo)
}

fn outcomes(
    opts: &Options,
    lit: Lit,
    gate_only: bool,
    memo: &mut HashMap<(Lit, bool), BTreeSet<(u32, u64)>>,
) -> BTreeSet<(u32, u64)> {
    if let Some(s) = memo.get(&(lit, gate_only)) {
        return s.clone();
    }
    let mut set = BTreeSet::new();
    for r in opts.of(lit) {
        match r {
            Realization::Input => {
                set.insert((0, 0));
            }
            Realization::Inverter => {
                if gate_only {
                    continue;
                }
                for (l, f) in outcomes(opts, !lit, true, memo) {
                    set.insert((l + 1, f));
                }
            }
            Realization::Gate { pins, .. } => {
                let mut acc: Vec<Vec<(u32, u64)>> = vec![Vec::new()];
                for p in pins {
                    let sub = outcomes(opts, *p, false, memo);
                    let mut next = Vec::new();
                    for prefix in &acc {
                        for o in &sub {
                            let mut v = prefix.clone();
                            v.push(*o);
                            next.push(v);
                        }
                    }
                    acc = next;
                }
                for combo in acc {
                    let hi = combo.iter().map(|x| x.0).max().unwrap_or(0);
                    let f: u64 = combo.iter().map(|x| x.1 + (hi - x.0) as u64).sum();
                    set.insert((hi + 1, f));
                }
            }
        }
    }
    memo.insert((lit, gate_only), set.clone());
    set
}

/// Minimum achievable depth of every output by memoized recursion over
/// brute-force cuts and matches (`u32::MAX` if unrealizable).
pub fn min_depths(g: &SubjectGraph, lib: &CellLibrary, k: usize) -> Vec<u32> {
    let opts = Options::build(g, lib, k);
    let mut memo: HashMap<(Lit, bool), u32> = HashMap::new();
    g.outputs()
        .iter()
        .map(|o| {
            if o.lit.node() == 0 {
                0
            } else {
                depth_of(&opts, o.lit, false, &mut memo)
            }
        })
        .collect()
}

fn depth_of(opts: &Options, lit: Lit, gate_only: bool, memo: &mut HashMap<(Lit, bool), u32>) -> u32 {
    if let Some(d) = memo.get(&(lit, gate_only)) {
        return *d;
    }
    let mut best = u32::MAX;
    for r in opts.of(lit) {
        let d = match r {
            Realization::Input => 0,
            Realization::Inverter if gate_only => continue,
            Realization::Inverter => depth_of(opts, !lit, true, memo).saturating_add(1),
            Realization::Gate { pins, .. } => pins
                .iter()
                .map(|p| depth_of(opts, *p, false, memo))
                .max()
                .unwrap_or(0)
                .saturating_add(1),
        };
        best = best.min(d);
    }
    memo.insert((lit, gate_only), best);
    best
}

// ---------------------------------------------------------------------------
// equivalence

/// Something with named inputs and outputs that can be evaluated on 64
/// patterns at once.
pub trait Simulate {
    fn input_names(&self) -> Vec<String>;
    fn output_names(&self) -> Vec<String>;
    fn simulate_words(&self, inputs: &[u64]) -> Vec<u64>;
}

impl Simulate for RawNetlist {
    fn input_names(&self) -> Vec<String> {
        self.inputs.clone()
    }
    fn output_names(&self) -> Vec<String> {
        self.outputs.clone()
    }
    fn simulate_words(&self, inputs: &[u64]) -> Vec<u64> {
        RawNetlist::simulate_words(self, inputs)
    }
}

impl Simulate for SubjectGraph {
    fn input_names(&self) -> Vec<String> {
        SubjectGraph::input_names(self).to_vec()
    }
    fn output_names(&self) -> Vec<String> {
        self.outputs().iter().map(|o| o.name.clone()).collect()
    }
    fn simulate_words(&self, inputs: &[u64]) -> Vec<u64> {
        SubjectGraph::simulate_words(self, inputs)
    }
}

/// A mapped network together with the library its gates refer to.
pub struct WithLibrary<'a>(pub &'a MappedNetwork, pub &'a CellLibrary);

impl Simulate for WithLibrary<'_> {
    fn input_names(&self) -> Vec<String> {
        self.0.input_names()
    }
    fn output_names(&self) -> Vec<String> {
        self.0.output_names()
    }
    fn simulate_words(&self, inputs: &[u64]) -> Vec<u64> {
        self.0.simulate_words(self.1, inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent {
        patterns: u64,
        exhaustive: bool,
    },
    Counterexample {
        output: String,
        /// Input assignment in the first network's input order.
        pattern: Vec<(String, bool)>,
    },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

pub const EXHAUSTIVE_INPUT_LIMIT: usize = 16;
pub const RANDOM_PATTERNS: u64 = 100_000;

/// Compare two networks output by output, matching inputs and outputs by
/// name. Exhaustive up to 16 inputs, otherwise 10^5 seeded random patterns.
pub fn check_equivalence(a: &dyn Simulate, b: &dyn Simulate) -> Result<Equivalence, MapError> {
    let ai = a.input_names();
    let bi = b.input_names();
    let ao = a.output_names();
    let bo = b.output_names();
    let sa: BTreeSet<&String> = ai.iter().collect();
    let sb: BTreeSet<&String> = bi.iter().collect();
    if sa != sb || sa.len() != ai.len() || sb.len() != bi.len() {
        return Err(MapError::InterfaceMismatch(format!("inputs {ai:?} vs {bi:?}")));
    }
    let oa: BTreeSet<&String> = ao.iter().collect();
    let ob: BTreeSet<&String> = bo.iter().collect();
    if oa != ob || oa.len() != ao.len() || ob.len() != bo.len() {
        return Err(MapError::InterfaceMismatch(format!("outputs {ao:?} vs {bo:?}")));
    }
    let b_in: Vec<usize> = ai.iter().map(|n| bi.iter().position(|x| x == n).unwrap()).collect();
    let b_out: Vec<usize> = ao.iter().map(|n| bo.iter().position(|x| x == n).unwrap()).collect();
    let n = ai.len();
    let exhaustive = n <= EXHAUSTIVE_INPUT_LIMIT;
    let total: u64 = if exhaustive { 1u64 << n } else { RANDOM_PATTERNS };
    let words = total.div_ceil(64);
    let mut rng = StdRng::seed_from_u64(0x5eed_f1a5);
    for w in 0..words {
        let valid = if (w + 1) * 64 <= total {
            u64::MAX
        } else {
            (1u64 << (total - w * 64)) - 1
        };
        let ins: Vec<u64> = if exhaustive {
            (0..n).map(|i| pattern_word(i, w)).collect()
        } else {
            (0..n).map(|_| rng.random::<u64>()).collect()
        };
        let mut ins_b = vec![0u64; n];
        for (i, x) in ins.iter().enumerate() {
            ins_b[b_in[i]] = *x;
        }
        let ya = a.simulate_words(&ins);
        let yb = b.simulate_words(&ins_b);
        for (o, name) in ao.iter().enumerate() {
            let diff = (ya[o] ^ yb[b_out[o]]) & valid;
            if diff != 0 {
                let bit = diff.trailing_zeros();
                let pattern = ai
                    .iter()
                    .zip(&ins)
                    .map(|(nm, x)| (nm.clone(), (x >> bit) & 1 == 1))
                    .collect();
                return Ok(Equivalence::Counterexample {
                    output: name.clone(),
                    pattern,
                });
            }
        }
    }
    Ok(Equivalence::Equivalent {
        patterns: total,
        exhaustive,
    })
}

/// Word `w` of input `i` when enumerating all assignments in order.
fn pattern_word(i: usize, w: u64) -> u64 {
    if i < 6 {
        const BASE: [u64; 6] = [
            0xAAAA_AAAA_AAAA_AAAA,
            0xCCCC_CCCC_CCCC_CCCC,
            0xF0F0_F0F0_F0F0_F0F0,
            0xFF00_FF00_FF00_FF00,
            0xFFFF_0000_FFFF_0000,
            0xFFFF_FFFF_0000_0000,
        ];
        BASE[i]
    } else if (w >> (i - 6)) & 1 == 1 {
        u64::MAX
    } else {
        0
    }
}
