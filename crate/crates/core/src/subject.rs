//! Two-input AND graph with complemented edges; the substrate cuts and
//! matches are computed on.

use std::collections::HashMap;

use log::warn;

use crate::netlist::{CubeLit, RawNetlist};

pub type NodeId = u32;

/// A node reference with a complement bit: `node << 1 | complemented`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(pub u32);

impl Lit {
    pub const TRUE: Lit = Lit(0);
    pub const FALSE: Lit = Lit(1);

    #[inline]
    pub fn new(node: NodeId, complemented: bool) -> Lit {
        Lit(node << 1 | complemented as u32)
    }

    #[inline]
    pub fn node(self) -> NodeId {
        self.0 >> 1
    }

    #[inline]
    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn positive(self) -> Lit {
        Lit(self.0 & !1)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Node 0: constant one (its complement is constant zero).
    Const1,
    Input,
    And(Lit, Lit),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub lit: Lit,
}

/// Structurally hashed AND graph. Node ids are topological: every fanin id
/// is smaller than the id of the node that reads it.
#[derive(Debug, Clone)]
pub struct SubjectGraph {
    model_name: String,
    nodes: Vec<NodeKind>,
    inputs: Vec<NodeId>,
    input_names: Vec<String>,
    outputs: Vec<Output>,
    strash: HashMap<(Lit, Lit), NodeId>,
}

impl Default for SubjectGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl SubjectGraph {
    pub fn new() -> Self {
        SubjectGraph {
            model_name: "top".to_string(),
            nodes: vec![NodeKind::Const1],
            inputs: Vec::new(),
            input_names: Vec::new(),
            outputs: Vec::new(),
            strash: HashMap::new(),
        }
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn set_model_name(&mut self, name: impl Into<String>) {
        self.model_name = name.into();
    }

    pub fn add_input(&mut self, name: impl Into<String>) -> Lit {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(NodeKind::Input);
        self.inputs.push(id);
        self.input_names.push(name.into());
        Lit::new(id, false)
    }

    pub fn add_output(&mut self, name: impl Into<String>, lit: Lit) {
        self.outputs.push(Output { name: name.into(), lit });
    }

    /// AND with constant folding and structural hashing.
    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if a == Lit::FALSE || a == !b {
            return Lit::FALSE;
        }
        if a == Lit::TRUE || a == b {
            return b;
        }
        if let Some(&id) = self.strash.get(&(a, b)) {
            return Lit::new(id, false);
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(NodeKind::And(a, b));
        self.strash.insert((a, b), id);
        Lit::new(id, false)
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    /// Balanced AND tree over `lits`.
    pub fn and_balanced(&mut self, lits: &[Lit]) -> Lit {
        if lits.is_empty() {
            return Lit::TRUE;
        }
        let mut layer = lits.to_vec();
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len().div_ceil(2));
            for pair in layer.chunks(2) {
                next.push(if pair.len() == 2 {
                    self.and(pair[0], pair[1])
                } else {
                    pair[0]
                });
            }
            layer = next;
        }
        layer[0]
    }

    pub fn or_balanced(&mut self, lits: &[Lit]) -> Lit {
        let inv: Vec<Lit> = lits.iter().map(|l| !*l).collect();
        if inv.is_empty() {
            return Lit::FALSE;
        }
        !self.and_balanced(&inv)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id as usize]
    }

    pub fn is_and(&self, id: NodeId) -> bool {
        matches!(self.nodes[id as usize], NodeKind::And(..))
    }

    pub fn is_input(&self, id: NodeId) -> bool {
        matches!(self.nodes[id as usize], NodeKind::Input)
    }

    pub fn fanins(&self, id: NodeId) -> Option<(Lit, Lit)> {
        match self.nodes[id as usize] {
            NodeKind::And(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn input_index(&self, id: NodeId) -> Option<usize> {
        self.inputs.binary_search(&id).ok()
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn and_count(&self) -> usize {
        self.nodes.iter().filter(|k| matches!(k, NodeKind::And(..))).count()
    }

    /// Number of fanout references per node, outputs included.
    pub fn fanout_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.nodes.len()];
        for k in &self.nodes {
            if let NodeKind::And(a, b) = k {
                counts[a.node() as usize] += 1;
                counts[b.node() as usize] += 1;
            }
        }
        for o in &self.outputs {
            counts[o.lit.node() as usize] += 1;
        }
        counts
    }

    /// Evaluate every node on 64 patterns at once.
    pub fn simulate_nodes(&self, inputs: &[u64]) -> Vec<u64> {
        let mut v = vec![0u64; self.nodes.len()];
        v[0] = u64::MAX;
        for (i, id) in self.inputs.iter().enumerate() {
            v[*id as usize] = inputs[i];
        }
        let lit = |v: &[u64], l: Lit| {
            let x = v[l.node() as usize];
            if l.is_complemented() {
                !x
            } else {
                x
            }
        };
        for id in 0..self.nodes.len() {
            if let NodeKind::And(a, b) = self.nodes[id] {
                v[id] = lit(&v, a) & lit(&v, b);
            }
        }
        v
    }

    pub fn simulate_words(&self, inputs: &[u64]) -> Vec<u64> {
        let v = self.simulate_nodes(inputs);
        self.outputs
            .iter()
            .map(|o| {
                let x = v[o.lit.node() as usize];
                if o.lit.is_complemented() {
                    !x
                } else {
                    x
                }
            })
            .collect()
    }

    /// Evaluate one input assignment.
    pub fn simulate(&self, pattern: &[bool]) -> Vec<bool> {
        let words: Vec<u64> = pattern.iter().map(|b| if *b { 1 } else { 0 }).collect();
        self.simulate_words(&words).into_iter().map(|w| w & 1 == 1).collect()
    }

    /// Logic level of every node: inputs and constants at 0, each AND one
    /// above its deepest fanin.
    pub fn compute_levels(&self) -> Vec<u32> {
        let mut lv = vec![0u32; self.nodes.len()];
        for id in 0..self.nodes.len() {
            if let NodeKind::And(a, b) = self.nodes[id] {
                lv[id] = 1 + lv[a.node() as usize].max(lv[b.node() as usize]);
            }
        }
        lv
    }

    pub fn depth(&self) -> u32 {
        let lv = self.compute_levels();
        self.outputs
            .iter()
            .map(|o| lv[o.lit.node() as usize])
            .max()
            .unwrap_or(0)
    }
}

/// Decompose every cover into balanced AND trees.
pub fn build_subject_graph(net: &RawNetlist) -> SubjectGraph {
    let mut g = SubjectGraph::new();
    g.set_model_name(net.model_name.clone());
    let mut map: HashMap<&str, Lit> = HashMap::new();
    for name in &net.inputs {
        let l = g.add_input(name.clone());
        map.insert(name, l);
    }
    for t in &net.tables {
        let ins: Vec<Lit> = t.inputs.iter().map(|n| map[n.as_str()]).collect();
        let mut cubes = Vec::with_capacity(t.rows.len());
        for row in &t.rows {
            let lits: Vec<Lit> = row
                .inputs
                .iter()
                .zip(&ins)
                .filter_map(|(c, l)| match c {
                    CubeLit::One => Some(*l),
                    CubeLit::Zero => Some(!*l),
                    CubeLit::DontCare => None,
                })
                .collect();
            cubes.push(g.and_balanced(&lits));
        }
        let mut f = g.or_balanced(&cubes);
        if t.rows.first().is_some_and(|r| !r.output) {
            f = !f;
        }
        if f.node() == 0 {
            warn!("net `{}` folds to constant {}", t.output, f == Lit::TRUE);
        }
        map.insert(&t.output, f);
    }
    for o in &net.outputs {
        g.add_output(o.clone(), map[o.as_str()]);
    }
    g
}
