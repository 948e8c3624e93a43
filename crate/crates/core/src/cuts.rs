//! k-feasible cut enumeration by bottom-up merging of fanin cut sets.

use crate::subject::{NodeId, NodeKind, SubjectGraph};
use crate::truth::{self, TruthTable, MAX_VARS};

/// Sorted, duplicate-free leaf set with the root's positive-phase function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cut {
    leaves: [NodeId; MAX_VARS],
    size: u8,
    pub function: TruthTable,
    sig: u64,
}

impl Cut {
    pub fn new(leaves: &[NodeId], function: TruthTable) -> Cut {
        debug_assert!(leaves.len() <= MAX_VARS && !leaves.is_empty());
        debug_assert!(leaves.windows(2).all(|w| w[0] < w[1]));
        let mut l = [0; MAX_VARS];
        l[..leaves.len()].copy_from_slice(leaves);
        let sig = leaves.iter().fold(0u64, |s, x| s | 1 << (x % 64));
        Cut {
            leaves: l,
            size: leaves.len() as u8,
            function: function & truth::mask(leaves.len()),
            sig,
        }
    }

    pub fn trivial(node: NodeId) -> Cut {
        Cut::new(&[node], 0b10)
    }

    #[inline]
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves[..self.size as usize]
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn is_trivial_for(&self, node: NodeId) -> bool {
        self.size == 1 && self.leaves[0] == node
    }

    /// Leaf-set inclusion.
    pub fn is_subset_of(&self, other: &Cut) -> bool {
        if self.size > other.size || self.sig & !other.sig != 0 {
            return false;
        }
        let (a, b) = (self.leaves(), other.leaves());
        let mut j = 0;
        for x in a {
            while j < b.len() && b[j] < *x {
                j += 1;
            }
            if j == b.len() || b[j] != *x {
                return false;
            }
            j += 1;
        }
        true
    }

    fn merge_leaves(&self, other: &Cut, k: usize) -> Option<([NodeId; MAX_VARS], usize)> {
        if (self.sig | other.sig).count_ones() as usize > k {
            return None;
        }
        let (a, b) = (self.leaves(), other.leaves());
        let mut out = [0; MAX_VARS];
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() || j < b.len() {
            let next = if j == b.len() || (i < a.len() && a[i] < b[j]) {
                i += 1;
                a[i - 1]
            } else if i == a.len() || b[j] < a[i] {
                j += 1;
                b[j - 1]
            } else {
                i += 1;
                j += 1;
                a[i - 1]
            };
            if n == k {
                return None;
            }
            out[n] = next;
            n += 1;
        }
        Some((out, n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutParams {
    pub k: usize,
    /// Maximum number of non-trivial cuts kept per node; `None` keeps all.
    pub max_cuts: Option<usize>,
}

impl CutParams {
    pub const DEFAULT_MAX_CUTS: usize = 16;

    pub fn new(k: usize) -> Self {
        CutParams {
            k,
            max_cuts: Some(Self::DEFAULT_MAX_CUTS),
        }
    }

    pub fn unbounded(k: usize) -> Self {
        CutParams { k, max_cuts: None }
    }
}

/// Cuts of every node, indexed by node id. Non-trivial cuts come first, in
/// priority order (fewer leaves, then lexicographic leaves); the trivial cut
/// is last. Constant node 0 has no cuts.
#[derive(Debug, Clone)]
pub struct CutSet {
    pub k: usize,
    cuts: Vec<Vec<Cut>>,
    /// Cuts discarded by the per-node cap.
    pub dropped: usize,
}

impl CutSet {
    pub fn of(&self, node: NodeId) -> &[Cut] {
        &self.cuts[node as usize]
    }

    /// Cuts usable to implement `node` with a gate (trivial cut excluded).
    pub fn mapping_cuts(&self, node: NodeId) -> &[Cut] {
        let c = &self.cuts[node as usize];
        match c.last() {
            Some(last) if last.is_trivial_for(node) => &c[..c.len() - 1],
            _ => c,
        }
    }

    pub fn total(&self) -> usize {
        self.cuts.iter().map(|c| c.len()).sum()
    }
}

fn lift(cut: &Cut, to: &[NodeId], complemented: bool) -> TruthTable {
    let t = truth::expand(cut.function, cut.leaves(), to);
    if complemented {
        truth::not(t, to.len())
    } else {
        t
    }
}

/// Enumerate k-feasible cuts for all nodes in topological order.
///
/// Panics if `params.k` is outside `1..=6`.
pub fn enumerate_cuts(graph: &SubjectGraph, params: CutParams) -> CutSet {
    assert!((1..=MAX_VARS).contains(&params.k), "cut size {} unsupported", params.k);
    let k = params.k;
    let mut cuts: Vec<Vec<Cut>> = Vec::with_capacity(graph.len());
    let mut dropped = 0;
    for id in 0..graph.len() as NodeId {
        match graph.kind(id) {
            NodeKind::Const1 => cuts.push(Vec::new()),
            NodeKind::Input => cuts.push(vec![Cut::trivial(id)]),
            NodeKind::And(a, b) => {
                let mut set: Vec<Cut> = Vec::new();
                for ca in &cuts[a.node() as usize] {
                    for cb in &cuts[b.node() as usize] {
                        let Some((leaves, n)) = ca.merge_leaves(cb, k) else {
                            continue;
                        };
                        let leaves = &leaves[..n];
                        let f = lift(ca, leaves, a.is_complemented()) & lift(cb, leaves, b.is_complemented());
                        let cut = Cut::new(leaves, f);
                        if set.iter().any(|c| c.is_subset_of(&cut)) {
                            continue;
                        }
                        set.retain(|c| !cut.is_subset_of(c));
                        set.push(cut);
                    }
                }
                set.sort_by(|x, y| x.size.cmp(&y.size).then_with(|| x.leaves().cmp(y.leaves())));
                if let Some(cap) = params.max_cuts {
                    if set.len() > cap {
                        dropped += set.len() - cap;
                        set.truncate(cap);
                    }
                }
                set.push(Cut::trivial(id));
                cuts.push(set);
            }
        }
    }
    CutSet { k, cuts, dropped }
}

/// Function of `root` over the leaves of `cut`, by exhaustive simulation of
/// the cone. Returns `None` if the leaves do not cut every path from `root`
/// to the inputs.
pub fn cut_function(graph: &SubjectGraph, root: NodeId, cut: &[NodeId]) -> Option<TruthTable> {
    let n = cut.len();
    if n > MAX_VARS {
        return None;
    }
    let mut memo: Vec<Option<u64>> = vec![None; graph.len()];
    for (i, leaf) in cut.iter().enumerate() {
        memo[*leaf as usize] = Some(truth::var(i, n));
    }
    fn eval(g: &SubjectGraph, id: NodeId, memo: &mut Vec<Option<u64>>, n: usize) -> Option<u64> {
        if let Some(v) = memo[id as usize] {
            return Some(v);
        }
        let v = match g.kind(id) {
            NodeKind::Const1 => truth::mask(n),
            NodeKind::Input => return None,
            NodeKind::And(a, b) => {
                let va = eval(g, a.node(), memo, n)?;
                let vb = eval(g, b.node(), memo, n)?;
                let va = if a.is_complemented() { !va } else { va };
                let vb = if b.is_complemented() { !vb } else { vb };
                va & vb & truth::mask(n)
            }
        };
        memo[id as usize] = Some(v);
        Some(v)
    }
    eval(graph, root, &mut memo, n)
}
