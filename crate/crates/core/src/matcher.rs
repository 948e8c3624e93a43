//! Boolean matching of cut functions against library gates under input
//! permutation, input phase and output phase.

use std::collections::HashMap;

use crate::cuts::Cut;
use crate::genlib::{CellLibrary, GateId};
use crate::truth::{self, TruthTable, MAX_VARS};

/// A way to realize a cut function with one library gate.
///
/// Gate pin `p` reads cut leaf `pin_leaf[p]`, complemented when bit
/// `pin_leaf[p]` of `leaf_negation` is set. With `output_inverted` the gate
/// computes the complement of the cut function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Match {
    pub gate: GateId,
    pub pin_leaf: [u8; MAX_VARS],
    pub leaf_negation: u32,
    pub output_inverted: bool,
}

impl Match {
    pub fn leaf_permutation(&self, fanin: usize) -> &[u8] {
        &self.pin_leaf[..fanin]
    }

    pub fn leaf_negated(&self, leaf: usize) -> bool {
        (self.leaf_negation >> leaf) & 1 == 1
    }

    /// The function this match computes over the cut leaves.
    pub fn realized_function(&self, lib: &CellLibrary, n: usize) -> TruthTable {
        let g = &lib.gates[self.gate];
        let perm: Vec<usize> = self.pin_leaf[..n].iter().map(|x| *x as usize).collect();
        let t = truth::permute(g.function, n, &perm, self.leaf_negation);
        if self.output_inverted {
            truth::not(t, n)
        } else {
            t
        }
    }
}

/// Precomputed index from `(size, function)` to every distinct match.
#[derive(Debug, Clone)]
pub struct Matcher {
    index: HashMap<(u8, TruthTable), Vec<Match>>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out.sort();
    out
}

impl Matcher {
    pub fn new(lib: &CellLibrary) -> Matcher {
        let mut index: HashMap<(u8, TruthTable), Vec<Match>> = HashMap::new();
        let mut perms_cache: Vec<Option<Vec<Vec<usize>>>> = vec![None; MAX_VARS + 1];
        for (gid, g) in lib.gates.iter().enumerate() {
            let n = g.fanin_count();
            if n == 0 {
                continue;
            }
            let perms = perms_cache[n].get_or_insert_with(|| permutations(n));
            for neg in 0..(1u32 << n) {
                for perm in perms.iter() {
                    let t = truth::permute(g.function, n, perm, neg);
                    let mut pin_leaf = [0u8; MAX_VARS];
                    for (p, l) in perm.iter().enumerate() {
                        pin_leaf[p] = *l as u8;
                    }
                    for (table, inv) in [(t, false), (truth::not(t, n), true)] {
                        let entry = index.entry((n as u8, table)).or_default();
                        let m = Match {
                            gate: gid,
                            pin_leaf,
                            leaf_negation: neg,
                            output_inverted: inv,
                        };
                        // one representative per (gate, phases); pin permutations
                        // with identical phases are interchangeable
                        if !entry
                            .iter()
                            .any(|e| e.gate == gid && e.leaf_negation == neg && e.output_inverted == inv)
                        {
                            entry.push(m);
                        }
                    }
                }
            }
        }
        for list in index.values_mut() {
            list.sort_by_key(|m| (m.output_inverted, m.leaf_negation.count_ones(), m.gate, m.leaf_negation));
        }
        Matcher { index }
    }

    pub fn lookup(&self, size: usize, function: TruthTable) -> &[Match] {
        self.index
            .get(&(size as u8, function & truth::mask(size)))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn match_cut(&self, cut: &Cut) -> &[Match] {
        self.lookup(cut.size(), cut.function)
    }
}

/// Convenience wrapper building a throwaway index.
pub fn match_cut(cut: &Cut, lib: &CellLibrary) -> Vec<Match> {
    Matcher::new(lib).match_cut(cut).to_vec()
}
