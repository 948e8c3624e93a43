//! Path balancing and fanout legalization of mapped networks.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};

use crate::dp::balance_cost;
use crate::mapped::{CellId, CellKind, Driver, MappedNetwork, NetId, Sink};

/// Fresh, collision-free net names. Taken names are kept as 64-bit hashes;
/// a hash collision only makes a free name look taken.
pub(crate) struct NameGen {
    used: HashSet<u64>,
    /// Next suffix to try per base, so repeated bases stay O(1).
    next: HashMap<String, usize>,
}

fn name_hash(name: &str) -> u64 {
    let mut h = DefaultHasher::new();
    name.hash(&mut h);
    h.finish()
}

impl NameGen {
    pub(crate) fn for_network(net: &MappedNetwork) -> Self {
        let names = net.nets.iter().map(|n| n.name.as_str());
        Self::from_names(names.chain(net.outputs.iter().map(|o| o.name.as_str())))
    }

    pub(crate) fn with_reserved(names: impl IntoIterator<Item = String>) -> Self {
        let names: Vec<String> = names.into_iter().collect();
        Self::from_names(names.iter().map(String::as_str))
    }

    fn from_names<'a>(names: impl Iterator<Item = &'a str>) -> Self {
        NameGen {
            used: names.map(name_hash).collect(),
            next: HashMap::new(),
        }
    }

    pub(crate) fn fresh(&mut self, base: &str) -> String {
        // a counter exists only once `base` itself is taken
        let k = match self.next.get_mut(base) {
            Some(k) => k,
            None => {
                if self.used.insert(name_hash(base)) {
                    return base.to_string();
                }
                self.next.entry(base.to_string()).or_insert(1)
            }
        };
        loop {
            let cand = format!("{base}_{k}");
            *k += 1;
            if self.used.insert(name_hash(&cand)) {
                return cand;
            }
        }
    }
}

/// Give each output's exclusive net the output's own name where possible,
/// so the writer only needs aliases for inputs and shared nets.
pub(crate) fn normalize_output_names(net: &mut MappedNetwork, names: &mut NameGen) {
    let mut readers = vec![0u32; net.nets.len()];
    for n in net
        .cells
        .iter()
        .flat_map(|c| &c.inputs)
        .chain(net.outputs.iter().map(|o| &o.net))
    {
        readers[*n] += 1;
    }
    // only nets that share a name with some output can collide
    let po_names: HashSet<&str> = net.outputs.iter().map(|o| o.name.as_str()).collect();
    let mut by_name: HashMap<String, NetId> = net
        .nets
        .iter()
        .enumerate()
        .filter(|(_, n)| po_names.contains(n.name.as_str()))
        .map(|(i, n)| (n.name.clone(), i))
        .collect();
    drop(po_names);
    for i in 0..net.outputs.len() {
        let n = net.outputs[i].net;
        let po = net.outputs[i].name.clone();
        if net.nets[n].name == po || matches!(net.nets[n].driver, Driver::Input(_)) || readers[n] != 1 {
            continue;
        }
        if let Some(&m) = by_name.get(&po) {
            if matches!(net.nets[m].driver, Driver::Input(_)) {
                continue;
            }
            let renamed = names.fresh(&format!("{po}_int"));
            by_name.insert(renamed.clone(), m);
            net.nets[m].name = renamed;
        }
        by_name.insert(po.clone(), n);
        net.nets[n].name = po;
    }
}

/// Insert DFF chains so every clocked cell sees equal input levels. Chains
/// sit directly in front of the consuming pin. With `balance_outputs`,
/// every primary output is also raised to the deepest output level.
pub fn insert_dffs(net: &MappedNetwork, balance_outputs: bool) -> MappedNetwork {
    let mut out = dff_chains(net, balance_outputs);
    out.balanced = check_balanced(&out, balance_outputs).is_empty();
    out.splitter_legal = check_splitters(&out).is_empty();
    out
}

/// DFF insertion without the verification flags.
pub(crate) fn dff_chains(net: &MappedNetwork, balance_outputs: bool) -> MappedNetwork {
    let mut out = net.clone();
    let levels = net.net_levels();
    let mut names = NameGen::for_network(net);
    let mut chain = |out: &mut MappedNetwork, src: NetId, len: u32| -> NetId {
        let mut cur = src;
        for _ in 0..len {
            let name = names.fresh(&format!("{}_d", out.nets[src].name));
            let c = out.add_cell(CellKind::Dff, vec![cur], vec![name], None);
            cur = out.cells[c].outputs[0];
        }
        cur
    };
    for c in 0..net.cells.len() {
        let cell = &net.cells[c];
        if !cell.kind.is_clocked() || cell.inputs.len() < 2 {
            continue;
        }
        let target = cell.inputs.iter().map(|n| levels[*n]).max().unwrap();
        for (pin, n) in cell.inputs.iter().enumerate() {
            let gap = target - levels[*n];
            if gap > 0 {
                let end = chain(&mut out, *n, gap);
                out.cells[c].inputs[pin] = end;
            }
        }
    }
    if balance_outputs {
        let target = net.outputs.iter().map(|o| levels[o.net]).max().unwrap_or(0);
        for i in 0..net.outputs.len() {
            let n = net.outputs[i].net;
            let gap = target - levels[n];
            if gap > 0 {
                let end = chain(&mut out, n, gap);
                out.outputs[i].net = end;
            }
        }
    }
    normalize_output_names(&mut out, &mut names);
    out.outputs_balanced = balance_outputs;
    out
}

/// Number of splitter levels a net with `fanout` sinks needs.
pub fn splitter_levels(fanout: usize) -> u32 {
    if fanout < 2 {
        0
    } else {
        usize::BITS - (fanout - 1).leading_zeros()
    }
}

/// Re-drive every multi-sink net through a balanced binary splitter tree.
pub fn insert_splitters(net: &MappedNetwork) -> MappedNetwork {
    let mut out = net.clone();
    let sinks = net.sinks();
    let mut names = NameGen::for_network(net);
    for (n, list) in sinks.iter().enumerate() {
        if list.len() < 2 {
            continue;
        }
        if let Driver::Cell(c, _) = net.nets[n].driver {
            if net.cells[c].kind == CellKind::Splitter {
                continue;
            }
        }
        build_tree(&mut out, &mut names, n, &net.nets[n].name, list);
    }
    normalize_output_names(&mut out, &mut names);
    out.splitter_legal = check_splitters(&out).is_empty();
    out.balanced = check_balanced(&out, out.outputs_balanced).is_empty();
    out
}

fn build_tree(out: &mut MappedNetwork, names: &mut NameGen, src: NetId, base: &str, sinks: &[Sink]) {
    if sinks.len() == 1 {
        match sinks[0] {
            Sink::Pin(c, p) => out.cells[c].inputs[p] = src,
            Sink::Output(i) => out.outputs[i].net = src,
        }
        return;
    }
    let a = names.fresh(&format!("{base}_s"));
    let b = names.fresh(&format!("{base}_s"));
    let s = out.add_cell(CellKind::Splitter, vec![src], vec![a, b], None);
    let (l, r) = (out.cells[s].outputs[0], out.cells[s].outputs[1]);
    let half = sinks.len().div_ceil(2);
    build_tree(out, names, l, base, &sinks[..half]);
    build_tree(out, names, r, base, &sinks[half..]);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A clocked cell whose inputs differ in level by `gap`.
    Unbalanced { cell: CellId, gap: u32 },
    /// An output below the deepest output level by `gap`.
    OutputSkew { output: String, gap: u32 },
}

/// Empty iff every clocked cell has equal input levels (and, with
/// `balance_outputs`, all outputs sit at the same level).
pub fn check_balanced(net: &MappedNetwork, balance_outputs: bool) -> Vec<Violation> {
    let lv = net.net_levels();
    let mut v = Vec::new();
    for (c, cell) in net.cells.iter().enumerate() {
        if !cell.kind.is_clocked() || cell.inputs.len() < 2 {
            continue;
        }
        let hi = cell.inputs.iter().map(|n| lv[*n]).max().unwrap();
        let lo = cell.inputs.iter().map(|n| lv[*n]).min().unwrap();
        if hi != lo {
            v.push(Violation::Unbalanced { cell: c, gap: hi - lo });
        }
    }
    if balance_outputs {
        let hi = net.outputs.iter().map(|o| lv[o.net]).max().unwrap_or(0);
        for o in &net.outputs {
            if lv[o.net] < hi {
                v.push(Violation::OutputSkew {
                    output: o.name.clone(),
                    gap: hi - lv[o.net],
                });
            }
        }
    }
    v
}

/// Fanout rule violations: nets driven by a non-splitter (or an input) with
/// more than one sink, and splitter outputs with more than one sink.
pub fn check_splitters(net: &MappedNetwork) -> Vec<String> {
    let sinks = net.sinks();
    let mut v = Vec::new();
    for (n, list) in sinks.iter().enumerate() {
        if list.len() > 1 {
            v.push(format!("net `{}` has {} sinks", net.nets[n].name, list.len()));
        }
    }
    for (c, cell) in net.cells.iter().enumerate() {
        if cell.kind == CellKind::Splitter && cell.outputs.len() != 2 {
            v.push(format!("splitter {c} has {} outputs", cell.outputs.len()));
        }
    }
    v
}

/// Recompute the verification flags of a network.
pub fn verify(net: &mut MappedNetwork, balance_outputs: bool) {
    net.outputs_balanced = balance_outputs;
    net.balanced = check_balanced(net, balance_outputs).is_empty();
    net.splitter_legal = check_splitters(net).is_empty();
}

/// Path-balancing DFFs the network needs: sum of balance costs over clocked
/// cells, plus output chains when requested.
pub fn required_dffs(net: &MappedNetwork, balance_outputs: bool) -> (usize, usize) {
    let lv = net.net_levels();
    let mut internal = 0usize;
    for cell in &net.cells {
        if cell.kind.is_clocked() && !cell.inputs.is_empty() {
            let levels: Vec<u32> = cell.inputs.iter().map(|n| lv[*n]).collect();
            internal += balance_cost(&levels) as usize;
        }
    }
    let mut outputs = 0usize;
    if balance_outputs {
        let hi = net.outputs.iter().map(|o| lv[o.net]).max().unwrap_or(0);
        outputs = net.outputs.iter().map(|o| (hi - lv[o.net]) as usize).sum();
    }
    (internal, outputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and_net(skew: u32) -> (MappedNetwork, CellId) {
        // a reaches the AND directly, b passes through `skew` buffers
        let mut n = MappedNetwork::new("t");
        let a = n.add_input("a");
        let mut b = n.add_input("b");
        for i in 0..skew {
            let c = n.add_cell(CellKind::Gate(0), vec![b], vec![format!("b{i}")], None);
            b = n.cells[c].outputs[0];
        }
        let g = n.add_cell(CellKind::Gate(1), vec![a, b], vec!["y".into()], None);
        n.add_output("y", n.cells[g].outputs[0]);
        (n, g)
    }

    #[test]
    fn balance_cost_examples() {
        assert_eq!(balance_cost(&[2, 3]), 1);
        assert_eq!(balance_cost(&[5, 5, 5]), 0);
        assert_eq!(balance_cost(&[0, 1, 3]), 5);
    }

    #[test]
    fn equal_levels_need_nothing() {
        let (n, _) = and_net(0);
        let b = insert_dffs(&n, false);
        assert_eq!(b.dff_count(), 0);
        assert!(b.balanced);
        assert_eq!(insert_dffs(&b, false), b);
    }

    #[test]
    fn skew_of_one_gets_one_dff_on_the_early_input() {
        let (n, g) = and_net(1);
        assert_eq!(
            check_balanced(&n, false),
            vec![Violation::Unbalanced { cell: g, gap: 1 }]
        );
        let b = insert_dffs(&n, false);
        assert_eq!(b.dff_count(), 1);
        let early = b.cells[g].inputs[0];
        assert!(matches!(b.nets[early].driver, Driver::Cell(c, _) if b.cells[c].kind == CellKind::Dff));
        assert!(check_balanced(&b, false).is_empty());
    }

    #[test]
    fn gap_two_violation() {
        let (n, g) = and_net(2);
        assert_eq!(
            check_balanced(&n, false),
            vec![Violation::Unbalanced { cell: g, gap: 2 }]
        );
    }

    #[test]
    fn splitter_tree_shapes() {
        for (fanout, splitters, depth) in [(1usize, 0usize, 0u32), (2, 1, 1), (4, 3, 2), (5, 4, 3), (8, 7, 3)] {
            let mut n = MappedNetwork::new("t");
            let a = n.add_input("a");
            let b = n.add_input("b");
            let g = n.add_cell(CellKind::Gate(1), vec![a, b], vec!["x".into()], None);
            let x = n.cells[g].outputs[0];
            for i in 0..fanout {
                n.add_output(format!("y{i}"), x);
            }
            let s = insert_splitters(&insert_dffs(&n, false));
            assert_eq!(s.splitter_count(), splitters, "fanout {fanout}");
            assert!(s.splitter_legal);
            assert_eq!(splitter_levels(fanout), depth);
            // count splitters on the path to the first output
            let mut hops = 0;
            let mut net = s.outputs[0].net;
            while let Driver::Cell(c, _) = s.nets[net].driver {
                if s.cells[c].kind != CellKind::Splitter {
                    break;
                }
                hops += 1;
                net = s.cells[c].inputs[0];
            }
            assert_eq!(hops, depth);
            assert_eq!(s.logical_depth(), 1);
        }
    }

    #[test]
    fn output_balancing() {
        let mut n = MappedNetwork::new("t");
        let a = n.add_input("a");
        let b = n.add_input("b");
        let g = n.add_cell(CellKind::Gate(1), vec![a, b], vec!["x".into()], None);
        n.add_output("x", n.cells[g].outputs[0]);
        n.add_output("p", a);
        assert_eq!(check_balanced(&n, true).len(), 1);
        let bal = insert_dffs(&n, true);
        assert_eq!(bal.dff_count(), 1);
        assert!(bal.balanced);
        assert_eq!(required_dffs(&n, true), (0, 1));
    }
}
