//! Generators shared by the integration tests: random subject graphs,
//! benchmark-style circuits written as BLIF, and the test libraries.
#![allow(dead_code)]

use std::fmt::Write as _;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use fluxmap::genlib::{parse_genlib, BuiltinParams, CellLibrary};
use fluxmap::mapped::{CellKind, MappedNetwork, NetId};
use fluxmap::subject::{Lit, SubjectGraph};

pub const AND_INV: &str = include_str!("../../data/and_inv.genlib");
pub const MCNC: &str = include_str!("../../data/mcnc.genlib");
pub const SFQ: &str = include_str!("../../data/sfq.genlib");

/// Small library with 2- and 3-input gates and both output phases.
pub const MIXED3: &str = "\
GATE inv   1 O=!a;          PIN * INV 1 999 1 0 1 0
GATE nand2 2 O=!(a*b);      PIN * INV 1 999 1 0 1 0
GATE nor2  2 O=!(a+b);      PIN * INV 1 999 1 0 1 0
GATE and3  3 O=a*b*c;       PIN * NONINV 1 999 1 0 1 0
GATE aoi21 3 O=!(a*b+c);    PIN * INV 1 999 1 0 1 0
";

pub fn lib(text: &str) -> CellLibrary {
    parse_genlib(text, BuiltinParams::default()).expect("test library parses")
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A random tree of `ands` AND nodes: every node and every input has exactly
/// one consumer; edge and output phases are random.
pub fn random_tree(r: &mut StdRng, ands: usize) -> (SubjectGraph, Lit) {
    let mut g = SubjectGraph::new();
    let mut next_input = 0;
    let root = build_tree(&mut g, r, ands, &mut next_input);
    let root = if r.random_bool(0.5) { !root } else { root };
    g.add_output("y", root);
    (g, root)
}

fn build_tree(g: &mut SubjectGraph, r: &mut StdRng, ands: usize, next: &mut usize) -> Lit {
    if ands == 0 {
        let l = g.add_input(format!("x{next}"));
        *next += 1;
        return l;
    }
    let left = r.random_range(0..ands);
    let a = build_tree(g, r, left, next);
    let b = build_tree(g, r, ands - 1 - left, next);
    let a = if r.random_bool(0.4) { !a } else { a };
    let b = if r.random_bool(0.4) { !b } else { b };
    g.and(a, b)
}

/// A random DAG: each AND reads two distinct earlier signals (biased towards
/// recent ones so reconvergence is common). Unread nodes become outputs.
pub fn random_dag(r: &mut StdRng, inputs: usize, ands: usize) -> SubjectGraph {
    let mut g = SubjectGraph::new();
    let mut sigs: Vec<Lit> = (0..inputs).map(|i| g.add_input(format!("x{i}"))).collect();
    let mut read = vec![false; inputs + ands + 1];
    while g.and_count() < ands {
        let n = sigs.len();
        let pick = |r: &mut StdRng| {
            if r.random_bool(0.6) {
                n - 1 - r.random_range(0..n.min(6))
            } else {
                r.random_range(0..n)
            }
        };
        let i = pick(r);
        let j = pick(r);
        if i == j {
            continue;
        }
        let a = if r.random_bool(0.4) { !sigs[i] } else { sigs[i] };
        let b = if r.random_bool(0.4) { !sigs[j] } else { sigs[j] };
        let before = g.len();
        let y = g.and(a, b);
        if g.len() == before {
            continue;
        }
        read[sigs[i].node() as usize] = true;
        read[sigs[j].node() as usize] = true;
        sigs.push(y);
    }
    let mut k = 0;
    for s in &sigs[inputs..] {
        if !read[s.node() as usize] {
            g.add_output(format!("y{k}"), *s);
            k += 1;
        }
    }
    g
}

/// Large random DAG with uniformly random fanins (depth grows like log n).
pub fn uniform_dag(r: &mut StdRng, inputs: usize, ands: usize) -> SubjectGraph {
    let mut g = SubjectGraph::new();
    let mut sigs: Vec<Lit> = (0..inputs).map(|i| g.add_input(format!("x{i}"))).collect();
    let mut read = vec![false; inputs + ands + 1];
    while g.and_count() < ands {
        let n = sigs.len();
        let i = r.random_range(0..n);
        let j = r.random_range(0..n);
        if i == j {
            continue;
        }
        let a = if r.random_bool(0.5) { !sigs[i] } else { sigs[i] };
        let b = if r.random_bool(0.5) { !sigs[j] } else { sigs[j] };
        let before = g.len();
        let y = g.and(a, b);
        if g.len() == before {
            continue;
        }
        read[sigs[i].node() as usize] = true;
        read[sigs[j].node() as usize] = true;
        sigs.push(y);
    }
    let mut k = 0;
    for s in &sigs[inputs..] {
        if !read[s.node() as usize] {
            g.add_output(format!("y{k}"), *s);
            k += 1;
        }
    }
    g
}

// ---------------------------------------------------------------------------
// benchmark-style circuits

/// Writes single-output `.names` tables for common operators.
pub struct Blif {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    body: String,
    count: usize,
}

impl Blif {
    pub fn new(name: &str) -> Self {
        Blif {
            name: name.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            body: String::new(),
            count: 0,
        }
    }

    pub fn input(&mut self, name: &str) -> String {
        self.inputs.push(name.to_string());
        name.to_string()
    }

    pub fn inputs(&mut self, prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| self.input(&format!("{prefix}{i}"))).collect()
    }

    fn fresh(&mut self) -> String {
        self.count += 1;
        format!("w{}", self.count)
    }

    /// A table with the given on-set rows.
    pub fn table(&mut self, ins: &[&str], rows: &[&str]) -> String {
        let out = self.fresh();
        let _ = writeln!(self.body, ".names {} {}", ins.join(" "), out);
        for r in rows {
            let _ = writeln!(self.body, "{r} 1");
        }
        out
    }

    pub fn and(&mut self, a: &str, b: &str) -> String {
        self.table(&[a, b], &["11"])
    }
    pub fn or(&mut self, a: &str, b: &str) -> String {
        self.table(&[a, b], &["1-", "-1"])
    }
    pub fn xor(&mut self, a: &str, b: &str) -> String {
        self.table(&[a, b], &["10", "01"])
    }
    pub fn not(&mut self, a: &str) -> String {
        self.table(&[a], &["0"])
    }
    pub fn mux(&mut self, s: &str, a: &str, b: &str) -> String {
        // s ? b : a
        self.table(&[s, a, b], &["01-", "1-1"])
    }
    pub fn maj(&mut self, a: &str, b: &str, c: &str) -> String {
        self.table(&[a, b, c], &["11-", "1-1", "-11"])
    }
    pub fn and_all(&mut self, xs: &[String]) -> String {
        let refs: Vec<&str> = xs.iter().map(|s| s.as_str()).collect();
        let row = "1".repeat(xs.len());
        self.table(&refs, &[row.as_str()])
    }
    pub fn or_all(&mut self, xs: &[String]) -> String {
        let mut acc = xs[0].clone();
        for x in &xs[1..] {
            acc = self.or(&acc, x);
        }
        acc
    }
    pub fn xor_all(&mut self, xs: &[String]) -> String {
        let mut layer = xs.to_vec();
        while layer.len() > 1 {
            let mut next = Vec::new();
            for pair in layer.chunks(2) {
                next.push(if pair.len() == 2 {
                    self.xor(&pair[0], &pair[1])
                } else {
                    pair[0].clone()
                });
            }
            layer = next;
        }
        layer[0].clone()
    }

    /// Full adder: (sum, carry).
    pub fn full_add(&mut self, a: &str, b: &str, c: &str) -> (String, String) {
        let s1 = self.xor(a, b);
        let s = self.xor(&s1, c);
        let co = self.maj(a, b, c);
        (s, co)
    }

    pub fn output(&mut self, name: &str, sig: &str) {
        self.outputs.push(name.to_string());
        let _ = writeln!(self.body, ".names {sig} {name}\n1 1");
    }

    pub fn finish(&self) -> String {
        format!(
            ".model {}\n.inputs {}\n.outputs {}\n{}.end\n",
            self.name,
            self.inputs.join(" "),
            self.outputs.join(" "),
            self.body
        )
    }
}

/// Array multiplier (c6288-like).
pub fn multiplier(n: usize) -> String {
    let mut b = Blif::new(&format!("mult{n}"));
    let x = b.inputs("a", n);
    let y = b.inputs("b", n);
    let pp: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| b.and(&x[j], &y[i])).collect()).collect();
    // row by row carry-save accumulation
    let mut acc: Vec<String> = pp[0].clone();
    let mut outs = Vec::new();
    for row in pp.iter().skip(1) {
        outs.push(acc[0].clone());
        let mut next = Vec::new();
        let mut carry: Option<String> = None;
        for j in 0..n {
            let upper = if j + 1 < n { Some(acc[j + 1].clone()) } else { None };
            let (s, c) = match (upper, carry.take()) {
                (Some(u), Some(c)) => b.full_add(&u, &row[j], &c),
                (Some(u), None) => (b.xor(&u, &row[j]), b.and(&u, &row[j])),
                (None, Some(c)) => (b.xor(&row[j], &c), b.and(&row[j], &c)),
                (None, None) => (row[j].clone(), String::new()),
            };
            next.push(s);
            carry = if c.is_empty() { None } else { Some(c) };
        }
        if let Some(c) = carry {
            next.push(c);
        }
        acc = next;
    }
    outs.extend(acc);
    for (i, o) in outs.iter().enumerate().take(2 * n) {
        b.output(&format!("p{i}"), o);
    }
    b.finish()
}

/// Ripple adder plus magnitude comparator over the same operands.
pub fn adder_comparator(n: usize) -> String {
    let mut b = Blif::new(&format!("addcmp{n}"));
    let x = b.inputs("a", n);
    let y = b.inputs("b", n);
    let cin = b.input("cin");
    let mut c = cin;
    for i in 0..n {
        let (s, co) = b.full_add(&x[i], &y[i], &c);
        b.output(&format!("s{i}"), &s);
        c = co;
    }
    b.output("cout", &c);
    // a > b, scanning from the most significant bit
    let mut gt: Option<String> = None;
    let mut eq: Option<String> = None;
    for i in (0..n).rev() {
        let nb = b.not(&y[i]);
        let g = b.and(&x[i], &nb);
        let e = b.table(&[&x[i], &y[i]], &["11", "00"]);
        let (ng, ne) = match (gt.take(), eq.take()) {
            (Some(pg), Some(pe)) => {
                let t = b.and(&pe, &g);
                (b.or(&pg, &t), b.and(&pe, &e))
            }
            _ => (g, e),
        };
        gt = Some(ng);
        eq = Some(ne);
    }
    b.output("gt", gt.as_deref().unwrap());
    b.output("eq", eq.as_deref().unwrap());
    b.finish()
}

/// Single-error-correcting Hamming decoder (c499-like).
pub fn ecc(data: usize) -> String {
    let mut b = Blif::new(&format!("ecc{data}"));
    let mut r = 0;
    while (1usize << r) < data + r + 1 {
        r += 1;
    }
    let d = b.inputs("d", data);
    let p = b.inputs("p", r);
    // codeword positions 1..=data+r, parity at powers of two
    let mut pos_of_data = Vec::new();
    let mut pos: usize = 1;
    while pos_of_data.len() < data {
        if !pos.is_power_of_two() {
            pos_of_data.push(pos);
        }
        pos += 1;
    }
    let mut syn = Vec::new();
    for (k, pk) in p.iter().enumerate().take(r) {
        let mut terms: Vec<String> = vec![pk.clone()];
        for (i, ps) in pos_of_data.iter().enumerate() {
            if (ps >> k) & 1 == 1 {
                terms.push(d[i].clone());
            }
        }
        syn.push(b.xor_all(&terms));
    }
    let nsyn: Vec<String> = syn.iter().map(|s| b.not(s)).collect();
    for (i, ps) in pos_of_data.iter().enumerate() {
        let lits: Vec<String> = (0..r)
            .map(|k| {
                if (ps >> k) & 1 == 1 {
                    syn[k].clone()
                } else {
                    nsyn[k].clone()
                }
            })
            .collect();
        let hit = b.and_all(&lits);
        let fixed = b.xor(&d[i], &hit);
        b.output(&format!("o{i}"), &fixed);
    }
    b.finish()
}

/// ALU with add, subtract, and, or, xor and pass-through (c880/74181-like).
pub fn alu(n: usize) -> String {
    let mut b = Blif::new(&format!("alu{n}"));
    let x = b.inputs("a", n);
    let y = b.inputs("b", n);
    let s = b.inputs("op", 3);
    // op0 selects subtraction for the adder
    let mut c = s[0].clone();
    let mut sums = Vec::new();
    for i in 0..n {
        let yb = b.xor(&y[i], &s[0]);
        let (sum, co) = b.full_add(&x[i], &yb, &c);
        sums.push(sum);
        c = co;
    }
    let mut zero_terms = Vec::new();
    for i in 0..n {
        let and = b.and(&x[i], &y[i]);
        let or = b.or(&x[i], &y[i]);
        let xor = b.xor(&x[i], &y[i]);
        let l0 = b.mux(&s[0], &and, &or);
        let l1 = b.mux(&s[0], &xor, &x[i]);
        let logic = b.mux(&s[1], &l0, &l1);
        let out = b.mux(&s[2], &sums[i], &logic);
        zero_terms.push(out.clone());
        b.output(&format!("f{i}"), &out);
    }
    b.output("cout", &c);
    let any = b.or_all(&zero_terms);
    let z = b.not(&any);
    b.output("zero", &z);
    b.finish()
}

/// Priority encoder with valid flag feeding a decoder (c432-like).
pub fn priority_decoder(n_bits: usize) -> String {
    let n = 1usize << n_bits;
    let mut b = Blif::new(&format!("prio{n}"));
    let req = b.inputs("r", n);
    let en = b.input("en");
    // grant[i] = r[i] and no higher-priority (lower index) request
    let mut none_before: Option<String> = None;
    let mut grants = Vec::new();
    for r in &req {
        let g = match &none_before {
            None => r.clone(),
            Some(nb) => b.and(r, nb),
        };
        grants.push(g);
        let nr = b.not(r);
        none_before = Some(match none_before {
            None => nr,
            Some(nb) => b.and(&nb, &nr),
        });
    }
    let mut code = Vec::new();
    for k in 0..n_bits {
        let terms: Vec<String> = grants
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> k) & 1 == 1)
            .map(|(_, g)| g.clone())
            .collect();
        let bit = b.or_all(&terms);
        b.output(&format!("code{k}"), &bit);
        code.push(bit);
    }
    let valid = b.not(none_before.as_deref().unwrap());
    b.output("valid", &valid);
    // decode the code back, gated by enable
    let ncode: Vec<String> = code.iter().map(|c| b.not(c)).collect();
    for v in 0..n {
        let mut lits: Vec<String> = (0..n_bits)
            .map(|k| {
                if (v >> k) & 1 == 1 {
                    code[k].clone()
                } else {
                    ncode[k].clone()
                }
            })
            .collect();
        lits.push(en.clone());
        lits.push(valid.clone());
        let d = b.and_all(&lits);
        b.output(&format!("dec{v}"), &d);
    }
    b.finish()
}

/// Random multi-level logic from 2- and 3-input tables.
pub fn random_logic(seed: u64, inputs: usize, gates: usize, outputs: usize) -> String {
    let mut r = rng(seed);
    let mut b = Blif::new(&format!("rand{seed}"));
    let mut sigs = b.inputs("x", inputs);
    let kinds: [&[&str]; 6] = [
        &["11"],
        &["1-", "-1"],
        &["10", "01"],
        &["00"],
        &["11-", "1-1", "-11"],
        &["1-0", "-11"],
    ];
    for _ in 0..gates {
        let n = sigs.len();
        let k = r.random_range(0..kinds.len());
        let arity = kinds[k][0].len();
        let mut ins: Vec<String> = Vec::new();
        while ins.len() < arity {
            let i = if r.random_bool(0.7) {
                n - 1 - r.random_range(0..n.min(12))
            } else {
                r.random_range(0..n)
            };
            if !ins.contains(&sigs[i]) {
                ins.push(sigs[i].clone());
            }
        }
        let refs: Vec<&str> = ins.iter().map(|s| s.as_str()).collect();
        let y = b.table(&refs, kinds[k]);
        sigs.push(y);
    }
    for o in 0..outputs {
        let s = sigs[sigs.len() - 1 - o * 3].clone();
        b.output(&format!("y{o}"), &s);
    }
    b.finish()
}

/// The benchmark suite used by the equivalence and trend checks.
pub fn benchmarks() -> Vec<(String, String)> {
    vec![
        ("mult6".into(), multiplier(6)),
        ("addcmp16".into(), adder_comparator(16)),
        ("ecc16".into(), ecc(16)),
        ("alu8".into(), alu(8)),
        ("prio16".into(), priority_decoder(4)),
        ("rand300".into(), random_logic(7, 24, 300, 12)),
    ]
}

/// Random DAG whose fanins come from the most recent `window` signals, so
/// depth and per-node balancing work stay bounded as the graph grows.
pub fn windowed_dag(r: &mut StdRng, inputs: usize, ands: usize, window: usize) -> SubjectGraph {
    let mut g = SubjectGraph::new();
    let mut sigs: Vec<Lit> = (0..inputs).map(|i| g.add_input(format!("x{i}"))).collect();
    let mut read = vec![false; inputs + ands + 1];
    while g.and_count() < ands {
        let n = sigs.len();
        let pick = |r: &mut StdRng| sigs[n - 1 - r.random_range(0..n.min(window))];
        let a = pick(r);
        let b = pick(r);
        if a.node() == b.node() {
            continue;
        }
        let a = if r.random_bool(0.5) { !a } else { a };
        let b = if r.random_bool(0.5) { !b } else { b };
        let before = g.len();
        let y = g.and(a, b);
        if g.len() == before {
            continue;
        }
        read[a.node() as usize] = true;
        read[b.node() as usize] = true;
        sigs.push(y);
    }
    let mut k = 0;
    for s in &sigs[inputs..] {
        if !read[s.node() as usize] {
            g.add_output(format!("y{k}"), *s);
            k += 1;
        }
    }
    g
}

/// Random unbalanced covers over the gates of `lib`.
pub fn random_cover(r: &mut StdRng, l: &CellLibrary) -> MappedNetwork {
    let gates: Vec<usize> = (0..l.gates.len()).filter(|g| l.gates[*g].fanin_count() > 0).collect();
    let mut net = MappedNetwork::new("cover");
    let mut nets: Vec<NetId> = (0..r.random_range(2..=8))
        .map(|i| net.add_input(format!("x{i}")))
        .collect();
    let cells = r.random_range(1..=40);
    for c in 0..cells {
        let g = gates[r.random_range(0..gates.len())];
        let ins: Vec<NetId> = (0..l.gates[g].fanin_count())
            .map(|_| nets[r.random_range(0..nets.len())])
            .collect();
        let id = net.add_cell(CellKind::Gate(g), ins, vec![format!("n{c}")], None);
        nets.push(net.cells[id].outputs[0]);
    }
    let sinks = net.sinks();
    let mut k = 0;
    for &id in &nets[net.inputs.len()..] {
        if sinks[id].is_empty() || r.random_bool(0.1) {
            net.add_output(format!("y{k}"), id);
            k += 1;
        }
    }
    net
}
