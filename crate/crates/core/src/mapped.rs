//! Gate-level mapped networks: library gates, DFFs and splitters.

use std::collections::{HashMap, HashSet};

use crate::error::{MapError, ParseError};
use crate::genlib::{CellLibrary, GateId, DFF_NAME, SPLITTER_NAME, SPLITTER_OUTPUTS};
use crate::netlist::logical_lines;
use crate::subject::Lit;
use crate::truth;

pub type NetId = usize;
pub type CellId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Gate(GateId),
    Dff,
    Splitter,
    Const(bool),
}

impl CellKind {
    /// Clocked cells advance the logic level by one; splitters and constants
    /// do not.
    pub fn is_clocked(self) -> bool {
        matches!(self, CellKind::Gate(_) | CellKind::Dff)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub kind: CellKind,
    pub inputs: Vec<NetId>,
    pub outputs: Vec<NetId>,
    /// Subject-graph literal this cell realizes, when it came from the mapper.
    pub origin: Option<Lit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Driver {
    Input(usize),
    Cell(CellId, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub name: String,
    pub driver: Driver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub net: NetId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sink {
    Pin(CellId, usize),
    Output(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappedNetwork {
    pub model_name: String,
    pub inputs: Vec<NetId>,
    pub outputs: Vec<Output>,
    pub nets: Vec<Net>,
    pub cells: Vec<Cell>,
    pub balanced: bool,
    pub splitter_legal: bool,
    /// Whether primary outputs were raised to a common level.
    pub outputs_balanced: bool,
}

impl MappedNetwork {
    pub fn new(model_name: impl Into<String>) -> Self {
        MappedNetwork {
            model_name: model_name.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            nets: Vec::new(),
            cells: Vec::new(),
            balanced: false,
            splitter_legal: false,
            outputs_balanced: false,
        }
    }

    pub fn add_input(&mut self, name: impl Into<String>) -> NetId {
        let id = self.nets.len();
        self.nets.push(Net {
            name: name.into(),
            driver: Driver::Input(self.inputs.len()),
        });
        self.inputs.push(id);
        id
    }

    /// Add a cell whose output nets get the given names.
    pub fn add_cell(
        &mut self,
        kind: CellKind,
        inputs: Vec<NetId>,
        output_names: Vec<String>,
        origin: Option<Lit>,
    ) -> CellId {
        let id = self.cells.len();
        let mut outputs = Vec::with_capacity(output_names.len());
        for (pin, name) in output_names.into_iter().enumerate() {
            outputs.push(self.nets.len());
            self.nets.push(Net {
                name,
                driver: Driver::Cell(id, pin),
            });
        }
        self.cells.push(Cell {
            kind,
            inputs,
            outputs,
            origin,
        });
        id
    }

    pub fn add_output(&mut self, name: impl Into<String>, net: NetId) {
        self.outputs.push(Output { name: name.into(), net });
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs.iter().map(|n| self.nets[*n].name.clone()).collect()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.outputs.iter().map(|o| o.name.clone()).collect()
    }

    /// Sinks of every net, in (cell, pin) order followed by outputs.
    pub fn sinks(&self) -> Vec<Vec<Sink>> {
        let mut s = vec![Vec::new(); self.nets.len()];
        for (c, cell) in self.cells.iter().enumerate() {
            for (p, n) in cell.inputs.iter().enumerate() {
                s[*n].push(Sink::Pin(c, p));
            }
        }
        for (i, o) in self.outputs.iter().enumerate() {
            s[o.net].push(Sink::Output(i));
        }
        s
    }

    /// Cells in topological order: id order when that already is one,
    /// otherwise Kahn's algorithm with a FIFO seeded in id order.
    pub fn topo_order(&self) -> Vec<CellId> {
        self.try_topo_order().expect("mapped network has a cycle")
    }

    /// Topological order, or a cell on or behind a cycle.
    pub fn try_topo_order(&self) -> Result<Vec<CellId>, CellId> {
        let ordered = self.cells.iter().enumerate().all(|(c, cell)| {
            cell.inputs
                .iter()
                .all(|n| !matches!(self.nets[*n].driver, Driver::Cell(d, _) if d >= c))
        });
        if ordered {
            return Ok((0..self.cells.len()).collect());
        }
        let mut indeg = vec![0usize; self.cells.len()];
        let mut readers: Vec<Vec<CellId>> = vec![Vec::new(); self.nets.len()];
        for (c, cell) in self.cells.iter().enumerate() {
            for n in &cell.inputs {
                if let Driver::Cell(..) = self.nets[*n].driver {
                    indeg[c] += 1;
                }
                readers[*n].push(c);
            }
        }
        let mut order: Vec<CellId> = (0..self.cells.len()).filter(|c| indeg[*c] == 0).collect();
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for out in &self.cells[c].outputs {
                for r in &readers[*out] {
                    indeg[*r] -= 1;
                    if indeg[*r] == 0 {
                        order.push(*r);
                    }
                }
            }
        }
        if order.len() == self.cells.len() {
            Ok(order)
        } else {
            Err(indeg.iter().position(|d| *d > 0).expect("some cell is blocked"))
        }
    }

    /// Logic level of every net.
    pub fn net_levels(&self) -> Vec<u32> {
        let mut lv = vec![0u32; self.nets.len()];
        for c in self.topo_order() {
            let cell = &self.cells[c];
            let max_in = cell.inputs.iter().map(|n| lv[*n]).max().unwrap_or(0);
            let l = match cell.kind {
                CellKind::Gate(_) if cell.inputs.is_empty() => 0,
                CellKind::Gate(_) | CellKind::Dff => max_in + 1,
                CellKind::Splitter => max_in,
                CellKind::Const(_) => 0,
            };
            for o in &cell.outputs {
                lv[*o] = l;
            }
        }
        lv
    }

    /// Level of every cell (the level of its output).
    pub fn cell_levels(&self) -> Vec<u32> {
        let lv = self.net_levels();
        self.cells
            .iter()
            .map(|c| c.outputs.first().map(|o| lv[*o]).unwrap_or(0))
            .collect()
    }

    pub fn logical_depth(&self) -> u32 {
        let lv = self.net_levels();
        self.outputs.iter().map(|o| lv[o.net]).max().unwrap_or(0)
    }

    pub fn count(&self, pred: impl Fn(CellKind) -> bool) -> usize {
        self.cells.iter().filter(|c| pred(c.kind)).count()
    }

    pub fn gate_count(&self) -> usize {
        self.count(|k| matches!(k, CellKind::Gate(_) | CellKind::Const(_)))
    }

    pub fn dff_count(&self) -> usize {
        self.count(|k| k == CellKind::Dff)
    }

    pub fn splitter_count(&self) -> usize {
        self.count(|k| k == CellKind::Splitter)
    }

    /// Evaluate outputs on 64 patterns at once. DFFs and splitters are
    /// identities under the combinational abstraction.
    pub fn simulate_words(&self, lib: &CellLibrary, inputs: &[u64]) -> Vec<u64> {
        let mut v = vec![0u64; self.nets.len()];
        for (i, n) in self.inputs.iter().enumerate() {
            v[*n] = inputs[i];
        }
        for c in self.topo_order() {
            let cell = &self.cells[c];
            let out = match cell.kind {
                CellKind::Dff | CellKind::Splitter => v[cell.inputs[0]],
                CellKind::Const(b) => {
                    if b {
                        u64::MAX
                    } else {
                        0
                    }
                }
                CellKind::Gate(g) => {
                    let gate = &lib.gates[g];
                    let ins: Vec<u64> = cell.inputs.iter().map(|n| v[*n]).collect();
                    eval_gate_words(gate.function, &ins)
                }
            };
            for o in &cell.outputs {
                v[*o] = out;
            }
        }
        self.outputs.iter().map(|o| v[o.net]).collect()
    }

    /// Drop cells that no output depends on and compact ids. Net names are
    /// kept.
    pub fn sweep(&self) -> MappedNetwork {
        let mut live = vec![false; self.cells.len()];
        let mut stack: Vec<NetId> = self.outputs.iter().map(|o| o.net).collect();
        let mut seen = vec![false; self.nets.len()];
        while let Some(n) = stack.pop() {
            if seen[n] {
                continue;
            }
            seen[n] = true;
            if let Driver::Cell(c, _) = self.nets[n].driver {
                if !live[c] {
                    live[c] = true;
                    stack.extend(self.cells[c].inputs.iter().copied());
                }
            }
        }
        let mut out = MappedNetwork::new(self.model_name.clone());
        out.outputs_balanced = self.outputs_balanced;
        let mut net_map: HashMap<NetId, NetId> = HashMap::new();
        for n in &self.inputs {
            net_map.insert(*n, out.add_input(self.nets[*n].name.clone()));
        }
        for c in self.topo_order() {
            if !live[c] {
                continue;
            }
            let cell = &self.cells[c];
            let ins = cell.inputs.iter().map(|n| net_map[n]).collect();
            let names = cell.outputs.iter().map(|n| self.nets[*n].name.clone()).collect();
            let id = out.add_cell(cell.kind, ins, names, cell.origin);
            for (k, o) in cell.outputs.iter().enumerate() {
                net_map.insert(*o, out.cells[id].outputs[k]);
            }
        }
        for o in &self.outputs {
            out.add_output(o.name.clone(), net_map[&o.net]);
        }
        out
    }
}

pub(crate) fn eval_gate_words(function: truth::TruthTable, ins: &[u64]) -> u64 {
    let n = ins.len();
    let mut out = 0u64;
    for m in 0..(1usize << n) {
        if truth::eval(function, m) {
            let mut term = u64::MAX;
            for (i, x) in ins.iter().enumerate() {
                term &= if (m >> i) & 1 == 1 { *x } else { !*x };
            }
            out |= term;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// text form

/// Deterministic cell order for emission: topological rank (longest path in
/// cells), then first output net name.
fn emission_order(net: &MappedNetwork) -> Vec<CellId> {
    let mut rank = vec![0u32; net.nets.len()];
    let mut cell_rank = vec![0u32; net.cells.len()];
    for c in net.topo_order() {
        let r = net.cells[c]
            .inputs
            .iter()
            .map(|n| rank[*n])
            .max()
            .map(|x| x + 1)
            .unwrap_or(1);
        cell_rank[c] = r;
        for o in &net.cells[c].outputs {
            rank[*o] = r;
        }
    }
    let mut order: Vec<CellId> = (0..net.cells.len()).collect();
    order.sort_by(|a, b| {
        let na = net.cells[*a].outputs.first().map(|n| net.nets[*n].name.as_str());
        let nb = net.cells[*b].outputs.first().map(|n| net.nets[*n].name.as_str());
        cell_rank[*a].cmp(&cell_rank[*b]).then(na.cmp(&nb))
    });
    order
}

/// Write a verified mapped network as BLIF with `.gate` instances.
///
/// Outputs that alias another net are written as single-cube buffers
/// (`.names src dst` / `1 1`), which carry no cell and no level.
pub fn write_mapped_blif(net: &MappedNetwork, lib: &CellLibrary) -> Result<String, MapError> {
    if !net.balanced || !net.splitter_legal {
        return Err(MapError::Unverified(
            "network must be balanced and splitter-legal before emission".into(),
        ));
    }
    let mut s = format!(".model {}\n", net.model_name);
    s.push_str(".inputs");
    for n in &net.inputs {
        s.push(' ');
        s.push_str(&net.nets[*n].name);
    }
    s.push_str("\n.outputs");
    for o in &net.outputs {
        s.push(' ');
        s.push_str(&o.name);
    }
    s.push('\n');
    for c in emission_order(net) {
        let cell = &net.cells[c];
        let name = |n: NetId| net.nets[n].name.as_str();
        match cell.kind {
            CellKind::Gate(g) => {
                let gate = &lib.gates[g];
                s.push_str(&format!(".gate {}", gate.name));
                for (pin, n) in gate.pins.iter().zip(&cell.inputs) {
                    s.push_str(&format!(" {}={}", pin, name(*n)));
                }
                s.push_str(&format!(" {}={}\n", gate.output, name(cell.outputs[0])));
            }
            CellKind::Dff => {
                s.push_str(&format!(
                    ".gate {} {}={} {}={}\n",
                    DFF_NAME,
                    lib.dff.pins[0],
                    name(cell.inputs[0]),
                    lib.dff.output,
                    name(cell.outputs[0])
                ));
            }
            CellKind::Splitter => {
                s.push_str(&format!(
                    ".gate {} {}={} {}={} {}={}\n",
                    SPLITTER_NAME,
                    lib.splitter.pins[0],
                    name(cell.inputs[0]),
                    SPLITTER_OUTPUTS[0],
                    name(cell.outputs[0]),
                    SPLITTER_OUTPUTS[1],
                    name(cell.outputs[1])
                ));
            }
            CellKind::Const(b) => {
                s.push_str(&format!(".names {}\n", name(cell.outputs[0])));
                if b {
                    s.push_str("1\n");
                }
            }
        }
    }
    for o in &net.outputs {
        if net.nets[o.net].name != o.name {
            s.push_str(&format!(".names {} {}\n1 1\n", net.nets[o.net].name, o.name));
        }
    }
    s.push_str(".end\n");
    Ok(s)
}

/// Read back the output of [`write_mapped_blif`]. The verification flags
/// are recomputed; outputs count as aligned when they share one level.
pub fn parse_mapped_blif(text: &str, lib: &CellLibrary) -> Result<MappedNetwork, ParseError> {
    enum Item {
        Cell(usize, CellKind, Vec<String>, Vec<String>),
        Alias(String, String),
    }
    let mut net = MappedNetwork::new("top");
    let mut output_names = Vec::new();
    let mut items = Vec::new();
    let mut open_names: Option<(usize, Vec<String>, Vec<String>)> = None;
    let flush =
        |open: &mut Option<(usize, Vec<String>, Vec<String>)>, items: &mut Vec<Item>| -> Result<(), ParseError> {
            if let Some((line, sig, rows)) = open.take() {
                match (sig.len(), rows.as_slice()) {
                    (1, []) => items.push(Item::Cell(line, CellKind::Const(false), vec![], sig)),
                    (1, [r]) if r == "1" => items.push(Item::Cell(line, CellKind::Const(true), vec![], sig)),
                    (2, [r]) if r == "1 1" => items.push(Item::Alias(sig[0].clone(), sig[1].clone())),
                    _ => {
                        return Err(ParseError::Unsupported {
                            line,
                            what: "general .names in a mapped netlist".into(),
                        })
                    }
                }
            }
            Ok(())
        };
    for (line, text) in logical_lines(text) {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if !toks[0].starts_with('.') {
            match open_names.as_mut() {
                Some((_, _, rows)) => rows.push(toks.join(" ")),
                None => return Err(ParseError::syntax(line, 1, "cover row outside .names")),
            }
            continue;
        }
        flush(&mut open_names, &mut items)?;
        match toks[0] {
            ".model" => net.model_name = toks.get(1).unwrap_or(&"top").to_string(),
            ".inputs" => {
                for t in &toks[1..] {
                    net.add_input(t.to_string());
                }
            }
            ".outputs" => output_names.extend(toks[1..].iter().map(|t| t.to_string())),
            ".names" => open_names = Some((line, toks[1..].iter().map(|t| t.to_string()).collect(), Vec::new())),
            ".end" => {}
            ".gate" => {
                let cell = toks
                    .get(1)
                    .ok_or_else(|| ParseError::syntax(line, 1, "missing cell name"))?;
                let mut conns: HashMap<&str, &str> = HashMap::new();
                for t in &toks[2..] {
                    let (p, n) = t
                        .split_once('=')
                        .ok_or_else(|| ParseError::syntax(line, 1, format!("bad connection `{t}`")))?;
                    conns.insert(p, n);
                }
                let get = |p: &str| -> Result<String, ParseError> {
                    conns
                        .get(p)
                        .map(|s| s.to_string())
                        .ok_or_else(|| ParseError::syntax(line, 1, format!("pin `{p}` unconnected")))
                };
                let (kind, ins, outs) = if *cell == DFF_NAME {
                    (CellKind::Dff, vec![get(&lib.dff.pins[0])?], vec![get(&lib.dff.output)?])
                } else if *cell == SPLITTER_NAME {
                    (
                        CellKind::Splitter,
                        vec![get(&lib.splitter.pins[0])?],
                        vec![get(SPLITTER_OUTPUTS[0])?, get(SPLITTER_OUTPUTS[1])?],
                    )
                } else {
                    let g = lib
                        .gate_by_name(cell)
                        .ok_or_else(|| ParseError::UnknownCell(cell.to_string()))?;
                    let gate = &lib.gates[g];
                    let ins = gate.pins.iter().map(|p| get(p)).collect::<Result<Vec<_>, _>>()?;
                    (CellKind::Gate(g), ins, vec![get(&gate.output)?])
                };
                items.push(Item::Cell(line, kind, ins, outs));
            }
            other => {
                return Err(ParseError::Unsupported {
                    line,
                    what: other.to_string(),
                })
            }
        }
    }
    flush(&mut open_names, &mut items)?;

    // create all cell outputs first so inputs can be resolved in any order
    let mut by_name: HashMap<String, NetId> = HashMap::new();
    for n in &net.inputs {
        by_name.insert(net.nets[*n].name.clone(), *n);
    }
    let mut pending = Vec::new();
    for item in &items {
        if let Item::Cell(line, kind, ins, outs) = item {
            let id = net.add_cell(*kind, Vec::new(), outs.clone(), None);
            for (k, o) in outs.iter().enumerate() {
                if by_name.insert(o.clone(), net.cells[id].outputs[k]).is_some() {
                    return Err(ParseError::Redefined(o.clone()));
                }
            }
            pending.push((id, *line, ins));
        }
    }
    for (id, _line, ins) in pending {
        let mut resolved = Vec::with_capacity(ins.len());
        for i in ins {
            resolved.push(*by_name.get(i).ok_or_else(|| ParseError::UndefinedNet(i.clone()))?);
        }
        net.cells[id].inputs = resolved;
    }
    let mut aliases: HashMap<String, String> = HashMap::new();
    for item in &items {
        if let Item::Alias(src, dst) = item {
            aliases.insert(dst.clone(), src.clone());
        }
    }
    for o in output_names {
        let src = aliases.get(&o).unwrap_or(&o);
        let n = *by_name.get(src).ok_or_else(|| ParseError::UndefinedNet(src.clone()))?;
        net.add_output(o, n);
    }
    let seen: HashSet<&str> = net.nets.iter().map(|n| n.name.as_str()).collect();
    if seen.len() != net.nets.len() {
        return Err(ParseError::Redefined("duplicate net name".into()));
    }
    if let Err(c) = net.try_topo_order() {
        return Err(ParseError::Cycle(net.nets[net.cells[c].outputs[0]].name.clone()));
    }
    let levels = net.net_levels();
    let mut out_levels = net.outputs.iter().map(|o| levels[o.net]);
    let first = out_levels.next();
    let aligned = out_levels.all(|l| Some(l) == first);
    crate::balance::verify(&mut net, aligned);
    Ok(net)
}
