//! Technology-independent input netlists in the combinational BLIF subset.

use std::collections::HashMap;

use crate::error::ParseError;

/// Literal of one cover row input column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CubeLit {
    Zero,
    One,
    DontCare,
}

/// One `.names` row: input literals and the output column value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverRow {
    pub inputs: Vec<CubeLit>,
    pub output: bool,
}

/// A single-output `.names` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub output: String,
    pub inputs: Vec<String>,
    pub rows: Vec<CoverRow>,
}

impl Table {
    /// Cover semantics: rows with output `1` describe the on-set, rows with
    /// output `0` the off-set. An empty cover is constant 0.
    pub fn eval(&self, values: &[bool]) -> bool {
        let polarity = self.rows.first().map(|r| r.output).unwrap_or(true);
        let hit = self.rows.iter().any(|row| {
            row.inputs.iter().zip(values).all(|(lit, v)| match lit {
                CubeLit::One => *v,
                CubeLit::Zero => !*v,
                CubeLit::DontCare => true,
            })
        });
        if polarity {
            hit
        } else {
            !hit
        }
    }

    /// Bit-parallel version of [`Table::eval`].
    pub fn eval_words(&self, values: &[u64]) -> u64 {
        let polarity = self.rows.first().map(|r| r.output).unwrap_or(true);
        let mut hit = 0u64;
        for row in &self.rows {
            let mut cube = u64::MAX;
            for (lit, v) in row.inputs.iter().zip(values) {
                match lit {
                    CubeLit::One => cube &= *v,
                    CubeLit::Zero => cube &= !*v,
                    CubeLit::DontCare => {}
                }
            }
            hit |= cube;
        }
        if polarity {
            hit
        } else {
            !hit
        }
    }
}

/// A parsed combinational netlist. Tables are stored in topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawNetlist {
    pub model_name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub tables: Vec<Table>,
}

impl RawNetlist {
    /// Evaluate all outputs on 64 patterns at once; `inputs[i]` carries the
    /// values of primary input `i`.
    pub fn simulate_words(&self, inputs: &[u64]) -> Vec<u64> {
        let mut values: HashMap<&str, u64> = HashMap::new();
        for (name, v) in self.inputs.iter().zip(inputs) {
            values.insert(name, *v);
        }
        for t in &self.tables {
            let ins: Vec<u64> = t.inputs.iter().map(|n| values[n.as_str()]).collect();
            let v = t.eval_words(&ins);
            values.insert(&t.output, v);
        }
        self.outputs.iter().map(|o| values[o.as_str()]).collect()
    }

    /// Serialize back to BLIF.
    pub fn to_blif(&self) -> String {
        let mut s = format!(".model {}\n", self.model_name);
        s.push_str(&format!(".inputs {}\n", self.inputs.join(" ")));
        s.push_str(&format!(".outputs {}\n", self.outputs.join(" ")));
        for t in &self.tables {
            s.push_str(".names");
            for i in &t.inputs {
                s.push(' ');
                s.push_str(i);
            }
            s.push(' ');
            s.push_str(&t.output);
            s.push('\n');
            for row in &t.rows {
                for lit in &row.inputs {
                    s.push(match lit {
                        CubeLit::Zero => '0',
                        CubeLit::One => '1',
                        CubeLit::DontCare => '-',
                    });
                }
                if !row.inputs.is_empty() {
                    s.push(' ');
                }
                s.push(if row.output { '1' } else { '0' });
                s.push('\n');
            }
        }
        s.push_str(".end\n");
        s
    }
}

/// Logical lines with `\` continuations joined and comments stripped.
/// Each entry carries the 1-based physical line number where it started.
pub(crate) fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let (body, continued) = match line.trim_end().strip_suffix('\\') {
            Some(b) => (b, true),
            None => (line, false),
        };
        let entry = pending.get_or_insert_with(|| (idx + 1, String::new()));
        entry.1.push_str(body);
        entry.1.push(' ');
        if !continued {
            let (n, s) = pending.take().unwrap();
            if !s.trim().is_empty() {
                out.push((n, s));
            }
        }
    }
    if let Some((n, s)) = pending {
        if !s.trim().is_empty() {
            out.push((n, s));
        }
    }
    out
}

fn column_of(line: &str, token: &str) -> usize {
    line.find(token).map(|p| p + 1).unwrap_or(1)
}

/// Parse the combinational BLIF subset: `.model`, `.inputs`, `.outputs`,
/// `.names` with single-output covers, `.end`.
pub fn parse_blif(text: &str) -> Result<RawNetlist, ParseError> {
    let mut model_name = String::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut tables: Vec<Table> = Vec::new();
    let mut current: Option<Table> = None;
    let mut ended = false;

    for (lineno, line) in logical_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let head = tokens[0];
        if ended {
            return Err(ParseError::syntax(lineno, 1, "content after .end"));
        }
        if head.starts_with('.') {
            if let Some(t) = current.take() {
                tables.push(t);
            }
            match head {
                ".model" => model_name = tokens.get(1).unwrap_or(&"top").to_string(),
                ".inputs" => inputs.extend(tokens[1..].iter().map(|s| s.to_string())),
                ".outputs" => outputs.extend(tokens[1..].iter().map(|s| s.to_string())),
                ".names" => {
                    if tokens.len() < 2 {
                        return Err(ParseError::syntax(
                            lineno,
                            column_of(&line, head),
                            ".names needs an output net",
                        ));
                    }
                    let output = tokens[tokens.len() - 1].to_string();
                    let ins = tokens[1..tokens.len() - 1].iter().map(|s| s.to_string()).collect();
                    current = Some(Table {
                        output,
                        inputs: ins,
                        rows: Vec::new(),
                    });
                }
                ".end" => ended = true,
                ".latch" | ".subckt" | ".gate" | ".mlatch" | ".exdc" | ".search" => {
                    return Err(ParseError::Unsupported {
                        line: lineno,
                        what: head.to_string(),
                    })
                }
                _ => {
                    return Err(ParseError::syntax(
                        lineno,
                        column_of(&line, head),
                        format!("unknown directive `{head}`"),
                    ))
                }
            }
            continue;
        }
        let table = current
            .as_mut()
            .ok_or_else(|| ParseError::syntax(lineno, column_of(&line, head), "cover row outside .names"))?;
        let n = table.inputs.len();
        let (in_part, out_part) = match (n, tokens.len()) {
            (0, 1) => ("", tokens[0]),
            (_, 2) => (tokens[0], tokens[1]),
            _ => {
                return Err(ParseError::syntax(
                    lineno,
                    1,
                    format!("expected {} input literals and one output literal", n),
                ))
            }
        };
        if in_part.len() != n {
            return Err(ParseError::syntax(
                lineno,
                column_of(&line, in_part),
                format!("cube has {} literals, table has {} inputs", in_part.len(), n),
            ));
        }
        let mut lits = Vec::with_capacity(n);
        for (i, c) in in_part.chars().enumerate() {
            lits.push(match c {
                '0' => CubeLit::Zero,
                '1' => CubeLit::One,
                '-' => CubeLit::DontCare,
                _ => {
                    return Err(ParseError::syntax(
                        lineno,
                        column_of(&line, in_part) + i,
                        format!("invalid cube literal `{c}`"),
                    ))
                }
            });
        }
        let output = match out_part {
            "1" => true,
            "0" => false,
            _ => {
                return Err(ParseError::syntax(
                    lineno,
                    column_of(&line, out_part),
                    format!("invalid output literal `{out_part}`"),
                ))
            }
        };
        if let Some(first) = table.rows.first() {
            if first.output != output {
                return Err(ParseError::syntax(
                    lineno,
                    column_of(&line, out_part),
                    "mixed on-set and off-set rows in one cover",
                ));
            }
        }
        table.rows.push(CoverRow { inputs: lits, output });
    }
    if let Some(t) = current.take() {
        tables.push(t);
    }
    if model_name.is_empty() {
        model_name = "top".to_string();
    }
    order_tables(model_name, inputs, outputs, tables)
}

/// Validate definitions and sort tables topologically.
fn order_tables(
    model_name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    tables: Vec<Table>,
) -> Result<RawNetlist, ParseError> {
    let mut defined: HashMap<&str, Option<usize>> = HashMap::new();
    for i in &inputs {
        if defined.insert(i, None).is_some() {
            return Err(ParseError::Redefined(i.clone()));
        }
    }
    for (idx, t) in tables.iter().enumerate() {
        if defined.insert(&t.output, Some(idx)).is_some() {
            return Err(ParseError::Redefined(t.output.clone()));
        }
    }
    for t in &tables {
        for i in &t.inputs {
            if !defined.contains_key(i.as_str()) {
                return Err(ParseError::UndefinedNet(i.clone()));
            }
        }
    }
    for o in &outputs {
        if !defined.contains_key(o.as_str()) {
            return Err(ParseError::UndefinedNet(o.clone()));
        }
    }

    // iterative DFS; 0 = new, 1 = on stack, 2 = done
    let mut state = vec![0u8; tables.len()];
    let mut order = Vec::with_capacity(tables.len());
    for root in 0..tables.len() {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some((t, next)) = stack.pop() {
            if next < tables[t].inputs.len() {
                stack.push((t, next + 1));
                if let Some(Some(dep)) = defined.get(tables[t].inputs[next].as_str()) {
                    match state[*dep] {
                        0 => {
                            state[*dep] = 1;
                            stack.push((*dep, 0));
                        }
                        1 => return Err(ParseError::Cycle(tables[*dep].output.clone())),
                        _ => {}
                    }
                }
            } else {
                state[t] = 2;
                order.push(t);
            }
        }
    }
    let mut slots: Vec<Option<Table>> = tables.into_iter().map(Some).collect();
    let tables = order.into_iter().map(|i| slots[i].take().unwrap()).collect();
    Ok(RawNetlist {
        model_name,
        inputs,
        outputs,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buffer() {
        let n = parse_blif(".model buf\n.inputs a\n.outputs y\n.names a y\n1 1\n.end\n").unwrap();
        assert_eq!(n.inputs, vec!["a"]);
        assert_eq!(n.tables.len(), 1);
        assert!(n.tables[0].eval(&[true]));
        assert!(!n.tables[0].eval(&[false]));
    }

    #[test]
    fn four_input_and() {
        let n = parse_blif(".model f\n.inputs a b c d\n.outputs y\n.names a b c d y\n1111 1\n.end\n").unwrap();
        assert_eq!(n.tables.len(), 1);
        assert_eq!(n.tables[0].inputs.len(), 4);
    }

    #[test]
    fn or_of_cubes_matches_brute_force_cover_evaluation() {
        let n = parse_blif(".model f\n.inputs a b\n.outputs y\n.names a b y\n1- 1\n01 1\n.end\n").unwrap();
        // independent evaluation of the two cubes
        for m in 0..4 {
            let a = m & 1 == 1;
            let b = m & 2 == 2;
            let expect = a || (!a && b);
            assert_eq!(n.tables[0].eval(&[a, b]), expect, "pattern {m}");
        }
    }

    #[test]
    fn off_set_cover_and_constants() {
        let n = parse_blif(".model f\n.inputs a b\n.outputs y z w\n.names a b y\n11 0\n.names z\n1\n.names w\n.end\n")
            .unwrap();
        let out = n.simulate_words(&[0b1010, 0b1100]);
        assert_eq!(out[0] & 0xF, 0b0111);
        assert_eq!(out[1], u64::MAX);
        assert_eq!(out[2], 0);
    }

    #[test]
    fn tables_sorted_topologically() {
        let n =
            parse_blif(".model f\n.inputs a b\n.outputs y\n.names t b y\n11 1\n.names a b t\n10 1\n.end\n").unwrap();
        assert_eq!(n.tables[0].output, "t");
        assert_eq!(n.tables[1].output, "y");
    }

    #[test]
    fn continuation_and_comments() {
        let n = parse_blif("# header\n.model f\n.inputs a \\\n b\n.outputs y # trailing\n.names a b y\n11 1\n.end\n")
            .unwrap();
        assert_eq!(n.inputs, vec!["a", "b"]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_blif(".model f\n.inputs a\n.outputs y\n.latch a y 0\n.end\n"),
            Err(ParseError::Unsupported { line: 4, .. })
        ));
        assert!(matches!(
            parse_blif(".model f\n.inputs a\n.outputs y\n.names a q y\n11 1\n.end\n"),
            Err(ParseError::UndefinedNet(n)) if n == "q"
        ));
        assert!(matches!(
            parse_blif(".model f\n.inputs a\n.outputs y\n.names a z y\n11 1\n.names y z\n1 1\n.end\n"),
            Err(ParseError::Cycle(_))
        ));
        assert!(matches!(
            parse_blif(".model f\n.inputs a\n.outputs y\n.names a y\n2 1\n.end\n"),
            Err(ParseError::Syntax { line: 5, column: 1, .. })
        ));
        assert!(matches!(
            parse_blif(".model f\n.inputs a\n.outputs y\n.names a y\n1 1\n.names a y\n0 1\n.end\n"),
            Err(ParseError::Redefined(_))
        ));
    }

    #[test]
    fn round_trip_text() {
        let src = ".model f\n.inputs a b\n.outputs y\n.names a b y\n1- 1\n01 1\n.end\n";
        let n = parse_blif(src).unwrap();
        assert_eq!(n.to_blif(), src);
        assert_eq!(parse_blif(&n.to_blif()).unwrap(), n);
    }
}
