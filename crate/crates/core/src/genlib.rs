//! Standard-cell libraries in the genlib subset, plus the built-in DFF and
//! splitter cells every SFQ netlist needs.

use log::warn;

use crate::error::ParseError;
use crate::truth::{self, TruthTable, MAX_VARS};

pub type GateId = usize;

/// Boolean expression of a gate output over its pins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    Var(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, lookup: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Var(v) => lookup(v),
            Expr::Not(e) => !e.eval(lookup),
            Expr::And(a, b) => a.eval(lookup) && b.eval(lookup),
            Expr::Or(a, b) => a.eval(lookup) || b.eval(lookup),
        }
    }

    /// Variables in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Const(_) => {}
                Expr::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                Expr::Not(x) => walk(x, out),
                Expr::And(a, b) | Expr::Or(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LibGate {
    pub name: String,
    pub area: f64,
    /// Output pin name as written in the library.
    pub output: String,
    /// Input pin names; pin `i` is truth-table variable `i`.
    pub pins: Vec<String>,
    pub function: TruthTable,
    pub delay: f64,
}

impl LibGate {
    pub fn fanin_count(&self) -> usize {
        self.pins.len()
    }

    pub fn is_constant(&self) -> bool {
        self.pins.is_empty()
    }

    fn builtin(name: &str, input: &str, output: &str, delay: f64, area: f64) -> LibGate {
        LibGate {
            name: name.to_string(),
            area,
            output: output.to_string(),
            pins: vec![input.to_string()],
            function: 0b10,
            delay,
        }
    }
}

/// Delay and area of the built-in sequential and fanout cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuiltinParams {
    pub dff_delay: f64,
    pub dff_area: f64,
    pub splitter_delay: f64,
    pub splitter_area: f64,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        BuiltinParams {
            dff_delay: 1.0,
            dff_area: 1.0,
            splitter_delay: 1.0,
            splitter_area: 1.0,
        }
    }
}

pub const DFF_NAME: &str = "DFF";
pub const SPLITTER_NAME: &str = "SPLIT";
/// Output pin names of the two splitter branches.
pub const SPLITTER_OUTPUTS: [&str; 2] = ["Y1", "Y2"];

#[derive(Debug, Clone, PartialEq)]
pub struct CellLibrary {
    pub gates: Vec<LibGate>,
    pub dff: LibGate,
    pub splitter: LibGate,
    /// Cheapest single-input gate computing `!a`, if any.
    pub inverter: Option<GateId>,
}

impl CellLibrary {
    pub fn new(gates: Vec<LibGate>, params: BuiltinParams) -> Result<Self, ParseError> {
        if gates.iter().all(|g| g.is_constant()) {
            return Err(ParseError::EmptyLibrary);
        }
        for g in &gates {
            if g.name == DFF_NAME || g.name == SPLITTER_NAME {
                return Err(ParseError::Unsupported {
                    line: 0,
                    what: format!("gate name `{}` is reserved", g.name),
                });
            }
        }
        let mut lib = CellLibrary {
            gates,
            dff: LibGate::builtin(DFF_NAME, "D", "Q", params.dff_delay, params.dff_area),
            splitter: LibGate::builtin(SPLITTER_NAME, "A", "Y", params.splitter_delay, params.splitter_area),
            inverter: None,
        };
        lib.inverter = lib
            .gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.fanin_count() == 1 && g.function == 0b01)
            .min_by(|a, b| a.1.area.total_cmp(&b.1.area).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i);
        Ok(lib)
    }

    pub fn inverter_present(&self) -> bool {
        self.inverter.is_some()
    }

    pub fn max_fanin(&self) -> usize {
        self.gates.iter().map(|g| g.fanin_count()).max().unwrap_or(0)
    }

    /// Default cut size: `min(6, widest gate)`, at least 2.
    pub fn default_cut_size(&self) -> usize {
        self.max_fanin().clamp(2, MAX_VARS)
    }

    pub fn gate_by_name(&self, name: &str) -> Option<GateId> {
        self.gates.iter().position(|g| g.name == name)
    }

    pub fn with_params(&self, params: BuiltinParams) -> CellLibrary {
        let mut lib = self.clone();
        lib.dff.delay = params.dff_delay;
        lib.dff.area = params.dff_area;
        lib.splitter.delay = params.splitter_delay;
        lib.splitter.area = params.splitter_area;
        lib
    }
}

// ---------------------------------------------------------------------------
// expression parser

struct ExprParser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    _src: &'a str,
}

impl<'a> ExprParser<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::syntax(self.line, self.column + self.pos, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn ident_char(c: char) -> bool {
        c.is_alphanumeric() || matches!(c, '_' | '[' | ']' | '.' | '$')
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while self.peek() == Some('+') {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some('*') | Some('&') => {
                    self.pos += 1;
                }
                Some(c) if c == '(' || c == '!' || Self::ident_char(c) => {}
                _ => break,
            }
            let rhs = self.factor()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some('!') {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        let mut e = self.primary()?;
        while self.peek() == Some('\'') {
            self.pos += 1;
            e = Expr::Not(Box::new(e));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if Self::ident_char(c) => {
                let start = self.pos;
                while self.pos < self.chars.len() && Self::ident_char(self.chars[self.pos]) {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                Ok(match word.as_str() {
                    "CONST0" => Expr::Const(false),
                    "CONST1" => Expr::Const(true),
                    _ => Expr::Var(word),
                })
            }
            Some(c) => Err(self.err(format!("unexpected `{c}` in expression"))),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

/// Parse a genlib output expression such as `!(a*b)+c'`.
pub fn parse_expr(text: &str, line: usize, column: usize) -> Result<Expr, ParseError> {
    let mut p = ExprParser {
        chars: text.chars().collect(),
        pos: 0,
        line,
        column,
        _src: text,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing characters in expression"));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// library file

struct Token {
    text: String,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let mut start = None;
        for (pos, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    out.push(Token {
                        text: line[s..pos].to_string(),
                        line: idx + 1,
                        column: s + 1,
                    });
                }
            } else if start.is_none() {
                start = Some(pos);
            }
        }
    }
    out
}

struct PinSpec {
    name: String,
    delay: f64,
}

fn number(tok: &Token, what: &str) -> Result<f64, ParseError> {
    tok.text
        .parse::<f64>()
        .map_err(|_| ParseError::syntax(tok.line, tok.column, format!("expected {what}")))
}

/// Parse a genlib library. Gate delay is the maximum rise/fall block delay
/// over all PIN lines; load-dependent coefficients are ignored.
pub fn parse_genlib(text: &str, params: BuiltinParams) -> Result<CellLibrary, ParseError> {
    let toks = tokenize(text);
    let mut i = 0;
    let mut gates = Vec::new();
    while i < toks.len() {
        let t = &toks[i];
        match t.text.as_str() {
            "GATE" => {}
            "LATCH" => {
                return Err(ParseError::Unsupported {
                    line: t.line,
                    what: "LATCH".into(),
                })
            }
            _ => {
                return Err(ParseError::syntax(
                    t.line,
                    t.column,
                    format!("expected GATE, found `{}`", t.text),
                ))
            }
        }
        let gate_line = t.line;
        let name_tok = toks
            .get(i + 1)
            .ok_or_else(|| ParseError::syntax(t.line, t.column, "missing gate name"))?;
        let area_tok = toks
            .get(i + 2)
            .ok_or_else(|| ParseError::syntax(t.line, t.column, "missing gate area"))?;
        let area = number(area_tok, "gate area")?;
        if area < 0.0 {
            return Err(ParseError::syntax(area_tok.line, area_tok.column, "negative area"));
        }
        // gather the assignment up to ';'
        i += 3;
        let mut assign = String::new();
        let (first_line, first_col) = toks
            .get(i)
            .map(|t| (t.line, t.column))
            .unwrap_or((area_tok.line, area_tok.column));
        loop {
            let tok = toks
                .get(i)
                .ok_or_else(|| ParseError::syntax(first_line, first_col, "gate function not terminated by `;`"))?;
            i += 1;
            if let Some(body) = tok.text.strip_suffix(';') {
                assign.push_str(body);
                break;
            }
            if let Some(p) = tok.text.find(';') {
                return Err(ParseError::syntax(
                    tok.line,
                    tok.column + p,
                    "unexpected text after `;`",
                ));
            }
            assign.push_str(&tok.text);
            assign.push(' ');
        }
        let (out, expr_text) = assign
            .split_once('=')
            .ok_or_else(|| ParseError::syntax(first_line, first_col, "expected `<output>=<expression>`"))?;
        let expr = parse_expr(expr_text, first_line, first_col + out.len() + 1)?;

        let mut pins: Vec<PinSpec> = Vec::new();
        while i < toks.len() && toks[i].text == "PIN" {
            let fields: Vec<&Token> = toks[i + 1..].iter().take(8).collect();
            if fields.len() < 8 {
                return Err(ParseError::syntax(toks[i].line, toks[i].column, "incomplete PIN line"));
            }
            let rise = number(fields[4], "rise block delay")?;
            let fall = number(fields[6], "fall block delay")?;
            for (k, what) in [
                (2, "input load"),
                (3, "max load"),
                (5, "rise fanout delay"),
                (7, "fall fanout delay"),
            ] {
                number(fields[k], what)?;
            }
            pins.push(PinSpec {
                name: fields[0].text.clone(),
                delay: rise.max(fall),
            });
            i += 9;
        }

        let vars = expr.variables();
        let mut order: Vec<String> = pins.iter().filter(|p| p.name != "*").map(|p| p.name.clone()).collect();
        for v in &vars {
            if !order.contains(v) {
                order.push(v.clone());
            }
        }
        let name = name_tok.text.clone();
        if order.len() > MAX_VARS {
            warn!(
                "skipping gate `{name}`: {} inputs exceed the supported maximum",
                order.len()
            );
            continue;
        }
        let n = order.len();
        let mut function = 0u64;
        for m in 0..(1usize << n) {
            let lookup = |v: &str| {
                let idx = order.iter().position(|o| o == v).unwrap();
                (m >> idx) & 1 == 1
            };
            if expr.eval(&lookup) {
                function |= 1 << m;
            }
        }
        if n > 0 && (function == 0 || function == truth::mask(n)) {
            warn!("skipping gate `{name}` on line {gate_line}: constant function over its pins");
            continue;
        }
        let delay = pins.iter().map(|p| p.delay).fold(0.0, f64::max);
        gates.push(LibGate {
            name,
            area,
            output: out.trim().to_string(),
            pins: order,
            function,
            delay,
        });
    }
    CellLibrary::new(gates, params)
}
