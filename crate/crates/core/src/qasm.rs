//! A small OpenQASM 2.0 subset: one quantum register, standard single- and two-qubit
//! gates, and `u1`/`u2`/`u3` with literal angles.
//!
//! Gates are packed into layers as early as possible. Emission writes layers in order,
//! qubits ascending within a layer, and skips identity cells.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::angle::{Angle, AngleError};
use crate::circuit::{Cell, CircuitError, CircuitGrid, Role};
use crate::gates::{builtin, GateDef, GateError, ParamGateTemplate, TEMPLATES, U3};

/// Definition block emitted when a circuit uses `iswap`, which `qelib1.inc` lacks.
pub const ISWAP_DEFINITION: &str = "gate iswap a,b { s a; s b; h a; cx a,b; cx b,a; h b; }";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("missing `OPENQASM 2.0;` header")]
    MissingHeader,
    #[error("{line}:{col}: OpenQASM {version} is not supported; only 2.0 is")]
    UnsupportedVersion { line: usize, col: usize, version: String },
    #[error("{line}:{col}: unsupported gate `{name}`")]
    UnsupportedGate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: unsupported statement `{keyword}`")]
    UnsupportedStatement { line: usize, col: usize, keyword: String },
    #[error("{line}:{col}: measurement is not supported")]
    Measurement { line: usize, col: usize },
    #[error("{line}:{col}: operand {register}[{index}] is out of range (size {size})")]
    OperandOutOfRange {
        line: usize,
        col: usize,
        register: String,
        index: usize,
        size: usize,
    },
    #[error("{line}:{col}: unknown register `{name}`")]
    UnknownRegister { line: usize, col: usize, name: String },
    #[error("no quantum register declared")]
    NoRegister,
    #[error("{line}:{col}: only one quantum register is supported")]
    MultipleRegisters { line: usize, col: usize },
    #[error("{line}:{col}: gate `{gate}` takes {expected} qubit(s), got {found}")]
    OperandCount {
        line: usize,
        col: usize,
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}:{col}: gate `{gate}` repeats a qubit operand")]
    RepeatedOperand { line: usize, col: usize, gate: String },
    #[error("{line}:{col}: gate `{gate}` takes {expected} angle(s), got {found}")]
    AngleCount {
        line: usize,
        col: usize,
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}:{col}: {source}")]
    Angle {
        line: usize,
        col: usize,
        source: AngleError,
    },
    #[error("gate {0} has no QASM rendering")]
    NoRendering(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Sym(char),
    Arrow,
    EqEq,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    start: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, QasmError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    while i < bytes.len() {
        let c = bytes[i];
        let col = i - line_start + 1;
        let start = i;
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, col, start });
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                line_start = i;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                i += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(QasmError::Syntax { line, col, message: "unterminated comment".into() });
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    if bytes[i] == b'\n' {
                        line += 1;
                        line_start = i + 1;
                    }
                    i += 1;
                }
            }
            b'"' => {
                let end = src[i + 1..]
                    .find(['"', '\n'])
                    .map(|e| i + 1 + e)
                    .filter(|&e| bytes[e] == b'"')
                    .ok_or(QasmError::Syntax { line, col, message: "unterminated string".into() })?;
                push(&mut out, Tok::Str(src[i + 1..end].to_string()));
                i = end + 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                push(&mut out, Tok::Arrow);
                i += 2;
            }
            b'=' if bytes.get(i + 1) == Some(&b'=') => {
                push(&mut out, Tok::EqEq);
                i += 2;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(src[start..i].to_string()));
            }
            c if c.is_ascii_digit() || c == b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
                    i += 1;
                    if i < bytes.len() && matches!(bytes[i], b'+' | b'-') {
                        i += 1;
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                push(&mut out, Tok::Number(src[start..i].to_string()));
            }
            b';' | b',' | b'(' | b')' | b'[' | b']' | b'{' | b'}' | b'+' | b'-' | b'*' | b'/' | b'^' => {
                push(&mut out, Tok::Sym(c as char));
                i += 1;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(QasmError::Syntax { line, col, message: format!("unexpected character {ch:?}") });
            }
        }
    }
    Ok(out)
}

/// One gate statement.
#[derive(Debug, Clone, PartialEq)]
pub struct GateApplication {
    pub token: String,
    pub angles: Vec<Angle>,
    pub qubits: Vec<usize>,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QasmProgram {
    pub register: String,
    pub size: usize,
    pub ops: Vec<GateApplication>,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn syntax(&self, message: impl Into<String>) -> QasmError {
        let (line, col) = self.here();
        QasmError::Syntax { line, col, message: message.into() }
    }

    fn next(&mut self, what: &str) -> Result<Token, QasmError> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.syntax(format!("unexpected end of input, expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Sym(s), .. }) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.syntax(format!("expected `{c}`"))),
        }
    }

    fn at_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c)
    }

    fn ident(&mut self, what: &str) -> Result<Token, QasmError> {
        let t = self.next(what)?;
        match t.tok {
            Tok::Ident(_) => Ok(t),
            _ => {
                self.pos -= 1;
                Err(self.syntax(format!("expected {what}")))
            }
        }
    }

    fn integer(&mut self) -> Result<usize, QasmError> {
        let t = self.next("integer")?;
        match &t.tok {
            Tok::Number(n) => n.parse().map_err(|_| {
                self.pos -= 1;
                self.syntax(format!("expected an integer, found {n}"))
            }),
            _ => {
                self.pos -= 1;
                Err(self.syntax("expected an integer"))
            }
        }
    }

    fn header(&mut self) -> Result<(), QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(kw), .. }) if kw == "OPENQASM" => self.pos += 1,
            _ => return Err(QasmError::MissingHeader),
        }
        let t = self.next("version")?;
        let version = match &t.tok {
            Tok::Number(v) => v.clone(),
            _ => return Err(QasmError::Syntax { line: t.line, col: t.col, message: "expected a version number".into() }),
        };
        if version != "2.0" {
            return Err(QasmError::UnsupportedVersion { line: t.line, col: t.col, version });
        }
        self.expect_sym(';')
    }

    fn skip_gate_block(&mut self) -> Result<(), QasmError> {
        while !self.at_sym('{') {
            self.next("`{`")?;
        }
        while !self.at_sym('}') {
            self.next("`}`")?;
        }
        self.pos += 1;
        Ok(())
    }

    fn angles(&mut self) -> Result<Vec<Angle>, QasmError> {
        let mut out = Vec::new();
        if !self.at_sym('(') {
            return Ok(out);
        }
        self.pos += 1;
        if self.at_sym(')') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            let first = self.peek().cloned().ok_or_else(|| self.syntax("unterminated parameter list"))?;
            let mut depth = 0usize;
            let end = loop {
                let t = self.peek().cloned().ok_or_else(|| self.syntax("unterminated parameter list"))?;
                match t.tok {
                    Tok::Sym('(') => depth += 1,
                    Tok::Sym(')') if depth > 0 => depth -= 1,
                    Tok::Sym(')') | Tok::Sym(',') => break t,
                    Tok::Sym(';') => return Err(self.syntax("unterminated parameter list")),
                    _ => {}
                }
                self.pos += 1;
            };
            let text = &self.src[first.start..end.start];
            let angle = text.parse::<Angle>().map_err(|source| QasmError::Angle {
                line: first.line,
                col: first.col,
                source,
            })?;
            out.push(angle);
            self.pos += 1;
            if end.tok == Tok::Sym(')') {
                return Ok(out);
            }
        }
    }

    fn program(&mut self) -> Result<QasmProgram, QasmError> {
        self.header()?;
        let mut register: Option<(String, usize)> = None;
        let mut ops = Vec::new();
        while let Some(t) = self.peek().cloned() {
            let kw = match &t.tok {
                Tok::Ident(k) => k.clone(),
                _ => return Err(self.syntax("expected a statement")),
            };
            let (line, col) = (t.line, t.col);
            match kw.as_str() {
                "OPENQASM" => return Err(self.syntax("repeated header")),
                "include" => {
                    self.pos += 1;
                    match self.next("file name")?.tok {
                        Tok::Str(_) => {}
                        _ => {
                            self.pos -= 1;
                            return Err(self.syntax("expected a quoted file name"));
                        }
                    }
                    self.expect_sym(';')?;
                }
                "qreg" | "creg" => {
                    self.pos += 1;
                    let name = self.ident("register name")?;
                    self.expect_sym('[')?;
                    let size = self.integer()?;
                    self.expect_sym(']')?;
                    self.expect_sym(';')?;
                    if kw == "qreg" {
                        if register.is_some() {
                            return Err(QasmError::MultipleRegisters { line, col });
                        }
                        let Tok::Ident(name) = name.tok else { unreachable!() };
                        register = Some((name, size));
                    }
                }
                "measure" => return Err(QasmError::Measurement { line, col }),
                "barrier" | "reset" | "if" | "opaque" => {
                    return Err(QasmError::UnsupportedStatement { line, col, keyword: kw });
                }
                "gate" => {
                    self.pos += 1;
                    match self.peek() {
                        Some(Token { tok: Tok::Ident(name), .. }) if name == "iswap" => self.skip_gate_block()?,
                        _ => return Err(QasmError::UnsupportedStatement { line, col, keyword: kw }),
                    }
                }
                _ => {
                    self.pos += 1;
                    let angles = self.angles()?;
                    let mut qubits = Vec::new();
                    loop {
                        let reg = self.ident("qubit operand")?;
                        let Tok::Ident(reg_name) = reg.tok else { unreachable!() };
                        let Some((name, size)) = &register else {
                            return Err(QasmError::UnknownRegister { line: reg.line, col: reg.col, name: reg_name });
                        };
                        if &reg_name != name {
                            return Err(QasmError::UnknownRegister { line: reg.line, col: reg.col, name: reg_name });
                        }
                        if !self.at_sym('[') {
                            return Err(self.syntax("register-wide operands are not supported; index a qubit"));
                        }
                        self.pos += 1;
                        let index = self.integer()?;
                        self.expect_sym(']')?;
                        if index >= *size {
                            return Err(QasmError::OperandOutOfRange {
                                line: reg.line,
                                col: reg.col,
                                register: reg_name,
                                index,
                                size: *size,
                            });
                        }
                        qubits.push(index);
                        if self.at_sym(',') {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    if self.peek().is_some_and(|t| t.tok == Tok::Arrow) {
                        return Err(QasmError::Measurement { line, col });
                    }
                    self.expect_sym(';')?;
                    ops.push(GateApplication { token: kw, angles, qubits, line, col });
                }
            }
        }
        let (register, size) = register.ok_or(QasmError::NoRegister)?;
        Ok(QasmProgram { register, size, ops })
    }
}

pub fn parse_program(text: &str) -> Result<QasmProgram, QasmError> {
    let toks = lex(text)?;
    Parser { src: text, toks, pos: 0 }.program()
}

/// Parses QASM text into a layered grid.
pub fn parse(text: &str) -> Result<CircuitGrid, QasmError> {
    parse_program(text)?.to_grid()
}

fn template_for(token: &str) -> Option<ParamGateTemplate> {
    if token == "U" {
        return Some(U3);
    }
    TEMPLATES.iter().copied().find(|t| t.qasm == token)
}

impl QasmProgram {
    /// Packs the gate list into layers, each gate in the earliest layer where all of its
    /// qubits are free.
    pub fn to_grid(&self) -> Result<CircuitGrid, QasmError> {
        let n = self.size;
        let mut cache: HashMap<String, Arc<GateDef>> = HashMap::new();
        let mut layers: Vec<Vec<Cell>> = Vec::new();
        let mut frontier = vec![0usize; n];
        for op in &self.ops {
            let gate = self.resolve(op, &mut cache)?;
            let arity = gate.arity() as usize;
            if op.qubits.len() != arity {
                return Err(QasmError::OperandCount {
                    line: op.line,
                    col: op.col,
                    gate: op.token.clone(),
                    expected: arity,
                    found: op.qubits.len(),
                });
            }
            if arity == 2 && op.qubits[0] == op.qubits[1] {
                return Err(QasmError::RepeatedOperand { line: op.line, col: op.col, gate: op.token.clone() });
            }
            let layer = op.qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
            if layer == layers.len() {
                layers.push(vec![Cell::identity(); n]);
            }
            match op.qubits.as_slice() {
                [q] => layers[layer][*q] = Cell::Single(gate),
                [a, b] => {
                    layers[layer][*a] = Cell::Half { gate: gate.clone(), role: Role::First, partner: *b };
                    layers[layer][*b] = Cell::Half { gate, role: Role::Second, partner: *a };
                }
                _ => unreachable!("arity is 1 or 2"),
            }
            for &q in &op.qubits {
                frontier[q] = layer + 1;
            }
        }
        Ok(CircuitGrid::new(n, layers)?)
    }

    fn resolve(&self, op: &GateApplication, cache: &mut HashMap<String, Arc<GateDef>>) -> Result<Arc<GateDef>, QasmError> {
        let token = if op.token == "CX" { "cx" } else { op.token.as_str() };
        if let Some(gate) = builtin::by_qasm(token) {
            if !op.angles.is_empty() {
                return Err(QasmError::AngleCount {
                    line: op.line,
                    col: op.col,
                    gate: op.token.clone(),
                    expected: 0,
                    found: op.angles.len(),
                });
            }
            return Ok(gate);
        }
        let template = template_for(token).ok_or_else(|| QasmError::UnsupportedGate {
            line: op.line,
            col: op.col,
            name: op.token.clone(),
        })?;
        let key = format!("{}{:?}", template.name, op.angles);
        if let Some(g) = cache.get(&key) {
            return Ok(g.clone());
        }
        let gate = match template.instantiate(&op.angles) {
            Ok(g) => Arc::new(g),
            Err(GateError::AngleCount { expected, found, .. }) => {
                return Err(QasmError::AngleCount { line: op.line, col: op.col, gate: op.token.clone(), expected, found })
            }
            Err(e) => return Err(QasmError::UnsupportedGate { line: op.line, col: op.col, name: format!("{} ({e})", op.token) }),
        };
        cache.insert(key, gate.clone());
        Ok(gate)
    }
}

/// Renders `c` as QASM with register `q`.
pub fn emit(c: &CircuitGrid) -> Result<String, QasmError> {
    let violations = c.validate();
    if !violations.is_empty() {
        return Err(CircuitError::Invalid(violations).into());
    }
    let mut body = String::new();
    let mut uses_iswap = false;
    for layer in c.layers() {
        for (q, cell) in layer.iter().enumerate() {
            if cell.is_identity() {
                continue;
            }
            let gate = cell.gate();
            let text = gate.qasm().ok_or_else(|| QasmError::NoRendering(gate.name().to_string()))?;
            match cell {
                Cell::Single(_) => body.push_str(&format!("{text} q[{q}];\n")),
                Cell::Half { role: Role::First, partner, .. } => {
                    uses_iswap |= text == "iswap";
                    body.push_str(&format!("{text} q[{q}],q[{partner}];\n"));
                }
                Cell::Half { .. } => {}
            }
        }
    }
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if uses_iswap {
        out.push_str(ISWAP_DEFINITION);
        out.push('\n');
    }
    out.push_str(&format!("qreg q[{}];\n", c.qubits()));
    out.push_str(&body);
    Ok(out)
}
