//! OpenQASM 2.0 reader and writer for pre-synthesized circuits.
//!
//! Only gate applications from the standard library are accepted. Registers
//! are flattened into one index space in declaration order; `barrier` and
//! `measure` are parsed and dropped.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::circuit::{Circuit, CircuitError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("missing or unsupported OPENQASM version header")]
    Version,
    #[error("gate `{name}` acts on {arity} qubits; run logic synthesis down to 1- and 2-qubit gates first")]
    Arity { name: String, arity: usize },
    #[error("gate `{name}` expects {expected} qubit arguments, got {got}")]
    ArgumentCount {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("reference to undeclared register `{0}`")]
    UndeclaredRegister(String),
    #[error("index {index} out of range for register `{register}` of size {size}")]
    IndexOutOfRange {
        register: String,
        index: usize,
        size: usize,
    },
    #[error("register `{0}` declared twice")]
    DuplicateRegister(String),
    #[error("unsupported statement `{0}`")]
    Unsupported(String),
    #[error("register arguments of `{0}` have different sizes")]
    BroadcastMismatch(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Qubit count of every gate name the reader knows.
fn gate_arity(name: &str) -> Option<usize> {
    Some(match name {
        "id" | "u0" | "u1" | "u2" | "u3" | "u" | "U" | "p" | "x" | "y" | "z" | "h" | "s"
        | "sdg" | "t" | "tdg" | "rx" | "ry" | "rz" | "sx" | "sxdg" => 1,
        "cx" | "CX" | "cy" | "cz" | "ch" | "crx" | "cry" | "crz" | "cu1" | "cp" | "cu3" | "cu"
        | "swap" | "rxx" | "rzz" | "csx" => 2,
        "ccx" | "cswap" | "rccx" => 3,
        "rc3x" | "c3x" | "c3sqrtx" => 4,
        "c4x" => 5,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number,
    Str,
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    while i < bytes.len() {
        let c = bytes[i];
        let col = i - line_start + 1;
        let at = line;
        let err = |msg: String| ParseError {
            line: at,
            col,
            kind: ParseErrorKind::Syntax(msg),
        };
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                line_start = i;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                i += 2;
                while i < bytes.len() && !(bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/')) {
                    if bytes[i] == b'\n' {
                        line += 1;
                        line_start = i + 1;
                    }
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(err("unterminated block comment".to_string()));
                }
                i += 2;
            }
            b'"' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                    i += 1;
                }
                if bytes.get(i) != Some(&b'"') {
                    return Err(err("unterminated string".to_string()));
                }
                i += 1;
                out.push(Token {
                    tok: Tok::Str,
                    start,
                    end: i,
                    line,
                    col,
                });
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push(Token {
                    tok: Tok::Arrow,
                    start: i,
                    end: i + 2,
                    line,
                    col,
                });
                i += 2;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[start..i].to_string()),
                    start,
                    end: i,
                    line,
                    col,
                });
            }
            c if c.is_ascii_digit() || c == b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                out.push(Token {
                    tok: Tok::Number,
                    start,
                    end: i,
                    line,
                    col,
                });
            }
            b';' | b',' | b'(' | b')' | b'[' | b']' | b'{' | b'}' | b'+' | b'-' | b'*' | b'/'
            | b'^' | b'=' | b'>' | b'<' => {
                out.push(Token {
                    tok: Tok::Sym(c as char),
                    start: i,
                    end: i + 1,
                    line,
                    col,
                });
                i += 1;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err(format!("unexpected character `{ch}`")));
            }
        }
    }
    Ok(out)
}

struct Register {
    name: String,
    offset: usize,
    size: usize,
}

enum Arg {
    Single(usize),
    Whole(usize, usize),
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    qregs: Vec<Register>,
    cregs: Vec<Register>,
    width: usize,
}

impl<'a> Parser<'a> {
    fn error_at(&self, idx: usize, kind: ParseErrorKind) -> ParseError {
        let (line, col) = match self.toks.get(idx).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        };
        ParseError { line, col, kind }
    }

    fn syntax(&self, msg: &str) -> ParseError {
        self.error_at(self.pos, ParseErrorKind::Syntax(msg.to_string()))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.syntax(&format!("expected `{c}`"))),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.syntax("expected identifier")),
        }
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        match self.peek() {
            Some(Tok::Number) => {
                let t = &self.toks[self.pos];
                let text = &self.src[t.start..t.end];
                let v = text
                    .parse::<usize>()
                    .map_err(|_| self.syntax("expected non-negative integer"))?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.syntax("expected integer")),
        }
    }

    fn header(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "OPENQASM" => self.pos += 1,
            _ => return Err(self.error_at(self.pos, ParseErrorKind::Version)),
        }
        let ok = match self.toks.get(self.pos) {
            Some(t) if t.tok == Tok::Number => {
                let v = &self.src[t.start..t.end];
                v == "2.0" || v == "2"
            }
            _ => false,
        };
        if !ok {
            return Err(self.error_at(self.pos, ParseErrorKind::Version));
        }
        self.pos += 1;
        self.expect_sym(';')
    }

    fn register_decl(&mut self, quantum: bool) -> Result<(), ParseError> {
        let at = self.pos;
        let name = self.ident()?;
        self.expect_sym('[')?;
        let size = self.integer()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        if self.qregs.iter().chain(&self.cregs).any(|r| r.name == name) {
            return Err(self.error_at(at, ParseErrorKind::DuplicateRegister(name)));
        }
        if quantum {
            self.qregs.push(Register {
                name,
                offset: self.width,
                size,
            });
            self.width += size;
        } else {
            self.cregs.push(Register {
                name,
                offset: 0,
                size,
            });
        }
        Ok(())
    }

    /// Raw text of each comma-separated expression inside `( ... )`.
    fn params(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect_sym('(')?;
        let mut out = Vec::new();
        let mut depth = 0usize;
        let mut seg_start: Option<usize> = None;
        let mut seg_end = 0usize;
        loop {
            let Some(t) = self.toks.get(self.pos).cloned() else {
                return Err(self.syntax("unterminated parameter list"));
            };
            self.pos += 1;
            match t.tok {
                Tok::Sym('(') => depth += 1,
                Tok::Sym(')') if depth == 0 => {
                    match seg_start {
                        Some(s) => out.push(self.src[s..seg_end].trim().to_string()),
                        None if !out.is_empty() => {
                            return Err(self.error_at(self.pos - 1, ParseErrorKind::Syntax(
                                "empty parameter".to_string(),
                            )))
                        }
                        None => {}
                    }
                    return Ok(out);
                }
                Tok::Sym(')') => depth -= 1,
                Tok::Sym(',') if depth == 0 => {
                    let Some(s) = seg_start.take() else {
                        return Err(self.error_at(
                            self.pos - 1,
                            ParseErrorKind::Syntax("empty parameter".to_string()),
                        ));
                    };
                    out.push(self.src[s..seg_end].trim().to_string());
                    continue;
                }
                Tok::Sym(';') => return Err(self.syntax("unterminated parameter list")),
                _ => {}
            }
            if seg_start.is_none() {
                seg_start = Some(t.start);
            }
            seg_end = t.end;
        }
    }

    fn qubit_arg(&mut self) -> Result<Arg, ParseError> {
        let at = self.pos;
        let name = self.ident()?;
        let Some(reg) = self.qregs.iter().position(|r| r.name == name) else {
            return Err(self.error_at(at, ParseErrorKind::UndeclaredRegister(name)));
        };
        let (offset, size) = (self.qregs[reg].offset, self.qregs[reg].size);
        if self.peek() == Some(&Tok::Sym('[')) {
            self.pos += 1;
            let idx_at = self.pos;
            let index = self.integer()?;
            self.expect_sym(']')?;
            if index >= size {
                return Err(self.error_at(
                    idx_at,
                    ParseErrorKind::IndexOutOfRange {
                        register: name,
                        index,
                        size,
                    },
                ));
            }
            Ok(Arg::Single(offset + index))
        } else {
            Ok(Arg::Whole(offset, size))
        }
    }

    fn classical_arg(&mut self) -> Result<(), ParseError> {
        let at = self.pos;
        let name = self.ident()?;
        let Some(reg) = self.cregs.iter().find(|r| r.name == name) else {
            return Err(self.error_at(at, ParseErrorKind::UndeclaredRegister(name)));
        };
        let size = reg.size;
        if self.peek() == Some(&Tok::Sym('[')) {
            self.pos += 1;
            let idx_at = self.pos;
            let index = self.integer()?;
            self.expect_sym(']')?;
            if index >= size {
                return Err(self.error_at(
                    idx_at,
                    ParseErrorKind::IndexOutOfRange {
                        register: name,
                        index,
                        size,
                    },
                ));
            }
        }
        Ok(())
    }

    fn qubit_args(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut args = alloc::vec![self.qubit_arg()?];
        while self.peek() == Some(&Tok::Sym(',')) {
            self.pos += 1;
            args.push(self.qubit_arg()?);
        }
        Ok(args)
    }

    fn parse(mut self) -> Result<Circuit, ParseError> {
        self.header()?;
        let mut pending: Vec<(usize, String, Vec<usize>, Vec<String>)> = Vec::new();
        while let Some(tok) = self.peek().cloned() {
            let at = self.pos;
            let Tok::Ident(word) = tok else {
                return Err(self.syntax("expected statement"));
            };
            self.pos += 1;
            match word.as_str() {
                "include" => {
                    match self.peek() {
                        Some(Tok::Str) => self.pos += 1,
                        _ => return Err(self.syntax("expected file name string")),
                    }
                    self.expect_sym(';')?;
                }
                "qreg" => self.register_decl(true)?,
                "creg" => self.register_decl(false)?,
                "barrier" => {
                    self.qubit_args()?;
                    self.expect_sym(';')?;
                }
                "measure" => {
                    self.qubit_arg()?;
                    match self.peek() {
                        Some(Tok::Arrow) => self.pos += 1,
                        _ => return Err(self.syntax("expected `->`")),
                    }
                    self.classical_arg()?;
                    self.expect_sym(';')?;
                }
                "gate" | "opaque" | "if" | "reset" => {
                    return Err(self.error_at(at, ParseErrorKind::Unsupported(word)));
                }
                "OPENQASM" => return Err(self.syntax("duplicate OPENQASM header")),
                name => {
                    let Some(arity) = gate_arity(name) else {
                        return Err(self.error_at(at, ParseErrorKind::UnknownGate(word)));
                    };
                    let params = if self.peek() == Some(&Tok::Sym('(')) {
                        self.params()?
                    } else {
                        Vec::new()
                    };
                    let args = self.qubit_args()?;
                    self.expect_sym(';')?;
                    if arity > 2 {
                        return Err(self.error_at(
                            at,
                            ParseErrorKind::Arity {
                                name: word,
                                arity,
                            },
                        ));
                    }
                    if args.len() != arity {
                        return Err(self.error_at(
                            at,
                            ParseErrorKind::ArgumentCount {
                                name: word,
                                expected: arity,
                                got: args.len(),
                            },
                        ));
                    }
                    for qubits in broadcast(&args).map_err(|()| {
                        self.error_at(at, ParseErrorKind::BroadcastMismatch(word.clone()))
                    })? {
                        pending.push((at, word.clone(), qubits, params.clone()));
                    }
                }
            }
        }
        let mut circuit = Circuit::new(self.width);
        for (at, name, qubits, params) in pending {
            circuit
                .push(name, &qubits, params)
                .map_err(|e| self.error_at(at, e.into()))?;
        }
        Ok(circuit)
    }
}

/// Expands whole-register arguments into one gate per index.
fn broadcast(args: &[Arg]) -> Result<Vec<Vec<usize>>, ()> {
    let mut len: Option<usize> = None;
    for a in args {
        if let Arg::Whole(_, size) = a {
            match len {
                Some(l) if l != *size => return Err(()),
                _ => len = Some(*size),
            }
        }
    }
    let n = len.unwrap_or(1);
    Ok((0..n)
        .map(|i| {
            args.iter()
                .map(|a| match a {
                    Arg::Single(q) => *q,
                    Arg::Whole(offset, _) => offset + i,
                })
                .collect()
        })
        .collect())
}

pub fn parse_qasm(text: &str) -> Result<Circuit, ParseError> {
    let toks = lex(text)?;
    Parser {
        src: text,
        toks,
        pos: 0,
        qregs: Vec::new(),
        cregs: Vec::new(),
        width: 0,
    }
    .parse()
}

/// Writes `c` with all qubits in a single register `q`.
pub fn emit_qasm(c: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if c.num_qubits() > 0 {
        let _ = writeln!(out, "qreg q[{}];", c.num_qubits());
    }
    for g in c.gates() {
        out.push_str(&g.name);
        if !g.params.is_empty() {
            out.push('(');
            out.push_str(&g.params.join(","));
            out.push(')');
        }
        for (i, q) in g.qubits.iter().enumerate() {
            out.push_str(if i == 0 { " " } else { "," });
            let _ = write!(out, "q[{q}]");
        }
        out.push_str(";\n");
    }
    out
}
