//! Reading solver responses: `check-sat` verdicts and `get-value` tables.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Bits { value: u64, width: u32 },
}

impl Value {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Bits { .. } => None,
        }
    }

    pub fn as_u64(self) -> Option<u64> {
        match self {
            Value::Bits { value, .. } => Some(value),
            Value::Bool(_) => None,
        }
    }
}

pub type ValueTable = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Sat(ValueTable),
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("solver produced no output")]
    Empty,
    #[error("solver reported an error: {0}")]
    Solver(String),
    #[error("unparsable solver output: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> Result<Vec<Sexp>, ModelError> {
    let mut stack: Vec<Vec<Sexp>> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.char_indices().peekable();
    let malformed = |m: &str| ModelError::Malformed(m.to_string());
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                stack.push(Vec::new());
            }
            ')' => {
                chars.next();
                let done = stack.pop().ok_or_else(|| malformed("unbalanced `)`"))?;
                match stack.last_mut() {
                    Some(parent) => parent.push(Sexp::List(done)),
                    None => top.push(Sexp::List(done)),
                }
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            ';' => {
                for (_, c) in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' | '|' => {
                let close = c;
                chars.next();
                let start = i + 1;
                let mut end = None;
                while let Some((j, d)) = chars.next() {
                    if d == close {
                        // "" escapes a quote inside strings
                        if close == '"' && chars.peek().map(|p| p.1) == Some('"') {
                            chars.next();
                            continue;
                        }
                        end = Some(j);
                        break;
                    }
                }
                let end = end.ok_or_else(|| malformed("unterminated literal"))?;
                let atom = Sexp::Atom(text[start..end].to_string());
                match stack.last_mut() {
                    Some(parent) => parent.push(atom),
                    None => top.push(atom),
                }
            }
            _ => {
                let start = i;
                let mut end = text.len();
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' {
                        end = j;
                        break;
                    }
                    chars.next();
                }
                let atom = Sexp::Atom(text[start..end].to_string());
                match stack.last_mut() {
                    Some(parent) => parent.push(atom),
                    None => top.push(atom),
                }
            }
        }
    }
    if !stack.is_empty() {
        return Err(malformed("unbalanced `(`"));
    }
    Ok(top)
}

fn parse_value(v: &Sexp) -> Option<Value> {
    match v {
        Sexp::Atom(a) => {
            if a == "true" {
                Some(Value::Bool(true))
            } else if a == "false" {
                Some(Value::Bool(false))
            } else if let Some(bits) = a.strip_prefix("#b") {
                Some(Value::Bits {
                    value: u64::from_str_radix(bits, 2).ok()?,
                    width: bits.len() as u32,
                })
            } else if let Some(hex) = a.strip_prefix("#x") {
                Some(Value::Bits {
                    value: u64::from_str_radix(hex, 16).ok()?,
                    width: 4 * hex.len() as u32,
                })
            } else {
                None
            }
        }
        // (_ bvN w)
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(u), Sexp::Atom(n), Sexp::Atom(w)] if u == "_" => Some(Value::Bits {
                value: n.strip_prefix("bv")?.parse().ok()?,
                width: w.parse().ok()?,
            }),
            _ => None,
        },
    }
}

fn error_message(s: &Sexp) -> Option<String> {
    match s {
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(e), Sexp::Atom(msg)] if e == "error" => Some(msg.clone()),
            _ => None,
        },
        _ => None,
    }
}

/// Parses the full standard output of one script run. Anything after an
/// `unsat` verdict (such as a refused `get-value`) is ignored.
pub fn parse_response(text: &str) -> Result<Response, ModelError> {
    let items = parse_sexps(text)?;
    let mut it = items.into_iter();
    let verdict = loop {
        match it.next() {
            None => return Err(ModelError::Empty),
            Some(Sexp::Atom(a)) if a == "success" => continue,
            Some(s) => {
                if let Some(msg) = error_message(&s) {
                    return Err(ModelError::Solver(msg));
                }
                break s;
            }
        }
    };
    match verdict {
        Sexp::Atom(a) if a == "unsat" => Ok(Response::Unsat),
        Sexp::Atom(a) if a == "unknown" => Ok(Response::Unknown),
        Sexp::Atom(a) if a == "sat" => {
            let mut table = ValueTable::new();
            for s in it {
                if let Some(msg) = error_message(&s) {
                    return Err(ModelError::Solver(msg));
                }
                let Sexp::List(pairs) = s else {
                    return Err(ModelError::Malformed("expected get-value list".into()));
                };
                for p in pairs {
                    let Sexp::List(kv) = p else {
                        return Err(ModelError::Malformed("expected (name value)".into()));
                    };
                    let [Sexp::Atom(name), v] = <[Sexp; 2]>::try_from(kv).map_err(|_| {
                        ModelError::Malformed("expected (name value)".into())
                    })?
                    else {
                        return Err(ModelError::Malformed("non-symbol variable name".into()));
                    };
                    let value = parse_value(&v).ok_or_else(|| {
                        ModelError::Malformed(alloc::format!("bad value for {name}"))
                    })?;
                    table.insert(name, value);
                }
            }
            Ok(Response::Sat(table))
        }
        other => Err(ModelError::Malformed(alloc::format!(
            "unexpected verdict {:?}",
            Box::new(other)
        ))),
    }
}
