//! Parser for an OpenQASM-2-style subset extended with bit-level
//! conditions: `if (c[0]==1 && c[2]==0) x q[1];`.
//!
//! Register-level conditions (`if (c==5)`) are accepted and expanded into
//! one bit term per register bit. Whole-register arguments broadcast the
//! way OpenQASM 2 does.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use super::angle::Value;
use super::{Angle, Circuit, CircuitError, Condition, Gate1q, Gate2q, Operation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared register `{name}`")]
    UndeclaredRegister { line: usize, col: usize, name: String },
    #[error("{line}:{col}: index {index} out of range for register `{name}` of size {size}")]
    IndexOutOfRange {
        line: usize,
        col: usize,
        name: String,
        index: usize,
        size: usize,
    },
    #[error("{line}:{col}: unknown gate `{name}`")]
    UnknownGate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: condition reads {name}[{index}] before any measurement writes it")]
    UnwrittenClbit {
        line: usize,
        col: usize,
        name: String,
        index: usize,
    },
    #[error("{line}:{col}: {msg}")]
    Invalid { line: usize, col: usize, msg: String },
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let tokens = lex(text)?;
    Parser::new(tokens).program()
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Real(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "->", "==", "&&", ";", ",", "[", "]", "(", ")", "{", "}", "+", "-", "*", "/", "^",
];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(word), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut is_real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            if i < chars.len() && chars[i] == '.' {
                is_real = true;
                advance(&mut i, &mut line, &mut col, '.');
                while i < chars.len() && chars[i].is_ascii_digit() {
                    { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_real = true;
                    while i < j {
                        { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let tok = if is_real {
                Tok::Real(lit.parse().map_err(|_| ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("bad number `{lit}`"),
                })?)
            } else {
                Tok::Int(lit.parse().expect("digits parse as integer"))
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let start = i;
            while i < chars.len() && chars[i] != '"' {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            if i == chars.len() {
                return Err(ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: "unterminated string".into(),
                });
            }
            let s: String = chars[start..i].iter().collect();
            advance(&mut i, &mut line, &mut col, '"');
            out.push(Token { tok: Tok::Str(s), line: tl, col: tc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                for _ in 0..sym.len() {
                    { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
                }
                out.push(Token { tok: Tok::Sym(sym), line: tl, col: tc });
            }
            None => {
                return Err(ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RegKind {
    Quantum,
    Classical,
}

struct Register {
    name: String,
    kind: RegKind,
    offset: usize,
    size: usize,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    regs: Vec<Register>,
    n_qubits: usize,
    n_clbits: usize,
    written: Vec<bool>,
    ops: Vec<Operation>,
}

/// A resolved register reference: one index or a whole register.
struct Arg {
    indices: Vec<usize>,
    whole: bool,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            pos: 0,
            regs: Vec::new(),
            n_qubits: 0,
            n_clbits: 0,
            written: Vec::new(),
            ops: Vec::new(),
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, tok: &Token, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: tok.line,
            col: tok.col,
            msg: msg.into(),
        })
    }

    fn invalid<T>(&self, tok: &Token, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Invalid {
            line: tok.line,
            col: tok.col,
            msg: msg.into(),
        })
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(s) if *s == sym)
    }

    fn expect_sym(&mut self, sym: &str) -> Result<Token, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Sym(s) if *s == sym => Ok(t),
            other => self.syntax(&t, format!("expected `{sym}`, found {}", describe(other))),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => self.syntax(&t, format!("expected identifier, found {}", describe(other))),
        }
    }

    fn expect_usize(&mut self) -> Result<(usize, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Int(v) => match v.to_usize() {
                Some(u) => Ok((u, t.clone())),
                None => self.invalid(&t, "integer too large"),
            },
            other => self.syntax(&t, format!("expected integer, found {}", describe(other))),
        }
    }

    fn program(mut self) -> Result<Circuit, ParseError> {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "OPENQASM") {
            self.next();
            let t = self.next();
            if !matches!(t.tok, Tok::Int(_) | Tok::Real(_)) {
                return self.syntax(&t, "expected version number");
            }
            self.expect_sym(";")?;
        }
        while self.peek().tok != Tok::Eof {
            self.statement()?;
        }
        let (n_qubits, n_clbits) = (self.n_qubits, self.n_clbits);
        // positional checks already ran above; this only guards against drift
        Circuit::new(n_qubits, n_clbits, self.ops).map_err(|e: CircuitError| ParseError::Invalid {
            line: 0,
            col: 0,
            msg: e.to_string(),
        })
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let (word, tok) = self.expect_ident()?;
        match word.as_str() {
            "include" => {
                let t = self.next();
                if !matches!(t.tok, Tok::Str(_)) {
                    return self.syntax(&t, "expected file name string");
                }
                self.expect_sym(";")?;
                Ok(())
            }
            "qreg" | "creg" => {
                let kind = if word == "qreg" { RegKind::Quantum } else { RegKind::Classical };
                self.declaration(kind)
            }
            "measure" => {
                let ops = self.measure_body(&tok)?;
                self.ops.extend(ops);
                Ok(())
            }
            "if" => self.conditional(&tok),
            "barrier" => {
                let mut qubits = Vec::new();
                loop {
                    let arg = self.arg(RegKind::Quantum)?;
                    qubits.extend(arg.indices);
                    if self.is_sym(",") {
                        self.next();
                    } else {
                        break;
                    }
                }
                self.expect_sym(";")?;
                qubits.sort_unstable();
                qubits.dedup();
                self.ops.push(Operation::barrier(qubits));
                Ok(())
            }
            "gate" | "opaque" => self.invalid(&tok, "custom gate definitions are not supported"),
            _ => {
                let ops = self.gate_body(word, &tok)?;
                self.ops.extend(ops);
                Ok(())
            }
        }
    }

    fn declaration(&mut self, kind: RegKind) -> Result<(), ParseError> {
        let (name, tok) = self.expect_ident()?;
        self.expect_sym("[")?;
        let (size, size_tok) = self.expect_usize()?;
        self.expect_sym("]")?;
        self.expect_sym(";")?;
        if self.regs.iter().any(|r| r.name == name) {
            return self.invalid(&tok, format!("register `{name}` declared twice"));
        }
        if size == 0 {
            return self.invalid(&size_tok, "register size must be positive");
        }
        let offset = match kind {
            RegKind::Quantum => {
                self.n_qubits += size;
                self.n_qubits - size
            }
            RegKind::Classical => {
                self.n_clbits += size;
                self.written.resize(self.n_clbits, false);
                self.n_clbits - size
            }
        };
        self.regs.push(Register { name, kind, offset, size });
        Ok(())
    }

    fn register(&self, name: &str, tok: &Token, kind: RegKind) -> Result<&Register, ParseError> {
        match self.regs.iter().find(|r| r.name == name && r.kind == kind) {
            Some(r) => Ok(r),
            None => Err(ParseError::UndeclaredRegister {
                line: tok.line,
                col: tok.col,
                name: name.to_string(),
            }),
        }
    }

    fn arg(&mut self, kind: RegKind) -> Result<Arg, ParseError> {
        let (name, tok) = self.expect_ident()?;
        let (offset, size) = {
            let r = self.register(&name, &tok, kind)?;
            (r.offset, r.size)
        };
        if self.is_sym("[") {
            self.next();
            let (index, itok) = self.expect_usize()?;
            self.expect_sym("]")?;
            if index >= size {
                return Err(ParseError::IndexOutOfRange {
                    line: itok.line,
                    col: itok.col,
                    name,
                    index,
                    size,
                });
            }
            Ok(Arg {
                indices: vec![offset + index],
                whole: false,
            })
        } else {
            Ok(Arg {
                indices: (offset..offset + size).collect(),
                whole: true,
            })
        }
    }

    fn measure_body(&mut self, tok: &Token) -> Result<Vec<Operation>, ParseError> {
        let q = self.arg(RegKind::Quantum)?;
        self.expect_sym("->")?;
        let c = self.arg(RegKind::Classical)?;
        self.expect_sym(";")?;
        if q.indices.len() != c.indices.len() || q.whole != c.whole {
            return self.invalid(tok, "measure operands have different sizes");
        }
        let ops: Vec<Operation> = q
            .indices
            .iter()
            .zip(&c.indices)
            .map(|(&qi, &ci)| Operation::measure(qi, ci))
            .collect();
        for &ci in &c.indices {
            self.written[ci] = true;
        }
        Ok(ops)
    }

    fn conditional(&mut self, if_tok: &Token) -> Result<(), ParseError> {
        self.expect_sym("(")?;
        let mut terms = Vec::new();
        loop {
            let (name, tok) = self.expect_ident()?;
            let (offset, size) = {
                let r = self.register(&name, &tok, RegKind::Classical)?;
                (r.offset, r.size)
            };
            let index = if self.is_sym("[") {
                self.next();
                let (index, itok) = self.expect_usize()?;
                self.expect_sym("]")?;
                if index >= size {
                    return Err(ParseError::IndexOutOfRange {
                        line: itok.line,
                        col: itok.col,
                        name,
                        index,
                        size,
                    });
                }
                Some(index)
            } else {
                None
            };
            self.expect_sym("==")?;
            let vt = self.next();
            let Tok::Int(value) = &vt.tok else {
                return self.syntax(&vt, "expected integer in condition");
            };
            let bits: Vec<(usize, bool)> = match index {
                Some(i) => {
                    if *value > BigInt::from(1) {
                        return self.invalid(&vt, "bit condition value must be 0 or 1");
                    }
                    vec![(i, *value == BigInt::from(1))]
                }
                None => {
                    if value.bits() > size as u64 {
                        return self.invalid(&vt, format!("value does not fit register `{name}`"));
                    }
                    (0..size).map(|i| (i, value.bit(i as u64))).collect()
                }
            };
            for (i, v) in bits {
                if !self.written[offset + i] {
                    return Err(ParseError::UnwrittenClbit {
                        line: tok.line,
                        col: tok.col,
                        name: name.clone(),
                        index: i,
                    });
                }
                terms.push((offset + i, v));
            }
            if self.is_sym("&&") {
                self.next();
            } else {
                break;
            }
        }
        self.expect_sym(")")?;
        let condition = match Condition::all(terms) {
            Some(c) => c,
            None => return self.invalid(if_tok, "contradictory condition"),
        };
        let (word, tok) = self.expect_ident()?;
        let ops = match word.as_str() {
            "measure" | "barrier" | "if" | "qreg" | "creg" => {
                return self.invalid(&tok, format!("`{word}` cannot be conditioned"))
            }
            _ => self.gate_body(word, &tok)?,
        };
        self.ops
            .extend(ops.into_iter().map(|op| op.with_condition(condition.clone())));
        Ok(())
    }

    fn gate_body(&mut self, name: String, tok: &Token) -> Result<Vec<Operation>, ParseError> {
        let mut params = Vec::new();
        if self.is_sym("(") {
            self.next();
            if !self.is_sym(")") {
                loop {
                    params.push(self.expr()?.into_angle());
                    if self.is_sym(",") {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
        }
        let mut args = Vec::new();
        loop {
            args.push(self.arg(RegKind::Quantum)?);
            if self.is_sym(",") {
                self.next();
            } else {
                break;
            }
        }
        self.expect_sym(";")?;

        enum Shape {
            One(fn(Vec<Angle>) -> Gate1q),
            Two(Gate2q),
        }
        let (shape, n_params) = match name.as_str() {
            "h" => (Shape::One(|_| Gate1q::H), 0),
            "x" => (Shape::One(|_| Gate1q::X), 0),
            "y" => (Shape::One(|_| Gate1q::Y), 0),
            "z" => (Shape::One(|_| Gate1q::Z), 0),
            "s" => (Shape::One(|_| Gate1q::S), 0),
            "sdg" => (Shape::One(|_| Gate1q::Sdg), 0),
            "t" => (Shape::One(|_| Gate1q::T), 0),
            "tdg" => (Shape::One(|_| Gate1q::Tdg), 0),
            "u1" => (Shape::One(|mut p| Gate1q::U1(p.remove(0))), 1),
            "rz" => (Shape::One(|mut p| Gate1q::Rz(p.remove(0))), 1),
            "cx" | "CX" => (Shape::Two(Gate2q::Cx), 0),
            "cz" => (Shape::Two(Gate2q::Cz), 0),
            "swap" => (Shape::Two(Gate2q::Swap), 0),
            "reset" => {
                if !params.is_empty() || args.len() != 1 {
                    return self.invalid(tok, "reset takes one qubit argument");
                }
                return Ok(args.remove(0).indices.into_iter().map(Operation::reset).collect());
            }
            _ => {
                return Err(ParseError::UnknownGate {
                    line: tok.line,
                    col: tok.col,
                    name,
                })
            }
        };
        if params.len() != n_params {
            return self.invalid(
                tok,
                format!("`{name}` takes {n_params} parameter(s), got {}", params.len()),
            );
        }
        let arity = match shape {
            Shape::One(_) => 1,
            Shape::Two(_) => 2,
        };
        if args.len() != arity {
            return self.invalid(tok, format!("`{name}` takes {arity} qubit argument(s)"));
        }
        let width = args.iter().map(|a| a.indices.len()).max().unwrap_or(1);
        if args.iter().any(|a| a.indices.len() != 1 && a.indices.len() != width) {
            return self.invalid(tok, "register arguments have different sizes");
        }
        let pick = |a: &Arg, i: usize| if a.indices.len() == 1 { a.indices[0] } else { a.indices[i] };
        let mut ops = Vec::with_capacity(width);
        for i in 0..width {
            let op = match &shape {
                Shape::One(make) => Operation::gate1(make(params.clone()), pick(&args[0], i)),
                Shape::Two(g) => {
                    let (a, b) = (pick(&args[0], i), pick(&args[1], i));
                    if a == b {
                        return self.invalid(tok, format!("`{name}` applied to the same qubit twice"));
                    }
                    Operation::gate2(*g, a, b)
                }
            };
            ops.push(op);
        }
        Ok(ops)
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Value, ParseError> {
        let mut v = self.term()?;
        loop {
            if self.is_sym("+") {
                self.next();
                v = v.add(self.term()?);
            } else if self.is_sym("-") {
                self.next();
                v = v.add(self.term()?.neg());
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<Value, ParseError> {
        let mut v = self.unary()?;
        loop {
            if self.is_sym("*") {
                self.next();
                v = v.mul(self.unary()?);
            } else if self.is_sym("/") {
                let t = self.next();
                let rhs = self.unary()?;
                v = match v.div(rhs) {
                    Ok(v) => v,
                    Err(msg) => return self.invalid(&t, msg),
                };
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<Value, ParseError> {
        if self.is_sym("-") {
            self.next();
            return Ok(self.unary()?.neg());
        }
        if self.is_sym("+") {
            self.next();
            return self.unary();
        }
        let base = self.atom()?;
        if self.is_sym("^") {
            let t = self.next();
            let exp = self.unary()?;
            return match base.pow(exp) {
                Ok(v) => Ok(v),
                Err(msg) => self.invalid(&t, msg),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Value, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Int(v) => Ok(Value::integer(v.clone())),
            Tok::Real(v) => Ok(Value::Float(*v)),
            Tok::Ident(s) if s == "pi" => Ok(Value::pi()),
            Tok::Sym("(") => {
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            other => self.syntax(&t, format!("expected expression, found {}", describe(other))),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Real(v) => format!("`{v}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}
