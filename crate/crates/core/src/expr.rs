//! One-variable real expressions for the kernel factors.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?          // right-associative
//! primary := number | "t" | func "(" sum ")" | "(" sum ")"
//! func    := exp | ln | sqrt | sin | cos | abs
//! ```

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("function `{name}` at position {pos} takes exactly one argument, got {got}")]
    Arity { name: String, pos: usize, got: usize },
    #[error("domain error in `{subexpr}` at t = {t}")]
    Domain { subexpr: String, t: f64 },
    #[error("evaluation point t = {0} lies outside [0, 1]")]
    OutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> Option<f64> {
        let r = match self {
            Func::Exp => v.exp(),
            Func::Ln if v <= 0.0 => return None,
            Func::Ln => v.ln(),
            Func::Sqrt if v < 0.0 => return None,
            Func::Sqrt => v.sqrt(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Abs => v.abs(),
        };
        Some(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, t: f64) -> Result<f64, ExprError> {
        let v = match self {
            Node::Num(v) => *v,
            Node::Var => t,
            Node::Neg(inner) => -inner.eval(t)?,
            Node::Bin(op, lhs, rhs) => {
                let l = lhs.eval(t)?;
                let r = rhs.eval(t)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => {
                        if l < 0.0 && r.fract() != 0.0 {
                            return Err(self.domain(t));
                        }
                        if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
                            l.powi(r as i32)
                        } else {
                            l.powf(r)
                        }
                    }
                }
            }
            Node::Call(f, arg) => f.apply(arg.eval(t)?).ok_or_else(|| self.domain(t))?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.domain(t))
        }
    }

    fn domain(&self, t: f64) -> ExprError {
        ExprError::Domain {
            subexpr: self.to_string(),
            t,
        }
    }
}

/// Fully parenthesized, so that printing and re-parsing preserves the tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var => f.write_str("t"),
            Node::Neg(inner) => write!(f, "(-{inner})"),
            Node::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Node::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// A parsed expression in the single variable `t`.
///
/// Immutable after parsing, so it can be shared freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    ast: Node,
    source: String,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        parse_expr(source)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Node {
        &self.ast
    }

    /// Evaluates at `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64, ExprError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(ExprError::OutOfRange(t));
        }
        self.ast.eval(t)
    }

    pub fn check_cone(&self, grid_size: usize) -> Result<PositivityReport, ExprError> {
        check_cone(self, grid_size)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

impl std::str::FromStr for Expression {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

pub fn parse_expr(source: &str) -> Result<Expression, ExprError> {
    let tokens = tokenize(source)?;
    if tokens.len() == 1 {
        return Err(ExprError::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let mut parser = Parser { tokens, idx: 0 };
    let ast = parser.sum()?;
    let tok = parser.peek();
    if tok.kind != Tok::End {
        return Err(ExprError::Syntax {
            pos: tok.pos,
            msg: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(Expression {
        ast,
        source: source.to_string(),
    })
}

pub fn eval(e: &Expression, t: f64) -> Result<f64, ExprError> {
    e.eval(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeVerdict {
    Member,
    NonMember,
    /// Minimum is negative but within rounding noise of zero.
    IndeterminateNearZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub min_value: f64,
    pub argmin: f64,
    pub max_value: f64,
    pub nontrivial: bool,
    pub grid_size: usize,
}

impl PositivityReport {
    pub fn verdict(&self) -> ConeVerdict {
        let noise = 1e-12 * self.max_value.abs().max(1.0);
        if !self.nontrivial || self.min_value < -noise {
            ConeVerdict::NonMember
        } else if self.min_value < 0.0 {
            ConeVerdict::IndeterminateNearZero
        } else {
            ConeVerdict::Member
        }
    }

    pub fn is_member(&self) -> bool {
        self.verdict() == ConeVerdict::Member
    }
}

/// Samples `e` on the uniform grid `j / (grid_size - 1)`.
pub fn check_cone(e: &Expression, grid_size: usize) -> Result<PositivityReport, ExprError> {
    if grid_size < 2 {
        return Err(ExprError::Syntax {
            pos: 0,
            msg: format!("cone check needs at least 2 grid points, got {grid_size}"),
        });
    }
    let mut min_value = f64::INFINITY;
    let mut max_value = f64::NEG_INFINITY;
    let mut argmin = 0.0;
    for j in 0..grid_size {
        let t = j as f64 / (grid_size - 1) as f64;
        let v = e.eval(t)?;
        if v < min_value {
            min_value = v;
            argmin = t;
        }
        max_value = max_value.max(v);
    }
    Ok(PositivityReport {
        min_value,
        argmin,
        max_value,
        nontrivial: max_value > 0.0,
        grid_size,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("operator `{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // optional exponent, only if digits follow
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                out.push(Token {
                    kind: Tok::Num(v),
                    pos: start,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Tok::Ident(src[start..i].to_string()),
                    pos: start,
                });
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                i += 1;
                out.push(Token {
                    kind: Tok::Op(c as char),
                    pos: start,
                });
            }
            b'(' | b')' | b',' => {
                i += 1;
                let kind = match c {
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    _ => Tok::Comma,
                };
                out.push(Token { kind, pos: start });
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    out.push(Token {
        kind: Tok::End,
        pos: src.len(),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.idx]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.idx].clone();
        if tok.kind != Tok::End {
            self.idx += 1;
        }
        tok
    }

    fn expect(&mut self, want: Tok) -> Result<(), ExprError> {
        let tok = self.bump();
        if tok.kind == want {
            Ok(())
        } else {
            Err(ExprError::Syntax {
                pos: tok.pos,
                msg: format!("expected {}, found {}", want.describe(), tok.kind.describe()),
            })
        }
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.product()?;
        while let Tok::Op(c @ ('+' | '-')) = self.peek().kind {
            self.bump();
            let rhs = self.product()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.peek().kind {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.peek().kind == Tok::Op('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.peek().kind == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let tok = self.bump();
        match tok.kind {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "t" => Ok(Node::Var),
            Tok::Ident(name) => {
                let func = Func::from_name(&name).ok_or_else(|| ExprError::UnknownIdentifier {
                    name: name.clone(),
                    pos: tok.pos,
                })?;
                self.call(func, name, tok.pos)
            }
            other => Err(ExprError::Syntax {
                pos: tok.pos,
                msg: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn call(&mut self, func: Func, name: String, pos: usize) -> Result<Node, ExprError> {
        self.expect(Tok::LParen)?;
        if self.peek().kind == Tok::RParen {
            return Err(ExprError::Arity { name, pos, got: 0 });
        }
        let arg = self.sum()?;
        let mut extra = 0;
        while self.peek().kind == Tok::Comma {
            self.bump();
            self.sum()?;
            extra += 1;
        }
        if extra > 0 {
            return Err(ExprError::Arity {
                name,
                pos,
                got: 1 + extra,
            });
        }
        self.expect(Tok::RParen)?;
        Ok(Node::Call(func, Box::new(arg)))
    }
}
