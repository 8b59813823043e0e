//! Chart-function expression language.
//!
//! Grammar: `+ - * /`, unary minus, `^` with integer exponents
//! (right-associative), the functions `sin cos exp ln sqrt`, decimal
//! literals, and exactly four chart variables. Whitespace is
//! insignificant. Precedence from loosest to tightest: `+ -`, `* /`,
//! unary minus, `^`.
//!
//! Evaluation is generic over [`Analytic`] scalars: plain floats give
//! values, [`Dual`] numbers give directional derivatives, and nested
//! duals give exact second derivatives — [`Expression::eval_jet2`] runs
//! one nested-dual pass per coordinate pair (ten passes) to fill a
//! symmetric Hessian. [`Expression::derivative`] is an exact symbolic
//! partial derivative, which keeps coefficients of derived differential
//! forms evaluable to any jet depth.

use crate::error::{Error, Result};
use crate::jet::{dual2_seed, hidx, Jet};
use crate::scalar::Analytic;
use std::fmt;
use std::sync::Arc;

/// A chart's four variable names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarSet {
    pub names: [&'static str; 4],
}

/// Walker-chart variables.
pub const WALKER_VARS: VarSet = VarSet {
    names: ["x", "y", "z", "t"],
};

/// Real and imaginary parts of two complex chart coordinates
/// `z1 = x1 + i y1`, `z2 = x2 + i y2`.
pub const COMPLEX_VARS: VarSet = VarSet {
    names: ["x1", "y1", "x2", "y2"],
};

impl VarSet {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|&n| n == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(f64),
    Var(usize),
    Add(Arc<Ast>, Arc<Ast>),
    Sub(Arc<Ast>, Arc<Ast>),
    Mul(Arc<Ast>, Arc<Ast>),
    Div(Arc<Ast>, Arc<Ast>),
    Neg(Arc<Ast>),
    Pow(Arc<Ast>, i32),
    Fun(Func, Arc<Ast>),
}

/// A parsed chart function, tied to the variable set it was parsed
/// against.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    pub ast: Arc<Ast>,
    pub vars: VarSet,
}

// ---------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => Tok::Comma,
                };
                toks.push((tok, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i == start + 1 && bytes[start] == b'.' {
                    return Err(Error::Syntax {
                        offset: start,
                        message: "number has no digits".into(),
                    });
                }
                // Exponent part only when digits actually follow.
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
                let value: f64 = text[start..i].parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{}`", &text[start..i]),
                })?;
                toks.push((Tok::Num(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                return Err(Error::Syntax {
                    offset: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------

const MAX_DEPTH: usize = 400;

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    vars: VarSet,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, o)| o)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self, depth: usize) -> Result<Arc<Ast>> {
        if depth > MAX_DEPTH {
            return Err(Error::Syntax {
                offset: self.offset(),
                message: "expression too deeply nested".into(),
            });
        }
        let mut lhs = self.term(depth + 1)?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term(depth + 1)?;
                    lhs = Arc::new(Ast::Add(lhs, rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term(depth + 1)?;
                    lhs = Arc::new(Ast::Sub(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self, depth: usize) -> Result<Arc<Ast>> {
        let mut lhs = self.unary(depth)?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary(depth)?;
                    lhs = Arc::new(Ast::Mul(lhs, rhs));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary(depth)?;
                    lhs = Arc::new(Ast::Div(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self, depth: usize) -> Result<Arc<Ast>> {
        if depth > MAX_DEPTH {
            return Err(Error::Syntax {
                offset: self.offset(),
                message: "expression too deeply nested".into(),
            });
        }
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            let inner = self.unary(depth + 1)?;
            return Ok(Arc::new(Ast::Neg(inner)));
        }
        self.power(depth + 1)
    }

    fn power(&mut self, depth: usize) -> Result<Arc<Ast>> {
        let base = self.atom(depth)?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let n = self.exponent()?;
            return Ok(Arc::new(Ast::Pow(base, n)));
        }
        Ok(base)
    }

    /// Integer exponent; chains fold right-associatively, so `x^2^3` is
    /// `x^(2^3)`.
    fn exponent(&mut self) -> Result<i32> {
        let offset = self.offset();
        let neg = if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            true
        } else {
            false
        };
        let n = match self.bump() {
            Some(Tok::Num(v)) => {
                if v.fract() != 0.0 || !v.is_finite() || v.abs() > i32::MAX as f64 {
                    return Err(Error::NonIntegerExponent { offset });
                }
                *v as i64
            }
            _ => return Err(Error::NonIntegerExponent { offset }),
        };
        let n = if neg { -n } else { n };
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let rhs = self.exponent()?;
            if rhs < 0 || rhs > 32 {
                return Err(Error::Syntax {
                    offset,
                    message: "exponent chain out of range".into(),
                });
            }
            let folded = n.checked_pow(rhs as u32).ok_or(Error::Syntax {
                offset,
                message: "exponent chain overflows".into(),
            })?;
            if folded.abs() > i32::MAX as i64 {
                return Err(Error::Syntax {
                    offset,
                    message: "exponent chain overflows".into(),
                });
            }
            return Ok(folded as i32);
        }
        if n.abs() > i32::MAX as i64 {
            return Err(Error::NonIntegerExponent { offset });
        }
        Ok(n as i32)
    }

    fn atom(&mut self, depth: usize) -> Result<Arc<Ast>> {
        let offset = self.offset();
        match self.bump().cloned() {
            Some(Tok::Num(v)) => Ok(Arc::new(Ast::Num(v))),
            Some(Tok::Ident(name)) => {
                if let Some(f) = Func::from_name(&name) {
                    let paren_offset = self.offset();
                    match self.bump() {
                        Some(Tok::LParen) => {}
                        _ => {
                            return Err(Error::Syntax {
                                offset: paren_offset,
                                message: format!("expected `(` after `{name}`"),
                            })
                        }
                    }
                    let mut args = vec![self.expr(depth + 1)?];
                    loop {
                        match self.peek() {
                            Some(Tok::Comma) => {
                                self.pos += 1;
                                args.push(self.expr(depth + 1)?);
                            }
                            Some(Tok::RParen) => {
                                self.pos += 1;
                                break;
                            }
                            _ => {
                                return Err(Error::Syntax {
                                    offset: self.offset(),
                                    message: "expected `,` or `)`".into(),
                                })
                            }
                        }
                    }
                    if args.len() != 1 {
                        return Err(Error::Arity {
                            offset,
                            function: name,
                            expected: 1,
                            got: args.len(),
                        });
                    }
                    Ok(Arc::new(Ast::Fun(f, args.pop().unwrap())))
                } else if let Some(idx) = self.vars.index_of(&name) {
                    Ok(Arc::new(Ast::Var(idx)))
                } else {
                    Err(Error::UnknownIdentifier { offset, name })
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr(depth + 1)?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Syntax {
                        offset,
                        message: "unclosed parenthesis".into(),
                    }),
                }
            }
            Some(tok) => Err(Error::Syntax {
                offset,
                message: format!("unexpected token {tok:?}"),
            }),
            None => Err(Error::Syntax {
                offset,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parse `text` against the four declared chart variables.
pub fn parse(text: &str, vars: VarSet) -> Result<Expression> {
    let toks = tokenize(text)?;
    // Balance parens up front so an unclosed one is reported at its own
    // opening offset, not wherever the descent ran out of input.
    let mut open = Vec::new();
    for (tok, offset) in &toks {
        match tok {
            Tok::LParen => open.push(*offset),
            Tok::RParen => {
                if open.pop().is_none() {
                    return Err(Error::Syntax {
                        offset: *offset,
                        message: "unmatched `)`".into(),
                    });
                }
            }
            _ => {}
        }
    }
    if let Some(offset) = open.pop() {
        return Err(Error::Syntax {
            offset,
            message: "unclosed parenthesis".into(),
        });
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
        vars,
    };
    let ast = p.expr(0)?;
    if p.pos != toks.len() {
        return Err(Error::Syntax {
            offset: p.offset(),
            message: "trailing input".into(),
        });
    }
    Ok(Expression { ast, vars })
}

// ---------------------------------------------------------------------
// Smart constructors (used by the symbolic derivative and by
// programmatic assembly; the parser keeps raw structure)
// ---------------------------------------------------------------------

fn is_num(a: &Ast, x: f64) -> bool {
    matches!(a, Ast::Num(v) if *v == x)
}

fn mk_add(a: Arc<Ast>, b: Arc<Ast>) -> Arc<Ast> {
    if is_num(&a, 0.0) {
        return b;
    }
    if is_num(&b, 0.0) {
        return a;
    }
    if let (Ast::Num(x), Ast::Num(y)) = (a.as_ref(), b.as_ref()) {
        let v = x + y;
        if v.is_finite() {
            return Arc::new(Ast::Num(v));
        }
    }
    Arc::new(Ast::Add(a, b))
}

fn mk_sub(a: Arc<Ast>, b: Arc<Ast>) -> Arc<Ast> {
    if is_num(&b, 0.0) {
        return a;
    }
    if is_num(&a, 0.0) {
        return mk_neg(b);
    }
    if let (Ast::Num(x), Ast::Num(y)) = (a.as_ref(), b.as_ref()) {
        let v = x - y;
        if v.is_finite() {
            return Arc::new(Ast::Num(v));
        }
    }
    Arc::new(Ast::Sub(a, b))
}

fn mk_mul(a: Arc<Ast>, b: Arc<Ast>) -> Arc<Ast> {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        return Arc::new(Ast::Num(0.0));
    }
    if is_num(&a, 1.0) {
        return b;
    }
    if is_num(&b, 1.0) {
        return a;
    }
    if let (Ast::Num(x), Ast::Num(y)) = (a.as_ref(), b.as_ref()) {
        let v = x * y;
        if v.is_finite() {
            return Arc::new(Ast::Num(v));
        }
    }
    Arc::new(Ast::Mul(a, b))
}

fn mk_div(a: Arc<Ast>, b: Arc<Ast>) -> Arc<Ast> {
    if is_num(&a, 0.0) && !is_num(&b, 0.0) {
        return Arc::new(Ast::Num(0.0));
    }
    if is_num(&b, 1.0) {
        return a;
    }
    if let (Ast::Num(x), Ast::Num(y)) = (a.as_ref(), b.as_ref()) {
        if *y != 0.0 {
            let v = x / y;
            if v.is_finite() {
                return Arc::new(Ast::Num(v));
            }
        }
    }
    Arc::new(Ast::Div(a, b))
}

fn mk_neg(a: Arc<Ast>) -> Arc<Ast> {
    match a.as_ref() {
        Ast::Num(x) => Arc::new(Ast::Num(-x)),
        Ast::Neg(inner) => inner.clone(),
        _ => Arc::new(Ast::Neg(a)),
    }
}

fn mk_pow(a: Arc<Ast>, n: i32) -> Arc<Ast> {
    match n {
        0 => Arc::new(Ast::Num(1.0)),
        1 => a,
        _ => {
            if let Ast::Num(x) = a.as_ref() {
                let v = x.powi(n);
                if v.is_finite() {
                    return Arc::new(Ast::Num(v));
                }
            }
            Arc::new(Ast::Pow(a, n))
        }
    }
}

// ---------------------------------------------------------------------
// Expression API
// ---------------------------------------------------------------------

impl Expression {
    pub fn constant(v: f64, vars: VarSet) -> Self {
        Expression {
            ast: Arc::new(Ast::Num(v)),
            vars,
        }
    }

    pub fn variable(idx: usize, vars: VarSet) -> Self {
        assert!(idx < 4);
        Expression {
            ast: Arc::new(Ast::Var(idx)),
            vars,
        }
    }

    fn with(&self, ast: Arc<Ast>) -> Self {
        Expression {
            ast,
            vars: self.vars,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.vars, rhs.vars);
        self.with(mk_add(self.ast.clone(), rhs.ast.clone()))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.vars, rhs.vars);
        self.with(mk_sub(self.ast.clone(), rhs.ast.clone()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.vars, rhs.vars);
        self.with(mk_mul(self.ast.clone(), rhs.ast.clone()))
    }

    pub fn div(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.vars, rhs.vars);
        self.with(mk_div(self.ast.clone(), rhs.ast.clone()))
    }

    pub fn neg(&self) -> Self {
        self.with(mk_neg(self.ast.clone()))
    }

    pub fn pow(&self, n: i32) -> Self {
        self.with(mk_pow(self.ast.clone(), n))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.with(mk_mul(Arc::new(Ast::Num(s)), self.ast.clone()))
    }

    pub fn apply(&self, f: Func) -> Self {
        self.with(Arc::new(Ast::Fun(f, self.ast.clone())))
    }

    pub fn is_zero(&self) -> bool {
        is_num(&self.ast, 0.0)
    }

    /// Which chart variables occur in the expression.
    pub fn free_vars(&self) -> [bool; 4] {
        fn walk(a: &Ast, seen: &mut [bool; 4]) {
            match a {
                Ast::Num(_) => {}
                Ast::Var(k) => seen[*k] = true,
                Ast::Add(l, r) | Ast::Sub(l, r) | Ast::Mul(l, r) | Ast::Div(l, r) => {
                    walk(l, seen);
                    walk(r, seen);
                }
                Ast::Neg(x) | Ast::Fun(_, x) => walk(x, seen),
                Ast::Pow(b, _) => walk(b, seen),
            }
        }
        let mut seen = [false; 4];
        walk(&self.ast, &mut seen);
        seen
    }

    /// Exact symbolic partial derivative along chart axis `axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        fn d(a: &Arc<Ast>, axis: usize) -> Arc<Ast> {
            match a.as_ref() {
                Ast::Num(_) => Arc::new(Ast::Num(0.0)),
                Ast::Var(k) => Arc::new(Ast::Num(if *k == axis { 1.0 } else { 0.0 })),
                Ast::Add(l, r) => mk_add(d(l, axis), d(r, axis)),
                Ast::Sub(l, r) => mk_sub(d(l, axis), d(r, axis)),
                Ast::Mul(l, r) => mk_add(
                    mk_mul(d(l, axis), r.clone()),
                    mk_mul(l.clone(), d(r, axis)),
                ),
                Ast::Div(l, r) => mk_div(
                    mk_sub(
                        mk_mul(d(l, axis), r.clone()),
                        mk_mul(l.clone(), d(r, axis)),
                    ),
                    mk_pow(r.clone(), 2),
                ),
                Ast::Neg(x) => mk_neg(d(x, axis)),
                Ast::Pow(b, n) => mk_mul(
                    mk_mul(Arc::new(Ast::Num(f64::from(*n))), mk_pow(b.clone(), n - 1)),
                    d(b, axis),
                ),
                Ast::Fun(f, x) => {
                    let dx = d(x, axis);
                    let outer = match f {
                        Func::Sin => Arc::new(Ast::Fun(Func::Cos, x.clone())),
                        Func::Cos => mk_neg(Arc::new(Ast::Fun(Func::Sin, x.clone()))),
                        Func::Exp => Arc::new(Ast::Fun(Func::Exp, x.clone())),
                        Func::Ln => mk_div(Arc::new(Ast::Num(1.0)), x.clone()),
                        Func::Sqrt => mk_div(
                            Arc::new(Ast::Num(1.0)),
                            mk_mul(
                                Arc::new(Ast::Num(2.0)),
                                Arc::new(Ast::Fun(Func::Sqrt, x.clone())),
                            ),
                        ),
                    };
                    mk_mul(outer, dx)
                }
            }
        }
        self.with(d(&self.ast, axis))
    }

    /// Evaluate over any analytic scalar. Domain checks look at real
    /// value parts, so dual evaluations fail exactly where the value
    /// evaluation would.
    pub fn eval<S: Analytic>(&self, at: &[S; 4]) -> Result<S> {
        fn ev<S: Analytic>(a: &Ast, at: &[S; 4]) -> Result<S> {
            Ok(match a {
                Ast::Num(v) => S::from_f64(*v),
                Ast::Var(k) => at[*k],
                Ast::Add(l, r) => ev(l, at)? + ev(r, at)?,
                Ast::Sub(l, r) => ev(l, at)? - ev(r, at)?,
                Ast::Mul(l, r) => ev(l, at)? * ev(r, at)?,
                Ast::Div(l, r) => {
                    let num = ev(l, at)?;
                    let den = ev(r, at)?;
                    if den.value() == 0.0 {
                        return Err(Error::Domain {
                            op: "divide",
                            expr: print_ast(r),
                            value: 0.0,
                        });
                    }
                    num / den
                }
                Ast::Neg(x) => -ev(x, at)?,
                Ast::Pow(b, n) => {
                    let base = ev(b, at)?;
                    if *n < 0 && base.value() == 0.0 {
                        return Err(Error::Domain {
                            op: "powi",
                            expr: print_ast(b),
                            value: 0.0,
                        });
                    }
                    base.powi(*n)
                }
                Ast::Fun(f, x) => {
                    let inner = ev(x, at)?;
                    match f {
                        Func::Sin => inner.sin(),
                        Func::Cos => inner.cos(),
                        Func::Exp => inner.exp(),
                        Func::Ln => {
                            if inner.value() <= 0.0 {
                                return Err(Error::Domain {
                                    op: "ln",
                                    expr: print_ast(x),
                                    value: inner.value(),
                                });
                            }
                            inner.ln()
                        }
                        Func::Sqrt => {
                            if inner.value() <= 0.0 {
                                return Err(Error::Domain {
                                    op: "sqrt",
                                    expr: print_ast(x),
                                    value: inner.value(),
                                });
                            }
                            inner.sqrt()
                        }
                    }
                }
            })
        }
        ev(&self.ast, at)
    }

    pub fn eval_value(&self, p: [f64; 4]) -> Result<f64> {
        self.eval(&p)
    }

    /// Exact value, gradient and Hessian by nested dual numbers: one
    /// directional pass per coordinate pair.
    pub fn eval_jet2(&self, p: [f64; 4]) -> Result<Jet> {
        let mut jet = Jet {
            v: 0.0,
            g: [0.0; 4],
            h: [0.0; 10],
        };
        for i in 0..4 {
            for j in i..4 {
                let f = self.eval(&dual2_seed(p, i, j))?;
                if i == 0 && j == 0 {
                    jet.v = f.v.v;
                }
                if i == j {
                    jet.g[i] = f.v.d;
                }
                jet.h[hidx(i, j)] = f.d.d;
            }
        }
        Ok(jet)
    }

    /// Canonical text form; reparsing reproduces the same tree.
    pub fn print(&self) -> String {
        print_with_vars(&self.ast, &self.vars)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

// Precedence levels for printing: Add/Sub 1, Mul/Div 2, Neg 3, Pow 4,
// atoms 5. A child is parenthesized when its level is below the context.
fn prec(a: &Ast) -> u8 {
    match a {
        Ast::Add(..) | Ast::Sub(..) => 1,
        Ast::Mul(..) | Ast::Div(..) => 2,
        Ast::Neg(..) => 3,
        Ast::Num(v) if *v < 0.0 => 3,
        Ast::Pow(..) => 4,
        Ast::Num(_) | Ast::Var(_) | Ast::Fun(..) => 5,
    }
}

fn print_node(a: &Ast, vars: Option<&VarSet>, ctx: u8, out: &mut String) {
    let p = prec(a);
    let parens = p < ctx;
    if parens {
        out.push('(');
    }
    match a {
        Ast::Num(v) => out.push_str(&format!("{v}")),
        Ast::Var(k) => match vars {
            Some(vs) => out.push_str(vs.names[*k]),
            None => out.push_str(&format!("x{k}")),
        },
        Ast::Add(l, r) => {
            print_node(l, vars, 1, out);
            out.push_str(" + ");
            print_node(r, vars, 2, out);
        }
        Ast::Sub(l, r) => {
            print_node(l, vars, 1, out);
            out.push_str(" - ");
            print_node(r, vars, 2, out);
        }
        Ast::Mul(l, r) => {
            print_node(l, vars, 2, out);
            out.push('*');
            print_node(r, vars, 3, out);
        }
        Ast::Div(l, r) => {
            print_node(l, vars, 2, out);
            out.push('/');
            print_node(r, vars, 3, out);
        }
        Ast::Neg(x) => {
            out.push('-');
            print_node(x, vars, 3, out);
        }
        Ast::Pow(b, n) => {
            print_node(b, vars, 5, out);
            out.push('^');
            out.push_str(&format!("{n}"));
        }
        Ast::Fun(f, x) => {
            out.push_str(f.name());
            out.push('(');
            print_node(x, vars, 0, out);
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

fn print_with_vars(a: &Ast, vars: &VarSet) -> String {
    let mut s = String::new();
    print_node(a, Some(vars), 0, &mut s);
    s
}

fn print_ast(a: &Ast) -> String {
    let mut s = String::new();
    print_node(a, None, 0, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wparse(text: &str) -> Result<Expression> {
        parse(text, WALKER_VARS)
    }

    #[test]
    fn parses_product_plus_function() {
        let e = wparse("x*y + sin(z)").unwrap();
        let Ast::Add(l, r) = e.ast.as_ref() else {
            panic!("expected Add at root");
        };
        assert!(matches!(l.as_ref(), Ast::Mul(a, b)
            if matches!(a.as_ref(), Ast::Var(0)) && matches!(b.as_ref(), Ast::Var(1))));
        assert!(matches!(r.as_ref(), Ast::Fun(Func::Sin, z)
            if matches!(z.as_ref(), Ast::Var(2))));
    }

    #[test]
    fn precedence_and_associativity() {
        // ^ binds tighter than unary minus: -x^2 = -(x^2).
        let e = wparse("-x^2").unwrap();
        assert_eq!(e.eval_value([3.0, 0.0, 0.0, 0.0]).unwrap(), -9.0);
        // Right-associative exponent chain: x^2^3 = x^8.
        let e = wparse("x^2^3").unwrap();
        assert_eq!(e.eval_value([2.0, 0.0, 0.0, 0.0]).unwrap(), 256.0);
        // Left associativity of subtraction.
        let e = wparse("1 - 2 - 3").unwrap();
        assert_eq!(e.eval_value([0.0; 4]).unwrap(), -4.0);
        let e = wparse("2*x + 3*y^2").unwrap();
        assert_eq!(e.eval_value([1.0, 2.0, 0.0, 0.0]).unwrap(), 14.0);
    }

    #[test]
    fn error_offsets() {
        match wparse("(") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match wparse("x + (y * (z + 1)") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match wparse("x^2*K") {
            Err(Error::UnknownIdentifier { offset, name }) => {
                assert_eq!(offset, 4);
                assert_eq!(name, "K");
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        match wparse("sin(x, y)") {
            Err(Error::Arity { function, got, .. }) => {
                assert_eq!(function, "sin");
                assert_eq!(got, 2);
            }
            other => panic!("expected arity error, got {other:?}"),
        }
        match wparse("x^y") {
            Err(Error::NonIntegerExponent { offset }) => assert_eq!(offset, 2),
            other => panic!("expected non-integer exponent, got {other:?}"),
        }
        match wparse("x^2.5") {
            Err(Error::NonIntegerExponent { .. }) => {}
            other => panic!("expected non-integer exponent, got {other:?}"),
        }
    }

    #[test]
    fn domain_errors() {
        let e = wparse("ln(x)").unwrap();
        assert!(matches!(
            e.eval_value([-1.0, 0.0, 0.0, 0.0]),
            Err(Error::Domain { op: "ln", .. })
        ));
        let e = wparse("sqrt(x)").unwrap();
        assert!(matches!(
            e.eval_value([0.0; 4]),
            Err(Error::Domain { op: "sqrt", .. })
        ));
        let e = wparse("1/x").unwrap();
        assert!(matches!(
            e.eval_value([0.0; 4]),
            Err(Error::Domain { op: "divide", .. })
        ));
        let e = wparse("x^-2").unwrap();
        assert!(matches!(
            e.eval_value([0.0; 4]),
            Err(Error::Domain { op: "powi", .. })
        ));
    }

    #[test]
    fn jet_of_polynomial_is_exact() {
        let e = wparse("x^2*y + z*t - 3*y").unwrap();
        let p = [1.5, -2.0, 0.5, 3.0];
        let j = e.eval_jet2(p).unwrap();
        assert_eq!(j.v, 1.5 * 1.5 * -2.0 + 0.5 * 3.0 - 3.0 * -2.0);
        assert_eq!(j.g[0], 2.0 * 1.5 * -2.0);
        assert_eq!(j.g[1], 1.5 * 1.5 - 3.0);
        assert_eq!(j.g[2], 3.0);
        assert_eq!(j.g[3], 0.5);
        assert_eq!(j.hess(0, 0), 2.0 * -2.0);
        assert_eq!(j.hess(0, 1), 2.0 * 1.5);
        assert_eq!(j.hess(2, 3), 1.0);
        assert_eq!(j.hess(1, 1), 0.0);
    }

    /// Central-difference oracle for gradients and Hessians.
    fn fd_jet(e: &Expression, p: [f64; 4]) -> Jet {
        let h = 1e-5;
        let f = |q: [f64; 4]| e.eval_value(q).unwrap();
        let mut jet = Jet {
            v: f(p),
            g: [0.0; 4],
            h: [0.0; 10],
        };
        for i in 0..4 {
            let mut pp = p;
            let mut pm = p;
            pp[i] += h;
            pm[i] -= h;
            jet.g[i] = (f(pp) - f(pm)) / (2.0 * h);
        }
        for i in 0..4 {
            for j in i..4 {
                let idx = hidx(i, j);
                if i == j {
                    let mut pp = p;
                    let mut pm = p;
                    pp[i] += h;
                    pm[i] -= h;
                    jet.h[idx] = (f(pp) - 2.0 * f(p) + f(pm)) / (h * h);
                } else {
                    let mut pp = p;
                    let mut pm = p;
                    let mut pq = p;
                    let mut qp = p;
                    pp[i] += h;
                    pp[j] += h;
                    pm[i] -= h;
                    pm[j] -= h;
                    pq[i] += h;
                    pq[j] -= h;
                    qp[i] -= h;
                    qp[j] += h;
                    jet.h[idx] = (f(pp) + f(pm) - f(pq) - f(qp)) / (4.0 * h * h);
                }
            }
        }
        jet
    }

    #[test]
    fn jet_matches_finite_differences_on_transcendental() {
        let e = wparse("sin(x*y) * exp(z/2) + ln(2 + t^2) - sqrt(4 + x^2)").unwrap();
        let p = [0.7, -1.2, 0.3, 0.9];
        let ad = e.eval_jet2(p).unwrap();
        let fd = fd_jet(&e, p);
        assert!((ad.v - fd.v).abs() < 1e-12);
        for k in 0..4 {
            assert!(
                (ad.g[k] - fd.g[k]).abs() <= 1e-6 * (1.0 + fd.g[k].abs()),
                "gradient {k}"
            );
        }
        for k in 0..10 {
            assert!(
                (ad.h[k] - fd.h[k]).abs() <= 1e-5 * (1.0 + fd.h[k].abs()),
                "hessian {k}"
            );
        }
    }

    #[test]
    fn symbolic_derivative_matches_jet_gradient() {
        let e = wparse("cos(x^2 - y) / (2 + sin(t)) + z^3*exp(x)").unwrap();
        let p = [0.4, 1.3, -0.8, 0.2];
        let jet = e.eval_jet2(p).unwrap();
        for axis in 0..4 {
            let d = e.derivative(axis);
            let v = d.eval_value(p).unwrap();
            assert!((v - jet.g[axis]).abs() < 1e-12, "axis {axis}");
            // Second derivatives: symbolic-of-symbolic vs jet Hessian.
            for axis2 in axis..4 {
                let dd = d.derivative(axis2);
                let v2 = dd.eval_value(p).unwrap();
                assert!(
                    (v2 - jet.hess(axis, axis2)).abs() < 1e-11,
                    "axes {axis},{axis2}"
                );
            }
        }
    }

    #[test]
    fn print_is_reparsable_on_samples() {
        for text in [
            "x*y + sin(z)",
            "-x^2 + (x + y)*(z - t)",
            "1 - 2 - 3",
            "x/(y/z)",
            "-(x + y)",
            "2*-x",
            "x^-2",
            "sqrt(4 + x^2)/ln(2 + y^2)",
        ] {
            let e = wparse(text).unwrap();
            let printed = e.print();
            let reparsed = parse(&printed, WALKER_VARS).unwrap();
            assert_eq!(e.ast, reparsed.ast, "text `{text}` printed `{printed}`");
            assert_eq!(printed, reparsed.print());
        }
    }

    fn arb_ast(depth: u32) -> impl Strategy<Value = Arc<Ast>> {
        let leaf = prop_oneof![
            (0usize..4).prop_map(|k| Arc::new(Ast::Var(k))),
            (0i32..1000).prop_map(|n| Arc::new(Ast::Num(f64::from(n) / 8.0))),
        ];
        leaf.prop_recursive(depth, 64, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Arc::new(Ast::Add(a, b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Arc::new(Ast::Sub(a, b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Arc::new(Ast::Mul(a, b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Arc::new(Ast::Div(a, b))),
                inner.clone().prop_map(|a| Arc::new(Ast::Neg(a))),
                (inner.clone(), -9i32..9).prop_map(|(a, n)| Arc::new(Ast::Pow(a, n))),
                (inner, prop_oneof![
                    Just(Func::Sin),
                    Just(Func::Cos),
                    Just(Func::Exp),
                    Just(Func::Ln),
                    Just(Func::Sqrt)
                ])
                    .prop_map(|(a, f)| Arc::new(Ast::Fun(f, a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(ast in arb_ast(5)) {
            let e = Expression { ast, vars: WALKER_VARS };
            let printed = e.print();
            let reparsed = parse(&printed, WALKER_VARS).unwrap();
            prop_assert_eq!(&*e.ast, &*reparsed.ast);
            prop_assert_eq!(printed, reparsed.print());
        }
    }
}
