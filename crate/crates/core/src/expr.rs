//! A small expression language for manufactured fields, with exact symbolic
//! differentiation.
//!
//! Grammar: `+ - * / ^` (with `^` right-associative and binding tighter than
//! unary minus), parentheses, numbers, the constant `pi`, the variables
//! `x, x1, x2, y, t` (`x` and `x1` name the same coordinate) and the functions
//! `sin, cos, exp, ln`.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::sampling::CheckRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X1,
    X2,
    Y,
    T,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X1, Var::X2, Var::Y, Var::T];

    fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::Y => "y",
            Var::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Coordinates at which an expression is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
    pub y: f64,
    pub t: f64,
}

impl Point {
    fn get(&self, v: Var) -> f64 {
        match v {
            Var::X1 => self.x1,
            Var::X2 => self.x2,
            Var::Y => self.y,
            Var::T => self.t,
        }
    }

    fn shifted(mut self, v: Var, d: f64) -> Self {
        match v {
            Var::X1 => self.x1 += d,
            Var::X2 => self.x2 += d,
            Var::Y => self.y += d,
            Var::T => self.t += d,
        }
        self
    }
}

// Simplifying constructors.

fn constant(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Expr::Const(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => match b {
            Expr::Neg(inner) => Expr::Sub(Box::new(a), inner),
            b => Expr::Add(Box::new(a), Box::new(b)),
        },
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Expr::Const(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => match b {
            Expr::Neg(inner) => Expr::Add(Box::new(a), inner),
            b => Expr::Sub(Box::new(a), Box::new(b)),
        },
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Expr::Const(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Const(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        (None, Some(_)) => mul(b, a),
        _ => match (a, b) {
            (Expr::Neg(a), b) => neg(mul(*a, b)),
            (a, Expr::Neg(b)) => neg(mul(a, *b)),
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        },
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) if y != 0.0 => Expr::Const(x / y),
        (Some(x), _) if x == 0.0 => Expr::Const(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Expr::Const(x.powf(y)),
        (_, Some(y)) if y == 0.0 => Expr::Const(1.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    match constant(&a) {
        Some(c) => Expr::Const(f.apply(c)),
        None => Expr::Call(f, Box::new(a)),
    }
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on(v) || b.depends_on(v)
            }
        }
    }

    pub fn eval(&self, p: &Point) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => p.get(*v),
            Expr::Neg(a) => -a.eval(p),
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Sub(a, b) => a.eval(p) - b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Div(a, b) => a.eval(p) / b.eval(p),
            Expr::Pow(a, b) => {
                let (base, e) = (a.eval(p), b.eval(p));
                if e.fract() == 0.0 && e.abs() < 64.0 {
                    base.powi(e as i32)
                } else {
                    base.powf(e)
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(p)),
        }
    }

    /// Exact partial derivative, lightly simplified.
    pub fn diff(&self, v: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(w) => Expr::Const(if *w == v { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.diff(v)),
            Expr::Add(a, b) => add(a.diff(v), b.diff(v)),
            Expr::Sub(a, b) => sub(a.diff(v), b.diff(v)),
            Expr::Mul(a, b) => add(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v))),
            Expr::Div(a, b) => div(
                sub(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v))),
                pow((**b).clone(), Expr::Const(2.0)),
            ),
            Expr::Pow(a, b) => {
                if !b.depends_on(v) {
                    let lowered = pow((**a).clone(), sub((**b).clone(), Expr::Const(1.0)));
                    mul(mul((**b).clone(), lowered), a.diff(v))
                } else {
                    // d(a^b) = a^b (b' ln a + b a'/a)
                    let inner = add(
                        mul(b.diff(v), call(Func::Ln, (**a).clone())),
                        div(mul((**b).clone(), a.diff(v)), (**a).clone()),
                    );
                    mul(self.clone(), inner)
                }
            }
            Expr::Call(f, a) => {
                let outer = match f {
                    Func::Sin => call(Func::Cos, (**a).clone()),
                    Func::Cos => neg(call(Func::Sin, (**a).clone())),
                    Func::Exp => call(Func::Exp, (**a).clone()),
                    Func::Ln => div(Expr::Const(1.0), (**a).clone()),
                };
                mul(outer, a.diff(v))
            }
        }
    }

    /// Iterated derivative, applied left to right.
    pub fn diff_many(&self, vars: &[Var]) -> Expr {
        vars.iter().fold(self.clone(), |e, v| e.diff(*v))
    }

    /// Samples the expression on a 1D grid (along `x`) or 2D grid (`x1, x2`)
    /// at fixed `y, t`.
    pub fn sample(&self, grid: Grid, y: f64, t: f64) -> Result<GridFunction> {
        let f = GridFunction::from_fn2(grid, |x1, x2| self.eval(&Point { x1, x2, y, t }));
        GridFunction::new(grid, f.into_values())
    }

    /// Largest relative mismatch between symbolic first derivatives and
    /// central differences of the expression, over the given points.
    pub fn self_test(&self, points: &[Point]) -> f64 {
        let mut worst = 0.0f64;
        for v in Var::ALL {
            let d = self.diff(v);
            for p in points {
                let h = 1e-5 * p.get(v).abs().max(1.0);
                let fd = (self.eval(&p.shifted(v, h)) - self.eval(&p.shifted(v, -h))) / (2.0 * h);
                let exact = d.eval(p);
                let scale = exact.abs().max(self.eval(p).abs()).max(1.0);
                worst = worst.max((fd - exact).abs() / scale);
            }
        }
        worst
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if precedence(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 4)
            }
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, "+")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, "-")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 4)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, 5)?;
                write!(f, "^")?;
                wrap(f, b, 4)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| Error::Syntax { position: start, message: format!("bad number '{s}'") })?;
            out.push((start, Token::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else {
            return Err(Error::Syntax { position: i, message: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(Error::Syntax { position: self.here(), message: format!("expected '{op}'") })
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let position = self.here();
        match self.tokens.get(self.pos).cloned() {
            None => Err(Error::Syntax { position, message: "unexpected end of input".into() }),
            Some((_, Token::Num(v))) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some((_, Token::Op('('))) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some((_, Token::Op(c))) => Err(Error::Syntax { position, message: format!("unexpected '{c}'") }),
            Some((_, Token::Ident(name))) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "ln" => Some(Func::Ln),
                    _ => None,
                };
                if let Some(func) = func {
                    self.expect('(')?;
                    let arg = self.sum()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "x" | "x1" => Ok(Expr::Var(Var::X1)),
                    "x2" => Ok(Expr::Var(Var::X2)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "t" => Ok(Expr::Var(Var::T)),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    _ => Err(Error::UnknownIdentifier { name, position }),
                }
            }
        }
    }
}

/// Parses an expression; positions in errors are 0-based character offsets.
pub fn parse_expression(text: &str) -> Result<Expr> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(Error::Syntax { position: 0, message: "empty expression".into() });
    }
    let mut p = Parser { tokens, pos: 0, end: text.chars().count() };
    let e = p.sum()?;
    if p.pos < p.tokens.len() {
        return Err(Error::Syntax { position: p.here(), message: "unexpected trailing input".into() });
    }
    Ok(e)
}

/// A random trigonometric expression
/// `Σ a_k sin(m1 x1 + m2 x2 + m3 y + m4 t + φ_k)` with small integer spatial
/// wavenumbers (so it is periodic on the torus) and real `y, t` rates.
/// `two_d` controls whether `x2` appears.
pub fn random_trig_expression(rng: &mut CheckRng, terms: usize, two_d: bool) -> Expr {
    let mut acc = Expr::Const(0.0);
    for _ in 0..terms {
        let m1 = rng.gen_range(-3i32..=3) as f64;
        let m2 = if two_d { rng.gen_range(-3i32..=3) as f64 } else { 0.0 };
        let (a, c_y, c_t, phase) =
            (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.0));
        let arg = [(m1, Var::X1), (m2, Var::X2), (c_y, Var::Y), (c_t, Var::T)]
            .into_iter()
            .fold(Expr::Const(phase), |e, (c, v)| add(e, mul(Expr::Const(c), Expr::Var(v))));
        acc = add(acc, mul(Expr::Const(a), call(Func::Sin, arg)));
    }
    acc
}
