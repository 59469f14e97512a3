//! A small expression language for SDE coefficient functions a(x), sigma(x).
//!
//! Supported: real literals, named parameters, the variable `x`, unary
//! negation, `+ - * /`, integer powers via `^`, and the functions
//! `sin`, `cos`, `exp`, `tanh`. Expressions carry exact symbolic derivatives
//! up to third order so the scheme formulas needing a', a'', sigma', sigma'',
//! sigma''' are closed-form.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;

pub type Params = HashMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Tanh => v.tanh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Apply(Func, Box<Expr>),
}

impl Expr {
    pub fn evaluate(&self, x: f64, params: &Params) -> Result<f64> {
        let v = self.eval_inner(x, params)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }

    fn eval_inner(&self, x: f64, params: &Params) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Param(name) => *params
                .get(name)
                .ok_or_else(|| Error::UnboundParameter(name.clone()))?,
            Expr::Neg(e) => -e.eval_inner(x, params)?,
            Expr::Add(a, b) => a.eval_inner(x, params)? + b.eval_inner(x, params)?,
            Expr::Sub(a, b) => a.eval_inner(x, params)? - b.eval_inner(x, params)?,
            Expr::Mul(a, b) => a.eval_inner(x, params)? * b.eval_inner(x, params)?,
            Expr::Div(a, b) => {
                let d = b.eval_inner(x, params)?;
                if d == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                a.eval_inner(x, params)? / d
            }
            Expr::Pow(e, k) => e.eval_inner(x, params)?.powi(*k),
            Expr::Apply(f, e) => f.apply(e.eval_inner(x, params)?),
        })
    }

    /// Exact symbolic derivative with respect to `x`; parameters are constants.
    pub fn differentiate(&self) -> Expr {
        let d = match self {
            Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Neg(e) => Expr::Neg(Box::new(e.differentiate())),
            Expr::Add(a, b) => Expr::Add(Box::new(a.differentiate()), Box::new(b.differentiate())),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.differentiate()), Box::new(b.differentiate())),
            Expr::Mul(a, b) => Expr::Add(
                Box::new(Expr::Mul(Box::new(a.differentiate()), b.clone())),
                Box::new(Expr::Mul(a.clone(), Box::new(b.differentiate()))),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(Expr::Sub(
                    Box::new(Expr::Mul(Box::new(a.differentiate()), b.clone())),
                    Box::new(Expr::Mul(a.clone(), Box::new(b.differentiate()))),
                )),
                Box::new(Expr::Pow(b.clone(), 2)),
            ),
            Expr::Pow(e, k) => Expr::Mul(
                Box::new(Expr::Mul(
                    Box::new(Expr::Const(*k as f64)),
                    Box::new(Expr::Pow(e.clone(), k - 1)),
                )),
                Box::new(e.differentiate()),
            ),
            Expr::Apply(f, e) => {
                let outer = match f {
                    Func::Sin => Expr::Apply(Func::Cos, e.clone()),
                    Func::Cos => Expr::Neg(Box::new(Expr::Apply(Func::Sin, e.clone()))),
                    Func::Exp => Expr::Apply(Func::Exp, e.clone()),
                    // d tanh = 1 - tanh^2
                    Func::Tanh => Expr::Sub(
                        Box::new(Expr::Const(1.0)),
                        Box::new(Expr::Pow(Box::new(Expr::Apply(Func::Tanh, e.clone())), 2)),
                    ),
                };
                Expr::Mul(Box::new(outer), Box::new(e.differentiate()))
            }
        };
        d.fold()
    }

    /// Constant folding plus the 0/1 identities; no further simplification.
    pub fn fold(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var | Expr::Param(_) => self.clone(),
            Expr::Neg(e) => match e.fold() {
                Expr::Const(c) => Expr::Const(-c),
                f => Expr::Neg(Box::new(f)),
            },
            Expr::Add(a, b) => match (a.fold(), b.fold()) {
                (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
                (Expr::Const(c), f) if c == 0.0 => f,
                (f, Expr::Const(c)) if c == 0.0 => f,
                (f, g) => Expr::Add(Box::new(f), Box::new(g)),
            },
            Expr::Sub(a, b) => match (a.fold(), b.fold()) {
                (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
                (f, Expr::Const(c)) if c == 0.0 => f,
                (f, g) => Expr::Sub(Box::new(f), Box::new(g)),
            },
            Expr::Mul(a, b) => match (a.fold(), b.fold()) {
                (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
                (Expr::Const(c), _) | (_, Expr::Const(c)) if c == 0.0 => Expr::Const(0.0),
                (Expr::Const(c), f) if c == 1.0 => f,
                (f, Expr::Const(c)) if c == 1.0 => f,
                (f, g) => Expr::Mul(Box::new(f), Box::new(g)),
            },
            Expr::Div(a, b) => match (a.fold(), b.fold()) {
                (Expr::Const(x), Expr::Const(y)) if y != 0.0 => Expr::Const(x / y),
                (Expr::Const(c), _) if c == 0.0 => Expr::Const(0.0),
                (f, Expr::Const(c)) if c == 1.0 => f,
                (f, g) => Expr::Div(Box::new(f), Box::new(g)),
            },
            Expr::Pow(e, k) => match (e.fold(), *k) {
                (_, 0) => Expr::Const(1.0),
                (f, 1) => f,
                (Expr::Const(c), k) => Expr::Const(c.powi(k)),
                (f, k) => Expr::Pow(Box::new(f), k),
            },
            Expr::Apply(f, e) => match e.fold() {
                Expr::Const(c) => Expr::Const(f.apply(c)),
                g => Expr::Apply(*f, Box::new(g)),
            },
        }
    }

    /// Names of all parameters appearing in the tree.
    pub fn parameters(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(name) => out.push(name.clone()),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Apply(_, e) => e.collect_params(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            _ => {}
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "x"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(e, k) => write!(f, "({e} ^ {k})"),
            Expr::Apply(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

/// Parse an expression; reports position-annotated errors on invalid input.
pub fn parse(source: &str) -> Result<Expr> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.add_expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Syntax {
            offset: p.pos,
            message: format!("unexpected `{}`", p.src[p.pos] as char),
        });
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn add_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.mul_expr()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.mul_expr()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn mul_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.pow_expr()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.pow_expr()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.pow_expr()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // power by integer constant only; unary minus binds tighter than `^`
    fn pow_expr(&mut self) -> Result<Expr> {
        let mut base = self.unary()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'^') {
                self.pos += 1;
                let k = self.integer()?;
                base = Expr::Pow(Box::new(base), k);
            } else {
                return Ok(base);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.add_expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => self.err(format!("unexpected `{}`", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                // exponent part
                let save = self.pos;
                self.pos += 1;
                if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
                if !matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    self.pos = save;
                    break;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Const(v)),
            Err(_) => Err(Error::Syntax {
                offset: start,
                message: format!("invalid number `{text}`"),
            }),
        }
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<i32>().map_err(|_| Error::Syntax {
            offset: start,
            message: "expected integer exponent".into(),
        })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        self.skip_ws();
        if self.peek() == Some(b'(') {
            let func = match name.as_str() {
                "sin" => Func::Sin,
                "cos" => Func::Cos,
                "exp" => Func::Exp,
                "tanh" => Func::Tanh,
                _ => return Err(Error::UnknownFunction(name)),
            };
            self.pos += 1;
            let arg = self.add_expr()?;
            self.skip_ws();
            if self.peek() != Some(b')') {
                return self.err("expected `)`");
            }
            self.pos += 1;
            Ok(Expr::Apply(func, Box::new(arg)))
        } else if name == "x" {
            Ok(Expr::Var)
        } else {
            Ok(Expr::Param(name))
        }
    }
}

/// A parsed coefficient function with its symbolic derivatives up to third
/// order and bound parameter values.
#[derive(Debug, Clone)]
pub struct CoefficientFn {
    pub expr: Expr,
    pub d1: Expr,
    pub d2: Expr,
    pub d3: Expr,
    pub params: Params,
}

impl CoefficientFn {
    pub fn new(source: &str, params: Params) -> Result<Self> {
        let expr = parse(source)?.fold();
        for name in expr.parameters() {
            if !params.contains_key(&name) {
                return Err(Error::UnboundParameter(name));
            }
        }
        let d1 = expr.differentiate();
        let d2 = d1.differentiate();
        let d3 = d2.differentiate();
        Ok(Self {
            expr,
            d1,
            d2,
            d3,
            params,
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.expr.evaluate(x, &self.params)
    }

    pub fn eval_d1(&self, x: f64) -> Result<f64> {
        self.d1.evaluate(x, &self.params)
    }

    pub fn eval_d2(&self, x: f64) -> Result<f64> {
        self.d2.evaluate(x, &self.params)
    }

    pub fn eval_d3(&self, x: f64) -> Result<f64> {
        self.d3.evaluate(x, &self.params)
    }
}

/// Advisory report from probing coefficient magnitudes on a dense grid.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub min_sigma: f64,
    pub max_abs_drift: f64,
    pub max_abs_sigma: f64,
    pub max_abs_derivative: f64,
    pub positivity_violated: bool,
    pub bound_exceeded: bool,
}

pub const PROBE_POINTS: usize = 10_001;

/// Probe `a` and `sigma` on a dense equispaced grid over `probe_range` and
/// report extremes. Advisory only: boundedness is a global property this
/// cannot decide.
pub fn validate_assumptions(
    a: &CoefficientFn,
    sigma: &CoefficientFn,
    probe_range: (f64, f64),
    needs_positivity: bool,
    magnitude_bound: f64,
) -> Result<AssumptionReport> {
    let (lo, hi) = probe_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("invalid probe range [{lo}, {hi}]")));
    }
    let mut min_sigma = f64::INFINITY;
    let mut max_abs_drift: f64 = 0.0;
    let mut max_abs_sigma: f64 = 0.0;
    let mut max_abs_derivative: f64 = 0.0;
    for i in 0..PROBE_POINTS {
        let x = lo + (hi - lo) * i as f64 / (PROBE_POINTS - 1) as f64;
        let s = sigma.eval(x)?;
        min_sigma = min_sigma.min(s);
        max_abs_sigma = max_abs_sigma.max(s.abs());
        max_abs_drift = max_abs_drift.max(a.eval(x)?.abs());
        for v in [
            a.eval_d1(x)?,
            a.eval_d2(x)?,
            sigma.eval_d1(x)?,
            sigma.eval_d2(x)?,
            sigma.eval_d3(x)?,
        ] {
            max_abs_derivative = max_abs_derivative.max(v.abs());
        }
    }
    Ok(AssumptionReport {
        min_sigma,
        max_abs_drift,
        max_abs_sigma,
        max_abs_derivative,
        positivity_violated: needs_positivity && min_sigma <= 0.0,
        bound_exceeded: max_abs_sigma > magnitude_bound
            || max_abs_drift > magnitude_bound
            || max_abs_derivative > magnitude_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(src: &str) -> Expr {
        parse(src).unwrap()
    }

    fn fd(e: &Expr, x: f64, params: &Params) -> f64 {
        let h = 1e-5;
        (e.evaluate(x + h, params).unwrap() - e.evaluate(x - h, params).unwrap()) / (2.0 * h)
    }

    #[test]
    fn parses_basic_nodes() {
        assert_eq!(p("x"), Expr::Var);
        assert_eq!(
            p("l*x"),
            Expr::Mul(Box::new(Expr::Param("l".into())), Box::new(Expr::Var))
        );
        assert!(matches!(p("2 + sin(x)"), Expr::Add(_, _)));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("1 + @") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("foo(x)"), Err(Error::UnknownFunction(_))));
    }

    #[test]
    fn evaluates_examples() {
        let none = Params::new();
        assert_eq!(p("x").evaluate(2.5, &none).unwrap(), 2.5);
        let mut params = Params::new();
        params.insert("l".into(), 2.0);
        assert_eq!(p("l*x").evaluate(3.0, &params).unwrap(), 6.0);
        assert_relative_eq!(
            p("2+sin(x)").evaluate(1.0, &none).unwrap(),
            2.841_470_984_807_897,
            epsilon = 1e-12
        );
    }

    #[test]
    fn evaluation_errors() {
        let none = Params::new();
        assert!(matches!(
            p("l*x").evaluate(1.0, &none),
            Err(Error::UnboundParameter(_))
        ));
        assert!(matches!(
            p("1/(x-1)").evaluate(1.0, &none),
            Err(Error::DivisionByZero)
        ));
        assert!(matches!(
            p("exp(x)").evaluate(1e4, &none),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn trivial_derivatives() {
        assert_eq!(p("sin(x)").differentiate(), Expr::Apply(Func::Cos, Box::new(Expr::Var)));
        assert_eq!(p("l*x").differentiate(), Expr::Param("l".into()));
    }

    #[test]
    fn squared_sum_derivative_matches_reference() {
        // d/dx (2+sin x)^2 = 2(2+sin x)cos x at x = 0.3
        let d = p("(2+sin(x))^2").differentiate();
        let none = Params::new();
        let got = d.evaluate(0.3, &none).unwrap();
        let expect = 2.0 * (2.0 + 0.3f64.sin()) * 0.3f64.cos();
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences_on_corpus() {
        let corpus = [
            "2+sin(x)",
            "tanh(x/2) - x^3",
            "exp(-x^2)",
            "(1+x^2)/(2+cos(x))",
            "l*x + sin(l*x)",
        ];
        let mut params = Params::new();
        params.insert("l".into(), 0.7);
        for src in corpus {
            let e = p(src);
            let d = e.differentiate();
            for i in 0..100 {
                let x = -3.0 + 6.0 * i as f64 / 99.0;
                let sym = d.evaluate(x, &params).unwrap();
                let num = fd(&e, x, &params);
                assert!(
                    (sym - num).abs() <= 1e-6 * (1.0 + sym.abs()),
                    "{src} at {x}: {sym} vs {num}"
                );
            }
        }
    }

    #[test]
    fn print_parse_roundtrip() {
        let corpus = ["2 + sin(x)", "-x^2*l/(3 - tanh(x))", "exp(x)^2 - 0.5"];
        let mut params = Params::new();
        params.insert("l".into(), 1.3);
        for src in corpus {
            let e = p(src);
            let back = parse(&e.to_string()).unwrap();
            for i in 0..50 {
                let x = -2.0 + 4.0 * i as f64 / 49.0;
                assert_relative_eq!(
                    e.evaluate(x, &params).unwrap(),
                    back.evaluate(x, &params).unwrap(),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn differentiation_is_linear() {
        let e1 = p("sin(x)");
        let e2 = p("x^3");
        let alpha = 2.5;
        let combined = Expr::Add(
            Box::new(Expr::Mul(Box::new(Expr::Const(alpha)), Box::new(e1.clone()))),
            Box::new(e2.clone()),
        );
        let d_comb = combined.differentiate();
        let d1 = e1.differentiate();
        let d2 = e2.differentiate();
        let none = Params::new();
        for i in 0..100 {
            let x = -2.0 + 4.0 * i as f64 / 99.0;
            let lhs = d_comb.evaluate(x, &none).unwrap();
            let rhs = alpha * d1.evaluate(x, &none).unwrap() + d2.evaluate(x, &none).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn validate_assumptions_examples() {
        let none = Params::new();
        let sigma = CoefficientFn::new("2+sin(x)", none.clone()).unwrap();
        let a = CoefficientFn::new("1", none.clone()).unwrap();
        let rep = validate_assumptions(&a, &sigma, (-10.0, 10.0), true, 1e6).unwrap();
        assert!(rep.min_sigma >= 1.0);
        assert!(!rep.positivity_violated);

        let sigma_x = CoefficientFn::new("x", none.clone()).unwrap();
        let rep = validate_assumptions(&a, &sigma_x, (-1.0, 1.0), true, 1e6).unwrap();
        assert!(rep.positivity_violated);

        // unbounded drift with constant sigma: no positivity requirement
        let mut params = Params::new();
        params.insert("l".into(), 1.0);
        let drift = CoefficientFn::new("l*x", params).unwrap();
        let one = CoefficientFn::new("1", none).unwrap();
        let rep = validate_assumptions(&drift, &one, (-10.0, 10.0), false, 5.0).unwrap();
        assert!(!rep.positivity_violated);
        assert!(rep.bound_exceeded);
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        let none = Params::new();
        // -2^2 parses as (-2)^2 = 4 under the declared precedence
        assert_eq!(p("-2^2").evaluate(0.0, &none).unwrap(), 4.0);
    }

    #[test]
    fn third_derivative_of_sigma_corpus() {
        let none = Params::new();
        let sigma = CoefficientFn::new("2+sin(x)", none).unwrap();
        // sigma''' = -cos(x)
        assert_relative_eq!(sigma.eval_d3(0.4).unwrap(), -(0.4f64.cos()), epsilon = 1e-12);
    }
}
