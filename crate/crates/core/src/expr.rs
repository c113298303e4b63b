//! Small arithmetic expression language for user-defined residuals.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! var   := 'x' index | 'y' index          (1-based)
//! func  := exp | log | sin | cos | tan | sqrt
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x1^2`
//! is `-(x1^2)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problem::ImplicitProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X(usize),
    Y(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {text:?} at offset {start}")))?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} at offset {i}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    m: usize,
    n: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn err(&self, what: &str) -> Error {
        let at = self.toks.get(self.pos).map_or(self.src.len(), |t| t.0);
        Error::Parse(format!("{what} at offset {at} in {:?}", self.src))
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
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
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn variable(&self, name: &str) -> Option<Result<Expr>> {
        let (kind, idx) = name.split_at(1);
        let k: usize = idx.parse().ok()?;
        let (limit, mk): (usize, fn(usize) -> Expr) = match kind {
            "x" => (self.m, Expr::X),
            "y" => (self.n, Expr::Y),
            _ => return None,
        };
        Some(if k >= 1 && k <= limit {
            Ok(mk(k - 1))
        } else {
            Err(Error::Parse(format!(
                "variable {name} out of range (have {kind}1..{kind}{limit})"
            )))
        })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                if let Some(v) = self.variable(&name) {
                    return v;
                }
                let f = Func::from_name(&name).ok_or_else(|| Error::Parse(format!("unknown name {name:?}")))?;
                if !self.eat('(') {
                    return Err(self.err(&format!("expected '(' after {name}")));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(Expr::Call(f, Box::new(arg)))
            }
            _ => Err(self.err("expected a number, variable, function or '('")),
        }
    }
}

impl Expr {
    /// Parse with variables `x1..xm` and `y1..yn`.
    pub fn parse(src: &str, m: usize, n: usize) -> Result<Self> {
        let mut p = Parser {
            toks: lex(src)?,
            pos: 0,
            m,
            n,
            src,
        };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X(i) => x[*i],
            Expr::Y(i) => y[*i],
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Expr::Pow(a, b) => {
                let (base, e) = (a.eval(x, y), b.eval(x, y));
                if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
                    base.powi(e as i32)
                } else {
                    base.powf(e)
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(x, y)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X(i) => write!(f, "x{}", i + 1),
            Expr::Y(i) => write!(f, "y{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", format!("{func:?}").to_lowercase()),
        }
    }
}

/// Residual `F = (e_1, ..., e_l)` from expression strings; Jacobians come
/// from finite differences. Returns the builder so callers can add domains.
pub fn inline_problem(
    name: &str,
    m: usize,
    n: usize,
    residuals: &[String],
    seed: (Vector, Vector),
) -> Result<crate::problem::ProblemBuilder> {
    if residuals.is_empty() {
        return Err(Error::Parse("inline problem needs at least one residual".into()));
    }
    let exprs: Vec<Expr> = residuals.iter().map(|s| Expr::parse(s, m, n)).collect::<Result<_>>()?;
    let l = exprs.len();
    Ok(ImplicitProblem::builder(name, m, n, l, move |x, y| {
        Vector::from_iterator(l, exprs.iter().map(|e| e.eval(x, y)))
    })
    .seed(seed.0, seed.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn ev(s: &str, x: &[f64], y: &[f64]) -> f64 {
        Expr::parse(s, x.len(), y.len()).unwrap().eval(&v(x), &v(y))
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), 7.0);
        assert_eq!(ev("(1 + 2) * 3", &[], &[]), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[], &[]), 512.0);
        assert_eq!(ev("-2 ^ 2", &[], &[]), -4.0);
        assert_eq!(ev("8 / 4 / 2", &[], &[]), 1.0);
        assert_eq!(ev("1 - 2 - 3", &[], &[]), -4.0);
        assert_eq!(ev("2e-1 * 10", &[], &[]), 2.0);
    }

    #[test]
    fn variables_and_functions() {
        assert_abs_diff_eq!(ev("x1 - 2*(exp(y1) - 1)", &[2.0], &[2f64.ln()]), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev("x1 - cos(y1)", &[1.0], &[0.0]), 0.0);
        assert_abs_diff_eq!(
            ev("sin(pi/2) + log(exp(3)) + sqrt(16) + tan(0)", &[], &[]),
            8.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(ev("x2 * y1", &[0.0, 3.0], &[2.0]), 6.0);
    }

    #[test]
    fn errors() {
        for bad in ["", "1 +", "x3", "y0", "foo(1)", "sin 1", "(1", "1)", "2 $ 3", "1..2"] {
            assert!(Expr::parse(bad, 2, 1).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn inline_problem_builds_and_solves() {
        let p = inline_problem("d", 1, 1, &["x1 - 2*(exp(y1) - 1)".to_string()], (v(&[0.0]), v(&[0.0])))
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(p.l(), 1);
        let j = p.jac_y(&v(&[0.0]), &v(&[0.0])).unwrap();
        assert_abs_diff_eq!(j[(0, 0)], -2.0, epsilon = 1e-7);
    }

    proptest! {
        #[test]
        fn printed_form_reparses_to_same_value(a in -10.0f64..10.0, b in 0.1f64..5.0, c in -3.0f64..3.0) {
            let src = format!("({a}) * x1 ^ 2 - y1 / ({b}) + sin(({c}) * x1)");
            let e = Expr::parse(&src, 1, 1).unwrap();
            let again = Expr::parse(&e.to_string(), 1, 1).unwrap();
            let (x, y) = (v(&[0.7]), v(&[-1.3]));
            prop_assert_eq!(e.eval(&x, &y), again.eval(&x, &y));
            let direct = a * 0.49 - (-1.3) / b + (c * 0.7).sin();
            prop_assert!((e.eval(&x, &y) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        }
    }
}
