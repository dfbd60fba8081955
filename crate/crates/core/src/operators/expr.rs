//! A small expression DSL for user-defined symbols: expressions over the
//! variables `z` and `t` with complex literals, the arithmetic operators and
//! a handful of functions, plus symbolic differentiation in `z`.

use crate::bergman::ComplexFunction;
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Z,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Conj,
    Abs,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Conj => "conj",
            Func::Abs => "abs",
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(Complex64),
    Var(Variable),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, z: Complex64, t: Complex64) -> Complex64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Variable::Z) => z,
            Expr::Var(Variable::T) => t,
            Expr::Neg(a) => -a.eval(z, t),
            Expr::Add(a, b) => a.eval(z, t) + b.eval(z, t),
            Expr::Sub(a, b) => a.eval(z, t) - b.eval(z, t),
            Expr::Mul(a, b) => a.eval(z, t) * b.eval(z, t),
            Expr::Div(a, b) => a.eval(z, t) / b.eval(z, t),
            Expr::Pow(a, b) => {
                let base = a.eval(z, t);
                let exp = b.eval(z, t);
                if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= 64.0 {
                    // Integer powers avoid the principal-branch cut entirely.
                    let n = exp.re as i32;
                    base.powi(n)
                } else {
                    base.powc(exp)
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(z, t);
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Conj => v.conj(),
                    Func::Abs => Complex64::new(v.norm(), 0.0),
                }
            }
        }
    }

    pub fn uses_z(&self) -> bool {
        self.uses(Variable::Z)
    }

    pub fn uses_t(&self) -> bool {
        self.uses(Variable::T)
    }

    fn uses(&self, var: Variable) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.uses(var) || b.uses(var),
        }
    }

    /// Symbolic derivative with respect to `z`. Fails on the non-analytic
    /// operations `conj` and `abs`.
    pub fn diff_z(&self) -> Result<Expr> {
        let d = |e: &Expr| e.diff_z();
        Ok(match self {
            Expr::Num(_) | Expr::Var(Variable::T) => Expr::Num(Complex64::new(0.0, 0.0)),
            Expr::Var(Variable::Z) => Expr::Num(Complex64::new(1.0, 0.0)),
            Expr::Neg(a) => Expr::Neg(Box::new(d(a)?)),
            Expr::Add(a, b) => Expr::Add(Box::new(d(a)?), Box::new(d(b)?)),
            Expr::Sub(a, b) => Expr::Sub(Box::new(d(a)?), Box::new(d(b)?)),
            Expr::Mul(a, b) => Expr::Add(
                Box::new(Expr::Mul(Box::new(d(a)?), b.clone())),
                Box::new(Expr::Mul(a.clone(), Box::new(d(b)?))),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(Expr::Sub(
                    Box::new(Expr::Mul(Box::new(d(a)?), b.clone())),
                    Box::new(Expr::Mul(a.clone(), Box::new(d(b)?))),
                )),
                Box::new(Expr::Mul(b.clone(), b.clone())),
            ),
            Expr::Pow(a, b) => {
                if !b.uses_z() {
                    // b constant in z: b·a^{b−1}·a'
                    Expr::Mul(
                        Box::new(Expr::Mul(
                            b.clone(),
                            Box::new(Expr::Pow(
                                a.clone(),
                                Box::new(Expr::Sub(
                                    b.clone(),
                                    Box::new(Expr::Num(Complex64::new(1.0, 0.0))),
                                )),
                            )),
                        )),
                        Box::new(d(a)?),
                    )
                } else {
                    // a^b · (b'·log a + b·a'/a)
                    Expr::Mul(
                        Box::new(self.clone()),
                        Box::new(Expr::Add(
                            Box::new(Expr::Mul(
                                Box::new(d(b)?),
                                Box::new(Expr::Call(Func::Log, a.clone())),
                            )),
                            Box::new(Expr::Div(
                                Box::new(Expr::Mul(b.clone(), Box::new(d(a)?))),
                                a.clone(),
                            )),
                        )),
                    )
                }
            }
            Expr::Call(Func::Exp, a) => {
                Expr::Mul(Box::new(self.clone()), Box::new(d(a)?))
            }
            Expr::Call(Func::Log, a) => Expr::Div(Box::new(d(a)?), a.clone()),
            Expr::Call(Func::Sqrt, a) => Expr::Div(
                Box::new(d(a)?),
                Box::new(Expr::Mul(
                    Box::new(Expr::Num(Complex64::new(2.0, 0.0))),
                    Box::new(Expr::Call(Func::Sqrt, a.clone())),
                )),
            ),
            Expr::Call(f @ (Func::Conj | Func::Abs), _) => {
                return Err(Error::Domain(format!(
                    "{} is not analytic; cannot differentiate in z",
                    f.name()
                )))
            }
        })
    }

    /// Warnings about constructs whose principal-branch evaluation may be
    /// discontinuous: `^` with a non-constant complex exponent on a base
    /// that may cross the negative real axis.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_warnings(&mut out);
        out
    }

    fn collect_warnings(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_warnings(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_warnings(out);
                b.collect_warnings(out);
            }
            Expr::Pow(a, b) => {
                if (b.uses_z() || b.uses_t()) && (a.uses_z() || a.uses_t()) {
                    out.push(
                        "non-constant exponent: principal-branch power may jump where the base crosses the negative real axis".to_string(),
                    );
                }
                a.collect_warnings(out);
                b.collect_warnings(out);
            }
        }
    }

    /// Bind `t` and view the expression as a function of `z`. The symbolic
    /// `z`-derivative is attached when the expression is analytic.
    pub fn bind_t(&self, t: f64) -> ComplexFunction {
        let expr = self.clone();
        let tc = Complex64::new(t, 0.0);
        let mut f = ComplexFunction::new(move |z| expr.eval(z, tc));
        if let Ok(dz) = self.diff_z() {
            f = f.with_derivative(move |z| dz.eval(z, tc));
        }
        f
    }
}

/// Parse an expression over `z` and `t`.
pub fn parse_expression(text: &str) -> Result<Expr> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.parse_expr()?;
    if parser.pos != parser.tokens.len() {
        let (_, at) = parser.tokens[parser.pos];
        return Err(Error::Parse {
            position: at,
            message: "unexpected trailing input".into(),
        });
    }
    Ok(expr)
}

/// Parse an expression that depends on `z` only, producing an evaluable
/// function. Expressions over `t` belong to family constructors, which bind
/// `t` per member.
pub fn parse_symbol_expression(text: &str) -> Result<ComplexFunction> {
    let expr = parse_expression(text)?;
    if expr.uses_t() {
        return Err(Error::Domain(
            "expression depends on t; bind it through a family constructor".into(),
        ));
    }
    Ok(expr.bind_t(0.0))
}

#[derive(Debug, Clone, PartialEq)]
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
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' => {
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
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| Error::Parse {
                    position: start,
                    message: format!("invalid number literal '{s}'"),
                })?;
                out.push((Tok::Num(v), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            other => {
                return Err(Error::Parse {
                    position: i,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or_else(|| self.tokens.last().map(|(_, p)| p + 1).unwrap_or(0))
    }

    fn advance(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let at = self.here();
        match self.advance() {
            Some(t) if t == tok => Ok(()),
            _ => Err(Error::Parse {
                position: at,
                message: format!("expected {what}"),
            }),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.advance();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.parse_term()?));
                }
                Some(Tok::Minus) => {
                    self.advance();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.parse_term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.advance();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.parse_unary()?));
                }
                Some(Tok::Slash) => {
                    self.advance();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.parse_unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.advance();
            return Ok(Expr::Neg(Box::new(self.parse_unary()?)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr> {
        let base = self.parse_atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.advance();
            // Right-associative; the exponent may itself be negated.
            let exp = self.parse_unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let at = self.here();
        match self.advance() {
            Some(Tok::Num(v)) => Ok(Expr::Num(Complex64::new(v, 0.0))),
            Some(Tok::LParen) => {
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "z" => Ok(Expr::Var(Variable::Z)),
                "t" => Ok(Expr::Var(Variable::T)),
                "i" => Ok(Expr::Num(Complex64::new(0.0, 1.0))),
                "pi" => Ok(Expr::Num(Complex64::new(std::f64::consts::PI, 0.0))),
                "e" => Ok(Expr::Num(Complex64::new(std::f64::consts::E, 0.0))),
                "exp" | "log" | "sqrt" | "conj" | "abs" => {
                    let f = match name.as_str() {
                        "exp" => Func::Exp,
                        "log" => Func::Log,
                        "sqrt" => Func::Sqrt,
                        "conj" => Func::Conj,
                        _ => Func::Abs,
                    };
                    self.expect(Tok::LParen, "'(' after function name")?;
                    let arg = self.parse_expr()?;
                    self.expect(Tok::RParen, "closing parenthesis")?;
                    Ok(Expr::Call(f, Box::new(arg)))
                }
                other => Err(Error::Parse {
                    position: at,
                    message: format!("unknown identifier '{other}'"),
                }),
            },
            _ => Err(Error::Parse {
                position: at,
                message: "expected a number, identifier or parenthesized expression".into(),
            }),
        }
    }
}
