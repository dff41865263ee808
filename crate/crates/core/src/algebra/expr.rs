//! Expression grammar shared by job files and tests:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | name | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::Zero;

use super::poly::{MultiPoly, Q};
use super::ratfunc::RatFunc;
use super::registry::Registry;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Name(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < b.len() && (b[i] as char).is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Num(s[st..i].parse().unwrap()), st));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Name(s[st..i].to_string()), st));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(Error::Parse {
                offset: i,
                message: format!("unexpected character `{}`", c),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    reg: &'a Registry,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            message: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<RatFunc> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { &acc + &t } else { &acc - &t };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFunc> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let at = self.offset();
            let t = self.unary()?;
            if c == '*' {
                acc = &acc * &t;
            } else {
                if t.is_zero() {
                    return Err(Error::Parse {
                        offset: at,
                        message: "division by zero".into(),
                    });
                }
                acc = &acc / &t;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RatFunc> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatFunc> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| Error::Parse {
                            offset: self.offset(),
                            message: "exponent too large".into(),
                        })?;
                    if let Some(Tok::Op('^')) = self.peek() {
                        return self.err("chained powers need parentheses");
                    }
                    return Ok(base.pow(e));
                }
                _ => return self.err("expected a non-negative integer exponent"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFunc> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(RatFunc::constant(self.reg, Q::from_integer(n)))
            }
            Some(Tok::Name(name)) => {
                let Some(idx) = self.reg.index(&name) else {
                    return Err(Error::Parse {
                        offset: self.offset(),
                        message: format!("undeclared name `{}`", name),
                    });
                };
                self.pos += 1;
                Ok(RatFunc::var(self.reg, idx))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => self.err("expected `)`"),
                }
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected `{}`", c)),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parse a rational expression over the names of `reg`.
pub fn parse_ratfunc(s: &str, reg: &Registry) -> Result<RatFunc> {
    let toks = lex(s)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: s.len(),
        reg,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parse an expression that must be a polynomial.
pub fn parse_poly(s: &str, reg: &Registry) -> Result<MultiPoly> {
    let f = parse_ratfunc(s, reg)?;
    if !f.is_polynomial() {
        return Err(Error::Parse {
            offset: 0,
            message: format!("`{}` is not a polynomial", s.trim()),
        });
    }
    Ok(f.num().clone())
}

/// Exponent `b + Σ a_k·param_k` with rational `a_k, b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    poly: MultiPoly,
}

impl Affine {
    pub fn new(poly: MultiPoly) -> Result<Self> {
        let reg = poly.registry();
        for (m, _) in poly.terms() {
            if m.degree() > 1 {
                return Err(Error::InvalidInput(format!(
                    "exponent `{}` is not affine in the parameters",
                    poly
                )));
            }
            if m.exps().iter().take(reg.n_z()).any(|&e| e > 0) {
                return Err(Error::InvalidInput(format!(
                    "exponent `{}` depends on an integration variable",
                    poly
                )));
            }
        }
        Ok(Affine { poly })
    }

    pub fn parse(s: &str, reg: &Registry) -> Result<Self> {
        let f = parse_ratfunc(s, reg)?;
        if !f.is_polynomial() {
            return Err(Error::InvalidInput(format!(
                "exponent `{}` is not affine in the parameters",
                s.trim()
            )));
        }
        Self::new(f.num().clone())
    }

    pub fn constant(reg: &Registry, c: Q) -> Self {
        Affine {
            poly: MultiPoly::constant(reg, c),
        }
    }

    pub fn as_poly(&self) -> &MultiPoly {
        &self.poly
    }

    pub fn as_ratfunc(&self) -> RatFunc {
        self.poly.clone().into()
    }

    /// Integer or zero constant exponents are excluded by the genericity
    /// assumption.
    pub fn is_numeric(&self) -> bool {
        self.poly.is_constant()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn neg(&self) -> Self {
        Affine { poly: -&self.poly }
    }

    pub fn add(&self, o: &Affine) -> Self {
        Affine {
            poly: &self.poly + &o.poly,
        }
    }

    pub fn eval(&self, values: &[Q]) -> Q {
        self.poly.eval_all(values)
    }

    pub fn constant_term(&self) -> Q {
        self.poly
            .terms()
            .find(|(m, _)| m.is_one())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    pub fn transfer(&self, reg: &Registry) -> Result<Self> {
        Ok(Affine {
            poly: self.poly.transfer(reg)?,
        })
    }
}

impl std::fmt::Display for Affine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.poly)
    }
}
