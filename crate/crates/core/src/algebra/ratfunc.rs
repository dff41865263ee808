use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::gcd::gcd;
use super::poly::{MultiPoly, Q};
use super::registry::Registry;
use crate::error::{Error, Result};

/// Reduced quotient of polynomials. The denominator has integer content one
/// and a positive graded-lex leading coefficient, so equal functions have
/// identical representations.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: MultiPoly,
    den: MultiPoly,
}

impl Hash for RatFunc {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({})", self)
    }
}

impl From<MultiPoly> for RatFunc {
    fn from(p: MultiPoly) -> Self {
        let den = MultiPoly::one(p.registry());
        RatFunc { num: p, den }
    }
}

impl RatFunc {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: MultiPoly, den: MultiPoly) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return Self::zero(num.registry());
        }
        if let Some(c) = den.as_constant() {
            return RatFunc {
                num: num.scale(&c.recip()),
                den: MultiPoly::one(den.registry()),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        Self::fix_scale(num, den)
    }

    fn fix_scale(num: MultiPoly, den: MultiPoly) -> Self {
        let (c, den) = den.primitive();
        let num = if c.is_one() { num } else { num.scale(&c.recip()) };
        RatFunc { num, den }
    }

    pub fn zero(reg: &Registry) -> Self {
        MultiPoly::zero(reg).into()
    }

    pub fn one(reg: &Registry) -> Self {
        MultiPoly::one(reg).into()
    }

    pub fn constant(reg: &Registry, c: Q) -> Self {
        MultiPoly::constant(reg, c).into()
    }

    pub fn int(reg: &Registry, c: i64) -> Self {
        MultiPoly::int(reg, c).into()
    }

    pub fn var(reg: &Registry, idx: usize) -> Self {
        MultiPoly::var(reg, idx).into()
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn into_parts(self) -> (MultiPoly, MultiPoly) {
        (self.num, self.den)
    }

    pub fn registry(&self) -> &Registry {
        self.num.registry()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn depends_on(&self, v: usize) -> bool {
        self.num.depends_on(v) || self.den.depends_on(v)
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.registry());
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::fix_scale(self.den.clone(), self.num.clone()))
    }

    pub fn pow(&self, e: u32) -> Self {
        RatFunc {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    pub fn checked_div(&self, other: &RatFunc) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    pub fn derivative(&self, v: usize) -> Self {
        if self.den.is_one() || !self.den.depends_on(v) {
            return RatFunc {
                num: self.num.derivative(v),
                den: self.den.clone(),
            };
        }
        // (n/d)' = (n' d/g - n d'/g) / (d · d/g) with g = gcd(d, d')
        let dd = self.den.derivative(v);
        let g = gcd(&self.den, &dd);
        let dg = self.den.div_exact(&g).unwrap();
        let ddg = dd.div_exact(&g).unwrap();
        let num = &(&self.num.derivative(v) * &dg) - &(&self.num * &ddg);
        let den = &self.den * &dg;
        Self::normalized(num, den)
    }

    /// Substitute rational functions for variables (simultaneously).
    pub fn substitute(&self, bindings: &[(usize, RatFunc)]) -> Result<Self> {
        let n = subst_poly(&self.num, bindings);
        let d = subst_poly(&self.den, bindings);
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(n.checked_div(&d).unwrap())
    }

    pub fn substitute_named(&self, bindings: &[(&str, RatFunc)]) -> Result<Self> {
        let reg = self.registry();
        let b = bindings
            .iter()
            .map(|(n, v)| Ok((reg.require(n)?, v.clone())))
            .collect::<Result<Vec<_>>>()?;
        self.substitute(&b)
    }

    /// Substitute rational constants for some variables.
    pub fn eval_vars(&self, values: &[(usize, Q)]) -> Result<Self> {
        let mut n = self.num.clone();
        let mut d = self.den.clone();
        for (v, x) in values {
            n = n.eval_var(*v, x);
            d = d.eval_var(*v, x);
        }
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalized(n, d))
    }

    /// Value at a full rational point.
    pub fn eval_all(&self, values: &[Q]) -> Result<Q> {
        let d = self.den.eval_all(values);
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(self.num.eval_all(values) / d)
    }

    pub fn transfer(&self, reg: &Registry) -> Result<Self> {
        Ok(Self::normalized(
            self.num.transfer(reg)?,
            self.den.transfer(reg)?,
        ))
    }

    /// Canonical string rendering (same as `Display`).
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

fn subst_poly(p: &MultiPoly, bindings: &[(usize, RatFunc)]) -> RatFunc {
    let reg = p.registry();
    if bindings.iter().all(|(_, v)| v.is_polynomial()) {
        let b: Vec<(usize, MultiPoly)> = bindings.iter().map(|(i, v)| (*i, v.num.clone())).collect();
        return p.substitute(&b).into();
    }
    // group by powers of the substituted variables
    let mut acc = RatFunc::zero(reg);
    let mut cache: std::collections::HashMap<(usize, u16), RatFunc> = Default::default();
    let mut groups: std::collections::BTreeMap<Vec<u16>, MultiPoly> = Default::default();
    for (m, c) in p.terms() {
        let key: Vec<u16> = bindings.iter().map(|(v, _)| m.get(*v)).collect();
        let mut rest = m.clone();
        for (v, _) in bindings {
            rest = rest.with(*v, 0);
        }
        let e = groups.entry(key).or_insert_with(|| MultiPoly::zero(reg));
        *e = &*e + &MultiPoly::monomial(reg, rest, c.clone());
    }
    for (key, coeff) in groups {
        let mut t: RatFunc = coeff.into();
        for ((v, val), &e) in bindings.iter().zip(key.iter()) {
            if e > 0 {
                let pw = cache
                    .entry((*v, e))
                    .or_insert_with(|| val.pow(e as u32))
                    .clone();
                t = &t * &pw;
            }
        }
        acc = &acc + &t;
    }
    acc
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return num.into();
            }
            return RatFunc::normalized(num, self.den.clone());
        }
        if self.den.is_one() {
            return RatFunc {
                num: &(&self.num * &rhs.den) + &rhs.num,
                den: rhs.den.clone(),
            };
        }
        if rhs.den.is_one() {
            return RatFunc {
                num: &self.num + &(&rhs.num * &self.den),
                den: self.den.clone(),
            };
        }
        let g = gcd(&self.den, &rhs.den);
        let b1 = self.den.div_exact(&g).unwrap();
        let d1 = rhs.den.div_exact(&g).unwrap();
        let num = &(&self.num * &d1) + &(&rhs.num * &b1);
        if num.is_zero() {
            return RatFunc::zero(self.registry());
        }
        if g.is_one() {
            return RatFunc::fix_scale(num, &self.den * &rhs.den);
        }
        // den = b1·d1·g; only factors of g can cancel
        let g2 = gcd(&num, &g);
        let (num, dr) = if g2.is_one() {
            (num, rhs.den.clone())
        } else {
            (num.div_exact(&g2).unwrap(), rhs.den.div_exact(&g2).unwrap())
        };
        RatFunc::fix_scale(num, &b1 * &dr)
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero(self.registry());
        }
        if let Some(c) = self.as_constant() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.as_constant() {
            return self.scale(&c);
        }
        let (a, d) = cancel(&self.num, &rhs.den);
        let (c, b) = cancel(&rhs.num, &self.den);
        let num = &a * &c;
        let den = &b * &d;
        if den.is_one() {
            return num.into();
        }
        RatFunc::fix_scale(num, den)
    }
}

/// Remove the common factor of `a` and `b`.
fn cancel(a: &MultiPoly, b: &MultiPoly) -> (MultiPoly, MultiPoly) {
    if b.is_one() || a.is_constant() {
        return (a.clone(), b.clone());
    }
    let g = gcd(a, b);
    if g.is_one() {
        (a.clone(), b.clone())
    } else {
        (a.div_exact(&g).unwrap(), b.div_exact(&g).unwrap())
    }
}

impl<'a> Div<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    /// Panics on division by zero; see [`RatFunc::checked_div`].
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $f(self, rhs: RatFunc) -> RatFunc {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $f(self, rhs: &RatFunc) -> RatFunc {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.nterms() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        let single_power = self.den.nterms() == 1
            && self.den.lc().is_one()
            && self
                .den
                .leading()
                .map(|(m, _)| m.exps().iter().filter(|&&e| e > 0).count() == 1)
                .unwrap_or(false);
        if single_power {
            write!(f, "/{}", self.den)
        } else {
            write!(f, "/({})", self.den)
        }
    }
}

impl RatFunc {
    pub fn is_negative_constant(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_negative())
    }
}
