use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::monomial::Monomial;
use super::registry::{same_registry, Registry};
use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Clone)]
pub struct MultiPoly {
    reg: Registry,
    terms: BTreeMap<Monomial, Q>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        same_registry(&self.reg, &other.reg) && self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl Hash for MultiPoly {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.terms.len().hash(state);
        for (m, c) in &self.terms {
            m.hash(state);
            c.hash(state);
        }
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", self)
    }
}

impl MultiPoly {
    pub fn zero(reg: &Registry) -> Self {
        MultiPoly {
            reg: reg.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(reg: &Registry) -> Self {
        Self::constant(reg, Q::one())
    }

    pub fn constant(reg: &Registry, c: Q) -> Self {
        let mut p = Self::zero(reg);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(reg.len()), c);
        }
        p
    }

    pub fn int(reg: &Registry, c: i64) -> Self {
        Self::constant(reg, q(c))
    }

    pub fn var(reg: &Registry, idx: usize) -> Self {
        Self::monomial(reg, Monomial::var(reg.len(), idx, 1), Q::one())
    }

    pub fn var_named(reg: &Registry, name: &str) -> Result<Self> {
        Ok(Self::var(reg, reg.require(name)?))
    }

    pub fn monomial(reg: &Registry, m: Monomial, c: Q) -> Self {
        assert_eq!(m.len(), reg.len(), "monomial length does not match registry");
        let mut p = Self::zero(reg);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Q)>>(reg: &Registry, it: I) -> Self {
        let mut p = Self::zero(reg);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub(crate) fn from_map_unchecked(reg: &Registry, terms: BTreeMap<Monomial, Q>) -> Self {
        MultiPoly {
            reg: reg.clone(),
            terms,
        }
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Leading term in graded lexicographic order.
    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.last_key_value()
    }

    pub fn lc(&self) -> Q {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.get(v) as u32).max().unwrap_or(0)
    }

    pub fn depends_on(&self, v: usize) -> bool {
        self.terms.keys().any(|m| m.get(v) > 0)
    }

    pub fn vars_present(&self) -> Vec<bool> {
        let mut out = vec![false; self.reg.len()];
        for m in self.terms.keys() {
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    out[i] = true;
                }
            }
        }
        out
    }

    /// Componentwise minimum of all exponent vectors.
    pub fn min_monomial(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(self.reg.len()),
            Some(first) => it.fold(first.clone(), |acc, m| acc.gcd(m)),
        }
    }

    fn check(&self, other: &MultiPoly) {
        assert!(
            same_registry(&self.reg, &other.reg),
            "polynomials from different registries"
        );
    }

    pub fn checked_add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        if !same_registry(&self.reg, &other.reg) {
            return Err(Error::RegistryMismatch);
        }
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        if !same_registry(&self.reg, &other.reg) {
            return Err(Error::RegistryMismatch);
        }
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        if !same_registry(&self.reg, &other.reg) {
            return Err(Error::RegistryMismatch);
        }
        Ok(self * other)
    }

    pub fn scale(&self, c: &Q) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(&self.reg);
        }
        MultiPoly {
            reg: self.reg.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial, c: &Q) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(&self.reg);
        }
        MultiPoly {
            reg: self.reg.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.mul(mono), v * c))
                .collect(),
        }
    }

    /// Divide every term by `mono`; every term must be divisible.
    pub fn div_monomial(&self, mono: &Monomial) -> MultiPoly {
        MultiPoly {
            reg: self.reg.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (mono.quotient_of(m), v.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut result = Self::one(&self.reg);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn derivative(&self, v: usize) -> MultiPoly {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.get(v);
            if e > 0 {
                out.insert(m.with(v, e - 1), c * q(e as i64));
            }
        }
        Self::from_map_unchecked(&self.reg, out)
    }

    /// Coefficients with respect to `v`, index = power of `v`.
    pub fn coeffs_in(&self, v: usize) -> Vec<MultiPoly> {
        let deg = self.degree_in(v) as usize;
        let mut out: Vec<BTreeMap<Monomial, Q>> = vec![BTreeMap::new(); deg + 1];
        if self.is_zero() {
            return vec![];
        }
        for (m, c) in &self.terms {
            out[m.get(v) as usize].insert(m.with(v, 0), c.clone());
        }
        out.into_iter()
            .map(|t| Self::from_map_unchecked(&self.reg, t))
            .collect()
    }

    pub fn from_coeffs_in(reg: &Registry, v: usize, coeffs: &[MultiPoly]) -> MultiPoly {
        let mut out = BTreeMap::new();
        for (k, c) in coeffs.iter().enumerate() {
            for (m, x) in &c.terms {
                debug_assert_eq!(m.get(v), 0);
                out.insert(m.with(v, k as u16), x.clone());
            }
        }
        Self::from_map_unchecked(reg, out)
    }

    /// Leading coefficient with respect to `v`.
    pub fn lc_in(&self, v: usize) -> MultiPoly {
        self.coeffs_in(v).pop().unwrap_or_else(|| Self::zero(&self.reg))
    }

    /// Substitute a rational value for one variable.
    pub fn eval_var(&self, v: usize, value: &Q) -> MultiPoly {
        let mut pows: Vec<Q> = vec![Q::one()];
        let mut p = Self::zero(&self.reg);
        for (m, c) in &self.terms {
            let e = m.get(v) as usize;
            while pows.len() <= e {
                let next = pows.last().unwrap() * value;
                pows.push(next);
            }
            p.add_term(m.with(v, 0), c * &pows[e]);
        }
        p
    }

    /// Substitute rational values for all variables.
    pub fn eval_all(&self, values: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(values[i].clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Simultaneous substitution of polynomials for variables.
    pub fn substitute(&self, bindings: &[(usize, MultiPoly)]) -> MultiPoly {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut cache: HashMap<(usize, u16), MultiPoly> = HashMap::new();
        let mut acc = Self::zero(&self.reg);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let mut t = Self::one(&self.reg);
            for (v, val) in bindings {
                let e = m.get(*v);
                if e > 0 {
                    rest = rest.with(*v, 0);
                    let pw = cache
                        .entry((*v, e))
                        .or_insert_with(|| val.pow(e as u32))
                        .clone();
                    t = &t * &pw;
                }
            }
            acc = &acc + &t.mul_monomial(&rest, c);
        }
        acc
    }

    /// Rational content: positive, with `self / content` having coprime
    /// integer coefficients.
    pub fn content(&self) -> Q {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Q::one();
        }
        Q::new(num, den)
    }

    /// `(c, p)` with `self = c·p`, `p` integral, content one, positive
    /// graded-lex leading coefficient.
    pub fn primitive(&self) -> (Q, MultiPoly) {
        if self.is_zero() {
            return (Q::one(), self.clone());
        }
        let mut c = self.content();
        if self.lc().is_negative() {
            c = -c;
        }
        let inv = c.recip();
        (c, self.scale(&inv))
    }

    /// Exact quotient `self / b`, or `None` if `b` does not divide `self`.
    pub fn div_exact(&self, b: &MultiPoly) -> Option<MultiPoly> {
        self.check(b);
        assert!(!b.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(self.clone());
        }
        if let Some(c) = b.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (lmb, lcb) = b.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        if b.nterms() == 1 {
            if !self.terms.keys().all(|m| lmb.divides(m)) {
                return None;
            }
            let inv = lcb.recip();
            return Some(MultiPoly {
                reg: self.reg.clone(),
                terms: self
                    .terms
                    .iter()
                    .map(|(m, c)| (lmb.quotient_of(m), c * &inv))
                    .collect(),
            });
        }
        let inv = lcb.recip();
        let mut r = self.terms.clone();
        let mut quot = BTreeMap::new();
        while let Some((m, c)) = r.last_key_value() {
            if !lmb.divides(m) {
                return None;
            }
            let tm = lmb.quotient_of(m);
            let tc = c * &inv;
            for (bm, bc) in &b.terms {
                let key = bm.mul(&tm);
                let delta = bc * &tc;
                use std::collections::btree_map::Entry;
                match r.entry(key) {
                    Entry::Vacant(v) => {
                        v.insert(-delta);
                    }
                    Entry::Occupied(mut o) => {
                        *o.get_mut() -= delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                }
            }
            quot.insert(tm, tc);
        }
        Some(Self::from_map_unchecked(&self.reg, quot))
    }

    /// Re-express in another registry by matching variable names.
    pub fn transfer(&self, reg: &Registry) -> Result<MultiPoly> {
        if same_registry(&self.reg, reg) {
            return Ok(MultiPoly {
                reg: reg.clone(),
                terms: self.terms.clone(),
            });
        }
        let present = self.vars_present();
        let mut map = vec![usize::MAX; self.reg.len()];
        for (i, used) in present.iter().enumerate() {
            if *used {
                map[i] = reg.require(self.reg.name(i))?;
            }
        }
        let mut out = Self::zero(reg);
        for (m, c) in &self.terms {
            let mut nm = Monomial::one(reg.len());
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    nm.0[map[i]] = e;
                }
            }
            out.add_term(nm, c.clone());
        }
        Ok(out)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Q) -> Q) -> MultiPoly {
        let mut out = Self::zero(&self.reg);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    fn all_integer(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check(rhs);
        let (big, small) = if self.nterms() >= rhs.nterms() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.check(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check(rhs);
        if self.is_zero() || rhs.is_zero() {
            return MultiPoly::zero(&self.reg);
        }
        if let Some(c) = self.as_constant() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.as_constant() {
            return self.scale(&c);
        }
        if self.all_integer() && rhs.all_integer() {
            let mut acc: HashMap<Monomial, BigInt> =
                HashMap::with_capacity(self.nterms() * rhs.nterms());
            for (ma, ca) in &self.terms {
                for (mb, cb) in &rhs.terms {
                    let e = acc.entry(ma.mul(mb)).or_insert_with(BigInt::zero);
                    *e += ca.numer() * cb.numer();
                }
            }
            let terms = acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m, Q::from_integer(c)))
                .collect();
            return MultiPoly::from_map_unchecked(&self.reg, terms);
        }
        let mut acc: HashMap<Monomial, Q> = HashMap::with_capacity(self.nterms() * rhs.nterms());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let e = acc.entry(ma.mul(mb)).or_insert_with(Q::zero);
                *e += ca * cb;
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        MultiPoly::from_map_unchecked(&self.reg, terms)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            reg: self.reg.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: &MultiPoly) -> MultiPoly {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

pub(crate) fn fmt_rational(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub(crate) fn fmt_monomial(reg: &Registry, m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exps().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(reg.name(i).to_string()),
            _ => parts.push(format!("{}^{}", reg.name(i), e)),
        }
    }
    parts.join("*")
}

/// Canonical form: terms in descending graded-lex order, no spaces.
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { "-" } else { "+" })?;
            }
            first = false;
            let a = c.abs();
            if m.is_one() {
                f.write_str(&fmt_rational(&a))?;
            } else if a.is_one() {
                f.write_str(&fmt_monomial(&self.reg, m))?;
            } else {
                write!(f, "{}*{}", fmt_rational(&a), fmt_monomial(&self.reg, m))?;
            }
        }
        Ok(())
    }
}
