use std::fmt;

use super::gcd::gcd;
use super::poly::{MultiPoly, Q};
use super::ratfunc::RatFunc;
use super::registry::Registry;
use crate::error::{Error, Result};

/// Polynomial in one registry variable whose coefficients are rational
/// functions of all other names.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    reg: Registry,
    var: usize,
    coeffs: Vec<RatFunc>,
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UniPoly[{}]({})", self.reg.name(self.var), self.to_ratfunc())
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ratfunc())
    }
}

impl UniPoly {
    pub fn zero(reg: &Registry, var: usize) -> Self {
        UniPoly {
            reg: reg.clone(),
            var,
            coeffs: vec![],
        }
    }

    pub fn constant(reg: &Registry, var: usize, c: RatFunc) -> Self {
        Self::from_coeffs(reg, var, vec![c])
    }

    pub fn one(reg: &Registry, var: usize) -> Self {
        Self::constant(reg, var, RatFunc::one(reg))
    }

    pub fn x(reg: &Registry, var: usize) -> Self {
        Self::from_coeffs(reg, var, vec![RatFunc::zero(reg), RatFunc::one(reg)])
    }

    pub fn from_coeffs(reg: &Registry, var: usize, mut coeffs: Vec<RatFunc>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        debug_assert!(coeffs.iter().all(|c| !c.depends_on(var)));
        UniPoly {
            reg: reg.clone(),
            var,
            coeffs,
        }
    }

    pub fn from_poly(p: &MultiPoly, var: usize) -> Self {
        let coeffs = p.coeffs_in(var).into_iter().map(RatFunc::from).collect();
        Self::from_coeffs(p.registry(), var, coeffs)
    }

    /// View a rational function whose denominator is free of `var`.
    pub fn from_ratfunc(f: &RatFunc, var: usize) -> Option<Self> {
        if f.den().depends_on(var) {
            return None;
        }
        let den: RatFunc = f.den().clone().into();
        let inv = den.recip().ok()?;
        Some(Self::from_poly(f.num(), var).scale(&inv))
    }

    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    pub fn var(&self) -> usize {
        self.var
    }

    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> RatFunc {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| RatFunc::zero(&self.reg))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn degree(&self) -> usize {
        self.deg().unwrap_or(0)
    }

    pub fn lc(&self) -> RatFunc {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(|| RatFunc::zero(&self.reg))
    }

    pub fn scale(&self, c: &RatFunc) -> Self {
        if c.is_zero() {
            return Self::zero(&self.reg, self.var);
        }
        UniPoly {
            reg: self.reg.clone(),
            var: self.var,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![RatFunc::zero(&self.reg); k];
        coeffs.extend(self.coeffs.iter().cloned());
        UniPoly {
            reg: self.reg.clone(),
            var: self.var,
            coeffs,
        }
    }

    pub fn add(&self, o: &UniPoly) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n)
            .map(|k| match (self.coeffs.get(k), o.coeffs.get(k)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Self::from_coeffs(&self.reg, self.var, coeffs)
    }

    pub fn neg(&self) -> Self {
        UniPoly {
            reg: self.reg.clone(),
            var: self.var,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, o: &UniPoly) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &UniPoly) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.reg, self.var);
        }
        let mut coeffs = vec![RatFunc::zero(&self.reg); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] = &coeffs[i + j] + &(a * b);
                }
            }
        }
        Self::from_coeffs(&self.reg, self.var, coeffs)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one(&self.reg, self.var);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(&Q::from_integer((k as i64).into())))
            .collect();
        Self::from_coeffs(&self.reg, self.var, coeffs)
    }

    /// Quotient and remainder; panics if `b` is zero.
    pub fn divrem(&self, b: &UniPoly) -> (UniPoly, UniPoly) {
        let db = b.deg().expect("division by zero polynomial");
        let mut r = self.coeffs.clone();
        if r.len() <= db {
            return (Self::zero(&self.reg, self.var), self.clone());
        }
        let inv = b.lc().recip().unwrap();
        let mut q = vec![RatFunc::zero(&self.reg); r.len() - db];
        for k in (0..q.len()).rev() {
            let c = &r[k + db] * &inv;
            if c.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate().take(db) {
                if !bj.is_zero() {
                    r[k + j] = &r[k + j] - &(&c * bj);
                }
            }
            r[k + db] = RatFunc::zero(&self.reg);
            q[k] = c;
        }
        r.truncate(db);
        (
            Self::from_coeffs(&self.reg, self.var, q),
            Self::from_coeffs(&self.reg, self.var, r),
        )
    }

    pub fn rem(&self, b: &UniPoly) -> UniPoly {
        self.divrem(b).1
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lc().recip().unwrap())
    }

    /// Extended Euclid: `(g, s, t)` with `s·a + t·b = g`, `g` monic
    /// (or zero when both inputs vanish).
    pub fn ext_euclid(a: &UniPoly, b: &UniPoly) -> (UniPoly, UniPoly, UniPoly) {
        let reg = &a.reg;
        let v = a.var;
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (Self::one(reg, v), Self::zero(reg, v));
        let (mut t0, mut t1) = (Self::zero(reg, v), Self::one(reg, v));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s2 = s0.sub(&q.mul(&s1));
            let t2 = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.lc().recip().unwrap();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    pub fn gcd(a: &UniPoly, b: &UniPoly) -> UniPoly {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        while !r1.is_zero() {
            let r = r0.rem(&r1);
            r0 = r1;
            r1 = r;
        }
        r0.monic()
    }

    /// Inverse of `self` modulo `m`, of degree below `deg m`.
    pub fn inverse_mod(&self, m: &UniPoly) -> Result<UniPoly> {
        let a = self.rem(m);
        let (g, s, _) = Self::ext_euclid(&a, m);
        if g.deg() != Some(0) {
            return Err(Error::NotCoprime(format!(
                "{} and {} share the factor {}",
                self, m, g
            )));
        }
        Ok(s.rem(m))
    }

    pub fn eval(&self, x: &RatFunc) -> RatFunc {
        let mut acc = RatFunc::zero(&self.reg);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// `(P, L)` with `self = P / L`, `P` a polynomial and `L` free of the
    /// variable.
    pub fn cleared(&self) -> (MultiPoly, MultiPoly) {
        let mut l = MultiPoly::one(&self.reg);
        for c in &self.coeffs {
            if !c.den().is_one() {
                let g = gcd(&l, c.den());
                l = &l * &c.den().div_exact(&g).unwrap();
            }
        }
        let mut parts = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            if c.is_zero() {
                parts.push(MultiPoly::zero(&self.reg));
            } else {
                parts.push(c.num() * &l.div_exact(c.den()).unwrap());
            }
        }
        (MultiPoly::from_coeffs_in(&self.reg, self.var, &parts), l)
    }

    pub fn to_ratfunc(&self) -> RatFunc {
        let (p, l) = self.cleared();
        RatFunc::new(p, l).unwrap()
    }

    /// Primitive polynomial in Q[all names] with the same roots in `var`.
    pub fn to_primitive_poly(&self) -> MultiPoly {
        let (p, _) = self.cleared();
        let c = content_in(&p, self.var);
        super::gcd::normalize(&p.div_exact(&c).unwrap())
    }
}

/// Content with respect to `v`: gcd of the coefficients of powers of `v`.
pub fn content_in(p: &MultiPoly, v: usize) -> MultiPoly {
    let mut g = MultiPoly::zero(p.registry());
    for c in p.coeffs_in(v) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    if g.is_zero() {
        MultiPoly::one(p.registry())
    } else {
        g
    }
}

/// Primitive part with respect to `v`, normalized.
pub fn primitive_in(p: &MultiPoly, v: usize) -> MultiPoly {
    let c = content_in(p, v);
    super::gcd::normalize(&p.div_exact(&c).unwrap())
}

/// Division with remainder in `var`, treating the other names as field
/// elements.
pub fn poly_divmod(a: &MultiPoly, b: &MultiPoly, var: usize) -> Result<(RatFunc, RatFunc)> {
    if b.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let (q, r) = UniPoly::from_poly(a, var).divrem(&UniPoly::from_poly(b, var));
    Ok((q.to_ratfunc(), r.to_ratfunc()))
}

/// Yun's squarefree decomposition in `var`; factors are primitive in `var`
/// and normalized, the unit (content in `var`) is dropped.
pub fn squarefree_factor(p: &MultiPoly, var: usize) -> Vec<(MultiPoly, u32)> {
    assert!(!p.is_zero(), "squarefree factorization of zero");
    let a = primitive_in(p, var);
    if a.degree_in(var) == 0 {
        return vec![];
    }
    let b = a.derivative(var);
    let c = gcd(&a, &b);
    let mut w = a.div_exact(&c).unwrap();
    let mut y = b.div_exact(&c).unwrap();
    let mut z = &y - &w.derivative(var);
    let mut out = Vec::new();
    let mut i = 1;
    while w.degree_in(var) > 0 {
        let g = gcd(&w, &z);
        if g.degree_in(var) > 0 {
            out.push((g.clone(), i));
        }
        w = w.div_exact(&g).unwrap();
        y = z.div_exact(&g).unwrap();
        z = &y - &w.derivative(var);
        i += 1;
    }
    out
}

/// Refine squarefree polynomials into a pairwise coprime family generating
/// the same factors, each normalized, primitive and of positive degree in
/// `var`. The result is sorted by canonical string.
pub fn coprime_basis(polys: &[MultiPoly], var: usize) -> Vec<MultiPoly> {
    let mut basis: Vec<MultiPoly> = Vec::new();
    for p in polys {
        if p.degree_in(var) == 0 {
            continue;
        }
        let mut pending = vec![primitive_in(p, var)];
        while let Some(mut a) = pending.pop() {
            if a.degree_in(var) == 0 {
                continue;
            }
            let mut i = 0;
            while i < basis.len() {
                let g = gcd(&a, &basis[i]);
                if g.degree_in(var) > 0 {
                    let b = basis.swap_remove(i);
                    let bq = b.div_exact(&g).unwrap();
                    a = a.div_exact(&g).unwrap();
                    pending.push(primitive_in(&bq, var));
                    pending.push(g);
                    if a.degree_in(var) == 0 {
                        break;
                    }
                    i = 0;
                    continue;
                }
                i += 1;
            }
            if a.degree_in(var) > 0 {
                basis.push(primitive_in(&a, var));
            }
        }
    }
    basis.retain(|b| b.degree_in(var) > 0);
    basis.sort_by_key(|b| b.to_string());
    basis.dedup();
    basis
}

/// Multiplicity of `q` in `p` (with respect to `var`), and the cofactor.
pub fn multiplicity(p: &MultiPoly, q: &MultiPoly) -> (u32, MultiPoly) {
    let mut k = 0;
    let mut cur = p.clone();
    while let Some(next) = cur.div_exact(q) {
        cur = next;
        k += 1;
    }
    (k, cur)
}

/// One squarefree denominator factor with its numerators by order:
/// `parts[k]` sits over `q^(k+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FracTerm {
    pub q: MultiPoly,
    pub parts: Vec<UniPoly>,
}

impl FracTerm {
    pub fn order(&self) -> usize {
        self.parts
            .iter()
            .rposition(|p| !p.is_zero())
            .map(|k| k + 1)
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniView {
    pub var: usize,
    pub poly_part: UniPoly,
    pub frac_terms: Vec<FracTerm>,
}

impl UniView {
    pub fn recombine(&self) -> RatFunc {
        let mut acc = self.poly_part.to_ratfunc();
        for t in &self.frac_terms {
            let q: RatFunc = t.q.clone().into();
            for (k, a) in t.parts.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let den = q.pow(k as u32 + 1);
                acc = &acc + &(&a.to_ratfunc() / &den);
            }
        }
        acc
    }
}

/// Partial fraction decomposition over squarefree factors of the
/// denominator.
pub fn partial_fractions(f: &RatFunc, var: usize) -> UniView {
    let reg = f.registry();
    let num = UniPoly::from_poly(f.num(), var);
    let den_poly = f.den();
    if !den_poly.depends_on(var) {
        let inv: RatFunc = RatFunc::from(den_poly.clone()).recip().unwrap();
        return UniView {
            var,
            poly_part: num.scale(&inv),
            frac_terms: vec![],
        };
    }
    let den = UniPoly::from_poly(den_poly, var);
    let (poly_part, rem) = num.divrem(&den);
    let factors = squarefree_factor(den_poly, var);
    let mut frac_terms = Vec::with_capacity(factors.len());
    for (q, e) in factors {
        let qu = UniPoly::from_poly(&q, var);
        let qe = qu.pow(e);
        let (other, r) = den.divrem(&qe);
        debug_assert!(r.is_zero());
        let a = rem.mul(&other.inverse_mod(&qe).unwrap()).rem(&qe);
        // q-adic digits of a: a = sum_k a_k q^k
        let mut digits = Vec::with_capacity(e as usize);
        let mut cur = a;
        for _ in 0..e {
            let (quo, r) = cur.divrem(&qu);
            digits.push(r);
            cur = quo;
        }
        // a / q^e = sum_k a_k / q^(e-k)
        let mut parts = vec![UniPoly::zero(reg, var); e as usize];
        for (k, d) in digits.into_iter().enumerate() {
            parts[e as usize - k - 1] = d;
        }
        frac_terms.push(FracTerm { q, parts });
    }
    frac_terms.sort_by_key(|t| t.q.to_string());
    UniView {
        var,
        poly_part,
        frac_terms,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleData {
    pub finite_orders: Vec<(MultiPoly, u32)>,
    /// Pole order at infinity of the one-form `f·d(var)`.
    pub infinity_order: i64,
}

pub fn infinity_order(f: &RatFunc, var: usize) -> i64 {
    if f.is_zero() {
        return i64::MIN;
    }
    f.num().degree_in(var) as i64 - f.den().degree_in(var) as i64 + 2
}

pub fn pole_data(f: &RatFunc, var: usize) -> PoleData {
    let mut finite_orders = if f.den().depends_on(var) {
        squarefree_factor(f.den(), var)
    } else {
        vec![]
    };
    finite_orders.sort_by_key(|(q, _)| q.to_string());
    PoleData {
        finite_orders,
        infinity_order: infinity_order(f, var),
    }
}

/// `(top, o)` where `f = top/q^o + (lower order at q)` near `q`, with `top`
/// of degree below `deg q`; `o = 0` and `top = 0` when `f` is regular on `q`.
pub fn leading_at(f: &RatFunc, q: &MultiPoly, var: usize) -> Result<(UniPoly, u32)> {
    let reg = f.registry();
    let (o, r) = multiplicity(f.den(), q);
    if o == 0 {
        return Ok((UniPoly::zero(reg, var), 0));
    }
    let qu = UniPoly::from_poly(q, var);
    let ru = UniPoly::from_poly(&r, var);
    let top = UniPoly::from_poly(f.num(), var)
        .mul(&ru.inverse_mod(&qu)?)
        .rem(&qu);
    Ok((top, o))
}

/// Primitive part with respect to a set of variables: the gcd of the
/// coefficients of all monomials in `vars` is divided out.
pub fn primitive_in_vars(p: &MultiPoly, vars: &[usize]) -> MultiPoly {
    if p.is_zero() {
        return p.clone();
    }
    let reg = p.registry();
    let mut groups: std::collections::BTreeMap<Vec<u16>, MultiPoly> = Default::default();
    for (m, c) in p.terms() {
        let key: Vec<u16> = vars.iter().map(|&v| m.get(v)).collect();
        let mut rest = m.clone();
        for &v in vars {
            rest = rest.with(v, 0);
        }
        let e = groups.entry(key).or_insert_with(|| MultiPoly::zero(reg));
        *e = &*e + &MultiPoly::monomial(reg, rest, c.clone());
    }
    let mut g = MultiPoly::zero(reg);
    for c in groups.values() {
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    super::gcd::normalize(&p.div_exact(&g).unwrap())
}
