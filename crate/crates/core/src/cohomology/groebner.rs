//! Buchberger's algorithm over the residual field `Q(other names)` in a
//! chosen set of fiber variables, graded reverse lexicographic order.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::algebra::{gcd_poly, Monomial, MultiPoly, RatFunc, RatMatrix, Registry};
use crate::error::{Error, Result};

type Exp = Vec<u16>;

fn grevlex(a: &Exp, b: &Exp) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    da.cmp(&db).then_with(|| {
        for k in (0..a.len()).rev() {
            match a[k].cmp(&b[k]) {
                Ordering::Equal => continue,
                o => return o.reverse(),
            }
        }
        Ordering::Equal
    })
}

fn divides(a: &Exp, b: &Exp) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Polynomial in the fiber variables, terms sorted descending.
#[derive(Clone, Debug, PartialEq)]
struct GPoly {
    terms: Vec<(Exp, RatFunc)>,
}

impl GPoly {
    fn lm(&self) -> &Exp {
        &self.terms[0].0
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn monic(mut self) -> GPoly {
        let inv = self.terms[0].1.recip().unwrap();
        for t in &mut self.terms {
            t.1 = &t.1 * &inv;
        }
        self
    }

    /// `self - c·x^shift·other`
    fn sub_mul(&self, c: &RatFunc, shift: &Exp, other: &GPoly) -> GPoly {
        let shifted: Vec<(Exp, RatFunc)> = other
            .terms
            .iter()
            .map(|(e, x)| (e.iter().zip(shift).map(|(a, b)| a + b).collect(), x * c))
            .collect();
        let mut out = Vec::with_capacity(self.terms.len() + shifted.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < shifted.len() {
            let ord = match (self.terms.get(i), shifted.get(j)) {
                (Some(a), Some(b)) => grevlex(&a.0, &b.0),
                (Some(_), None) => Ordering::Greater,
                (None, Some(_)) => Ordering::Less,
                _ => unreachable!(),
            };
            match ord {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push((shifted[j].0.clone(), -&shifted[j].1));
                    j += 1;
                }
                Ordering::Equal => {
                    let v = &self.terms[i].1 - &shifted[j].1;
                    if !v.is_zero() {
                        out.push((self.terms[i].0.clone(), v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        GPoly { terms: out }
    }
}

fn to_gpoly(p: &MultiPoly, fiber: &[usize]) -> GPoly {
    let reg = p.registry();
    let mut groups: BTreeMap<Exp, MultiPoly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let key: Exp = fiber.iter().map(|&v| m.get(v)).collect();
        let mut rest = m.clone();
        for &v in fiber {
            rest = rest.with(v, 0);
        }
        let e = groups.entry(key).or_insert_with(|| MultiPoly::zero(reg));
        *e = &*e + &MultiPoly::monomial(reg, rest, c.clone());
    }
    let mut terms: Vec<(Exp, RatFunc)> = groups
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (e, c.into()))
        .collect();
    terms.sort_by(|a, b| grevlex(&b.0, &a.0));
    GPoly { terms }
}

fn from_gpoly(g: &GPoly, fiber: &[usize], reg: &Registry) -> MultiPoly {
    let mut l = MultiPoly::one(reg);
    for (_, c) in &g.terms {
        let gg = gcd_poly(&l, c.den());
        l = &l * &c.den().div_exact(&gg).unwrap();
    }
    let mut acc = MultiPoly::zero(reg);
    for (e, c) in &g.terms {
        let mut m = Monomial::one(reg.len());
        for (k, &v) in fiber.iter().enumerate() {
            m = m.with(v, e[k]);
        }
        let coeff = c.num() * &l.div_exact(c.den()).unwrap();
        acc = &acc + &coeff.mul_monomial(&m, &crate::algebra::q(1));
    }
    crate::algebra::primitive_in_vars(&acc, fiber)
}

fn reduce(p: &GPoly, basis: &[GPoly]) -> GPoly {
    let mut p = p.clone();
    let mut rem: Vec<(Exp, RatFunc)> = Vec::new();
    while !p.is_zero() {
        let lm = p.lm().clone();
        if let Some(g) = basis.iter().find(|g| divides(g.lm(), &lm)) {
            let shift: Exp = lm.iter().zip(g.lm()).map(|(a, b)| a - b).collect();
            let c = p.terms[0].1.clone();
            p = p.sub_mul(&c, &shift, g);
        } else {
            rem.push(p.terms.remove(0));
        }
    }
    GPoly { terms: rem }
}

/// Reduced Gröbner basis in the variables `fiber` (graded reverse lex with
/// `fiber[0]` largest); all other names form the coefficient field.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    fiber: Vec<usize>,
    reg: Registry,
    polys: Vec<GPoly>,
}

impl GroebnerBasis {
    pub fn elements(&self) -> Vec<MultiPoly> {
        self.polys
            .iter()
            .map(|g| from_gpoly(g, &self.fiber, &self.reg))
            .collect()
    }

    pub fn fiber(&self) -> &[usize] {
        &self.fiber
    }

    pub fn leading_exponents(&self) -> Vec<Vec<u16>> {
        self.polys.iter().map(|g| g.lm().clone()).collect()
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.polys
            .iter()
            .any(|g| g.lm().iter().all(|&e| e == 0))
    }

    /// Monomials not divisible by any leading monomial, ascending.
    pub fn standard_monomials(&self) -> Result<Vec<Vec<u16>>> {
        let n = self.fiber.len();
        let lms = self.leading_exponents();
        let mut bound = vec![None; n];
        for lm in &lms {
            let nz: Vec<usize> = (0..n).filter(|&k| lm[k] > 0).collect();
            if nz.len() == 1 {
                let k = nz[0];
                let b = lm[k];
                bound[k] = Some(bound[k].map_or(b, |x: u16| x.min(b)));
            }
            if nz.is_empty() {
                return Ok(vec![]);
            }
        }
        if bound.iter().any(|b| b.is_none()) {
            return Err(Error::NotZeroDimensional);
        }
        let bound: Vec<u16> = bound.into_iter().map(|b| b.unwrap()).collect();
        let mut out = Vec::new();
        let mut cur = vec![0u16; n];
        loop {
            if !lms.iter().any(|lm| divides(lm, &cur)) {
                out.push(cur.clone());
            }
            let mut k = 0;
            loop {
                if k == n {
                    out.sort_by(grevlex);
                    return Ok(out);
                }
                cur[k] += 1;
                if cur[k] < bound[k] {
                    break;
                }
                cur[k] = 0;
                k += 1;
            }
        }
    }

    pub fn standard_monomial_polys(&self) -> Result<Vec<MultiPoly>> {
        Ok(self
            .standard_monomials()?
            .into_iter()
            .map(|e| {
                let mut m = Monomial::one(self.reg.len());
                for (k, &v) in self.fiber.iter().enumerate() {
                    m = m.with(v, e[k]);
                }
                MultiPoly::monomial(&self.reg, m, crate::algebra::q(1))
            })
            .collect())
    }

    pub fn dimension(&self) -> Result<usize> {
        Ok(self.standard_monomials()?.len())
    }

    /// `I : f^∞` for a zero-dimensional `I`, from the kernel of a power of
    /// the multiplication map by `f` on the quotient ring.
    pub fn saturate(&self, f: &MultiPoly) -> Result<GroebnerBasis> {
        let std = self.standard_monomials()?;
        let n = std.len();
        if n == 0 {
            return Ok(self.clone());
        }
        let fg = to_gpoly(f, &self.fiber);
        let one = RatFunc::one(&self.reg);
        let zero = GPoly { terms: vec![] };
        let coords = |g: &GPoly| -> Vec<RatFunc> {
            let r = reduce(g, &self.polys);
            let mut v = vec![RatFunc::zero(&self.reg); n];
            for (e, c) in r.terms {
                let k = std.iter().position(|s| *s == e).expect("normal form uses standard monomials");
                v[k] = c;
            }
            v
        };
        let cols: Vec<Vec<RatFunc>> = std
            .iter()
            .map(|b| coords(&zero.sub_mul(&-&one, b, &fg)))
            .collect();
        let m = RatMatrix::from_fn(&self.reg, n, n, |i, j| cols[j][i].clone());
        let mut pow = m.clone();
        let mut rank = pow.rank();
        while rank > 0 {
            let next = pow.mul(&m);
            let r = next.rank();
            if r == rank {
                break;
            }
            pow = next;
            rank = r;
        }
        if rank == n {
            return Ok(self.clone());
        }
        let mut gens = self.elements();
        for v in pow.nullspace() {
            let mut terms: Vec<(Exp, RatFunc)> = std
                .iter()
                .zip(v)
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| (e.clone(), c))
                .collect();
            terms.sort_by(|a, b| grevlex(&b.0, &a.0));
            gens.push(from_gpoly(&GPoly { terms }, &self.fiber, &self.reg));
        }
        Ok(buchberger(&gens, &self.fiber))
    }
}

pub fn buchberger(generators: &[MultiPoly], fiber: &[usize]) -> GroebnerBasis {
    let reg = generators
        .first()
        .map(|p| p.registry().clone())
        .expect("at least one generator");
    let mut g: Vec<GPoly> = generators
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| to_gpoly(p, fiber).monic())
        .collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..g.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    while let Some((i, j)) = pairs.pop() {
        let (a, b) = (&g[i], &g[j]);
        let lcm: Exp = a.lm().iter().zip(b.lm()).map(|(x, y)| *x.max(y)).collect();
        // coprime leading monomials give a zero S-polynomial remainder
        if a.lm().iter().zip(b.lm()).all(|(x, y)| *x == 0 || *y == 0) {
            continue;
        }
        let sa: Exp = lcm.iter().zip(a.lm()).map(|(x, y)| x - y).collect();
        let sb: Exp = lcm.iter().zip(b.lm()).map(|(x, y)| x - y).collect();
        let one = RatFunc::one(&reg);
        let zero = GPoly { terms: vec![] };
        let s = zero.sub_mul(&one, &sa, a).sub_mul(&-one.clone(), &sb, b);
        let r = reduce(&s, &g);
        if !r.is_zero() {
            let r = r.monic();
            let k = g.len();
            g.push(r);
            for i in 0..k {
                pairs.insert(0, (i, k));
            }
        }
    }
    // minimal basis
    let mut minimal: Vec<GPoly> = Vec::new();
    for (k, p) in g.iter().enumerate() {
        let redundant = g.iter().enumerate().any(|(l, q)| {
            l != k && divides(q.lm(), p.lm()) && (q.lm() != p.lm() || l < k)
        });
        if !redundant {
            minimal.push(p.clone());
        }
    }
    // interreduce
    let mut reduced = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<GPoly> = minimal
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != k)
            .map(|(_, p)| p.clone())
            .collect();
        let head = GPoly {
            terms: vec![minimal[k].terms[0].clone()],
        };
        let tail = GPoly {
            terms: minimal[k].terms[1..].to_vec(),
        };
        let r = reduce(&tail, &others);
        let mut terms = head.terms;
        terms.extend(r.terms);
        reduced.push(GPoly { terms });
    }
    reduced.sort_by(|a, b| grevlex(a.lm(), b.lm()));
    GroebnerBasis {
        fiber: fiber.to_vec(),
        reg,
        polys: reduced,
    }
}
