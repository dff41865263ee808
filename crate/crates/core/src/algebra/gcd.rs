//! Polynomial gcd over Q: Brown's dense modular algorithm over word-sized
//! primes, recursive evaluation/interpolation in the last variable and
//! Chinese remaindering over the integers.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use smallvec::SmallVec;

use super::monomial::Monomial;
use super::poly::{MultiPoly, Q};

type Exps = SmallVec<[u16; 8]>;

// ---------------------------------------------------------------- Z/p

#[derive(Clone, Copy, Debug)]
struct Fp {
    p: u64,
}

impl Fp {
    #[inline]
    fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }
    fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }
    fn inv(self, a: u64) -> u64 {
        debug_assert!(a != 0);
        self.pow(a, self.p - 2)
    }
    fn reduce(self, c: &BigInt) -> u64 {
        let r = c.mod_floor(&BigInt::from(self.p));
        r.to_u64().unwrap()
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::with_capacity(256);
        let mut n = (1u64 << 62) - 1;
        while out.len() < 256 {
            if is_prime(n) {
                out.push(n);
            }
            n -= 2;
        }
        out
    })
}

// ------------------------------------------------- dense univariate mod p

/// Ascending coefficients, no trailing zeros.
type Up = Vec<u64>;

fn up_trim(a: &mut Up) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn up_deg(a: &Up) -> usize {
    a.len().saturating_sub(1)
}

fn up_eval(f: Fp, a: &Up, x: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

fn up_mul(f: Fp, a: &Up, b: &Up) -> Up {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    up_trim(&mut out);
    out
}

fn up_divrem(f: Fp, a: &Up, b: &Up) -> (Up, Up) {
    assert!(!b.is_empty());
    if a.len() < b.len() {
        return (vec![], a.clone());
    }
    let mut r = a.clone();
    let inv = f.inv(*b.last().unwrap());
    let mut q = vec![0; a.len() - b.len() + 1];
    for k in (0..q.len()).rev() {
        let c = f.mul(r[k + b.len() - 1], inv);
        q[k] = c;
        if c != 0 {
            for (j, &bj) in b.iter().enumerate() {
                r[k + j] = f.sub(r[k + j], f.mul(c, bj));
            }
        }
    }
    r.truncate(b.len() - 1);
    up_trim(&mut r);
    up_trim(&mut q);
    (q, r)
}

fn up_monic(f: Fp, a: &Up) -> Up {
    match a.last() {
        None => vec![],
        Some(&l) => {
            let inv = f.inv(l);
            a.iter().map(|&c| f.mul(c, inv)).collect()
        }
    }
}

fn up_gcd(f: Fp, a: &Up, b: &Up) -> Up {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let (_, r) = up_divrem(f, &a, &b);
        a = b;
        b = r;
    }
    up_monic(f, &a)
}

// ----------------------------------------- sparse multivariate mod p

/// Terms sorted by exponent vector, lexicographically descending.
#[derive(Clone, Debug, PartialEq)]
struct Mp {
    n: usize,
    terms: Vec<(Exps, u64)>,
}

impl Mp {
    fn from_map(n: usize, map: BTreeMap<Exps, u64>) -> Mp {
        Mp {
            n,
            terms: map.into_iter().rev().filter(|(_, c)| *c != 0).collect(),
        }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn is_const(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.iter().all(|&e| e == 0)
    }
    fn lc(&self) -> u64 {
        self.terms[0].1
    }
    fn lm(&self) -> &Exps {
        &self.terms[0].0
    }
    fn monic(&self, f: Fp) -> Mp {
        let inv = f.inv(self.lc());
        Mp {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), f.mul(*c, inv)))
                .collect(),
        }
    }
    fn one(n: usize) -> Mp {
        Mp {
            n,
            terms: vec![(SmallVec::from_elem(0, n), 1)],
        }
    }

    /// Group by the first n-1 exponents; values are univariate in the last.
    fn split_last(&self) -> BTreeMap<Exps, Up> {
        let mut out: BTreeMap<Exps, Up> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k: Exps = e[..self.n - 1].into();
            let d = e[self.n - 1] as usize;
            let u = out.entry(k).or_default();
            if u.len() <= d {
                u.resize(d + 1, 0);
            }
            u[d] = *c;
        }
        out
    }

    fn join_last(n: usize, groups: &BTreeMap<Exps, Up>) -> Mp {
        let mut map = BTreeMap::new();
        for (k, u) in groups {
            for (d, &c) in u.iter().enumerate() {
                if c != 0 {
                    let mut e = k.clone();
                    e.push(d as u16);
                    map.insert(e, c);
                }
            }
        }
        Mp::from_map(n, map)
    }

    fn eval_last(&self, f: Fp, x: u64) -> Mp {
        let mut map = BTreeMap::new();
        for (k, u) in self.split_last() {
            let v = up_eval(f, &u, x);
            if v != 0 {
                map.insert(k, v);
            }
        }
        Mp::from_map(self.n - 1, map)
    }

    fn deg_last(&self) -> usize {
        self.terms
            .iter()
            .map(|(e, _)| e[self.n - 1] as usize)
            .max()
            .unwrap_or(0)
    }

    /// Exact division in lex order; `None` if `b` does not divide.
    fn div_exact(&self, f: Fp, b: &Mp) -> Option<Mp> {
        let mut r: BTreeMap<Exps, u64> = self.terms.iter().cloned().collect();
        let blm = b.lm().clone();
        let inv = f.inv(b.lc());
        let mut quot = BTreeMap::new();
        while let Some((m, c)) = r.last_key_value() {
            if !blm.iter().zip(m.iter()).all(|(a, b)| a <= b) {
                return None;
            }
            let tm: Exps = m.iter().zip(blm.iter()).map(|(a, b)| a - b).collect();
            let tc = f.mul(*c, inv);
            for (be, bc) in &b.terms {
                let key: Exps = be.iter().zip(tm.iter()).map(|(a, b)| a + b).collect();
                let d = f.mul(*bc, tc);
                let slot = r.entry(key.clone()).or_insert(0);
                *slot = f.sub(*slot, d);
                if *slot == 0 {
                    r.remove(&key);
                }
            }
            quot.insert(tm, tc);
        }
        Some(Mp::from_map(self.n, quot))
    }
}

fn mp_from_up(n: usize, u: &Up) -> Mp {
    let mut map = BTreeMap::new();
    for (d, &c) in u.iter().enumerate() {
        if c != 0 {
            let mut e: Exps = SmallVec::from_elem(0, n);
            e[n - 1] = d as u16;
            map.insert(e, c);
        }
    }
    Mp::from_map(n, map)
}

fn mp_mul_up(f: Fp, a: &Mp, u: &Up) -> Mp {
    let mut groups = a.split_last();
    for g in groups.values_mut() {
        *g = up_mul(f, g, u);
    }
    Mp::join_last(a.n, &groups)
}

fn mp_div_up(f: Fp, a: &Mp, u: &Up) -> Mp {
    let mut groups = a.split_last();
    for g in groups.values_mut() {
        let (q, r) = up_divrem(f, g, u);
        debug_assert!(r.is_empty());
        *g = q;
    }
    Mp::join_last(a.n, &groups)
}

fn content_last(f: Fp, a: &Mp) -> Up {
    let mut g: Up = vec![];
    for u in a.split_last().values() {
        g = up_gcd(f, &g, u);
        if g.len() == 1 {
            break;
        }
    }
    g
}

/// Monic gcd over Z/p; `None` when the evaluation points run out.
fn pgcd(f: Fp, a: &Mp, b: &Mp) -> Option<Mp> {
    let n = a.n;
    if a.is_zero() {
        return Some(b.monic(f));
    }
    if b.is_zero() {
        return Some(a.monic(f));
    }
    if n == 0 || a.is_const() || b.is_const() {
        return Some(Mp::one(n));
    }
    if n == 1 {
        let ua: Up = to_up(a);
        let ub: Up = to_up(b);
        return Some(mp_from_up(1, &up_gcd(f, &ua, &ub)));
    }
    let ca = content_last(f, a);
    let cb = content_last(f, b);
    let c = up_gcd(f, &ca, &cb);
    let a1 = mp_div_up(f, a, &ca);
    let b1 = mp_div_up(f, b, &cb);
    let la = a1.split_last().into_iter().next_back().unwrap().1;
    let lb = b1.split_last().into_iter().next_back().unwrap().1;
    let g = up_gcd(f, &la, &lb);
    let bound = a1.deg_last().min(b1.deg_last()) + up_deg(&g) + 1;

    let mut h: Option<BTreeMap<Exps, Up>> = None;
    let mut modulus: Up = vec![1];
    let mut npts = 0usize;
    let mut alpha: u64 = 0;
    let limit = 4 * bound + 64;
    let mut tries = 0usize;
    loop {
        alpha += 1;
        tries += 1;
        if tries > limit || alpha >= f.p {
            return None;
        }
        let ga = up_eval(f, &g, alpha);
        if up_eval(f, &la, alpha) == 0 || up_eval(f, &lb, alpha) == 0 {
            continue;
        }
        let img = pgcd(f, &a1.eval_last(f, alpha), &b1.eval_last(f, alpha))?;
        if img.is_const() {
            return Some(mp_from_up(n, &c).monic(f));
        }
        let img: BTreeMap<Exps, u64> = img
            .terms
            .iter()
            .map(|(e, x)| (e.clone(), f.mul(*x, ga)))
            .collect();
        let img_lm = img.keys().next_back().unwrap().clone();
        let restart = match &h {
            None => true,
            Some(hm) => {
                let h_lm = hm.keys().next_back().unwrap();
                match img_lm.cmp(h_lm) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => continue,
                    std::cmp::Ordering::Equal => false,
                }
            }
        };
        let mut changed = true;
        if restart {
            h = Some(img.into_iter().map(|(k, v)| (k, vec![v])).collect());
            modulus = vec![f.sub(0, alpha), 1];
            npts = 1;
        } else {
            let hm = h.as_mut().unwrap();
            let qa = up_eval(f, &modulus, alpha);
            let inv = f.inv(qa);
            let keys: Vec<Exps> = hm.keys().chain(img.keys()).cloned().collect();
            changed = false;
            for k in keys {
                let hv = hm.get(&k).map(|u| up_eval(f, u, alpha)).unwrap_or(0);
                let iv = img.get(&k).copied().unwrap_or(0);
                let diff = f.mul(f.sub(iv, hv), inv);
                if diff != 0 {
                    changed = true;
                    let add: Up = modulus.iter().map(|&x| f.mul(x, diff)).collect();
                    let e = hm.entry(k).or_default();
                    if e.len() < add.len() {
                        e.resize(add.len(), 0);
                    }
                    for (i, x) in add.into_iter().enumerate() {
                        e[i] = f.add(e[i], x);
                    }
                    up_trim(e);
                }
            }
            hm.retain(|_, u| !u.is_empty());
            modulus = up_mul(f, &modulus, &vec![f.sub(0, alpha), 1]);
            npts += 1;
        }
        if npts >= bound || (!changed && npts > 1) {
            let hp = Mp::join_last(n, h.as_ref().unwrap());
            let cont = content_last(f, &hp);
            let cand = mp_div_up(f, &hp, &cont);
            if a1.div_exact(f, &cand).is_some() && b1.div_exact(f, &cand).is_some() {
                return Some(mp_mul_up(f, &cand, &c).monic(f));
            }
            if npts >= bound {
                h = None;
                npts = 0;
                modulus = vec![1];
            }
        }
    }
}

fn to_up(a: &Mp) -> Up {
    let mut u: Up = vec![];
    for (e, c) in &a.terms {
        let d = e[0] as usize;
        if u.len() <= d {
            u.resize(d + 1, 0);
        }
        u[d] = *c;
    }
    u
}

// ------------------------------------------------------- over Q

/// Normalize to primitive integer form with positive leading coefficient.
pub(crate) fn normalize(p: &MultiPoly) -> MultiPoly {
    if p.is_zero() {
        return p.clone();
    }
    p.primitive().1
}

fn content_in(a: &MultiPoly, v: usize) -> MultiPoly {
    let mut g = MultiPoly::zero(a.registry());
    for c in a.coeffs_in(v) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_constant() {
            break;
        }
    }
    g
}

/// Greatest common divisor, normalized to integer content one and positive
/// graded-lex leading coefficient; `gcd(a, 0)` is the normalized `a`.
pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let reg = a.registry();
    if a.is_zero() {
        return normalize(b);
    }
    if b.is_zero() {
        return normalize(a);
    }
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one(reg);
    }
    let ma = a.min_monomial();
    let mb = b.min_monomial();
    let m = ma.gcd(&mb);
    let a1 = normalize(&a.div_monomial(&ma));
    let b1 = normalize(&b.div_monomial(&mb));
    let g = gcd_nomono(&a1, &b1);
    normalize(&g.mul_monomial(&m, &Q::one()))
}

fn gcd_nomono(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let reg = a.registry();
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one(reg);
    }
    if a == b {
        return a.clone();
    }
    let va = a.vars_present();
    let vb = b.vars_present();
    for v in 0..va.len() {
        if va[v] && !vb[v] {
            return gcd(&content_in(a, v), b);
        }
        if vb[v] && !va[v] {
            return gcd(a, &content_in(b, v));
        }
    }
    let (small, big) = if a.nterms() <= b.nterms() { (a, b) } else { (b, a) };
    if big.div_exact(small).is_some() {
        return small.clone();
    }
    modular_gcd(a, b, &va)
}

fn modular_gcd(a: &MultiPoly, b: &MultiPoly, present: &[bool]) -> MultiPoly {
    let reg = a.registry();
    let mut vars: Vec<usize> = (0..present.len()).filter(|&v| present[v]).collect();
    // last variable is the interpolation variable: prefer the lowest degree
    vars.sort_by_key(|&v| std::cmp::Reverse(a.degree_in(v).max(b.degree_in(v))));
    let n = vars.len();
    let compress = |p: &MultiPoly| -> Vec<(Exps, BigInt)> {
        let mut t: Vec<(Exps, BigInt)> = p
            .terms()
            .map(|(m, c)| {
                debug_assert!(c.is_integer());
                (vars.iter().map(|&v| m.get(v)).collect(), c.numer().clone())
            })
            .collect();
        t.sort_by(|x, y| y.0.cmp(&x.0));
        t
    };
    let za = compress(a);
    let zb = compress(b);
    let lca = za[0].1.clone();
    let lcb = zb[0].1.clone();
    let gamma = lca.gcd(&lcb);

    let reduce = |f: Fp, t: &[(Exps, BigInt)]| -> Mp {
        let map: BTreeMap<Exps, u64> = t.iter().map(|(e, c)| (e.clone(), f.reduce(c))).collect();
        Mp::from_map(n, map)
    };

    let mut acc: Option<(BTreeMap<Exps, BigInt>, BigInt)> = None;
    let mut prev: Option<BTreeMap<Exps, BigInt>> = None;
    for &p in primes() {
        let f = Fp { p };
        let bp = BigInt::from(p);
        if (&lca % &bp).is_zero() || (&lcb % &bp).is_zero() {
            continue;
        }
        let Some(gp) = pgcd(f, &reduce(f, &za), &reduce(f, &zb)) else {
            continue;
        };
        if gp.is_const() {
            return MultiPoly::one(reg);
        }
        let gm = f.reduce(&gamma);
        let img: BTreeMap<Exps, u64> = gp
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), f.mul(*c, gm)))
            .collect();
        acc = match acc.take() {
            None => Some((
                img.iter().map(|(k, v)| (k.clone(), BigInt::from(*v))).collect(),
                bp.clone(),
            )),
            Some((cur, m)) => {
                let cur_lm = cur.keys().next_back().unwrap();
                let img_lm = img.keys().next_back().unwrap();
                match img_lm.cmp(cur_lm) {
                    std::cmp::Ordering::Greater => Some((cur, m)),
                    std::cmp::Ordering::Less => {
                        prev = None;
                        Some((
                            img.iter().map(|(k, v)| (k.clone(), BigInt::from(*v))).collect(),
                            bp.clone(),
                        ))
                    }
                    std::cmp::Ordering::Equal => Some(crt_combine(&cur, &m, &img, p)),
                }
            }
        };
        let (cur, m) = acc.as_ref().unwrap();
        let half = m >> 1;
        let sym: BTreeMap<Exps, BigInt> = cur
            .iter()
            .map(|(k, v)| (k.clone(), if v > &half { v - m } else { v.clone() }))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        if prev.as_ref() == Some(&sym) {
            let cand = MultiPoly::from_terms(
                reg,
                sym.iter().map(|(e, c)| {
                    let mut mono = Monomial::one(reg.len());
                    for (i, &v) in vars.iter().enumerate() {
                        mono.0[v] = e[i];
                    }
                    (mono, Q::from_integer(c.clone()))
                }),
            );
            let cand = normalize(&cand);
            if a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
                return cand;
            }
        }
        prev = Some(sym);
    }
    panic!("modular gcd exhausted its prime table");
}

fn crt_combine(
    cur: &BTreeMap<Exps, BigInt>,
    m: &BigInt,
    img: &BTreeMap<Exps, u64>,
    p: u64,
) -> (BTreeMap<Exps, BigInt>, BigInt) {
    let f = Fp { p };
    let bp = BigInt::from(p);
    let minv = f.inv(f.reduce(m));
    let mut out = BTreeMap::new();
    let zero = BigInt::zero();
    for k in cur.keys().chain(img.keys()) {
        if out.contains_key(k) {
            continue;
        }
        let c = cur.get(k).unwrap_or(&zero);
        let r = img.get(k).copied().unwrap_or(0);
        let cm = f.reduce(c);
        let t = f.mul(f.sub(r, cm), minv);
        let v = c + m * BigInt::from(t);
        out.insert(k.clone(), v);
    }
    let nm = m * &bp;
    debug_assert!(out.values().all(|v| v.sign() != Sign::Minus && v < &nm));
    (out, nm)
}
