//! Univariate global residues `res_<P>(f) = Σ_{P(z0)=0} Res_{z=z0} f/P dz`,
//! evaluated without locating the roots of `P`.

use std::collections::HashMap;

use crate::algebra::{content_in, MultiPoly, RatFunc, RatMatrix, UniPoly};
use crate::error::{Error, Result};

/// `f = P_f / Q_f` paired against the ideal `<P>` in one variable.
#[derive(Clone, Debug)]
pub struct GlobalResidueProblem {
    pub var: usize,
    pub p: UniPoly,
    pub pf: UniPoly,
    pub qf: UniPoly,
}

impl GlobalResidueProblem {
    pub fn new(p: &MultiPoly, f: &RatFunc, var: usize) -> Self {
        GlobalResidueProblem {
            var,
            p: UniPoly::from_poly(p, var),
            pf: UniPoly::from_poly(f.num(), var),
            qf: UniPoly::from_poly(f.den(), var),
        }
    }

    pub fn nu(&self) -> usize {
        self.p.degree()
    }

    pub fn solve(&self) -> Result<RatFunc> {
        global_residue(&self.pf, &self.qf, &self.p)
    }
}

/// `Q̃_f` with `Q̃_f·Q_f ≡ 1 mod <P>` and `deg Q̃_f < deg P`.
pub fn polynomial_inverse(qf: &UniPoly, p: &UniPoly) -> Result<UniPoly> {
    if p.deg().is_none_or(|d| d == 0) {
        return Err(Error::InvalidInput(
            "polynomial inverse modulo a constant".into(),
        ));
    }
    qf.inverse_mod(p)
}

/// `a_ν / c_ν`, where `a_ν` is the coefficient of `z^(ν-1)` in
/// `P_f·Q̃_f mod P` and `c_ν` the leading coefficient of `P`.
pub fn global_residue(pf: &UniPoly, qf: &UniPoly, p: &UniPoly) -> Result<RatFunc> {
    let reg = p.registry();
    let Some(nu) = p.deg() else {
        return Err(Error::InvalidInput("global residue for P = 0".into()));
    };
    if nu == 0 {
        return Ok(RatFunc::zero(reg));
    }
    if pf.is_zero() {
        return Ok(RatFunc::zero(reg));
    }
    let inv = polynomial_inverse(qf, p)?;
    let a = pf.rem(p).mul(&inv).rem(p);
    Ok(&a.coeff(nu - 1) / &p.lc())
}

/// Global residue of a rational function with respect to `<P>` in `var`.
///
/// Works over polynomial coefficients: pseudo-remainders and a fraction-free
/// Cramer solve in the multiplication matrix of `Q_f` modulo `P`.
pub fn global_residue_of(f: &RatFunc, p: &MultiPoly, var: usize) -> Result<RatFunc> {
    let reg = p.registry();
    if f.is_zero() {
        return Ok(RatFunc::zero(reg));
    }
    // parameter-only content factors out of the residue
    let split = |a: &MultiPoly| {
        let c = content_in(a, var);
        let prim = a.div_exact(&c).expect("content divides");
        (c, prim)
    };
    let (cn, num) = split(f.num());
    let (cd, den) = split(f.den());
    let (cp, p) = split(p);
    let outer = RatFunc::new(cn, &cd * &cp)?;
    let inner = RatFunc::new(num, den)?;
    Ok(&outer * &residue_primitive(&inner, &p, var)?)
}

fn residue_primitive(f: &RatFunc, p: &MultiPoly, var: usize) -> Result<RatFunc> {
    let reg = p.registry();
    let pc = p.coeffs_in(var);
    if pc.is_empty() {
        return Err(Error::InvalidInput("global residue for P = 0".into()));
    }
    let nu = pc.len() - 1;
    if nu == 0 || f.is_zero() {
        return Ok(RatFunc::zero(reg));
    }
    let lc = pc[nu].clone();
    let (b, eb) = prem(f.num().coeffs_in(var), &pc);
    if b.iter().all(|c| c.is_zero()) {
        return Ok(RatFunc::zero(reg));
    }
    let (q0, eq) = prem(f.den().coeffs_in(var), &pc);
    // column j holds lc^j · (z^j Q_f mod P)
    let mut cols = vec![q0];
    for _ in 1..nu {
        let prev = cols.last().unwrap();
        let top = prev[nu - 1].clone();
        let next: Vec<MultiPoly> = (0..nu)
            .map(|k| {
                let shifted = if k == 0 { MultiPoly::zero(reg) } else { &lc * &prev[k - 1] };
                &shifted - &(&top * &pc[k])
            })
            .collect();
        cols.push(next);
    }
    // Cramer for the last coordinate; both determinants share the cofactors
    // of the last column
    let cof = last_column_cofactors(&cols, nu);
    let mut det = MultiPoly::zero(reg);
    let mut det_b = MultiPoly::zero(reg);
    for (r, c) in cof.iter().enumerate() {
        det = &det + &(&cols[nu - 1][r] * c);
        det_b = &det_b + &(&b[r] * c);
    }
    if det.is_zero() {
        return Err(Error::NotCoprime(format!(
            "{} and {} share a factor in {}",
            f.den(),
            p,
            reg.name(var)
        )));
    }
    let (det, det_b) = (RatFunc::from(det), RatFunc::from(det_b));
    let lcf = RatFunc::from(lc);
    let scale = lcf.pow(nu as u32 - 1);
    let shift = if eq >= eb {
        lcf.pow(eq - eb)
    } else {
        RatFunc::one(reg).checked_div(&lcf.pow(eb - eq))?
    };
    let num = &(&det_b * &scale) * &shift;
    num.checked_div(&(&det * &lcf))
}

/// Signed cofactors of the last column of the square matrix given by its
/// columns.  Minors over the leading columns are built up row subset by row
/// subset, which needs no division; large sizes go through Bareiss.
fn last_column_cofactors(cols: &[Vec<MultiPoly>], n: usize) -> Vec<MultiPoly> {
    let reg = cols[0][0].registry().clone();
    let last = n - 1;
    let sign = |r: usize, p: MultiPoly| if (r + last) % 2 == 1 { -p } else { p };
    if n == 1 {
        return vec![MultiPoly::one(&reg)];
    }
    if n > 12 {
        let m = RatMatrix::from_fn(&reg, n, n, |r, c| cols[c][r].clone().into());
        return (0..n)
            .map(|r| sign(r, m.minor(r, last).det().num().clone()))
            .collect();
    }
    let mut minors: HashMap<u32, MultiPoly> = HashMap::from([(0, MultiPoly::one(&reg))]);
    for (k, col) in cols.iter().enumerate().take(last) {
        let mut next = HashMap::new();
        for (&set, sub) in &minors {
            if sub.is_zero() {
                continue;
            }
            for (r, entry) in col.iter().enumerate() {
                if set & (1 << r) != 0 || entry.is_zero() {
                    continue;
                }
                let full = set | (1 << r);
                let pos = (set & ((1 << r) - 1)).count_ones() as usize;
                let t = entry * sub;
                let t = if (pos + k) % 2 == 1 { -t } else { t };
                let e = next.entry(full).or_insert_with(|| MultiPoly::zero(&reg));
                *e = &*e + &t;
            }
        }
        minors = next;
    }
    let all = (1u32 << n) - 1;
    (0..n)
        .map(|r| {
            let m = minors
                .remove(&(all & !(1 << r)))
                .unwrap_or_else(|| MultiPoly::zero(&reg));
            sign(r, m)
        })
        .collect()
}

/// Pseudo-remainder of `a` by `p` (coefficient vectors in one variable),
/// padded to length `deg p`, and the exponent `e` with `lc(p)^e a ≡ r`.
fn prem(mut a: Vec<MultiPoly>, p: &[MultiPoly]) -> (Vec<MultiPoly>, u32) {
    let dp = p.len() - 1;
    let reg = p[dp].registry().clone();
    let mut e = 0;
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    while a.len() > dp {
        let top = a.pop().unwrap();
        let off = a.len() - dp;
        for c in a.iter_mut() {
            *c = &*c * &p[dp];
        }
        for k in 0..dp {
            a[off + k] = &a[off + k] - &(&top * &p[k]);
        }
        e += 1;
        while a.last().is_some_and(|c| c.is_zero()) {
            a.pop();
        }
    }
    a.resize(dp, MultiPoly::zero(&reg));
    (a, e)
}

/// Dual basis of the monomials `1, z, …, z^(ν-1)` under the residue pairing:
/// `w_j = Σ_{k=0}^{ν-j} c_{k+j} z^k` for `j = 1..ν`.
pub fn bezoutian_dual(p: &UniPoly) -> Vec<UniPoly> {
    let reg = p.registry();
    let v = p.var();
    let nu = p.degree();
    (1..=nu)
        .map(|j| UniPoly::from_coeffs(reg, v, (0..=nu - j).map(|k| p.coeff(k + j)).collect()))
        .collect()
}
