//! Gauge transformations of coefficient vectors and their reduction to
//! simple poles in the active variable.

use crate::algebra::{coprime_basis, infinity_order, leading_at, multiplicity, MultiPoly, RatFunc, RatMatrix, UniPoly};
use crate::error::{Error, Result};

/// Hard cap on reduction passes for one vector.
pub const MAX_PASSES: usize = 64;

/// Which pairing slot a coefficient vector belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// The matrix `M` in `φ_j → φ_j + ∂f_j + M_jk f_k`: `Ωᵀ` on the left, `-Ω` on the right.
    pub fn gauge_matrix(self, omega: &RatMatrix) -> RatMatrix {
        match self {
            Side::Left => omega.transpose(),
            Side::Right => omega.neg(),
        }
    }
}

/// Counts of reduction passes performed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ReductionStats {
    pub infinity: usize,
    pub finite: usize,
}

impl ReductionStats {
    pub fn total(&self) -> usize {
        self.infinity + self.finite
    }
}

/// `φ_j + ∂f_j + Σ_k M_jk f_k`.
pub fn gauge_apply(v: &[RatFunc], f: &[RatFunc], m: &RatMatrix, var: usize) -> Vec<RatFunc> {
    (0..v.len())
        .map(|j| {
            let mut acc = &v[j] + &f[j].derivative(var);
            for (k, fk) in f.iter().enumerate() {
                if !fk.is_zero() && !m.get(j, k).is_zero() {
                    acc = &acc + &(m.get(j, k) * fk);
                }
            }
            acc
        })
        .collect()
}

/// Gauge transformation with the side convention applied to `Ω`.
pub fn gauge_transform(
    v: &[RatFunc],
    f: &[RatFunc],
    omega: &RatMatrix,
    side: Side,
    var: usize,
) -> Vec<RatFunc> {
    gauge_apply(v, f, &side.gauge_matrix(omega), var)
}

/// Pole order of the one-form `f d var` at infinity.
fn form_order_inf(f: &RatFunc, var: usize) -> i64 {
    infinity_order(f, var)
}

/// True if every entry has at most simple poles, including at infinity.
pub fn is_simple(v: &[RatFunc], var: usize) -> bool {
    v.iter().all(|f| crate::cohomology::is_simple_pole(f, var))
}

/// Coefficient of `var^k` in the polynomial part of `f`.
fn poly_part_coeff(f: &RatFunc, var: usize, k: usize) -> Result<RatFunc> {
    if f.is_zero() {
        return Ok(RatFunc::zero(f.registry()));
    }
    let (q, _) = crate::algebra::poly_divmod(f.num(), f.den(), var)?;
    Ok(UniPoly::from_ratfunc(&q, var)
        .map(|u| u.coeff(k))
        .unwrap_or_else(|| RatFunc::zero(f.registry())))
}

/// `lim_{z→∞} z·f`, for `f` vanishing at infinity.
fn residue_at_infinity_coeff(f: &RatFunc, var: usize) -> RatFunc {
    let reg = f.registry();
    if f.is_zero() || f.num().degree_in(var) + 1 != f.den().degree_in(var) {
        return RatFunc::zero(reg);
    }
    let n = UniPoly::from_poly(f.num(), var).lc();
    let d = UniPoly::from_poly(f.den(), var).lc();
    &n / &d
}

/// One pass of the infinity reduction; returns `None` if already simple there.
pub fn reduce_pole_infinity(v: &[RatFunc], m: &RatMatrix, var: usize) -> Result<Option<Vec<RatFunc>>> {
    let reg = m.registry();
    let o = v.iter().map(|f| form_order_inf(f, var)).max().unwrap_or(i64::MIN);
    if o <= 1 {
        return Ok(None);
    }
    let nu = v.len();
    let om1 = RatFunc::int(reg, o - 1);
    let a = RatMatrix::from_fn(reg, nu, nu, |j, k| {
        let mjk = residue_at_infinity_coeff(m.get(j, k), var);
        if j == k {
            &mjk + &om1
        } else {
            mjk
        }
    });
    let rhs = v
        .iter()
        .map(|f| poly_part_coeff(f, var, (o - 2) as usize).map(|c| -c))
        .collect::<Result<Vec<_>>>()?;
    let c = a
        .solve(&rhs)
        .map_err(|e| Error::SingularSystem(format!("pole at infinity of order {}: {}", o, e)))?;
    let z = RatFunc::var(reg, var).pow((o - 1) as u32);
    let f: Vec<RatFunc> = c.iter().map(|ck| ck * &z).collect();
    Ok(Some(gauge_apply(v, &f, m, var)))
}

/// One pass of the finite-pole reduction at the squarefree factor `q` of
/// order `o > 1`.
pub fn reduce_pole_finite(
    v: &[RatFunc],
    m: &RatMatrix,
    var: usize,
    q: &MultiPoly,
    o: u32,
) -> Result<Vec<RatFunc>> {
    let reg = m.registry();
    let nu = v.len();
    let qu = UniPoly::from_poly(q, var);
    let d = qu.degree();
    let dq = qu.derivative();
    let top: Vec<UniPoly> = v
        .iter()
        .map(|f| {
            let (t, k) = leading_at(f, q, var)?;
            Ok(if k == o { t } else { UniPoly::zero(reg, var) })
        })
        .collect::<Result<_>>()?;
    let res: Vec<Vec<UniPoly>> = (0..nu)
        .map(|j| {
            (0..nu)
                .map(|k| {
                    let (t, ord) = leading_at(m.get(j, k), q, var)?;
                    if ord > 1 {
                        return Err(Error::HigherPoleConnection {
                            var: reg.name(var).to_string(),
                            row: j,
                            col: k,
                            entry: m.get(j, k).to_string(),
                        });
                    }
                    Ok(if ord == 1 { t } else { UniPoly::zero(reg, var) })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let shift = dq.scale(&RatFunc::int(reg, -(o as i64 - 1)));
    // unknown (k, l) is the coefficient of var^l in C_k
    let n = nu * d;
    let mut a = RatMatrix::zeros(reg, n, n);
    for k in 0..nu {
        for l in 0..d {
            let zl = UniPoly::x(reg, var).pow(l as u32);
            for j in 0..nu {
                let mut coef = res[j][k].clone();
                if j == k {
                    coef = coef.add(&shift);
                }
                let col = coef.mul(&zl).rem(&qu);
                for lp in 0..d {
                    a.set(j * d + lp, k * d + l, col.coeff(lp));
                }
            }
        }
    }
    let mut rhs = Vec::with_capacity(n);
    for t in &top {
        for lp in 0..d {
            rhs.push(-t.coeff(lp));
        }
    }
    let c = a.solve(&rhs).map_err(|e| {
        Error::SingularSystem(format!("pole of order {} at {} = 0: {}", o, q, e))
    })?;
    let qpow: RatFunc = RatFunc::from(q.clone()).pow(o - 1);
    let f: Vec<RatFunc> = (0..nu)
        .map(|k| {
            let ck = UniPoly::from_coeffs(reg, var, c[k * d..(k + 1) * d].to_vec()).to_ratfunc();
            ck.checked_div(&qpow)
        })
        .collect::<Result<_>>()?;
    Ok(gauge_apply(v, &f, m, var))
}

/// Highest finite pole: the first factor (canonical order) with maximal order > 1.
fn worst_finite_pole(v: &[RatFunc], m: &RatMatrix, var: usize) -> Option<(MultiPoly, u32)> {
    let mut dens: Vec<MultiPoly> = v.iter().filter(|f| !f.is_zero()).map(|f| f.den().clone()).collect();
    dens.extend(m.entries().iter().filter(|f| !f.is_zero()).map(|f| f.den().clone()));
    let basis = coprime_basis(&dens, var);
    let mut best: Option<(MultiPoly, u32)> = None;
    for q in basis {
        let o = v
            .iter()
            .filter(|f| !f.is_zero())
            .map(|f| multiplicity(f.den(), &q).0)
            .max()
            .unwrap_or(0);
        if o > 1 {
            best = Some((q, o));
            break;
        }
    }
    best
}

/// Reduce to simple poles: infinity first, then finite factors in canonical
/// order, until no higher pole is left.
pub fn reduce_to_simple_poles(
    v: &[RatFunc],
    omega: &RatMatrix,
    side: Side,
    var: usize,
) -> Result<(Vec<RatFunc>, ReductionStats)> {
    let m = side.gauge_matrix(omega);
    let mut cur = v.to_vec();
    let mut stats = ReductionStats::default();
    for _ in 0..MAX_PASSES {
        if let Some(next) = reduce_pole_infinity(&cur, &m, var)? {
            cur = next;
            stats.infinity += 1;
            continue;
        }
        match worst_finite_pole(&cur, &m, var) {
            Some((q, o)) => {
                cur = reduce_pole_finite(&cur, &m, var, &q, o)?;
                stats.finite += 1;
            }
            None => return Ok((cur, stats)),
        }
    }
    if is_simple(&cur, var) {
        return Ok((cur, stats));
    }
    Err(Error::ReductionLimit(MAX_PASSES))
}
