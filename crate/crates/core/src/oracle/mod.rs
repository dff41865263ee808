//! Floating-point cross-checks of exact intersection numbers.
//!
//! Parameters are replaced by random rationals, the fibration is rebuilt at
//! that point, and the last univariate pairing is summed numerically in two
//! ways: over the roots of `det Ω` with the simple-root formula, and over the
//! singular points of the integrand by contour quadrature, the point at
//! infinity included.

pub mod dd;
pub mod numeric;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{MultiPoly, RatFunc, Registry, Q};
use crate::cohomology::Twist;
use crate::error::{Error, Result};
use crate::intersect::{build_with_rotation_search, ConnectionMatrix, PlanOptions, RotatedPlan};

pub use dd::{cabs, to_c64, CDD, DD};
pub use numeric::{NumPoly, NumRat};

/// Retries with a fresh seed when a sample hits a degenerate point.
pub const MAX_ATTEMPTS: usize = 5;
/// Quadrature nodes per contour.
const NODES: usize = 128;

/// A rational parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericSample {
    pub bindings: BTreeMap<String, Q>,
    pub seed: u64,
    pub tolerance: f64,
}

impl NumericSample {
    pub fn new(bindings: BTreeMap<String, Q>, tolerance: f64) -> Self {
        NumericSample {
            bindings,
            seed: 0,
            tolerance,
        }
    }

    /// Random non-integer rationals `p/q`, `q ∈ {3, 5, 7, 11, 13}`, for every
    /// parameter of the registry.
    pub fn random(reg: &Registry, seed: u64, tolerance: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bindings = reg
            .params()
            .iter()
            .map(|name| {
                let q: i64 = [3, 5, 7, 11, 13][rng.gen_range(0..5)];
                let mut p: i64 = rng.gen_range(1..=4 * q);
                if p % q == 0 {
                    p += 1;
                }
                if rng.gen_bool(0.5) {
                    p = -p;
                }
                (name.clone(), Q::new(BigInt::from(p), BigInt::from(q)))
            })
            .collect();
        NumericSample {
            bindings,
            seed,
            tolerance,
        }
    }

    /// `(registry slot, value)` pairs.
    pub fn values(&self, reg: &Registry) -> Result<Vec<(usize, Q)>> {
        self.bindings
            .iter()
            .map(|(k, v)| Ok((reg.require(k)?, v.clone())))
            .collect()
    }

    pub fn specialize(&self, f: &RatFunc) -> Result<RatFunc> {
        f.eval_vars(&self.values(f.registry())?)
    }

    /// Value of a function of the parameters only.
    pub fn eval(&self, f: &RatFunc) -> Result<Q> {
        let g = self.specialize(f)?;
        g.as_constant().ok_or_else(|| {
            Error::InvalidInput(format!("{} still depends on an unbound variable", g))
        })
    }

    /// Bindings rendered as `name -> "p/q"`.
    pub fn display_bindings(&self) -> BTreeMap<String, String> {
        self.bindings.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
    }
}

/// Both numeric evaluations of one univariate pairing.
#[derive(Clone, Copy, Debug)]
pub struct UnivariateCheck {
    /// Sum over the roots of `det Ω`.
    pub critical: CDD,
    /// Sum over the singular points, infinity included.
    pub singular: CDD,
    pub rel_gap: f64,
}

impl UnivariateCheck {
    pub fn value(&self) -> Complex64 {
        to_c64(self.critical)
    }
}

fn eval_matrix(m: &[Vec<NumRat>], z: CDD) -> Vec<Vec<CDD>> {
    m.iter().map(|r| r.iter().map(|f| f.eval(z)).collect()).collect()
}

fn eval_vec(v: &[NumRat], z: CDD) -> Vec<CDD> {
    v.iter().map(|f| f.eval(z)).collect()
}

fn dot(a: &[CDD], b: &[CDD]) -> CDD {
    a.iter().zip(b).fold(CDD::zero(), |acc, (x, y)| acc + *x * *y)
}

/// Merge points that agree to working precision; reject distinct points
/// that are closer than the clustering threshold.
fn merge_points(pts: Vec<CDD>) -> Result<Vec<CDD>> {
    let mut out: Vec<CDD> = Vec::new();
    for p in pts {
        let scale = cabs(p).hi.max(1.0);
        if out.iter().any(|q| cabs(p - *q).hi <= 1e-20 * scale) {
            continue;
        }
        out.push(p);
    }
    let sep = numeric::min_separation(&out);
    if sep < numeric::CLUSTER_SEPARATION {
        return Err(Error::RootClustering(sep));
    }
    Ok(out)
}

/// The `NODES`-th roots of unity in double-double, from half-angle steps
/// starting at `i` and repeated multiplication.
fn unit_roots() -> Vec<CDD> {
    let two = DD::from_f64(2.0);
    let (mut c, mut s) = (DD::zero(), DD::from_f64(1.0));
    let mut n = 4;
    while n < NODES {
        let ch = ((DD::from_f64(1.0) + c) / two).sqrt();
        s = s / (two * ch);
        c = ch;
        n *= 2;
    }
    let w = num_complex::Complex::new(c, s);
    let mut out = Vec::with_capacity(NODES);
    let mut z = dd::cdd(DD::from_f64(1.0));
    for _ in 0..NODES {
        out.push(z);
        z = z * w;
    }
    out
}

/// `(1/2πi) ∮ g dz` over the circle `|z - c| = r`, trapezoidal rule.
fn contour(g: &dyn Fn(CDD) -> Result<CDD>, nodes: &[CDD], c: CDD, r: DD) -> Result<CDD> {
    let mut acc = CDD::zero();
    for w in nodes {
        let step = *w * dd::cdd(r);
        acc = acc + g(c + step)? * step;
    }
    Ok(acc / dd::cdd(DD::from_f64(nodes.len() as f64)))
}

/// Numeric value of the univariate pairing of simple-pole vectors `vL`, `vR`
/// against `Ω` with every parameter specialized.
///
/// Path (a): `-Σ_{P(r)=0} Q(r) vL(r)·adj Ω(r)·vR(r) / P'(r)` with
/// `det Ω = P/Q`. Path (b): the sum of the residues of `vL Ω⁻¹ vR` at the
/// poles of `Ω`, `vL`, `vR` and at infinity, each from a contour integral.
pub fn numeric_univariate_intersection(
    om: &ConnectionMatrix,
    v_l: &[RatFunc],
    v_r: &[RatFunc],
    tolerance: f64,
) -> Result<UnivariateCheck> {
    let x = om.var;
    let nu = om.nu();
    let entries: Vec<Vec<NumRat>> = (0..nu)
        .map(|r| {
            (0..nu)
                .map(|c| NumRat::from_ratfunc(om.entries.get(r, c), x))
                .collect()
        })
        .collect::<Result<_>>()?;
    let nl: Vec<NumRat> = v_l.iter().map(|f| NumRat::from_ratfunc(f, x)).collect::<Result<_>>()?;
    let nr: Vec<NumRat> = v_r.iter().map(|f| NumRat::from_ratfunc(f, x)).collect::<Result<_>>()?;
    let p = NumPoly::from_poly(om.det_num(), x)?;
    let q = NumPoly::from_poly(om.det_den(), x)?;
    let dp = p.derivative();

    // (a) critical points
    let roots = p.roots()?;
    let mut critical = CDD::zero();
    let mut magnitude = DD::zero();
    for &r in &roots {
        let adj = numeric::adjugate(&eval_matrix(&entries, r));
        let vr = eval_vec(&nr, r);
        let row: Vec<CDD> = (0..nu).map(|a| dot(&adj[a], &vr)).collect();
        let term = dot(&eval_vec(&nl, r), &row) * q.eval(r) / dp.eval(r);
        magnitude += cabs(term);
        critical = critical - term;
    }

    // (b) singular points and infinity
    let mut poles = Vec::new();
    for f in entries.iter().flatten().chain(&nl).chain(&nr) {
        if !f.num.coeffs.is_empty() {
            poles.extend(f.poles()?);
        }
    }
    let poles = merge_points(poles)?;
    let mut all = poles.clone();
    all.extend(roots.iter().copied());
    let sep = numeric::min_separation(&all);
    if sep < numeric::CLUSTER_SEPARATION {
        return Err(Error::RootClustering(sep));
    }
    let g = |z: CDD| -> Result<CDD> {
        let m = eval_matrix(&entries, z);
        let sol = numeric::solve(&m, &eval_vec(&nr, z)).ok_or(Error::RootClustering(0.0))?;
        Ok(dot(&eval_vec(&nl, z), &sol))
    };
    let nodes = unit_roots();
    let mut singular = CDD::zero();
    for (i, &s) in all.iter().enumerate().take(poles.len()) {
        let d = all
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, t)| cabs(s - *t).hi)
            .fold(f64::INFINITY, f64::min);
        let rad = if d.is_finite() { 0.25 * d } else { 1.0 };
        singular = singular + contour(&g, &nodes, s, DD::from_f64(rad))?;
    }
    let far = all.iter().map(|z| cabs(*z).hi).fold(1.0, f64::max);
    singular = singular - contour(&g, &nodes, CDD::zero(), DD::from_f64(4.0 * far))?;

    let a = cabs(critical).hi;
    let b = cabs(singular).hi;
    let floor = tolerance * magnitude.hi;
    let rel_gap = cabs(critical - singular).hi / a.max(b).max(floor).max(f64::MIN_POSITIVE);
    if rel_gap > tolerance {
        return Err(Error::ToleranceExceeded { rel_err: rel_gap, tolerance });
    }
    Ok(UnivariateCheck {
        critical,
        singular,
        rel_gap,
    })
}

/// `Σ_{P(r)=0} f(r)/P'(r)` from numeric roots; `f` and `P` in `var` only.
pub fn numeric_global_residue(f: &RatFunc, p: &MultiPoly, var: usize) -> Result<Complex64> {
    let pn = NumPoly::from_poly(p, var)?;
    let dp = pn.derivative();
    let fnum = NumRat::from_ratfunc(f, var)?;
    let mut acc = CDD::zero();
    for r in pn.roots()? {
        acc = acc + fnum.eval(r) / dp.eval(r);
    }
    Ok(to_c64(acc))
}

/// An intersection-number problem in the generic parameters.
#[derive(Clone, Debug)]
pub struct Problem {
    pub twist: Twist,
    pub order: Vec<usize>,
    pub options: PlanOptions,
    pub left: RatFunc,
    pub right: RatFunc,
}

/// A fibration rebuilt exactly at a parameter sample; the last level is
/// evaluated numerically.
#[derive(Debug)]
pub struct SampledPlan {
    pub sample: NumericSample,
    pub rotated: RotatedPlan,
}

impl SampledPlan {
    pub fn new(twist: &Twist, order: &[usize], opts: &PlanOptions, sample: &NumericSample) -> Result<Self> {
        let values = sample.values(twist.registry())?;
        let t = twist.specialize(&values)?;
        let mut o = opts.clone();
        for b in o.bases.values_mut().chain(o.candidates.values_mut()) {
            for f in b.iter_mut() {
                *f = f.eval_vars(&values)?;
            }
        }
        let rotated = build_with_rotation_search(&t, order, &o)?;
        Ok(SampledPlan {
            sample: sample.clone(),
            rotated,
        })
    }

    /// Exact `⟨φ_L | φ_R⟩` at the sample, computed over the rationals.
    pub fn exact(&self, left: &RatFunc, right: &RatFunc) -> Result<Q> {
        let l = self.rotated.form(&self.sample.specialize(left)?)?;
        let r = self.rotated.form(&self.sample.specialize(right)?)?;
        self.rotated
            .plan
            .intersection_number(&l, &r)?
            .as_constant()
            .ok_or_else(|| Error::InvalidInput("unbound variable after specialization".into()))
    }

    /// Numeric `⟨φ_L | φ_R⟩` at the sample.
    pub fn pair(&self, left: &RatFunc, right: &RatFunc) -> Result<UnivariateCheck> {
        let l = self.rotated.form(&self.sample.specialize(left)?)?;
        let r = self.rotated.form(&self.sample.specialize(right)?)?;
        let plan = &self.rotated.plan;
        let n = plan.n();
        if n == 0 {
            let v = (&l * &r)
                .as_constant()
                .ok_or_else(|| Error::InvalidInput("unbound variable in a level-0 product".into()))?;
            let c = dd::cdd_q(&v);
            return Ok(UnivariateCheck {
                critical: c,
                singular: c,
                rel_gap: 0.0,
            });
        }
        if l.is_zero() || r.is_zero() {
            return Ok(UnivariateCheck {
                critical: CDD::zero(),
                singular: CDD::zero(),
                rel_gap: 0.0,
            });
        }
        let (_, _, lr, rr) = plan.reduced_pair(n, &l, &r)?;
        numeric_univariate_intersection(plan.omega(n), &lr, &rr, self.sample.tolerance)
    }
}

/// End-to-end numeric intersection number at one sample.
pub fn numeric_intersection(problem: &Problem, sample: &NumericSample) -> Result<UnivariateCheck> {
    SampledPlan::new(&problem.twist, &problem.order, &problem.options, sample)?
        .pair(&problem.left, &problem.right)
}

/// One numeric confirmation of an exact result.
#[derive(Clone, Debug, Serialize)]
pub struct OracleRecord {
    pub sample: BTreeMap<String, String>,
    pub numeric: [f64; 2],
    pub exact_at_sample: f64,
    pub rel_err: f64,
}

impl OracleRecord {
    pub fn within(&self, tol: f64) -> bool {
        self.rel_err <= tol
    }
}

/// Relative error of a numeric value against an exact rational; absolute
/// when the exact value is zero.
pub fn rel_err(numeric: CDD, exact: &Q) -> f64 {
    let e = dd::cdd_q(exact);
    let diff = cabs(numeric - e).hi;
    if exact.is_zero() {
        diff
    } else {
        diff / cabs(e).hi
    }
}

fn retryable(e: &Error) -> bool {
    matches!(
        e.root(),
        Error::RootClustering(_)
            | Error::ZeroDenominator
            | Error::GenericityError(_)
            | Error::SingularSystem(_)
            | Error::NotCoprime(_)
            | Error::DegenerateFibration { .. }
            | Error::HigherPoleConnection { .. }
            | Error::NotZeroDimensional
    )
}

/// Run `f` on fresh samples until one succeeds, at most [`MAX_ATTEMPTS`] times.
pub fn with_retries<T>(
    reg: &Registry,
    seed: u64,
    tolerance: f64,
    mut f: impl FnMut(&NumericSample) -> Result<T>,
) -> Result<T> {
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS as u64 {
        let s = NumericSample::random(reg, seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15)), tolerance);
        match f(&s) {
            Ok(v) => return Ok(v),
            Err(e) if retryable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

/// Compare an exact result with the numeric pipeline on `count` samples.
pub fn confirm(problem: &Problem, exact: &RatFunc, seed: u64, count: usize, tolerance: f64) -> Result<Vec<OracleRecord>> {
    let reg = problem.twist.registry();
    (0..count as u64)
        .map(|k| {
            with_retries(reg, seed.wrapping_add(k.wrapping_mul(7919)), tolerance, |s| {
                let ex = s.eval(exact)?;
                let num = numeric_intersection(problem, s)?;
                Ok(OracleRecord {
                    sample: s.display_bindings(),
                    numeric: [num.critical.re.to_f64(), num.critical.im.to_f64()],
                    exact_at_sample: DD::from_q(&ex).to_f64(),
                    rel_err: rel_err(num.critical, &ex),
                })
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_poly, parse_ratfunc, VarRegistry};

    #[test]
    fn global_residue_numeric() {
        let r = VarRegistry::new(&["z"], &[] as &[&str]).unwrap();
        let v = numeric_global_residue(
            &parse_ratfunc("z", &r).unwrap(),
            &parse_poly("z^2-3*z+2", &r).unwrap(),
            0,
        )
        .unwrap();
        assert!((v.re - 1.0).abs() < 1e-25 && v.im.abs() < 1e-25);
        let v = numeric_global_residue(
            &parse_ratfunc("1/(z-2)", &r).unwrap(),
            &parse_poly("z^2+1", &r).unwrap(),
            0,
        )
        .unwrap();
        assert!((v.re + 0.2).abs() < 1e-25 && v.im.abs() < 1e-25);
    }

    #[test]
    fn clustered_roots_rejected() {
        let r = VarRegistry::new(&["z"], &[] as &[&str]).unwrap();
        let p = parse_poly("(z-1)*(z-1-1/100000000)", &r).unwrap();
        let e = NumPoly::from_poly(&p, 0).unwrap().roots().unwrap_err();
        assert!(matches!(e, Error::RootClustering(_)));
    }
}
