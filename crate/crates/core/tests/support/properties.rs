//! Randomized property suites. Each returns `Err` with the minimal failing
//! input found by proptest.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use twint_core::algebra::*;
use twint_core::cohomology::{monomial_basis, Twist};
use twint_core::intersect::{FibrationPlan, PlanOptions};
use twint_core::oracle::{numeric_global_residue, DD};
use twint_core::residue::{bezoutian_dual, global_residue_of};
use twint_core::Error;

pub const CASES: u32 = 100;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        max_global_rejects: 20 * cases,
        ..Config::default()
    })
}

fn run<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&s, f).map_err(|e| e.to_string())
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(what()))
    }
}

/// Reject samples that land on non-generic or degenerate input.
fn usable<T>(r: twint_core::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| match e.root() {
        Error::DegenerateFibration { .. }
        | Error::HigherPoleConnection { .. }
        | Error::NotZeroDimensional
        | Error::SingularSystem(_)
        | Error::GenericityError(_)
        | Error::NotCoprime(_)
        | Error::RootClustering(_)
        | Error::ZeroDenominator
        | Error::InvalidInput(_) => TestCaseError::reject(e.to_string()),
        _ => TestCaseError::fail(e.to_string()),
    })
}

/// `Σ c_k · z^k · g^j` from a flat coefficient list, `width` powers of `z`
/// per power of `g`.
fn poly_str(cs: &[i64], z: &str, g: Option<&str>, width: usize) -> String {
    let mut terms = vec!["0".to_string()];
    for (k, c) in cs.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let (zi, gi) = (k % width, k / width);
        let mut t = format!("({})", c);
        if zi > 0 {
            t += &format!("*{}^{}", z, zi);
        }
        if let (Some(g), true) = (g, gi > 0) {
            t += &format!("*{}^{}", g, gi);
        }
        terms.push(t);
    }
    terms.join("+")
}

fn coeffs(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-9i64..=9, n)
}

fn nonzero_coeffs(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<i64>> {
    coeffs(n).prop_filter("zero polynomial", |v| v.iter().any(|&c| c != 0))
}

fn zg() -> Registry {
    VarRegistry::new(&["z"], &["g"]).unwrap()
}

fn zq() -> Registry {
    VarRegistry::new(&["z"], &[] as &[&str]).unwrap()
}

pub fn normalization_idempotence() -> Result<(), String> {
    let r = zg();
    run(CASES, (coeffs(1..=9), nonzero_coeffs(1..=9)), |(a, b)| {
        let num = parse_poly(&poly_str(&a, "z", Some("g"), 3), &r).unwrap();
        let den = parse_poly(&poly_str(&b, "z", Some("g"), 3), &r).unwrap();
        let f = RatFunc::new(num.clone(), den.clone()).unwrap();
        let again = RatFunc::new(f.num().clone(), f.den().clone()).unwrap();
        check(again == f, || format!("{} renormalized to {}", f, again))?;
        check(ratfunc_normalize(num, den).unwrap() == f, || "normalize disagrees with new".into())?;
        let back = parse_ratfunc(&f.to_string(), &r).unwrap();
        check(back == f, || format!("{} reparsed as {}", f, back))
    })
}

pub fn division_bezout_partial_fractions() -> Result<(), String> {
    let r = zg();
    run(CASES, (coeffs(1..=8), nonzero_coeffs(1..=6), nonzero_coeffs(1..=4)), |(a, b, c)| {
        let pa = parse_poly(&poly_str(&a, "z", Some("g"), 4), &r).unwrap();
        let pb = parse_poly(&poly_str(&b, "z", Some("g"), 3), &r).unwrap();
        prop_assume!(pb.depends_on(0));
        let (q, rem) = poly_divmod(&pa, &pb, 0).unwrap();
        let b_rf = RatFunc::from(pb.clone());
        check(&(&q * &b_rf) + &rem == RatFunc::from(pa.clone()), || "a != q b + r".into())?;
        check(
            UniPoly::from_ratfunc(&rem, 0).is_some_and(|u| u.deg().is_none_or(|d| d < pb.degree_in(0) as usize)),
            || format!("remainder {} too large", rem),
        )?;

        let ua = UniPoly::from_poly(&pa, 0);
        let ub = UniPoly::from_poly(&pb, 0);
        let (g, s, t) = UniPoly::ext_euclid(&ua, &ub);
        check(s.mul(&ua).add(&t.mul(&ub)) == g, || "s a + t b != gcd".into())?;
        if !ua.is_zero() {
            check(ua.rem(&g).is_zero() && ub.rem(&g).is_zero(), || "gcd does not divide".into())?;
        }

        let pc = parse_poly(&poly_str(&c, "z", None, 4), &r).unwrap();
        let f = RatFunc::new(pa.clone(), &pb * &pc).unwrap();
        let v = partial_fractions(&f, 0);
        check(v.recombine() == f, || format!("partial fractions of {} do not recombine", f))?;
        for t in &v.frac_terms {
            let dq = t.q.degree_in(0) as usize;
            check(t.parts.iter().all(|p| p.deg().is_none_or(|d| d < dq)), || {
                format!("numerator degree not below {}", t.q)
            })?;
        }
        Ok(())
    })
}

pub fn squarefree_coprimality() -> Result<(), String> {
    let r = zg();
    let factor = (nonzero_coeffs(2..=3), 1u32..=3);
    run(CASES, prop::collection::vec(factor, 1..=3), |fs| {
        let mut p = MultiPoly::one(&r);
        for (c, k) in &fs {
            let f = parse_poly(&poly_str(c, "z", Some("g"), 2), &r).unwrap();
            p = &p * &f.pow(*k);
        }
        prop_assume!(p.depends_on(0));
        let sf = squarefree_factor(&p, 0);
        let mut prod = MultiPoly::one(&r);
        for (i, (f, k)) in sf.iter().enumerate() {
            prod = &prod * &f.pow(*k);
            check(gcd_poly(f, &f.derivative(0)).degree_in(0) == 0, || format!("{} is not squarefree", f))?;
            for (g, _) in &sf[i + 1..] {
                check(gcd_poly(f, g).degree_in(0) == 0, || format!("{} and {} share a factor", f, g))?;
            }
        }
        // equal up to a factor free of z
        let ratio = RatFunc::new(p.clone(), prod).unwrap();
        check(!ratio.depends_on(0), || format!("product of factors differs from {}", p))
    })
}

pub fn residue_linearity_and_bezoutian_duality() -> Result<(), String> {
    let r = zg();
    let s = (nonzero_coeffs(4..=8), coeffs(1..=4), coeffs(1..=4), nonzero_coeffs(1..=3), -5i64..=5, -5i64..=5);
    run(CASES, s, |(p, a1, a2, d, x, y)| {
        let pp = parse_poly(&poly_str(&p, "z", Some("g"), 4), &r).unwrap();
        prop_assume!(pp.depends_on(0));
        let up = UniPoly::from_poly(&pp, 0);
        let nu = up.degree();
        let den = parse_poly(&poly_str(&d, "z", None, 3), &r).unwrap();
        let f1 = RatFunc::new(parse_poly(&poly_str(&a1, "z", Some("g"), 2), &r).unwrap(), den.clone()).unwrap();
        let f2 = RatFunc::from(parse_poly(&poly_str(&a2, "z", Some("g"), 2), &r).unwrap());
        let (cx, cy) = (RatFunc::int(&r, x), RatFunc::int(&r, y));
        let lhs = usable(global_residue_of(&(&(&cx * &f1) + &(&cy * &f2)), &pp, 0))?;
        let r1 = usable(global_residue_of(&f1, &pp, 0))?;
        let r2 = usable(global_residue_of(&f2, &pp, 0))?;
        check(lhs == &(&cx * &r1) + &(&cy * &r2), || "residue is not linear".into())?;

        let w = bezoutian_dual(&up);
        for i in 0..nu {
            for (j, wj) in w.iter().enumerate() {
                let f = &RatFunc::var(&r, 0).pow(i as u32) * &wj.to_ratfunc();
                let v = global_residue_of(&f, &pp, 0).map_err(|e| TestCaseError::fail(e.to_string()))?;
                let want = if i == j { RatFunc::one(&r) } else { RatFunc::zero(&r) };
                check(v == want, || format!("res(z^{} w_{}) = {}", i, j + 1, v))?;
            }
        }
        Ok(())
    })
}

pub fn residue_matches_numeric_sum() -> Result<(), String> {
    let r = zq();
    run(2 * CASES, (nonzero_coeffs(3..=7), coeffs(1..=5), nonzero_coeffs(1..=4)), |(p, a, d)| {
        let pp = parse_poly(&poly_str(&p, "z", None, 8), &r).unwrap();
        prop_assume!(pp.degree_in(0) >= 1);
        let f = RatFunc::new(
            parse_poly(&poly_str(&a, "z", None, 8), &r).unwrap(),
            parse_poly(&poly_str(&d, "z", None, 8), &r).unwrap(),
        )
        .unwrap();
        let exact = usable(global_residue_of(&f, &pp, 0))?;
        let num = usable(numeric_global_residue(&f, &pp, 0))?;
        let e = exact.as_constant().unwrap();
        let ev = DD::from_q(&e).to_f64();
        let err = ((num.re - ev).powi(2) + num.im.powi(2)).sqrt();
        let ok = if ev == 0.0 { err < 1e-10 } else { err <= 1e-10 * ev.abs() };
        check(ok, || format!("exact {} numeric {}", ev, num))
    })
}

/// A generic twist in `z1, z2`: `z1^a z2^b L^c` with `L` of degree at most
/// two and non-integer rational exponents.
#[derive(Clone, Debug)]
pub struct Bivariate {
    pub l: Vec<i64>,
    pub exps: [(i64, i64); 3],
    pub left: Vec<i64>,
    pub right: Vec<i64>,
}

fn exponent() -> impl Strategy<Value = (i64, i64)> {
    (prop::sample::select(vec![3i64, 5, 7]), 1i64..=20, any::<bool>())
        .prop_filter("integer", |(q, p, _)| p % q != 0)
        .prop_map(|(q, p, s)| (if s { p } else { -p }, q))
}

/// Some `Σ n_i γ_i` with `n_i ∈ {0, 1, 2}`, not all zero, is an integer.
/// Such exponents make colliding divisors (or infinity) resonant.
fn resonant(e: &[(i64, i64); 3]) -> bool {
    let den = e.iter().map(|(_, q)| q).product::<i64>();
    (1..27).any(|k: i64| {
        let n = [k % 3, k / 3 % 3, k / 9];
        let num: i64 = (0..3).map(|i| n[i] * e[i].0 * (den / e[i].1)).sum();
        num % den == 0
    })
}

fn bivariate() -> impl Strategy<Value = Bivariate> {
    (
        nonzero_coeffs(6..=6),
        [exponent(), exponent(), exponent()],
        nonzero_coeffs(2..=3),
        nonzero_coeffs(2..=3),
    )
        .prop_filter("L is not a monomial", |(l, ..)| l[0] != 0 && l[1..].iter().any(|&c| c != 0))
        .prop_filter("resonant exponents", |(_, e, ..)| !resonant(e))
        .prop_map(|(l, exps, left, right)| Bivariate { l, exps, left, right })
}

impl Bivariate {
    fn reg() -> Registry {
        VarRegistry::new(&["z1", "z2"], &[] as &[&str]).unwrap()
    }

    fn l_str(&self) -> String {
        let m = ["1", "z1", "z2", "z1^2", "z1*z2", "z2^2"];
        let t: Vec<String> = self.l.iter().zip(m).map(|(c, m)| format!("({})*{}", c, m)).collect();
        t.join("+")
    }

    pub fn twist(&self) -> Twist {
        let r = Self::reg();
        let bases = ["z1".to_string(), "z2".to_string(), self.l_str()];
        let f = bases
            .iter()
            .zip(&self.exps)
            .map(|(b, (p, q))| {
                (
                    parse_poly(b, &r).unwrap(),
                    Affine::parse(&format!("{}/{}", p, q), &r).unwrap(),
                )
            })
            .collect();
        Twist::new(&r, f).unwrap()
    }

    fn form(&self, cs: &[i64]) -> RatFunc {
        let r = Self::reg();
        let m = ["1", "z1", "z2"];
        let num: Vec<String> = cs.iter().zip(m).map(|(c, m)| format!("({})*{}", c, m)).collect();
        parse_ratfunc(&format!("({})/(z1*z2*({}))", num.join("+"), self.l_str()), &r).unwrap()
    }

    pub fn left(&self) -> RatFunc {
        self.form(&self.left)
    }

    pub fn right(&self) -> RatFunc {
        self.form(&self.right)
    }
}

fn plan(t: &Twist, order: &[usize]) -> Result<FibrationPlan, TestCaseError> {
    usable(FibrationPlan::build(t, order, &PlanOptions::default()))
}

fn plan_with_top(t: &Twist, order: &[usize]) -> Result<FibrationPlan, TestCaseError> {
    let mut opts = PlanOptions::default();
    let top = usable(monomial_basis(&t.connection(), order))?;
    opts.bases.insert(order.len(), top);
    usable(FibrationPlan::build(t, order, &opts))
}

pub fn duality_at_every_level() -> Result<(), String> {
    run(CASES, bivariate(), |b| {
        let t = b.twist();
        let p = plan_with_top(&t, &[0, 1])?;
        let r = t.registry();
        for i in 1..p.n() {
            let lvl = p.level(i);
            let m = usable(p.pairing_matrix(i, &lvl.basis, &lvl.dual))?;
            check(m == RatMatrix::identity(r, lvl.basis.len()), || format!("level {}: {:?}", i, m))?;
        }
        let top = p.top_basis().unwrap().to_vec();
        let d = usable(p.top_dual())?;
        let m = usable(p.pairing_matrix(p.n(), &top, &d))?;
        check(m == RatMatrix::identity(r, top.len()), || "top level duality".into())
    })
}

pub fn omega_definitions_agree() -> Result<(), String> {
    run(CASES, bivariate(), |b| {
        let p = plan(&b.twist(), &[1, 0])?;
        for i in 1..=p.n() {
            let right = usable(p.connection_matrix_right(i))?;
            check(right == p.omega(i).entries, || format!("level {}: left and right definitions differ", i))?;
        }
        Ok(())
    })
}

pub fn adjugate_identity() -> Result<(), String> {
    run(CASES, bivariate(), |b| {
        let p = plan(&b.twist(), &[0, 1])?;
        for i in 1..=p.n() {
            let om = p.omega(i);
            let r = om.entries.registry();
            let want = RatMatrix::identity(r, om.nu()).map(|x| x * &om.det);
            check(om.entries.mul(&om.adjugate) == want, || format!("level {}: Ω adj Ω != det Ω", i))?;
            check(om.adjugate.mul(&om.entries) == want, || format!("level {}: adj Ω Ω != det Ω", i))?;
        }
        Ok(())
    })
}

pub fn gauge_invariance() -> Result<(), String> {
    let xi = (nonzero_coeffs(1..=3), 0usize..2);
    run(CASES, (bivariate(), xi), |(b, (c, k))| {
        let t = b.twist();
        let p = plan(&t, &[0, 1])?;
        let r = t.registry();
        let m = ["1", "z1", "z2"];
        let num: Vec<String> = c.iter().zip(m).map(|(c, m)| format!("({})*{}", c, m)).collect();
        let xi = parse_ratfunc(&format!("({})/(z1*z2)", num.join("+")), r).unwrap();
        let w = t.connection().component(k).clone();
        let exact_l = &xi.derivative(k) + &(&w * &xi);
        let exact_r = &xi.derivative(k) - &(&w * &xi);
        let (l, rt) = (b.left(), b.right());
        let base = usable(p.intersection_number(&l, &rt))?;
        let shifted = usable(p.intersection_number(&(&l + &exact_l), &rt))?;
        check(shifted == base, || format!("left shift by ∇ξ changed {} to {}", base, shifted))?;
        let shifted = usable(p.intersection_number(&l, &(&rt + &exact_r)))?;
        check(shifted == base, || format!("right shift by ∇ξ changed {} to {}", base, shifted))
    })
}

pub fn swap_symmetry() -> Result<(), String> {
    run(CASES, bivariate(), |b| {
        let t = b.twist();
        let p = plan(&t, &[0, 1])?;
        let q = plan(&t.negated(), &[0, 1])?;
        let (l, r) = (b.left(), b.right());
        let v = usable(p.intersection_number(&l, &r))?;
        let w = usable(q.intersection_number(&r, &l))?;
        // (-1)^n with n = 2
        check(v == w, || format!("{} vs swapped {}", v, w))
    })
}

pub fn order_independence() -> Result<(), String> {
    run(CASES, bivariate(), |b| {
        let t = b.twist();
        let p = plan(&t, &[0, 1])?;
        let q = plan(&t, &[1, 0])?;
        let (l, r) = (b.left(), b.right());
        let v = usable(p.intersection_number(&l, &r))?;
        let w = usable(q.intersection_number(&l, &r))?;
        check(v == w, || format!("order (z1,z2) gives {}, (z2,z1) gives {}", v, w))
    })
}

pub type Suite = fn() -> Result<(), String>;

/// Every suite with its name.
#[allow(dead_code)]
pub fn all() -> Vec<(&'static str, Suite)> {
    vec![
        ("normalization idempotence", normalization_idempotence),
        ("division, Bezout, partial fractions", division_bezout_partial_fractions),
        ("squarefree coprimality", squarefree_coprimality),
        ("residue linearity, Bezoutian duality", residue_linearity_and_bezoutian_duality),
        ("residue vs numeric sum (200)", residue_matches_numeric_sum),
        ("duality at every level", duality_at_every_level),
        ("left and right connection matrices", omega_definitions_agree),
        ("adjugate identity", adjugate_identity),
        ("gauge invariance", gauge_invariance),
        ("swap symmetry", swap_symmetry),
        ("order independence", order_independence),
    ]
}
