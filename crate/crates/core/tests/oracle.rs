use std::collections::BTreeMap;

use twint_core::algebra::*;
use twint_core::cohomology::*;
use twint_core::intersect::*;
use twint_core::oracle::*;

fn rf(s: &str, r: &Registry) -> RatFunc {
    parse_ratfunc(s, r).unwrap()
}

fn twist(r: &Registry, f: &[(&str, &str)]) -> Twist {
    Twist::new(
        r,
        f.iter()
            .map(|(p, g)| (parse_poly(p, r).unwrap(), Affine::parse(g, r).unwrap()))
            .collect(),
    )
    .unwrap()
}

fn at(pairs: &[(&str, i64, i64)]) -> NumericSample {
    NumericSample::new(
        pairs.iter().map(|(k, p, q)| (k.to_string(), qr(*p, *q))).collect(),
        1e-10,
    )
}

fn close(v: num_complex::Complex64, want: f64) {
    assert!(
        (v.re - want).abs() <= 1e-12 * want.abs().max(1.0) && v.im.abs() < 1e-12,
        "{} vs {}",
        v,
        want
    );
}

const P2: &str = "z^6+z^5+z^4+z^3+z^2+z+1";

fn univariate() -> Problem {
    let r = VarRegistry::new(&["z"], &["g"]).unwrap();
    Problem {
        twist: twist(&r, &[("z", "g"), (P2, "g")]),
        order: vec![0],
        options: PlanOptions::default(),
        left: rf("1/z^2", &r),
        right: rf("1", &r),
    }
}

#[test]
fn univariate_reference_at_a_third() {
    let p = univariate();
    let v = numeric_intersection(&p, &at(&[("g", 1, 3)])).unwrap();
    close(v.value(), -9.0 / 4.0);
    assert!(v.rel_gap < 1e-13, "{}", v.rel_gap);
}

#[test]
fn reduced_univariate_pair_directly() {
    let p = univariate();
    let s = at(&[("g", 1, 3)]);
    let plan = SampledPlan::new(&p.twist, &p.order, &p.options, &s).unwrap();
    let inner = &plan.rotated.plan;
    let l = s.specialize(&p.left).unwrap();
    let (_, _, lr, rr) = inner.reduced_pair(1, &l, &s.specialize(&p.right).unwrap()).unwrap();
    let v = numeric_univariate_intersection(inner.omega(1), &lr, &rr, 1e-10).unwrap();
    close(v.value(), -9.0 / 4.0);
    close(to_c64(v.singular), -9.0 / 4.0);
}

#[test]
fn single_simple_root() {
    let r = VarRegistry::new(&["z"], &[] as &[&str]).unwrap();
    let v = numeric_global_residue(&rf("5", &r), &parse_poly("3*z-2", &r).unwrap(), 0).unwrap();
    close(v, 5.0 / 3.0);
}

#[test]
fn elliptic_at_a_fifth() {
    let r = VarRegistry::new(&["z1", "z2"], &["g"]).unwrap();
    let p3 = "z2^2-4*z1^3+11*z1-7";
    let p = Problem {
        twist: twist(&r, &[("z1", "g"), ("z2", "g"), (p3, "g")]),
        order: vec![1, 0],
        options: PlanOptions::default(),
        left: rf(&format!("1/({})", p3), &r),
        right: rf(&format!("z1/({})", p3), &r),
    };
    let v = numeric_intersection(&p, &at(&[("g", 1, 5)])).unwrap();
    close(v.value(), -25.0 / 24.0);
}

#[test]
fn genus_one_at_a_seventh() {
    let r = VarRegistry::new(&["z1", "z2"], &["a4", "a5", "e"]).unwrap();
    let p3 = "z1^2*z2+z1*z2^2+z1+a4*z1*z2+a5*z2";
    let mut bases = BTreeMap::new();
    bases.insert(
        2,
        vec![
            rf("1/(z1*z2)", &r),
            rf(&format!("-1/(2*z1*({}))", p3), &r),
            rf(&format!("-1/(2*({}))", p3), &r),
            rf(&format!("3/4*z2/(z1*({})^2)", p3), &r),
        ],
    );
    let p = Problem {
        twist: twist(&r, &[("z1", "1/2+e"), ("z2", "1/2+e"), (p3, "-1/2")]),
        order: vec![0, 1],
        options: PlanOptions {
            bases,
            ..Default::default()
        },
        left: rf("1/(z1*z2)", &r),
        right: rf("1/(z1*z2)", &r),
    };
    let v = numeric_intersection(&p, &at(&[("a4", 2, 3), ("a5", -5, 7), ("e", 1, 7)])).unwrap();
    close(v.value(), 1568.0 / 33.0);
}

#[test]
fn level_zero_is_a_product() {
    let r = VarRegistry::new(&[] as &[&str], &["g"]).unwrap();
    let p = Problem {
        twist: Twist::new(&r, vec![]).unwrap(),
        order: vec![],
        options: PlanOptions::default(),
        left: rf("g+1", &r),
        right: rf("2", &r),
    };
    let v = numeric_intersection(&p, &at(&[("g", 1, 2)])).unwrap();
    close(v.value(), 3.0);
}

#[test]
fn random_samples_confirm_exact_result() {
    let p = univariate();
    let exact = rf("6*g/((1-g)*(1-7*g))", p.twist.registry());
    let recs = confirm(&p, &exact, 11, 10, 1e-10).unwrap();
    assert_eq!(recs.len(), 10);
    for r in &recs {
        assert!(r.within(1e-8), "{:?}", r);
    }
}

#[test]
fn wrong_value_is_detected() {
    let p = univariate();
    let exact = rf("6*g/((1-g)*(1+7*g))", p.twist.registry());
    let recs = confirm(&p, &exact, 3, 3, 1e-10).unwrap();
    assert!(recs.iter().all(|r| !r.within(1e-8)));
}
