use std::collections::BTreeMap;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use twint_core::algebra::{parse_poly, parse_ratfunc, Affine, RatFunc, Registry, VarRegistry};
use twint_core::cohomology::Twist;
use twint_core::intersect::{FibrationPlan, PlanOptions};
use twint_core::oracle::{confirm, Problem};
use twint_core::par::Execution;

fn twist(r: &Registry, f: &[(&str, &str)]) -> Twist {
    let factors = f
        .iter()
        .map(|(p, g)| (parse_poly(p, r).unwrap(), Affine::parse(g, r).unwrap()))
        .collect();
    Twist::new(r, factors).unwrap()
}

const P3: &str = "z2^2-4*z1^3+11*z1-7";
const G1: &str = "z1^2*z2+z1*z2^2+z1+a4*z1*z2+a5*z2";

fn elliptic() -> (Twist, Vec<usize>, BTreeMap<usize, Vec<RatFunc>>) {
    let r = VarRegistry::new(&["z1", "z2"], &["g"]).unwrap();
    let t = twist(&r, &[("z1", "g"), ("z2", "g"), (P3, "g")]);
    (t, vec![1, 0], BTreeMap::new())
}

fn genus_one() -> (Twist, Vec<usize>, BTreeMap<usize, Vec<RatFunc>>) {
    let r = VarRegistry::new(&["z1", "z2"], &["a4", "a5", "e"]).unwrap();
    let t = twist(&r, &[("z1", "1/2+e"), ("z2", "1/2+e"), (G1, "-1/2")]);
    let top = [
        "1/(z1*z2)".to_string(),
        format!("-1/(2*z1*({}))", G1),
        format!("-1/(2*({}))", G1),
        format!("3/4*z2/(z1*({})^2)", G1),
    ]
    .iter()
    .map(|s| parse_ratfunc(s, &r).unwrap())
    .collect();
    (t, vec![0, 1], BTreeMap::from([(2, top)]))
}

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

/// Plan construction plus the full top-level intersection matrix.
fn intersection_matrix(c: &mut Criterion) {
    let mut g = c.benchmark_group("intersection_matrix");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    for (name, (t, order, bases)) in [("elliptic", elliptic()), ("genus_one", genus_one())] {
        for (mode, exec) in modes() {
            let opts = PlanOptions {
                bases: bases.clone(),
                execution: exec,
                ..Default::default()
            };
            g.bench_with_input(BenchmarkId::new(name, mode), &opts, |b, opts| {
                b.iter(|| {
                    let plan = FibrationPlan::build(&t, &order, opts).unwrap();
                    let top = match plan.top_basis() {
                        Some(top) => top.to_vec(),
                        None => {
                            let r = t.registry();
                            ["1", "z1", "z2", "z1^2", "z1*z2", "z1^3"]
                                .iter()
                                .map(|s| parse_ratfunc(&format!("({})/({})", s, P3), r).unwrap())
                                .collect()
                        }
                    };
                    plan.pairing_matrix(plan.n(), &top, &top).unwrap()
                })
            });
        }
    }
    g.finish();
}

/// Numeric confirmation of the elliptic result at several samples.
fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    let (t, order, _) = elliptic();
    let r = t.registry().clone();
    let exact = parse_ratfunc("1/(4*(1-11*g)*g)", &r).unwrap();
    for (mode, exec) in modes() {
        let problem = Problem {
            twist: t.clone(),
            order: order.clone(),
            options: PlanOptions {
                execution: exec,
                ..Default::default()
            },
            left: parse_ratfunc(&format!("1/({})", P3), &r).unwrap(),
            right: parse_ratfunc(&format!("z1/({})", P3), &r).unwrap(),
        };
        g.bench_function(BenchmarkId::new("elliptic", mode), |b| {
            b.iter(|| confirm(&problem, &exact, 7, 4, 1e-10).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, intersection_matrix, oracle);
criterion_main!(benches);
