use std::path::PathBuf;
use std::process::Command;

use twint::job::{parse_job, serialize, Job, JobError, Right};
use twint::run::{reparse_result, resolve, run_job, Flags, RunError, REPORT_SCHEMA};
use twint_core::algebra::{parse_ratfunc, RatFunc};

fn jobs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("jobs")
}

fn load(name: &str) -> (String, Job) {
    let text = std::fs::read_to_string(jobs().join(name)).unwrap();
    let job = parse_job(&text).unwrap();
    (text, job)
}

fn all_jobs() -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(jobs())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".job"))
        .collect();
    v.sort();
    v
}

fn twint(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_twint")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn minimal_job() {
    let job = parse_job("vars z\nparams g\ntwist z^g\nleft 1/z\nright 1\norder z\n").unwrap();
    assert_eq!(job.vars, ["z"]);
    assert_eq!(job.params, ["g"]);
    assert_eq!(job.twist.len(), 1);
    assert_eq!(job.order, ["z"]);
    let r = job.expr_registry();
    assert_eq!(job.left, Some(parse_ratfunc("1/z", &r).unwrap()));
    assert_eq!(job.right, Some(Right::Form(RatFunc::one(&r))));
}

#[test]
fn elliptic_job_has_the_three_factors() {
    let (_, job) = load("elliptic.job");
    let r = job.expr_registry();
    let bases: Vec<String> = job.twist.iter().map(|(p, _)| p.to_string()).collect();
    let want: Vec<String> = ["z1", "z2", "z2^2-4*z1^3+11*z1-7"]
        .iter()
        .map(|s| twint_core::algebra::parse_poly(s, &r).unwrap().to_string())
        .collect();
    assert_eq!(bases, want);
    assert!(job.twist.iter().all(|(_, g)| g.to_string() == "g"));
    assert_eq!(job.order, ["z2", "z1"]);
}

#[test]
fn double_caret_points_at_the_second_caret() {
    let e = parse_job("vars z\nparams g\ntwist z^^g\n").unwrap_err();
    match e {
        JobError::Parse { line, column, .. } => assert_eq!((line, column), (3, 9)),
        e => panic!("{:?}", e),
    }
}

#[test]
fn undeclared_names_are_located() {
    let e = parse_job("vars z\nparams g\ntwist (z)^(g)\nleft 1/(z+h)\n").unwrap_err();
    assert_eq!(
        e,
        JobError::UndeclaredName {
            line: 4,
            column: 11,
            name: "h".into()
        }
    );
    let e = parse_job("vars z\ntwist (z)^(1/2)\norder w\n").unwrap_err();
    assert!(matches!(e, JobError::UndeclaredName { line: 3, column: 7, .. }), "{:?}", e);
}

#[test]
fn grammar_violations() {
    for (text, line) in [
        ("params g\n", 1),
        ("vars z\nfoo 1\n", 2),
        ("vars z\nvars w\n", 2),
        ("vars z\nparams g\ntwist (z)^(g)\nleft (z\n", 4),
        ("vars z\nparams g\ntwist (z)^(g^2)\n", 3),
        ("vars z1 z2\ntwist (z1)^(1/3)\norder z1\n", 3),
        ("vars z\ntwist (z)^(1/3)\nbasis 2: 1\n", 3),
        ("vars z\ntwist (z)^(1/3)\nbasis x: 1\n", 3),
        ("vars z\ntwist (z)^(1/3)\nright dual 0\n", 3),
        ("vars z1 z2\ntwist (z1)^(1/3)\nrotate z1 z2 0 0\n", 3),
    ] {
        match parse_job(text) {
            Err(JobError::Parse { line: l, .. }) | Err(JobError::UndeclaredName { line: l, .. }) => {
                assert_eq!(l, line, "{:?}", text)
            }
            Ok(j) => panic!("{:?} parsed as {:?}", text, j),
        }
    }
}

#[test]
fn comments_and_blank_lines() {
    let job = parse_job("# header\n\nvars z   # the variable\n  params g\ntwist (z)^(g)\n").unwrap();
    assert_eq!(job.vars, ["z"]);
    assert_eq!(job.order, ["z"]);
}

#[test]
fn every_shipped_job_round_trips() {
    for name in all_jobs() {
        let (_, job) = load(&name);
        let again = parse_job(&serialize(&job)).unwrap_or_else(|e| panic!("{}: {}", name, e));
        assert_eq!(job, again, "{}", name);
        assert_eq!(serialize(&job), serialize(&again));
    }
}

#[test]
fn baikov_job_infers_externals() {
    let (_, job) = load("higgs.job");
    let b = job.baikov.as_ref().unwrap();
    assert_eq!(b.externals, ["p1", "p2"]);
    assert_eq!(job.integration_vars(), ["z7"]);
    assert_eq!(job.right, Some(Right::Dual(1)));
}

#[test]
fn baikov_name_is_substituted() {
    let (_, job) = load("sunrise_equal_mass.job");
    let r = resolve(&job, None).unwrap();
    let reg = r.registry();
    assert_eq!(reg.z_vars(), ["z1", "z2"]);
    let b = r.twist.factors()[0].0.clone();
    let want = RatFunc::new(twint_core::algebra::MultiPoly::one(reg), b).unwrap();
    assert_eq!(r.left, Some(want));
}

#[test]
fn results_reparse_to_the_same_function() {
    for name in ["univariate.job", "elliptic.job", "higgs.job"] {
        let (_, job) = load(name);
        let rep = run_job(&job, &Flags::default()).unwrap();
        let f = reparse_result(&job, &rep.result).unwrap();
        assert_eq!(f.to_string(), rep.result, "{}", name);
    }
}

#[test]
fn order_override_is_checked() {
    let (_, job) = load("elliptic.job");
    let flags = Flags {
        order: Some(vec!["z1".into(), "g".into()]),
        ..Default::default()
    };
    let e = run_job(&job, &flags).unwrap_err();
    assert_eq!(e.exit_code(), 1);
}

#[test]
fn json_report_validates_against_the_schema() {
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    for (name, args) in [
        ("univariate.job", &["--oracle", "2", "--verbose"][..]),
        ("higgs.job", &["--check-assumptions"][..]),
        ("sunrise_equal_mass_rotated.job", &[][..]),
        ("minimal.job", &["--verbose"][..]),
    ] {
        let path = jobs().join(name);
        let mut a = vec!["--job", path.to_str().unwrap(), "--json"];
        a.extend_from_slice(args);
        let (code, out, err) = twint(&a);
        assert_eq!(code, 0, "{}: {}", name, err);
        let rep: serde_json::Value = serde_json::from_str(&out).unwrap();
        let errors: Vec<String> = v.iter_errors(&rep).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{}: {:?}", name, errors);
    }
    let bad = serde_json::json!({"result": 1, "order": [], "dims": [], "reductions": [], "oracle": []});
    assert!(!v.is_valid(&bad));
}

#[test]
fn exit_codes() {
    let p = |n: &str| jobs().join(n).to_str().unwrap().to_string();
    let (code, out, _) = twint(&["--job", &p("univariate.job")]);
    assert_eq!((code, out.trim()), (0, "6*g/(7*g^2-8*g+1)"));

    let (code, _, err) = twint(&["--job", &p("sunrise_equal_mass.job")]);
    assert_eq!(code, 2);
    assert!(err.contains("degenerate fibration") && err.contains("rotate z1 z2 1 2"), "{}", err);
    let (code, _, err) = twint(&["--job", &p("sunrise_equal_mass.job"), "--check-assumptions"]);
    assert_eq!(code, 2);
    assert!(err.contains("degree 3 (expected 4) FAILED"), "{}", err);

    let dir = std::env::temp_dir().join(format!("twint-exit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, text: &str| {
        let f = dir.join(name);
        std::fs::write(&f, text).unwrap();
        f.to_str().unwrap().to_string()
    };
    let (code, _, err) = twint(&["--job", &write("bad.job", "vars z\ntwist z^^1/2\n")]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2, column 9"), "{}", err);
    // integer exponents are not generic
    let (code, _, _) = twint(&["--job", &write("int.job", "vars z\ntwist (z)^(2)\nleft 1\nright 1\n")]);
    assert_eq!(code, 3);
    let (code, _, _) = twint(&["--job", &dir.join("missing.job").to_string_lossy()]);
    assert_eq!(code, 1);

    let trace = dir.join("trace.json");
    let (code, out, _) = twint(&["--job", &p("elliptic.job"), "--order", "z1,z2", "--trace", trace.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "-1/4/(11*g^2-g)");
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t[0]["var"], "z1");
    assert_eq!(t[1]["field"], "Q(g)");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn assumption_errors_map_to_two() {
    let (_, job) = load("sunrise_equal_mass.job");
    let e = run_job(&job, &Flags::default()).unwrap_err();
    assert!(matches!(e, RunError::Core(_)));
    assert_eq!(e.exit_code(), 2);
}
