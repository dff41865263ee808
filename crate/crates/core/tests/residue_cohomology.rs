use twint_core::algebra::*;
use twint_core::cohomology::*;
use twint_core::residue::*;

fn reg(z: &[&str], p: &[&str]) -> Registry {
    VarRegistry::new(z, p).unwrap()
}

fn rf(s: &str, r: &Registry) -> RatFunc {
    parse_ratfunc(s, r).unwrap()
}

fn pp(s: &str, r: &Registry) -> MultiPoly {
    parse_poly(s, r).unwrap()
}

fn up(s: &str, r: &Registry) -> UniPoly {
    UniPoly::from_poly(&pp(s, r), r.index("z").unwrap())
}

fn twist(r: &Registry, f: &[(&str, &str)]) -> Twist {
    Twist::new(
        r,
        f.iter()
            .map(|(p, g)| (pp(p, r), Affine::parse(g, r).unwrap()))
            .collect(),
    )
    .unwrap()
}

#[test]
fn polynomial_inverse_examples() {
    let r = reg(&["z"], &["g"]);
    let one = polynomial_inverse(&up("1", &r), &up("z", &r)).unwrap();
    assert_eq!(one.to_ratfunc(), rf("1", &r));
    let i = polynomial_inverse(&up("z-2", &r), &up("z^2+1", &r)).unwrap();
    assert_eq!(i.to_ratfunc(), rf("(-z-2)/5", &r));
    let i = polynomial_inverse(&up("z", &r), &up("z-g", &r)).unwrap();
    assert_eq!(i.to_ratfunc(), rf("1/g", &r));
    assert!(polynomial_inverse(&up("z-1", &r), &up("z^2-1", &r)).is_err());
}

#[test]
fn global_residue_examples() {
    let r = reg(&["z"], &[]);
    let z = r.index("z").unwrap();
    assert_eq!(global_residue_of(&rf("1", &r), &pp("z", &r), z).unwrap(), rf("1", &r));
    assert_eq!(
        global_residue_of(&rf("z", &r), &pp("z^2-3*z+2", &r), z).unwrap(),
        rf("1", &r)
    );
    assert_eq!(
        global_residue_of(&rf("1/(z-2)", &r), &pp("z^2+1", &r), z).unwrap(),
        rf("-1/5", &r)
    );
}

#[test]
fn residue_paths_agree_with_parameters() {
    let r = reg(&["z"], &["a", "b"]);
    let z = r.index("z").unwrap();
    let cases = [
        ("(a*z^5+b*z+1)/((a+b)*(z-b)^2*(z+3))", "(2*a-1)*(a*z^3-b*z^2+z+a*b)"),
        ("z^7/(b*z^2+a*z+1)", "a*z^4+(b+1)*z+a*b-2"),
        ("(z+a)/(3*a^2*b)", "(b^2+1)*(z^2-a*z+b)"),
        ("1/(z^3+a*z+b^2)", "b*z^2+a"),
    ];
    for (f, p) in cases {
        let f = rf(f, &r);
        let p = pp(p, &r);
        let pu = UniPoly::from_poly(&p, z);
        let slow = global_residue(
            &UniPoly::from_poly(f.num(), z),
            &UniPoly::from_poly(f.den(), z),
            &pu,
        )
        .unwrap();
        assert_eq!(global_residue_of(&f, &p, z).unwrap(), slow, "{}", f);
    }
    let err = global_residue_of(&rf("1/(z-a)", &r), &pp("z^2-a^2", &r), z);
    assert!(err.is_err());
}

#[test]
fn bezoutian_examples_and_duality() {
    let r = reg(&["z"], &["c0", "c1", "c2", "g"]);
    let w = bezoutian_dual(&up("z^2", &r));
    assert_eq!(w.len(), 2);
    assert_eq!(w[0].to_ratfunc(), rf("z", &r));
    assert_eq!(w[1].to_ratfunc(), rf("1", &r));
    let w = bezoutian_dual(&up("z-g", &r));
    assert_eq!(w.len(), 1);
    assert_eq!(w[0].to_ratfunc(), rf("1", &r));
    let w = bezoutian_dual(&up("c2*z^2+c1*z+c0", &r));
    assert_eq!(w[0].to_ratfunc(), rf("c1+c2*z", &r));
    assert_eq!(w[1].to_ratfunc(), rf("c2", &r));

    let z = r.index("z").unwrap();
    let p = pp("3*z^3-g*z+2", &r);
    let w = bezoutian_dual(&UniPoly::from_poly(&p, z));
    for i in 0..3 {
        for (j, wj) in w.iter().enumerate() {
            let f = &rf(&format!("z^{}", i), &r) * &wj.to_ratfunc();
            let v = global_residue_of(&f, &p, z).unwrap();
            let want = if i == j { "1" } else { "0" };
            assert_eq!(v, rf(want, &r), "pair {} {}", i, j);
        }
    }
}

#[test]
fn connection_examples() {
    let r = reg(&["z"], &["g"]);
    let c = twist(&r, &[("z", "g")]).connection();
    assert_eq!(c.component(0), &rf("g/z", &r));

    let r = reg(&["z1"], &["g"]);
    let p2 = "z1^6+z1^5+z1^4+z1^3+z1^2+z1+1";
    let c = twist(&r, &[("z1", "g"), (p2, "g")]).connection();
    let want = rf(
        &format!("g*(7*z1^6+6*z1^5+5*z1^4+4*z1^3+3*z1^2+2*z1+1)/(z1*({}))", p2),
        &r,
    );
    assert_eq!(c.component(0), &want);

    let r = reg(&["z1", "z2"], &["g"]);
    let p3 = "z2^2-4*z1^3+11*z1-7";
    let c = twist(&r, &[("z1", "g"), ("z2", "g"), (p3, "g")]).connection();
    assert_eq!(
        c.component(1),
        &rf(&format!("g*(3*z2^2-4*z1^3+11*z1-7)/(z2*({}))", p3), &r)
    );
    // closedness
    let d12 = c.component(0).derivative(1);
    let d21 = c.component(1).derivative(0);
    assert_eq!(d12, d21);
}

#[test]
fn integer_exponents_rejected() {
    let r = reg(&["z"], &[]);
    let f = vec![(pp("z", &r), Affine::parse("2", &r).unwrap())];
    assert!(Twist::new(&r, f).is_err());
}

#[test]
fn groebner_examples() {
    let r = reg(&["z1", "z2"], &[]);
    let gb = buchberger(&[pp("z1", &r)], &[0]);
    assert_eq!(gb.elements(), vec![pp("z1", &r)]);
    assert_eq!(gb.dimension().unwrap(), 1);
    let gb = buchberger(&[pp("z1^2", &r), pp("z2-z1", &r)], &[1, 0]);
    let els = gb.elements();
    assert_eq!(els.len(), 2);
    assert!(els.contains(&pp("z1^2", &r)));
    assert!(els.iter().any(|e| *e == pp("z2-z1", &r) || *e == pp("z1-z2", &r)));
    assert_eq!(gb.dimension().unwrap(), 2);
    let gb = buchberger(&[pp("z1*z2-1", &r)], &[0, 1]);
    assert!(gb.dimension().is_err());
}

#[test]
fn dimensions_of_reference_twists() {
    let r = reg(&["z1"], &["g"]);
    let t = twist(&r, &[("z1", "g"), ("z1^6+z1^5+z1^4+z1^3+z1^2+z1+1", "g")]);
    assert_eq!(cohomology_dim(&t.connection(), &[0]).unwrap(), 6);
    assert_eq!(monomial_basis(&t.connection(), &[0]).unwrap().len(), 6);

    let r = reg(&["z1", "z2"], &["g"]);
    let t = twist(&r, &[("z1", "g"), ("z2", "g"), ("z2^2-4*z1^3+11*z1-7", "g")]);
    let c = t.connection();
    assert_eq!(cohomology_dim(&c, &[0, 1]).unwrap(), 6);
    let basis: Vec<String> = monomial_basis(&c, &[0, 1])
        .unwrap()
        .iter()
        .map(|b| b.to_string())
        .collect();
    for m in ["1", "z1", "z2", "z1*z2", "z1^2", "z1^2*z2"] {
        assert!(basis.contains(&m.to_string()), "{} missing from {:?}", m, basis);
    }
    assert_eq!(cohomology_dim(&c, &[1]).unwrap(), 2);

    let r = reg(&["z1", "z2"], &["a4", "a5", "e"]);
    let t = twist(
        &r,
        &[
            ("z1", "1/2+e"),
            ("z2", "1/2+e"),
            ("z1^2*z2+z1*z2^2+z1+a4*z1*z2+a5*z2", "-1/2"),
        ],
    );
    assert_eq!(cohomology_dim(&t.connection(), &[0, 1]).unwrap(), 4);
}

#[test]
fn rotation_round_trip_and_identity() {
    let r = reg(&["z1", "z2"], &["g"]);
    let t = twist(&r, &[("z1", "g"), ("z2", "g"), ("z2^2-4*z1^3+11*z1-7", "g")]);
    assert_eq!(rotate_coordinates(&t, 0, 1, 1, 0).unwrap(), t);
    let rot = rotate_coordinates(&t, 0, 1, 1, 2).unwrap();
    assert_ne!(rot, t);
    let back = rot.substitute(&inverse_rotation_bindings(&r, 0, 1, 1, 2)).unwrap();
    for ((a, ga), (b, gb)) in back.factors().iter().zip(t.factors()) {
        assert_eq!(ga, gb);
        let ratio = RatFunc::new(a.clone(), b.clone()).unwrap();
        assert!(ratio.as_constant().is_some());
    }
    assert_eq!(
        cohomology_dim(&rot.connection(), &[0, 1]).unwrap(),
        cohomology_dim(&t.connection(), &[0, 1]).unwrap()
    );
    let f = rotate_form(&rf("1", &r), 0, 1, 1, 2).unwrap();
    assert_eq!(f, rf("5", &r));
}

#[test]
fn scalar_assumption_check() {
    let r = reg(&["z"], &["g"]);
    let om = RatMatrix::from_rows(&r, vec![vec![rf("g/z+g/(z-1)", &r)]]);
    let det = om.det();
    assert!(check_assumptions(&om, &det, 0, 1, ("z", "z")).is_ok());
    assert!(check_assumptions(&om, &det, 0, 2, ("z", "z")).is_err());
    let om = RatMatrix::from_rows(&r, vec![vec![rf("g/z^2", &r)]]);
    let det = om.det();
    let e = check_assumptions(&om, &det, 0, 1, ("z", "z")).unwrap_err();
    assert!(matches!(e, twint_core::Error::HigherPoleConnection { .. }));
}
