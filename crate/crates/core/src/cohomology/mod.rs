//! Twists `u = Π p_i^γ_i`, their connection `ω = d ln u`, cohomology
//! dimensions and monomial bases, and the assumption checks on connection
//! matrices.

mod groebner;

pub use groebner::{buchberger, GroebnerBasis};

use serde::Serialize;

use crate::algebra::{gcd_poly, Affine, MultiPoly, Q, RatFunc, RatMatrix, Registry};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Twist {
    reg: Registry,
    factors: Vec<(MultiPoly, Affine)>,
}

impl Twist {
    pub fn new(reg: &Registry, factors: Vec<(MultiPoly, Affine)>) -> Result<Self> {
        for (p, g) in &factors {
            if p.is_zero() {
                return Err(Error::InvalidInput("twist factor is zero".into()));
            }
            if g.is_numeric() && g.constant_term().is_integer() {
                return Err(Error::GenericityError(format!(
                    "exponent {} of factor {} is an integer",
                    g, p
                )));
            }
        }
        Ok(Twist {
            reg: reg.clone(),
            factors,
        })
    }

    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    pub fn factors(&self) -> &[(MultiPoly, Affine)] {
        &self.factors
    }

    /// The twist `u^{-1}`.
    pub fn negated(&self) -> Twist {
        Twist {
            reg: self.reg.clone(),
            factors: self
                .factors
                .iter()
                .map(|(p, g)| (p.clone(), g.neg()))
                .collect(),
        }
    }

    /// `∂ ln u / ∂ name`; the exponents must not depend on `var`.
    pub fn log_derivative(&self, var: usize) -> Result<RatFunc> {
        let mut acc = RatFunc::zero(&self.reg);
        for (p, g) in &self.factors {
            if !g.as_poly().derivative(var).is_zero() {
                return Err(Error::InvalidInput(format!(
                    "exponent {} depends on {}",
                    g,
                    self.reg.name(var)
                )));
            }
            let dp = p.derivative(var);
            if !dp.is_zero() {
                acc = &acc + &RatFunc::new(&dp * g.as_poly(), p.clone())?;
            }
        }
        Ok(acc)
    }

    pub fn connection(&self) -> Connection {
        twist_connection(self)
    }

    /// Substitute polynomials for variables in every factor; factors that
    /// become constant are dropped.
    pub fn substitute(&self, bindings: &[(usize, MultiPoly)]) -> Result<Twist> {
        let mut factors = Vec::with_capacity(self.factors.len());
        for (p, g) in &self.factors {
            let q = p.substitute(bindings);
            if q.is_zero() {
                return Err(Error::InvalidInput(format!(
                    "twist factor {} vanishes under the substitution",
                    p
                )));
            }
            if !q.is_constant() {
                factors.push((q, g.clone()));
            }
        }
        Ok(Twist {
            reg: self.reg.clone(),
            factors,
        })
    }
}

impl Twist {
    /// Substitute rational values for some variables (typically all
    /// parameters) in the factors and exponents. Factors that become constant
    /// are dropped; the integer-exponent check applies to the result.
    pub fn specialize(&self, values: &[(usize, Q)]) -> Result<Twist> {
        let mut factors = Vec::with_capacity(self.factors.len());
        for (p, g) in &self.factors {
            let mut q = p.clone();
            let mut e = g.as_poly().clone();
            for (v, x) in values {
                q = q.eval_var(*v, x);
                e = e.eval_var(*v, x);
            }
            if q.is_zero() {
                return Err(Error::GenericityError(format!(
                    "twist factor {} vanishes at the sample point",
                    p
                )));
            }
            if !q.is_constant() {
                factors.push((q, Affine::new(e)?));
            }
        }
        Twist::new(&self.reg, factors)
    }
}

/// `ω_j = ∂_j ln u` for every integration variable, indexed by registry slot.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    reg: Registry,
    components: Vec<RatFunc>,
    factors: Vec<MultiPoly>,
}

impl Connection {
    pub fn component(&self, var: usize) -> &RatFunc {
        &self.components[var]
    }

    pub fn components(&self) -> &[RatFunc] {
        &self.components
    }

    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    /// The twist factors `p_i` that carry the poles of `ω`.
    pub fn factors(&self) -> &[MultiPoly] {
        &self.factors
    }

    /// Generators `P_j` of the critical ideal in the fiber variables.
    pub fn critical_ideal(&self, fiber: &[usize]) -> Vec<MultiPoly> {
        fiber
            .iter()
            .map(|&v| self.components[v].num().clone())
            .filter(|p| !p.is_zero())
            .collect()
    }
}

pub fn twist_connection(t: &Twist) -> Connection {
    let n = t.reg.n_z();
    let components = (0..n)
        .map(|v| {
            let mut acc = RatFunc::zero(&t.reg);
            for (p, g) in &t.factors {
                let dp = p.derivative(v);
                if !dp.is_zero() {
                    acc = &acc + &RatFunc::new(&dp * g.as_poly(), p.clone()).unwrap();
                }
            }
            acc
        })
        .collect();
    Connection {
        reg: t.reg.clone(),
        components,
        factors: t.factors.iter().map(|(p, _)| p.clone()).collect(),
    }
}

pub fn critical_groebner(conn: &Connection, fiber: &[usize]) -> Result<GroebnerBasis> {
    let gens = conn.critical_ideal(fiber);
    if gens.len() < fiber.len() {
        return Err(Error::NotZeroDimensional);
    }
    let mut gb = buchberger(&gens, fiber);
    // drop solutions on the hypersurfaces p_i = 0
    for p in conn.factors() {
        if fiber.iter().any(|&v| p.depends_on(v)) {
            gb = gb.saturate(p)?;
        }
    }
    Ok(gb)
}

/// `dim H^(i)` as the number of standard monomials of the critical ideal.
pub fn cohomology_dim(conn: &Connection, fiber: &[usize]) -> Result<usize> {
    if fiber.is_empty() {
        return Ok(1);
    }
    critical_groebner(conn, fiber)?.dimension()
}

/// Standard monomials of the critical ideal, as basis representatives.
pub fn monomial_basis(conn: &Connection, fiber: &[usize]) -> Result<Vec<RatFunc>> {
    if fiber.is_empty() {
        return Ok(vec![RatFunc::one(conn.registry())]);
    }
    Ok(critical_groebner(conn, fiber)?
        .standard_monomial_polys()?
        .into_iter()
        .map(RatFunc::from)
        .collect())
}

/// Finite poles of `f` in `var` are simple and the one-form `f d var` has at
/// most a simple pole at infinity.
pub fn is_simple_pole(f: &RatFunc, var: usize) -> bool {
    if f.is_zero() {
        return true;
    }
    if f.num().degree_in(var) >= f.den().degree_in(var) {
        return false;
    }
    if f.den().degree_in(var) <= 1 {
        return true;
    }
    let d = f.den().derivative(var);
    gcd_poly(f.den(), &d).degree_in(var) == 0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub var: String,
    pub simple_pole: Vec<Vec<bool>>,
    pub det_num_degree: usize,
    pub nu_expected: usize,
}

impl AssumptionReport {
    pub fn all_simple(&self) -> bool {
        self.simple_pole.iter().flatten().all(|&b| b)
    }

    pub fn dimension_ok(&self) -> bool {
        self.det_num_degree == self.nu_expected
    }
}

pub fn assumption_report(
    omega: &RatMatrix,
    det: &RatFunc,
    var: usize,
    nu_expected: usize,
) -> AssumptionReport {
    let reg = omega.registry();
    let simple_pole = (0..omega.rows())
        .map(|i| {
            (0..omega.cols())
                .map(|j| is_simple_pole(omega.get(i, j), var))
                .collect()
        })
        .collect();
    AssumptionReport {
        var: reg.name(var).to_string(),
        simple_pole,
        det_num_degree: det.num().degree_in(var) as usize,
        nu_expected,
    }
}

/// Reject connection matrices with higher poles and fibrations whose
/// determinant has the wrong number of critical points.
pub fn check_assumptions(
    omega: &RatMatrix,
    det: &RatFunc,
    var: usize,
    nu_expected: usize,
    rotate_pair: (&str, &str),
) -> Result<AssumptionReport> {
    let rep = assumption_report(omega, det, var, nu_expected);
    for (i, row) in rep.simple_pole.iter().enumerate() {
        for (j, ok) in row.iter().enumerate() {
            if !ok {
                return Err(Error::HigherPoleConnection {
                    var: rep.var.clone(),
                    row: i,
                    col: j,
                    entry: omega.get(i, j).to_string(),
                });
            }
        }
    }
    if !rep.dimension_ok() {
        return Err(Error::DegenerateFibration {
            var: rep.var.clone(),
            found: rep.det_num_degree,
            expected: nu_expected,
            suggestion: format!("rotate {} {} 1 2", rotate_pair.0, rotate_pair.1),
        });
    }
    Ok(rep)
}

/// Bindings for `z_i → c z_i + s z_j`, `z_j → -s z_i + c z_j`.
pub fn rotation_bindings(reg: &Registry, i: usize, j: usize, c: i64, s: i64) -> Vec<(usize, MultiPoly)> {
    let zi = MultiPoly::var(reg, i);
    let zj = MultiPoly::var(reg, j);
    let cq = crate::algebra::q(c);
    let sq = crate::algebra::q(s);
    vec![
        (i, &zi.scale(&cq) + &zj.scale(&sq)),
        (j, &zj.scale(&cq) - &zi.scale(&sq)),
    ]
}

pub fn rotate_coordinates(t: &Twist, i: usize, j: usize, c: i64, s: i64) -> Result<Twist> {
    if c == 0 && s == 0 {
        return Err(Error::InvalidInput("rotation with c = s = 0".into()));
    }
    t.substitute(&rotation_bindings(&t.reg, i, j, c, s))
}

/// Pull back the coefficient of an n-form: substitute and multiply by the
/// Jacobian `c² + s²`.
pub fn rotate_form(f: &RatFunc, i: usize, j: usize, c: i64, s: i64) -> Result<RatFunc> {
    let reg = f.registry();
    let b: Vec<(usize, RatFunc)> = rotation_bindings(reg, i, j, c, s)
        .into_iter()
        .map(|(v, p)| (v, p.into()))
        .collect();
    Ok(f.substitute(&b)?.scale(&Q::from_integer((c * c + s * s).into())))
}

/// Bindings of the inverse rotation.
pub fn inverse_rotation_bindings(
    reg: &Registry,
    i: usize,
    j: usize,
    c: i64,
    s: i64,
) -> Vec<(usize, MultiPoly)> {
    let n = Q::from_integer((c * c + s * s).into()).recip();
    let zi = MultiPoly::var(reg, i);
    let zj = MultiPoly::var(reg, j);
    let cq = crate::algebra::q(c) * &n;
    let sq = crate::algebra::q(s) * &n;
    vec![
        (i, &zi.scale(&cq) - &zj.scale(&sq)),
        (j, &zi.scale(&sq) + &zj.scale(&cq)),
    ]
}
