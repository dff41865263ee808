//! Baikov representation of Feynman integrals: Gram determinants, Baikov
//! polynomials, maximal-cut twists, differential-equation matrices and
//! reduction coefficients.

use std::collections::BTreeMap;

use crate::algebra::{parse_poly, parse_ratfunc, Affine, Q, MultiPoly, RatFunc, RatMatrix, Registry, VarRegistry};
use crate::cohomology::Twist;
use crate::error::{Error, Result};
use crate::intersect::{build_with_rotation_search, PlanOptions, RotatedPlan};
use crate::oracle::{numeric, to_c64, NumericSample, SampledPlan, CDD};
use num_complex::Complex64;

/// `G = det(-q_i·q_j)` from the matrix of scalar products `q_i·q_j`.
pub fn gram_determinant(dots: &RatMatrix) -> Result<MultiPoly> {
    let d = dots.neg().det();
    polynomial(&d, "Gram determinant")
}

fn polynomial(f: &RatFunc, what: &str) -> Result<MultiPoly> {
    match f.den().as_constant() {
        Some(c) => Ok(f.num().scale(&c.recip())),
        None => Err(Error::InvalidInput(format!("{} {} is not a polynomial", what, f))),
    }
}

/// A family of integrals with `l` loop momenta and `e` independent external
/// momenta, written in the Baikov variables `z_s = -q_s² + m_s²`.
#[derive(Clone, Debug)]
pub struct BaikovSetup {
    reg: Registry,
    loops: Vec<String>,
    externals: Vec<String>,
    /// `p_a·p_b` of the external momenta.
    pub dot_matrix: RatMatrix,
    /// `z = C σ + f` with `σ = (-k_i·k_j, -k_i·p_a)`.
    pub c_matrix: RatMatrix,
    pub f_vector: Vec<RatFunc>,
    b: MultiPoly,
    /// `(base, γ)` of a prefactor `Π base^γ` depending on the kinematics.
    pub prefactor_exponents: Vec<(MultiPoly, Affine)>,
}

/// Scalar-product slot of the pair `(a, b)` of momenta.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Sigma(usize),
    External(usize, usize),
}

impl BaikovSetup {
    /// `reg` holds the Baikov variables as integration variables and the
    /// kinematic invariants as parameters. `dots` gives `p_a·p_b` for every
    /// pair of external momenta; `props` gives each Baikov variable as an
    /// expression quadratic in the momenta, e.g. `-(k1-p)^2 + msq`.
    pub fn new(
        reg: &Registry,
        loops: &[&str],
        externals: &[&str],
        dots: &[(&str, &str, &str)],
        props: &[(&str, &str)],
    ) -> Result<Self> {
        let l = loops.len();
        let e = externals.len();
        let n = l * (l + 1) / 2 + e * l;
        if reg.n_z() != n || props.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} loop and {} external momenta need {} Baikov variables, got {} variables and {} propagators",
                l,
                e,
                n,
                reg.n_z(),
                props.len()
            )));
        }
        let momenta: Vec<String> = loops.iter().chain(externals).map(|s| s.to_string()).collect();
        let mreg = VarRegistry::new(&momenta, reg.params())?;

        let mut dm = RatMatrix::zeros(reg, e, e);
        let mut seen = vec![vec![false; e]; e];
        for (a, b, v) in dots {
            let pos = |s: &str| {
                externals
                    .iter()
                    .position(|x| *x == s)
                    .ok_or_else(|| Error::InvalidInput(format!("`{}` is not an external momentum", s)))
            };
            let (i, j) = (pos(a)?, pos(b)?);
            let v = parse_ratfunc(v, reg)?;
            if (0..reg.n_z()).any(|z| v.depends_on(z)) {
                return Err(Error::InvalidInput(format!(
                    "scalar product {}·{} depends on a Baikov variable",
                    a, b
                )));
            }
            dm.set(i, j, v.clone());
            dm.set(j, i, v);
            seen[i][j] = true;
            seen[j][i] = true;
        }
        if let Some((i, j)) = (0..e).flat_map(|i| (0..e).map(move |j| (i, j))).find(|&(i, j)| !seen[i][j]) {
            return Err(Error::InvalidInput(format!(
                "scalar product {}·{} is not defined",
                externals[i], externals[j]
            )));
        }

        // σ slots: k_i·k_j (i ≤ j), then k_i·p_a
        let mut slots: BTreeMap<(usize, usize), Slot> = BTreeMap::new();
        let mut t = 0;
        for i in 0..l {
            for j in i..l {
                slots.insert((i, j), Slot::Sigma(t));
                t += 1;
            }
        }
        for i in 0..l {
            for a in 0..e {
                slots.insert((i, l + a), Slot::Sigma(t));
                t += 1;
            }
        }
        for a in 0..e {
            for b in a..e {
                slots.insert((l + a, l + b), Slot::External(a, b));
            }
        }

        let mut c = RatMatrix::zeros(reg, n, n);
        let mut f = vec![RatFunc::zero(reg); n];
        let mut covered = vec![false; n];
        for (name, expr) in props {
            let s = reg
                .index(name)
                .filter(|&s| reg.is_z(s))
                .ok_or_else(|| Error::InvalidInput(format!("`{}` is not a Baikov variable", name)))?;
            if std::mem::replace(&mut covered[s], true) {
                return Err(Error::InvalidInput(format!("propagator {} given twice", name)));
            }
            let q = parse_poly(expr, &mreg)?;
            for (m, coeff) in q.terms() {
                let mexp = &m.exps()[..momenta.len()];
                let deg: u32 = mexp.iter().map(|&x| x as u32).sum();
                let mut rest = m.clone();
                for v in 0..momenta.len() {
                    rest = rest.with(v, 0);
                }
                let kin = MultiPoly::monomial(&mreg, rest, coeff.clone()).transfer(reg)?;
                match deg {
                    0 => f[s] = &f[s] + &RatFunc::from(kin),
                    2 => {
                        let mut idx = mexp
                            .iter()
                            .enumerate()
                            .flat_map(|(v, &k)| std::iter::repeat_n(v, k as usize));
                        let (a, b) = (idx.next().unwrap(), idx.next().unwrap());
                        match slots[&(a, b)] {
                            // k·q = -σ
                            Slot::Sigma(t) => {
                                let cur = c.get(s, t).clone();
                                c.set(s, t, &cur - &RatFunc::from(kin));
                            }
                            Slot::External(a, b) => f[s] = &f[s] + &(&RatFunc::from(kin) * dm.get(a, b)),
                        }
                    }
                    _ => {
                        return Err(Error::InvalidInput(format!(
                            "propagator {} = {} is not quadratic in the momenta",
                            name, expr
                        )))
                    }
                }
            }
        }

        let cinv = c.inverse().map_err(|_| Error::SingularCMatrix)?;
        // σ_t = Σ_s (C⁻¹)_{ts} (z_s - f_s)
        let zf: Vec<RatFunc> = (0..n).map(|s| &RatFunc::var(reg, s) - &f[s]).collect();
        let sigma = cinv.mul_vec(&zf);
        let m = l + e;
        let mut gram = RatMatrix::zeros(reg, m, m);
        for ((a, b), slot) in &slots {
            let v = match slot {
                Slot::Sigma(t) => -&sigma[*t],
                Slot::External(x, y) => dm.get(*x, *y).clone(),
            };
            gram.set(*a, *b, v.clone());
            gram.set(*b, *a, v);
        }
        let b = gram_determinant(&gram)?;
        Ok(BaikovSetup {
            reg: reg.clone(),
            loops: loops.iter().map(|s| s.to_string()).collect(),
            externals: externals.iter().map(|s| s.to_string()).collect(),
            dot_matrix: dm,
            c_matrix: c,
            f_vector: f,
            b,
            prefactor_exponents: vec![],
        })
    }

    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    pub fn loops(&self) -> usize {
        self.loops.len()
    }

    pub fn externals(&self) -> usize {
        self.externals.len()
    }

    /// Number of independent scalar products, `l(l+1)/2 + e·l`.
    pub fn n(&self) -> usize {
        self.reg.n_z()
    }

    pub fn baikov_polynomial(&self) -> &MultiPoly {
        &self.b
    }

    /// Add a prefactor `base^γ` in the kinematic parameters.
    pub fn with_prefactor(mut self, base: &str, exponent: &str) -> Result<Self> {
        let p = parse_poly(base, &self.reg)?;
        if (0..self.reg.n_z()).any(|z| p.depends_on(z)) {
            return Err(Error::InvalidInput(format!("prefactor {} depends on a Baikov variable", base)));
        }
        let g = Affine::parse(exponent, &self.reg)?;
        self.prefactor_exponents.push((p, g));
        Ok(self)
    }

    /// Restrict to `z_s = 0` for the named variables; the twist on the cut
    /// is `B_cut^γ`.
    pub fn maximal_cut(&self, cut: &[&str], exponent: &str) -> Result<MaximalCut> {
        let mut idx = Vec::with_capacity(cut.len());
        for name in cut {
            let v = self
                .reg
                .index(name)
                .filter(|&v| self.reg.is_z(v))
                .ok_or_else(|| Error::InvalidInput(format!("`{}` is not a Baikov variable", name)))?;
            idx.push(v);
        }
        let keep: Vec<String> = (0..self.reg.n_z())
            .filter(|v| !idx.contains(v))
            .map(|v| self.reg.name(v).to_string())
            .collect();
        let creg = VarRegistry::new(&keep, self.reg.params())?;
        let g = Affine::parse(exponent, &creg)?;
        let mut cutf = MaximalCut {
            setup_reg: self.reg.clone(),
            reg: creg.clone(),
            cut: idx,
            full_b: self.b.clone(),
            b: MultiPoly::zero(&creg),
            exponent: g,
            prefactor: vec![],
        };
        cutf.b = polynomial(&cutf.restrict(&self.b.clone().into())?, "Baikov polynomial")?;
        if cutf.b.is_zero() {
            return Err(Error::InvalidInput("the Baikov polynomial vanishes on the cut".into()));
        }
        for (p, g) in &self.prefactor_exponents {
            cutf.prefactor.push((p.transfer(&creg)?, g.transfer(&creg)?));
        }
        Ok(cutf)
    }
}

/// A maximal cut of a Baikov family.
#[derive(Clone, Debug)]
pub struct MaximalCut {
    setup_reg: Registry,
    reg: Registry,
    cut: Vec<usize>,
    full_b: MultiPoly,
    b: MultiPoly,
    exponent: Affine,
    prefactor: Vec<(MultiPoly, Affine)>,
}

impl MaximalCut {
    /// Surviving Baikov variables and the kinematic parameters.
    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    pub fn baikov_polynomial(&self) -> &MultiPoly {
        &self.b
    }

    pub fn exponent(&self) -> &Affine {
        &self.exponent
    }

    pub fn prefactor(&self) -> &[(MultiPoly, Affine)] {
        &self.prefactor
    }

    pub fn twist(&self) -> Result<Twist> {
        maximal_cut_twist(&self.b, &self.exponent)
    }

    /// Set the cut variables of a function of the full setup to zero.
    pub fn restrict(&self, f: &RatFunc) -> Result<RatFunc> {
        let vals: Vec<(usize, crate::algebra::Q)> = self.cut.iter().map(|&v| (v, crate::algebra::q(0))).collect();
        f.eval_vars(&vals)?.transfer(&self.reg)
    }

    /// `B^{-γ} ∂_v B^{γ-1}` on the cut, the form of an integral with the
    /// propagator `v` raised to the second power.
    pub fn dotted_form(&self, var: &str) -> Result<RatFunc> {
        let v = self
            .setup_reg
            .index(var)
            .ok_or_else(|| Error::UndeclaredName(var.to_string()))?;
        let db = self.full_b.derivative(v);
        let b2 = self.full_b.pow(2);
        let full = RatFunc::new(&db * &(self.exponent.transfer(&self.setup_reg)?.as_poly() - &MultiPoly::one(&self.setup_reg)), b2)?;
        self.restrict(&full)
    }

    /// `1/B` on the cut.
    pub fn inverse_form(&self) -> Result<RatFunc> {
        RatFunc::new(MultiPoly::one(&self.reg), self.b.clone())
    }
}

/// `u = B_cut^γ` with a symbolic exponent.
pub fn maximal_cut_twist(b_cut: &MultiPoly, exponent: &Affine) -> Result<Twist> {
    if exponent.is_zero() {
        return Err(Error::GenericityError("the cut twist has exponent 0".into()));
    }
    Twist::new(b_cut.registry(), vec![(b_cut.clone(), exponent.clone())])
}

/// `φ_L = ∂_x ê + ω_x ê + Σ γ ∂_x ln(base) ê` for the twist `u` and the
/// prefactor `Π base^γ`, all in the same coordinates.
pub fn de_form(twist: &Twist, prefactor: &[(MultiPoly, Affine)], e: &RatFunc, x: usize) -> Result<RatFunc> {
    let mut w = twist.log_derivative(x)?;
    for (p, g) in prefactor {
        let dp = p.derivative(x);
        if !dp.is_zero() {
            w = &w + &RatFunc::new(&dp * g.as_poly(), p.clone())?;
        }
    }
    Ok(&e.derivative(x) + &(&w * e))
}

/// Row `(⟨φ_L | d_j⟩)_j` of the differential-equation matrix in `x` for one
/// basis element.
pub fn de_matrix_entries(
    plan: &RotatedPlan,
    prefactor: &[(MultiPoly, Affine)],
    e: &RatFunc,
    x: usize,
) -> Result<Vec<RatFunc>> {
    let m = de_matrix(plan, prefactor, std::slice::from_ref(e), x)?;
    Ok(m.row(0).to_vec())
}

/// `(A_x)_{ij} = ⟨φ_{L,i} | d_j⟩` for the basis elements `es`, computed as
/// `N C⁻¹` with `N = ⟨φ_L | h⟩` and `C = ⟨e | h⟩`.
pub fn de_matrix(
    plan: &RotatedPlan,
    prefactor: &[(MultiPoly, Affine)],
    es: &[RatFunc],
    x: usize,
) -> Result<RatMatrix> {
    let p = &plan.plan;
    kinematic(p.registry(), x)?;
    let basis = p
        .top_basis()
        .ok_or_else(|| Error::InvalidInput("no top-level basis given".into()))?;
    let h = p.top_candidates().unwrap_or(basis).to_vec();
    let phis = es
        .iter()
        .map(|e| de_form(p.twist(), prefactor, &plan.form(e)?, x))
        .collect::<Result<Vec<_>>>()?;
    let nmat = p.pairing_matrix(p.n(), &phis, &h)?;
    let cmat = p.top_intersection_matrix()?;
    // A C = N  ⇔  Cᵀ Aᵀ = Nᵀ
    Ok(cmat.transpose().solve_many(&nmat.transpose())?.transpose())
}

/// `c = ⟨ê_target | d_master⟩`, the coefficient of the master in the
/// decomposition of the target on the cut. Both forms are given in the
/// original coordinates.
pub fn reduction_coefficient(target: &RatFunc, master: usize, plan: &RotatedPlan) -> Result<RatFunc> {
    let d = plan.plan.top_dual()?;
    let dm = d
        .get(master)
        .ok_or_else(|| Error::InvalidInput(format!("no master integral {}", master)))?;
    plan.plan.intersection_number(&plan.form(target)?, dm)
}

/// `A_x` with some kinematic invariants fixed to rationals: the forms `φ_L`
/// are built first, then everything is specialized and a plan is built on
/// the cut, rotating if the fibration degenerates. Entries are rational
/// functions of the remaining invariants.
pub fn specialized_de_matrix(
    cut: &MaximalCut,
    es: &[RatFunc],
    order: &[usize],
    x: usize,
    values: &[(usize, Q)],
) -> Result<(RotatedPlan, RatMatrix)> {
    kinematic(cut.registry(), x)?;
    let twist = cut.twist()?;
    let phis = es
        .iter()
        .map(|e| de_form(&twist, cut.prefactor(), e, x)?.eval_vars(values))
        .collect::<Result<Vec<_>>>()?;
    let basis = es.iter().map(|e| e.eval_vars(values)).collect::<Result<Vec<_>>>()?;
    let mut bases = BTreeMap::new();
    bases.insert(order.len(), basis);
    let opts = PlanOptions {
        bases,
        ..Default::default()
    };
    let plan = build_with_rotation_search(&twist.specialize(values)?, order, &opts)?;
    let phis = phis.iter().map(|f| plan.form(f)).collect::<Result<Vec<_>>>()?;
    let p = &plan.plan;
    let h = p.top_candidates().or(p.top_basis()).unwrap().to_vec();
    let nmat = p.pairing_matrix(p.n(), &phis, &h)?;
    let cmat = p.top_intersection_matrix()?;
    let a = cmat.transpose().solve_many(&nmat.transpose())?.transpose();
    Ok((plan, a))
}

fn kinematic(reg: &Registry, x: usize) -> Result<()> {
    if reg.is_z(x) {
        return Err(Error::InvalidInput(format!("{} is an integration variable", reg.name(x))));
    }
    Ok(())
}

/// A plan for the cut at one rational kinematic point, with `es` as the
/// top-level basis, together with the forms `φ_L` of each basis element
/// built before specialization.
pub struct SampledDe {
    pub plan: SampledPlan,
    pub basis: Vec<RatFunc>,
    pub shifted: Vec<RatFunc>,
}

impl SampledDe {
    pub fn new(cut: &MaximalCut, es: &[RatFunc], order: &[usize], x: usize, sample: &NumericSample) -> Result<Self> {
        kinematic(cut.registry(), x)?;
        let twist = cut.twist()?;
        let shifted = es
            .iter()
            .map(|e| de_form(&twist, cut.prefactor(), e, x))
            .collect::<Result<Vec<_>>>()?;
        let mut bases = BTreeMap::new();
        bases.insert(order.len(), es.to_vec());
        let opts = PlanOptions {
            bases,
            ..Default::default()
        };
        Ok(SampledDe {
            plan: SampledPlan::new(&twist, order, &opts, sample)?,
            basis: es.to_vec(),
            shifted,
        })
    }

    /// `A_x` at the sample, exact.
    pub fn exact(&self) -> Result<Vec<Vec<Q>>> {
        let n = self.basis.len();
        let reg = self.plan.rotated.plan.registry().clone();
        let mat = |left: &[RatFunc]| -> Result<RatMatrix> {
            let mut rows = Vec::with_capacity(left.len());
            for l in left {
                let row = self
                    .basis
                    .iter()
                    .map(|h| Ok(RatFunc::constant(&reg, self.plan.exact(l, h)?)))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            Ok(RatMatrix::from_rows(&reg, rows))
        };
        let nmat = mat(&self.shifted)?;
        let cmat = mat(&self.basis)?;
        let a = cmat.transpose().solve_many(&nmat.transpose())?.transpose();
        Ok((0..n)
            .map(|i| (0..n).map(|j| a.get(i, j).as_constant().unwrap()).collect())
            .collect())
    }

    /// `A_x` at the sample from the numeric univariate step.
    pub fn numeric(&self) -> Result<Vec<Vec<Complex64>>> {
        let n = self.basis.len();
        let mat = |left: &[RatFunc]| -> Result<Vec<Vec<CDD>>> {
            left.iter()
                .map(|l| {
                    self.basis
                        .iter()
                        .map(|h| Ok(self.plan.pair(l, h)?.critical))
                        .collect::<Result<Vec<_>>>()
                })
                .collect()
        };
        let nmat = mat(&self.shifted)?;
        let cmat = mat(&self.basis)?;
        let ct: Vec<Vec<CDD>> = (0..n).map(|i| (0..n).map(|j| cmat[j][i]).collect()).collect();
        nmat.iter()
            .map(|row| {
                numeric::solve(&ct, row)
                    .map(|a| a.into_iter().map(to_c64).collect())
                    .ok_or_else(|| Error::SingularSystem("numeric intersection matrix".into()))
            })
            .collect()
    }
}
