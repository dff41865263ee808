//! Recursive intersection numbers. The fibration integrates the variables
//! out in a fixed order; level `i` carries a basis of the cohomology in the
//! first `i` variables, its dual basis, and the connection matrix in the
//! `i`-th variable.

mod reduce;

pub use reduce::{
    gauge_apply, gauge_transform, is_simple, reduce_pole_finite, reduce_pole_infinity,
    reduce_to_simple_poles, ReductionStats, Side, MAX_PASSES,
};

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use dashmap::DashMap;
use serde::Serialize;

use crate::algebra::{MultiPoly, RatFunc, RatMatrix, Registry};
use crate::cohomology::{
    assumption_report, check_assumptions, cohomology_dim, monomial_basis, AssumptionReport, Connection, Twist,
};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::residue::global_residue_of;

/// Basis data of one level of the fibration.
#[derive(Clone, Debug)]
pub struct Level {
    pub index: usize,
    pub basis: Vec<RatFunc>,
    pub candidates: Vec<RatFunc>,
    pub c: RatMatrix,
    pub dual: Vec<RatFunc>,
}

impl Level {
    pub fn nu(&self) -> usize {
        self.basis.len()
    }
}

/// `Ω` in the active variable of one level, with `det Ω = P/Q` and its adjugate.
#[derive(Clone, Debug)]
pub struct ConnectionMatrix {
    pub var: usize,
    pub entries: RatMatrix,
    pub det: RatFunc,
    pub adjugate: RatMatrix,
    pub report: AssumptionReport,
}

impl ConnectionMatrix {
    pub fn new(var: usize, entries: RatMatrix, nu_expected: usize) -> Self {
        let det = entries.det();
        let adjugate = entries.adjugate();
        let report = assumption_report(&entries, &det, var, nu_expected);
        ConnectionMatrix {
            var,
            entries,
            det,
            adjugate,
            report,
        }
    }

    pub fn det_num(&self) -> &MultiPoly {
        self.det.num()
    }

    pub fn det_den(&self) -> &MultiPoly {
        self.det.den()
    }

    pub fn nu(&self) -> usize {
        self.entries.rows()
    }
}

/// Per-level trace record.
#[derive(Clone, Debug, Serialize)]
pub struct LevelTrace {
    pub level: usize,
    pub var: String,
    pub nu_inner: usize,
    pub nu: usize,
    pub det_num_degree: usize,
    pub det_den_degree: usize,
    pub reductions_infinity: usize,
    pub reductions_finite: usize,
    pub field: String,
}

/// Bases and switches for building a plan.
#[derive(Clone, Debug, Default)]
pub struct PlanOptions {
    /// `e^(i)` per level `1..=n`; missing levels below `n` use standard monomials.
    pub bases: BTreeMap<usize, Vec<RatFunc>>,
    /// Candidate duals `h^(i)`; default `h = e`.
    pub candidates: BTreeMap<usize, Vec<RatFunc>>,
    pub execution: Execution,
}

type MemoKey = (usize, RatFunc, RatFunc);

pub struct FibrationPlan {
    twist: Twist,
    conn: Connection,
    order: Vec<usize>,
    levels: Vec<Level>,
    omegas: Vec<ConnectionMatrix>,
    top_basis: Option<Vec<RatFunc>>,
    top_candidates: Option<Vec<RatFunc>>,
    nu_top: usize,
    execution: Execution,
    memo: DashMap<MemoKey, RatFunc>,
    inf_passes: Vec<AtomicUsize>,
    fin_passes: Vec<AtomicUsize>,
}

impl std::fmt::Debug for FibrationPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FibrationPlan")
            .field("order", &self.order)
            .field("dims", &self.dims())
            .finish()
    }
}

/// Intermediate data of a top-level pairing.
#[derive(Clone, Debug)]
pub struct PairingData {
    pub left: Vec<RatFunc>,
    pub right: Vec<RatFunc>,
    pub left_reduced: Vec<RatFunc>,
    pub right_reduced: Vec<RatFunc>,
    pub value: RatFunc,
}

impl FibrationPlan {
    /// Build every level and check the assumptions on each connection matrix.
    pub fn build(twist: &Twist, order: &[usize], opts: &PlanOptions) -> Result<FibrationPlan> {
        Self::build_inner(twist, order, opts, true)
    }

    /// Build without rejecting fibrations that fail the critical-point count
    /// (higher poles of `Ω` are still rejected).
    pub fn build_lenient(twist: &Twist, order: &[usize], opts: &PlanOptions) -> Result<FibrationPlan> {
        Self::build_inner(twist, order, opts, false)
    }

    fn build_inner(twist: &Twist, order: &[usize], opts: &PlanOptions, strict: bool) -> Result<FibrationPlan> {
        let reg = twist.registry().clone();
        let n = order.len();
        let mut seen = order.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != n || order.iter().any(|&v| !reg.is_z(v)) || n != reg.n_z() {
            return Err(Error::InvalidInput(
                "order must be a permutation of the integration variables".into(),
            ));
        }
        if let Some(&lvl) = opts.bases.keys().chain(opts.candidates.keys()).find(|&&l| l == 0 || l > n) {
            return Err(Error::InvalidInput(format!(
                "basis given for level {} outside 1..={}",
                lvl, n
            )));
        }
        let conn = twist.connection();
        let top_basis = opts.bases.get(&n).cloned();
        let nu_top = match &top_basis {
            Some(b) => b.len(),
            None if n == 0 => 1,
            None => cohomology_dim(&conn, order).map_err(|e| e.at_level(n))?,
        };
        let one = RatFunc::one(&reg);
        let level0 = Level {
            index: 0,
            basis: vec![one.clone()],
            candidates: vec![one.clone()],
            c: RatMatrix::identity(&reg, 1),
            dual: vec![one],
        };
        let mut plan = FibrationPlan {
            twist: twist.clone(),
            conn,
            order: order.to_vec(),
            levels: vec![level0],
            omegas: Vec::new(),
            top_basis,
            top_candidates: opts.candidates.get(&n).cloned(),
            nu_top,
            execution: opts.execution,
            memo: DashMap::new(),
            inf_passes: (0..=n).map(|_| AtomicUsize::new(0)).collect(),
            fin_passes: (0..=n).map(|_| AtomicUsize::new(0)).collect(),
        };
        for i in 1..=n {
            let basis = if i < n {
                match opts.bases.get(&i) {
                    Some(b) => b.clone(),
                    None => monomial_basis(&plan.conn, &order[..i]).map_err(|e| e.at_level(i))?,
                }
            } else {
                Vec::new()
            };
            let nu_i = if i < n { basis.len() } else { nu_top };
            let om = plan.connection_matrix(i, nu_i).map_err(|e| e.at_level(i))?;
            if strict {
                let prev = if i >= 2 { order[i - 2] } else { order[i - 1] };
                let mut pair = [prev, order[i - 1]];
                pair.sort_unstable();
                check_assumptions(
                    &om.entries,
                    &om.det,
                    om.var,
                    nu_i,
                    (reg.name(pair[0]), reg.name(pair[1])),
                )
                .map_err(|e| e.at_level(i))?;
            } else if !om.report.all_simple() {
                check_assumptions(&om.entries, &om.det, om.var, om.report.det_num_degree, ("", ""))
                    .map_err(|e| e.at_level(i))?;
            }
            plan.omegas.push(om);
            if i < n {
                let candidates = opts.candidates.get(&i).cloned().unwrap_or_else(|| basis.clone());
                if candidates.len() != basis.len() {
                    return Err(Error::InvalidInput(format!(
                        "level {}: {} basis elements but {} dual candidates",
                        i,
                        basis.len(),
                        candidates.len()
                    )));
                }
                let level = plan.make_level(i, basis, candidates).map_err(|e| e.at_level(i))?;
                plan.levels.push(level);
            }
        }
        Ok(plan)
    }

    fn make_level(&self, i: usize, basis: Vec<RatFunc>, candidates: Vec<RatFunc>) -> Result<Level> {
        let c = self.pairing_matrix(i, &basis, &candidates)?;
        let cinv = c.inverse().map_err(|_| {
            Error::GenericityError(format!("intersection matrix at level {} is singular", i))
        })?;
        let reg = self.registry();
        let dual = (0..basis.len())
            .map(|j| {
                let mut acc = RatFunc::zero(reg);
                for (k, h) in candidates.iter().enumerate() {
                    let x = cinv.get(k, j);
                    if !x.is_zero() {
                        acc = &acc + &(h * x);
                    }
                }
                acc
            })
            .collect();
        Ok(Level {
            index: i,
            basis,
            candidates,
            c,
            dual,
        })
    }

    /// `(⟨a_j | b_k⟩_i)_{jk}`, entries evaluated concurrently.
    pub fn pairing_matrix(&self, i: usize, a: &[RatFunc], b: &[RatFunc]) -> Result<RatMatrix> {
        let idx: Vec<(usize, usize)> = (0..a.len())
            .flat_map(|j| (0..b.len()).map(move |k| (j, k)))
            .collect();
        let vals = par::try_map(self.execution, &idx, |&(j, k)| self.intersect_at(i, &a[j], &b[k]))?;
        Ok(RatMatrix::from_rows(
            self.registry(),
            vals.chunks(b.len().max(1)).map(|r| r.to_vec()).collect(),
        ))
    }

    /// `Ω^(i)_jk = ⟨(∂ + ω) e^(i-1)_j | d^(i-1)_k⟩_{i-1}` in the variable `order[i-1]`.
    fn connection_matrix(&self, i: usize, nu_expected: usize) -> Result<ConnectionMatrix> {
        let x = self.order[i - 1];
        let prev = &self.levels[i - 1];
        let w = self.conn.component(x);
        let shifted: Vec<RatFunc> = prev
            .basis
            .iter()
            .map(|e| &e.derivative(x) + &(w * e))
            .collect();
        let entries = self.pairing_matrix(i - 1, &shifted, &prev.dual)?;
        Ok(ConnectionMatrix::new(x, entries, nu_expected))
    }

    /// `Ω^(i)` from the dual-side definition `-⟨e_j | (∂ - ω) d_k⟩`.
    pub fn connection_matrix_right(&self, i: usize) -> Result<RatMatrix> {
        let x = self.order[i - 1];
        let prev = &self.levels[i - 1];
        let w = self.conn.component(x);
        let shifted: Vec<RatFunc> = prev
            .dual
            .iter()
            .map(|d| &d.derivative(x) - &(w * d))
            .collect();
        Ok(self.pairing_matrix(i - 1, &prev.basis, &shifted)?.neg())
    }

    pub fn registry(&self) -> &Registry {
        self.twist.registry()
    }

    pub fn twist(&self) -> &Twist {
        &self.twist
    }

    pub fn connection(&self) -> &Connection {
        &self.conn
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    /// Level `i < n` basis data.
    pub fn level(&self, i: usize) -> &Level {
        &self.levels[i]
    }

    /// `Ω^(i)` for `1 <= i <= n`.
    pub fn omega(&self, i: usize) -> &ConnectionMatrix {
        &self.omegas[i - 1]
    }

    /// `ν_0, …, ν_n`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.levels.iter().map(|l| l.nu()).collect();
        d.push(self.nu_top);
        d
    }

    pub fn top_basis(&self) -> Option<&[RatFunc]> {
        self.top_basis.as_deref()
    }

    pub fn top_candidates(&self) -> Option<&[RatFunc]> {
        self.top_candidates.as_deref()
    }

    /// Intersection matrix of the top-level basis with its dual candidates.
    pub fn top_intersection_matrix(&self) -> Result<RatMatrix> {
        let b = self
            .top_basis
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no top-level basis given".into()))?;
        let h = self.top_candidates.as_ref().unwrap_or(b);
        self.pairing_matrix(self.n(), b, h)
    }

    /// Dual basis of the top-level basis.
    pub fn top_dual(&self) -> Result<Vec<RatFunc>> {
        let b = self
            .top_basis
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no top-level basis given".into()))?;
        let h = self.top_candidates.clone().unwrap_or_else(|| b.clone());
        Ok(self.make_level(self.n(), b.clone(), h)?.dual)
    }

    /// `⟨φ_L | d^(i-1)_j⟩_{i-1}` for every `j`.
    pub fn expand_left(&self, i: usize, phi: &RatFunc) -> Result<Vec<RatFunc>> {
        let d = &self.levels[i - 1].dual;
        par::try_map(self.execution, d, |dj| self.intersect_at(i - 1, phi, dj))
    }

    /// `⟨e^(i-1)_j | φ_R⟩_{i-1}` for every `j`.
    pub fn expand_right(&self, i: usize, phi: &RatFunc) -> Result<Vec<RatFunc>> {
        let e = &self.levels[i - 1].basis;
        par::try_map(self.execution, e, |ej| self.intersect_at(i - 1, ej, phi))
    }

    /// Expansion coefficients of both operands at level `i`, before and
    /// after reduction to simple poles: `(left, right, left_reduced, right_reduced)`.
    #[allow(clippy::type_complexity)]
    pub fn reduced_pair(
        &self,
        i: usize,
        phi_l: &RatFunc,
        phi_r: &RatFunc,
    ) -> Result<(Vec<RatFunc>, Vec<RatFunc>, Vec<RatFunc>, Vec<RatFunc>)> {
        let om = &self.omegas[i - 1];
        let x = om.var;
        let left = self.expand_left(i, phi_l)?;
        let right = self.expand_right(i, phi_r)?;
        let (left_reduced, sl) = reduce_to_simple_poles(&left, &om.entries, Side::Left, x)?;
        let (right_reduced, sr) = reduce_to_simple_poles(&right, &om.entries, Side::Right, x)?;
        self.inf_passes[i].fetch_add(sl.infinity + sr.infinity, Ordering::Relaxed);
        self.fin_passes[i].fetch_add(sl.finite + sr.finite, Ordering::Relaxed);
        Ok((left, right, left_reduced, right_reduced))
    }

    /// Full intermediate data of the level-`i` pairing.
    pub fn pairing_data(&self, i: usize, phi_l: &RatFunc, phi_r: &RatFunc) -> Result<PairingData> {
        let om = &self.omegas[i - 1];
        let (left, right, left_reduced, right_reduced) = self.reduced_pair(i, phi_l, phi_r)?;
        let reg = self.registry();
        let nu = om.nu();
        let mut f = RatFunc::zero(reg);
        for a in 0..nu {
            if left_reduced[a].is_zero() {
                continue;
            }
            let mut row = RatFunc::zero(reg);
            for b in 0..nu {
                let adj = om.adjugate.get(a, b);
                if !adj.is_zero() && !right_reduced[b].is_zero() {
                    row = &row + &(adj * &right_reduced[b]);
                }
            }
            f = &f + &(&left_reduced[a] * &row);
        }
        let value = if f.is_zero() {
            f
        } else {
            let f = &f * &RatFunc::from(om.det_den().clone());
            -global_residue_of(&f, om.det_num(), om.var)?
        };
        Ok(PairingData {
            left,
            right,
            left_reduced,
            right_reduced,
            value,
        })
    }

    /// `⟨φ_L | φ_R⟩_i` in the first `i` variables of the order.
    pub fn intersect_at(&self, i: usize, phi_l: &RatFunc, phi_r: &RatFunc) -> Result<RatFunc> {
        if i == 0 {
            return Ok(phi_l * phi_r);
        }
        if phi_l.is_zero() || phi_r.is_zero() {
            return Ok(RatFunc::zero(self.registry()));
        }
        let key = (i, phi_l.clone(), phi_r.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let v = self
            .pairing_data(i, phi_l, phi_r)
            .map_err(|e| e.at_level(i))?
            .value;
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// `⟨φ_L | φ_R⟩` over all variables.
    pub fn intersection_number(&self, phi_l: &RatFunc, phi_r: &RatFunc) -> Result<RatFunc> {
        self.intersect_at(self.n(), phi_l, phi_r)
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn trace(&self) -> Vec<LevelTrace> {
        let reg = self.registry();
        (1..=self.n())
            .map(|i| {
                let om = &self.omegas[i - 1];
                let fiber = &self.order[..i];
                let rest: Vec<&str> = (0..reg.len())
                    .filter(|v| !fiber.contains(v))
                    .map(|v| reg.name(v))
                    .collect();
                LevelTrace {
                    level: i,
                    var: reg.name(om.var).to_string(),
                    nu_inner: om.nu(),
                    nu: self.dims()[i],
                    det_num_degree: om.det_num().degree_in(om.var) as usize,
                    det_den_degree: om.det_den().degree_in(om.var) as usize,
                    reductions_infinity: self.inf_passes[i].load(Ordering::Relaxed),
                    reductions_finite: self.fin_passes[i].load(Ordering::Relaxed),
                    field: format!("Q({})", rest.join(",")),
                }
            })
            .collect()
    }
}

/// Plan built after an optional rotation of two integration variables.
#[derive(Debug)]
pub struct RotatedPlan {
    pub plan: FibrationPlan,
    /// `(i, j, c, s)` of the applied rotation, if any.
    pub rotation: Option<(usize, usize, i64, i64)>,
}

impl RotatedPlan {
    /// Pull back an n-form coefficient into the rotated coordinates.
    pub fn form(&self, f: &RatFunc) -> Result<RatFunc> {
        match self.rotation {
            Some((i, j, c, s)) => crate::cohomology::rotate_form(f, i, j, c, s),
            None => Ok(f.clone()),
        }
    }
}

/// Build a plan; on a degenerate fibration retry with the rotations
/// `c = 1, s ∈ {2, 3, 5}` of the suggested variable pair.
pub fn build_with_rotation_search(twist: &Twist, order: &[usize], opts: &PlanOptions) -> Result<RotatedPlan> {
    let first = match FibrationPlan::build(twist, order, opts) {
        Ok(plan) => return Ok(RotatedPlan { plan, rotation: None }),
        Err(e) => e,
    };
    let Error::DegenerateFibration { suggestion, .. } = first.root() else {
        return Err(first);
    };
    let reg = twist.registry();
    let names: Vec<&str> = suggestion.split_whitespace().collect();
    let (Some(i), Some(j)) = (reg.index(names[1]), reg.index(names[2])) else {
        return Err(first);
    };
    for s in [2, 3, 5] {
        let rotated = crate::cohomology::rotate_coordinates(twist, i, j, 1, s)?;
        let mut o = opts.clone();
        for b in o.bases.values_mut().chain(o.candidates.values_mut()) {
            for f in b.iter_mut() {
                *f = crate::cohomology::rotate_form(f, i, j, 1, s)?;
            }
        }
        if let Ok(plan) = FibrationPlan::build(&rotated, order, &o) {
            return Ok(RotatedPlan {
                plan,
                rotation: Some((i, j, 1, s)),
            });
        }
    }
    Err(first)
}
