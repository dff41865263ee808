use serde::Serialize;
use thiserror::Error;
use twint_core::algebra::{parse_ratfunc, RatFunc, Registry, VarRegistry};
use twint_core::cohomology::{rotate_coordinates, rotate_form, Twist};
use twint_core::feynman::{BaikovSetup, MaximalCut};
use twint_core::intersect::{FibrationPlan, PlanOptions};
use twint_core::oracle::{confirm, OracleRecord, Problem};
use twint_core::Error as CoreError;

use crate::job::{Job, JobError, Right, BAIKOV};

/// Relative tolerance for accepting an oracle sample.
pub const ORACLE_TOLERANCE: f64 = 1e-8;
/// Agreement required between the two numeric paths of the oracle.
const PATH_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Job(#[from] JobError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error("assumption check failed:\n{0}")]
    Assumptions(String),
    #[error("oracle disagrees with the exact result at {failed} of {total} samples")]
    Oracle { failed: usize, total: usize },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Core(e) if e.is_assumption_failure() => 2,
            RunError::Core(e) if e.is_genericity_failure() => 3,
            RunError::Assumptions(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub order: Option<Vec<String>>,
    pub check_assumptions: bool,
    pub oracle: usize,
    pub seed: u64,
    pub verbose: bool,
}

/// A job turned into core objects: everything lives in one registry of the
/// integration variables followed by the parameters.
#[derive(Debug)]
pub struct Resolved {
    pub twist: Twist,
    pub order: Vec<usize>,
    pub options: PlanOptions,
    pub left: Option<RatFunc>,
    pub right: Option<ResolvedRight>,
    pub rotation: Option<(usize, usize, i64, i64)>,
}

#[derive(Clone, Debug)]
pub enum ResolvedRight {
    Form(RatFunc),
    Dual(usize),
}

impl Resolved {
    pub fn registry(&self) -> &Registry {
        self.twist.registry()
    }
}

/// The maximal cut of a Baikov job; `None` for plain twists.
pub fn maximal_cut(job: &Job) -> Result<Option<MaximalCut>, RunError> {
    let Some(b) = &job.baikov else {
        return Ok(None);
    };
    let full = VarRegistry::new(&job.vars, &job.params)?;
    let loops: Vec<&str> = b.loops.iter().map(String::as_str).collect();
    let ext: Vec<&str> = b.externals.iter().map(String::as_str).collect();
    let dots: Vec<(&str, &str, String)> = b.dots.iter().map(|(x, y, e)| (x.as_str(), y.as_str(), e.to_string())).collect();
    let dots: Vec<(&str, &str, &str)> = dots.iter().map(|(x, y, e)| (*x, *y, e.as_str())).collect();
    let props: Vec<(&str, String)> = b.props.iter().map(|(z, e)| (z.as_str(), e.to_string())).collect();
    let props: Vec<(&str, &str)> = props.iter().map(|(z, e)| (*z, e.as_str())).collect();
    let setup = BaikovSetup::new(&full, &loops, &ext, &dots, &props)?;
    let cut: Vec<&str> = b.cut.iter().map(String::as_str).collect();
    Ok(Some(setup.maximal_cut(&cut, &b.auxexp.to_string())?))
}

/// Build the twist, forms and bases of a job. For Baikov jobs the twist is
/// the cut Baikov polynomial and `B` is replaced by it.
pub fn resolve(job: &Job, order_override: Option<&[String]>) -> Result<Resolved, RunError> {
    let ereg = job.expr_registry();
    let (reg, twist, b_cut) = match &job.baikov {
        None => {
            let reg = VarRegistry::new(&job.vars, &job.params)?;
            let factors = job
                .twist
                .iter()
                .map(|(p, g)| Ok((p.transfer(&reg)?, g.transfer(&reg)?)))
                .collect::<Result<Vec<_>, CoreError>>()?;
            let t = Twist::new(&reg, factors)?;
            (reg, t, None)
        }
        Some(_) => {
            let mc = maximal_cut(job)?.expect("Baikov job");
            let t = mc.twist()?;
            let bc = RatFunc::from(mc.baikov_polynomial().clone()).transfer(&ereg)?;
            (mc.registry().clone(), t, Some(bc))
        }
    };
    let to_reg = |f: &RatFunc| -> Result<RatFunc, CoreError> {
        match (&b_cut, ereg.index(BAIKOV)) {
            (Some(bc), Some(bi)) => f.substitute(&[(bi, bc.clone())])?.transfer(&reg),
            _ => f.transfer(&reg),
        }
    };

    let names: Vec<String> = match order_override {
        Some(o) => o.to_vec(),
        None => job.order.clone(),
    };
    let mut order = Vec::with_capacity(names.len());
    for n in &names {
        let v = reg.index(n).filter(|&v| reg.is_z(v)).ok_or_else(|| {
            RunError::Usage(format!("`{}` in the order is not an integration variable", n))
        })?;
        order.push(v);
    }

    let mut options = PlanOptions::default();
    for (src, dst) in [(&job.bases, &mut options.bases), (&job.dualcand, &mut options.candidates)] {
        for (level, fs) in src {
            let v = fs.iter().map(&to_reg).collect::<Result<Vec<_>, _>>()?;
            dst.insert(*level, v);
        }
    }
    let mut left = job.left.as_ref().map(&to_reg).transpose()?;
    let mut right = match &job.right {
        None => None,
        Some(Right::Form(f)) => Some(ResolvedRight::Form(to_reg(f)?)),
        Some(Right::Dual(k)) => Some(ResolvedRight::Dual(*k)),
    };

    let mut twist = twist;
    let mut rotation = None;
    if let Some(r) = &job.rotate {
        let (i, j) = (reg.index(&r.a).unwrap(), reg.index(&r.b).unwrap());
        let rot = |f: &RatFunc| rotate_form(f, i, j, r.c, r.s);
        twist = rotate_coordinates(&twist, i, j, r.c, r.s)?;
        for fs in options.bases.values_mut().chain(options.candidates.values_mut()) {
            for f in fs.iter_mut() {
                *f = rot(f)?;
            }
        }
        left = left.as_ref().map(rot).transpose()?;
        if let Some(ResolvedRight::Form(f)) = &right {
            right = Some(ResolvedRight::Form(rot(f)?));
        }
        rotation = Some((i, j, r.c, r.s));
    }
    Ok(Resolved {
        twist,
        order,
        options,
        left,
        right,
        rotation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
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

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionRow {
    pub level: usize,
    pub var: String,
    pub simple_poles: bool,
    pub det_num_degree: usize,
    pub nu_expected: usize,
    pub dimension_ok: bool,
}

impl AssumptionRow {
    pub fn ok(&self) -> bool {
        self.simple_poles && self.dimension_ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Reduced {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

/// Machine-readable outcome of a job.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub result: String,
    pub order: Vec<String>,
    /// `ν_0, ..., ν_n`.
    pub dims: Vec<usize>,
    /// Pole-reduction passes per level.
    pub reductions: Vec<usize>,
    pub oracle: Vec<OracleRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<Reduced>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<Vec<AssumptionRow>>,
}

fn assumption_rows(plan: &FibrationPlan) -> Vec<AssumptionRow> {
    (1..=plan.n())
        .map(|i| {
            let r = &plan.omega(i).report;
            AssumptionRow {
                level: i,
                var: r.var.clone(),
                simple_poles: r.all_simple(),
                det_num_degree: r.det_num_degree,
                nu_expected: r.nu_expected,
                dimension_ok: r.dimension_ok(),
            }
        })
        .collect()
}

fn trace_rows(plan: &FibrationPlan) -> Vec<TraceRow> {
    plan.trace()
        .into_iter()
        .map(|t| TraceRow {
            level: t.level,
            var: t.var,
            nu_inner: t.nu_inner,
            nu: t.nu,
            det_num_degree: t.det_num_degree,
            det_den_degree: t.det_den_degree,
            reductions_infinity: t.reductions_infinity,
            reductions_finite: t.reductions_finite,
            field: t.field,
        })
        .collect()
}

/// Build the plan of a resolved job.
pub fn build_plan(r: &Resolved, check_assumptions: bool) -> Result<(FibrationPlan, Option<Vec<AssumptionRow>>), RunError> {
    if !check_assumptions {
        return Ok((FibrationPlan::build(&r.twist, &r.order, &r.options)?, None));
    }
    let plan = FibrationPlan::build_lenient(&r.twist, &r.order, &r.options)?;
    let rows = assumption_rows(&plan);
    if rows.iter().any(|a| !a.ok()) {
        return Err(RunError::Assumptions(render_assumptions(&rows)));
    }
    Ok((plan, Some(rows)))
}

pub fn render_assumptions(rows: &[AssumptionRow]) -> String {
    rows.iter()
        .map(|a| {
            format!(
                "level {} ({}): simple poles {}, det numerator degree {} (expected {}) {}",
                a.level,
                a.var,
                if a.simple_poles { "yes" } else { "no" },
                a.det_num_degree,
                a.nu_expected,
                if a.ok() { "ok" } else { "FAILED" }
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn run_job(job: &Job, flags: &Flags) -> Result<Report, RunError> {
    let r = resolve(job, flags.order.as_deref())?;
    let left = r.left.clone().ok_or_else(|| RunError::Usage("job has no `left` form".into()))?;
    let right_spec = r.right.clone().ok_or_else(|| RunError::Usage("job has no `right` form".into()))?;
    let (plan, assumptions) = build_plan(&r, flags.check_assumptions)?;
    let reg = r.registry().clone();

    let mut dual = None;
    let right = match right_spec {
        ResolvedRight::Form(f) => f,
        ResolvedRight::Dual(k) => {
            let d = plan.top_dual()?;
            let f = d.get(k - 1).cloned().ok_or_else(|| {
                RunError::Usage(format!("dual index {} exceeds the dimension {}", k, d.len()))
            })?;
            dual = Some(d.iter().map(|f| f.to_string()).collect());
            f
        }
    };

    let n = plan.n();
    let (value, reduced) = if n == 0 {
        (&left * &right, None)
    } else {
        let p = plan.pairing_data(n, &left, &right)?;
        let show = |v: &[RatFunc]| v.iter().map(|f| f.to_string()).collect();
        let red = Reduced {
            left: show(&p.left_reduced),
            right: show(&p.right_reduced),
        };
        (p.value, Some(red))
    };
    // the printed result must live in the parameters alone
    debug_assert!((0..reg.n_z()).all(|v| !value.depends_on(v)));

    let oracle = if flags.oracle > 0 {
        let problem = Problem {
            twist: r.twist.clone(),
            order: r.order.clone(),
            options: r.options.clone(),
            left,
            right,
        };
        let recs = confirm(&problem, &value, flags.seed, flags.oracle, PATH_TOLERANCE)?;
        let failed = recs.iter().filter(|x| !x.within(ORACLE_TOLERANCE)).count();
        if failed > 0 {
            return Err(RunError::Oracle {
                failed,
                total: recs.len(),
            });
        }
        recs
    } else {
        vec![]
    };

    let trace = trace_rows(&plan);
    Ok(Report {
        result: value.to_string(),
        order: r.order.iter().map(|&v| reg.name(v).to_string()).collect(),
        dims: plan.dims(),
        reductions: trace.iter().map(|t| t.reductions_infinity + t.reductions_finite).collect(),
        oracle,
        rotation: r
            .rotation
            .map(|(i, j, c, s)| format!("rotate {} {} {} {}", reg.name(i), reg.name(j), c, s)),
        dual,
        reduced: if flags.verbose { reduced } else { None },
        trace: if flags.verbose { Some(trace) } else { None },
        assumptions,
    })
}

/// Human-readable report; the first line is the exact result.
pub fn render(report: &Report) -> String {
    let mut lines = vec![report.result.clone()];
    if let Some(rot) = &report.rotation {
        lines.push(format!("# {}", rot));
    }
    if let Some(t) = &report.trace {
        lines.push(format!("# order {}", report.order.join(" ")));
        for row in t {
            lines.push(format!(
                "# level {} var {} nu {} -> {} det degrees {}/{} reductions {}+{} field {}",
                row.level,
                row.var,
                row.nu_inner,
                row.nu,
                row.det_num_degree,
                row.det_den_degree,
                row.reductions_infinity,
                row.reductions_finite,
                row.field
            ));
        }
    }
    if let Some(a) = &report.assumptions {
        for l in render_assumptions(a).lines() {
            lines.push(format!("# {}", l));
        }
    }
    if let Some(d) = &report.dual {
        for (k, f) in d.iter().enumerate() {
            lines.push(format!("# dual {}: {}", k + 1, f));
        }
    }
    if let Some(red) = &report.reduced {
        for (k, f) in red.left.iter().enumerate() {
            lines.push(format!("# left reduced {}: {}", k + 1, f));
        }
        for (k, f) in red.right.iter().enumerate() {
            lines.push(format!("# right reduced {}: {}", k + 1, f));
        }
    }
    for o in &report.oracle {
        let sample: Vec<String> = o.sample.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
        lines.push(format!(
            "# oracle {} numeric {:e}{:+e}i exact {:e} rel_err {:e}",
            sample.join(","),
            o.numeric[0],
            o.numeric[1],
            o.exact_at_sample,
            o.rel_err
        ));
    }
    lines.join("\n")
}

/// Parse the printed result back in the parameters of the job.
pub fn reparse_result(job: &Job, result: &str) -> Result<RatFunc, CoreError> {
    let reg = VarRegistry::new(&job.integration_vars(), &job.params)?;
    parse_ratfunc(result, &reg)
}

/// Published JSON schema of [`Report`].
pub const REPORT_SCHEMA: &str = include_str!("../report.schema.json");

