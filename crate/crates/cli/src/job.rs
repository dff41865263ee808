//! Line-oriented job files.
//!
//! ```text
//! # comment
//! vars z1 z2
//! params g
//! twist (z1)^(g)
//! twist (z2^2-4*z1^3+11*z1-7)^(g)
//! left 1/(z2^2-4*z1^3+11*z1-7)
//! right z1/(z2^2-4*z1^3+11*z1-7)
//! order z2 z1
//! basis 1: 1, z2
//! dualcand 1: 1, z2
//! rotate z1 z2 1 2
//! ```
//!
//! Baikov families replace `twist` by
//!
//! ```text
//! loops k1 k2
//! dot p p = x
//! prop z1 = -k2^2
//! cut z3 z4 z5
//! auxexp -eps
//! ```
//!
//! and may use the name `B` for the Baikov polynomial on the cut. The right
//! operand may be `right dual <k>`, the k-th element of the top-level dual
//! basis.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;
use twint_core::algebra::{parse_poly, parse_ratfunc, Affine, MultiPoly, RatFunc, Registry, VarRegistry};
use twint_core::Error as CoreError;

/// Name standing for the cut Baikov polynomial in Baikov jobs.
pub const BAIKOV: &str = "B";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JobError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: undeclared name `{name}`")]
    UndeclaredName { line: usize, column: usize, name: String },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Right {
    Form(RatFunc),
    /// 1-based index into the top-level dual basis.
    Dual(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    pub a: String,
    pub b: String,
    pub c: i64,
    pub s: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Baikov {
    pub loops: Vec<String>,
    /// External momenta in order of first appearance in `dot` lines.
    pub externals: Vec<String>,
    pub dots: Vec<(String, String, RatFunc)>,
    /// Expressions in the momenta and parameters.
    pub props: Vec<(String, MultiPoly)>,
    pub cut: Vec<String>,
    pub auxexp: Affine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub vars: Vec<String>,
    pub params: Vec<String>,
    pub twist: Vec<(MultiPoly, Affine)>,
    pub baikov: Option<Baikov>,
    pub rotate: Option<Rotation>,
    pub left: Option<RatFunc>,
    pub right: Option<Right>,
    pub order: Vec<String>,
    pub bases: BTreeMap<usize, Vec<RatFunc>>,
    pub dualcand: BTreeMap<usize, Vec<RatFunc>>,
}

impl Job {
    /// Registry of the expressions: integration variables surviving the cut,
    /// then the parameters (and `B` for Baikov jobs).
    pub fn expr_registry(&self) -> Registry {
        expr_registry(&self.vars, &self.params, self.baikov.as_ref().map(|b| &b.cut[..])).unwrap()
    }

    /// The integration variables after the cut.
    pub fn integration_vars(&self) -> Vec<String> {
        match &self.baikov {
            Some(b) => self.vars.iter().filter(|v| !b.cut.contains(v)).cloned().collect(),
            None => self.vars.clone(),
        }
    }
}

fn expr_registry(vars: &[String], params: &[String], cut: Option<&[String]>) -> twint_core::Result<Registry> {
    match cut {
        Some(cut) => {
            let z: Vec<String> = vars.iter().filter(|v| !cut.contains(v)).cloned().collect();
            let mut p = params.to_vec();
            p.push(BAIKOV.to_string());
            VarRegistry::new(&z, &p)
        }
        None => VarRegistry::new(vars, params),
    }
}

/// A piece of a line with its 1-based starting column.
#[derive(Clone, Debug)]
struct Span {
    line: usize,
    col: usize,
    text: String,
}

impl Span {
    fn err(&self, at: usize, message: impl Into<String>) -> JobError {
        JobError::Parse {
            line: self.line,
            column: self.col + at,
            message: message.into(),
        }
    }

    fn sub(&self, start: usize, end: usize) -> Span {
        Span {
            line: self.line,
            col: self.col + start,
            text: self.text[start..end].to_string(),
        }
    }

    /// Trim whitespace, keeping the column right.
    fn trim(&self) -> Span {
        let lead = self.text.len() - self.text.trim_start().len();
        let end = self.text.trim_end().len();
        self.sub(lead, end.max(lead))
    }

    fn words(&self) -> Vec<Span> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, c) in self.text.char_indices() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    out.push(self.sub(s, i));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push(self.sub(s, self.text.len()));
        }
        out
    }

    /// Split at the first occurrence of `c` at parenthesis depth zero.
    fn split_top(&self, c: char) -> Option<(Span, Span)> {
        let mut depth = 0i32;
        for (i, ch) in self.text.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ if ch == c && depth == 0 => {
                    return Some((self.sub(0, i), self.sub(i + 1, self.text.len())));
                }
                _ => {}
            }
        }
        None
    }

    fn split_all(&self, c: char) -> Vec<Span> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, ch) in self.text.char_indices() {
            if ch == c {
                out.push(self.sub(start, i));
                start = i + 1;
            }
        }
        out.push(self.sub(start, self.text.len()));
        out
    }
}

fn core_err(span: &Span, e: CoreError) -> JobError {
    match e {
        CoreError::Parse { offset, message } => span.err(offset, message),
        CoreError::UndeclaredName(name) => undeclared(span, &name),
        e => span.err(0, e.to_string()),
    }
}

fn undeclared(span: &Span, name: &str) -> JobError {
    let at = identifiers(&span.text)
        .into_iter()
        .find(|(_, n)| n == name)
        .map(|(i, _)| i)
        .unwrap_or(0);
    JobError::UndeclaredName {
        line: span.line,
        column: span.col + at,
        name: name.to_string(),
    }
}

fn identifiers(s: &str) -> Vec<(usize, String)> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i].is_ascii_digit() {
            while i < b.len() && b[i].is_ascii_alphanumeric() {
                i += 1;
            }
        } else if b[i].is_ascii_alphabetic() || b[i] == b'_' {
            let st = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((st, s[st..i].to_string()));
        } else {
            i += 1;
        }
    }
    out
}

fn check_names(span: &Span, reg: &Registry) -> Result<(), JobError> {
    for (at, name) in identifiers(&span.text) {
        if reg.index(&name).is_none() {
            return Err(JobError::UndeclaredName {
                line: span.line,
                column: span.col + at,
                name,
            });
        }
    }
    Ok(())
}

fn ratfunc(span: &Span, reg: &Registry) -> Result<RatFunc, JobError> {
    let s = span.trim();
    if s.text.is_empty() {
        return Err(span.err(0, "missing expression"));
    }
    check_names(&s, reg)?;
    parse_ratfunc(&s.text, reg).map_err(|e| core_err(&s, e))
}

fn poly(span: &Span, reg: &Registry) -> Result<MultiPoly, JobError> {
    let s = span.trim();
    if s.text.is_empty() {
        return Err(span.err(0, "missing expression"));
    }
    check_names(&s, reg)?;
    parse_poly(&s.text, reg).map_err(|e| core_err(&s, e))
}

fn affine(span: &Span, reg: &Registry) -> Result<Affine, JobError> {
    let s = span.trim();
    if s.text.is_empty() {
        return Err(span.err(0, "missing exponent"));
    }
    check_names(&s, reg)?;
    Affine::parse(&s.text, reg).map_err(|e| core_err(&s, e))
}

#[derive(Default)]
struct Raw {
    vars: Option<(Span, Vec<Span>)>,
    params: Option<(Span, Vec<Span>)>,
    twist: Vec<(Span, Span)>,
    left: Option<Span>,
    right: Option<Span>,
    order: Option<Vec<Span>>,
    bases: Vec<(Span, usize, Vec<Span>)>,
    dualcand: Vec<(Span, usize, Vec<Span>)>,
    rotate: Option<(Span, Vec<Span>)>,
    loops: Option<Vec<Span>>,
    dots: Vec<(Span, Span, Span)>,
    props: Vec<(Span, Span)>,
    cut: Option<(Span, Vec<Span>)>,
    auxexp: Option<Span>,
}

fn once<T>(slot: &mut Option<T>, v: T, kw: &Span) -> Result<(), JobError> {
    if slot.is_some() {
        return Err(kw.err(0, format!("`{}` given twice", kw.text)));
    }
    *slot = Some(v);
    Ok(())
}

fn level_list(kw: &Span, rest: &Span) -> Result<(usize, Vec<Span>), JobError> {
    let Some((lvl, list)) = rest.split_top(':') else {
        return Err(rest.err(0, format!("expected `{} <level>: <expr>, ...`", kw.text)));
    };
    let l = lvl.trim();
    let level = l
        .text
        .parse::<usize>()
        .map_err(|_| l.err(0, format!("level `{}` is not a number", l.text)))?;
    Ok((level, list.split_all(',')))
}

fn name_list(spans: &[Span]) -> Vec<String> {
    spans.iter().map(|s| s.text.clone()).collect()
}

fn collect(text: &str) -> Result<Raw, JobError> {
    let mut raw = Raw::default();
    for (no, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let full = Span {
            line: no + 1,
            col: 1,
            text: content.to_string(),
        };
        let t = full.trim();
        if t.text.is_empty() {
            continue;
        }
        let kw_end = t.text.find(char::is_whitespace).unwrap_or(t.text.len());
        let kw = t.sub(0, kw_end);
        let rest = t.sub(kw_end, t.text.len());
        match kw.text.as_str() {
            "vars" => once(&mut raw.vars, (kw.clone(), rest.words()), &kw)?,
            "params" => once(&mut raw.params, (kw.clone(), rest.words()), &kw)?,
            "twist" => {
                let r = rest.trim();
                let Some((base, exp)) = r.split_top('^') else {
                    return Err(r.err(0, "expected `twist (<poly>)^(<exponent>)`"));
                };
                raw.twist.push((base, exp));
            }
            "left" => once(&mut raw.left, rest, &kw)?,
            "right" => once(&mut raw.right, rest, &kw)?,
            "order" => once(&mut raw.order, rest.words(), &kw)?,
            "basis" => {
                let (l, list) = level_list(&kw, &rest)?;
                raw.bases.push((kw.clone(), l, list));
            }
            "dualcand" => {
                let (l, list) = level_list(&kw, &rest)?;
                raw.dualcand.push((kw.clone(), l, list));
            }
            "rotate" => once(&mut raw.rotate, (kw.clone(), rest.words()), &kw)?,
            "loops" => once(&mut raw.loops, rest.words(), &kw)?,
            "dot" => {
                let Some((lhs, rhs)) = rest.split_top('=') else {
                    return Err(rest.err(0, "expected `dot <a> <b> = <expr>`"));
                };
                let w = lhs.words();
                if w.len() != 2 {
                    return Err(lhs.err(0, "expected two momenta"));
                }
                raw.dots.push((w[0].clone(), w[1].clone(), rhs));
            }
            "prop" => {
                let Some((lhs, rhs)) = rest.split_top('=') else {
                    return Err(rest.err(0, "expected `prop <var> = <expr>`"));
                };
                let w = lhs.words();
                if w.len() != 1 {
                    return Err(lhs.err(0, "expected one Baikov variable"));
                }
                raw.props.push((w[0].clone(), rhs));
            }
            "cut" => once(&mut raw.cut, (kw.clone(), rest.words()), &kw)?,
            "auxexp" => once(&mut raw.auxexp, rest, &kw)?,
            other => return Err(kw.err(0, format!("unknown directive `{}`", other))),
        }
    }
    Ok(raw)
}

/// Parse a job file.
pub fn parse_job(text: &str) -> Result<Job, JobError> {
    let raw = collect(text)?;
    let (vars_kw, vars) = raw.vars.clone().ok_or_else(|| JobError::Parse {
        line: 1,
        column: 1,
        message: "missing `vars`".into(),
    })?;
    let vars_s = name_list(&vars);
    let params_s = raw.params.as_ref().map(|(_, p)| name_list(p)).unwrap_or_default();
    let full = VarRegistry::new(&vars_s, &params_s).map_err(|e| vars_kw.err(0, e.to_string()))?;

    let baikov_mode =
        raw.loops.is_some() || !raw.dots.is_empty() || !raw.props.is_empty() || raw.cut.is_some() || raw.auxexp.is_some();
    let mut baikov = None;
    if baikov_mode {
        if let Some((b, _)) = raw.twist.first() {
            return Err(b.err(0, "`twist` cannot be combined with a Baikov family"));
        }
        if vars_s.iter().chain(&params_s).any(|n| n == BAIKOV) {
            return Err(vars_kw.err(0, format!("`{}` is reserved for the Baikov polynomial", BAIKOV)));
        }
        let missing = |what: &str| JobError::Parse {
            line: vars_kw.line,
            column: 1,
            message: format!("Baikov job without `{}`", what),
        };
        let loops = name_list(raw.loops.as_ref().ok_or_else(|| missing("loops"))?);
        let (cut_kw, cut) = raw.cut.clone().ok_or_else(|| missing("cut"))?;
        for c in &cut {
            if !vars_s.contains(&c.text) {
                return Err(JobError::UndeclaredName {
                    line: c.line,
                    column: c.col,
                    name: c.text.clone(),
                });
            }
        }
        let cut_s = name_list(&cut);
        let mut externals: Vec<String> = Vec::new();
        for (a, b, _) in &raw.dots {
            for m in [a, b] {
                if loops.contains(&m.text) {
                    return Err(m.err(0, "scalar products of loop momenta are integration variables"));
                }
                if !externals.contains(&m.text) {
                    externals.push(m.text.clone());
                }
            }
        }
        let mut dots = Vec::new();
        for (a, b, e) in &raw.dots {
            dots.push((a.text.clone(), b.text.clone(), ratfunc(e, &full)?));
        }
        let momenta: Vec<String> = loops.iter().chain(&externals).cloned().collect();
        let mreg = VarRegistry::new(&momenta, &params_s).map_err(|e| cut_kw.err(0, e.to_string()))?;
        let mut props = Vec::new();
        for (name, e) in &raw.props {
            if !vars_s.contains(&name.text) {
                return Err(JobError::UndeclaredName {
                    line: name.line,
                    column: name.col,
                    name: name.text.clone(),
                });
            }
            props.push((name.text.clone(), poly(e, &mreg)?));
        }
        let ereg = expr_registry(&vars_s, &params_s, Some(&cut_s)).map_err(|e| cut_kw.err(0, e.to_string()))?;
        let aux = raw.auxexp.as_ref().ok_or_else(|| missing("auxexp"))?;
        let auxexp = affine(aux, &ereg)?;
        baikov = Some(Baikov {
            loops,
            externals,
            dots,
            props,
            cut: cut_s,
            auxexp,
        });
    }
    let ereg = expr_registry(&vars_s, &params_s, baikov.as_ref().map(|b| &b.cut[..])).unwrap();

    let mut twist = Vec::new();
    for (b, e) in &raw.twist {
        twist.push((poly(b, &ereg)?, affine(e, &ereg)?));
    }
    let left = raw.left.as_ref().map(|s| ratfunc(s, &ereg)).transpose()?;
    let right = match &raw.right {
        None => None,
        Some(s) => {
            let w = s.words();
            if w.first().map(|x| x.text.as_str()) == Some("dual") {
                if w.len() != 2 {
                    return Err(s.err(0, "expected `right dual <k>`"));
                }
                let k = w[1]
                    .text
                    .parse::<usize>()
                    .ok()
                    .filter(|&k| k > 0)
                    .ok_or_else(|| w[1].err(0, "dual index must be a positive integer"))?;
                Some(Right::Dual(k))
            } else {
                Some(Right::Form(ratfunc(s, &ereg)?))
            }
        }
    };
    let integration: Vec<String> = (0..ereg.n_z()).map(|v| ereg.name(v).to_string()).collect();
    let order = match &raw.order {
        Some(o) => {
            for s in o {
                if !integration.contains(&s.text) {
                    return Err(JobError::UndeclaredName {
                        line: s.line,
                        column: s.col,
                        name: s.text.clone(),
                    });
                }
            }
            let names = name_list(o);
            let mut sorted = names.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != names.len() || names.len() != integration.len() {
                return Err(o
                    .first()
                    .map(|s| s.err(0, "order must list every integration variable once"))
                    .unwrap_or_else(|| JobError::Parse {
                        line: 1,
                        column: 1,
                        message: "empty order".into(),
                    }));
            }
            names
        }
        None => integration.clone(),
    };
    let mut bases = BTreeMap::new();
    let mut dualcand = BTreeMap::new();
    for (list, target) in [(&raw.bases, &mut bases), (&raw.dualcand, &mut dualcand)] {
        for (kw, level, items) in list {
            if *level == 0 || *level > integration.len() {
                return Err(kw.err(0, format!("level {} outside 1..={}", level, integration.len())));
            }
            if target.contains_key(level) {
                return Err(kw.err(0, format!("level {} given twice", level)));
            }
            let v = items.iter().map(|s| ratfunc(s, &ereg)).collect::<Result<Vec<_>, _>>()?;
            target.insert(*level, v);
        }
    }
    let rotate = match &raw.rotate {
        None => None,
        Some((kw, w)) => {
            if w.len() != 4 {
                return Err(kw.err(0, "expected `rotate <a> <b> <c> <s>`"));
            }
            for s in &w[..2] {
                if !integration.contains(&s.text) {
                    return Err(JobError::UndeclaredName {
                        line: s.line,
                        column: s.col,
                        name: s.text.clone(),
                    });
                }
            }
            let int = |s: &Span| s.text.parse::<i64>().map_err(|_| s.err(0, "expected an integer"));
            let (c, s) = (int(&w[2])?, int(&w[3])?);
            if c == 0 && s == 0 {
                return Err(w[2].err(0, "rotation with c = s = 0"));
            }
            Some(Rotation {
                a: w[0].text.clone(),
                b: w[1].text.clone(),
                c,
                s,
            })
        }
    };
    Ok(Job {
        vars: vars_s,
        params: params_s,
        twist,
        baikov,
        rotate,
        left,
        right,
        order,
        bases,
        dualcand,
    })
}

/// Render a job in canonical form; `parse_job` of the output gives back an
/// equal job.
pub fn serialize(job: &Job) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vars {}", job.vars.join(" "));
    if !job.params.is_empty() {
        let _ = writeln!(s, "params {}", job.params.join(" "));
    }
    for (p, g) in &job.twist {
        let _ = writeln!(s, "twist ({})^({})", p, g);
    }
    if let Some(b) = &job.baikov {
        let _ = writeln!(s, "loops {}", b.loops.join(" "));
        for (x, y, e) in &b.dots {
            let _ = writeln!(s, "dot {} {} = {}", x, y, e);
        }
        for (z, e) in &b.props {
            let _ = writeln!(s, "prop {} = {}", z, e);
        }
        let _ = writeln!(s, "cut {}", b.cut.join(" "));
        let _ = writeln!(s, "auxexp {}", b.auxexp);
    }
    if let Some(r) = &job.rotate {
        let _ = writeln!(s, "rotate {} {} {} {}", r.a, r.b, r.c, r.s);
    }
    if let Some(l) = &job.left {
        let _ = writeln!(s, "left {}", l);
    }
    match &job.right {
        Some(Right::Form(f)) => {
            let _ = writeln!(s, "right {}", f);
        }
        Some(Right::Dual(k)) => {
            let _ = writeln!(s, "right dual {}", k);
        }
        None => {}
    }
    let _ = writeln!(s, "order {}", job.order.join(" "));
    for (kw, map) in [("basis", &job.bases), ("dualcand", &job.dualcand)] {
        for (level, items) in map {
            let list: Vec<String> = items.iter().map(|f| f.to_string()).collect();
            let _ = writeln!(s, "{} {}: {}", kw, level, list.join(", "));
        }
    }
    s
}
