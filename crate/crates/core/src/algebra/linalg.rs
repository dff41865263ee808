use std::fmt;

use super::gcd::gcd;
use super::poly::MultiPoly;
use super::ratfunc::RatFunc;
use super::registry::Registry;
use crate::error::{Error, Result};

/// Dense row-major matrix of rational functions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    reg: Registry,
    rows: usize,
    cols: usize,
    data: Vec<RatFunc>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RatMatrix {
    pub fn zeros(reg: &Registry, rows: usize, cols: usize) -> Self {
        RatMatrix {
            reg: reg.clone(),
            rows,
            cols,
            data: vec![RatFunc::zero(reg); rows * cols],
        }
    }

    pub fn identity(reg: &Registry, n: usize) -> Self {
        let mut m = Self::zeros(reg, n, n);
        for i in 0..n {
            m.set(i, i, RatFunc::one(reg));
        }
        m
    }

    pub fn from_rows(reg: &Registry, rows: Vec<Vec<RatFunc>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        RatMatrix {
            reg: reg.clone(),
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(
        reg: &Registry,
        rows: usize,
        cols: usize,
        f: impl FnMut(usize, usize) -> RatFunc,
    ) -> Self {
        let mut f = f;
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        RatMatrix {
            reg: reg.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RatFunc {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RatFunc) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[RatFunc] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[RatFunc] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.reg, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn neg(&self) -> Self {
        RatMatrix {
            reg: self.reg.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&RatFunc) -> RatFunc) -> Self {
        RatMatrix {
            reg: self.reg.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&RatFunc) -> Result<RatFunc>) -> Result<Self> {
        Ok(RatMatrix {
            reg: self.reg.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn add(&self, o: &RatMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        RatMatrix {
            reg: self.reg.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &RatMatrix) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatMatrix) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in matrix product");
        Self::from_fn(&self.reg, self.rows, o.cols, |i, j| {
            let mut acc = RatFunc::zero(&self.reg);
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = o.get(k, j);
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[RatFunc]) -> Vec<RatFunc> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = RatFunc::zero(&self.reg);
                for (k, x) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if !a.is_zero() && !x.is_zero() {
                        acc = &acc + &(a * x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Rows scaled by the lcm of their denominators: `(poly rows, scales)`.
    fn cleared_rows(&self, extra: Option<&RatMatrix>) -> (Vec<Vec<MultiPoly>>, Vec<MultiPoly>) {
        let mut out = Vec::with_capacity(self.rows);
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row: Vec<&RatFunc> = self.row(i).iter().collect();
            if let Some(e) = extra {
                row.extend(e.row(i).iter());
            }
            let mut l = MultiPoly::one(&self.reg);
            for x in &row {
                if !x.den().is_one() {
                    let g = gcd(&l, x.den());
                    l = &l * &x.den().div_exact(&g).unwrap();
                }
            }
            out.push(
                row.iter()
                    .map(|x| {
                        if x.is_zero() {
                            MultiPoly::zero(&self.reg)
                        } else {
                            x.num() * &l.div_exact(x.den()).unwrap()
                        }
                    })
                    .collect(),
            );
            scales.push(l);
        }
        (out, scales)
    }

    /// Fraction-free elimination on the first `ncols_pivot` columns.
    /// Returns the pivot rows used and the sign of the row permutation.
    fn bareiss(m: &mut [Vec<MultiPoly>], ncols_pivot: usize) -> (Vec<(usize, usize)>, i32) {
        let nrows = m.len();
        let width = m.first().map(|r| r.len()).unwrap_or(0);
        let reg = m
            .first()
            .and_then(|r| r.first())
            .map(|p| p.registry().clone());
        let Some(reg) = reg else {
            return (vec![], 1);
        };
        let mut prev = MultiPoly::one(&reg);
        let mut sign = 1;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols_pivot {
            if r == nrows {
                break;
            }
            let best = (r..nrows)
                .filter(|&i| !m[i][c].is_zero())
                .min_by_key(|&i| m[i][c].nterms());
            let Some(p) = best else { continue };
            if p != r {
                m.swap(p, r);
                sign = -sign;
            }
            for i in r + 1..nrows {
                for j in c + 1..width {
                    let t = &(&m[i][j] * &m[r][c]) - &(&m[i][c] * &m[r][j]);
                    m[i][j] = t
                        .div_exact(&prev)
                        .expect("Bareiss division is exact");
                }
                m[i][c] = MultiPoly::zero(&reg);
            }
            prev = m[r][c].clone();
            pivots.push((r, c));
            r += 1;
        }
        (pivots, sign)
    }

    pub fn det(&self) -> RatFunc {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return RatFunc::one(&self.reg);
        }
        if n == 1 {
            return self.get(0, 0).clone();
        }
        if n == 2 {
            return &(self.get(0, 0) * self.get(1, 1)) - &(self.get(0, 1) * self.get(1, 0));
        }
        if self.is_diagonal() {
            let mut acc = RatFunc::one(&self.reg);
            for i in 0..n {
                acc = &acc * self.get(i, i);
            }
            return acc;
        }
        let (mut m, scales) = self.cleared_rows(None);
        let (pivots, sign) = Self::bareiss(&mut m, n);
        if pivots.len() < n {
            return RatFunc::zero(&self.reg);
        }
        let mut den = MultiPoly::one(&self.reg);
        for s in &scales {
            den = &den * s;
        }
        let num = if sign < 0 {
            -&m[n - 1][n - 1]
        } else {
            m[n - 1][n - 1].clone()
        };
        RatFunc::new(num, den).unwrap()
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let (mut m, _) = self.cleared_rows(None);
        Self::bareiss(&mut m, self.cols).0.len()
    }

    /// Solve `self · X = rhs` for a square, nonsingular `self`.
    pub fn solve_many(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        assert_eq!(self.rows, self.cols, "linear solve needs a square matrix");
        assert_eq!(self.rows, rhs.rows, "right-hand side has wrong height");
        let n = self.rows;
        let k = rhs.cols;
        if n == 0 {
            return Ok(rhs.clone());
        }
        if n == 1 {
            let a = self.get(0, 0);
            if a.is_zero() {
                return Err(Error::SingularSystem("1x1 system with zero coefficient".into()));
            }
            let inv = a.recip()?;
            return Ok(Self::from_fn(&self.reg, 1, k, |_, j| rhs.get(0, j) * &inv));
        }
        let (mut m, _) = self.cleared_rows(Some(rhs));
        let (pivots, _) = Self::bareiss(&mut m, n);
        if pivots.len() < n {
            return Err(Error::SingularSystem(format!(
                "{}x{} system has rank {}",
                n,
                n,
                pivots.len()
            )));
        }
        let mut x = Self::zeros(&self.reg, n, k);
        for col in 0..k {
            for i in (0..n).rev() {
                let mut acc: RatFunc = m[i][n + col].clone().into();
                for j in i + 1..n {
                    if !m[i][j].is_zero() {
                        let t = &RatFunc::from(m[i][j].clone()) * x.get(j, col);
                        acc = &acc - &t;
                    }
                }
                let piv: RatFunc = m[i][i].clone().into();
                x.set(i, col, acc.checked_div(&piv)?);
            }
        }
        Ok(x)
    }

    pub fn solve(&self, b: &[RatFunc]) -> Result<Vec<RatFunc>> {
        let rhs = Self::from_fn(&self.reg, b.len(), 1, |i, _| b[i].clone());
        let x = self.solve_many(&rhs)?;
        Ok((0..b.len()).map(|i| x.get(i, 0).clone()).collect())
    }

    pub fn inverse(&self) -> Result<RatMatrix> {
        if self.is_diagonal() {
            let mut out = Self::zeros(&self.reg, self.rows, self.cols);
            for i in 0..self.rows {
                let d = self.get(i, i);
                if d.is_zero() {
                    return Err(Error::SingularSystem("zero diagonal entry".into()));
                }
                out.set(i, i, d.recip()?);
            }
            return Ok(out);
        }
        self.solve_many(&Self::identity(&self.reg, self.rows))
    }

    /// Basis of `{x : self·x = 0}` by Gauss-Jordan elimination.
    pub fn nullspace(&self) -> Vec<Vec<RatFunc>> {
        let mut m: Vec<Vec<RatFunc>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(p) = (r..self.rows).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(p, r);
            let inv = m[r][c].recip().unwrap();
            for x in m[r].iter_mut() {
                *x = &*x * &inv;
            }
            for i in 0..self.rows {
                if i != r && !m[i][c].is_zero() {
                    let f = m[i][c].clone();
                    for j in 0..self.cols {
                        if !m[r][j].is_zero() {
                            let t = &m[r][j] * &f;
                            m[i][j] = &m[i][j] - &t;
                        }
                    }
                }
            }
            pivot_cols.push(c);
            r += 1;
            if r == self.rows {
                break;
            }
        }
        (0..self.cols)
            .filter(|c| !pivot_cols.contains(c))
            .map(|free| {
                let mut v = vec![RatFunc::zero(&self.reg); self.cols];
                v[free] = RatFunc::one(&self.reg);
                for (row, &pc) in pivot_cols.iter().enumerate() {
                    v[pc] = -&m[row][free];
                }
                v
            })
            .collect()
    }

    /// Minor with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> RatMatrix {
        let mut rows = Vec::with_capacity(self.rows - 1);
        for i in (0..self.rows).filter(|&i| i != r) {
            rows.push(
                (0..self.cols)
                    .filter(|&j| j != c)
                    .map(|j| self.get(i, j).clone())
                    .collect(),
            );
        }
        Self::from_rows(&self.reg, rows)
    }

    /// Classical adjoint, `adj(A)·A = A·adj(A) = det(A)·1`.
    pub fn adjugate(&self) -> RatMatrix {
        let n = self.rows;
        assert_eq!(n, self.cols);
        if n == 1 {
            return Self::identity(&self.reg, 1);
        }
        let det = self.det();
        if !det.is_zero() {
            let inv = self.inverse().expect("nonzero determinant");
            return inv.map(|x| x * &det);
        }
        Self::from_fn(&self.reg, n, n, |i, j| {
            let d = self.minor(j, i).det();
            if (i + j) % 2 == 1 {
                -d
            } else {
                d
            }
        })
    }
}
