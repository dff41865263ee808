//! Univariate polynomials, rational functions and small dense linear algebra
//! over complex double-doubles.

use nalgebra::DMatrix;
use num_traits::Zero;

use super::dd::{cabs, cdd, cdd_f64, cdd_q, CDD, DD};
use crate::algebra::{MultiPoly, RatFunc};
use crate::error::{Error, Result};

/// Minimum relative separation of distinct roots.
pub const CLUSTER_SEPARATION: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct NumPoly {
    /// Index = power.
    pub coeffs: Vec<CDD>,
}

impl NumPoly {
    /// A polynomial in `var` whose coefficients are rational numbers.
    pub fn from_poly(p: &MultiPoly, var: usize) -> Result<Self> {
        let coeffs = p
            .coeffs_in(var)
            .iter()
            .map(|c| {
                c.as_constant().map(|q| cdd_q(&q)).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "coefficient {} is not a number; specialize all parameters first",
                        c
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NumPoly { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: CDD) -> CDD {
        let mut acc = CDD::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + *c;
        }
        acc
    }

    pub fn derivative(&self) -> NumPoly {
        NumPoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| *c * cdd(DD::from_f64(k as f64)))
                .collect(),
        }
    }

    /// All roots, from companion-matrix eigenvalues polished by Newton steps.
    pub fn roots(&self) -> Result<Vec<CDD>> {
        let d = self.degree();
        if d == 0 {
            return Ok(vec![]);
        }
        let lead = self.coeffs[d];
        let monic: Vec<f64> = self.coeffs[..d].iter().map(|c| (*c / lead).re.to_f64()).collect();
        let monic_im: Vec<f64> = self.coeffs[..d].iter().map(|c| (*c / lead).im.to_f64()).collect();
        if monic_im.iter().any(|x| *x != 0.0) {
            return Err(Error::InvalidInput("complex polynomial coefficients".into()));
        }
        let comp = DMatrix::<f64>::from_fn(d, d, |r, c| {
            if r == 0 {
                -monic[d - 1 - c]
            } else if r == c + 1 {
                1.0
            } else {
                0.0
            }
        });
        let approx = comp.complex_eigenvalues();
        let dp = self.derivative();
        let mut roots = Vec::with_capacity(d);
        for z0 in approx.iter() {
            let mut z = cdd_f64(*z0);
            for _ in 0..40 {
                let d1 = dp.eval(z);
                if cabs(d1).hi == 0.0 {
                    return Err(Error::RootClustering(0.0));
                }
                let step = self.eval(z) / d1;
                z = z - step;
                let scale = cabs(z).hi.max(1.0);
                if cabs(step).hi <= 1e-30 * scale {
                    break;
                }
            }
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::RootClustering(0.0));
            }
            roots.push(z);
        }
        let sep = min_separation(&roots);
        if sep < CLUSTER_SEPARATION {
            return Err(Error::RootClustering(sep));
        }
        Ok(roots)
    }
}

/// Smallest relative distance between two points of the list.
pub fn min_separation(pts: &[CDD]) -> f64 {
    let mut sep = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let scale = cabs(*a).hi.max(cabs(*b).hi).max(1.0);
            sep = sep.min(cabs(*a - *b).hi / scale);
        }
    }
    sep
}

/// A rational function of one variable with numeric coefficients.
#[derive(Clone, Debug)]
pub struct NumRat {
    pub num: NumPoly,
    pub den: NumPoly,
}

impl NumRat {
    pub fn from_ratfunc(f: &RatFunc, var: usize) -> Result<Self> {
        Ok(NumRat {
            num: NumPoly::from_poly(f.num(), var)?,
            den: NumPoly::from_poly(f.den(), var)?,
        })
    }

    pub fn eval(&self, z: CDD) -> CDD {
        if self.num.coeffs.is_empty() {
            return CDD::zero();
        }
        self.num.eval(z) / self.den.eval(z)
    }

    /// Roots of the denominator.
    pub fn poles(&self) -> Result<Vec<CDD>> {
        self.den.roots()
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(m: &[Vec<CDD>]) -> CDD {
    let n = m.len();
    let mut a: Vec<Vec<CDD>> = m.to_vec();
    let mut acc = cdd(DD::from_f64(1.0));
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| cabs(a[i][c]).partial_cmp(&cabs(a[j][c])).unwrap())
            .unwrap();
        if a[p][c].is_zero() {
            return CDD::zero();
        }
        if p != c {
            a.swap(p, c);
            acc = -acc;
        }
        acc = acc * a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let t = a[c][k] * f;
                a[r][k] = a[r][k] - t;
            }
        }
    }
    acc
}

/// `adj(m)` from cofactor determinants.
pub fn adjugate(m: &[Vec<CDD>]) -> Vec<Vec<CDD>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![cdd(DD::from_f64(1.0))]];
    }
    let mut out = vec![vec![CDD::zero(); n]; n];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            // entry (r, c) of the adjugate is the (c, r) cofactor
            let minor: Vec<Vec<CDD>> = (0..n)
                .filter(|&i| i != c)
                .map(|i| (0..n).filter(|&j| j != r).map(|j| m[i][j]).collect())
                .collect();
            let d = det(&minor);
            *slot = if (r + c) % 2 == 1 { -d } else { d };
        }
    }
    out
}

/// Solve `m x = b`; `None` if the matrix is numerically singular.
pub fn solve(m: &[Vec<CDD>], b: &[CDD]) -> Option<Vec<CDD>> {
    let n = m.len();
    let mut a: Vec<Vec<CDD>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(*bi);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| cabs(a[i][c]).partial_cmp(&cabs(a[j][c])).unwrap())
            .unwrap();
        if a[p][c].is_zero() {
            return None;
        }
        a.swap(p, c);
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[r][c] / a[c][c];
            if f.is_zero() {
                continue;
            }
            for k in c..=n {
                let t = a[c][k] * f;
                a[r][k] = a[r][k] - t;
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}
