use std::cmp::Ordering;

use smallvec::SmallVec;

/// Exponent vector with one slot per registry name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub(crate) SmallVec<[u16; 8]>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(SmallVec::from_elem(0, n))
    }

    pub fn var(n: usize, idx: usize, exp: u16) -> Self {
        let mut m = Self::one(n);
        m.0[idx] = exp;
        m
    }

    pub fn from_exps(exps: &[u16]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn exps(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn get(&self, idx: usize) -> u16 {
        self.0[idx]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                .collect(),
        )
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming divisibility.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| b - a)
                .collect(),
        )
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| *a.min(b))
                .collect(),
        )
    }

    pub fn with(&self, idx: usize, exp: u16) -> Monomial {
        let mut m = self.clone();
        m.0[idx] = exp;
        m
    }

    /// Graded reverse lexicographic comparison restricted to `vars`
    /// (earlier entries of `vars` rank higher).
    pub fn cmp_grevlex(&self, other: &Monomial, vars: &[usize]) -> Ordering {
        let da: u32 = vars.iter().map(|&v| self.0[v] as u32).sum();
        let db: u32 = vars.iter().map(|&v| other.0[v] as u32).sum();
        da.cmp(&db).then_with(|| {
            for &v in vars.iter().rev() {
                match self.0[v].cmp(&other.0[v]) {
                    Ordering::Equal => continue,
                    o => return o.reverse(),
                }
            }
            Ordering::Equal
        })
    }
}

/// Graded lexicographic order: total degree first, then the earliest
/// registry variable with a larger exponent wins.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
