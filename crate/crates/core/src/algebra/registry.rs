use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered variable names: integration variables first, then parameters.
///
/// The position of a name fixes its slot in every exponent vector and its
/// rank in the monomial order, so a registry is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarRegistry {
    names: Vec<String>,
    n_z: usize,
}

pub type Registry = Arc<VarRegistry>;

pub(crate) fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl VarRegistry {
    pub fn new<S: AsRef<str>>(z_vars: &[S], params: &[S]) -> Result<Registry> {
        let mut names: Vec<String> = Vec::with_capacity(z_vars.len() + params.len());
        for s in z_vars.iter().chain(params) {
            let s = s.as_ref();
            if !valid_name(s) {
                return Err(Error::InvalidName(s.to_string()));
            }
            if names.iter().any(|n| n == s) {
                return Err(Error::DuplicateName(s.to_string()));
            }
            names.push(s.to_string());
        }
        Ok(Arc::new(VarRegistry {
            names,
            n_z: z_vars.len(),
        }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index(name)
            .ok_or_else(|| Error::UndeclaredName(name.to_string()))
    }

    pub fn z_vars(&self) -> &[String] {
        &self.names[..self.n_z]
    }

    pub fn params(&self) -> &[String] {
        &self.names[self.n_z..]
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn is_z(&self, idx: usize) -> bool {
        idx < self.n_z
    }
}

/// Two registries are compatible when they are the same object or list the
/// same names in the same order.
pub(crate) fn same_registry(a: &Registry, b: &Registry) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
