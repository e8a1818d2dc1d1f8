use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative rank tolerance for complex matrices.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// The scalar field a tuple or subspace lives over.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FieldSpec {
    /// Complex floating point; `rank_tol` is relative to the largest
    /// singular value.
    Complex { rank_tol: f64 },
    /// The prime field of order `p`.
    Prime(u64),
}

impl FieldSpec {
    pub fn complex() -> Self {
        FieldSpec::Complex {
            rank_tol: DEFAULT_RANK_TOL,
        }
    }

    pub fn complex_with_tol(rank_tol: f64) -> Result<Self> {
        if !(rank_tol > 0.0 && rank_tol < 1.0) {
            return Err(Error::Config(format!(
                "rank tolerance must lie in (0, 1), got {rank_tol}"
            )));
        }
        Ok(FieldSpec::Complex { rank_tol })
    }

    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Field(format!("{p} is not prime")));
        }
        if p >= 1 << 31 {
            return Err(Error::Field(format!("prime {p} too large (must be < 2^31)")));
        }
        Ok(FieldSpec::Prime(p))
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, FieldSpec::Complex { .. })
    }

    pub fn rank_tol(&self) -> f64 {
        match self {
            FieldSpec::Complex { rank_tol } => *rank_tol,
            FieldSpec::Prime(_) => 0.0,
        }
    }

    /// Fields agree when both are complex (tolerances may differ) or both are
    /// the same prime field.
    pub fn compatible(&self, other: &FieldSpec) -> bool {
        match (self, other) {
            (FieldSpec::Complex { .. }, FieldSpec::Complex { .. }) => true,
            (FieldSpec::Prime(a), FieldSpec::Prime(b)) => a == b,
            _ => false,
        }
    }

    pub fn ensure_compatible(&self, other: &FieldSpec) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::Field(format!(
                "field mismatch: {} vs {}",
                self.label(),
                other.label()
            )))
        }
    }

    pub fn label(&self) -> String {
        match self {
            FieldSpec::Complex { .. } => "complex".to_string(),
            FieldSpec::Prime(p) => format!("F_{p}"),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= p {
        if p.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}
