use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::fp::FpMatrix;
use crate::linalg::{self, CMat};

/// A dense matrix over either supported field.
#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Complex(CMat),
    Prime(FpMatrix),
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Complex(m) => m.nrows(),
            Matrix::Prime(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Complex(m) => m.ncols(),
            Matrix::Prime(m) => m.cols(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Matrix::Complex(_))
    }

    /// The field kind of the entries; complex matrices report the default
    /// rank tolerance.
    pub fn field(&self) -> FieldSpec {
        match self {
            Matrix::Complex(_) => FieldSpec::complex(),
            Matrix::Prime(m) => FieldSpec::Prime(m.modulus()),
        }
    }

    pub fn as_complex(&self) -> Result<&CMat> {
        match self {
            Matrix::Complex(m) => Ok(m),
            Matrix::Prime(m) => Err(Error::Field(format!(
                "expected a complex matrix, got one over F_{}",
                m.modulus()
            ))),
        }
    }

    pub fn as_prime(&self) -> Result<&FpMatrix> {
        match self {
            Matrix::Prime(m) => Ok(m),
            Matrix::Complex(_) => Err(Error::Field(
                "expected a prime-field matrix, got a complex one".into(),
            )),
        }
    }
}

/// Rank of `m`. Over C counts singular values above `tol * sigma_max`; over a
/// prime field the rank is exact and `tol` is ignored.
pub fn numerical_rank(m: &Matrix, tol: f64) -> usize {
    match m {
        Matrix::Complex(c) => linalg::numerical_rank(c, tol),
        Matrix::Prime(f) => f.rank(),
    }
}
