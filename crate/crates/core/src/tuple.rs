use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::fp::FpMatrix;
use crate::linalg::{self, CMat};
use crate::matrix::Matrix;

/// Tolerance used for the lazily cached structural flags.
pub const FLAG_TOL: f64 = 1e-9;

/// Provenance attached to a tuple; serialized under `"metadata"`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TupleMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graphical: Option<GraphicalInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Marks a tuple as the graphical tuple of a regular graph. `pairs` lists the
/// ordered adjacent pairs `(i, j)` (1-indexed) in tuple order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphicalInfo {
    pub degree: usize,
    pub normalized: bool,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerInfo {
    pub s: f64,
    pub branch: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TupleFlags {
    pub doubly_stochastic: bool,
    pub unitary: bool,
}

#[derive(Clone, Debug)]
enum Mats {
    Complex(Vec<CMat>),
    Prime(Vec<FpMatrix>),
}

/// An ordered tuple `(B_1, ..., B_d)` of square `n x n` matrices.
#[derive(Clone, Debug)]
pub struct MatrixTuple {
    field: FieldSpec,
    n: usize,
    mats: Mats,
    pub metadata: TupleMetadata,
    flags: OnceLock<TupleFlags>,
}

impl PartialEq for MatrixTuple {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.n == other.n
            && self.metadata == other.metadata
            && match (&self.mats, &other.mats) {
                (Mats::Complex(a), Mats::Complex(b)) => a == b,
                (Mats::Prime(a), Mats::Prime(b)) => a == b,
                _ => false,
            }
    }
}

impl MatrixTuple {
    pub fn complex(mats: Vec<CMat>) -> Result<Self> {
        Self::complex_with_field(mats, FieldSpec::complex())
    }

    pub fn complex_with_field(mats: Vec<CMat>, field: FieldSpec) -> Result<Self> {
        if !field.is_complex() {
            return Err(Error::Field("complex matrices need a complex field".into()));
        }
        let n = check_square(mats.iter().map(|m| (m.nrows(), m.ncols())))?;
        Ok(MatrixTuple {
            field,
            n,
            mats: Mats::Complex(mats),
            metadata: TupleMetadata::default(),
            flags: OnceLock::new(),
        })
    }

    pub fn prime(mats: Vec<FpMatrix>, p: u64) -> Result<Self> {
        let field = FieldSpec::prime(p)?;
        if mats.iter().any(|m| m.modulus() != p) {
            return Err(Error::Field("matrix modulus differs from tuple field".into()));
        }
        let n = check_square(mats.iter().map(|m| (m.rows(), m.cols())))?;
        Ok(MatrixTuple {
            field,
            n,
            mats: Mats::Prime(mats),
            metadata: TupleMetadata::default(),
            flags: OnceLock::new(),
        })
    }

    pub fn from_matrices(mats: Vec<Matrix>, field: FieldSpec) -> Result<Self> {
        match field {
            FieldSpec::Complex { .. } => {
                let cm = mats
                    .into_iter()
                    .map(|m| match m {
                        Matrix::Complex(c) => Ok(c),
                        Matrix::Prime(_) => Err(Error::Field("mixed fields in tuple".into())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::complex_with_field(cm, field)
            }
            FieldSpec::Prime(p) => {
                let pm = mats
                    .into_iter()
                    .map(|m| match m {
                        Matrix::Prime(f) => Ok(f),
                        Matrix::Complex(_) => Err(Error::Field("mixed fields in tuple".into())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::prime(pm, p)
            }
        }
    }

    pub fn with_metadata(mut self, metadata: TupleMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Replaces the rank tolerance of a complex tuple.
    pub fn set_rank_tol(&mut self, tol: f64) -> Result<()> {
        if let FieldSpec::Complex { .. } = self.field {
            self.field = FieldSpec::complex_with_tol(tol)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Tuple length.
    pub fn d(&self) -> usize {
        match &self.mats {
            Mats::Complex(v) => v.len(),
            Mats::Prime(v) => v.len(),
        }
    }

    pub fn is_complex(&self) -> bool {
        self.field.is_complex()
    }

    pub fn complex_matrices(&self) -> Result<&[CMat]> {
        match &self.mats {
            Mats::Complex(v) => Ok(v),
            Mats::Prime(_) => Err(Error::Field(format!(
                "operation needs a complex tuple, got one over {}",
                self.field.label()
            ))),
        }
    }

    pub fn prime_matrices(&self) -> Result<&[FpMatrix]> {
        match &self.mats {
            Mats::Prime(v) => Ok(v),
            Mats::Complex(_) => Err(Error::Field(
                "operation needs a prime-field tuple, got a complex one".into(),
            )),
        }
    }

    pub fn matrix(&self, i: usize) -> Matrix {
        match &self.mats {
            Mats::Complex(v) => Matrix::Complex(v[i].clone()),
            Mats::Prime(v) => Matrix::Prime(v[i].clone()),
        }
    }

    pub fn matrices(&self) -> Vec<Matrix> {
        (0..self.d()).map(|i| self.matrix(i)).collect()
    }

    /// `(B, I_n)`: the tuple with an identity appended.
    pub fn with_identity_appended(&self) -> MatrixTuple {
        let mats = match &self.mats {
            Mats::Complex(v) => {
                let mut v = v.clone();
                v.push(CMat::identity(self.n, self.n));
                Mats::Complex(v)
            }
            Mats::Prime(v) => {
                let mut v = v.clone();
                let p = match self.field {
                    FieldSpec::Prime(p) => p,
                    _ => unreachable!(),
                };
                v.push(FpMatrix::identity(self.n, p));
                Mats::Prime(v)
            }
        };
        MatrixTuple {
            field: self.field,
            n: self.n,
            mats,
            metadata: TupleMetadata::default(),
            flags: OnceLock::new(),
        }
    }

    /// Structural flags at tolerance [`FLAG_TOL`], computed once. Prime-field
    /// tuples report both flags false.
    pub fn flags(&self) -> TupleFlags {
        *self.flags.get_or_init(|| {
            if !self.is_complex() {
                return TupleFlags {
                    doubly_stochastic: false,
                    unitary: false,
                };
            }
            let unitary = validate_unitary(self, FLAG_TOL).unwrap_or(false);
            let doubly_stochastic = unitary || validate_doubly_stochastic(self, FLAG_TOL).unwrap_or(false);
            TupleFlags {
                doubly_stochastic,
                unitary,
            }
        })
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.flags().doubly_stochastic
    }

    pub fn is_unitary(&self) -> bool {
        self.flags().unitary
    }

    /// Short hex digest of the field, size and entries.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.field.label().as_bytes());
        h.update((self.n as u64).to_le_bytes());
        match &self.mats {
            Mats::Complex(v) => {
                for m in v {
                    for z in m.iter() {
                        h.update(z.re.to_le_bytes());
                        h.update(z.im.to_le_bytes());
                    }
                }
            }
            Mats::Prime(v) => {
                for m in v {
                    for i in 0..m.rows() {
                        for x in m.row(i) {
                            h.update(x.to_le_bytes());
                        }
                    }
                }
            }
        }
        let out = h.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn check_square(shapes: impl Iterator<Item = (usize, usize)>) -> Result<usize> {
    let mut n = None;
    let mut count = 0;
    for (r, c) in shapes {
        count += 1;
        if r != c {
            return Err(Error::Shape(format!("matrix {count} is {r}x{c}, not square")));
        }
        match n {
            None => n = Some(r),
            Some(m) if m != r => {
                return Err(Error::Shape(format!("matrix sizes differ: {m} vs {r}")))
            }
            _ => {}
        }
    }
    match n {
        None => Err(Error::Shape("a tuple needs at least one matrix".into())),
        Some(0) => Err(Error::Shape("matrices must be at least 1x1".into())),
        Some(n) => Ok(n),
    }
}

/// True iff `sum B_i B_i^*` and `sum B_i^* B_i` are both within `tol` of
/// `d I_n` in the entrywise max norm.
pub fn validate_doubly_stochastic(b: &MatrixTuple, tol: f64) -> Result<bool> {
    let mats = b.complex_matrices()?;
    let n = b.n();
    let mut left = CMat::zeros(n, n);
    let mut right = CMat::zeros(n, n);
    for m in mats {
        left += m * m.adjoint();
        right += m.adjoint() * m;
    }
    let target = CMat::identity(n, n) * linalg::c(mats.len() as f64, 0.0);
    Ok(linalg::max_abs(&(left - &target)) <= tol && linalg::max_abs(&(right - &target)) <= tol)
}

/// True iff every `B_i^* B_i` is within `tol` of the identity.
pub fn validate_unitary(b: &MatrixTuple, tol: f64) -> Result<bool> {
    let mats = b.complex_matrices()?;
    let id = CMat::identity(b.n(), b.n());
    Ok(mats
        .iter()
        .all(|m| linalg::max_abs(&(m.adjoint() * m - &id)) <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn e(n: usize, i: usize, j: usize, s: f64) -> CMat {
        let mut m = CMat::zeros(n, n);
        m[(i, j)] = c(s, 0.0);
        m
    }

    fn perm(p: &[usize]) -> CMat {
        let n = p.len();
        let mut m = CMat::zeros(n, n);
        for (src, &dst) in p.iter().enumerate() {
            m[(dst, src)] = c(1.0, 0.0);
        }
        m
    }

    #[test]
    fn permutations_are_unitary_and_doubly_stochastic() {
        let t = MatrixTuple::complex(vec![perm(&[1, 2, 0]), perm(&[2, 0, 1]), perm(&[0, 2, 1])]).unwrap();
        assert!(validate_doubly_stochastic(&t, 1e-12).unwrap());
        assert!(validate_unitary(&t, 1e-12).unwrap());
        assert!(t.is_unitary() && t.is_doubly_stochastic());
    }

    #[test]
    fn k2_tuple_is_doubly_stochastic_not_unitary() {
        let s = 2f64.sqrt();
        let t = MatrixTuple::complex(vec![e(2, 0, 1, s), e(2, 1, 0, s)]).unwrap();
        assert!(validate_doubly_stochastic(&t, 1e-12).unwrap());
        assert!(!validate_unitary(&t, 1e-12).unwrap());
    }

    #[test]
    fn scaled_identity_fails() {
        let t = MatrixTuple::complex(vec![CMat::identity(2, 2), CMat::identity(2, 2) * c(2.0, 0.0)]).unwrap();
        assert!(!validate_doubly_stochastic(&t, 1e-9).unwrap());
        assert!(!t.is_doubly_stochastic());
    }

    #[test]
    fn prime_tuple_rejects_complex_validation() {
        let t = MatrixTuple::prime(vec![FpMatrix::identity(2, 2)], 2).unwrap();
        assert!(matches!(validate_unitary(&t, 1e-9), Err(Error::Field(_))));
        assert!(matches!(validate_doubly_stochastic(&t, 1e-9), Err(Error::Field(_))));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(MatrixTuple::complex(vec![]), Err(Error::Shape(_))));
        assert!(matches!(
            MatrixTuple::complex(vec![CMat::identity(2, 2), CMat::identity(3, 3)]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(MatrixTuple::complex(vec![CMat::zeros(2, 3)]), Err(Error::Shape(_))));
    }
}
