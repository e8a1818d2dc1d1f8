//! Subspaces in canonical form, annihilators, restrictions and images.
//!
//! Canonical forms:
//! * over a prime field, the basis is the reduced column echelon form (the
//!   transpose of the RREF of the spanning vectors stacked as rows);
//! * over C, the basis is obtained by pivoted Gram-Schmidt on the orthogonal
//!   projector onto the subspace, which depends only on the subspace.

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::fp::FpMatrix;
use crate::linalg::{self, CMat, C64};
use crate::matrix::{numerical_rank, Matrix};
use crate::tuple::MatrixTuple;

#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    field: FieldSpec,
    n: usize,
    basis: Matrix,
}

/// `B|_{V^perp, V} = R B T`, an `(n - r) x r` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    pub matrix: Matrix,
}

impl Restriction {
    pub fn rank(&self, tol: f64) -> usize {
        numerical_rank(&self.matrix, tol)
    }

    /// Singular values (complex restrictions only).
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        Ok(linalg::singular_values(self.matrix.as_complex()?))
    }
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient_n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn complex_basis(&self) -> Result<&CMat> {
        self.basis.as_complex()
    }

    pub fn prime_basis(&self) -> Result<&FpMatrix> {
        self.basis.as_prime()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn zero(n: usize, field: FieldSpec) -> Subspace {
        let basis = match field {
            FieldSpec::Complex { .. } => Matrix::Complex(CMat::zeros(n, 0)),
            FieldSpec::Prime(p) => Matrix::Prime(FpMatrix::zeros(n, 0, p)),
        };
        Subspace { field, n, basis }
    }

    /// Span of the standard basis vectors with the given 0-based indices.
    pub fn coordinate(n: usize, indices: &[usize], field: FieldSpec) -> Result<Subspace> {
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.iter().any(|&i| i >= n) {
            return Err(Error::Shape(format!("coordinate index out of range for n = {n}")));
        }
        if idx.is_empty() {
            return Err(Error::ZeroSubspace);
        }
        let basis = match field {
            FieldSpec::Complex { .. } => {
                let mut m = CMat::zeros(n, idx.len());
                for (k, &i) in idx.iter().enumerate() {
                    m[(i, k)] = linalg::c(1.0, 0.0);
                }
                Matrix::Complex(m)
            }
            FieldSpec::Prime(p) => {
                let mut m = FpMatrix::zeros(n, idx.len(), p);
                for (k, &i) in idx.iter().enumerate() {
                    m.set(i, k, 1);
                }
                Matrix::Prime(m)
            }
        };
        // coordinate bases are already canonical in both conventions
        Ok(Subspace { field, n, basis })
    }

    pub fn span_complex(vectors: &[Vec<C64>], field: FieldSpec) -> Result<Subspace> {
        let n = common_len(vectors.iter().map(|v| v.len()))?;
        let m = CMat::from_fn(n, vectors.len(), |i, j| vectors[j][i]);
        canonical_basis(&Matrix::Complex(m), field)
    }

    pub fn span_prime(vectors: &[Vec<i64>], p: u64) -> Result<Subspace> {
        let field = FieldSpec::prime(p)?;
        let n = common_len(vectors.iter().map(|v| v.len()))?;
        let rows: Vec<Vec<i64>> = vectors.to_vec();
        let m = FpMatrix::from_rows(&rows, p)?.transpose();
        debug_assert_eq!(m.rows(), n);
        canonical_basis(&Matrix::Prime(m), field)
    }

    /// Wraps an orthonormal frame without canonicalizing it. Evaluators only
    /// use basis-invariant quantities, so search loops can skip the
    /// canonicalization cost; call [`Subspace::canonicalized`] before
    /// reporting.
    pub fn from_orthonormal_frame(frame: CMat, field: FieldSpec) -> Result<Subspace> {
        if !field.is_complex() {
            return Err(Error::Field("orthonormal frames are complex".into()));
        }
        Ok(Subspace {
            field,
            n: frame.nrows(),
            basis: Matrix::Complex(frame),
        })
    }

    pub fn canonicalized(&self) -> Result<Subspace> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        canonical_basis(&self.basis, self.field)
    }

    /// Orthogonal projector onto the subspace (complex only).
    pub fn projector(&self) -> Result<CMat> {
        let t = self.complex_basis()?;
        Ok(t * t.adjoint())
    }

    /// Subspace equality: exact over a prime field, projector distance below
    /// `tol` over C.
    pub fn same_space(&self, other: &Subspace, tol: f64) -> bool {
        if self.n != other.n || self.dim() != other.dim() || !self.field.compatible(&other.field) {
            return false;
        }
        match (&self.basis, &other.basis) {
            (Matrix::Prime(_), Matrix::Prime(_)) => {
                match (self.canonicalized(), other.canonicalized()) {
                    (Ok(a), Ok(b)) => a.basis == b.basis,
                    _ => false,
                }
            }
            (Matrix::Complex(_), Matrix::Complex(_)) => {
                let pa = self.projector().expect("complex");
                let pb = other.projector().expect("complex");
                linalg::max_abs(&(pa - pb)) <= tol
            }
            _ => false,
        }
    }

    /// Sum `V + W`.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.field.ensure_compatible(&other.field)?;
        if self.n != other.n {
            return Err(Error::Shape("ambient dimensions differ".into()));
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let stacked = match (&self.basis, &other.basis) {
            (Matrix::Complex(a), Matrix::Complex(b)) => {
                let mut m = CMat::zeros(self.n, a.ncols() + b.ncols());
                m.columns_mut(0, a.ncols()).copy_from(a);
                m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
                Matrix::Complex(m)
            }
            (Matrix::Prime(a), Matrix::Prime(b)) => Matrix::Prime(FpMatrix::hcat(&[a, b])?),
            _ => return Err(Error::Field("field mismatch".into())),
        };
        canonical_basis(&stacked, self.field)
    }

    /// Returns the (0-based) indices where some vector of the subspace is
    /// nonzero.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| match &self.basis {
                Matrix::Complex(m) => m.row(i).iter().any(|z| z.norm() > tol),
                Matrix::Prime(m) => (0..m.cols()).any(|j| m.get(i, j) != 0),
            })
            .collect()
    }
}

fn common_len(lens: impl Iterator<Item = usize>) -> Result<usize> {
    let mut n = None;
    for l in lens {
        match n {
            None => n = Some(l),
            Some(m) if m != l => {
                return Err(Error::Shape(format!("vectors of lengths {m} and {l}")))
            }
            _ => {}
        }
    }
    n.ok_or_else(|| Error::Shape("no vectors given".into()))
}

/// Canonical subspace spanned by the columns of `vectors` (an `n x k` matrix).
pub fn canonical_basis(vectors: &Matrix, field: FieldSpec) -> Result<Subspace> {
    let n = vectors.rows();
    if vectors.cols() == 0 {
        return Err(Error::Shape("no vectors given".into()));
    }
    match (vectors, field) {
        (Matrix::Complex(m), FieldSpec::Complex { rank_tol }) => {
            let r = linalg::numerical_rank(m, rank_tol);
            if r == 0 {
                return Err(Error::ZeroSubspace);
            }
            let u = linalg::leading_left_singular_vectors(m, r);
            let proj = &u * u.adjoint();
            let basis = linalg::pivoted_range_basis(&proj, r);
            Ok(Subspace {
                field,
                n,
                basis: Matrix::Complex(basis),
            })
        }
        (Matrix::Prime(m), FieldSpec::Prime(p)) if m.modulus() == p => {
            let mut rows = m.transpose();
            let pivots = rows.rref_in_place();
            let r = pivots.len();
            if r == 0 {
                return Err(Error::ZeroSubspace);
            }
            let mut basis = FpMatrix::zeros(n, r, p);
            for k in 0..r {
                for i in 0..n {
                    basis.set(i, k, rows.get(k, i));
                }
            }
            Ok(Subspace {
                field,
                n,
                basis: Matrix::Prime(basis),
            })
        }
        _ => Err(Error::Field(format!(
            "vectors do not live over {}",
            field.label()
        ))),
    }
}

/// `V^perp`: the Hermitian orthogonal complement over C, the annihilator
/// `{u : u^t v = 0}` over a prime field. Returns the zero subspace when
/// `V` is the whole space.
pub fn annihilator(v: &Subspace) -> Result<Subspace> {
    let n = v.n;
    let r = v.dim();
    if r == n {
        return Ok(Subspace::zero(n, v.field));
    }
    match &v.basis {
        Matrix::Complex(t) => {
            let comp = CMat::identity(n, n) - t * t.adjoint();
            let basis = linalg::pivoted_range_basis(&comp, n - r);
            Ok(Subspace {
                field: v.field,
                n,
                basis: Matrix::Complex(basis),
            })
        }
        Matrix::Prime(t) => {
            let p = t.modulus();
            if r == 0 {
                return Ok(Subspace {
                    field: v.field,
                    n,
                    basis: Matrix::Prime(FpMatrix::identity(n, p)),
                });
            }
            let ns = t.transpose().null_space();
            let m = FpMatrix::from_columns(&ns, n, p);
            canonical_basis(&Matrix::Prime(m), v.field)
        }
    }
}

/// Precomputed `T` and `R` for one subspace, reused across many matrices.
pub struct RestrictionFrame {
    kind: FrameKind,
}

enum FrameKind {
    Complex { t: CMat, r_adj: CMat },
    Prime { t: FpMatrix, r: FpMatrix },
}

impl RestrictionFrame {
    pub fn new(v: &Subspace) -> Result<Self> {
        let r = v.dim();
        if r == 0 || r >= v.n {
            return Err(Error::Dimension(format!(
                "restriction needs 1 <= dim V <= n - 1, got dim {r} in n = {}",
                v.n
            )));
        }
        let w = annihilator(v)?;
        let kind = match (&v.basis, &w.basis) {
            (Matrix::Complex(t), Matrix::Complex(tp)) => FrameKind::Complex {
                t: t.clone(),
                r_adj: tp.adjoint(),
            },
            (Matrix::Prime(t), Matrix::Prime(tp)) => FrameKind::Prime {
                t: t.clone(),
                r: tp.transpose(),
            },
            _ => unreachable!("annihilator preserves the field"),
        };
        Ok(RestrictionFrame { kind })
    }

    pub fn restrict(&self, b: &Matrix) -> Result<Restriction> {
        let matrix = match (&self.kind, b) {
            (FrameKind::Complex { t, r_adj }, Matrix::Complex(m)) => {
                check_dims(m.nrows(), t.nrows())?;
                Matrix::Complex(r_adj * m * t)
            }
            (FrameKind::Prime { t, r }, Matrix::Prime(m)) => {
                check_dims(m.rows(), t.rows())?;
                if m.modulus() != t.modulus() {
                    return Err(Error::Field("different prime fields".into()));
                }
                Matrix::Prime(r.mul(m)?.mul(t)?)
            }
            _ => return Err(Error::Field("matrix and subspace fields differ".into())),
        };
        Ok(Restriction { matrix })
    }

    pub fn restrict_complex(&self, b: &CMat) -> Result<CMat> {
        match &self.kind {
            FrameKind::Complex { t, r_adj } => Ok(r_adj * b * t),
            FrameKind::Prime { .. } => Err(Error::Field("frame is over a prime field".into())),
        }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("matrix size {a} vs ambient {b}")));
    }
    Ok(())
}

/// `B|_{V^perp, V} := R B T` with `T` the canonical basis of `V` and `R`
/// the (adjoint/transposed) canonical basis of `annihilator(V)`.
pub fn restrict(b: &Matrix, v: &Subspace) -> Result<Restriction> {
    if !b.field().compatible(&v.field) {
        return Err(Error::Field(format!(
            "matrix over {} restricted to subspace over {}",
            b.field().label(),
            v.field.label()
        )));
    }
    RestrictionFrame::new(v)?.restrict(b)
}

/// `B(V) = span of B_i v over all i and v in V`.
pub fn subspace_image(b: &MatrixTuple, v: &Subspace) -> Result<Subspace> {
    b.field().ensure_compatible(&v.field)?;
    if b.n() != v.n {
        return Err(Error::Shape("tuple and subspace dimensions differ".into()));
    }
    let field = v.field;
    if v.is_zero() {
        return Ok(Subspace::zero(v.n, field));
    }
    let stacked = stack_images(b, v, false)?;
    match canonical_basis(&stacked, field) {
        Err(Error::ZeroSubspace) => Ok(Subspace::zero(v.n, field)),
        other => other,
    }
}

/// `[T | B_1 T | ... | B_d T]` (or just the `B_i T` blocks when
/// `include_t` is false).
pub fn stack_images(b: &MatrixTuple, v: &Subspace, include_t: bool) -> Result<Matrix> {
    let r = v.dim();
    let blocks = b.d() + usize::from(include_t);
    match &v.basis {
        Matrix::Complex(t) => {
            let mats = b.complex_matrices()?;
            let mut out = CMat::zeros(v.n, r * blocks);
            let mut off = 0;
            if include_t {
                out.columns_mut(0, r).copy_from(t);
                off = r;
            }
            for m in mats {
                out.columns_mut(off, r).copy_from(&(m * t));
                off += r;
            }
            Ok(Matrix::Complex(out))
        }
        Matrix::Prime(t) => {
            let mats = b.prime_matrices()?;
            let mut parts: Vec<FpMatrix> = Vec::with_capacity(blocks);
            if include_t {
                parts.push(t.clone());
            }
            for m in mats {
                parts.push(m.mul(t)?);
            }
            let refs: Vec<&FpMatrix> = parts.iter().collect();
            Ok(Matrix::Prime(FpMatrix::hcat(&refs)?))
        }
    }
}

/// Index sets of all coordinate subspaces with `1 <= |S| <= max_dim`,
/// ordered by size and then lexicographically (0-based indices).
pub fn coordinate_subsets(n: usize, max_dim: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for r in 1..=max_dim.min(n) {
        let mut idx: Vec<usize> = (0..r).collect();
        loop {
            out.push(idx.clone());
            // advance to the next r-combination
            let Some(k) = (0..r).rev().find(|&k| idx[k] < n - r + k) else {
                break;
            };
            idx[k] += 1;
            for j in k + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// `sum_{r=1}^{max_dim} C(n, r)`, saturating.
pub fn coordinate_subset_count(n: usize, max_dim: usize) -> u64 {
    let mut total: u64 = 0;
    let mut binom: u64 = 1;
    for r in 1..=max_dim.min(n) {
        binom = binom.saturating_mul((n - r + 1) as u64) / r as u64;
        total = total.saturating_add(binom);
    }
    total
}
