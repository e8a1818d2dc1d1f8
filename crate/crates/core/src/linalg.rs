//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::rng::Rng;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `tol * sigma_max`.
pub fn numerical_rank(m: &CMat, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None | Some(0.0) => 0,
        Some(&smax) => s.iter().filter(|&&x| x > tol * smax).count(),
    }
}

/// Left singular vectors for the `r` largest singular values.
pub fn leading_left_singular_vectors(m: &CMat, r: usize) -> CMat {
    let n = m.nrows();
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut out = CMat::zeros(n, r);
    for (k, &j) in order.iter().take(r).enumerate() {
        out.set_column(k, &u.column(j));
    }
    out
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of the column space of a projector, selected by
/// Gram-Schmidt with column pivoting. The output depends only on the
/// projector, so it serves as a canonical basis of its range.
pub fn pivoted_range_basis(proj: &CMat, r: usize) -> CMat {
    let n = proj.nrows();
    let mut residual = proj.clone();
    let mut q = CMat::zeros(n, r);
    let mut used = vec![false; n];
    for k in 0..r {
        let norms: Vec<f64> = (0..n)
            .map(|j| {
                if used[j] {
                    -1.0
                } else {
                    residual.column(j).norm_squared()
                }
            })
            .collect();
        let best = norms.iter().copied().fold(f64::MIN, f64::max);
        // first column within relative slack of the best: stable under rounding
        let piv = (0..n)
            .find(|&j| !used[j] && norms[j] >= best * (1.0 - 1e-9))
            .expect("rank exceeds available columns");
        used[piv] = true;
        let mut v: DVector<C64> = residual.column(piv).into_owned();
        let nv = v.norm();
        v /= C64::from(nv);
        // fix the phase so the pivot-row entry is real and positive
        let ph = v[piv];
        if ph.norm() > 0.0 {
            let rot = ph.conj() / ph.norm();
            v *= rot;
        }
        q.set_column(k, &v);
        // remove the new direction from every remaining column
        let coeffs = v.adjoint() * &residual;
        residual -= &v * coeffs;
    }
    // one re-orthonormalization pass against accumulated rounding
    reorthonormalize(&mut q);
    q
}

/// Modified Gram-Schmidt in place; keeps the phase of each column's largest
/// component unchanged in spirit (no pivoting).
pub fn reorthonormalize(q: &mut CMat) {
    let r = q.ncols();
    for k in 0..r {
        for j in 0..k {
            let qj = q.column(j).into_owned();
            let proj = qj.dotc(&q.column(k));
            let newcol = q.column(k) - qj * proj;
            q.set_column(k, &newcol);
        }
        let nk = q.column(k).norm();
        if nk > 0.0 {
            let col = q.column(k) / C64::from(nk);
            q.set_column(k, &col);
        }
    }
}

/// Thin QR orthonormalization of the columns of `m` (assumed full column
/// rank), with the diagonal of R made real positive.
pub fn orthonormalize_columns(m: &CMat) -> CMat {
    let qr = m.clone().qr();
    let (q, r) = qr.unpack();
    let mut q = q.columns(0, m.ncols()).into_owned();
    for k in 0..m.ncols() {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            let col = q.column(k) * ph;
            q.set_column(k, &col);
        }
    }
    q
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix.
pub fn haar_unitary(n: usize, rng: &mut Rng) -> CMat {
    orthonormalize_columns(&gaussian_matrix(n, n, rng))
}

/// Haar-random n x r isometry (orthonormal frame of a uniform r-dim subspace).
pub fn haar_frame(n: usize, r: usize, rng: &mut Rng) -> CMat {
    orthonormalize_columns(&gaussian_matrix(n, r, rng))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec_col(x: &CMat) -> DVector<C64> {
    DVector::from_iterator(x.len(), x.iter().copied())
}

pub fn unvec_col(v: &DVector<C64>, n: usize) -> CMat {
    CMat::from_iterator(n, n, v.iter().copied())
}

/// Complex Schur factorization `m = q t q*`.
pub fn schur(m: &CMat) -> (CMat, CMat) {
    // The unbounded QR iteration can stall on highly degenerate spectra.
    // A shift by a multiple of I keeps the Schur vectors and usually breaks
    // the stall.
    let n = m.nrows();
    let scale = max_abs(m).max(1.0);
    for k in 0..8u32 {
        let sigma = c(0.1 * scale * f64::from(k), 0.05 * scale * f64::from(k));
        let shifted = m + CMat::identity(n, n) * sigma;
        if let Some(s) = nalgebra::Schur::try_new(shifted, f64::EPSILON, 10_000) {
            let (q, mut t) = s.unpack();
            for i in 0..n {
                t[(i, i)] -= sigma;
            }
            return (q, t);
        }
    }
    panic!("complex Schur decomposition did not converge")
}
