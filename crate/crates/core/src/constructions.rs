//! Tuple constructions: graphical, Haar, localized, identity, and fractional
//! powers of unitary tuples.

use std::f64::consts::PI;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::fp::FpMatrix;
use crate::graph::Graph;
use crate::linalg::{self, c, CMat, C64};
use crate::par;
use crate::rng::{self, Rng};
use crate::tuple::{GraphicalInfo, MatrixTuple, PowerInfo, TupleMetadata};

/// Branch label stored in power metadata.
pub const PRINCIPAL_BRANCH: &str = "principal (-pi, pi], -pi maps to +pi";

/// Maximum rejection attempts when sampling a localized unitary.
pub const LOCALIZED_MAX_ATTEMPTS: usize = 1000;

const UNITARY_TOL: f64 = 1e-9;

/// `(sqrt(n) E_ij : (i, j) adjacent)` over ordered pairs in lexicographic
/// order; without normalization the entries are plain `E_ij`.
pub fn graphical_tuple(g: &Graph, field: FieldSpec, normalized: bool) -> Result<MatrixTuple> {
    let d = g.degree()?;
    let n = g.n();
    let pairs = g.ordered_pairs();
    let tuple = match field {
        FieldSpec::Complex { .. } => {
            let scale = if normalized { (n as f64).sqrt() } else { 1.0 };
            let mats = pairs
                .iter()
                .map(|&(i, j)| {
                    let mut m = CMat::zeros(n, n);
                    m[(i, j)] = c(scale, 0.0);
                    m
                })
                .collect();
            MatrixTuple::complex_with_field(mats, field)?
        }
        FieldSpec::Prime(p) => {
            if normalized {
                return Err(Error::Field(
                    "the sqrt(n) normalization is only defined over C".into(),
                ));
            }
            let mats = pairs
                .iter()
                .map(|&(i, j)| {
                    let mut m = FpMatrix::zeros(n, n, p);
                    m.set(i, j, 1);
                    m
                })
                .collect();
            MatrixTuple::prime(mats, p)?
        }
    };
    Ok(tuple.with_metadata(TupleMetadata {
        construction: Some("graphical".into()),
        graphical: Some(GraphicalInfo {
            degree: d,
            normalized,
            pairs: pairs.iter().map(|&(i, j)| (i + 1, j + 1)).collect(),
        }),
        ..TupleMetadata::default()
    }))
}

/// `U = V diag(e^{i theta}) V^*` with principal eigenphases.
#[derive(Clone, Debug)]
pub struct HermitianLog {
    pub h: CMat,
    pub eigenphases: Vec<f64>,
    pub eigenvectors: CMat,
}

impl HermitianLog {
    /// `U^s = V diag(e^{i s theta}) V^*`.
    pub fn power(&self, s: f64) -> CMat {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, th) in self.eigenphases.iter().enumerate() {
            let ph = C64::from_polar(1.0, s * th);
            let col = scaled.column(j) * ph;
            scaled.set_column(j, &col);
        }
        scaled * v.adjoint()
    }

    /// `||H||_{S_infinity} = max |theta_j|`.
    pub fn operator_norm(&self) -> f64 {
        self.eigenphases.iter().fold(0.0, |m, t| m.max(t.abs()))
    }
}

fn check_unitary(u: &CMat) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::Shape("expected a square matrix".into()));
    }
    let n = u.nrows();
    let err = linalg::max_abs(&(u.adjoint() * u - CMat::identity(n, n)));
    if err > UNITARY_TOL {
        return Err(Error::Validation(format!(
            "matrix is not unitary (max |U*U - I| = {err:.3e})"
        )));
    }
    Ok(())
}

/// Principal-branch Hermitian logarithm via the complex Schur form, which is
/// diagonal up to rounding for a unitary input.
pub fn hermitian_log(u: &CMat) -> Result<HermitianLog> {
    check_unitary(u)?;
    let (q, t) = linalg::schur(u);
    let eigenphases: Vec<f64> = (0..u.nrows())
        .map(|j| {
            let th = t[(j, j)].arg();
            // eigenvalue -1 lands on either side of the cut; pin it to +pi
            if th <= -PI + 1e-9 {
                PI
            } else {
                th
            }
        })
        .collect();
    let mut scaled = q.clone();
    for (j, th) in eigenphases.iter().enumerate() {
        let col = scaled.column(j) * c(*th, 0.0);
        scaled.set_column(j, &col);
    }
    let h = scaled * q.adjoint();
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    Ok(HermitianLog {
        h,
        eigenphases,
        eigenvectors: q,
    })
}

/// `U^s := e^{i s H}` for the principal logarithm `H`.
pub fn fractional_power(u: &CMat, s: f64) -> Result<CMat> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Config(format!("power must be a finite s >= 0, got {s}")));
    }
    Ok(hermitian_log(u)?.power(s))
}

/// Hermitian logarithms of every matrix of a unitary tuple, computed once.
#[derive(Clone, Debug)]
pub struct TupleLog {
    logs: Vec<HermitianLog>,
    base: MatrixTuple,
}

impl TupleLog {
    pub fn new(u: &MatrixTuple) -> Result<TupleLog> {
        let mats = u.complex_matrices()?;
        let logs = par::map_slice(mats, hermitian_log)
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(TupleLog {
            logs,
            base: u.clone(),
        })
    }

    pub fn logs(&self) -> &[HermitianLog] {
        &self.logs
    }

    pub fn power(&self, s: f64) -> Result<MatrixTuple> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Config(format!("power must be a finite s >= 0, got {s}")));
        }
        let mats = self.logs.iter().map(|l| l.power(s)).collect();
        let mut metadata = self.base.metadata.clone();
        metadata.power = Some(PowerInfo {
            s,
            branch: PRINCIPAL_BRANCH.into(),
        });
        Ok(MatrixTuple::complex_with_field(mats, self.base.field())?.with_metadata(metadata))
    }
}

/// Elementwise `U_i^s`.
pub fn tuple_power(u: &MatrixTuple, s: f64) -> Result<MatrixTuple> {
    TupleLog::new(u)?.power(s)
}

/// `d` independent Haar unitaries, matrix `i` drawn from its own stream.
pub fn haar_unitary_tuple(n: usize, d: usize, seed: u64) -> Result<MatrixTuple> {
    if n == 0 || d == 0 {
        return Err(Error::Config("need n >= 1 and d >= 1".into()));
    }
    let mats = par::map_range(d, |i| {
        let mut rng = rng::stream(seed, "haar", &[i as u64]);
        linalg::haar_unitary(n, &mut rng)
    });
    Ok(MatrixTuple::complex(mats)?.with_metadata(TupleMetadata {
        construction: Some("haar".into()),
        seed: Some(seed),
        ..TupleMetadata::default()
    }))
}

pub fn identity_tuple(n: usize, d: usize) -> Result<MatrixTuple> {
    if n == 0 || d == 0 {
        return Err(Error::Config("need n >= 1 and d >= 1".into()));
    }
    Ok(MatrixTuple::complex(vec![CMat::identity(n, n); d])?.with_metadata(TupleMetadata {
        construction: Some("identity".into()),
        ..TupleMetadata::default()
    }))
}

/// Whether every column satisfies `|<m_j, e_j>| > 1 - eps`.
pub fn is_localized(m: &CMat, eps: f64) -> bool {
    (0..m.ncols()).all(|j| m[(j, j)].norm() > 1.0 - eps)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Orthonormalizes `I + gamma G` and rejects until the localization holds,
/// halving `gamma` after each rejection.
pub fn sample_localized_with_gamma(n: usize, eps: f64, gamma: f64, rng: &mut Rng) -> Result<CMat> {
    check_eps(eps)?;
    let mut gamma = gamma;
    for _ in 0..LOCALIZED_MAX_ATTEMPTS {
        let g = linalg::gaussian_matrix(n, n, rng);
        let m = linalg::orthonormalize_columns(&(CMat::identity(n, n) + g * c(gamma, 0.0)));
        if is_localized(&m, eps) {
            return Ok(m);
        }
        gamma *= 0.5;
    }
    Err(Error::Sampling(format!(
        "no localized unitary after {LOCALIZED_MAX_ATTEMPTS} attempts"
    )))
}

/// One unitary `M` with `|<m_j, e_j>| > 1 - eps` for every column.
pub fn sample_localized_unitary(n: usize, eps: f64, seed: u64) -> Result<CMat> {
    check_eps(eps)?;
    let mut rng = rng::stream(seed, "localized", &[]);
    sample_localized_with_gamma(n, eps, eps / 4.0, &mut rng)
}

/// A localized tuple with its factors `U_i = M_i D_i M_i^*`.
#[derive(Clone, Debug)]
pub struct LocalizedTuple {
    pub tuple: MatrixTuple,
    pub frames: Vec<CMat>,
    pub phases: Vec<Vec<f64>>,
}

pub fn localized_unitary_parts(n: usize, d: usize, eps: f64, seed: u64) -> Result<LocalizedTuple> {
    check_eps(eps)?;
    if n == 0 || d == 0 {
        return Err(Error::Config("need n >= 1 and d >= 1".into()));
    }
    let parts = par::map_range(d, |i| -> Result<(CMat, Vec<f64>, CMat)> {
        let mut rng = rng::stream(seed, "localized", &[i as u64]);
        let m = sample_localized_with_gamma(n, eps, eps / 4.0, &mut rng)?;
        let phases: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
        let mut md = m.clone();
        for (j, th) in phases.iter().enumerate() {
            let col = md.column(j) * C64::from_polar(1.0, *th);
            md.set_column(j, &col);
        }
        let u = md * m.adjoint();
        Ok((m, phases, u))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut frames = Vec::with_capacity(d);
    let mut phases = Vec::with_capacity(d);
    let mut mats = Vec::with_capacity(d);
    for (m, ph, u) in parts {
        frames.push(m);
        phases.push(ph);
        mats.push(u);
    }
    let tuple = MatrixTuple::complex(mats)?.with_metadata(TupleMetadata {
        construction: Some(format!("localized eps={eps}")),
        seed: Some(seed),
        ..TupleMetadata::default()
    });
    Ok(LocalizedTuple {
        tuple,
        frames,
        phases,
    })
}

pub fn localized_unitary_tuple(n: usize, d: usize, eps: f64, seed: u64) -> Result<MatrixTuple> {
    Ok(localized_unitary_parts(n, d, eps, seed)?.tuple)
}

/// `d` uniformly random `n x n` matrices over `F_p`; with `invertible` each
/// matrix is resampled until it has full rank.
pub fn random_prime_tuple(n: usize, d: usize, p: u64, invertible: bool, seed: u64) -> Result<MatrixTuple> {
    FieldSpec::prime(p)?;
    if n == 0 || d == 0 {
        return Err(Error::Config("need n >= 1 and d >= 1".into()));
    }
    let mats = (0..d)
        .map(|i| {
            let mut rng = rng::stream(seed, "prime-tuple", &[i as u64]);
            loop {
                let mut m = FpMatrix::zeros(n, n, p);
                for r in 0..n {
                    for col in 0..n {
                        m.set(r, col, rng.random_range(0..p));
                    }
                }
                if !invertible || m.rank() == n {
                    return m;
                }
            }
        })
        .collect();
    Ok(MatrixTuple::prime(mats, p)?.with_metadata(TupleMetadata {
        construction: Some(if invertible { "random-invertible" } else { "random" }.into()),
        seed: Some(seed),
        ..TupleMetadata::default()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuple::{validate_doubly_stochastic, validate_unitary};

    fn fro(m: &CMat) -> f64 {
        linalg::frobenius_sq(m).sqrt()
    }

    #[test]
    fn graphical_k2_and_c4() {
        let k2 = Graph::complete(2);
        let t = graphical_tuple(&k2, FieldSpec::complex(), true).unwrap();
        let m = t.complex_matrices().unwrap();
        let s = 2f64.sqrt();
        assert_eq!(m[0][(0, 1)], c(s, 0.0));
        assert_eq!(m[1][(1, 0)], c(s, 0.0));
        let f = graphical_tuple(&k2, FieldSpec::prime(2).unwrap(), false).unwrap();
        assert_eq!(f.prime_matrices().unwrap()[0].get(0, 1), 1);
        assert!(matches!(
            graphical_tuple(&k2, FieldSpec::prime(2).unwrap(), true),
            Err(Error::Field(_))
        ));
        let c4 = graphical_tuple(&Graph::cycle(4), FieldSpec::complex(), true).unwrap();
        assert_eq!(c4.d(), 8);
        assert!(validate_doubly_stochastic(&c4, 1e-12).unwrap());
        assert_eq!(c4.metadata.graphical.as_ref().unwrap().degree, 2);
    }

    #[test]
    fn logs_on_small_cases() {
        let l = hermitian_log(&CMat::identity(3, 3)).unwrap();
        assert!(linalg::max_abs(&l.h) < 1e-12);
        let l = hermitian_log(&CMat::from_element(1, 1, c(0.0, 1.0))).unwrap();
        assert!((l.eigenphases[0] - PI / 2.0).abs() < 1e-12);
        let minus = -CMat::identity(2, 2);
        let l = hermitian_log(&minus).unwrap();
        assert!(l.eigenphases.iter().all(|t| (t - PI).abs() < 1e-12));
        let half = l.power(0.5);
        assert!(linalg::max_abs(&(half - CMat::identity(2, 2) * c(0.0, 1.0))) < 1e-12);
        let q = fractional_power(&CMat::from_element(1, 1, C64::from_polar(1.0, PI / 2.0)), 0.5).unwrap();
        assert!((q[(0, 0)] - C64::from_polar(1.0, PI / 4.0)).norm() < 1e-12);
        assert!(matches!(
            hermitian_log(&(CMat::identity(2, 2) * c(2.0, 0.0))),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn permutation_with_minus_one_eigenvalue() {
        let mut p = CMat::zeros(2, 2);
        p[(0, 1)] = c(1.0, 0.0);
        p[(1, 0)] = c(1.0, 0.0);
        let l = hermitian_log(&p).unwrap();
        assert!(l.eigenphases.iter().all(|t| *t > -PI && *t <= PI));
        assert!(linalg::max_abs(&(l.power(1.0) - &p)) < 1e-9);
    }

    #[test]
    fn haar_powers() {
        let u = haar_unitary_tuple(6, 3, 5).unwrap();
        assert!(validate_unitary(&u, 1e-10).unwrap());
        assert_eq!(u, haar_unitary_tuple(6, 3, 5).unwrap());
        let logs = TupleLog::new(&u).unwrap();
        let one = logs.power(1.0).unwrap();
        for (a, b) in one.complex_matrices().unwrap().iter().zip(u.complex_matrices().unwrap()) {
            assert!(fro(&(a - b)) < 1e-9);
        }
        let small = logs.power(0.01).unwrap();
        for (m, l) in small.complex_matrices().unwrap().iter().zip(logs.logs()) {
            let dist = fro(&(CMat::identity(6, 6) - m));
            assert!(dist <= 0.01 * fro(&l.h) + 1e-12);
        }
        assert_eq!(small.metadata.power.as_ref().unwrap().branch, PRINCIPAL_BRANCH);
        let id = tuple_power(&identity_tuple(3, 2).unwrap(), 0.37).unwrap();
        for m in id.complex_matrices().unwrap() {
            assert!(linalg::max_abs(&(m - CMat::identity(3, 3))) < 1e-12);
        }
    }

    #[test]
    fn localized_sampling() {
        let m = sample_localized_unitary(4, 0.5, 1).unwrap();
        assert!(is_localized(&m, 0.5));
        assert!(matches!(sample_localized_unitary(4, 1.0, 1), Err(Error::Config(_))));
        let mut rng = rng::stream(0, "test", &[]);
        let m = sample_localized_with_gamma(3, 0.1, 0.0, &mut rng).unwrap();
        assert!(linalg::max_abs(&(m - CMat::identity(3, 3))) < 1e-15);

        let parts = localized_unitary_parts(16, 4, 0.01, 3).unwrap();
        assert!(validate_unitary(&parts.tuple, 1e-10).unwrap());
        for f in &parts.frames {
            assert!(is_localized(f, 0.01));
        }
        let logs = TupleLog::new(&parts.tuple).unwrap();
        for s in [0.1, 0.5, 1.0, 2.0, 10.0] {
            for u in logs.power(s).unwrap().complex_matrices().unwrap() {
                assert!(u[(0, 0)].norm() >= 1.0 - 4.0 * 0.01);
            }
        }
    }
}
