//! Dimension expansion `mu(B)` and dimension edge expansion `h_D(B)`.
//!
//! Both objectives are rank ratios, so every evaluation is an exact rational
//! (numerical rank over C, Gaussian elimination over a prime field). Over a
//! small prime field the minimum is found by listing every subspace; over C
//! it is bracketed by a search plus the spectral lower bound.

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::fp::FpMatrix;
use crate::graph::Rational;
use crate::linalg::{self, c, CMat};
use crate::matrix::{numerical_rank, Matrix};
use crate::par;
use crate::quantum::{self, ExpansionEstimate};
use crate::rng::{self, Rng};
use crate::subspace::{
    canonical_basis, coordinate_subset_count, coordinate_subsets, stack_images, RestrictionFrame,
    Subspace,
};
use crate::tuple::MatrixTuple;

/// Cap on the number of subspaces listed over a prime field.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Local-search restarts over C.
pub const DEFAULT_RESTARTS: usize = 50;

/// Denominator constant of the edge objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Graph degree for graphical tuples, tuple length otherwise.
    Auto,
    /// Tuple length `d`.
    Tuple,
    Fixed(usize),
}

impl Normalization {
    pub fn parse(text: &str) -> Result<Normalization> {
        match text {
            "auto" => Ok(Normalization::Auto),
            "tuple" => Ok(Normalization::Tuple),
            other => other
                .parse::<usize>()
                .map(Normalization::Fixed)
                .map_err(|_| Error::Config(format!("normalization must be auto, tuple or an integer, got '{other}'"))),
        }
    }

    pub fn resolve(self, b: &MatrixTuple) -> Result<usize> {
        let k = match self {
            Normalization::Auto => b
                .metadata
                .graphical
                .as_ref()
                .map_or(b.d(), |g| g.degree),
            Normalization::Tuple => b.d(),
            Normalization::Fixed(k) => k,
        };
        if k == 0 {
            return Err(Error::Config("normalization must be positive".into()));
        }
        Ok(k)
    }
}

fn check_dim(n: usize, r: usize) -> Result<()> {
    if r == 0 || 2 * r > n {
        return Err(Error::Dimension(format!(
            "expansion needs 1 <= dim V <= n/2, got dim {r} in n = {n}"
        )));
    }
    Ok(())
}

fn check_fields(b: &MatrixTuple, v: &Subspace) -> Result<()> {
    b.field().ensure_compatible(&v.field())?;
    if b.n() != v.ambient_n() {
        return Err(Error::Shape("tuple and subspace dimensions differ".into()));
    }
    Ok(())
}

/// `dim(V + B(V))`.
pub fn image_sum_dim(b: &MatrixTuple, v: &Subspace) -> Result<usize> {
    check_fields(b, v)?;
    if v.is_zero() {
        return Ok(0);
    }
    Ok(numerical_rank(&stack_images(b, v, true)?, b.field().rank_tol()))
}

/// `rank(B_i|_{V^perp,V})` for each `i`.
pub fn restriction_ranks(b: &MatrixTuple, v: &Subspace) -> Result<Vec<usize>> {
    check_fields(b, v)?;
    let frame = RestrictionFrame::new(v)?;
    let tol = b.field().rank_tol();
    b.matrices()
        .iter()
        .map(|m| Ok(frame.restrict(m)?.rank(tol)))
        .collect()
}

/// `(dim(V + B(V)) - dim V) / dim V`.
pub fn expansion_value(b: &MatrixTuple, v: &Subspace) -> Result<Rational> {
    check_fields(b, v)?;
    check_dim(b.n(), v.dim())?;
    let r = v.dim() as i64;
    Ok(Rational::new(image_sum_dim(b, v)? as i64 - r, r))
}

/// `sum_i rank(B_i|_{V^perp,V}) / (normalization * dim V)`.
pub fn edge_value(b: &MatrixTuple, v: &Subspace, normalization: usize) -> Result<Rational> {
    if normalization == 0 {
        return Err(Error::Config("normalization must be positive".into()));
    }
    check_fields(b, v)?;
    check_dim(b.n(), v.dim())?;
    let total: usize = restriction_ranks(b, v)?.iter().sum();
    Ok(Rational::new(total as i64, (normalization * v.dim()) as i64))
}

/// Number of subspaces of `F_p^n` with dimension in `1..=max_dim`.
pub fn subspace_count(n: usize, p: u64, max_dim: usize) -> u128 {
    let p = p as u128;
    let mut total: u128 = 0;
    for r in 1..=max_dim.min(n) {
        // Gaussian binomial [n choose r]_p
        let mut num: u128 = 1;
        let mut den: u128 = 1;
        for i in 0..r {
            num = num.saturating_mul(p.saturating_pow((n - i) as u32).saturating_sub(1));
            den = den.saturating_mul(p.saturating_pow((i + 1) as u32) - 1);
        }
        total = total.saturating_add(if num == u128::MAX { u128::MAX } else { num / den });
    }
    total
}

/// Pivot rows (0-based) of one reduced column echelon shape.
fn pivot_patterns(n: usize, max_dim: usize) -> Vec<Vec<usize>> {
    coordinate_subsets(n, max_dim)
}

/// Free entries of the basis with the given pivots: `(column, row)` with row
/// below the column's pivot and not itself a pivot row.
fn free_positions(n: usize, pivots: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (k, &pk) in pivots.iter().enumerate() {
        for row in pk + 1..n {
            if !pivots.contains(&row) {
                out.push((k, row));
            }
        }
    }
    out
}

/// All subspaces with a given pivot pattern, in odometer order.
fn pattern_subspaces(n: usize, p: u64, pivots: &[usize]) -> impl Iterator<Item = Subspace> + '_ {
    let free = free_positions(n, pivots);
    let total = (p as u128).pow(free.len() as u32);
    let field = FieldSpec::Prime(p);
    (0..total).map(move |mut code| {
        let mut m = FpMatrix::zeros(n, pivots.len(), p);
        for (k, &pk) in pivots.iter().enumerate() {
            m.set(pk, k, 1);
        }
        for &(k, row) in &free {
            m.set(row, k, (code % p as u128) as u64);
            code /= p as u128;
        }
        canonical_basis(&Matrix::Prime(m), field).expect("echelon basis has full rank")
    })
}

/// Every subspace of `F_p^n` of dimension `1..=max_dim`, each exactly once
/// and in canonical form, grouped by pivot pattern.
pub fn enumerate_subspaces(n: usize, p: u64, max_dim: usize) -> Result<Vec<Subspace>> {
    FieldSpec::prime(p)?;
    let count = subspace_count(n, p, max_dim);
    if count > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit(format!(
            "{count} subspaces exceed the enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    let patterns = pivot_patterns(n, max_dim);
    let groups = par::map_slice(&patterns, |piv| pattern_subspaces(n, p, piv).collect::<Vec<_>>());
    Ok(groups.into_iter().flatten().collect())
}

/// The whole subspace lattice of `F_p^n`, starting with `{0}`.
pub fn all_subspaces(n: usize, p: u64) -> Result<Vec<Subspace>> {
    let mut out = vec![Subspace::zero(n, FieldSpec::prime(p)?)];
    out.extend(enumerate_subspaces(n, p, n)?);
    Ok(out)
}

/// Exact minimum with a witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactSubspaceMin {
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub value: Rational,
    pub witness: Subspace,
    pub subspaces: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DimQuantity {
    Exact(ExactSubspaceMin),
    Estimate(ExpansionEstimate),
}

impl DimQuantity {
    /// Exact value, or the best value found when estimated.
    pub fn value(&self) -> f64 {
        match self {
            DimQuantity::Exact(e) => *e.value.numer() as f64 / *e.value.denom() as f64,
            DimQuantity::Estimate(e) => e.best_value,
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        match self {
            DimQuantity::Exact(e) => Some(e.value),
            DimQuantity::Estimate(e) => e.best_exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionReport {
    pub mu: DimQuantity,
    pub h_d: DimQuantity,
    pub normalization: usize,
    pub exact: bool,
}

/// Exact `mu(B)` and `h_D(B)` over a prime field by full enumeration.
pub fn exact_expansion_finite_field(b: &MatrixTuple, normalization: usize) -> Result<DimensionReport> {
    let p = match b.field() {
        FieldSpec::Prime(p) => p,
        FieldSpec::Complex { .. } => {
            return Err(Error::Field("exact enumeration needs a prime field".into()))
        }
    };
    if normalization == 0 {
        return Err(Error::Config("normalization must be positive".into()));
    }
    let n = b.n();
    let max_dim = n / 2;
    if max_dim == 0 {
        return Err(Error::Dimension("need n >= 2".into()));
    }
    let count = subspace_count(n, p, max_dim);
    if count > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit(format!(
            "{count} subspaces exceed the enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    type Best = Option<(Rational, Subspace)>;
    let keep = |best: &mut Best, val: Rational, v: &Subspace| {
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            *best = Some((val, v.clone()));
        }
    };
    let patterns = pivot_patterns(n, max_dim);
    let per_pattern = par::map_slice(&patterns, |piv| -> Result<(Best, Best, u64)> {
        let mut mu: Best = None;
        let mut hd: Best = None;
        let mut seen = 0;
        for v in pattern_subspaces(n, p, piv) {
            keep(&mut mu, expansion_value(b, &v)?, &v);
            keep(&mut hd, edge_value(b, &v, normalization)?, &v);
            seen += 1;
        }
        Ok((mu, hd, seen))
    });
    let mut mu: Best = None;
    let mut hd: Best = None;
    let mut total = 0;
    for res in per_pattern {
        let (m, h, seen) = res?;
        total += seen;
        if let Some((val, v)) = m {
            keep(&mut mu, val, &v);
        }
        if let Some((val, v)) = h {
            keep(&mut hd, val, &v);
        }
    }
    let wrap = |best: Best| {
        let (value, witness) = best.expect("at least one subspace");
        DimQuantity::Exact(ExactSubspaceMin {
            value,
            witness,
            subspaces: total,
        })
    };
    Ok(DimensionReport {
        mu: wrap(mu),
        h_d: wrap(hd),
        normalization,
        exact: true,
    })
}

/// `rank([T | B_1 T | ... | B_d T]) = min(n, (d + 1) r)` for `trials` Haar
/// subspaces of dimension `r`.
pub fn generic_expansion_check(b: &MatrixTuple, r: usize, trials: usize, seed: u64) -> Result<bool> {
    let mats = b.complex_matrices()?;
    let n = b.n();
    if r == 0 || r > n {
        return Err(Error::Dimension(format!("need 1 <= r <= n, got r = {r}")));
    }
    let want = n.min((b.d() + 1) * r);
    let tol = b.field().rank_tol();
    let ok = par::map_range(trials, |k| {
        let mut rng = rng::stream(seed, "generic-rank", &[r as u64, k as u64]);
        let t = linalg::haar_frame(n, r, &mut rng);
        linalg::numerical_rank(&stacked(mats, &t), tol) == want
    });
    Ok(ok.into_iter().all(|x| x))
}

fn stacked(mats: &[CMat], t: &CMat) -> CMat {
    let (n, r) = (t.nrows(), t.ncols());
    let mut out = CMat::zeros(n, r * (mats.len() + 1));
    out.columns_mut(0, r).copy_from(t);
    for (k, m) in mats.iter().enumerate() {
        out.columns_mut((k + 1) * r, r).copy_from(&(m * t));
    }
    out
}

/// Rank objective on an orthonormal frame: `(numerator, denominator)`.
type RankObjective<'a> = &'a (dyn Fn(&CMat) -> (i64, i64) + Sync);

fn ratio((a, b): (i64, i64)) -> Rational {
    Rational::new(a, b)
}

fn coordinate_frame(n: usize, idx: &[usize]) -> CMat {
    let mut t = CMat::zeros(n, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        t[(i, k)] = c(1.0, 0.0);
    }
    t
}

/// Replaces one column by a random line (a coordinate vector, a mix of two
/// coordinate vectors, or a Haar vector) and re-orthonormalizes.
fn swap_move(t: &CMat, rng: &mut Rng) -> Option<CMat> {
    let (n, r) = (t.nrows(), t.ncols());
    let k = rng.random_range(0..r);
    let mut v = CMat::zeros(n, 1);
    match rng.random_range(0..3) {
        0 => v[(rng.random_range(0..n), 0)] = c(1.0, 0.0),
        1 => {
            let g = linalg::gaussian_matrix(2, 1, rng);
            v[(rng.random_range(0..n), 0)] += g[(0, 0)];
            v[(rng.random_range(0..n), 0)] += g[(1, 0)];
        }
        _ => v = linalg::gaussian_matrix(n, 1, rng),
    }
    let mut cand = t.clone();
    cand.set_column(k, &v.column(0));
    if linalg::numerical_rank(&cand, 1e-8) < r {
        return None;
    }
    Some(linalg::orthonormalize_columns(&cand))
}

struct RankSearch<'a> {
    n: usize,
    dims: Vec<usize>,
    budget: u64,
    seed: u64,
    purpose: &'a str,
    restarts: usize,
}

/// Coordinate subspaces, seeded Haar subspaces per dimension, then
/// accept-if-improve swap moves from the best starts.
fn rank_search(plan: &RankSearch, obj: RankObjective) -> Result<(CMat, Rational, u64)> {
    if plan.budget == 0 {
        return Err(Error::Config("search budget must be positive".into()));
    }
    if plan.dims.is_empty() {
        return Err(Error::Dimension("no admissible subspace dimension".into()));
    }
    let n = plan.n;
    let max_dim = *plan.dims.iter().max().expect("nonempty");
    let mut evals: u64 = 0;
    let mut starts: Vec<(Rational, CMat)> = Vec::new();
    let push = |starts: &mut Vec<(Rational, CMat)>, val: Rational, t: CMat| {
        let pos = starts.iter().position(|(v, _)| val < *v).unwrap_or(starts.len());
        if pos < plan.restarts {
            starts.insert(pos, (val, t));
            starts.truncate(plan.restarts);
        }
    };

    let count = coordinate_subset_count(n, max_dim);
    if count <= quantum::COORDINATE_LIMIT && count <= plan.budget / 2 {
        let subsets: Vec<Vec<usize>> = coordinate_subsets(n, max_dim)
            .into_iter()
            .filter(|s| plan.dims.contains(&s.len()))
            .collect();
        let vals = par::map_slice(&subsets, |s| ratio(obj(&coordinate_frame(n, s))));
        evals += vals.len() as u64;
        for (s, v) in subsets.iter().zip(vals) {
            push(&mut starts, v, coordinate_frame(n, s));
        }
    }

    let remaining = plan.budget.saturating_sub(evals);
    let per_dim = (remaining / (4 * plan.dims.len() as u64)).clamp(1, 256) as usize;
    for &r in &plan.dims {
        let vals = par::map_range(per_dim, |k| {
            let mut rng = rng::stream(plan.seed, plan.purpose, &[r as u64, k as u64]);
            let t = linalg::haar_frame(n, r, &mut rng);
            (ratio(obj(&t)), t)
        });
        evals += vals.len() as u64;
        for (v, t) in vals {
            push(&mut starts, v, t);
        }
    }

    let share = (plan.budget.saturating_sub(evals) / starts.len().max(1) as u64).max(1);
    let refined = par::map_range(starts.len(), |k| {
        let (mut best, mut t) = starts[k].clone();
        let mut rng = rng::stream(plan.seed, plan.purpose, &[u64::MAX, k as u64]);
        let mut used = 0;
        while used < share && *best.numer() > 0 {
            used += 1;
            let Some(cand) = swap_move(&t, &mut rng) else { continue };
            let v = ratio(obj(&cand));
            if v < best {
                best = v;
                t = cand;
            }
        }
        (best, t, used)
    });
    let mut out: Option<(Rational, CMat)> = None;
    for (v, t, used) in refined {
        evals += used;
        if out.as_ref().is_none_or(|(b, _)| v < *b) {
            out = Some((v, t));
        }
    }
    let (v, t) = out.ok_or_else(|| Error::Internal("search produced no candidate".into()))?;
    Ok((t, v, evals))
}

fn complex_field(b: &MatrixTuple) -> Result<FieldSpec> {
    match b.field() {
        f @ FieldSpec::Complex { .. } => Ok(f),
        FieldSpec::Prime(_) => Err(Error::Field(
            "estimates are for complex tuples; use exact enumeration over a prime field".into(),
        )),
    }
}

fn dims_for(n: usize) -> Vec<usize> {
    (1..=n / 2).collect()
}

fn finish(
    b: &MatrixTuple,
    frame: CMat,
    lower_bound: Option<f64>,
    seed: u64,
    evaluations: u64,
    eval: impl Fn(&Subspace) -> Result<Rational>,
) -> Result<ExpansionEstimate> {
    let witness = Subspace::from_orthonormal_frame(frame, complex_field(b)?)?.canonicalized()?;
    let exact = eval(&witness)?;
    Ok(ExpansionEstimate {
        lower_bound,
        best_value: *exact.numer() as f64 / *exact.denom() as f64,
        best_exact: Some(exact),
        witness,
        dims_searched: dims_for(b.n()),
        evaluations,
        seed,
    })
}

fn spectral_gap(b: &MatrixTuple) -> Result<Option<f64>> {
    if !b.is_doubly_stochastic() || b.n() > quantum::SUPEROPERATOR_LIMIT {
        return Ok(None);
    }
    Ok(Some(quantum::quantum_expansion(b)?.gap))
}

/// Upper bound on `mu(B)` over C by search; lower bound `gap/(2d)`
/// (`gap/2` for unitary tuples) when doubly stochastic.
pub fn dimension_expansion_estimate(b: &MatrixTuple, budget: u64, seed: u64) -> Result<ExpansionEstimate> {
    complex_field(b)?;
    let mats = b.complex_matrices()?;
    let tol = b.field().rank_tol();
    let obj = |t: &CMat| {
        let r = t.ncols();
        (linalg::numerical_rank(&stacked(mats, t), tol) as i64 - r as i64, r as i64)
    };
    let plan = RankSearch {
        n: b.n(),
        dims: dims_for(b.n()),
        budget,
        seed,
        purpose: "dimension-mu",
        restarts: DEFAULT_RESTARTS,
    };
    let (frame, _, evals) = rank_search(&plan, &obj)?;
    let d = b.d() as f64;
    let lower = spectral_gap(b)?.map(|g| if b.is_unitary() { g / 2.0 } else { g / (2.0 * d) });
    finish(b, frame, lower, seed, evals, |v| expansion_value(b, v))
}

/// Upper bound on `h_D(B)` over C by search. When doubly stochastic the
/// lower bound is `gap/(2d)` (`gap/2` for unitary tuples), rescaled by
/// `d / normalization`.
pub fn dimension_edge_estimate(
    b: &MatrixTuple,
    budget: u64,
    seed: u64,
    normalization: usize,
) -> Result<ExpansionEstimate> {
    complex_field(b)?;
    if normalization == 0 {
        return Err(Error::Config("normalization must be positive".into()));
    }
    let mats = b.complex_matrices()?;
    let tol = b.field().rank_tol();
    let n = b.n();
    let obj = |t: &CMat| {
        let comp = CMat::identity(n, n) - t * t.adjoint();
        let total: usize = mats
            .iter()
            .map(|m| linalg::numerical_rank(&(&comp * (m * t)), tol))
            .sum();
        (total as i64, (normalization * t.ncols()) as i64)
    };
    let plan = RankSearch {
        n,
        dims: dims_for(n),
        budget,
        seed,
        purpose: "dimension-edge",
        restarts: DEFAULT_RESTARTS,
    };
    let (frame, _, evals) = rank_search(&plan, &obj)?;
    let d = b.d() as f64;
    let scale = d / normalization as f64;
    let lower = spectral_gap(b)?.map(|g| {
        let base = if b.is_unitary() { g / 2.0 } else { g / (2.0 * d) };
        base * scale
    });
    finish(b, frame, lower, seed, evals, |v| edge_value(b, v, normalization))
}

/// Estimates over C, exact values over a prime field.
pub fn dimension_report(
    b: &MatrixTuple,
    normalization: usize,
    budget: u64,
    seed: u64,
) -> Result<DimensionReport> {
    if !b.is_complex() {
        return exact_expansion_finite_field(b, normalization);
    }
    Ok(DimensionReport {
        mu: DimQuantity::Estimate(dimension_expansion_estimate(b, budget, seed)?),
        h_d: DimQuantity::Estimate(dimension_edge_estimate(b, budget, seed, normalization)?),
        normalization,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{graphical_tuple, haar_unitary_tuple, identity_tuple};
    use crate::graph::{graph_to_permutation_tuple, Graph};

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn k2_f2() -> MatrixTuple {
        graphical_tuple(&Graph::complete(2), FieldSpec::prime(2).unwrap(), false).unwrap()
    }

    #[test]
    fn values_over_f2() {
        let b = k2_f2();
        let e1 = Subspace::span_prime(&[vec![1, 0]], 2).unwrap();
        assert_eq!(expansion_value(&b, &e1).unwrap(), r(1, 1));
        assert_eq!(edge_value(&b, &e1, 1).unwrap(), r(1, 1));
        let diag = Subspace::span_prime(&[vec![1, 1]], 2).unwrap();
        assert_eq!(edge_value(&b, &diag, 1).unwrap(), r(2, 1));
        assert!(matches!(edge_value(&b, &e1, 0), Err(Error::Config(_))));
        let id = identity_tuple(4, 3).unwrap();
        let v = Subspace::coordinate(4, &[0, 2], FieldSpec::complex()).unwrap();
        assert_eq!(expansion_value(&id, &v).unwrap(), r(0, 1));
        assert_eq!(edge_value(&id, &v, 7).unwrap(), r(0, 1));
    }

    #[test]
    fn k2_over_c_with_degree_normalization() {
        let b = graphical_tuple(&Graph::complete(2), FieldSpec::complex(), true).unwrap();
        let e1 = Subspace::coordinate(2, &[0], FieldSpec::complex()).unwrap();
        assert_eq!(edge_value(&b, &e1, 2).unwrap(), r(1, 2));
        assert_eq!(Normalization::Auto.resolve(&b).unwrap(), 1);
        assert_eq!(Normalization::Tuple.resolve(&b).unwrap(), 2);
        assert!(Normalization::Fixed(0).resolve(&b).is_err());
        assert_eq!(Normalization::parse("5").unwrap(), Normalization::Fixed(5));
    }

    #[test]
    fn haar_generic_value() {
        let b = haar_unitary_tuple(8, 3, 2).unwrap();
        let mut rng = rng::stream(1, "test", &[]);
        let t = linalg::haar_frame(8, 2, &mut rng);
        let v = Subspace::from_orthonormal_frame(t, FieldSpec::complex()).unwrap();
        assert_eq!(expansion_value(&b, &v).unwrap(), r(3, 1));
        assert!(generic_expansion_check(&b, 2, 5, 0).unwrap());
        assert!(!generic_expansion_check(&identity_tuple(8, 3).unwrap(), 2, 3, 0).unwrap());
    }

    #[test]
    fn subspace_listing() {
        let lines = enumerate_subspaces(2, 2, 1).unwrap();
        assert_eq!(lines.len(), 3);
        assert_eq!(enumerate_subspaces(4, 2, 2).unwrap().len(), 50);
        assert_eq!(all_subspaces(4, 2).unwrap().len(), 67);
        assert_eq!(subspace_count(4, 2, 2), 50);
        assert_eq!(enumerate_subspaces(3, 3, 1).unwrap().len(), 13);
        assert_eq!(subspace_count(5, 2, 2), 186);
        let all = enumerate_subspaces(4, 3, 2).unwrap();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                assert!(!a.same_space(b, 0.0));
            }
        }
        assert!(matches!(enumerate_subspaces(30, 2, 15), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn exact_small_cases() {
        let rep = exact_expansion_finite_field(&k2_f2(), 1).unwrap();
        assert_eq!(rep.mu.exact().unwrap(), r(1, 1));
        assert_eq!(rep.h_d.exact().unwrap(), r(1, 1));
        let id = MatrixTuple::prime(vec![FpMatrix::identity(4, 2)], 2).unwrap();
        let rep = exact_expansion_finite_field(&id, 1).unwrap();
        assert_eq!(rep.mu.exact().unwrap(), r(0, 1));
        assert_eq!(rep.h_d.exact().unwrap(), r(0, 1));
    }

    #[test]
    fn permutation_tuple_coordinates() {
        let c4 = Graph::cycle(4);
        let b = graph_to_permutation_tuple(&c4, None).unwrap();
        let w = Subspace::coordinate(4, &[0, 1], FieldSpec::complex()).unwrap();
        assert_eq!(expansion_value(&b, &w).unwrap(), r(1, 1));
        assert_eq!(edge_value(&b, &w, 2).unwrap(), r(1, 2));
        let est = dimension_expansion_estimate(&b, 400, 1).unwrap();
        assert!(est.best_value <= 1.0);
        assert_eq!(expansion_value(&b, &est.witness).unwrap(), est.best_exact.unwrap());
    }

    #[test]
    fn estimates_bracket_haar() {
        let b = haar_unitary_tuple(8, 3, 4).unwrap();
        let mu = dimension_expansion_estimate(&b, 600, 3).unwrap();
        assert!(mu.lower_bound.unwrap() <= mu.best_value + 1e-9);
        let hd = dimension_edge_estimate(&b, 600, 3, 3).unwrap();
        assert!(hd.lower_bound.unwrap() <= hd.best_value + 1e-9);
        assert_eq!(edge_value(&b, &hd.witness, 3).unwrap(), hd.best_exact.unwrap());
        let id = identity_tuple(4, 2).unwrap();
        let e = dimension_expansion_estimate(&id, 100, 0).unwrap();
        assert_eq!(e.best_value, 0.0);
    }
}
