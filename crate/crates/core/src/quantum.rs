//! Quantum expansion of doubly stochastic tuples.
//!
//! `Phi(X) = (1/d) sum B_i X B_i^*` is represented on column-stacked
//! vectors by `M = (1/d) sum conj(B_i) (x) B_i`. Quantum edge expansion is a
//! minimum over subspaces, so it is reported as a bracket: a lower bound from
//! the spectral gap and the best value found by an explicit search.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::graph::Rational;
use crate::linalg::{self, c, CMat, C64};
use crate::par;
use crate::rng::{self, Rng};
use crate::subspace::{coordinate_subset_count, coordinate_subsets, RestrictionFrame, Subspace};
use crate::tuple::MatrixTuple;

/// Largest `n` for which the dense `n^2 x n^2` superoperator is built.
pub const SUPEROPERATOR_LIMIT: usize = 48;

/// Coordinate subspaces are searched exhaustively up to this many.
pub const COORDINATE_LIMIT: u64 = 1 << 20;

/// Number of best starting frames handed to local refinement.
pub const REFINE_STARTS: usize = 4;

const MAX_REFINE_STEPS: usize = 500;
const REL_IMPROVEMENT_STOP: f64 = 1e-10;
const INITIAL_STEP: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct Superoperator {
    pub n: usize,
    /// `n^2 x n^2`, acting on column-stacked `vec(X)`.
    pub matrix: CMat,
    /// Whether the source tuple passed the doubly stochastic check.
    pub doubly_stochastic: bool,
}

impl Superoperator {
    pub fn apply(&self, x: &CMat) -> CMat {
        linalg::unvec_col(&(&self.matrix * linalg::vec_col(x)), self.n)
    }
}

fn complex_mats(b: &MatrixTuple) -> Result<&[CMat]> {
    b.complex_matrices()
        .map_err(|_| Error::Field("quantum notions need a complex tuple".into()))
}

/// `Phi_B(X)` computed directly from the tuple.
pub fn apply_phi(b: &MatrixTuple, x: &CMat) -> Result<CMat> {
    let mats = complex_mats(b)?;
    let mut out = CMat::zeros(b.n(), b.n());
    for m in mats {
        out += m * x * m.adjoint();
    }
    Ok(out / c(b.d() as f64, 0.0))
}

pub fn superoperator_matrix(b: &MatrixTuple) -> Result<Superoperator> {
    let mats = complex_mats(b)?;
    let n = b.n();
    if n > SUPEROPERATOR_LIMIT {
        return Err(Error::SizeLimit(format!(
            "superoperator limited to n <= {SUPEROPERATOR_LIMIT}, got n = {n}"
        )));
    }
    let mut m = CMat::zeros(n * n, n * n);
    for bi in mats {
        m += linalg::kron(&bi.map(|z| z.conj()), bi);
    }
    m /= c(b.d() as f64, 0.0);
    Ok(Superoperator {
        n,
        matrix: m,
        doubly_stochastic: b.is_doubly_stochastic(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumExpansionReport {
    /// `1 - ||Phi restricted to traceless matrices||_op`.
    pub gap: f64,
    /// Second-smallest singular value of `I - Phi`.
    pub lambda2_sv: f64,
    /// Singular values of `I - Phi`, ascending.
    pub spectrum: Vec<f64>,
    /// `||u^* M Q||` with `u = vec(I)/sqrt(n)`; zero when traceless matrices
    /// are invariant.
    pub invariance_residual: f64,
}

pub fn quantum_expansion(b: &MatrixTuple) -> Result<QuantumExpansionReport> {
    let sup = superoperator_matrix(b)?;
    if !sup.doubly_stochastic {
        return Err(Error::Validation(
            "quantum expansion needs a doubly stochastic tuple".into(),
        ));
    }
    Ok(expansion_from_superoperator(&sup))
}

fn expansion_from_superoperator(sup: &Superoperator) -> QuantumExpansionReport {
    let n = sup.n;
    let nn = n * n;
    let m = &sup.matrix;
    let u = linalg::vec_col(&CMat::identity(n, n)) / c((n as f64).sqrt(), 0.0);
    // M Q with Q = I - u u^*
    let mu = m * &u;
    let mq = m - &mu * u.adjoint();
    let s = linalg::singular_values(&mq);
    let gap = 1.0 - s.first().copied().unwrap_or(0.0);
    let residual = (u.adjoint() * &mq).norm();

    let lap = CMat::identity(nn, nn) - m;
    let mut spectrum = linalg::singular_values(&lap);
    spectrum.reverse();
    let lambda2_sv = spectrum.get(1).copied().unwrap_or(0.0);
    QuantumExpansionReport {
        gap,
        lambda2_sv,
        spectrum,
        invariance_residual: residual,
    }
}

fn check_edge_dim(n: usize, r: usize) -> Result<()> {
    if r == 0 || 2 * r > n {
        return Err(Error::Dimension(format!(
            "edge expansion needs 1 <= dim V <= n/2, got dim {r} in n = {n}"
        )));
    }
    Ok(())
}

/// `(1/(d r)) sum_i (||B_i T||^2 - ||T^* B_i T||^2)` for an orthonormal
/// frame `T`; equals the edge objective of its span.
pub fn edge_objective_frame(mats: &[CMat], t: &CMat) -> f64 {
    let r = t.ncols() as f64;
    let mut acc = 0.0;
    for b in mats {
        let bt = b * t;
        let k = t.adjoint() * &bt;
        acc += linalg::frobenius_sq(&bt) - linalg::frobenius_sq(&k);
    }
    acc / (mats.len() as f64 * r)
}

/// Euclidean gradient of [`edge_objective_frame`] in the conjugate of `T`.
pub fn edge_gradient_frame(mats: &[CMat], t: &CMat) -> CMat {
    let r = t.ncols() as f64;
    let mut g = CMat::zeros(t.nrows(), t.ncols());
    for b in mats {
        let bt = b * t;
        let bst = b.adjoint() * t;
        let k = t.adjoint() * &bt;
        g += b.adjoint() * &bt - &bt * k.adjoint() - &bst * &k;
    }
    g / c(mats.len() as f64 * r, 0.0)
}

/// `<I - P_V, Phi(P_V)> / dim V`.
pub fn quantum_edge_value(b: &MatrixTuple, v: &Subspace) -> Result<f64> {
    let value = projector_form(b, v)?;
    debug_assert!(
        (value - restriction_form(complex_mats(b)?, v)?).abs() <= 1e-9 * b.n() as f64,
        "projector and restriction forms disagree"
    );
    Ok(value)
}

/// The edge objective computed literally from `P_V` and `Phi`.
pub fn projector_form(b: &MatrixTuple, v: &Subspace) -> Result<f64> {
    complex_mats(b)?;
    b.field().ensure_compatible(&v.field())?;
    check_edge_dim(b.n(), v.dim())?;
    let p = v.projector()?;
    let phi = apply_phi(b, &p)?;
    let comp = CMat::identity(b.n(), b.n()) - &p;
    Ok((comp.adjoint() * phi).trace().re / v.dim() as f64)
}

/// `(1/(d dim V)) sum_i ||B_i|_{V^perp,V}||_{S_2}^2`.
pub fn restriction_form(mats: &[CMat], v: &Subspace) -> Result<f64> {
    let frame = RestrictionFrame::new(v)?;
    let mut acc = 0.0;
    for m in mats {
        acc += linalg::frobenius_sq(&frame.restrict_complex(m)?);
    }
    Ok(acc / (mats.len() as f64 * v.dim() as f64))
}

/// `sum_i ||B_i|_{V^perp,V}||_{S_p}^p / (d dim V)`.
pub fn schatten_edge_value(b: &MatrixTuple, v: &Subspace, p: f64) -> Result<f64> {
    check_p(p)?;
    let mats = complex_mats(b)?;
    b.field().ensure_compatible(&v.field())?;
    check_edge_dim(b.n(), v.dim())?;
    let frame = RestrictionFrame::new(v)?;
    let mut acc = 0.0;
    for m in mats {
        acc += linalg::singular_values(&frame.restrict_complex(m)?)
            .iter()
            .map(|s| s.powf(p))
            .sum::<f64>();
    }
    Ok(acc / (mats.len() as f64 * v.dim() as f64))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Config(format!("Schatten exponent must be >= 1, got {p}")));
    }
    Ok(())
}

/// Same as [`schatten_edge_value`] on an orthonormal frame, using
/// `(I - T T^*) B_i T`, which has the singular values of the restriction.
fn schatten_objective_frame(mats: &[CMat], t: &CMat, p: f64) -> f64 {
    let proj = t * t.adjoint();
    let comp = CMat::identity(t.nrows(), t.nrows()) - proj;
    let mut acc = 0.0;
    for b in mats {
        acc += linalg::singular_values(&(&comp * (b * t)))
            .iter()
            .map(|s| s.powf(p))
            .sum::<f64>();
    }
    acc / (mats.len() as f64 * t.ncols() as f64)
}

/// Bracket `[lower_bound, best_value]` for a minimized expansion quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionEstimate {
    pub lower_bound: Option<f64>,
    pub best_value: f64,
    /// The best value as an exact rational when the objective is a rank ratio.
    #[serde(serialize_with = "crate::report::ser_opt_rational")]
    pub best_exact: Option<Rational>,
    pub witness: Subspace,
    pub dims_searched: Vec<usize>,
    pub evaluations: u64,
    pub seed: u64,
}

/// Objective on orthonormal frames plus an optional gradient.
pub(crate) struct FrameObjective<'a> {
    pub value: &'a (dyn Fn(&CMat) -> f64 + Sync),
    pub gradient: Option<&'a (dyn Fn(&CMat) -> CMat + Sync)>,
}

pub(crate) struct SearchPlan<'a> {
    pub n: usize,
    pub dims: Vec<usize>,
    pub budget: u64,
    pub seed: u64,
    pub purpose: &'a str,
    pub extra_starts: Vec<CMat>,
}

pub(crate) struct SearchOutcome {
    pub frame: CMat,
    pub value: f64,
    pub evaluations: u64,
}

#[derive(Clone, Copy)]
enum Origin {
    Extra(usize),
    Coordinate(usize),
    Random(usize, usize),
}

fn coordinate_frame(n: usize, idx: &[usize]) -> CMat {
    let mut t = CMat::zeros(n, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        t[(i, k)] = c(1.0, 0.0);
    }
    t
}

fn random_frame(plan: &SearchPlan, r: usize, k: usize) -> CMat {
    let mut rng = rng::stream(plan.seed, plan.purpose, &[r as u64, k as u64]);
    linalg::haar_frame(plan.n, r, &mut rng)
}

/// Keeps the `k` smallest `(value, origin)` pairs; ties keep the earlier one.
fn push_best(best: &mut Vec<(f64, Origin)>, value: f64, origin: Origin, k: usize) {
    if !value.is_finite() {
        return;
    }
    let pos = best.iter().position(|(v, _)| value < *v).unwrap_or(best.len());
    if pos < k {
        best.insert(pos, (value, origin));
        best.truncate(k);
    }
}

/// Candidate family: extra starts, all coordinate subspaces (when few
/// enough), seeded Haar frames per dimension, then local refinement of the
/// best few.
pub(crate) fn frame_search(plan: &SearchPlan, obj: &FrameObjective) -> Result<SearchOutcome> {
    if plan.budget == 0 {
        return Err(Error::Config("search budget must be positive".into()));
    }
    if plan.dims.is_empty() {
        return Err(Error::Dimension("no admissible subspace dimension".into()));
    }
    let n = plan.n;
    let max_dim = *plan.dims.iter().max().expect("nonempty");
    let mut evals: u64 = 0;
    let mut best: Vec<(f64, Origin)> = Vec::new();

    let extra_vals = par::map_slice(&plan.extra_starts, |t| (obj.value)(t));
    evals += extra_vals.len() as u64;
    for (k, v) in extra_vals.into_iter().enumerate() {
        push_best(&mut best, v, Origin::Extra(k), REFINE_STARTS);
    }

    let coord_count = coordinate_subset_count(n, max_dim);
    let subsets = if coord_count <= COORDINATE_LIMIT && coord_count <= plan.budget / 2 {
        coordinate_subsets(n, max_dim)
            .into_iter()
            .filter(|s| plan.dims.contains(&s.len()))
            .collect()
    } else {
        Vec::new()
    };
    let coord_vals = par::map_slice(&subsets, |s| (obj.value)(&coordinate_frame(n, s)));
    evals += coord_vals.len() as u64;
    for (k, v) in coord_vals.into_iter().enumerate() {
        push_best(&mut best, v, Origin::Coordinate(k), REFINE_STARTS);
    }

    let remaining = plan.budget.saturating_sub(evals);
    let per_dim = (remaining / (2 * plan.dims.len() as u64)).max(1) as usize;
    for &r in &plan.dims {
        let vals = par::map_range(per_dim, |k| (obj.value)(&random_frame(plan, r, k)));
        evals += vals.len() as u64;
        for (k, v) in vals.into_iter().enumerate() {
            push_best(&mut best, v, Origin::Random(r, k), REFINE_STARTS);
        }
    }

    let starts: Vec<(f64, CMat)> = best
        .iter()
        .map(|&(v, o)| {
            let t = match o {
                Origin::Extra(k) => plan.extra_starts[k].clone(),
                Origin::Coordinate(k) => coordinate_frame(n, &subsets[k]),
                Origin::Random(r, k) => random_frame(plan, r, k),
            };
            (v, t)
        })
        .collect();
    let share = (plan.budget.saturating_sub(evals) / starts.len().max(1) as u64).max(1);
    let refined = par::map_range(starts.len(), |k| {
        let (v, t) = &starts[k];
        let mut rng = rng::stream(plan.seed, plan.purpose, &[u64::MAX, k as u64]);
        refine(t.clone(), *v, obj, share, &mut rng)
    });
    let mut out: Option<SearchOutcome> = None;
    for (frame, value, used) in refined {
        evals += used;
        if out.as_ref().is_none_or(|o| value < o.value) {
            out = Some(SearchOutcome {
                frame,
                value,
                evaluations: 0,
            });
        }
    }
    let mut out = out.ok_or_else(|| Error::Internal("search produced no candidate".into()))?;
    out.evaluations = evals;
    Ok(out)
}

/// Local descent from one start; returns `(frame, value, evaluations)`.
fn refine(
    t: CMat,
    f: f64,
    obj: &FrameObjective,
    max_evals: u64,
    rng: &mut Rng,
) -> (CMat, f64, u64) {
    match obj.gradient {
        Some(grad) => gradient_descent(t, f, obj.value, grad, max_evals),
        None => perturbation_descent(t, f, obj.value, max_evals, rng),
    }
}

/// Projected gradient descent with backtracking, re-orthonormalizing each
/// step.
pub(crate) fn gradient_descent(
    mut t: CMat,
    mut f: f64,
    value: &(dyn Fn(&CMat) -> f64 + Sync),
    grad: &(dyn Fn(&CMat) -> CMat + Sync),
    max_evals: u64,
) -> (CMat, f64, u64) {
    let mut evals = 0;
    for _ in 0..MAX_REFINE_STEPS {
        let g = grad(&t);
        let g = &g - &t * (t.adjoint() * &g);
        if g.norm() < 1e-14 {
            break;
        }
        let mut alpha = INITIAL_STEP;
        let mut accepted = None;
        while alpha > 1e-12 && evals < max_evals {
            let cand = linalg::orthonormalize_columns(&(&t - &g * c(alpha, 0.0)));
            let fc = value(&cand);
            evals += 1;
            if fc < f {
                accepted = Some((cand, fc));
                break;
            }
            alpha *= 0.5;
        }
        let Some((cand, fc)) = accepted else { break };
        let rel = (f - fc) / f.abs().max(f64::MIN_POSITIVE);
        t = cand;
        f = fc;
        if rel < REL_IMPROVEMENT_STOP || evals >= max_evals {
            break;
        }
    }
    (t, f, evals)
}

/// Random-direction accept-if-improve search for objectives without a
/// gradient.
fn perturbation_descent(
    mut t: CMat,
    mut f: f64,
    value: &(dyn Fn(&CMat) -> f64 + Sync),
    max_evals: u64,
    rng: &mut Rng,
) -> (CMat, f64, u64) {
    let mut eta = 0.2;
    let mut evals = 0;
    let mut misses = 0;
    while evals < max_evals && eta > 1e-8 && misses < MAX_REFINE_STEPS {
        let dir = linalg::gaussian_matrix(t.nrows(), t.ncols(), rng);
        let cand = linalg::orthonormalize_columns(&(&t + dir * c(eta, 0.0)));
        let fc = value(&cand);
        evals += 1;
        if fc < f {
            t = cand;
            f = fc;
            eta = (eta * 1.5).min(0.5);
            misses = 0;
        } else {
            eta *= 0.8;
            misses += 1;
        }
    }
    (t, f, evals)
}

fn edge_dims(n: usize) -> Vec<usize> {
    (1..=n / 2).collect()
}

/// Certified lower bound `gap/2` when the tuple is doubly stochastic.
fn gap_lower_bound(b: &MatrixTuple) -> Result<Option<f64>> {
    if !b.is_doubly_stochastic() {
        return Ok(None);
    }
    Ok(Some(quantum_expansion(b)?.gap / 2.0))
}

fn finish_estimate(
    b: &MatrixTuple,
    outcome: SearchOutcome,
    lower_bound: Option<f64>,
    dims: Vec<usize>,
    seed: u64,
    eval: impl Fn(&Subspace) -> Result<f64>,
) -> Result<ExpansionEstimate> {
    let field = match b.field() {
        f @ FieldSpec::Complex { .. } => f,
        FieldSpec::Prime(_) => unreachable!("checked by caller"),
    };
    let witness = Subspace::from_orthonormal_frame(outcome.frame, field)?.canonicalized()?;
    let best_value = eval(&witness)?;
    Ok(ExpansionEstimate {
        lower_bound,
        best_value,
        best_exact: None,
        witness,
        dims_searched: dims,
        evaluations: outcome.evaluations,
        seed,
    })
}

/// Bracket for `h_Q(B)`.
pub fn quantum_edge_bracket(b: &MatrixTuple, budget: u64, seed: u64) -> Result<ExpansionEstimate> {
    quantum_edge_bracket_with_starts(b, budget, seed, &[])
}

/// As [`quantum_edge_bracket`], also refining from the given subspaces.
pub fn quantum_edge_bracket_with_starts(
    b: &MatrixTuple,
    budget: u64,
    seed: u64,
    starts: &[Subspace],
) -> Result<ExpansionEstimate> {
    let mats = complex_mats(b)?;
    if budget == 0 {
        return Err(Error::Config("search budget must be positive".into()));
    }
    let dims = edge_dims(b.n());
    let value = |t: &CMat| edge_objective_frame(mats, t);
    let gradient = |t: &CMat| edge_gradient_frame(mats, t);
    let plan = SearchPlan {
        n: b.n(),
        dims: dims.clone(),
        budget,
        seed,
        purpose: "quantum-edge",
        extra_starts: start_frames(starts, b.n())?,
    };
    let outcome = frame_search(
        &plan,
        &FrameObjective {
            value: &value,
            gradient: Some(&gradient),
        },
    )?;
    let lower = gap_lower_bound(b)?;
    finish_estimate(b, outcome, lower, dims, seed, |v| quantum_edge_value(b, v))
}

fn start_frames(starts: &[Subspace], n: usize) -> Result<Vec<CMat>> {
    starts
        .iter()
        .map(|s| {
            check_edge_dim(n, s.dim())?;
            Ok(s.canonicalized()?.complex_basis()?.clone())
        })
        .collect()
}

/// Bracket for the Schatten-`p` edge expansion; no certified lower bound.
pub fn schatten_edge_bracket(
    b: &MatrixTuple,
    p: f64,
    budget: u64,
    seed: u64,
    starts: &[Subspace],
) -> Result<ExpansionEstimate> {
    check_p(p)?;
    let mats = complex_mats(b)?;
    if budget == 0 {
        return Err(Error::Config("search budget must be positive".into()));
    }
    let dims = edge_dims(b.n());
    let value = |t: &CMat| schatten_objective_frame(mats, t, p);
    let gradient = |t: &CMat| edge_gradient_frame(mats, t);
    let plan = SearchPlan {
        n: b.n(),
        dims: dims.clone(),
        budget,
        seed,
        purpose: "quantum-edge",
        extra_starts: start_frames(starts, b.n())?,
    };
    // p = 2 is the quantum edge objective, so the same gradient applies
    let obj = FrameObjective {
        value: &value,
        gradient: if p == 2.0 { Some(&gradient) } else { None },
    };
    let outcome = frame_search(&plan, &obj)?;
    finish_estimate(b, outcome, None, dims, seed, |v| schatten_edge_value(b, v, p))
}

/// Unit vector `(cos theta, e^{i phi} sin theta)` spanning a line in `C^2`.
pub fn cp1_frame(theta: f64, phi: f64) -> CMat {
    CMat::from_column_slice(
        2,
        1,
        &[c(theta.cos(), 0.0), C64::from_polar(theta.sin(), phi)],
    )
}

/// `h_Q` for `n = 2` by a dense `steps x steps` angle grid over the lines of
/// `C^2`, with gradient refinement of the best grid point.
pub fn cp1_grid_bracket(b: &MatrixTuple, steps: usize, seed: u64) -> Result<ExpansionEstimate> {
    let mats = complex_mats(b)?;
    if b.n() != 2 {
        return Err(Error::Dimension(format!("grid search needs n = 2, got {}", b.n())));
    }
    if steps < 2 {
        return Err(Error::Config("grid needs at least 2 steps".into()));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let two_pi = 2.0 * std::f64::consts::PI;
    let angles = |k: usize| {
        let (i, j) = (k / steps, k % steps);
        (
            half_pi * i as f64 / (steps - 1) as f64,
            two_pi * j as f64 / steps as f64,
        )
    };
    let vals = par::map_range(steps * steps, |k| {
        let (th, ph) = angles(k);
        edge_objective_frame(mats, &cp1_frame(th, ph))
    });
    let mut best_k = 0;
    for (k, v) in vals.iter().enumerate() {
        if *v < vals[best_k] {
            best_k = k;
        }
    }
    let (th, ph) = angles(best_k);
    let value = |t: &CMat| edge_objective_frame(mats, t);
    let gradient = |t: &CMat| edge_gradient_frame(mats, t);
    let (frame, _, used) = gradient_descent(cp1_frame(th, ph), vals[best_k], &value, &gradient, 10_000);
    let outcome = SearchOutcome {
        frame,
        value: 0.0,
        evaluations: vals.len() as u64 + used,
    };
    let lower = gap_lower_bound(b)?;
    finish_estimate(b, outcome, lower, vec![1], seed, |v| quantum_edge_value(b, v))
}
