//! Executable checks of the inequality web.
//!
//! Each suite evaluates a list of cases in parallel and merges the results by
//! case index. A case digest `suite:tuple-fingerprint:seed:index` is enough
//! to regenerate the failing input.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::Serialize;
use serde_json::{json, Value};

use crate::constructions::{self, graphical_tuple, TupleLog};
use crate::dimension::{self, exact_expansion_finite_field, image_sum_dim, restriction_ranks};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::fp::FpMatrix;
use crate::graph::{self, Graph, Rational, DEFAULT_EXHAUSTIVE_LIMIT};
use crate::linalg::{self, c, CMat, C64};
use crate::matrix::Matrix;
use crate::par;
use crate::quantum::{self, ExpansionEstimate};
use crate::rng::{self, Rng};
use crate::subspace::{canonical_basis, stack_images, RestrictionFrame, Subspace};
use crate::tuple::MatrixTuple;

/// Slack for floating comparisons that are exact in real arithmetic.
pub const FLOAT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseFailure {
    pub case: u64,
    pub digest: String,
    pub check: String,
    pub observed: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub checks: u64,
    pub failures: Vec<CaseFailure>,
    pub passed: bool,
    /// Smallest slack over all checks (negative means a failure).
    pub worst_margin: Option<f64>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl SuiteReport {
    /// Combines several reports into one, keeping case order.
    pub fn merge(name: &str, seed: u64, parts: Vec<SuiteReport>) -> SuiteReport {
        let mut out = SuiteReport {
            suite: name.into(),
            cases: 0,
            checks: 0,
            failures: Vec::new(),
            passed: true,
            worst_margin: None,
            seed,
            tolerances: BTreeMap::new(),
            details: None,
        };
        let mut details = Vec::new();
        for p in parts {
            let offset = out.cases;
            out.cases += p.cases;
            out.checks += p.checks;
            out.failures.extend(p.failures.into_iter().map(|mut f| {
                f.case += offset;
                f
            }));
            out.worst_margin = min_opt(out.worst_margin, p.worst_margin);
            out.tolerances.extend(p.tolerances);
            if let Some(d) = p.details {
                details.push(d);
            }
        }
        out.passed = out.failures.is_empty();
        if !details.is_empty() {
            out.details = Some(Value::Array(details));
        }
        out
    }
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// One inequality outcome.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

impl Check {
    /// `observed <= bound + slack`.
    pub fn le(name: &str, observed: f64, bound: f64, slack: f64) -> Check {
        let margin = bound + slack - observed;
        Check {
            name: name.into(),
            observed,
            bound,
            margin,
            holds: margin >= 0.0,
        }
    }

    /// `observed >= bound - slack`.
    pub fn ge(name: &str, observed: f64, bound: f64, slack: f64) -> Check {
        let margin = observed - bound + slack;
        Check {
            name: name.into(),
            observed,
            bound,
            margin,
            holds: margin >= 0.0,
        }
    }

    /// Exact rational `observed <= bound`.
    pub fn le_exact(name: &str, observed: Rational, bound: Rational) -> Check {
        Check {
            name: name.into(),
            observed: to_f64(observed),
            bound: to_f64(bound),
            margin: to_f64(bound - observed),
            holds: observed <= bound,
        }
    }

    pub fn eq_exact(name: &str, observed: Rational, expected: Rational) -> Check {
        Check {
            name: name.into(),
            observed: to_f64(observed),
            bound: to_f64(expected),
            // `+ 0.0` keeps an exact match from printing as -0.
            margin: -to_f64(observed - expected).abs() + 0.0,
            holds: observed == expected,
        }
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn ri(x: usize) -> Rational {
    Rational::from_integer(x as i64)
}

/// Runs `cases` independent cases in parallel and collects failures.
pub fn run_suite<F>(
    suite: &str,
    prefix: &str,
    seed: u64,
    cases: usize,
    tolerances: &[(&str, f64)],
    case: F,
) -> Result<SuiteReport>
where
    F: Fn(usize) -> Result<Vec<Check>> + Sync + Send,
{
    let results = par::map_range(cases, &case);
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut worst: Option<f64> = None;
    for (k, res) in results.into_iter().enumerate() {
        for ch in res? {
            checks += 1;
            worst = min_opt(worst, Some(ch.margin));
            if !ch.holds {
                failures.push(CaseFailure {
                    case: k as u64,
                    digest: format!("{suite}:{prefix}:{seed}:{k}"),
                    check: ch.name,
                    observed: ch.observed,
                    bound: ch.bound,
                    margin: ch.margin,
                });
            }
        }
    }
    Ok(SuiteReport {
        suite: suite.into(),
        cases: cases as u64,
        checks,
        passed: failures.is_empty(),
        failures,
        worst_margin: worst,
        seed,
        tolerances: tolerances.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        details: None,
    })
}

/// A random subspace of dimension `r`: Haar over C, uniform spanning
/// vectors over a prime field.
pub fn random_subspace(n: usize, r: usize, field: FieldSpec, rng: &mut Rng) -> Result<Subspace> {
    match field {
        FieldSpec::Complex { .. } => {
            Subspace::from_orthonormal_frame(linalg::haar_frame(n, r, rng), field)?.canonicalized()
        }
        FieldSpec::Prime(p) => loop {
            let mut m = FpMatrix::zeros(n, r, p);
            for i in 0..n {
                for j in 0..r {
                    m.set(i, j, rng.random_range(0..p));
                }
            }
            if m.rank() == r {
                return canonical_basis(&Matrix::Prime(m), field);
            }
        },
    }
}

/// Case `k`'s subspace: dimension uniform in `1..=n/2`, from its own stream.
pub fn sampled_subspace(n: usize, field: FieldSpec, seed: u64, purpose: &str, k: usize) -> Result<Subspace> {
    if n < 2 {
        return Err(Error::Dimension("need n >= 2".into()));
    }
    let mut rng = rng::stream(seed, purpose, &[k as u64]);
    let r = rng.random_range(1..=n / 2);
    random_subspace(n, r, field, &mut rng)
}

fn sampled(b: &MatrixTuple, trials: usize, seed: u64, purpose: &str) -> Result<Vec<Subspace>> {
    (0..trials)
        .map(|k| sampled_subspace(b.n(), b.field(), seed, purpose, k))
        .collect()
}

fn require_doubly_stochastic(b: &MatrixTuple) -> Result<&[CMat]> {
    let mats = b.complex_matrices()?;
    if !b.is_doubly_stochastic() {
        return Err(Error::Validation("suite needs a doubly stochastic tuple".into()));
    }
    Ok(mats)
}

/// Projector form against restriction form of the edge objective.
pub fn eq16_on(b: &MatrixTuple, subspaces: &[Subspace], seed: u64) -> Result<SuiteReport> {
    let mats = require_doubly_stochastic(b)?;
    let tol = 1e-9 * b.n() as f64;
    run_suite("eq16", &b.fingerprint(), seed, subspaces.len(), &[("abs", tol)], |k| {
        let v = &subspaces[k];
        let lhs = quantum::projector_form(b, v)?;
        let rhs = quantum::restriction_form(mats, v)?;
        Ok(vec![Check::le("projector vs restriction form", (lhs - rhs).abs(), tol, 0.0)])
    })
}

pub fn eq16_identity_suite(b: &MatrixTuple, trials: usize, seed: u64) -> Result<SuiteReport> {
    eq16_on(b, &sampled(b, trials, seed, "eq16")?, seed)
}

/// `||B_i|||_{S_2}^2 <= c rank(B_i|)` and `||B_i|||_{S_inf} <= sqrt(c)` with
/// `c = d`, or `c = 1` for unitary tuples.
pub fn norm_rank_on(b: &MatrixTuple, subspaces: &[Subspace], seed: u64) -> Result<SuiteReport> {
    let mats = require_doubly_stochastic(b)?;
    let factor = if b.is_unitary() { 1.0 } else { b.d() as f64 };
    let tol = b.field().rank_tol();
    run_suite(
        "normrank",
        &b.fingerprint(),
        seed,
        subspaces.len(),
        &[("abs", FLOAT_SLACK), ("factor", factor)],
        |k| {
            let frame = RestrictionFrame::new(&subspaces[k])?;
            let mut out = Vec::with_capacity(2 * mats.len());
            for m in mats {
                let rm = frame.restrict_complex(m)?;
                let sv = linalg::singular_values(&rm);
                let s2 = sv.iter().map(|s| s * s).sum::<f64>();
                let rank = linalg::numerical_rank(&rm, tol) as f64;
                out.push(Check::le("S2^2 <= factor * rank", s2, factor * rank, FLOAT_SLACK));
                let op = sv.first().copied().unwrap_or(0.0);
                out.push(Check::le("S_inf <= sqrt(factor)", op, factor.sqrt(), FLOAT_SLACK));
            }
            Ok(out)
        },
    )
}

pub fn norm_rank_suite(b: &MatrixTuple, trials: usize, seed: u64) -> Result<SuiteReport> {
    norm_rank_on(b, &sampled(b, trials, seed, "normrank")?, seed)
}

/// `sum_i rank(B_i|) <= d (dim(V+B(V)) - dim V)` and, with `B' = (B, I)`,
/// `sum_i rank(B'_i|) >= dim(V+B(V)) - dim V`.
pub fn prop31_on(b: &MatrixTuple, subspaces: &[Subspace], seed: u64) -> Result<SuiteReport> {
    let augmented = b.with_identity_appended();
    let d = b.d();
    run_suite("prop31", &b.fingerprint(), seed, subspaces.len(), &[], |k| {
        let v = &subspaces[k];
        let growth = image_sum_dim(b, v)? - v.dim();
        let ranks: usize = restriction_ranks(b, v)?.iter().sum();
        let ranks_aug: usize = restriction_ranks(&augmented, v)?.iter().sum();
        Ok(vec![
            Check::le_exact("sum rank <= d * growth", ri(ranks), ri(d * growth)),
            Check::le_exact("growth <= sum rank of (B, I)", ri(growth), ri(ranks_aug)),
        ])
    })
}

pub fn prop31_pointwise_suite(b: &MatrixTuple, trials: usize, seed: u64) -> Result<SuiteReport> {
    prop31_on(b, &sampled(b, trials, seed, "prop31")?, seed)
}

/// Every subspace of dimension `1..=n/2` of a prime-field tuple.
pub fn prop31_exhaustive(b: &MatrixTuple) -> Result<SuiteReport> {
    let p = prime_of(b)?;
    let all = dimension::enumerate_subspaces(b.n(), p, b.n() / 2)?;
    prop31_on(b, &all, 0)
}

fn prime_of(b: &MatrixTuple) -> Result<u64> {
    match b.field() {
        FieldSpec::Prime(p) => Ok(p),
        FieldSpec::Complex { .. } => Err(Error::Field("needs a prime-field tuple".into())),
    }
}

/// The graph behind a graphical tuple's metadata.
pub fn graph_of(b: &MatrixTuple) -> Result<Graph> {
    let info = b
        .metadata
        .graphical
        .as_ref()
        .ok_or_else(|| Error::Validation("tuple is not tagged as graphical".into()))?;
    let edges: Vec<(usize, usize)> = info
        .pairs
        .iter()
        .filter(|(i, j)| i < j)
        .map(|&(i, j)| (i - 1, j - 1))
        .collect();
    Graph::new(b.n(), &edges)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessOutcome {
    /// 1-indexed vertex set.
    pub w: Vec<usize>,
    pub rank_sum: usize,
    pub boundary: usize,
    pub holds: bool,
}

/// Rows of `T` forming an invertible `r x r` block, by pivoted elimination.
fn invertible_rows(v: &Subspace) -> Result<Vec<usize>> {
    let r = v.dim();
    let mut rows = Vec::with_capacity(r);
    match v.basis() {
        Matrix::Complex(t) => {
            let mut w = t.clone();
            for k in 0..r {
                let (piv, mag) = (0..w.nrows())
                    .filter(|i| !rows.contains(i))
                    .map(|i| (i, w[(i, k)].norm()))
                    .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                if piv == usize::MAX || mag < 1e-12 {
                    return Err(Error::Internal("no invertible row selection".into()));
                }
                rows.push(piv);
                let pivot_col = w.column(k).into_owned();
                for j in k + 1..r {
                    let f = w[(piv, j)] / w[(piv, k)];
                    let col = w.column(j) - &pivot_col * f;
                    w.set_column(j, &col);
                }
            }
        }
        Matrix::Prime(t) => {
            let p = t.modulus();
            let mut w = t.clone();
            for k in 0..r {
                let piv = (0..w.rows())
                    .find(|i| !rows.contains(i) && w.get(*i, k) != 0)
                    .ok_or_else(|| Error::Internal("no invertible row selection".into()))?;
                rows.push(piv);
                let inv = crate::fp::inv_mod(w.get(piv, k), p);
                for j in k + 1..r {
                    let f = w.get(piv, j) * inv % p;
                    for i in 0..w.rows() {
                        let val = (w.get(i, j) + p - f * w.get(i, k) % p) % p;
                        w.set(i, j, val);
                    }
                }
            }
        }
    }
    rows.sort_unstable();
    Ok(rows)
}

/// Extracts `W` with `|W| = dim V` from an invertible row block of `T_V`
/// and tests `sum rank(E_ij|) >= |boundary W|`.
pub fn coordinate_witness(b: &MatrixTuple, v: &Subspace) -> Result<WitnessOutcome> {
    let g = graph_of(b)?;
    let rows = invertible_rows(v)?;
    // {0} and the whole space have empty restrictions and empty boundary.
    let rank_sum: usize = if v.dim() == 0 || v.dim() == v.ambient_n() {
        0
    } else {
        restriction_ranks(b, v)?.iter().sum()
    };
    let boundary = g.edge_boundary(&rows);
    Ok(WitnessOutcome {
        w: rows.iter().map(|i| i + 1).collect(),
        rank_sum,
        boundary,
        holds: rank_sum >= boundary,
    })
}

pub fn witness_on(b: &MatrixTuple, subspaces: &[Subspace], seed: u64) -> Result<SuiteReport> {
    run_suite("witness", &b.fingerprint(), seed, subspaces.len(), &[], |k| {
        let v = &subspaces[k];
        let out = coordinate_witness(b, v)?;
        Ok(vec![
            Check::eq_exact("|W| = dim V", ri(out.w.len()), ri(v.dim())),
            Check::le_exact("|boundary W| <= sum rank", ri(out.boundary), ri(out.rank_sum)),
        ])
    })
}

/// `pi(V)`: the distinct last-nonzero positions of an echelon basis ordered
/// from the bottom, 1-indexed.
pub fn pi_support(v: &Subspace) -> Vec<usize> {
    let n = v.ambient_n();
    let r = v.dim();
    let mut used = vec![false; r];
    let mut out = Vec::with_capacity(r);
    match v.basis() {
        Matrix::Complex(t) => {
            let mut w = t.clone();
            let scale = linalg::max_abs(&w).max(f64::MIN_POSITIVE);
            for row in (0..n).rev() {
                let best = (0..r)
                    .filter(|&j| !used[j])
                    .map(|j| (j, w[(row, j)].norm()))
                    .fold(None, |acc: Option<(usize, f64)>, x| match acc {
                        Some(a) if a.1 >= x.1 => Some(a),
                        _ => Some(x),
                    });
                let Some((col, mag)) = best else { break };
                if mag <= 1e-9 * scale {
                    continue;
                }
                used[col] = true;
                out.push(row + 1);
                let pc = w.column(col).into_owned();
                for j in 0..r {
                    if !used[j] {
                        let f: C64 = w[(row, j)] / w[(row, col)];
                        let nc = w.column(j) - &pc * f;
                        w.set_column(j, &nc);
                    }
                }
            }
        }
        Matrix::Prime(t) => {
            let p = t.modulus();
            let mut w = t.clone();
            for row in (0..n).rev() {
                let Some(col) = (0..r).find(|&j| !used[j] && w.get(row, j) != 0) else {
                    continue;
                };
                used[col] = true;
                out.push(row + 1);
                let inv = crate::fp::inv_mod(w.get(row, col), p);
                for j in (0..r).filter(|&j| !used[j]) {
                    let f = w.get(row, j) * inv % p;
                    for i in 0..n {
                        let val = (w.get(i, j) + p - f * w.get(i, col) % p) % p;
                        w.set(i, j, val);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// `|pi(V + B_G(V))| >= |pi(V) u out(pi(V))| >= (1 + mu(G)) |pi(V)|`, the
/// second step only for `1 <= dim V <= n/2`.
pub fn pi_expansion_on(g: &Graph, b: &MatrixTuple, subspaces: &[Subspace], seed: u64) -> Result<SuiteReport> {
    let mu = graph::vertex_expansion(g, DEFAULT_EXHAUSTIVE_LIMIT)?.value;
    let field = b.field();
    run_suite("pi", &b.fingerprint(), seed, subspaces.len(), &[], |k| {
        let v = &subspaces[k];
        let pi_sum = if v.is_zero() {
            0
        } else {
            pi_support(&canonical_basis(&stack_images(b, v, true)?, field)?).len()
        };
        let pi_v: Vec<usize> = pi_support(v).iter().map(|i| i - 1).collect();
        let grown = pi_v.len() + g.out_boundary(&pi_v).len();
        let mut out = vec![
            Check::eq_exact("|pi(V)| = dim V", ri(pi_v.len()), ri(v.dim())),
            Check::le_exact("|pi(V) u out| <= |pi(V + B(V))|", ri(grown), ri(pi_sum)),
        ];
        if v.dim() >= 1 && 2 * v.dim() <= g.n() {
            out.push(Check::le_exact(
                "(1 + mu) |pi(V)| <= |pi(V) u out|",
                (Rational::from_integer(1) + mu) * ri(pi_v.len()),
                ri(grown),
            ));
        }
        Ok(out)
    })
}

/// The graphical tuple used by the graph-side suites: unnormalized over a
/// prime field, normalized over C.
pub fn suite_graphical_tuple(g: &Graph, field: FieldSpec) -> Result<MatrixTuple> {
    graphical_tuple(g, field, field.is_complex())
}

pub fn pi_expansion_suite(g: &Graph, field: FieldSpec, trials: usize, seed: u64) -> Result<SuiteReport> {
    let b = suite_graphical_tuple(g, field)?;
    pi_expansion_on(g, &b, &sampled(&b, trials, seed, "pi")?, seed)
}

pub fn witness_suite(g: &Graph, field: FieldSpec, trials: usize, seed: u64) -> Result<SuiteReport> {
    let b = suite_graphical_tuple(g, field)?;
    witness_on(&b, &sampled(&b, trials, seed, "witness")?, seed)
}

/// Witness and `pi` suites over the whole subspace lattice of `F_p^n`.
pub fn graph_suites_exhaustive(g: &Graph, p: u64) -> Result<SuiteReport> {
    let b = suite_graphical_tuple(g, FieldSpec::prime(p)?)?;
    let all = dimension::all_subspaces(g.n(), p)?;
    Ok(SuiteReport::merge(
        "witness+pi",
        0,
        vec![witness_on(&b, &all, 0)?, pi_expansion_on(g, &b, &all, 0)?],
    ))
}

/// Largest distance in a greedy nearest-neighbour matching of two
/// multisets of complex numbers of equal size.
fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut taken = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !taken[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, t| if t.1 < acc.1 { t } else { acc });
        taken[j] = true;
        worst = worst.max(dist);
    }
    worst
}

/// `eig(Phi_{B_G}) = eig(A) u {0}^{n^2 - n}`, `Phi` restricted to diagonal
/// matrices equals `A`, and `lambda_sv(G) = gap(B_G)`.
pub fn thm15_spectrum_check(g: &Graph) -> Result<SuiteReport> {
    let b = graphical_tuple(g, FieldSpec::complex(), true)?;
    let n = g.n();
    let a = g.normalized_adjacency()?;
    let sup = quantum::superoperator_matrix(&b)?;
    let (_, t) = linalg::schur(&sup.matrix);
    let eig_phi: Vec<C64> = (0..n * n).map(|i| t[(i, i)]).collect();
    let mut expected: Vec<C64> = graph::adjacency_spectrum(g)?.iter().map(|&x| c(x, 0.0)).collect();
    expected.extend(std::iter::repeat_n(c(0.0, 0.0), n * n - n));
    let spec_dist = multiset_distance(&expected, &eig_phi);

    let mut diag_err: f64 = 0.0;
    for k in 0..n {
        let mut e = CMat::zeros(n, n);
        e[(k, k)] = c(1.0, 0.0);
        let img = sup.apply(&e);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { a[(i, k)] } else { 0.0 };
                diag_err = diag_err.max((img[(i, j)] - c(want, 0.0)).norm());
            }
        }
    }
    let sp = graph::spectral_expansion(g)?;
    let q = quantum::quantum_expansion(&b)?;
    let mut rep = run_suite(
        "thm15",
        &b.fingerprint(),
        0,
        1,
        &[("spectrum", 1e-8), ("diagonal", 1e-10), ("scalar", 1e-8)],
        |_| {
            Ok(vec![
                Check::le("eigenvalue multiset distance", spec_dist, 1e-8, 0.0),
                Check::le("Phi on diagonal minus A", diag_err, 1e-10, 0.0),
                Check::le("|lambda_sv(G) - gap(B_G)|", (sp.lambda_sv - q.gap).abs(), 1e-8, 0.0),
            ])
        },
    )?;
    rep.details = Some(json!({
        "lambda_eig": sp.lambda_eig,
        "lambda_sv": sp.lambda_sv,
        "gap": q.gap,
        "lambda2_sv": q.lambda2_sv,
    }));
    Ok(rep)
}

/// Exact `mu(B_G) = mu(G)` and degree-normalized `h_D(B_G) = h(G)` over
/// `F_p`.
pub fn thm16_exact_check(g: &Graph, p: u64) -> Result<SuiteReport> {
    let b = graphical_tuple(g, FieldSpec::prime(p)?, false)?;
    let d = g.degree()?;
    let rep = exact_expansion_finite_field(&b, d)?;
    let h = graph::edge_expansion(g, DEFAULT_EXHAUSTIVE_LIMIT)?.value;
    let mu = graph::vertex_expansion(g, DEFAULT_EXHAUSTIVE_LIMIT)?.value;
    let mu_b = rep.mu.exact().expect("exact");
    let h_b = rep.h_d.exact().expect("exact");
    let mut out = run_suite("thm16", &b.fingerprint(), 0, 1, &[], |_| {
        Ok(vec![
            Check::eq_exact("mu(B_G) = mu(G)", mu_b, mu),
            Check::eq_exact("h_D(B_G) = h(G)", h_b, h),
        ])
    })?;
    out.details = Some(json!({
        "p": p,
        "mu_graph": mu.to_string(),
        "mu_tuple": mu_b.to_string(),
        "h_graph": h.to_string(),
        "h_tuple": h_b.to_string(),
    }));
    Ok(out)
}

/// `gap/(2d) <= mu-estimate` (`gap/2` for unitary tuples).
pub fn cor13_consistency(b: &MatrixTuple, budget: u64, seed: u64) -> Result<SuiteReport> {
    require_doubly_stochastic(b)?;
    let gap = quantum::quantum_expansion(b)?.gap;
    let bound = if b.is_unitary() { gap / 2.0 } else { gap / (2.0 * b.d() as f64) };
    let est = dimension::dimension_expansion_estimate(b, budget, seed)?;
    let mut rep = run_suite("cor13", &b.fingerprint(), seed, 1, &[("abs", FLOAT_SLACK)], |_| {
        Ok(vec![Check::le("spectral bound <= mu estimate", bound, est.best_value, FLOAT_SLACK)])
    })?;
    rep.details = Some(json!({ "gap": gap, "bound": bound, "mu_best": est.best_value }));
    Ok(rep)
}

fn k2_tuple() -> Result<MatrixTuple> {
    graphical_tuple(&Graph::complete(2), FieldSpec::complex(), true)
}

/// `h(K_2) = 1` while `h_Q(B_{K_2}) = 1/2`: exact graph value, the value at
/// the diagonal line, and a dense grid over all lines.
pub fn prop19_check(grid_steps: usize) -> Result<SuiteReport> {
    let k2 = Graph::complete(2);
    let h = graph::edge_expansion(&k2, DEFAULT_EXHAUSTIVE_LIMIT)?.value;
    let b = k2_tuple()?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let line = Subspace::span_complex(&[vec![c(s, 0.0), c(s, 0.0)]], FieldSpec::complex())?;
    let at_line = quantum::quantum_edge_value(&b, &line)?;
    let grid = quantum::cp1_grid_bracket(&b, grid_steps, 0)?;
    let mut rep = run_suite(
        "prop19",
        &b.fingerprint(),
        0,
        1,
        &[("line", 1e-10), ("grid", 1e-3)],
        |_| {
            Ok(vec![
                Check::eq_exact("h(K2) = 1", h, Rational::from_integer(1)),
                Check::le("|value at diagonal line - 1/2|", (at_line - 0.5).abs(), 1e-10, 0.0),
                Check::le("|grid minimum - 1/2|", (grid.best_value - 0.5).abs(), 1e-3, 0.0),
            ])
        },
    )?;
    rep.details = Some(json!({
        "h": h.to_string(),
        "value_at_line": at_line,
        "grid_best": grid.best_value,
        "grid_lower": grid.lower_bound,
    }));
    Ok(rep)
}

/// Exact `h_Q(B_{K_n}) = 1 - floor(n/2)/n`, attained by subspaces of
/// dimension `floor(n/2)` whose projector has constant diagonal.
pub fn complete_graph_hq(n: usize) -> f64 {
    1.0 - (n / 2) as f64 / n as f64
}

/// `h_Q(B_{K_n}) <= 1/n` for each `n`, tested against the search bracket
/// with the uniform line as an extra start.
pub fn complete_graph_hq_bound(ns: &[usize], budget: u64, seed: u64) -> Result<SuiteReport> {
    let mut details = Vec::new();
    let mut parts = Vec::new();
    for &n in ns {
        let b = graphical_tuple(&Graph::complete(n), FieldSpec::complex(), true)?;
        let u = vec![c(1.0 / (n as f64).sqrt(), 0.0); n];
        let uniform = Subspace::span_complex(&[u], FieldSpec::complex())?;
        let at_uniform = quantum::quantum_edge_value(&b, &uniform)?;
        let est = quantum::quantum_edge_bracket_with_starts(&b, budget, seed, &[uniform])?;
        let bound = 1.0 / n as f64;
        parts.push(run_suite("kn", &b.fingerprint(), seed, 1, &[("abs", FLOAT_SLACK)], |_| {
            Ok(vec![Check::le("best <= 1/n", est.best_value, bound, FLOAT_SLACK)])
        })?);
        details.push(json!({
            "n": n,
            "best": est.best_value,
            "lower": est.lower_bound,
            "uniform_line": at_uniform,
            "exact": complete_graph_hq(n),
            "claimed_bound": bound,
        }));
    }
    let mut rep = SuiteReport::merge("kn", seed, parts);
    rep.details = Some(Value::Array(details));
    Ok(rep)
}

fn s2_distance_to_identity(m: &CMat) -> f64 {
    linalg::frobenius_sq(&(CMat::identity(m.nrows(), m.ncols()) - m)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationPoint {
    pub s: f64,
    pub gap: f64,
    pub lambda2_sv: f64,
    pub max_dist: f64,
    pub mean_dist: f64,
    /// `2 mean_i ||I - U_i^s||_{S_2}`, an upper bound on the gap.
    pub gap_upper: f64,
    pub gap_upper_holds: bool,
    /// `s max_i ||H_i||_{S_inf} <= pi`.
    pub monotone_regime: bool,
    pub generic_r1: bool,
    pub generic_r2: bool,
    pub mu_best: f64,
    pub mu_lower: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub base_gap: f64,
    pub points: Vec<SeparationPoint>,
    /// Distances shrink as `s` shrinks inside the monotone regime.
    pub distances_monotone: bool,
    pub passed: bool,
}

impl SeparationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "s,gap,lambda2_sv,max_dist,mean_dist,gap_upper,generic_r1,generic_r2,mu_best\n",
        );
        for p in &self.points {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e}\n",
                p.s, p.gap, p.lambda2_sv, p.max_dist, p.mean_dist, p.gap_upper, p.generic_r1, p.generic_r2, p.mu_best
            ));
        }
        out
    }
}

/// Haar tuple `U` swept through `U^s`: the gap collapses with `s` while
/// generic rank (and so dimension expansion) persists.
pub fn separation_experiment(
    n: usize,
    d: usize,
    s_list: &[f64],
    seed: u64,
    budget: u64,
    generic_trials: usize,
) -> Result<SeparationReport> {
    let u = constructions::haar_unitary_tuple(n, d, seed)?;
    let base_gap = quantum::quantum_expansion(&u)?.gap;
    let logs = TupleLog::new(&u)?;
    let h_norm = logs.logs().iter().map(|l| l.operator_norm()).fold(0.0, f64::max);
    let mut points = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let us = logs.power(s)?;
        let q = quantum::quantum_expansion(&us)?;
        let dists: Vec<f64> = us.complex_matrices()?.iter().map(s2_distance_to_identity).collect();
        let max_dist = dists.iter().copied().fold(0.0, f64::max);
        let mean_dist = dists.iter().sum::<f64>() / d as f64;
        let gap_upper = 2.0 * mean_dist;
        let mu: ExpansionEstimate = dimension::dimension_expansion_estimate(&us, budget, seed)?;
        points.push(SeparationPoint {
            s,
            gap: q.gap,
            lambda2_sv: q.lambda2_sv,
            max_dist,
            mean_dist,
            gap_upper,
            gap_upper_holds: q.gap <= gap_upper + FLOAT_SLACK,
            monotone_regime: s * h_norm <= std::f64::consts::PI,
            generic_r1: dimension::generic_expansion_check(&us, 1, generic_trials, seed)?,
            generic_r2: n >= 2 && dimension::generic_expansion_check(&us, 2.min(n), generic_trials, seed)?,
            mu_best: mu.best_value,
            mu_lower: mu.lower_bound,
        });
    }
    let mut regime: Vec<&SeparationPoint> = points.iter().filter(|p| p.monotone_regime).collect();
    regime.sort_by(|a, b| a.s.total_cmp(&b.s));
    let distances_monotone = regime.windows(2).all(|w| w[0].max_dist <= w[1].max_dist + FLOAT_SLACK);
    let passed = distances_monotone
        && points
            .iter()
            .all(|p| p.gap_upper_holds && p.generic_r1 && p.generic_r2);
    Ok(SeparationReport {
        n,
        d,
        seed,
        base_gap,
        points,
        distances_monotone,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizedPoint {
    pub s: f64,
    pub gap: f64,
    /// `min_i |<e_1, U_i^s e_1>|`.
    pub min_e1_overlap: f64,
    /// `min_i (U_i^s P U_i^s*)_{11}` with `P = e_1 e_1^*`.
    pub min_p11: f64,
    pub overlap_holds: bool,
    pub p11_holds: bool,
    pub gap_holds: bool,
    pub mu_best: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizedReport {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub seed: u64,
    pub columns_localized: bool,
    pub min_diagonal_overlap: f64,
    /// `10 eps + 2/n`.
    pub gap_bound: f64,
    pub points: Vec<LocalizedPoint>,
    pub passed: bool,
}

impl LocalizedReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,gap,min_e1_overlap,min_p11,mu_best\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                p.s, p.gap, p.min_e1_overlap, p.min_p11, p.mu_best
            ));
        }
        out
    }
}

/// Localized tuple swept through `U^s`: `e_1` stays nearly fixed, so the
/// gap stays small for every `s`.
pub fn localized_experiment(
    n: usize,
    d: usize,
    eps: f64,
    s_list: &[f64],
    seed: u64,
    budget: u64,
) -> Result<LocalizedReport> {
    let parts = constructions::localized_unitary_parts(n, d, eps, seed)?;
    let columns_localized = parts.frames.iter().all(|m| constructions::is_localized(m, eps));
    let min_diagonal_overlap = parts
        .frames
        .iter()
        .flat_map(|m| (0..n).map(move |j| m[(j, j)].norm()))
        .fold(f64::INFINITY, f64::min);
    let logs = TupleLog::new(&parts.tuple)?;
    let gap_bound = 10.0 * eps + 2.0 / n as f64;
    let mut points = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let us = logs.power(s)?;
        let q = quantum::quantum_expansion(&us)?;
        let mats = us.complex_matrices()?;
        let min_e1_overlap = mats.iter().map(|m| m[(0, 0)].norm()).fold(f64::INFINITY, f64::min);
        let min_p11 = mats
            .iter()
            .map(|m| m[(0, 0)].norm_sqr())
            .fold(f64::INFINITY, f64::min);
        let mu = dimension::dimension_expansion_estimate(&us, budget, seed)?;
        points.push(LocalizedPoint {
            s,
            gap: q.gap,
            min_e1_overlap,
            min_p11,
            overlap_holds: min_e1_overlap >= 1.0 - 4.0 * eps,
            p11_holds: min_p11 >= 1.0 - 8.0 * eps,
            gap_holds: q.gap <= gap_bound,
            mu_best: mu.best_value,
        });
    }
    let passed = columns_localized
        && points
            .iter()
            .all(|p| p.overlap_holds && p.p11_holds && p.gap_holds);
    Ok(LocalizedReport {
        n,
        d,
        eps,
        seed,
        columns_localized,
        min_diagonal_overlap,
        gap_bound,
        points,
        passed,
    })
}

/// `gap/2 <= h_Q <= sqrt(2 gap)` for a tuple on `C^2`, with `h_Q` from the
/// dense grid.
pub fn cheeger_check_n2(b: &MatrixTuple, grid_steps: usize, slack: f64) -> Result<SuiteReport> {
    let q = quantum::quantum_expansion(b)?;
    let gap = q.gap;
    let est = quantum::cp1_grid_bracket(b, grid_steps, 0)?;
    let h = est.best_value;
    let mut rep = run_suite("cheeger", &b.fingerprint(), 0, 1, &[("abs", slack)], |_| {
        Ok(vec![
            Check::le("gap/2 <= h_Q", gap / 2.0, h, slack),
            Check::le("h_Q <= sqrt(2 gap)", h, (2.0 * gap).max(0.0).sqrt(), slack),
        ])
    })?;
    // The upper side in the singular-value convention, reported only.
    let sv_upper = (2.0 * q.lambda2_sv).max(0.0).sqrt();
    rep.details = Some(json!({
        "gap": gap,
        "hq": h,
        "lambda2_sv": q.lambda2_sv,
        "sv_upper": sv_upper,
        "sv_upper_holds": h <= sv_upper + slack,
    }));
    Ok(rep)
}

/// `count` random `d`-regular graphs, graph `k` on `ns[k % ns.len()]`
/// vertices from its own stream.
pub fn random_regular_graphs(count: usize, d: usize, ns: &[usize], seed: u64) -> Result<Vec<Graph>> {
    (0..count)
        .map(|k| {
            let mut rng = rng::stream(seed, "regular-graph", &[k as u64]);
            Graph::random_regular(ns[k % ns.len()], d, &mut rng)
        })
        .collect()
}

pub fn thm15_battery(graphs: &[Graph]) -> Result<SuiteReport> {
    let parts = par::map_slice(graphs, thm15_spectrum_check)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::merge("thm15", 0, parts))
}

pub fn thm16_battery(graphs: &[Graph], p: u64) -> Result<SuiteReport> {
    let parts = par::map_slice(graphs, |g| thm16_exact_check(g, p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::merge("thm16", 0, parts))
}

/// `mu/d <= h_D <= mu` exactly, with `h_D` normalized by `d`, for `count`
/// random tuples over `F_p`.
pub fn dimension_sandwich_battery(count: usize, n: usize, d: usize, p: u64, seed: u64) -> Result<SuiteReport> {
    let rows = par::map_range(count, |k| -> Result<(Vec<Check>, Value)> {
        let b = constructions::random_prime_tuple(n, d, p, false, rng::derive(seed, "sandwich", &[k as u64]))?;
        let rep = exact_expansion_finite_field(&b, d)?;
        let mu = rep.mu.exact().expect("exact");
        let hd = rep.h_d.exact().expect("exact");
        let subspaces = match &rep.mu {
            dimension::DimQuantity::Exact(e) => e.subspaces,
            dimension::DimQuantity::Estimate(_) => 0,
        };
        let checks = vec![
            Check::le_exact("mu/d <= h_D", mu / ri(d), hd),
            Check::le_exact("h_D <= mu", hd, mu),
        ];
        Ok((checks, json!({ "mu": mu.to_string(), "h_d": hd.to_string(), "subspaces": subspaces })))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut rep = run_suite("sandwich", "random-prime", seed, count, &[], |k| Ok(rows[k].0.clone()))?;
    let details = rows.into_iter().map(|r| r.1).collect();
    rep.details = Some(Value::Array(details));
    Ok(rep)
}

/// Random tuple for the pointwise battery: even cases are Haar tuples over C
/// with `2 <= n <= 8`, odd cases random tuples over `F_2` with `n <= 5`.
fn pointwise_case(k: usize, seed: u64) -> Result<(MatrixTuple, Subspace)> {
    let mut rng = rng::stream(seed, "pointwise", &[k as u64]);
    let d = rng.random_range(1..=3);
    let (b, n) = if k.is_multiple_of(2) {
        let n = rng.random_range(2..=8);
        (constructions::haar_unitary_tuple(n, d, rng.random())?, n)
    } else {
        let n = rng.random_range(2..=5);
        (constructions::random_prime_tuple(n, d, 2, false, rng.random())?, n)
    };
    let r = rng.random_range(1..=n / 2);
    let v = random_subspace(n, r, b.field(), &mut rng)?;
    Ok((b, v))
}

/// The pointwise suites over `cases` random (tuple, subspace) pairs; the
/// projector identity and norm-rank checks apply to the complex cases.
pub fn pointwise_battery(cases: usize, seed: u64) -> Result<SuiteReport> {
    let parts = par::map_range(cases, |k| -> Result<Vec<SuiteReport>> {
        let (b, v) = pointwise_case(k, seed)?;
        let vs = std::slice::from_ref(&v);
        let mut out = vec![prop31_on(&b, vs, seed)?];
        if b.is_complex() {
            out.push(eq16_on(&b, vs, seed)?);
            out.push(norm_rank_on(&b, vs, seed)?);
        }
        Ok(out)
    });
    let mut flat = Vec::new();
    for p in parts {
        flat.extend(p?);
    }
    let mut rep = SuiteReport::merge("pointwise", seed, flat);
    rep.cases = cases as u64;
    Ok(rep)
}

/// Haar tuples on `C^2` checked against the two-sided Cheeger bound.
pub fn cheeger_battery(count: usize, d: usize, grid_steps: usize, seed: u64) -> Result<SuiteReport> {
    let parts = par::map_range(count, |k| {
        let b = constructions::haar_unitary_tuple(2, d, rng::derive(seed, "cheeger", &[k as u64]))?;
        cheeger_check_n2(&b, grid_steps, 1e-6)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::merge("cheeger", seed, parts))
}

/// Witness and `pi` suites on the `F_2` lattice of `C_4` and on Haar
/// subspaces for `K_4` over C.
pub fn witness_battery(trials: usize, seed: u64) -> Result<SuiteReport> {
    let c4 = Graph::cycle(4);
    let k4 = Graph::complete(4);
    Ok(SuiteReport::merge(
        "witness+pi",
        seed,
        vec![
            graph_suites_exhaustive(&c4, 2)?,
            witness_suite(&k4, FieldSpec::complex(), trials, seed)?,
            pi_expansion_suite(&k4, FieldSpec::complex(), trials, seed)?,
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{haar_unitary_tuple, identity_tuple, random_prime_tuple};

    #[test]
    fn pi_support_examples() {
        let f2 = FieldSpec::prime(2).unwrap();
        let v = Subspace::coordinate(4, &[1], f2).unwrap();
        assert_eq!(pi_support(&v), vec![2]);
        let v = Subspace::span_prime(&[vec![1, 1, 0], vec![0, 1, 1]], 2).unwrap();
        assert_eq!(pi_support(&v), vec![2, 3]);
        let full = Subspace::coordinate(3, &[0, 1, 2], FieldSpec::complex()).unwrap();
        assert_eq!(pi_support(&full), vec![1, 2, 3]);
        let mut rng = rng::stream(0, "test", &[]);
        let v = random_subspace(6, 3, FieldSpec::complex(), &mut rng).unwrap();
        assert_eq!(pi_support(&v), vec![4, 5, 6]);
    }

    #[test]
    fn witness_examples() {
        let c4 = Graph::cycle(4);
        let b = suite_graphical_tuple(&c4, FieldSpec::prime(2).unwrap()).unwrap();
        let coord = Subspace::coordinate(4, &[0, 1], b.field()).unwrap();
        let out = coordinate_witness(&b, &coord).unwrap();
        assert_eq!(out.w, vec![1, 2]);
        assert_eq!(out.rank_sum, out.boundary);
        let v = Subspace::span_prime(&[vec![1, 1, 0, 0]], 2).unwrap();
        let out = coordinate_witness(&b, &v).unwrap();
        assert_eq!(out.w.len(), 1);
        assert_eq!(out.boundary, 2);
        assert_eq!(out.rank_sum, 4);
    }

    #[test]
    fn small_suites_pass() {
        let u = haar_unitary_tuple(6, 3, 1).unwrap();
        let e = eq16_identity_suite(&u, 40, 2).unwrap();
        assert!(e.passed);
        assert!(e.worst_margin.unwrap() > 6e-9 - 1e-10);
        assert!(norm_rank_suite(&u, 20, 2).unwrap().passed);
        assert!(prop31_pointwise_suite(&u, 20, 2).unwrap().passed);
        let id = identity_tuple(4, 2).unwrap();
        assert!(eq16_identity_suite(&id, 10, 0).unwrap().passed);
        let f = random_prime_tuple(5, 2, 2, false, 9).unwrap();
        let rep = prop31_exhaustive(&f).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.cases, 186);
    }

    #[test]
    fn graph_checks() {
        assert!(thm15_spectrum_check(&Graph::complete(2)).unwrap().passed);
        assert!(thm15_spectrum_check(&Graph::cycle(4)).unwrap().passed);
        let c4 = thm16_exact_check(&Graph::cycle(4), 2).unwrap();
        assert!(c4.passed, "{:?}", c4.details);
        let rep = graph_suites_exhaustive(&Graph::cycle(4), 2).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.cases, 2 * 67);
    }

    #[test]
    fn prop19_passes() {
        assert!(prop19_check(200).unwrap().passed);
    }

    #[test]
    fn batteries_small() {
        let rep = dimension_sandwich_battery(3, 4, 2, 2, 1).unwrap();
        assert!(rep.passed);
        assert!(pointwise_battery(20, 3).unwrap().passed);
        assert!(cheeger_battery(3, 3, 60, 4).unwrap().passed);
        let graphs = random_regular_graphs(3, 3, &[4, 6], 5).unwrap();
        assert!(thm15_battery(&graphs).unwrap().passed);
        assert!(thm16_battery(&graphs[..2], 3).unwrap().passed);
    }

    #[test]
    fn complete_graph_values() {
        for n in 2..=6 {
            let b = graphical_tuple(&Graph::complete(n), FieldSpec::complex(), true).unwrap();
            let u = vec![c(1.0 / (n as f64).sqrt(), 0.0); n];
            let line = Subspace::span_complex(&[u], FieldSpec::complex()).unwrap();
            let at_line = quantum::quantum_edge_value(&b, &line).unwrap();
            assert!((at_line - (n - 1) as f64 / n as f64).abs() < 1e-12);
            for r in 1..=n / 2 {
                let idx: Vec<usize> = (0..r).collect();
                let v = Subspace::coordinate(n, &idx, FieldSpec::complex()).unwrap();
                let want = (n - r) as f64 / (n - 1) as f64;
                assert!((quantum::quantum_edge_value(&b, &v).unwrap() - want).abs() < 1e-12);
            }
            let est = quantum::quantum_edge_bracket(&b, 20_000, 1).unwrap();
            assert!((est.best_value - complete_graph_hq(n)).abs() < 1e-6, "n = {n}: {}", est.best_value);
        }
    }

    #[test]
    fn invertible_pairs_satisfy_the_sandwich() {
        for seed in 0..5 {
            let b = random_prime_tuple(5, 2, 2, true, seed).unwrap();
            let rep = exact_expansion_finite_field(&b, 2).unwrap();
            let (mu, hd) = (rep.mu.exact().unwrap(), rep.h_d.exact().unwrap());
            assert!(mu / Rational::from_integer(2) <= hd && hd <= mu);
        }
    }

    #[test]
    fn suite_is_thread_count_independent() {
        let u = haar_unitary_tuple(5, 2, 3).unwrap();
        let a = par::with_threads(1, || norm_rank_suite(&u, 12, 4).unwrap());
        let b = par::with_threads(3, || norm_rank_suite(&u, 12, 4).unwrap());
        assert_eq!(a, b);
    }
}
