//! Exact expansion parameters of small regular graphs.
//!
//! Edge and vertex expansion are minimized over every vertex subset `W` with
//! `1 <= |W| <= n/2` by walking the reflected Gray code, so each step toggles
//! one vertex and the boundary counts update in `O(deg)`. The code sequence
//! is split into fixed blocks that are scanned in parallel and reduced with a
//! deterministic min (ties go to the lexicographically smallest vertex set).

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::par;
use crate::rng::Rng;
use crate::tuple::MatrixTuple;

pub type Rational = Ratio<i64>;

/// Default cap on `n` for exhaustive subset enumeration.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 20;

/// Undirected simple graph on vertices `0..n` (1-indexed in files and
/// reports).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from 0-based edges. Loops and duplicate edges are
    /// rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut set = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Shape(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::Shape(format!("loop at vertex {}", u + 1)));
            }
            let key = (u.min(v), u.max(v));
            if !set.insert(key) {
                return Err(Error::Shape(format!(
                    "duplicate edge {{{}, {}}}",
                    key.0 + 1,
                    key.1 + 1
                )));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Graph { n, edges: set, adj })
    }

    /// Parses `"n m"` followed by `m` lines `"u v"` (1-indexed).
    pub fn parse(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for (k, line) in lines.enumerate() {
            let (u, v) = parse_pair(line)?;
            if u == 0 || v == 0 {
                return Err(Error::Parse(format!("line {}: vertices are 1-indexed", k + 2)));
            }
            edges.push((u - 1, v - 1));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!("header declares {m} edges, found {}", edges.len())));
        }
        Graph::new(n, &edges).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_file_string(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            s.push_str(&format!("{} {}\n", u + 1, v + 1));
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unordered edges as 0-based pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Ordered adjacent pairs `(i, j)`, sorted.
    pub fn ordered_pairs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .edges
            .iter()
            .flat_map(|&(u, v)| [(u, v), (v, u)])
            .collect();
        out.sort_unstable();
        out
    }

    /// The common degree, or `RegularityError`.
    pub fn degree(&self) -> Result<usize> {
        let d = self.adj.first().map_or(0, Vec::len);
        if let Some(v) = (0..self.n).find(|&v| self.adj[v].len() != d) {
            return Err(Error::Regularity(format!(
                "vertex {} has degree {}, vertex 1 has degree {d}",
                v + 1,
                self.adj[v].len()
            )));
        }
        if d == 0 {
            return Err(Error::Regularity("graph has no edges".into()));
        }
        Ok(d)
    }

    /// `|boundary(W)|` for a 0-based vertex set.
    pub fn edge_boundary(&self, w: &[usize]) -> usize {
        let inside: BTreeSet<usize> = w.iter().copied().collect();
        self.edges
            .iter()
            .filter(|(u, v)| inside.contains(u) != inside.contains(v))
            .count()
    }

    /// Vertices outside `W` adjacent to `W` (0-based).
    pub fn out_boundary(&self, w: &[usize]) -> BTreeSet<usize> {
        let inside: BTreeSet<usize> = w.iter().copied().collect();
        w.iter()
            .flat_map(|&v| self.adj[v].iter().copied())
            .filter(|u| !inside.contains(u))
            .collect()
    }

    /// Normalized adjacency matrix `A` with `A_ij = 1/d` on edges.
    pub fn normalized_adjacency(&self) -> Result<DMatrix<f64>> {
        let d = self.degree()? as f64;
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0 / d;
            a[(v, u)] = 1.0 / d;
        }
        Ok(a)
    }

    pub fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Graph::new(n, &edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "cycles need at least three vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges).expect("cycle is simple")
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n;
        let edges: Vec<_> = self
            .edges()
            .chain(other.edges().map(|(u, v)| (u + shift, v + shift)))
            .collect();
        Graph::new(self.n + other.n, &edges).expect("union of simple graphs is simple")
    }

    /// Uniform-ish random `d`-regular simple graph by the pairing model with
    /// rejection.
    pub fn random_regular(n: usize, d: usize, rng: &mut Rng) -> Result<Graph> {
        if n * d % 2 == 1 || d >= n {
            return Err(Error::Config(format!("no simple {d}-regular graph on {n} vertices")));
        }
        for _ in 0..10_000 {
            let mut points: Vec<usize> = (0..n * d).map(|k| k / d).collect();
            points.shuffle(rng);
            let edges: Vec<(usize, usize)> = points.chunks(2).map(|c| (c[0], c[1])).collect();
            if let Ok(g) = Graph::new(n, &edges) {
                return Ok(g);
            }
        }
        Err(Error::Sampling("pairing model kept producing multigraphs".into()))
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|e| Error::Parse(format!("'{t}': {e}")))
    });
    let a = it.next().ok_or_else(|| Error::Parse(format!("expected two integers in '{line}'")))??;
    let b = it.next().ok_or_else(|| Error::Parse(format!("expected two integers in '{line}'")))??;
    if it.next().is_some() {
        return Err(Error::Parse(format!("trailing tokens in '{line}'")));
    }
    Ok((a, b))
}

/// Minimum ratio with its witness, as 1-indexed sorted vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactMin {
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub value: Rational,
    pub witness: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Cand {
    num: i64,
    den: i64,
    mask: u64,
}

impl Cand {
    fn better_than(&self, other: &Option<Cand>) -> bool {
        match other {
            None => true,
            Some(o) => {
                let lhs = self.num as i128 * o.den as i128;
                let rhs = o.num as i128 * self.den as i128;
                lhs < rhs || (lhs == rhs && lex_less(self.mask, o.mask))
            }
        }
    }
}

/// Lexicographic comparison of the sorted vertex lists encoded by two masks.
fn lex_less(a: u64, b: u64) -> bool {
    let (mut a, mut b) = (a, b);
    loop {
        match (a, b) {
            (0, 0) => return false,
            (0, _) => return true,
            (_, 0) => return false,
            _ => {
                let (ta, tb) = (a.trailing_zeros(), b.trailing_zeros());
                if ta != tb {
                    return ta < tb;
                }
                a &= a - 1;
                b &= b - 1;
            }
        }
    }
}

fn mask_to_vertices(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

struct Scan {
    h: Option<Cand>,
    mu: Option<Cand>,
}

const BLOCK_BITS: u32 = 12;

/// Scans Gray codes `g(k)` for `k` in `[start, end)`.
fn scan_block(g: &Graph, d: i64, start: u64, end: u64) -> Scan {
    let n = g.n;
    let half = (n / 2) as u32;
    let adj_mask: Vec<u64> = (0..n)
        .map(|v| g.adj[v].iter().fold(0u64, |m, &u| m | 1 << u))
        .collect();
    let gray = |k: u64| k ^ (k >> 1);

    let mut w = gray(start);
    // neighbor counts into W, edge boundary and out-boundary sizes
    let mut cnt = vec![0i64; n];
    for v in 0..n {
        cnt[v] = (adj_mask[v] & w).count_ones() as i64;
    }
    let mut boundary: i64 = (0..n)
        .filter(|&v| w >> v & 1 == 1)
        .map(|v| (adj_mask[v] & !w).count_ones() as i64)
        .sum();
    let mut out: i64 = (0..n)
        .filter(|&v| w >> v & 1 == 0 && cnt[v] > 0)
        .count() as i64;

    let mut best = Scan { h: None, mu: None };
    let mut k = start;
    loop {
        let size = w.count_ones();
        if size >= 1 && size <= half {
            let s = size as i64;
            let ch = Cand {
                num: boundary,
                den: d * s,
                mask: w,
            };
            if ch.better_than(&best.h) {
                best.h = Some(ch);
            }
            let cm = Cand {
                num: out,
                den: s,
                mask: w,
            };
            if cm.better_than(&best.mu) {
                best.mu = Some(cm);
            }
        }
        k += 1;
        if k >= end {
            break;
        }
        let v = k.trailing_zeros() as usize;
        let bit = 1u64 << v;
        let nb_in = cnt[v];
        if w & bit == 0 {
            // add v
            if nb_in > 0 {
                out -= 1;
            }
            boundary += g.adj[v].len() as i64 - 2 * nb_in;
            w |= bit;
            for &u in &g.adj[v] {
                cnt[u] += 1;
                if cnt[u] == 1 && w >> u & 1 == 0 {
                    out += 1;
                }
            }
        } else {
            w &= !bit;
            boundary -= g.adj[v].len() as i64 - 2 * nb_in;
            for &u in &g.adj[v] {
                cnt[u] -= 1;
                if cnt[u] == 0 && w >> u & 1 == 0 {
                    out -= 1;
                }
            }
            if nb_in > 0 {
                out += 1;
            }
        }
        debug_assert_eq!(w, gray(k));
    }
    best
}

fn exhaustive(g: &Graph, limit: usize) -> Result<(ExactMin, ExactMin)> {
    let d = g.degree()? as i64;
    if g.n > limit || g.n > 63 {
        return Err(Error::SizeLimit(format!(
            "exhaustive enumeration limited to n <= {limit}, got n = {}",
            g.n
        )));
    }
    if g.n < 2 {
        return Err(Error::Dimension("need at least two vertices".into()));
    }
    let total = 1u64 << g.n;
    let block = 1u64 << BLOCK_BITS.min(g.n as u32);
    let blocks = (total / block) as usize;
    let scans = par::map_range(blocks, |b| {
        let start = b as u64 * block;
        scan_block(g, d, start, start + block)
    });
    let mut h: Option<Cand> = None;
    let mut mu: Option<Cand> = None;
    for s in scans {
        if let Some(c) = s.h {
            if c.better_than(&h) {
                h = Some(c);
            }
        }
        if let Some(c) = s.mu {
            if c.better_than(&mu) {
                mu = Some(c);
            }
        }
    }
    let to_min = |c: Cand| ExactMin {
        value: Rational::new(c.num, c.den),
        witness: mask_to_vertices(c.mask),
    };
    Ok((
        to_min(h.expect("n >= 2 gives a feasible W")),
        to_min(mu.expect("n >= 2 gives a feasible W")),
    ))
}

/// `h(G) = min |boundary W| / (d |W|)` over `1 <= |W| <= n/2`.
pub fn edge_expansion(g: &Graph, limit: usize) -> Result<ExactMin> {
    Ok(exhaustive(g, limit)?.0)
}

/// `mu(G) = min |out-boundary W| / |W|` over `1 <= |W| <= n/2`.
pub fn vertex_expansion(g: &Graph, limit: usize) -> Result<ExactMin> {
    Ok(exhaustive(g, limit)?.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Spectral {
    /// Second-smallest eigenvalue of `L = I - A`.
    pub lambda_eig: f64,
    /// `1 - sigma_2(A)`, singular values sorted descending.
    pub lambda_sv: f64,
}

/// Eigenvalues of the normalized adjacency matrix, ascending.
pub fn adjacency_spectrum(g: &Graph) -> Result<Vec<f64>> {
    let a = g.normalized_adjacency()?;
    let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn spectral_expansion(g: &Graph) -> Result<Spectral> {
    if g.n < 2 {
        return Err(Error::Dimension("need at least two vertices".into()));
    }
    let ev = adjacency_spectrum(g)?;
    // eigenvalues of L are 1 - eig(A); second smallest of L <-> second largest of A
    let lambda_eig = 1.0 - ev[ev.len() - 2];
    let mut sv: Vec<f64> = ev.iter().map(|x| x.abs()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let lambda_sv = 1.0 - sv[1];
    Ok(Spectral {
        lambda_eig,
        lambda_sv,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphExpansionReport {
    pub n: usize,
    pub degree: usize,
    pub h: Option<ExactMin>,
    pub mu: Option<ExactMin>,
    pub spectral: Option<Spectral>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GraphMetrics {
    pub h: bool,
    pub mu: bool,
    pub lambda: bool,
}

pub fn expansion_report(g: &Graph, metrics: GraphMetrics, limit: usize) -> Result<GraphExpansionReport> {
    let degree = g.degree()?;
    let (h, mu) = if metrics.h || metrics.mu {
        let (h, mu) = exhaustive(g, limit)?;
        (metrics.h.then_some(h), metrics.mu.then_some(mu))
    } else {
        (None, None)
    };
    let spectral = if metrics.lambda {
        Some(spectral_expansion(g)?)
    } else {
        None
    };
    Ok(GraphExpansionReport {
        n: g.n,
        degree,
        h,
        mu,
        spectral,
    })
}

/// Both chains of the classical relations, the first exactly, the second
/// with absolute slack `1e-9`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphRelationsReport {
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub h: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub mu: Rational,
    pub d: usize,
    pub lambda_eig: f64,
    pub lambda_sv: f64,
    pub vertex_edge_holds: bool,
    pub cheeger_holds: bool,
}

impl GraphRelationsReport {
    pub fn passed(&self) -> bool {
        self.vertex_edge_holds && self.cheeger_holds
    }
}

pub fn check_graph_relations(g: &Graph) -> Result<GraphRelationsReport> {
    let d = g.degree()?;
    let (h, mu) = exhaustive(g, DEFAULT_EXHAUSTIVE_LIMIT)?;
    let sp = spectral_expansion(g)?;
    let (h, mu) = (h.value, mu.value);
    let vertex_edge_holds = mu / Rational::from_integer(d as i64) <= h && h <= mu;
    let hf = *h.numer() as f64 / *h.denom() as f64;
    let tol = 1e-9;
    let cheeger_holds =
        sp.lambda_eig / 2.0 <= hf + tol && hf <= (2.0 * sp.lambda_eig).max(0.0).sqrt() + tol;
    Ok(GraphRelationsReport {
        h,
        mu,
        d,
        lambda_eig: sp.lambda_eig,
        lambda_sv: sp.lambda_sv,
        vertex_edge_holds,
        cheeger_holds,
    })
}

/// Permutation matrix with `P e_v = e_{sigma(v)}`.
pub fn permutation_matrix(sigma: &[usize]) -> CMat {
    let n = sigma.len();
    let mut m = CMat::zeros(n, n);
    for (v, &w) in sigma.iter().enumerate() {
        m[(w, v)] = c(1.0, 0.0);
    }
    m
}

/// Decomposes a regular graph into permutations.
///
/// For even `d` the graph is oriented along Euler circuits of its components;
/// the resulting `d/2`-regular bipartite out/in graph splits into `d/2`
/// perfect matchings `sigma_k`, and the tuple is
/// `(P_1, P_1^t, ..., P_{d/2}, P_{d/2}^t)`. For odd `d` an explicit list of
/// `d` permutations (0-based images) must be supplied.
pub fn graph_to_permutation_tuple(
    g: &Graph,
    decomposition: Option<&[Vec<usize>]>,
) -> Result<MatrixTuple> {
    let d = g.degree()?;
    let perms: Vec<Vec<usize>> = match decomposition {
        Some(perms) => {
            check_decomposition(g, d, perms)?;
            perms.to_vec()
        }
        None if d % 2 == 1 => {
            return Err(Error::Unsupported(format!(
                "degree {d} is odd; supply an explicit permutation decomposition"
            )))
        }
        None => {
            let sigmas = euler_two_factorization(g)?;
            sigmas
                .into_iter()
                .flat_map(|s| {
                    let mut inv = vec![0; s.len()];
                    for (v, &w) in s.iter().enumerate() {
                        inv[w] = v;
                    }
                    [s, inv]
                })
                .collect()
        }
    };
    MatrixTuple::complex(perms.iter().map(|s| permutation_matrix(s)).collect())
}

fn check_decomposition(g: &Graph, d: usize, perms: &[Vec<usize>]) -> Result<()> {
    if perms.len() != d {
        return Err(Error::Validation(format!(
            "expected {d} permutations, got {}",
            perms.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for s in perms {
        let mut hit = vec![false; g.n];
        if s.len() != g.n {
            return Err(Error::Validation("permutation has wrong length".into()));
        }
        for (v, &w) in s.iter().enumerate() {
            if w >= g.n || hit[w] {
                return Err(Error::Validation("not a permutation".into()));
            }
            hit[w] = true;
            if !g.has_edge(v, w) {
                return Err(Error::Validation(format!(
                    "pair ({}, {}) is not an edge",
                    v + 1,
                    w + 1
                )));
            }
            seen.insert((v.min(w), v.max(w)));
        }
    }
    if seen.len() != g.edge_count() {
        return Err(Error::Validation("permutations do not cover every edge".into()));
    }
    Ok(())
}

/// Returns `d/2` permutations whose functional graphs partition an Euler
/// orientation of `g`.
fn euler_two_factorization(g: &Graph) -> Result<Vec<Vec<usize>>> {
    let n = g.n;
    let d = g.degree()?;
    // Hierholzer on every component, consuming edges
    let mut remaining: Vec<BTreeSet<usize>> = g.adj.iter().map(|a| a.iter().copied().collect()).collect();
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for start in 0..n {
        if remaining[start].is_empty() {
            continue;
        }
        let mut stack = vec![start];
        let mut circuit = Vec::new();
        while let Some(&v) = stack.last() {
            if let Some(&u) = remaining[v].iter().next() {
                remaining[v].remove(&u);
                remaining[u].remove(&v);
                stack.push(u);
            } else {
                circuit.push(v);
                stack.pop();
            }
        }
        circuit.reverse();
        for pair in circuit.windows(2) {
            out_edges[pair[0]].push(pair[1]);
        }
    }
    let half = d / 2;
    if out_edges.iter().any(|o| o.len() != half) {
        return Err(Error::Internal("Euler orientation is unbalanced".into()));
    }
    // peel perfect matchings off the half-regular bipartite graph
    let mut sigmas = Vec::with_capacity(half);
    for _ in 0..half {
        let matching = perfect_matching(n, &out_edges)
            .ok_or_else(|| Error::Internal("regular bipartite graph without a perfect matching".into()))?;
        for (v, &w) in matching.iter().enumerate() {
            let pos = out_edges[v].iter().position(|&x| x == w).expect("matched edge exists");
            out_edges[v].swap_remove(pos);
        }
        sigmas.push(matching);
    }
    Ok(sigmas)
}

/// Kuhn's augmenting-path matching from left vertices to right vertices.
fn perfect_matching(n: usize, adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; n];
    fn augment(
        v: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &w in &adj[v] {
            if seen[w] {
                continue;
            }
            seen[w] = true;
            if match_right[w].is_none_or(|u| augment(u, adj, seen, match_right)) {
                match_right[w] = Some(v);
                return true;
            }
        }
        false
    }
    for v in 0..n {
        let mut seen = vec![false; n];
        if !augment(v, adj, &mut seen, &mut match_right) {
            return None;
        }
    }
    let mut sigma = vec![0; n];
    for (w, v) in match_right.iter().enumerate() {
        sigma[v.expect("perfect")] = w;
    }
    Some(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    /// Direct enumeration without Gray codes or incremental counts.
    fn brute(g: &Graph) -> (Rational, Rational) {
        let d = g.degree().unwrap() as i64;
        let mut h: Option<Rational> = None;
        let mut mu: Option<Rational> = None;
        for mask in 1u64..(1 << g.n()) {
            let w: Vec<usize> = (0..g.n()).filter(|&i| mask >> i & 1 == 1).collect();
            if w.len() > g.n() / 2 {
                continue;
            }
            let eh = r(g.edge_boundary(&w) as i64, d * w.len() as i64);
            let em = r(g.out_boundary(&w).len() as i64, w.len() as i64);
            h = Some(h.map_or(eh, |x| x.min(eh)));
            mu = Some(mu.map_or(em, |x| x.min(em)));
        }
        (h.unwrap(), mu.unwrap())
    }

    #[test]
    fn small_graph_values() {
        let k2 = Graph::complete(2);
        assert_eq!(edge_expansion(&k2, 20).unwrap().value, r(1, 1));
        assert_eq!(vertex_expansion(&k2, 20).unwrap().value, r(1, 1));

        let c4 = Graph::cycle(4);
        let h = edge_expansion(&c4, 20).unwrap();
        assert_eq!(h.value, r(1, 2));
        assert_eq!(h.witness, vec![1, 2]);
        let mu = vertex_expansion(&c4, 20).unwrap();
        assert_eq!(mu.value, r(1, 1));
        assert_eq!(mu.witness, vec![1, 2]);

        let k4 = Graph::complete(4);
        let h = edge_expansion(&k4, 20).unwrap();
        assert_eq!(h.value, r(2, 3));
        assert_eq!(h.witness, vec![1, 2]);
        assert_eq!(vertex_expansion(&k4, 20).unwrap().value, r(1, 1));
    }

    #[test]
    fn gray_scan_matches_brute_force() {
        let mut rng = stream(11, "graphs", &[]);
        for (n, d) in [(6, 3), (8, 3), (10, 4), (13, 4), (14, 3)] {
            let g = Graph::random_regular(n, d, &mut rng).unwrap();
            let (h, mu) = exhaustive(&g, 20).unwrap();
            let (bh, bmu) = brute(&g);
            assert_eq!(h.value, bh, "h for n={n}");
            assert_eq!(mu.value, bmu, "mu for n={n}");
            let wh: Vec<usize> = h.witness.iter().map(|v| v - 1).collect();
            assert_eq!(r(g.edge_boundary(&wh) as i64, (d * wh.len()) as i64), h.value);
        }
    }

    #[test]
    fn spectra() {
        let k2 = spectral_expansion(&Graph::complete(2)).unwrap();
        assert!((k2.lambda_eig - 2.0).abs() < 1e-12);
        assert!(k2.lambda_sv.abs() < 1e-12);
        let c4 = spectral_expansion(&Graph::cycle(4)).unwrap();
        assert!((c4.lambda_eig - 1.0).abs() < 1e-12);
        let k4 = spectral_expansion(&Graph::complete(4)).unwrap();
        assert!((k4.lambda_eig - 4.0 / 3.0).abs() < 1e-12);
        assert!((k4.lambda_sv - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn relations_hold_on_examples() {
        for g in [Graph::complete(2), Graph::cycle(4), Graph::complete(4)] {
            assert!(check_graph_relations(&g).unwrap().passed());
        }
        let rep = check_graph_relations(&Graph::complete(4)).unwrap();
        assert_eq!(rep.mu / Rational::from_integer(3), r(1, 3));
    }

    #[test]
    fn errors() {
        let path = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(edge_expansion(&path, 20), Err(Error::Regularity(_))));
        let big = Graph::cycle(22);
        assert!(matches!(edge_expansion(&big, 20), Err(Error::SizeLimit(_))));
        assert!(Graph::new(2, &[(0, 0)]).is_err());
        assert!(Graph::new(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn parse_roundtrip() {
        let g = Graph::parse("4 4\n1 2\n2 3\n3 4\n4 1\n").unwrap();
        assert_eq!(g, Graph::cycle(4));
        assert_eq!(Graph::parse(&g.to_file_string()).unwrap(), g);
        assert!(Graph::parse("3 2\n1 2\n").is_err());
        assert!(Graph::parse("3 1\n0 2\n").is_err());
        assert!(Graph::parse("x y").is_err());
    }

    fn perm_of(m: &CMat) -> Vec<usize> {
        (0..m.ncols())
            .map(|j| (0..m.nrows()).find(|&i| m[(i, j)].re == 1.0).unwrap())
            .collect()
    }

    #[test]
    fn permutation_tuples() {
        let c4 = Graph::cycle(4);
        let t = graph_to_permutation_tuple(&c4, None).unwrap();
        assert_eq!(t.d(), 2);
        let mats = t.complex_matrices().unwrap();
        assert_eq!(mats[1], mats[0].transpose());
        let s = perm_of(&mats[0]);
        // a single 4-cycle along the graph
        let mut v = 0;
        for _ in 0..4 {
            assert!(c4.has_edge(v, s[v]));
            v = s[v];
        }
        assert_eq!(v, 0);
        assert!((1..4).all(|k| {
            let mut x = 0;
            for _ in 0..k {
                x = s[x];
            }
            x != 0
        }));

        assert!(matches!(
            graph_to_permutation_tuple(&Graph::complete(2), None),
            Err(Error::Unsupported(_))
        ));
        let k2 = graph_to_permutation_tuple(&Graph::complete(2), Some(&[vec![1, 0]])).unwrap();
        assert_eq!(k2.d(), 1);

        let two_triangles = Graph::cycle(3).disjoint_union(&Graph::cycle(3));
        let t = graph_to_permutation_tuple(&two_triangles, None).unwrap();
        assert_eq!(t.d(), 2);
        for m in t.complex_matrices().unwrap() {
            let s = perm_of(m);
            for v in 0..6 {
                // each orbit is a 3-cycle inside one component
                assert_eq!(s[s[s[v]]], v);
                assert_ne!(s[v], v);
                assert_eq!(s[v] / 3, v / 3);
            }
        }
    }

    #[test]
    fn euler_route_covers_edges_for_random_even_degree() {
        let mut rng = stream(5, "graphs", &[]);
        for (n, d) in [(7, 4), (8, 4), (10, 2), (11, 4)] {
            let g = Graph::random_regular(n, d, &mut rng).unwrap();
            let t = graph_to_permutation_tuple(&g, None).unwrap();
            assert_eq!(t.d(), d);
            let mut covered = BTreeSet::new();
            for m in t.complex_matrices().unwrap() {
                for (v, w) in perm_of(m).into_iter().enumerate() {
                    assert!(g.has_edge(v, w));
                    covered.insert((v.min(w), v.max(w)));
                }
            }
            assert_eq!(covered.len(), g.edge_count());
            assert!(t.is_unitary());
        }
    }
}
