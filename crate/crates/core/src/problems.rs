//! Benchmark problems (MaxCut and LABS) and their direct energy oracles.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::terms::{Term, TermPolynomial};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected graph with `u < v` on every edge and no duplicate edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Validates and normalizes a weighted edge list. Endpoint order is
    /// normalized to `u < v`; self-loops and repeated edges are errors.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, weight) in edges {
            if a == b {
                return Err(Error::domain(format!("self-loop on vertex {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n {
                return Err(Error::domain(format!("edge ({a}, {b}) outside {n} vertices")));
            }
            if !weight.is_finite() {
                return Err(Error::domain(format!("edge ({a}, {b}) has non-finite weight")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::domain(format!("duplicate edge ({u}, {v})")));
            }
            out.push(Edge { u, v, weight });
        }
        Ok(Self { n, edges: out })
    }

    pub fn unweighted(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn triangle() -> Self {
        Self::unweighted(3, [(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    /// Cycle `0-1-...-(n-1)-0`.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain("ring graph needs at least 3 vertices"));
        }
        Self::unweighted(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("complete graph needs at least 2 vertices"));
        }
        Self::unweighted(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// A 3-regular graph: the cycle on `n` vertices plus the `n/2` diameters
    /// (the Möbius ladder). Requires even `n >= 4`.
    pub fn three_regular(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::domain("3-regular ladder needs an even vertex count >= 4"));
        }
        let cycle = (0..n).map(|i| (i, (i + 1) % n));
        let chords = (0..n / 2).map(|i| (i, i + n / 2));
        Self::unweighted(n, cycle.chain(chords))
    }

    /// Parses an edge list with one `u v [weight]` per line. Blank lines and
    /// lines starting with `#` are skipped. Without `n`, the vertex count is
    /// the largest index plus one.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: lineno + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(parse_err(format!("expected `u v [weight]`, got {line:?}")));
            }
            let vertex = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| parse_err(format!("bad vertex {s:?}: {e}")))
            };
            let u = vertex(fields[0])?;
            let v = vertex(fields[1])?;
            let w = match fields.get(2) {
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("bad weight {s:?}: {e}")))?,
                None => 1.0,
            };
            edges.push((u, v, w));
        }
        let inferred = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
        let n = n.unwrap_or(inferred);
        if n == 0 {
            return Err(Error::domain("graph has no vertices"));
        }
        Self::new(n, edges)
    }

    pub fn from_file(path: impl AsRef<Path>, n: Option<usize>) -> Result<Self> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }
}

/// MaxCut as a spin polynomial: `sum_e w_e/2 * s_u s_v - sum_e w_e/2`.
/// For unit weights this is minus the cut size.
pub fn maxcut_terms(graph: &Graph) -> Result<TermPolynomial> {
    let mut terms = graph
        .edges
        .iter()
        .map(|e| Term::new(0.5 * e.weight, [e.u, e.v]))
        .collect::<Result<Vec<_>>>()?;
    if !terms.is_empty() {
        terms.push(Term::constant(-0.5 * graph.total_weight())?);
    }
    TermPolynomial::new(graph.n, terms)
}

/// Number of edges whose endpoints fall on different sides of `k`.
pub fn cut_size(graph: &Graph, k: u64) -> usize {
    graph
        .edges
        .iter()
        .filter(|e| ((k >> e.u) ^ (k >> e.v)) & 1 == 1)
        .count()
}

/// LABS objective as a spin polynomial over `n` variables (0-based).
///
/// Four-spin terms `2 * s_i s_{i+t} s_{i+k} s_{i+k+t}` and two-spin terms
/// `s_i s_{i+2k}`; the sidelobe energy is `2 f + n(n-1)/2`.
pub fn labs_terms(n: usize) -> Result<TermPolynomial> {
    if n < 2 {
        return Err(Error::domain("LABS needs at least 2 variables"));
    }
    let mut terms = Vec::new();
    // 1-based loop bounds, shifted to 0-based indices on emission.
    for i in 1..=n.saturating_sub(3) {
        for t in 1..=(n - i - 1) / 2 {
            for k in t + 1..=n - i - t {
                terms.push(Term::new(2.0, [i - 1, i + t - 1, i + k - 1, i + k + t - 1])?);
            }
        }
    }
    for i in 1..=n - 2 {
        for k in 1..=(n - i) / 2 {
            terms.push(Term::new(1.0, [i - 1, i + 2 * k - 1])?);
        }
    }
    TermPolynomial::new(n, terms)
}

/// Sidelobe energy `sum_t C_t^2` with `C_t = sum_i s_i s_{i+t}`.
pub fn labs_energy(k: u64, n: usize) -> i64 {
    let spin = |i: usize| 1 - 2 * ((k >> i) & 1) as i64;
    (1..n)
        .map(|t| {
            let c: i64 = (0..n - t).map(|i| spin(i) * spin(i + t)).sum();
            c * c
        })
        .sum()
}

/// `n(n-1)/2`, the constant relating the LABS polynomial to the sidelobe energy.
pub fn labs_offset(n: usize) -> i64 {
    (n * (n - 1) / 2) as i64
}
