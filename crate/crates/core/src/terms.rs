//! Cost functions as spin polynomials and the precomputed diagonal.
//!
//! A cost function is `f(s) = sum_k w_k * prod_{i in t_k} s_i` with `s_i` in
//! `{-1, +1}`. Basis index `k` encodes an assignment with qubit `q` stored in
//! bit `q` (least-significant bit is qubit 0) and spin `s_q = 1 - 2 * bit_q(k)`.
//! A product of spins over a support is then the parity of `k & mask`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{alloc_filled, dimension, PAR_THRESHOLD};

/// One weighted spin product. An empty support is a constant offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    weight: f64,
    support: Vec<usize>,
    mask: u64,
}

impl Term {
    /// Builds a term from a weight and a set of qubit indices.
    ///
    /// Indices may be given in any order; duplicates are rejected.
    pub fn new(weight: f64, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        if !weight.is_finite() {
            return Err(Error::domain(format!("term weight {weight} is not finite")));
        }
        let mut support: Vec<usize> = indices.into_iter().collect();
        support.sort_unstable();
        if let Some(w) = support.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::domain(format!("duplicate qubit index {} in term", w[0])));
        }
        if let Some(&max) = support.last() {
            if max >= 64 {
                return Err(Error::domain(format!("qubit index {max} exceeds 63")));
            }
        }
        let mask = support.iter().fold(0u64, |m, &i| m | (1u64 << i));
        Ok(Self { weight, support, mask })
    }

    pub fn constant(weight: f64) -> Result<Self> {
        Self::new(weight, [])
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Strictly increasing qubit indices.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Bit mask with bit `i` set for every `i` in the support.
    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Smallest qubit count this term fits in.
    pub fn min_qubits(&self) -> usize {
        self.support.last().map_or(0, |&i| i + 1)
    }

    /// `weight * (-1)^popcount(k & mask)`, without range checks.
    #[inline(always)]
    pub(crate) fn value_at(&self, k: u64) -> f64 {
        let parity = ((k & self.mask).count_ones() & 1) as u64;
        f64::from_bits(self.weight.to_bits() ^ (parity << 63))
    }
}

/// A cost function on `n` qubits given as a list of terms.
///
/// Duplicate terms are kept and evaluated additively.
#[derive(Debug, Clone, PartialEq)]
pub struct TermPolynomial {
    n: usize,
    terms: Vec<Term>,
}

impl TermPolynomial {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("qubit count must be positive"));
        }
        if n > 63 {
            return Err(Error::domain(format!("{n} qubits exceeds the 63-qubit index limit")));
        }
        if let Some(t) = terms.iter().find(|t| t.min_qubits() > n) {
            return Err(Error::domain(format!(
                "term support {:?} does not fit in {n} qubits",
                t.support()
            )));
        }
        Ok(Self { n, terms })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// Convenience constructor from `(weight, indices)` pairs.
    pub fn from_pairs<I, S>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, S)>,
        S: IntoIterator<Item = usize>,
    {
        let terms = pairs
            .into_iter()
            .map(|(w, s)| Term::new(w, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Reads the JSON terms format `{"n": 3, "terms": [[w, [i, j]], ...]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: TermsFile = serde_json::from_str(s)?;
        Self::from_pairs(file.n, file.terms)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let file = TermsFile {
            n: self.n,
            terms: self.terms.iter().map(|t| (t.weight, t.support.clone())).collect(),
        };
        serde_json::to_string(&file).expect("terms always serialize")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermsFile {
    n: usize,
    terms: Vec<(f64, Vec<usize>)>,
}

fn check_index(n: usize, k: u64) -> Result<()> {
    if n < 64 && k >> n != 0 {
        return Err(Error::domain(format!("basis index {k} out of range for {n} qubits")));
    }
    Ok(())
}

/// Value of a single term at basis index `k` of an `n`-qubit register.
pub fn evaluate_term(term: &Term, n: usize, k: u64) -> Result<f64> {
    check_index(n, k)?;
    if term.min_qubits() > n {
        return Err(Error::domain(format!(
            "term support {:?} does not fit in {n} qubits",
            term.support()
        )));
    }
    Ok(term.value_at(k))
}

/// Direct evaluation of the polynomial at one basis index.
pub fn evaluate_polynomial(poly: &TermPolynomial, k: u64) -> Result<f64> {
    check_index(poly.n, k)?;
    Ok(poly.terms.iter().fold(0.0, |acc, t| acc + t.value_at(k)))
}

/// The diagonal of the cost operator: `f` at every basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector {
    n: usize,
    values: Vec<f64>,
}

impl CostVector {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::domain(format!(
                "cost vector length {len} is not a power of two >= 2"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("cost vector contains non-finite values"));
        }
        Ok(Self { n: len.trailing_zeros() as usize, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        crate::statevec::chunked_sum(&self.values, |&c| c) / self.values.len() as f64
    }
}

/// Accumulates `poly` into `out`, whose element `j` is basis index `start + j`.
///
/// Every element is written only by the worker that owns it and its terms are
/// summed in list order, so the result is independent of the thread count.
pub fn accumulate_terms(poly: &TermPolynomial, start: u64, out: &mut [f64]) {
    const CHUNK: usize = 1 << 12;
    let fill = |offset: usize, chunk: &mut [f64]| {
        let base = start + offset as u64;
        for term in &poly.terms {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v += term.value_at(base + j as u64);
            }
        }
    };
    if out.len() >= PAR_THRESHOLD {
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| fill(c * CHUNK, chunk));
    } else {
        out.chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| fill(c * CHUNK, chunk));
    }
}

/// Precomputes `f(k)` for every basis index. Allocates exactly one `2^n` array.
pub fn precompute_cost_vector(poly: &TermPolynomial) -> Result<CostVector> {
    let dim = dimension(poly.n)?;
    let mut values = alloc_filled(dim, 0.0f64, "cost vector", poly.n)?;
    accumulate_terms(poly, 0, &mut values);
    Ok(CostVector { n: poly.n, values })
}

/// Costs stored as 16-bit levels: `cost = scale * level + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactCostVector {
    n: usize,
    values: Vec<u16>,
    scale: f64,
    offset: f64,
}

impl CompactCostVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[u16] {
        &self.values
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.scale * f64::from(self.values[k]) + self.offset
    }

    pub fn decode(&self) -> CostVector {
        CostVector {
            n: self.n,
            values: (0..self.values.len()).map(|k| self.get(k)).collect(),
        }
    }
}

/// Packs a cost vector into 16-bit levels, or rejects it if that would lose
/// information. Unit scale is tried first, then the smallest nonzero gap.
pub fn compact_costs(costs: &CostVector) -> Result<CompactCostVector> {
    let offset = costs.min();
    let try_scale = |scale: f64| -> Option<Vec<u16>> {
        costs
            .values
            .iter()
            .map(|&c| {
                let level = ((c - offset) / scale).round();
                if !(0.0..=f64::from(u16::MAX)).contains(&level) {
                    return None;
                }
                (scale * level + offset == c).then_some(level as u16)
            })
            .collect()
    };

    if let Some(values) = try_scale(1.0) {
        return Ok(CompactCostVector { n: costs.n, values, scale: 1.0, offset });
    }
    let gap = costs
        .values
        .iter()
        .map(|&c| c - offset)
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if gap.is_finite() {
        if let Some(values) = try_scale(gap) {
            return Ok(CompactCostVector { n: costs.n, values, scale: gap, offset });
        }
    }
    Err(Error::NotRepresentable(format!(
        "range [{offset}, {}] does not fit 65536 exact levels",
        costs.max()
    )))
}
