//! State-vector storage, the diagonal phase operator, and observables.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::terms::{CompactCostVector, CostVector};
use crate::{alloc_filled, dimension, PAR_THRESHOLD};

const SUM_CHUNK: usize = 1 << 12;

/// Sum of `f(i)` for `i in 0..len`, reduced in fixed-size chunks so the
/// result does not depend on the rayon thread count.
pub(crate) fn chunked_sum_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = len.div_ceil(SUM_CHUNK);
    let partial = |c: usize| -> f64 { (c * SUM_CHUNK..len.min((c + 1) * SUM_CHUNK)).map(&f).sum() };
    let partials: Vec<f64> = if len >= PAR_THRESHOLD {
        (0..chunks).into_par_iter().map(partial).collect()
    } else {
        (0..chunks).map(partial).collect()
    };
    partials.into_iter().sum()
}

pub(crate) fn chunked_sum<T: Sync>(xs: &[T], f: impl Fn(&T) -> f64 + Sync) -> f64 {
    chunked_sum_by(xs.len(), |i| f(&xs[i]))
}

/// `2^n` complex amplitudes; qubit `q` is bit `q` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|+>^n`: every amplitude `2^(-n/2)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("qubit count must be positive"));
        }
        let dim = dimension(n)?;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self { n, amps: alloc_filled(dim, amp, "state", n)? })
    }

    /// Computational basis state `|k>`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("qubit count must be positive"));
        }
        let dim = dimension(n)?;
        if k >= dim {
            return Err(Error::domain(format!("basis index {k} out of range for {n} qubits")));
        }
        let mut amps = alloc_filled(dim, Complex64::new(0.0, 0.0), "state", n)?;
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Equal superposition over all bitstrings with exactly `weight` ones.
    /// The natural starting state for Hamming-weight-preserving mixers.
    pub fn hamming_weight_uniform(n: usize, weight: usize) -> Result<Self> {
        if weight > n {
            return Err(Error::domain(format!("weight {weight} exceeds {n} qubits")));
        }
        let mut state = Self::basis(n, 0)?;
        state.amps[0] = Complex64::new(0.0, 0.0);
        let count = state
            .amps
            .iter_mut()
            .enumerate()
            .filter(|(k, _)| k.count_ones() as usize == weight)
            .map(|(_, a)| *a = Complex64::new(1.0, 0.0))
            .count();
        let scale = (count as f64).sqrt().recip();
        state.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(state)
    }

    /// Wraps raw amplitudes. The length must be a power of two `>= 2`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::domain(format!("state length {len} is not a power of two >= 2")));
        }
        Ok(Self { n: len.trailing_zeros() as usize, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        chunked_sum(&self.amps, |a| a.norm_sqr())
    }

    fn check_costs(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: n });
        }
        Ok(())
    }

    /// Multiplies amplitude `k` by `exp(-i gamma c_k)`.
    pub fn apply_phase(&mut self, costs: &CostVector, gamma: f64) -> Result<()> {
        self.check_costs(costs.n())?;
        apply_phase_slice(&mut self.amps, costs.values(), gamma);
        Ok(())
    }

    /// Same as [`apply_phase`](Self::apply_phase) but reading 16-bit cost levels.
    pub fn apply_phase_compact(&mut self, costs: &CompactCostVector, gamma: f64) -> Result<()> {
        self.check_costs(costs.n())?;
        if gamma == 0.0 {
            return Ok(());
        }
        let kernel = |(k, a): (usize, &mut Complex64)| {
            *a *= Complex64::from_polar(1.0, -gamma * costs.get(k));
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter_mut().enumerate().for_each(kernel);
        } else {
            self.amps.iter_mut().enumerate().for_each(kernel);
        }
        Ok(())
    }

    /// `sum_k c_k |psi_k|^2`.
    pub fn expectation(&self, costs: &CostVector) -> Result<f64> {
        self.check_costs(costs.n())?;
        Ok(expectation_slice(&self.amps, costs.values()))
    }

    /// Probability of measuring a minimum-cost bitstring. All bitstrings tied
    /// at the minimum count.
    pub fn overlap(&self, costs: &CostVector) -> Result<f64> {
        self.overlap_with_tolerance(costs, 0.0)
    }

    /// Like [`overlap`](Self::overlap), treating costs within `tol` of the
    /// minimum as optimal.
    pub fn overlap_with_tolerance(&self, costs: &CostVector, tol: f64) -> Result<f64> {
        self.check_costs(costs.n())?;
        let threshold = costs.min() + tol;
        let c = costs.values();
        Ok(chunked_sum_by(self.amps.len(), |k| {
            if c[k] <= threshold {
                self.amps[k].norm_sqr()
            } else {
                0.0
            }
        }))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter().map(|a| a.norm_sqr()).collect()
        } else {
            self.amps.iter().map(|a| a.norm_sqr()).collect()
        }
    }

    /// Consumes the state and reuses its storage for the probabilities.
    pub fn into_probabilities(self) -> Vec<f64> {
        let len = self.amps.len();
        let mut amps = std::mem::ManuallyDrop::new(self.amps);
        let (ptr, cap) = (amps.as_mut_ptr(), amps.capacity());
        // SAFETY: Complex<f64> is #[repr(C)] { re: f64, im: f64 }, so the buffer
        // is a valid [f64; 2 * len] with the same alignment and allocation.
        let mut flat = unsafe { Vec::from_raw_parts(ptr.cast::<f64>(), 2 * len, 2 * cap) };
        for k in 0..len {
            let (re, im) = (flat[2 * k], flat[2 * k + 1]);
            flat[k] = re * re + im * im;
        }
        flat.truncate(len);
        flat
    }

    /// Writes interleaved little-endian `(re, im)` doubles in index order.
    pub fn write_le<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&encode_amplitudes(&self.amps))?;
        Ok(())
    }

    pub fn read_le<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_amplitudes(decode_amplitudes(&bytes)?)
    }
}

pub(crate) fn apply_phase_slice(amps: &mut [Complex64], costs: &[f64], gamma: f64) {
    if gamma == 0.0 {
        return;
    }
    let kernel = |(a, &c): (&mut Complex64, &f64)| {
        *a *= Complex64::from_polar(1.0, -gamma * c);
    };
    if amps.len() >= PAR_THRESHOLD {
        amps.par_iter_mut().zip(costs.par_iter()).for_each(kernel);
    } else {
        amps.iter_mut().zip(costs.iter()).for_each(kernel);
    }
}

pub(crate) fn expectation_slice(amps: &[Complex64], costs: &[f64]) -> f64 {
    chunked_sum_by(amps.len(), |k| costs[k] * amps[k].norm_sqr())
}

/// Raw little-endian `(re, im)` pairs.
pub fn encode_amplitudes(amps: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(amps.len() * 16);
    for a in amps {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    out
}

pub fn decode_amplitudes(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::domain(format!(
            "amplitude payload of {} bytes is not a multiple of 16",
            bytes.len()
        )));
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().unwrap());
    Ok(bytes
        .chunks_exact(16)
        .map(|c| Complex64::new(f(&c[..8]), f(&c[8..])))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{maxcut_terms, Graph};
    use crate::terms::precompute_cost_vector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
        let amps: Vec<Complex64> = (0..1 << n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    fn triangle_costs() -> CostVector {
        precompute_cost_vector(&maxcut_terms(&Graph::triangle()).unwrap()).unwrap()
    }

    #[test]
    fn uniform_examples() {
        let s = 2f64.sqrt().recip();
        assert_eq!(StateVector::uniform(1).unwrap().amplitudes(), &[c(s, 0.0), c(s, 0.0)]);
        assert_eq!(StateVector::uniform(2).unwrap().amplitudes(), &[c(0.5, 0.0); 4]);
        for n in 1..=16 {
            assert!((StateVector::uniform(n).unwrap().norm_sqr() - 1.0).abs() < 1e-14);
        }
        assert!(StateVector::uniform(0).is_err());
        assert!(matches!(StateVector::uniform(200), Err(Error::Resource { .. })));
    }

    #[test]
    fn phase_examples() {
        let costs = CostVector::from_values(vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let mut s = StateVector::uniform(2).unwrap();
        s.apply_phase(&costs, 0.0).unwrap();
        assert_eq!(s, StateVector::uniform(2).unwrap());

        s.apply_phase(&costs, std::f64::consts::PI).unwrap();
        // e^{-i pi} = e^{i pi} = -1, so both cost levels pick up the same sign.
        for a in s.amplitudes() {
            assert!((a - c(-0.5, 0.0)).norm() < 1e-15, "{a}");
        }
        let mut s = StateVector::uniform(2).unwrap();
        s.apply_phase(&costs, std::f64::consts::FRAC_PI_2).unwrap();
        let expected = [c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.5), c(0.0, -0.5)];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < 1e-15, "{a} {e}");
        }

        let constant = CostVector::from_values(vec![3.0; 4]).unwrap();
        let mut s = StateVector::uniform(2).unwrap();
        s.apply_phase(&constant, 0.7).unwrap();
        let phase = Complex64::from_polar(1.0, -0.7 * 3.0);
        for a in s.amplitudes() {
            assert!((a - 0.5 * phase).norm() < 1e-15);
        }

        let wrong = CostVector::from_values(vec![0.0; 8]).unwrap();
        assert!(matches!(
            s.apply_phase(&wrong, 1.0),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn compact_phase_matches_full() {
        let costs = triangle_costs();
        let compact = crate::terms::compact_costs(&costs).unwrap();
        let mut a = StateVector::uniform(3).unwrap();
        let mut b = a.clone();
        a.apply_phase(&costs, 0.37).unwrap();
        b.apply_phase_compact(&compact, 0.37).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn expectation_examples() {
        let costs = triangle_costs();
        assert!((StateVector::uniform(3).unwrap().expectation(&costs).unwrap() + 1.5).abs() < 1e-15);
        for k in 0..8 {
            let b = StateVector::basis(3, k).unwrap();
            assert_eq!(b.expectation(&costs).unwrap(), costs.values()[k]);
        }
        // dense <psi| diag(C) |psi>
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = random_state(3, &mut rng);
        let dense: f64 = (0..8)
            .map(|r| {
                let row: Complex64 = (0..8)
                    .map(|col| {
                        let d = if r == col { costs.values()[r] } else { 0.0 };
                        psi.amplitudes()[col] * d
                    })
                    .sum();
                (psi.amplitudes()[r].conj() * row).re
            })
            .sum();
        assert!((psi.expectation(&costs).unwrap() - dense).abs() < 1e-12);
    }

    #[test]
    fn overlap_examples() {
        let unique = CostVector::from_values(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!((StateVector::uniform(2).unwrap().overlap(&unique).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(StateVector::basis(2, 0).unwrap().overlap(&unique).unwrap(), 1.0);
        let tri = triangle_costs();
        assert!((StateVector::uniform(3).unwrap().overlap(&tri).unwrap() - 0.75).abs() < 1e-15);

        let near = CostVector::from_values(vec![0.0, 1e-9, 2.0, 3.0]).unwrap();
        let u = StateVector::uniform(2).unwrap();
        assert!((u.overlap(&near).unwrap() - 0.25).abs() < 1e-15);
        assert!((u.overlap_with_tolerance(&near, 1e-6).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn probabilities_examples() {
        assert_eq!(StateVector::uniform(2).unwrap().probabilities(), vec![0.25; 4]);
        assert_eq!(StateVector::basis(2, 2).unwrap().probabilities(), vec![0.0, 0.0, 1.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_state(6, &mut rng);
        let p = psi.probabilities();
        assert_eq!(psi.into_probabilities(), p);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamming_weight_state() {
        let s = StateVector::hamming_weight_uniform(4, 2).unwrap();
        let p = s.probabilities();
        for (k, pk) in p.iter().enumerate() {
            let expect = if k.count_ones() == 2 { 1.0 / 6.0 } else { 0.0 };
            assert!((pk - expect).abs() < 1e-15);
        }
        assert!(StateVector::hamming_weight_uniform(3, 4).is_err());
    }

    #[test]
    fn binary_dump_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = random_state(4, &mut rng);
        let mut buf = Vec::new();
        psi.write_le(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 * 16);
        assert_eq!(&buf[..8], &psi.amplitudes()[0].re.to_le_bytes());
        assert_eq!(StateVector::read_le(&buf[..]).unwrap(), psi);
        assert!(StateVector::read_le(&buf[..15]).is_err());
    }

    proptest! {
        #[test]
        fn phase_preserves_magnitudes_and_expectation(seed in any::<u64>(), gamma in -10.0f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let costs = triangle_costs();
            let mut psi = random_state(3, &mut rng);
            let before = psi.clone();
            psi.apply_phase(&costs, gamma).unwrap();
            for (a, b) in psi.amplitudes().iter().zip(before.amplitudes()) {
                prop_assert!((a.norm() - b.norm()).abs() < 1e-15);
            }
            let e0 = before.expectation(&costs).unwrap();
            prop_assert!((psi.expectation(&costs).unwrap() - e0).abs() < 1e-12);
            prop_assert!(e0 >= costs.min() - 1e-9 && e0 <= costs.max() + 1e-9);
            let overlap = psi.overlap(&costs).unwrap();
            let rest: f64 = psi.probabilities().iter().zip(costs.values())
                .filter(|(_, &c)| c > costs.min()).map(|(p, _)| p).sum();
            prop_assert!((overlap + rest - 1.0).abs() < 1e-10);
        }
    }
}
