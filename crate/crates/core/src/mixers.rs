//! In-place mixing operators.
//!
//! A single-qubit SU(2) gate on qubit `q` mixes amplitude pairs `(l, l + 2^q)`
//! that differ only in bit `q`. All pairs are disjoint, so they are updated in
//! place (and in parallel) with two scalar temporaries per pair. A uniform
//! transform applies one such gate per qubit, `q = 0..n`.
//!
//! XY mixers are products of two-qubit gates `exp(-i beta (XX + YY) / 2)`,
//! which rotate the `{|01>, |10>}` subspace of the pair and leave `|00>` and
//! `|11>` alone. The gate order is fixed and part of the public contract:
//!
//! * ring: `(0,1), (2,3), ...`, then `(1,2), (3,4), ...`, then `(n-1, 0)`.
//!   For `n = 2` the ring is the single pair `(0,1)`.
//! * complete: all `(i, j)` with `i < j` in lexicographic order.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::statevec::StateVector;
use crate::PAR_THRESHOLD;

/// Element of SU(2) stored as the matrix `[[a, -conj(b)], [b, conj(a)]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2 {
    a: Complex64,
    b: Complex64,
}

impl Su2 {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if norm.is_nan() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("|a|^2 + |b|^2 = {norm}, expected 1")));
        }
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) }
    }

    /// `exp(-i beta X) = cos(beta) I - i sin(beta) X`.
    pub fn rx(beta: f64) -> Self {
        Self { a: Complex64::new(beta.cos(), 0.0), b: Complex64::new(0.0, -beta.sin()) }
    }

    /// Real rotation `[[cos, -sin], [sin, cos]]`.
    pub fn real_rotation(theta: f64) -> Self {
        Self { a: Complex64::new(theta.cos(), 0.0), b: Complex64::new(theta.sin(), 0.0) }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.a.conj(), b: -self.b }
    }

    /// Row-major 2x2 matrix.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.a, -self.b.conj()], [self.b, self.a.conj()]]
    }
}

/// Which mixer a QAOA layer applies.
#[derive(Debug, Clone, PartialEq)]
pub enum MixerSpec {
    /// Transverse field `exp(-i beta sum_q X_q)`.
    X,
    XyRing,
    XyComplete,
    /// Fixed per-qubit gates applied every layer; `beta` is ignored.
    Custom(Vec<Su2>),
}

impl MixerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MixerSpec::X => "x",
            MixerSpec::XyRing => "xy-ring",
            MixerSpec::XyComplete => "xy-complete",
            MixerSpec::Custom(_) => "custom",
        }
    }

    pub fn is_xy(&self) -> bool {
        matches!(self, MixerSpec::XyRing | MixerSpec::XyComplete)
    }

    /// Checks the mixer can act on `n` qubits.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            MixerSpec::X => Ok(()),
            MixerSpec::XyRing | MixerSpec::XyComplete if n < 2 => Err(Error::domain(format!(
                "{} mixer needs at least 2 qubits, got {n}",
                self.name()
            ))),
            MixerSpec::XyRing | MixerSpec::XyComplete => Ok(()),
            MixerSpec::Custom(us) if us.len() != n => Err(Error::domain(format!(
                "custom mixer has {} gates for {n} qubits",
                us.len()
            ))),
            MixerSpec::Custom(_) => Ok(()),
        }
    }

    /// Two-qubit gate sequence of an XY mixer; empty for single-qubit mixers.
    pub fn xy_edges(&self, n: usize) -> Vec<(usize, usize)> {
        match self {
            MixerSpec::XyRing => ring_edges(n),
            MixerSpec::XyComplete => complete_edges(n),
            _ => Vec::new(),
        }
    }

    pub fn apply_layer(&self, state: &mut StateVector, beta: f64) -> Result<()> {
        self.validate(state.n())?;
        match self {
            MixerSpec::X => rx_layer(state, beta),
            MixerSpec::XyRing => xy_ring_layer(state, beta),
            MixerSpec::XyComplete => xy_complete_layer(state, beta),
            MixerSpec::Custom(us) => apply_uniform_su2(state, us),
        }
    }
}

impl FromStr for MixerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(MixerSpec::X),
            "xy-ring" => Ok(MixerSpec::XyRing),
            "xy-complete" => Ok(MixerSpec::XyComplete),
            _ => Err(Error::domain(format!(
                "unknown mixer {s:?} (expected x, xy-ring or xy-complete)"
            ))),
        }
    }
}

#[inline(always)]
fn su2_pair(u: &Su2, x: &mut Complex64, y: &mut Complex64) {
    let (x0, y0) = (*x, *y);
    *x = u.a * x0 - u.b.conj() * y0;
    *y = u.b * x0 + u.a.conj() * y0;
}

fn su2_block(u: &Su2, block: &mut [Complex64], half: usize) {
    let (lo, hi) = block.split_at_mut(half);
    for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
        su2_pair(u, x, y);
    }
}

/// SU(2) gate on qubit `q` of a raw amplitude slice (length a power of two).
pub(crate) fn su2_kernel(amps: &mut [Complex64], u: &Su2, q: usize) {
    let half = 1usize << q;
    let block = half << 1;
    if amps.len() < PAR_THRESHOLD {
        amps.chunks_mut(block).for_each(|b| su2_block(u, b, half));
    } else if amps.len() / block >= 64 {
        amps.par_chunks_mut(block).for_each(|b| su2_block(u, b, half));
    } else {
        for b in amps.chunks_mut(block) {
            let (lo, hi) = b.split_at_mut(half);
            lo.par_iter_mut()
                .zip(hi.par_iter_mut())
                .with_min_len(1 << 12)
                .for_each(|(x, y)| su2_pair(u, x, y));
        }
    }
}

#[inline(always)]
fn xy_pair(c: f64, s: f64, x: &mut Complex64, y: &mut Complex64) {
    // [[c, -i s], [-i s, c]]
    let (x0, y0) = (*x, *y);
    *x = x0 * c + Complex64::new(y0.im * s, -y0.re * s);
    *y = y0 * c + Complex64::new(x0.im * s, -x0.re * s);
}

fn xy_block(c: f64, s: f64, block: &mut [Complex64], lo: usize, hi: usize) {
    let (lower, upper) = block.split_at_mut(1 << hi);
    let sub = 2usize << lo;
    for (l, u) in lower.chunks_mut(sub).zip(upper.chunks_mut(sub)) {
        // upper half of the block has bit `hi` set; pair its bit-`lo`-clear
        // entries with the lower half's bit-`lo`-set entries.
        let (u0, _) = u.split_at_mut(1 << lo);
        let (_, l1) = l.split_at_mut(1 << lo);
        for (x, y) in u0.iter_mut().zip(l1.iter_mut()) {
            xy_pair(c, s, x, y);
        }
    }
}

/// XY gate on qubits `i != j` of a raw amplitude slice.
pub(crate) fn xy_kernel(amps: &mut [Complex64], beta: f64, i: usize, j: usize) {
    let (lo, hi) = (i.min(j), i.max(j));
    let (c, s) = (beta.cos(), beta.sin());
    let block = 2usize << hi;
    if amps.len() >= PAR_THRESHOLD && amps.len() / block >= 64 {
        amps.par_chunks_mut(block).for_each(|b| xy_block(c, s, b, lo, hi));
    } else if amps.len() >= PAR_THRESHOLD {
        for b in amps.chunks_mut(block) {
            let (lower, upper) = b.split_at_mut(1 << hi);
            let sub = 2usize << lo;
            lower
                .par_chunks_mut(sub)
                .zip(upper.par_chunks_mut(sub))
                .with_min_len((1 << 12) / sub + 1)
                .for_each(|(l, u)| {
                    let (u0, _) = u.split_at_mut(1 << lo);
                    let (_, l1) = l.split_at_mut(1 << lo);
                    for (x, y) in u0.iter_mut().zip(l1.iter_mut()) {
                        xy_pair(c, s, x, y);
                    }
                });
        }
    } else {
        amps.chunks_mut(block).for_each(|b| xy_block(c, s, b, lo, hi));
    }
}

fn check_qubit(state: &StateVector, q: usize) -> Result<()> {
    if q >= state.n() {
        return Err(Error::domain(format!("qubit {q} out of range for {} qubits", state.n())));
    }
    Ok(())
}

/// Applies `u` to qubit `q` in place.
pub fn apply_su2(state: &mut StateVector, u: &Su2, q: usize) -> Result<()> {
    check_qubit(state, q)?;
    su2_kernel(state.amplitudes_mut(), u, q);
    Ok(())
}

/// Applies `us[n-1] ⊗ ... ⊗ us[0]`, where `us[q]` acts on qubit `q`.
pub fn apply_uniform_su2(state: &mut StateVector, us: &[Su2]) -> Result<()> {
    if us.len() != state.n() {
        return Err(Error::domain(format!(
            "expected {} SU(2) gates, got {}",
            state.n(),
            us.len()
        )));
    }
    for (q, u) in us.iter().enumerate() {
        su2_kernel(state.amplitudes_mut(), u, q);
    }
    Ok(())
}

/// `exp(-i beta sum_q X_q)`.
pub fn rx_layer(state: &mut StateVector, beta: f64) -> Result<()> {
    let u = Su2::rx(beta);
    for q in 0..state.n() {
        su2_kernel(state.amplitudes_mut(), &u, q);
    }
    Ok(())
}

/// `exp(-i beta (X_i X_j + Y_i Y_j) / 2)` in place.
pub fn apply_xy(state: &mut StateVector, beta: f64, i: usize, j: usize) -> Result<()> {
    check_qubit(state, i)?;
    check_qubit(state, j)?;
    if i == j {
        return Err(Error::domain(format!("XY gate needs two distinct qubits, got {i} twice")));
    }
    xy_kernel(state.amplitudes_mut(), beta, i, j);
    Ok(())
}

/// Ring gate order: even-offset pairs, odd-offset pairs, then the wrap edge.
pub fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let mut edges: Vec<_> = (0..n - 1).step_by(2).map(|i| (i, i + 1)).collect();
    edges.extend((1..n - 1).step_by(2).map(|i| (i, i + 1)));
    edges.push((n - 1, 0));
    edges
}

pub fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn xy_sequence(state: &mut StateVector, beta: f64, edges: &[(usize, usize)]) -> Result<()> {
    if state.n() < 2 {
        return Err(Error::domain("XY mixers need at least 2 qubits"));
    }
    for &(i, j) in edges {
        xy_kernel(state.amplitudes_mut(), beta, i, j);
    }
    Ok(())
}

pub fn xy_ring_layer(state: &mut StateVector, beta: f64) -> Result<()> {
    let edges = ring_edges(state.n());
    xy_sequence(state, beta, &edges)
}

pub fn xy_complete_layer(state: &mut StateVector, beta: f64) -> Result<()> {
    let edges = complete_edges(state.n());
    xy_sequence(state, beta, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_su2(rng: &mut impl Rng) -> Su2 {
        let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        Su2::new(c(v[0] / norm, v[1] / norm), c(v[2] / norm, v[3] / norm)).unwrap()
    }

    fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
        let amps: Vec<Complex64> = (0..1 << n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn su2_validation() {
        assert!(Su2::new(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(Su2::new(c(f64::NAN, 0.0), c(0.0, 0.0)).is_err());
        let m = Su2::rx(0.3).matrix();
        assert!((m[0][1] - c(0.0, -0.3f64.sin())).norm() < 1e-16);
    }

    #[test]
    fn su2_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_state(3, &mut rng);
        let mut s = psi.clone();
        apply_su2(&mut s, &Su2::identity(), 1).unwrap();
        assert_eq!(s, psi);

        let u = random_su2(&mut rng);
        let mut s = StateVector::basis(1, 0).unwrap();
        apply_su2(&mut s, &u, 0).unwrap();
        assert_eq!(s.amplitudes(), &[u.a(), u.b()]);

        let mut s = StateVector::uniform(2).unwrap();
        apply_su2(&mut s, &Su2::new(c(0.0, 0.0), c(0.0, -1.0)).unwrap(), 1).unwrap();
        for a in s.amplitudes() {
            assert!((a - c(0.0, -0.5)).norm() < 1e-16);
        }
        assert!(apply_su2(&mut s, &u, 2).is_err());
    }

    #[test]
    fn uniform_su2_eigenstate() {
        let beta = 0.73;
        let n = 5;
        let mut s = StateVector::uniform(n).unwrap();
        apply_uniform_su2(&mut s, &vec![Su2::rx(beta); n]).unwrap();
        let phase = Complex64::from_polar(1.0, -beta * n as f64);
        let amp = (1.0 / 32.0f64).sqrt();
        for a in s.amplitudes() {
            assert!((a - phase * amp).norm() < 1e-14);
        }
        assert!(apply_uniform_su2(&mut s, &[Su2::identity()]).is_err());
    }

    #[test]
    fn rx_layer_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = random_state(4, &mut rng);
        let mut s = psi.clone();
        rx_layer(&mut s, 0.0).unwrap();
        assert_eq!(s, psi);

        for n in 1..=5 {
            let mut s = StateVector::basis(n, 0).unwrap();
            rx_layer(&mut s, PI / 2.0).unwrap();
            let expected = c(0.0, -1.0).powu(n as u32);
            let all_ones = (1 << n) - 1;
            for (k, a) in s.amplitudes().iter().enumerate() {
                let e = if k == all_ones { expected } else { c(0.0, 0.0) };
                assert!((a - e).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn xy_examples() {
        let beta = 0.41;
        for k in [0b00, 0b11] {
            let mut s = StateVector::basis(2, k).unwrap();
            apply_xy(&mut s, beta, 0, 1).unwrap();
            assert_eq!(s, StateVector::basis(2, k).unwrap());
        }
        // |01> means qubit 0 set: index 1
        let mut s = StateVector::basis(2, 0b01).unwrap();
        apply_xy(&mut s, beta, 0, 1).unwrap();
        let a = s.amplitudes();
        assert!((a[0b01] - c(beta.cos(), 0.0)).norm() < 1e-16);
        assert!((a[0b10] - c(0.0, -beta.sin())).norm() < 1e-16);

        let mut s = StateVector::basis(2, 0b10).unwrap();
        apply_xy(&mut s, PI / 2.0, 1, 0).unwrap();
        assert!((s.amplitudes()[0b01] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(s.amplitudes()[0b10].norm() < 1e-15);

        assert!(apply_xy(&mut s, beta, 1, 1).is_err());
        assert!(apply_xy(&mut s, beta, 0, 2).is_err());
    }

    #[test]
    fn edge_orders() {
        assert_eq!(ring_edges(2), vec![(0, 1)]);
        assert_eq!(ring_edges(3), vec![(0, 1), (1, 2), (2, 0)]);
        assert_eq!(ring_edges(5), vec![(0, 1), (2, 3), (1, 2), (3, 4), (4, 0)]);
        assert_eq!(ring_edges(6), vec![(0, 1), (2, 3), (4, 5), (1, 2), (3, 4), (5, 0)]);
        assert_eq!(complete_edges(3), vec![(0, 1), (0, 2), (1, 2)]);
        let mut s = StateVector::uniform(1).unwrap();
        assert!(xy_ring_layer(&mut s, 0.1).is_err());
        assert!(MixerSpec::XyComplete.apply_layer(&mut s, 0.1).is_err());
    }

    #[test]
    fn xy_layers_zero_beta_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = random_state(5, &mut rng);
        let mut s = psi.clone();
        xy_ring_layer(&mut s, 0.0).unwrap();
        xy_complete_layer(&mut s, 0.0).unwrap();
        assert_eq!(s, psi);
    }

    #[test]
    fn large_state_parallel_paths_match_sequential() {
        // exercises both parallel branches against per-block application
        let n = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = random_state(n, &mut rng);
        let u = random_su2(&mut rng);
        for q in [0, 5, 10, 15] {
            let mut fast = psi.clone();
            apply_su2(&mut fast, &u, q).unwrap();
            let mut slow = psi.clone();
            for b in slow.amplitudes_mut().chunks_mut(2 << q) {
                su2_block(&u, b, 1 << q);
            }
            assert_eq!(fast, slow);
        }
        for (i, j) in [(0, 1), (3, 12), (15, 2), (14, 15)] {
            let mut fast = psi.clone();
            apply_xy(&mut fast, 0.3, i, j).unwrap();
            let mut slow = psi.clone();
            let (lo, hi) = (i.min(j), i.max(j));
            for b in slow.amplitudes_mut().chunks_mut(2 << hi) {
                xy_block(0.3f64.cos(), 0.3f64.sin(), b, lo, hi);
            }
            assert_eq!(fast, slow);
        }
    }

    fn weight_mass(s: &StateVector) -> Vec<f64> {
        let mut mass = vec![0.0; s.n() + 1];
        for (k, p) in s.probabilities().iter().enumerate() {
            mass[k.count_ones() as usize] += p;
        }
        mass
    }

    proptest! {
        #[test]
        fn su2_unitary_and_invertible(seed in any::<u64>(), n in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_state(n, &mut rng);
            let u = random_su2(&mut rng);
            let q = rng.gen_range(0..n);
            let mut s = psi.clone();
            apply_su2(&mut s, &u, q).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            apply_su2(&mut s, &u.inverse(), q).unwrap();
            prop_assert!(max_diff(&s, &psi) < 1e-12);
        }

        #[test]
        fn su2_on_distinct_qubits_commute(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_state(n, &mut rng);
            let (u, v) = (random_su2(&mut rng), random_su2(&mut rng));
            let q = rng.gen_range(0..n);
            let r = (q + rng.gen_range(1..n)) % n;
            let mut a = psi.clone();
            apply_su2(&mut a, &u, q).unwrap();
            apply_su2(&mut a, &v, r).unwrap();
            let mut b = psi;
            apply_su2(&mut b, &v, r).unwrap();
            apply_su2(&mut b, &u, q).unwrap();
            prop_assert!(max_diff(&a, &b) < 1e-12);
        }

        #[test]
        fn rx_forward_backward_identity(seed in any::<u64>(), n in 1usize..8, beta in -4.0f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_state(n, &mut rng);
            let mut s = psi.clone();
            rx_layer(&mut s, beta).unwrap();
            rx_layer(&mut s, -beta).unwrap();
            prop_assert!(max_diff(&s, &psi) < 1e-12);
        }

        #[test]
        fn xy_layers_conserve_weight_mass(seed in any::<u64>(), n in 2usize..9, beta in -4.0f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = random_state(n, &mut rng);
            let before = weight_mass(&s);
            xy_ring_layer(&mut s, beta).unwrap();
            xy_complete_layer(&mut s, beta).unwrap();
            for (a, b) in weight_mass(&s).iter().zip(&before) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
