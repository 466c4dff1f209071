//! Dense-matrix reference simulator used as a test oracle.
//!
//! Everything here is built from explicit `2^n x 2^n` matrices and direct
//! polynomial evaluation. It is slow on purpose and shares no code with the
//! in-place kernels it checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mixers::{complete_edges, ring_edges, MixerSpec, Su2};
use crate::qaoa::QaoaParams;
use crate::statevec::StateVector;
use crate::terms::{evaluate_polynomial, TermPolynomial};

/// Largest register the dense oracle accepts.
pub const MAX_DENSE_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self { dim, data: rows.concat() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// `self ⊗ rhs`; `rhs` acts on the low-order index bits.
    pub fn kron(&self, rhs: &Self) -> Self {
        let d = self.dim * rhs.dim;
        let mut out = Self::zeros(d);
        for ia in 0..self.dim {
            for ja in 0..self.dim {
                let a = self.get(ia, ja);
                for ib in 0..rhs.dim {
                    for jb in 0..rhs.dim {
                        out.set(ia * rhs.dim + ib, ja * rhs.dim + jb, a * rhs.get(ib, jb));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Checks `U U^dagger = I` entrywise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.matmul(&self.adjoint()).max_abs_diff(&Self::identity(self.dim)) <= tol
    }

    fn one_norm(&self) -> f64 {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self.get(r, c).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Matrix exponential by Taylor series with scaling and squaring.
    /// Meant for small operators.
    pub fn expm(&self) -> Self {
        let norm = self.one_norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let a = self.scale(Complex64::new(0.5f64.powi(squarings as i32), 0.0));
        let mut sum = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for k in 1..=30 {
            term = term.matmul(&a).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }
}

fn pauli_x() -> DenseOperator {
    DenseOperator::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]])
}

fn pauli_y() -> DenseOperator {
    let i = Complex64::new(0.0, 1.0);
    DenseOperator::from_rows(&[vec![ZERO, -i], vec![i, ZERO]])
}

pub fn su2_dense(u: &Su2) -> DenseOperator {
    let m = u.matrix();
    DenseOperator::from_rows(&[m[0].to_vec(), m[1].to_vec()])
}

/// `us[n-1] ⊗ ... ⊗ us[0]` as an explicit Kronecker product.
pub fn kron_su2(us: &[Su2]) -> DenseOperator {
    let Some((last, rest)) = us.split_last() else {
        return DenseOperator::identity(1);
    };
    rest.iter().rev().fold(su2_dense(last), |m, u| m.kron(&su2_dense(u)))
}

/// `exp(-i beta sum_q X_q)` via `X = H Z H`: the Hadamard transform
/// diagonalizes the sum, with eigenvalue `n - 2 popcount(k)` on column `k`.
///
/// Entry `(i, j)` is `2^-n sum_k (-1)^{k.i + k.j} exp(-i beta (n - 2|k|))`,
/// which depends only on `i ^ j`.
pub fn x_mixer_dense(n: usize, beta: f64) -> DenseOperator {
    let dim = 1usize << n;
    let eig: Vec<Complex64> = (0..dim)
        .map(|k| Complex64::from_polar(1.0, -beta * (n as f64 - 2.0 * k.count_ones() as f64)))
        .collect();
    let norm = 1.0 / dim as f64;
    let by_xor: Vec<Complex64> = (0..dim)
        .map(|m| {
            eig.iter()
                .enumerate()
                .map(|(k, &e)| if (k & m).count_ones() % 2 == 0 { e } else { -e })
                .sum::<Complex64>()
                * norm
        })
        .collect();
    let mut out = DenseOperator::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            out.set(i, j, by_xor[i ^ j]);
        }
    }
    out
}

/// `exp(-i beta (X_i X_j + Y_i Y_j) / 2)` embedded in `n` qubits, with the
/// two-qubit block obtained from a series expansion of the Hamiltonian.
pub fn xy_gate_dense(n: usize, beta: f64, i: usize, j: usize) -> DenseOperator {
    assert!(i != j && i < n && j < n);
    // 4x4 block indexed by (bit_j << 1) | bit_i
    let ham = pauli_x().kron(&pauli_x()).add(&pauli_y().kron(&pauli_y()));
    let block = ham.scale(Complex64::new(0.0, -beta / 2.0)).expm();
    let dim = 1usize << n;
    let mask = (1usize << i) | (1usize << j);
    let local = |k: usize| (((k >> j) & 1) << 1) | ((k >> i) & 1);
    let mut out = DenseOperator::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & !mask == c & !mask {
                out.set(r, c, block.get(local(r), local(c)));
            }
        }
    }
    out
}

/// Dense mixer for one layer, following the documented XY gate order.
pub fn mixer_dense(n: usize, mixer: &MixerSpec, beta: f64) -> Result<DenseOperator> {
    Ok(match mixer {
        MixerSpec::X => x_mixer_dense(n, beta),
        MixerSpec::Custom(us) => {
            if us.len() != n {
                return Err(Error::domain("custom mixer length does not match qubit count"));
            }
            kron_su2(us)
        }
        MixerSpec::XyRing | MixerSpec::XyComplete => {
            if n < 2 {
                return Err(Error::domain("XY mixers need at least 2 qubits"));
            }
            let edges =
                if *mixer == MixerSpec::XyRing { ring_edges(n) } else { complete_edges(n) };
            edges.iter().fold(DenseOperator::identity(1 << n), |acc, &(i, j)| {
                xy_gate_dense(n, beta, i, j).matmul(&acc)
            })
        }
    })
}

/// Costs by direct per-index evaluation.
pub fn direct_costs(poly: &TermPolynomial) -> Result<Vec<f64>> {
    (0..1u64 << poly.n()).map(|k| evaluate_polynomial(poly, k)).collect()
}

/// QAOA by explicit matrices: `prod_l exp(-i beta_l M) exp(-i gamma_l C)`.
pub fn dense_qaoa_reference(
    poly: &TermPolynomial,
    params: &QaoaParams,
    mixer: &MixerSpec,
    initial: Option<&StateVector>,
) -> Result<StateVector> {
    let n = poly.n();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Resource { what: "dense operator", n });
    }
    let mut psi = match initial {
        Some(s) if s.n() != n => return Err(Error::DimensionMismatch { expected: n, got: s.n() }),
        Some(s) => s.amplitudes().to_vec(),
        None => vec![Complex64::new((-(n as f64) / 2.0).exp2(), 0.0); 1 << n],
    };
    let costs = direct_costs(poly)?;
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        for (a, &c) in psi.iter_mut().zip(&costs) {
            *a *= Complex64::new((gamma * c).cos(), -(gamma * c).sin());
        }
        psi = mixer_dense(n, mixer, beta)?.apply(&psi);
    }
    StateVector::from_amplitudes(psi)
}

/// Exact minimum of the polynomial and every index attaining it.
pub fn brute_force_minimum(poly: &TermPolynomial) -> Result<(f64, Vec<u64>)> {
    let n = poly.n();
    if n > 24 {
        return Err(Error::Resource { what: "exhaustive scan", n });
    }
    let mut best = f64::INFINITY;
    let mut argmin = Vec::new();
    for k in 0..1u64 << n {
        let v = evaluate_polynomial(poly, k)?;
        if v < best {
            best = v;
            argmin.clear();
        }
        if v == best {
            argmin.push(k);
        }
    }
    Ok((best, argmin))
}
