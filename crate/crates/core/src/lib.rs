//! QAOA state-vector simulation with a precomputed diagonal cost operator.
//!
//! The cost function is evaluated once for every basis state ([`terms`]), so
//! each phase layer is a single element-wise multiply. Mixers are applied in
//! place with pairwise SU(2) updates ([`mixers`]). [`distributed`] splits the
//! state across logical workers that communicate only through an all-to-all
//! exchange.
//!
//! ```
//! use fastqaoa::{problems, MixerSpec, QaoaParams, QaoaSimulator};
//!
//! let poly = problems::labs_terms(6).unwrap();
//! let sim = QaoaSimulator::new(poly, MixerSpec::X);
//! let params = QaoaParams::new(vec![0.1, 0.2], vec![0.3, 0.1]).unwrap();
//! let result = sim.simulate(&params).unwrap();
//! assert!(result.expectation() >= sim.costs().unwrap().min());
//! ```

pub mod bench;
pub mod cli;
pub mod distributed;
pub mod error;
pub mod mixers;
pub mod optimize;
pub mod problems;
pub mod qaoa;
pub mod reference;
pub mod statevec;
pub mod terms;

pub use error::{Error, Result};
pub use mixers::{MixerSpec, Su2};
pub use qaoa::{QaoaParams, QaoaResult, QaoaSimulator};
pub use statevec::StateVector;
pub use terms::{CostVector, Term, TermPolynomial};

pub use num_complex::Complex64;

/// Vectors at least this long are processed with rayon.
pub(crate) const PAR_THRESHOLD: usize = 1 << 14;

/// Largest register the simulator will try to allocate.
pub const MAX_QUBITS: usize = 40;

/// `2^n`, or a resource error if `n` is beyond [`MAX_QUBITS`].
pub fn dimension(n: usize) -> Result<usize> {
    if n > MAX_QUBITS || n >= usize::BITS as usize {
        return Err(Error::Resource { what: "state", n });
    }
    Ok(1usize << n)
}

pub(crate) fn alloc_filled<T: Clone>(len: usize, value: T, what: &'static str, n: usize) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| Error::Resource { what, n })?;
    v.resize(len, value);
    Ok(v)
}
