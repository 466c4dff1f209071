//! QAOA evolution on top of a cached cost diagonal.
//!
//! Each layer applies the phase `exp(-i gamma_l C)` and then the mixer
//! `exp(-i beta_l M)`. The diagonal of `C` is computed once per simulator and
//! reused by every subsequent simulation and objective evaluation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixers::MixerSpec;
use crate::statevec::StateVector;
use crate::terms::{precompute_cost_vector, CostVector, TermPolynomial};

/// Per-layer angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::domain(format!(
                "{} gammas but {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        if gammas.iter().chain(&betas).any(|x| !x.is_finite()) {
            return Err(Error::domain("QAOA angles must be finite"));
        }
        Ok(Self { gammas, betas })
    }

    pub fn zeros(p: usize) -> Self {
        Self { gammas: vec![0.0; p], betas: vec![0.0; p] }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    /// `[gammas..., betas...]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::domain(format!("odd parameter vector length {}", x.len())));
        }
        let (g, b) = x.split_at(x.len() / 2);
        Self::new(g.to_vec(), b.to_vec())
    }
}

/// Final state of a simulation plus the cost diagonal it was run with.
#[derive(Debug, Clone)]
pub struct QaoaResult {
    state: StateVector,
    costs: Arc<CostVector>,
}

impl QaoaResult {
    pub fn new(state: StateVector, costs: Arc<CostVector>) -> Result<Self> {
        if state.n() != costs.n() {
            return Err(Error::DimensionMismatch { expected: costs.n(), got: state.n() });
        }
        Ok(Self { state, costs })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn into_state(self) -> StateVector {
        self.state
    }

    pub fn costs(&self) -> &Arc<CostVector> {
        &self.costs
    }

    pub fn expectation(&self) -> f64 {
        self.state.expectation(&self.costs).expect("dimensions checked at construction")
    }

    /// Expectation against a different diagonal, e.g. a raw objective that
    /// differs from the phase operator.
    pub fn expectation_with(&self, costs: &CostVector) -> Result<f64> {
        self.state.expectation(costs)
    }

    pub fn overlap(&self) -> f64 {
        self.state.overlap(&self.costs).expect("dimensions checked at construction")
    }

    pub fn overlap_with(&self, costs: &CostVector) -> Result<f64> {
        self.state.overlap(costs)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.state.probabilities()
    }

    /// Probabilities computed in the state's own storage.
    pub fn into_probabilities(self) -> Vec<f64> {
        self.state.into_probabilities()
    }
}

enum CostSource {
    Terms(TermPolynomial),
    Costs,
}

#[derive(Default)]
struct Cache {
    costs: Option<Arc<CostVector>>,
    elapsed: Duration,
}

/// Simulator for one problem and one mixer.
///
/// The cost vector is precomputed lazily on first use and cached; the
/// precompute counter makes the caching observable.
pub struct QaoaSimulator {
    n: usize,
    source: CostSource,
    mixer: MixerSpec,
    cache: Mutex<Cache>,
    precomputes: AtomicUsize,
}

impl QaoaSimulator {
    pub fn new(poly: TermPolynomial, mixer: MixerSpec) -> Self {
        Self {
            n: poly.n(),
            source: CostSource::Terms(poly),
            mixer,
            cache: Mutex::new(Cache::default()),
            precomputes: AtomicUsize::new(0),
        }
    }

    /// Uses a caller-supplied diagonal; no precompute happens.
    pub fn from_costs(costs: CostVector, mixer: MixerSpec) -> Self {
        let n = costs.n();
        Self {
            n,
            source: CostSource::Costs,
            mixer,
            cache: Mutex::new(Cache { costs: Some(Arc::new(costs)), elapsed: Duration::ZERO }),
            precomputes: AtomicUsize::new(0),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mixer(&self) -> &MixerSpec {
        &self.mixer
    }

    pub fn terms(&self) -> Option<&TermPolynomial> {
        match &self.source {
            CostSource::Terms(p) => Some(p),
            CostSource::Costs => None,
        }
    }

    /// The cached diagonal, computing it on first call.
    pub fn costs(&self) -> Result<Arc<CostVector>> {
        let mut cache = self.cache.lock().unwrap();
        if let Some(c) = &cache.costs {
            return Ok(Arc::clone(c));
        }
        let CostSource::Terms(poly) = &self.source else {
            unreachable!("cost-backed simulators are built with a filled cache")
        };
        let start = Instant::now();
        let costs = Arc::new(precompute_cost_vector(poly)?);
        cache.elapsed = start.elapsed();
        cache.costs = Some(Arc::clone(&costs));
        self.precomputes.fetch_add(1, Ordering::Relaxed);
        Ok(costs)
    }

    /// How many times the diagonal has been computed (0 or 1).
    pub fn precompute_count(&self) -> usize {
        self.precomputes.load(Ordering::Relaxed)
    }

    /// Wall time of the precompute, zero if none has run.
    pub fn precompute_time(&self) -> Duration {
        self.cache.lock().unwrap().elapsed
    }

    /// `|+>^n` for the X and custom mixers. XY mixers have no default and
    /// need an explicit start state such as
    /// [`StateVector::hamming_weight_uniform`].
    pub fn default_initial(&self) -> Result<StateVector> {
        if self.mixer.is_xy() {
            return Err(Error::domain(format!(
                "{} mixer needs an explicit initial state in a fixed Hamming-weight sector",
                self.mixer.name()
            )));
        }
        StateVector::uniform(self.n)
    }

    pub fn simulate(&self, params: &QaoaParams) -> Result<QaoaResult> {
        self.simulate_from(params, self.default_initial()?)
    }

    pub fn simulate_from(&self, params: &QaoaParams, initial: StateVector) -> Result<QaoaResult> {
        if initial.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: initial.n() });
        }
        self.mixer.validate(self.n)?;
        let costs = self.costs()?;
        let mut state = initial;
        for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
            state.apply_phase(&costs, gamma)?;
            self.mixer.apply_layer(&mut state, beta)?;
        }
        QaoaResult::new(state, costs)
    }

    /// `<gamma beta| C |gamma beta>` from the default initial state.
    pub fn objective(&self, params: &QaoaParams) -> Result<f64> {
        Ok(self.simulate(params)?.expectation())
    }

    pub fn objective_from(&self, params: &QaoaParams, initial: StateVector) -> Result<f64> {
        Ok(self.simulate_from(params, initial)?.expectation())
    }
}

/// One-shot simulation; precomputes the diagonal of `poly` and discards it.
pub fn simulate_qaoa(
    poly: &TermPolynomial,
    params: &QaoaParams,
    mixer: &MixerSpec,
    initial: Option<StateVector>,
) -> Result<QaoaResult> {
    let sim = QaoaSimulator::new(poly.clone(), mixer.clone());
    match initial {
        Some(s) => sim.simulate_from(params, s),
        None => sim.simulate(params),
    }
}

pub fn qaoa_objective(
    poly: &TermPolynomial,
    params: &QaoaParams,
    mixer: &MixerSpec,
    initial: Option<StateVector>,
) -> Result<f64> {
    Ok(simulate_qaoa(poly, params, mixer, initial)?.expectation())
}
