//! Sharded simulation over `K = 2^k` logical workers.
//!
//! Worker `r` owns global indices `r * 2^(n-k) .. (r+1) * 2^(n-k)`, so the
//! top `k` qubits are fixed per worker ("global" qubits) and the remaining
//! `n - k` are local. Diagonal work (precompute, phase, expectation) needs no
//! communication. Gates on global qubits go through an all-to-all exchange:
//! each shard is cut into `K` subchunks of `2^(n-2k)` amplitudes and subchunk
//! `j` of worker `i` trades places with subchunk `i` of worker `j`. Viewing
//! the state as `V[a][b][c]` (worker id, top `k` local bits, remaining bits),
//! the exchange is the transposition `V[a][b][c] -> V[b][a][c]`, after which
//! global qubit `q` sits at local position `q - k`. Applying it twice restores
//! the layout, which is why `2k <= n` is required.
//!
//! Workers never touch each other's shards. Every exchange is a publish phase
//! (each worker serializes outgoing subchunks), a barrier where messages are
//! routed, and a consume phase (each worker writes what it received into its
//! own shard). Payloads are raw little-endian `(re, im)` doubles, and each
//! inbox is ordered by sender rank.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mixers::{su2_kernel, xy_kernel, MixerSpec, Su2};
use crate::qaoa::{QaoaParams, QaoaResult, QaoaSimulator};
use crate::statevec::{
    apply_phase_slice, decode_amplitudes, encode_amplitudes, expectation_slice, StateVector,
};
use crate::terms::{accumulate_terms, CostVector, TermPolynomial};
use crate::{alloc_filled, dimension};

/// `log2(workers)`, after checking `workers` is a power of two with `2k <= n`.
pub fn worker_bits(n: usize, workers: usize) -> Result<usize> {
    if workers == 0 || !workers.is_power_of_two() {
        return Err(Error::domain(format!("worker count {workers} is not a power of two")));
    }
    let k = workers.trailing_zeros() as usize;
    if 2 * k > n {
        return Err(Error::domain(format!(
            "{workers} workers need 2*{k} <= n, but n = {n}"
        )));
    }
    Ok(k)
}

/// Communication performed so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExchangeStats {
    /// Collective all-to-all exchanges.
    pub all_to_all: usize,
    /// Pairwise swaps between worker pairs (XY gates that no single
    /// transposition can make local).
    pub pairwise: usize,
}

impl ExchangeStats {
    pub fn total(&self) -> usize {
        self.all_to_all + self.pairwise
    }
}

/// One message in flight between two workers.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub from: usize,
    pub to: usize,
    pub payload: Vec<u8>,
}

/// Barrier: delivers every published message, inboxes ordered by sender.
fn route(outboxes: Vec<Vec<Message>>, workers: usize) -> Vec<Vec<Message>> {
    let mut inboxes: Vec<Vec<Message>> = (0..workers).map(|_| Vec::new()).collect();
    for msg in outboxes.into_iter().flatten() {
        inboxes[msg.to].push(msg);
    }
    for inbox in &mut inboxes {
        inbox.sort_by_key(|m| m.from);
    }
    inboxes
}

/// State vector split across workers by its top `k` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardedState {
    n: usize,
    k: usize,
    shards: Vec<Vec<Complex64>>,
    stats: ExchangeStats,
}

impl ShardedState {
    pub fn scatter(state: &StateVector, workers: usize) -> Result<Self> {
        let n = state.n();
        let k = worker_bits(n, workers)?;
        let shards = state
            .amplitudes()
            .chunks(1 << (n - k))
            .map(|c| c.to_vec())
            .collect();
        Ok(Self { n, k, shards, stats: ExchangeStats::default() })
    }

    /// Uniform superposition built shard by shard.
    pub fn uniform(n: usize, workers: usize) -> Result<Self> {
        let k = worker_bits(n, workers)?;
        let amp = Complex64::new((dimension(n)? as f64).sqrt().recip(), 0.0);
        let shards = (0..workers)
            .map(|_| alloc_filled(1 << (n - k), amp, "shard", n))
            .collect::<Result<_>>()?;
        Ok(Self { n, k, shards, stats: ExchangeStats::default() })
    }

    pub fn gather(&self) -> StateVector {
        StateVector::from_amplitudes(self.shards.concat()).expect("shards cover 2^n amplitudes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn workers(&self) -> usize {
        self.shards.len()
    }

    pub fn local_qubits(&self) -> usize {
        self.n - self.k
    }

    pub fn shard(&self, rank: usize) -> &[Complex64] {
        &self.shards[rank]
    }

    pub fn stats(&self) -> ExchangeStats {
        self.stats
    }

    fn subchunk_len(&self) -> usize {
        1 << (self.n - 2 * self.k)
    }

    /// All-to-all exchange (self-inverse transposition of worker id and the
    /// top `k` local bits).
    pub fn all_to_all_exchange(&mut self) {
        let workers = self.workers();
        let sub = self.subchunk_len();
        let outboxes: Vec<Vec<Message>> = self
            .shards
            .par_iter()
            .enumerate()
            .map(|(from, shard)| {
                (0..workers)
                    .filter(|&to| to != from)
                    .map(|to| Message {
                        from,
                        to,
                        payload: encode_amplitudes(&shard[to * sub..(to + 1) * sub]),
                    })
                    .collect()
            })
            .collect();
        let inboxes = route(outboxes, workers);
        self.shards
            .par_iter_mut()
            .zip(inboxes)
            .for_each(|(shard, inbox)| {
                for msg in inbox {
                    let data = decode_amplitudes(&msg.payload).expect("well-formed payload");
                    shard[msg.from * sub..(msg.from + 1) * sub].copy_from_slice(&data);
                }
            });
        self.stats.all_to_all += 1;
    }

    fn for_each_shard(&mut self, f: impl Fn(&mut [Complex64]) + Sync + Send) {
        self.shards.par_iter_mut().for_each(|s| f(s));
    }

    /// Distributed uniform SU(2) transform: local qubits, exchange, the
    /// former global qubits (now at `q - k`), exchange back.
    pub fn apply_uniform_su2(&mut self, us: &[Su2]) -> Result<()> {
        if us.len() != self.n {
            return Err(Error::domain(format!(
                "expected {} SU(2) gates, got {}",
                self.n,
                us.len()
            )));
        }
        let local = self.local_qubits();
        self.for_each_shard(|shard| {
            for (q, u) in us[..local].iter().enumerate() {
                su2_kernel(shard, u, q);
            }
        });
        self.all_to_all_exchange();
        let k = self.k;
        self.for_each_shard(|shard| {
            for (q, u) in us.iter().enumerate().skip(local) {
                su2_kernel(shard, u, q - k);
            }
        });
        self.all_to_all_exchange();
        Ok(())
    }

    pub fn rx_layer(&mut self, beta: f64) -> Result<()> {
        self.apply_uniform_su2(&vec![Su2::rx(beta); self.n])
    }

    /// XY gate on `(i, j)`. Local pairs run in place; pairs that become local
    /// after one transposition are wrapped in two exchanges; a global qubit
    /// paired with one of the top `k` local qubits uses a pairwise swap.
    pub fn apply_xy(&mut self, beta: f64, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::domain(format!("invalid XY pair ({i}, {j}) for {} qubits", self.n)));
        }
        let local = self.local_qubits();
        let bottom = self.n - 2 * self.k;
        let k = self.k;
        let (lo, hi) = (i.min(j), i.max(j));
        if hi < local {
            self.for_each_shard(|s| xy_kernel(s, beta, lo, hi));
        } else if lo >= local || lo < bottom {
            let moved = |q: usize| if q >= local { q - k } else { q };
            let (a, b) = (moved(lo), moved(hi));
            self.all_to_all_exchange();
            self.for_each_shard(|s| xy_kernel(s, beta, a, b));
            self.all_to_all_exchange();
        } else {
            self.pairwise_xy(beta, lo, hi - local);
        }
        Ok(())
    }

    /// XY gate between local qubit `l` and global bit `g` of the worker id.
    /// Worker `r` (bit `g` clear) and `r | 1 << g` trade the halves that the
    /// gate couples and each updates its own half.
    fn pairwise_xy(&mut self, beta: f64, l: usize, g: usize) {
        let workers = self.workers();
        // bit-l-set entries on the low partner couple to bit-l-clear entries
        // on the high partner
        let half_of = |rank: usize| -> bool { rank & (1 << g) == 0 };
        let select = |shard: &[Complex64], want_set: bool| -> Vec<Complex64> {
            shard
                .chunks(2 << l)
                .flat_map(|c| if want_set { &c[1 << l..] } else { &c[..1 << l] })
                .copied()
                .collect()
        };
        let outboxes: Vec<Vec<Message>> = self
            .shards
            .par_iter()
            .enumerate()
            .map(|(from, shard)| {
                vec![Message {
                    from,
                    to: from ^ (1 << g),
                    payload: encode_amplitudes(&select(shard, half_of(from))),
                }]
            })
            .collect();
        let inboxes = route(outboxes, workers);
        let (c, s) = (beta.cos(), beta.sin());
        self.shards
            .par_iter_mut()
            .zip(inboxes)
            .enumerate()
            .for_each(|(rank, (shard, inbox))| {
                let partner = decode_amplitudes(&inbox[0].payload).expect("well-formed payload");
                let mine_set = half_of(rank);
                let mut it = partner.into_iter();
                for chunk in shard.chunks_mut(2 << l) {
                    let part = if mine_set { &mut chunk[1 << l..] } else { &mut chunk[..1 << l] };
                    for x in part {
                        let y = it.next().expect("partner half has matching length");
                        // [[c, -i s], [-i s, c]]
                        *x = *x * c + Complex64::new(y.im * s, -y.re * s);
                    }
                }
            });
        self.stats.pairwise += 1;
    }

    pub fn apply_xy_sequence(&mut self, beta: f64, edges: &[(usize, usize)]) -> Result<()> {
        for &(i, j) in edges {
            self.apply_xy(beta, i, j)?;
        }
        Ok(())
    }

    pub fn apply_mixer(&mut self, mixer: &MixerSpec, beta: f64) -> Result<()> {
        mixer.validate(self.n)?;
        match mixer {
            MixerSpec::X => self.rx_layer(beta),
            MixerSpec::Custom(us) => self.apply_uniform_su2(us),
            MixerSpec::XyRing | MixerSpec::XyComplete => {
                self.apply_xy_sequence(beta, &mixer.xy_edges(self.n))
            }
        }
    }

    fn check_costs(&self, costs: &ShardedCosts) -> Result<()> {
        if costs.n != self.n || costs.k != self.k {
            return Err(Error::domain(format!(
                "cost slicing (n={}, K={}) does not match state (n={}, K={})",
                costs.n,
                costs.slices.len(),
                self.n,
                self.workers()
            )));
        }
        Ok(())
    }

    /// Phase operator; every worker uses only its own cost slice.
    pub fn apply_phase(&mut self, costs: &ShardedCosts, gamma: f64) -> Result<()> {
        self.check_costs(costs)?;
        self.shards
            .par_iter_mut()
            .zip(&costs.slices)
            .for_each(|(s, c)| apply_phase_slice(s, c, gamma));
        Ok(())
    }

    /// Sum of per-worker partial expectations, reduced in rank order.
    pub fn expectation(&self, costs: &ShardedCosts) -> Result<f64> {
        self.check_costs(costs)?;
        let partials: Vec<f64> = self
            .shards
            .par_iter()
            .zip(&costs.slices)
            .map(|(s, c)| expectation_slice(s, c))
            .collect();
        Ok(partials.into_iter().sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.shards
            .iter()
            .map(|s| s.iter().map(|a| a.norm_sqr()).sum::<f64>())
            .sum()
    }
}

/// Cost vector sliced exactly like a [`ShardedState`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShardedCosts {
    n: usize,
    k: usize,
    slices: Vec<Vec<f64>>,
}

impl ShardedCosts {
    /// Each worker evaluates the polynomial on its own index range.
    pub fn precompute(poly: &TermPolynomial, workers: usize) -> Result<Self> {
        let n = poly.n();
        let k = worker_bits(n, workers)?;
        let len = 1usize << (n - k);
        let slices = (0..workers)
            .map(|r| {
                let mut slice = alloc_filled(len, 0.0, "cost slice", n)?;
                accumulate_terms(poly, (r * len) as u64, &mut slice);
                Ok(slice)
            })
            .collect::<Result<_>>()?;
        Ok(Self { n, k, slices })
    }

    pub fn from_costs(costs: &CostVector, workers: usize) -> Result<Self> {
        let n = costs.n();
        let k = worker_bits(n, workers)?;
        let slices = costs.values().chunks(1 << (n - k)).map(|c| c.to_vec()).collect();
        Ok(Self { n, k, slices })
    }

    pub fn slice(&self, rank: usize) -> &[f64] {
        &self.slices[rank]
    }

    pub fn gather(&self) -> CostVector {
        CostVector::from_values(self.slices.concat()).expect("slices cover 2^n costs")
    }
}

/// Runs all QAOA layers on a sharded state.
pub fn run_layers(
    state: &mut ShardedState,
    costs: &ShardedCosts,
    params: &QaoaParams,
    mixer: &MixerSpec,
) -> Result<()> {
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        state.apply_phase(costs, gamma)?;
        state.apply_mixer(mixer, beta)?;
    }
    Ok(())
}

/// Gathered outcome of a sharded run.
#[derive(Debug, Clone)]
pub struct DistributedRun {
    pub result: QaoaResult,
    pub stats: ExchangeStats,
}

/// Sharded QAOA from a polynomial: each worker precomputes its own cost
/// slice, then state and costs are gathered at the end.
pub fn simulate_qaoa_distributed(
    poly: &TermPolynomial,
    params: &QaoaParams,
    mixer: &MixerSpec,
    workers: usize,
    initial: Option<&StateVector>,
) -> Result<DistributedRun> {
    let costs = ShardedCosts::precompute(poly, workers)?;
    run_with_costs(&costs, poly.n(), params, mixer, workers, initial)
}

/// Sharded QAOA reusing a simulator's cached diagonal.
pub fn simulate_with(
    sim: &QaoaSimulator,
    params: &QaoaParams,
    workers: usize,
    initial: Option<&StateVector>,
) -> Result<DistributedRun> {
    let costs = ShardedCosts::from_costs(&*sim.costs()?, workers)?;
    run_with_costs(&costs, sim.n(), params, sim.mixer(), workers, initial)
}

fn run_with_costs(
    costs: &ShardedCosts,
    n: usize,
    params: &QaoaParams,
    mixer: &MixerSpec,
    workers: usize,
    initial: Option<&StateVector>,
) -> Result<DistributedRun> {
    let mut state = match initial {
        Some(s) if s.n() != n => return Err(Error::DimensionMismatch { expected: n, got: s.n() }),
        Some(s) => ShardedState::scatter(s, workers)?,
        None if mixer.is_xy() => {
            return Err(Error::domain(format!(
                "{} mixer needs an explicit initial state",
                mixer.name()
            )))
        }
        None => ShardedState::uniform(n, workers)?,
    };
    run_layers(&mut state, costs, params, mixer)?;
    let result = QaoaResult::new(state.gather(), Arc::new(costs.gather()))?;
    Ok(DistributedRun { result, stats: state.stats() })
}
