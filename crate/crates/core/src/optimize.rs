//! Derivative-free local search over QAOA angles (Nelder-Mead).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qaoa::QaoaParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Maximum number of objective evaluations, including the initial simplex.
    pub budget: usize,
    /// Stop once every vertex is within this distance (max-norm) of the best.
    pub tolerance: f64,
    /// Offset of the initial simplex vertices along each coordinate.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { budget: 500, tolerance: 1e-6, initial_step: 0.05 }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub value: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub trajectory: Vec<Evaluation>,
}

struct Counter<F> {
    f: F,
    budget: usize,
    trajectory: Vec<Evaluation>,
    best: f64,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Counter<F> {
    /// `None` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.trajectory.len() >= self.budget {
            return Ok(None);
        }
        let value = (self.f)(x)?;
        if !value.is_finite() {
            return Err(Error::NonFinite { value, params: x.to_vec() });
        }
        self.best = self.best.min(value);
        self.trajectory.push(Evaluation { x: x.to_vec(), value, best_so_far: self.best });
        Ok(Some(value))
    }
}

fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

/// Minimizes `f` from `x0` with the standard Nelder-Mead moves (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2). Deterministic for a fixed `x0`.
///
/// Terminates when the budget is spent, the simplex collapses below
/// `tolerance`, or all vertices have the same value.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if opts.budget == 0 {
        return Err(Error::domain("optimization budget must be at least 1"));
    }
    let dim = x0.len();
    let mut counter = Counter { f, budget: opts.budget, trajectory: Vec::new(), best: f64::INFINITY };
    let finish = |counter: Counter<F>, x: Vec<f64>, value: f64, converged: bool| Minimum {
        x,
        value,
        evaluations: counter.trajectory.len(),
        converged,
        trajectory: counter.trajectory,
    };

    let Some(f0) = counter.eval(x0)? else { unreachable!("budget >= 1") };
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        match counter.eval(&x)? {
            Some(v) => simplex.push((x, v)),
            None => break,
        }
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best_x, best_v) = simplex[0].clone();
        if simplex.len() < dim + 1 {
            return Ok(finish(counter, best_x, best_v, false));
        }
        let worst_v = simplex[dim].1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best_x).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < opts.tolerance || worst_v - best_v <= 0.0 {
            return Ok(finish(counter, best_x, best_v, true));
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst_x = simplex[dim].0.clone();
        let second_worst_v = simplex[dim - 1].1;

        let xr = lerp(&centroid, &worst_x, -REFLECT);
        let Some(fr) = counter.eval(&xr)? else { break };

        if fr < best_v {
            let xe = lerp(&centroid, &xr, EXPAND);
            let Some(fe) = counter.eval(&xe)? else {
                simplex[dim] = (xr, fr);
                break;
            };
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second_worst_v {
            simplex[dim] = (xr, fr);
            continue;
        }

        let outside = fr < worst_v;
        let xc = if outside {
            lerp(&centroid, &xr, CONTRACT)
        } else {
            lerp(&centroid, &worst_x, CONTRACT)
        };
        let Some(fc) = counter.eval(&xc)? else { break };
        if (outside && fc <= fr) || (!outside && fc < worst_v) {
            simplex[dim] = (xc, fc);
            continue;
        }

        for vertex in &mut simplex[1..] {
            let x = lerp(&best_x, &vertex.0, SHRINK);
            match counter.eval(&x)? {
                Some(v) => *vertex = (x, v),
                None => break,
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    Ok(finish(counter, x, v, false))
}

/// One step of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub params: QaoaParams,
    pub value: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub best_params: QaoaParams,
    pub best_value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub trajectory: Vec<TrajectoryPoint>,
}

/// Nelder-Mead over the `2p` angles `[gammas..., betas...]`.
pub fn optimize_parameters<F>(
    mut objective: F,
    init: &QaoaParams,
    opts: &NelderMeadOptions,
) -> Result<OptimizationReport>
where
    F: FnMut(&QaoaParams) -> Result<f64>,
{
    let min = nelder_mead(
        |x| objective(&QaoaParams::from_flat(x)?),
        &init.to_flat(),
        opts,
    )?;
    let trajectory = min
        .trajectory
        .into_iter()
        .map(|e| {
            Ok(TrajectoryPoint {
                params: QaoaParams::from_flat(&e.x)?,
                value: e.value,
                best_so_far: e.best_so_far,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OptimizationReport {
        best_params: QaoaParams::from_flat(&min.x)?,
        best_value: min.value,
        evaluations: min.evaluations,
        converged: min.converged,
        trajectory,
    })
}
