//! Wall-clock timing of QAOA runs as a function of circuit depth.

use std::time::Instant;

use serde::Serialize;

use crate::distributed;
use crate::error::Result;
use crate::qaoa::{QaoaParams, QaoaSimulator};
use crate::statevec::StateVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub p: usize,
    /// One-time cost-vector precompute, shared by every row.
    pub precompute_s: f64,
    /// Median wall time of the layered evolution alone.
    pub simulate_s: f64,
    pub total_s: f64,
    pub per_layer_s: f64,
}

pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

/// Least-squares line `y = intercept + slope * x`; returns
/// `(intercept, slope, residuals)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    (intercept, slope, residuals)
}

/// Times `repeats` simulations for every depth in `depths`. The cost vector
/// is computed once, before the first row. Depths are interleaved within each
/// repeat round so slow drift in machine load hits every depth alike.
pub fn layer_sweep(
    sim: &QaoaSimulator,
    depths: &[usize],
    repeats: usize,
    params_for: impl Fn(usize) -> QaoaParams,
    initial: Option<&StateVector>,
    workers: usize,
) -> Result<Vec<BenchRow>> {
    sim.costs()?;
    let precompute_s = sim.precompute_time().as_secs_f64();
    let params: Vec<QaoaParams> = depths.iter().map(|&p| params_for(p)).collect();
    let mut times = vec![Vec::with_capacity(repeats.max(1)); depths.len()];
    for _ in 0..repeats.max(1) {
        for (params, times) in params.iter().zip(&mut times) {
            let start = Instant::now();
            if workers > 1 {
                distributed::simulate_with(sim, params, workers, initial)?;
            } else {
                match initial {
                    Some(s) => sim.simulate_from(params, s.clone())?,
                    None => sim.simulate(params)?,
                };
            }
            times.push(start.elapsed().as_secs_f64());
        }
    }
    Ok(depths
        .iter()
        .zip(&mut times)
        .map(|(&p, times)| {
            let simulate_s = median(times);
            BenchRow {
                p,
                precompute_s,
                simulate_s,
                total_s: precompute_s + simulate_s,
                per_layer_s: if p > 0 { simulate_s / p as f64 } else { 0.0 },
            }
        })
        .collect())
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("p,precompute_s,simulate_s,total_s,per_layer_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.9},{:.9},{:.9},{:.9}\n",
            r.p, r.precompute_s, r.simulate_s, r.total_s, r.per_layer_s
        ));
    }
    out
}
