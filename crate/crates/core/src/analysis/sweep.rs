//! Lebesgue constants of periodic (and clamped) projectors across orders, dimensions and
//! random knot sequences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BSplineBasis, PeriodicBSplineBasis};
use crate::error::{Error, Result};
use crate::projector::DualBasis;

use super::rng::{clamped_knots, periodic_knots, KnotLaw};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub orders: Vec<usize>,
    pub ns: Vec<usize>,
    pub law: KnotLaw,
    /// Ignored (treated as 1) for the uniform law.
    pub trials: usize,
    pub seed: u64,
    pub grid_per_cell: usize,
    /// Also measure the projector onto clamped splines with `n` cells on `[0, 1]`.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub n: usize,
    pub trial: usize,
    /// Largest over smallest cell of the periodic sequence.
    pub mesh_ratio: f64,
    pub periodic: f64,
    pub clamped: Option<f64>,
}

/// Per-order aggregate of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSummary {
    pub k: usize,
    /// Empirical `c_k`: the largest periodic Lebesgue constant seen.
    pub c_hat: f64,
    /// `(n, max over trials)`.
    pub per_n: Vec<(usize, f64)>,
    /// Largest over smallest entry of `per_n`.
    pub flatness: f64,
    pub clamped_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<OrderSummary>,
}

/// Lebesgue constants for every `(k, n, trial)`; tuples run in parallel and every tuple
/// draws its knots from its own stream, so the table does not depend on scheduling.
pub fn sweep_uniform_boundedness(cfg: &SweepConfig) -> Result<SweepTable> {
    if cfg.orders.is_empty() || cfg.ns.is_empty() {
        return Err(Error::InvalidArgument("orders and ns must be non-empty".into()));
    }
    if cfg.grid_per_cell < 4 {
        return Err(Error::InvalidArgument("grid per cell must be at least 4".into()));
    }
    let trials = if cfg.law.is_random() { cfg.trials.max(1) } else { 1 };
    let tuples: Vec<(usize, usize, usize)> = cfg
        .orders
        .iter()
        .flat_map(|&k| {
            cfg.ns
                .iter()
                .flat_map(move |&n| (0..trials).map(move |t| (k, n, t)))
        })
        .collect();
    let rows = tuples
        .par_iter()
        .map(|&(k, n, trial)| -> Result<SweepRow> {
            let pk = periodic_knots(cfg.law, cfg.seed, k, n, trial)?;
            let cells: Vec<f64> = (0..n as isize).map(|j| pk.s(j + 1) - pk.s(j)).collect();
            let mesh_ratio = cells.iter().fold(0.0f64, |m, &c| m.max(c))
                / cells.iter().fold(f64::INFINITY, |m, &c| m.min(c));
            let periodic = DualBasis::new(PeriodicBSplineBasis::new(pk))?
                .lebesgue_constant(cfg.grid_per_cell);
            let clamped = if cfg.clamped {
                let kv = clamped_knots(cfg.law, cfg.seed, k, n, trial)?;
                Some(DualBasis::new(BSplineBasis::new(kv))?.lebesgue_constant(cfg.grid_per_cell))
            } else {
                None
            };
            Ok(SweepRow {
                k,
                n,
                trial,
                mesh_ratio,
                periodic,
                clamped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries = cfg
        .orders
        .iter()
        .map(|&k| {
            let of_k: Vec<&SweepRow> = rows.iter().filter(|r| r.k == k).collect();
            let per_n: Vec<(usize, f64)> = cfg
                .ns
                .iter()
                .map(|&n| {
                    let m = of_k
                        .iter()
                        .filter(|r| r.n == n)
                        .fold(0.0f64, |m, r| m.max(r.periodic));
                    (n, m)
                })
                .collect();
            let hi = per_n.iter().fold(0.0f64, |m, p| m.max(p.1));
            let lo = per_n.iter().fold(f64::INFINITY, |m, p| m.min(p.1));
            let clamped_max = cfg.clamped.then(|| {
                of_k.iter()
                    .filter_map(|r| r.clamped)
                    .fold(0.0f64, f64::max)
            });
            OrderSummary {
                k,
                c_hat: hi,
                per_n,
                flatness: hi / lo,
                clamped_max,
            }
        })
        .collect();
    Ok(SweepTable { rows, summaries })
}
