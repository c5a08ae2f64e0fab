//! Empirical geometric decay of inverse Gram matrices.

use serde::{Deserialize, Serialize};

use crate::basis::{IndexMetric, SplineSpace};
use crate::error::{Error, Result};
use crate::fit::{fit_line, upper_envelope, LineFit};
use crate::projector::DualBasis;

/// Weight multiplying `|a_ij|` before the envelope is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Length of the convex hull of both supports.
    Hull,
    /// The larger of the two support lengths.
    MaxSupport,
}

/// Envelope values below this fraction of the largest one are treated as rounding noise.
pub const DECAY_NOISE_FLOOR: f64 = 1e-10;

/// Empirical constants in `|a_ij| w_ij <= K gamma^{d(i,j)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub weighting: Weighting,
    pub metric: IndexMetric,
    /// Smallest `K` for which the bound holds on every pair, given `gamma_hat`.
    pub k_hat: f64,
    pub gamma_hat: f64,
    /// `max |a_ij| w_ij / (K gamma^d)`; 1 by construction of `k_hat`.
    pub max_violation_ratio: f64,
    /// All off-diagonal entries vanish (order one): no decay to fit.
    pub exact_banded: bool,
    pub line: Option<LineFit>,
    /// Distances used by the least-squares fit.
    pub fitted_distances: usize,
    /// `(d, max_{d(i,j) = d} |a_ij| w_ij)` for every distance that occurs.
    pub envelope: Vec<(usize, f64)>,
}

/// Fits `gamma_hat` to the upper envelope of the weighted inverse Gram entries.
///
/// The fit is ordinary least squares of `log E_d` against `d` over the distances beyond the
/// Gram bandwidth (`d >= k`) whose envelope exceeds [`DECAY_NOISE_FLOOR`] times its maximum.
pub fn fit_inverse_decay<S: SplineSpace<f64>>(
    db: &DualBasis<f64, S>,
    weighting: Weighting,
) -> Result<DecayFit> {
    let space = db.space();
    let metric = space.metric();
    let n = space.dim();
    let k = space.order();
    let weight = |i: usize, j: usize| match weighting {
        Weighting::Hull => space.hull_length(i, j),
        Weighting::MaxSupport => space.support_length(i).max(space.support_length(j)),
    };
    let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            pairs.push((metric.dist(i, j), db.a(i, j).abs() * weight(i, j)));
        }
    }
    let envelope = upper_envelope(pairs.iter().copied());
    let top = envelope.iter().fold(0.0f64, |m, e| m.max(e.1));
    let exact_banded = pairs.iter().all(|&(d, v)| d == 0 || v == 0.0);
    if exact_banded {
        return Ok(DecayFit {
            weighting,
            metric,
            k_hat: top,
            gamma_hat: 0.0,
            max_violation_ratio: 1.0,
            exact_banded,
            line: None,
            fitted_distances: 0,
            envelope,
        });
    }
    let pts: Vec<(f64, f64)> = envelope
        .iter()
        .filter(|e| e.0 >= k && e.1 > DECAY_NOISE_FLOOR * top)
        .map(|&(d, v)| (d as f64, v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateFit {
            distinct: pts.len(),
        });
    }
    let line = fit_line(&pts).ok_or(Error::DegenerateFit {
        distinct: pts.len(),
    })?;
    let gamma_hat = line.slope.exp();
    let bound = |d: usize| gamma_hat.powi(d as i32);
    let k_hat = pairs.iter().fold(0.0f64, |m, &(d, v)| m.max(v / bound(d)));
    let max_violation_ratio = pairs
        .iter()
        .fold(0.0f64, |m, &(d, v)| m.max(v / (k_hat * bound(d))));
    Ok(DecayFit {
        weighting,
        metric,
        k_hat,
        gamma_hat,
        max_violation_ratio,
        exact_banded,
        line: Some(line),
        fitted_distances: pts.len(),
        envelope,
    })
}

impl DecayFit {
    /// `K gamma^d`.
    pub fn bound(&self, d: usize) -> f64 {
        self.k_hat * self.gamma_hat.powi(d as i32)
    }

    /// Largest `|a_ij| w'_ij / (K gamma^d)` when the entries are re-weighted with `other`.
    pub fn reweighted_violation<S: SplineSpace<f64>>(
        &self,
        db: &DualBasis<f64, S>,
        other: Weighting,
    ) -> f64 {
        let space = db.space();
        let n = space.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let w = match other {
                    Weighting::Hull => space.hull_length(i, j),
                    Weighting::MaxSupport => space.support_length(i).max(space.support_length(j)),
                };
                let d = self.metric.dist(i, j);
                let b = self.bound(d);
                let v = db.a(i, j).abs() * w;
                if v > 0.0 {
                    worst = worst.max(v / b);
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BSplineBasis, PeriodicBSplineBasis};
    use crate::knots::{KnotVector, PeriodicKnotVector};

    #[test]
    fn order_one_is_exact_banded() {
        let kv = KnotVector::new(vec![0.0, 0.2, 0.5, 1.0], 1).unwrap();
        let db = DualBasis::new(BSplineBasis::new(kv)).unwrap();
        let fit = fit_inverse_decay(&db, Weighting::Hull).unwrap();
        assert!(fit.exact_banded);
        assert_eq!(fit.gamma_hat, 0.0);
        assert_eq!(fit.k_hat, 1.0);
    }

    #[test]
    fn hat_functions_decay_below_point_three() {
        let kv = KnotVector::uniform(63, 2, 0.0, 1.0).unwrap();
        let db = DualBasis::new(BSplineBasis::new(kv)).unwrap();
        let fit = fit_inverse_decay(&db, Weighting::Hull).unwrap();
        assert!(fit.gamma_hat < 0.3, "{}", fit.gamma_hat);
        assert!((fit.max_violation_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_space_is_degenerate() {
        let pk = PeriodicKnotVector::uniform(5, 2).unwrap();
        let db = DualBasis::new(PeriodicBSplineBasis::new(pk)).unwrap();
        assert!(matches!(
            fit_inverse_decay(&db, Weighting::Hull),
            Err(Error::DegenerateFit { .. })
        ));
    }
}
