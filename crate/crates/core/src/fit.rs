//! Straight-line least squares used by the decay and convergence fits.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 for fewer than three points on a line.
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y = intercept + slope * x`. `None` for fewer than two distinct `x`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
        points: n,
    })
}

/// Per distinct key, the largest value; sorted by key.
pub fn upper_envelope(samples: impl IntoIterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut env: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for (d, v) in samples {
        let e = env.entry(d).or_insert(v);
        if v > *e {
            *e = v;
        }
    }
    env.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        let f = fit_line(&pts).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15);
        assert!((f.intercept - 2.0).abs() < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
        assert!(fit_line(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn envelope_keeps_maxima() {
        let env = upper_envelope(vec![(2, 1.0), (0, 3.0), (2, 5.0), (1, 0.5)]);
        assert_eq!(env, vec![(0, 3.0), (1, 0.5), (2, 5.0)]);
    }
}
