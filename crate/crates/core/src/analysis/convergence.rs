//! Pointwise and uniform convergence of periodic projections under refinement.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::PeriodicBSplineBasis;
use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::gram::MomentOptions;
use crate::projector::Projector;

use super::rng::{periodic_knots, KnotLaw};

/// Test functions on the torus `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fn", rename_all = "snake_case")]
pub enum TestFunction {
    /// `sin 2 pi x`.
    Sin,
    /// `1 - 2 |x - 1/2|`.
    Hat,
    /// 1 on `[0, jump)`, 0 on `[jump, 1)`.
    Step { jump: f64 },
    /// `|x - center|^{-alpha}` (distance on the torus).
    Power { center: f64, alpha: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        let x = PeriodicBSplineBasis::reduce(x);
        match *self {
            TestFunction::Sin => (2.0 * PI * x).sin(),
            TestFunction::Hat => 1.0 - 2.0 * (x - 0.5).abs(),
            TestFunction::Step { jump } => {
                if x < jump {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Power { center, alpha } => {
                let d = (x - center).abs();
                d.min(1.0 - d).powf(-alpha)
            }
        }
    }

    /// Points where the function is not smooth (jumps and kinks).
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            TestFunction::Sin => Vec::new(),
            TestFunction::Hat => vec![0.0, 0.5],
            TestFunction::Step { jump } => vec![0.0, jump],
            TestFunction::Power { .. } => Vec::new(),
        }
    }

    pub fn singularities(&self) -> Vec<f64> {
        match *self {
            TestFunction::Power { center, .. } => vec![center],
            _ => Vec::new(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, TestFunction::Sin)
    }

    /// Moment options with this function's breakpoints and singularities declared.
    pub fn moment_options(&self, cells_per_interval: usize) -> MomentOptions<f64> {
        MomentOptions {
            breakpoints: self.breakpoints(),
            singularities: self.singularities(),
            ..MomentOptions::with_cells(cells_per_interval)
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TestFunction::Sin => f.write_str("sin"),
            TestFunction::Hat => f.write_str("hat"),
            TestFunction::Step { jump } => write!(f, "step:{jump}"),
            TestFunction::Power { center, alpha } => write!(f, "power:{center}:{alpha}"),
        }
    }
}

/// Accepts `sin`, `hat`, `step`, `step:J`, `power13`, `power12` and `power:C:A`.
impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown test function {s:?}"));
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["sin"] => Ok(TestFunction::Sin),
            ["hat"] => Ok(TestFunction::Hat),
            ["step"] => Ok(TestFunction::Step { jump: 0.3 }),
            ["step", j] => {
                let jump = num(j)?;
                if !(jump > 0.0 && jump < 1.0) {
                    return Err(bad());
                }
                Ok(TestFunction::Step { jump })
            }
            ["power13"] => Ok(TestFunction::Power {
                center: 0.5,
                alpha: 1.0 / 3.0,
            }),
            ["power12"] => Ok(TestFunction::Power {
                center: 0.5,
                alpha: 0.5,
            }),
            ["power", c, a] => {
                let (center, alpha) = (num(c)?, num(a)?);
                if !(0.0..1.0).contains(&center) || !(alpha > 0.0 && alpha < 1.0) {
                    return Err(bad());
                }
                Ok(TestFunction::Power { center, alpha })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub function: TestFunction,
    pub k: usize,
    pub law: KnotLaw,
    pub seed: u64,
    pub ns: Vec<usize>,
    /// Fixed points at which the error is recorded.
    pub tracked: Vec<f64>,
    /// Size of the evaluation grid `x_p = (p + 0.37) / grid`.
    pub grid: usize,
    pub cells_per_interval: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub mesh: f64,
    pub sup_error: f64,
    pub l1_error: f64,
    pub tracked_errors: Vec<f64>,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Fit of `log sup_error` against `log mesh`; its slope is the empirical order.
    pub order_fit: Option<LineFit>,
    pub mesh_non_increasing: bool,
}

/// Offset of the evaluation grid inside each grid cell, chosen to avoid knots of dyadic
/// sequences.
pub const GRID_OFFSET: f64 = 0.37;

/// Projects the test function onto periodic splines with `n` knots for every `n` of the
/// configuration and records the errors.
pub fn run_convergence_experiment(cfg: &ConvergenceConfig) -> Result<ConvergenceTable> {
    if cfg.ns.is_empty() || cfg.ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("ns must be non-empty and strictly increasing".into()));
    }
    if cfg.grid == 0 {
        return Err(Error::InvalidArgument("grid must be positive".into()));
    }
    let f = |x: f64| cfg.function.eval(x);
    let opts = cfg.function.moment_options(cfg.cells_per_interval);
    let grid: Vec<f64> = (0..cfg.grid)
        .map(|p| (p as f64 + GRID_OFFSET) / cfg.grid as f64)
        .collect();
    let rows = cfg
        .ns
        .par_iter()
        .map(|&n| -> Result<ConvergenceRow> {
            let pk = periodic_knots(cfg.law, cfg.seed, cfg.k, n, 0)?;
            let mesh = pk.mesh_width();
            let proj = Projector::new(PeriodicBSplineBasis::new(pk))?.project(&f, &opts)?;
            let s = &proj.spline;
            let mut sup_error = 0.0f64;
            let mut l1 = 0.0f64;
            for &x in &grid {
                let e = (s.eval(x)? - f(x)).abs();
                sup_error = sup_error.max(e);
                l1 += e;
            }
            let tracked_errors = cfg
                .tracked
                .iter()
                .map(|&x| Ok((s.eval(x)? - f(x)).abs()))
                .collect::<Result<Vec<f64>>>()?;
            Ok(ConvergenceRow {
                n,
                mesh,
                sup_error,
                l1_error: l1 / grid.len() as f64,
                tracked_errors,
                quadrature_error: proj.quadrature_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sup_error > 0.0)
        .map(|r| (r.mesh.ln(), r.sup_error.ln()))
        .collect();
    let mesh_non_increasing = rows.windows(2).all(|w| w[1].mesh <= w[0].mesh);
    Ok(ConvergenceTable {
        order_fit: fit_line(&pts),
        rows,
        mesh_non_increasing,
    })
}

impl ConvergenceTable {
    /// Largest relative increase of the tracked error at `index` between consecutive rows
    /// with `n >= n_min`; zero or negative when the errors decrease.
    pub fn tracked_jitter(&self, index: usize, n_min: usize) -> f64 {
        let errs: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.n >= n_min)
            .map(|r| r.tracked_errors[index])
            .collect();
        errs.windows(2)
            .map(|w| (w[1] - w[0]) / w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_catalog() {
        assert_eq!("sin".parse::<TestFunction>().unwrap(), TestFunction::Sin);
        assert_eq!(
            "step".parse::<TestFunction>().unwrap(),
            TestFunction::Step { jump: 0.3 }
        );
        assert_eq!(
            "power:0.5:0.25".parse::<TestFunction>().unwrap(),
            TestFunction::Power {
                center: 0.5,
                alpha: 0.25
            }
        );
        assert!("power:0.5:1.5".parse::<TestFunction>().is_err());
        assert!("cos".parse::<TestFunction>().is_err());
        for f in ["sin", "hat", "step:0.3", "power:0.5:0.5"] {
            assert_eq!(f.parse::<TestFunction>().unwrap().to_string(), f);
        }
    }

    #[test]
    fn power_function_is_periodic_distance() {
        let f = TestFunction::Power {
            center: 0.9,
            alpha: 0.5,
        };
        assert!((f.eval(0.1) - 0.2f64.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn smooth_function_converges() {
        let cfg = ConvergenceConfig {
            function: TestFunction::Sin,
            k: 3,
            law: KnotLaw::Uniform,
            seed: 0,
            ns: vec![8, 16, 32],
            tracked: vec![0.1, 0.25],
            grid: 500,
            cells_per_interval: 4,
        };
        let t = run_convergence_experiment(&cfg).unwrap();
        assert!(t.rows[2].sup_error < t.rows[0].sup_error);
        assert!(t.mesh_non_increasing);
        let order = t.order_fit.unwrap().slope;
        assert!(order > 2.5 && order < 3.5, "{order}");
    }
}
