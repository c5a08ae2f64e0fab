//! Orthogonal projectors onto spline spaces on an interval and on the circle.

pub mod analysis;
pub mod basis;
pub mod cli;
pub mod error;
pub mod fit;
pub mod gram;
pub mod knots;
pub mod linalg;
pub mod projector;
pub mod scalar;

pub use basis::{BSplineBasis, IndexMetric, PeriodicBSplineBasis, SplineSpace};
pub use error::{Error, Result};
pub use gram::{MomentOptions, Moments, QuadratureRule};
pub use knots::{KnotMode, KnotVector, Knots, PeriodicKnotVector};
pub use projector::{DualBasis, Projection, Projector, Spline};
pub use scalar::Real;

pub type KnotVectorF64 = KnotVector<f64>;
pub type KnotVectorF32 = KnotVector<f32>;
pub type PeriodicKnotVectorF64 = PeriodicKnotVector<f64>;
pub type PeriodicKnotVectorF32 = PeriodicKnotVector<f32>;
pub type BSplineBasisF64 = BSplineBasis<f64>;
pub type BSplineBasisF32 = BSplineBasis<f32>;
pub type PeriodicBSplineBasisF64 = PeriodicBSplineBasis<f64>;
pub type PeriodicBSplineBasisF32 = PeriodicBSplineBasis<f32>;
pub type ProjectorF64<S> = Projector<f64, S>;
pub type ProjectorF32<S> = Projector<f32, S>;
