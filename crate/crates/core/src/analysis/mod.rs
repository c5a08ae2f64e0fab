//! Numerical experiments on the projectors: decay of inverse Gram matrices, pointwise
//! bounds, uniform boundedness sweeps and convergence studies.

pub mod bounds;
pub mod convergence;
pub mod decay;
pub mod rng;
pub mod sweep;

pub use bounds::{
    cell_samples, check_cut_comparison, check_dual_expansion_bound, check_single_cell_decay, lp_norm,
    CellFunction, CutReport, DualExpansionReport, DualExpansionSample, SingleCellReport, SingleCellSample, PNorm,
};
pub use convergence::{
    run_convergence_experiment, ConvergenceConfig, ConvergenceRow, ConvergenceTable,
    TestFunction,
};
pub use decay::{fit_inverse_decay, DecayFit, Weighting, DECAY_NOISE_FLOOR};
pub use rng::KnotLaw;
pub use sweep::{sweep_uniform_boundedness, OrderSummary, SweepConfig, SweepRow, SweepTable};
