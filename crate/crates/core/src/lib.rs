//! Euler's elastica image denoising.
//!
//! The crate provides the discrete operators ([`grid`]), energy and quality
//! metrics ([`model`]), four augmented Lagrangian solvers ([`solvers`]),
//! synthetic test images with reproducible noise ([`synth`]) and grayscale
//! image plus trace file I/O ([`imgio`]).

pub mod grid;
pub mod imgio;
pub mod model;
pub mod solvers;
pub mod synth;

pub use grid::{div_backward, grad_forward, inner_product, laplacian, GridError, ScalarGrid, VectorField};
pub use model::{
    elastica_energy, nmad, norm_n, nrmse, psnr, relative_residual, IterationTrace, MetricError,
    ParamError, SolverParams, SolverState, TraceRecord,
};
pub use solvers::{run, RunOutput, SolverError, SolverKind, StopRule};
