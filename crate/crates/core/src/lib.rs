//! Compound-stencil kernels from a weather-model dycore, plus the tooling to
//! study them as near-memory accelerator workloads.
//!
//! * [`grid`]: dense 3D fields, synthetic initialisation, comparison.
//! * [`kernels`]: horizontal diffusion, vertical advection, copy, a
//!   tridiagonal solver and exact FLOP counts.
//! * [`tiling`]: halo-aware window decomposition and tile execution.
//! * [`perfmodel`]: analytic bandwidth, scaling, roofline and energy model.
//! * [`autotune`]: Pareto search over tile sizes.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod autotune;
pub mod grid;
pub mod kernels;
pub mod perfmodel;
pub mod real;
pub mod tiling;

pub use grid::{Box3, Dims3, Grid3D, Halo, InitSpec, Region};
pub use kernels::Kernel;
pub use real::{Precision, Real};
