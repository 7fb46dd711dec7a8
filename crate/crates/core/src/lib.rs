//! Weighted function-space machinery on sampled grids: Muckenhoupt weights,
//! weighted atoms, intrinsic square functions and weighted (weak) Lebesgue
//! quasi-norms.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atoms;
pub mod error;
pub mod grid;
pub mod intrinsic;
pub mod norms;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{convolve_scaled, integrate, make_grid, Cube, Grid, SampledFunction};
pub use weights::{CubeFamily, Weight, WeightKind};
