//! Invariant and equivariant approximation models on finite groups, grids and
//! the plane, with a verification harness.
//!
//! Modules, bottom up:
//! - [`grid`]: centered grids, signals, exact grid symmetries, discretization.
//! - [`local_ops`]: finite-difference stencils, spectral symbols, Gaussian-derivative kernels.
//! - [`invariant`]: group-averaged and polynomial-invariant shallow nets, the permutation-invariant net.
//! - [`convnets`]: basic and downsampled convolutional nets.
//! - [`charge`]: the rotation-aware convnet with charge-labeled channels.
//! - [`harness`]: experiment configs, reports and the acceptance suite.

pub mod charge;
pub mod cli;
pub mod convnets;
pub mod error;
pub mod field;
mod fmt;
pub mod grid;
pub mod harness;
pub mod invariant;
pub mod local_ops;
pub mod quadrature;
pub mod zpoly;

pub use error::{Error, Result};
pub use fmt::fmt_sig;
pub use field::{AnalyticField, FieldKind};
pub use grid::{discretize, discretize_on, norms, FieldType, GridSpec, Norms, Signal};
pub use zpoly::ZPoly;
