//! Group-averaged shallow nets, polynomial-invariant ansatzes and the
//! permutation-invariant network, with random-feature ridge fitting.

mod activation;
mod ansatz;
mod fit;
mod poly;
mod rep;
mod shallow;
mod symnet;

pub use activation::Activation;
pub use ansatz::{IsotypeBlock, PolarizedAnsatz, PolyAnsatz};
pub use fit::{design_matrix, fit_outer, fit_ridge, fit_rows_csv, rmse, FitRow, RandomFeatureModel};
pub use poly::{PolyFeatureSet, Polynomial};
pub use rep::{permutations, OrthogonalRep};
pub use shallow::{symmetrize_eval, GroupAveragedNet, ShallowNet, SymmetrizeMode};
pub use symnet::{power_sums, symmetric_net_eval, SymNetModel, SymNetWeights};
