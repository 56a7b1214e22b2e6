//! The rotation-aware convnet whose channels carry a global charge `μ`.
//! Derivative layers raise or lower the charge by one; multiplication layers
//! only couple charges that add up.

mod net;
mod stack;
mod weights;

pub use net::{fit_final_layer, forward, forward_signal, mult_layer, multinomial, phase_equivariance_check, scaling_limit_eval, ChargeConvNetSpec};
pub use stack::{diff_stage, flatten_diff, ChargedStack};
pub use weights::{LinearTerm, MultWeights, QuadraticTerm};
