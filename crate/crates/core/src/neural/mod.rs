//! From-scratch actor-critic: feedforward policy/value network with explicit
//! reverse-mode gradients, adaptive-moment optimization with global norm
//! clipping, binary checkpoints and the episodic training loop.

mod adam;
pub mod checkpoint;
mod net;
mod train;

pub use adam::{Adam, UpdateOutcome};
pub use net::{greedy_action, sample_action, Forward, LossConfig, NetDims, PolicyValueNet};
pub use train::{train, write_curve_csv, EpisodeStats, TrainConfig, TrainOutput};
