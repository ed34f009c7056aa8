//! Clock-driven simulator for heterogeneous System-on-Chip task scheduling.
//!
//! Jobs arrive continuously as directed acyclic task graphs and are mapped to
//! heterogeneous processing elements (PEs) by a pluggable scheduler. The crate
//! ships four heuristic policies (random, minimum execution time, earliest
//! task first, and a dynamic HEFT with insertion-based earliest-finish-time
//! selection) and a from-scratch actor-critic policy trained with
//! eclectic-interaction-matching (EIM) return redistribution.
//!
//! The simulation is deterministic: a trace is a pure function of
//! (catalog, platform, scheduler, seed).

pub mod bench;
pub mod config;
pub mod eim;
pub mod error;
pub mod heuristics;
pub mod kernel;
pub mod metrics;
pub mod neural;
pub mod platform;
pub mod rlenv;
pub mod scalar;
pub mod scheduler;
pub mod trace;
pub mod workload;

pub use error::{Result, SimError};
pub use scalar::Scalar;

/// Simulation clock, in integer clock signals.
pub type Clock = u64;

/// Default scalar for all real-valued quantities (rewards, returns, network
/// parameters). The numeric core is generic over [`Scalar`]; these aliases
/// pin the shipped instantiation.
pub type Real = f64;

/// Policy/value network at the default precision.
pub type PolicyNet = neural::PolicyValueNet<Real>;

/// Adaptive-moment optimizer state at the default precision.
pub type AdamState = neural::Adam<Real>;

/// Episode experience buffer at the default precision.
pub type EpisodeBuffer = eim::EimBuffer<Real>;

/// Splits a base seed into an independent stream for a named sub-component.
///
/// SplitMix64 finalizer over `seed ^ salt`; used everywhere a single run seed
/// must drive several decoupled random streams.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
