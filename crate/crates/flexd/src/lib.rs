//! Sum secrecy rate optimization for flexible-duplex wireless networks.
//!
//! In a flexible-duplex network each user pair picks, per resource block,
//! which member transmits. This crate maximizes the network's sum secrecy
//! rate against coordinated MMSE eavesdroppers with two optimizers over one
//! shared objective:
//!
//! * [`classical`] — block-coordinate search alternating a projected-gradient
//!   power step with a greedy direction step, plus half-duplex and max-power
//!   baselines;
//! * [`gnn`] / [`train`] — an unsupervised graph neural scheduler over a
//!   pair-per-node graph, with an eavesdropper-CSI variant and a
//!   distance-proxy variant for when eavesdropper channels are unknown.
//!
//! [`sim`] draws reproducible network realizations (placement, Rayleigh
//! fading, free-space path loss, log-normal shadowing); [`secrecy`] holds the
//! SINR and rate definitions every method is scored against; [`autodiff`] is
//! the reverse-mode engine both the trainer and the classical power step
//! differentiate through. [`harness`] runs dataset generation, comparison
//! sweeps, and timing benchmarks behind the `flexd` CLI.
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability.

pub mod autodiff;
pub mod linalg;
pub mod secrecy;
pub mod sim;
pub mod tensor;

pub use sim::{NetworkRealization, SimConfig};
pub use secrecy::{RelaxedSchedule, Schedule};
