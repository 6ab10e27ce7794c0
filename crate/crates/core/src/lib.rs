//! Slotted simulator of proactive spectrum handoff in a multi-channel
//! cognitive radio ad hoc network.
//!
//! Secondary-user pairs share `M` channels with one primary user per channel.
//! Time alternates between a one-slot control phase, where pairs meet on a
//! common rendezvous channel and claim data channels in a shared pseudo-random
//! order, and a data phase. Under the greedy channel selection protocol pairs
//! read the PU schedule ahead and hand off before the PU returns; two reactive
//! baselines (random and idle-probability selection) run in the same frame.

pub mod baselines;
pub mod fig1;
pub mod gcs;
pub mod harness;
pub mod mac;
pub mod metrics;
pub mod model;
pub mod traffic;

pub use mac::{run_metrics, run_simulation};
pub use metrics::{avg_service_time, throughput, RunMetrics};
pub use model::{Channel, PairId, Protocol, SimConfig};
