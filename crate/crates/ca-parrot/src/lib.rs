//! Context-Adaptive PARRoT: predictive Q-learning mesh routing for mobile
//! aerial networks, plus the deterministic discrete-event simulator used to
//! evaluate it.
//!
//! The library covers the full protocol stack and its evaluation harness:
//!
//! - [`mobility`] — controlled-waypoint motion and trajectory prediction
//! - [`channel`] — rural/sub-urban/urban radio environment prototypes
//!   (Friis, two-ray ground, Nakagami) and communication-range derivation
//! - [`routing`] — the chirp protocol, link-expiry-time geometry, the
//!   Q-update, and the timer-based commit of buffered route candidates
//! - [`adapt`] — online radio-environment classification (random forest,
//!   with ANN and linear SVM baselines for cross-validation), the backoff
//!   confirmation machine, and the per-environment parameter database
//! - [`sim`] — seeded discrete-event runs producing PDR/latency KPIs, a
//!   greedy geographic baseline, and the mobility-constrained
//!   route-availability upper bound
//! - [`cli`] — scenario files, batch runs, sweeps, classifier training
//!
//! ## Examples
//!
//! Each capability has a runnable example:
//!
//! ```text
//! cargo run --release -p ca-parrot --example trajectory_prediction
//! cargo run --release -p ca-parrot --example channel_models
//! cargo run --release -p ca-parrot --example link_expiry
//! cargo run --release -p ca-parrot --example chirp_routing
//! cargo run --release -p ca-parrot --example train_classifier
//! cargo run --release -p ca-parrot --example crossval_models
//! cargo run --release -p ca-parrot --example backoff_adaptation
//! cargo run --release -p ca-parrot --example simulate_rural
//! cargo run --release -p ca-parrot --example range_budget_sweep
//! cargo run --release -p ca-parrot --example availability_bound
//! ```
//!
//! The `ca-parrot` binary exposes the same machinery as subcommands
//! (`simulate`, `sweep`, `train`, `crossval`, `gen-corpus`, `bound`); see
//! the README for file formats.

pub mod adapt;
pub mod channel;
pub mod cli;
pub mod mobility;
pub mod routing;
pub mod sim;
