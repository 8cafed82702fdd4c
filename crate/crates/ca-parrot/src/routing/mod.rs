//! The mesh routing protocol: announcement codec, link-expiry and
//! cohesion metrics, and the per-node state machine that turns received
//! announcements into committed greedy routes.

mod chirp;
mod metrics;
mod state;

pub use chirp::{vec_to_wire, Chirp, ChirpCodecError, NodeId, CHIRP_WIRE_BYTES};
pub use metrics::{compute_cohesion, compute_let, phi_let, q_update, ParameterSet};
pub use state::{
    ChirpOutcome, CommitOutcome, NeighborRecord, RouteEntry, RoutingConfig, RoutingState,
    SelfMotion, TimerConfig,
};

/// Routing-layer failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RoutingError {
    /// No committed, unexpired entry toward the destination.
    #[error("no route toward {destination}")]
    NoRoute { destination: NodeId },
    /// Link range for the expiry quadratic must be positive.
    #[error("link range must be positive, got {0} m")]
    NonPositiveRange(f64),
}
