//! Exponential-backoff confirmation of the classified environment.
//!
//! Classification is not trusted immediately and not repeated every
//! tick: a counter spaces the checks `w_b` ticks apart. Every
//! confirmation doubles `w_b` (up to a cap); any change snaps it back
//! to 1 so the new label is re-validated quickly.

use super::{ParameterDB, Rep};
use crate::routing::ParameterSet;

/// Largest backoff window (in commit ticks).
pub const BACKOFF_CAP: u32 = 64;

/// Confirmation machine state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackoffState {
    /// Current backoff window length, in ticks.
    pub window: u32,
    /// Ticks remaining until the next classification check.
    pub counter: u32,
    /// Label currently in force.
    pub label: Rep,
}

impl BackoffState {
    /// Starts at window 1, so the first tick already classifies.
    pub fn new(initial: Rep) -> Self {
        Self {
            window: 1,
            counter: 1,
            label: initial,
        }
    }
}

/// What one tick of the confirmation machine did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackoffOutcome {
    /// Counter still running; no check performed.
    Silent,
    /// Check was due but the classifier had no verdict; retry after a
    /// full window.
    NotReady,
    /// Classifier agreed with the current label; window doubled.
    Confirmed,
    /// Label changed; window reset to 1 and the new tuple activated.
    Switched(Rep, ParameterSet),
}

/// Advances the machine by one commit-timer tick. `classify` is invoked
/// only when the counter hits zero; it returns `None` when observations
/// are not yet sufficient.
pub fn backoff_tick(
    state: &mut BackoffState,
    db: &ParameterDB,
    classify: impl FnOnce() -> Option<Rep>,
) -> BackoffOutcome {
    state.counter = state.counter.saturating_sub(1);
    if state.counter > 0 {
        return BackoffOutcome::Silent;
    }
    match classify() {
        None => {
            state.counter = state.window;
            BackoffOutcome::NotReady
        }
        Some(label) if label == state.label => {
            state.window = (state.window * 2).min(BACKOFF_CAP);
            state.counter = state.window;
            BackoffOutcome::Confirmed
        }
        Some(label) => {
            state.label = label;
            state.window = 1;
            state.counter = 1;
            BackoffOutcome::Switched(label, db.lookup(label))
        }
    }
}
