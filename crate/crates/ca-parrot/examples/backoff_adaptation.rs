//! The exponential-backoff confirmation machine.
//!
//! A raw classifier verdict never switches parameters directly: agreement
//! doubles the check window (1, 2, 4, ... 64 ticks) so a settled node
//! classifies ever more rarely, while a single disagreement resets the
//! window to 1 and activates the new environment's tuple immediately.

use ca_parrot::adapt::{backoff_tick, BackoffOutcome, BackoffState, ParameterDB, Rep};

fn main() {
    let db = ParameterDB::default();
    let mut state = BackoffState::new(Rep::Rural);
    println!("start: label {:?}, window {}", state.label, state.window);
    println!();
    println!("{:>5}  {:>7}  {:>8}  outcome", "tick", "window", "counter");

    // Scripted verdict stream: warm-up with no verdict, a stretch of
    // agreement, one urban disagreement, then agreement on urban.
    let verdict = |tick: u64| -> Option<Rep> {
        match tick {
            0 => None,
            1..=40 => Some(Rep::Rural),
            41 => Some(Rep::Urban),
            _ => Some(Rep::Urban),
        }
    };

    for tick in 0..48u64 {
        let outcome = backoff_tick(&mut state, &db, || verdict(tick));
        let show = match outcome {
            BackoffOutcome::Silent => None,
            BackoffOutcome::NotReady => Some("no verdict yet; retry after a full window".to_owned()),
            BackoffOutcome::Confirmed => Some(format!("confirmed {:?}; window doubled", state.label)),
            BackoffOutcome::Switched(label, params) => Some(format!(
                "switched to {label:?}; tuple (r_b {}, alpha {}, gamma0 {}, lambda {}, omega {}) active",
                params.range_budget_m, params.alpha, params.gamma0, params.lambda, params.omega
            )),
        };
        if let Some(text) = show {
            println!("{:>5}  {:>7}  {:>8}  {text}", tick, state.window, state.counter);
        }
    }

    println!();
    println!("window growth is capped:");
    let mut settled = BackoffState::new(Rep::Suburban);
    let mut doublings = 0;
    for _ in 0..100_000u64 {
        if backoff_tick(&mut settled, &db, || Some(Rep::Suburban)) == BackoffOutcome::Confirmed {
            doublings += 1;
        }
    }
    println!(
        "  after {doublings} confirmations the window holds at {} ticks",
        settled.window
    );
}
