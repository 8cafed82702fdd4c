//! Mobility-constrained route availability as an upper bound.
//!
//! For each seed the bound replays the exact node trajectories and asks,
//! once per second, whether any geometric multi-hop path connects the
//! flow endpoints at all. No routing protocol on the same trajectories
//! can deliver a larger fraction than the time such a path exists, so
//! achieved PDR sits at or below the bound; the gap is what the protocol
//! leaves on the table.

use ca_parrot::sim::{route_availability_bound, run, Scenario};
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/rural.toml");
    let mut scenario = Scenario::load(&path).expect("scenario loads");
    scenario.duration_s = 120.0;
    println!("rural, {:.0} s, per-seed geometric reachability vs. achieved pdr", scenario.duration_s);
    println!();
    println!("{:>5}  {:>8}  {:>8}  {:>7}", "seed", "bound", "pdr", "gap");

    let mut bounds = Vec::new();
    let mut pdrs = Vec::new();
    for seed in 1u64..=6 {
        let bound = route_availability_bound(&scenario, seed).expect("bound computes");
        let kpi = run(&scenario, seed).expect("run succeeds");
        assert!(
            kpi.pdr <= bound + 1e-9,
            "protocol cannot beat geometry: pdr {} vs bound {}",
            kpi.pdr,
            bound
        );
        println!("{:>5}  {:>8.4}  {:>8.4}  {:>7.4}", seed, bound, kpi.pdr, bound - kpi.pdr);
        bounds.push(bound);
        pdrs.push(kpi.pdr);
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!();
    println!(
        "mean bound {:.4}, mean achieved {:.4}; the protocol realizes {:.1}% \
         of what the trajectories allow",
        mean(&bounds),
        mean(&pdrs),
        100.0 * mean(&pdrs) / mean(&bounds)
    );
}
