//! Seeded simulation runs of the rural reference scenario.
//!
//! Loads the bundled rural scenario, trims it to 120 s so the example
//! stays quick, runs three seeds, and prints per-run KPIs with the batch
//! summary. Rerunning a seed reproduces its row bit for bit.

use ca_parrot::cli::summarize;
use ca_parrot::sim::{run, Scenario};
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/rural.toml");
    let mut scenario = Scenario::load(&path).expect("scenario loads");
    scenario.duration_s = 120.0;
    scenario.validate().expect("scenario is valid");
    println!(
        "{}: {} nodes, {:.0} s, {} flow(s), channel {}",
        scenario.name,
        scenario.node_count,
        scenario.duration_s,
        scenario.traffic.len(),
        scenario.channel.name()
    );
    println!();

    let seeds = [1u64, 2, 3];
    let mut records = Vec::new();
    println!(
        "{:>5}  {:>7}  {:>10}  {:>9}  {:>6}  {:>26}",
        "seed", "pdr", "p50 [ms]", "hops", "sent", "drops (route/link/ttl)"
    );
    for seed in seeds {
        let kpi = run(&scenario, seed).expect("run succeeds");
        println!(
            "{:>5}  {:>7.4}  {:>10.2}  {:>9.2}  {:>6}  {:>10} / {:>4} / {:>4}",
            seed,
            kpi.pdr,
            kpi.latency_p50_s * 1e3,
            kpi.mean_hop_count,
            kpi.packets_sent,
            kpi.drops_no_route,
            kpi.drops_link,
            kpi.drops_ttl
        );
        records.push(kpi);
    }

    let summary = summarize(&records);
    println!();
    println!(
        "mean pdr {:.4} (95% CI {:.4} .. {:.4}) over {} runs",
        summary.pdr.mean, summary.pdr.ci95[0], summary.pdr.ci95[1], summary.runs
    );
    println!(
        "mean latency {:.2} ms, mean hop count {:.2}",
        summary.mean_latency_s.mean * 1e3,
        summary.mean_hop_count.mean
    );

    let replay = run(&scenario, seeds[0]).expect("replay succeeds");
    assert_eq!(replay, records[0]);
    println!();
    println!("seed {} replayed: KPIs identical", seeds[0]);
}
