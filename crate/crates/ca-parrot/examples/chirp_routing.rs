//! The chirp protocol end to end on a three-node chain.
//!
//! A, B, C sit 200 m apart in a line; the assumed range (~230 m) links
//! A-B and B-C but not A-C. A announces itself every 0.5 s. B buffers the
//! candidate, rebroadcasts the chirp with its own value estimate toward A,
//! and C learns the two-hop route from that rewritten copy. Commit timers
//! fold buffered candidates into the Q-table between rounds; the Q
//! gradient that emerges (higher closer to A) is what greedy next-hop
//! selection descends.

use ca_parrot::channel::{derive_range, RadioConfig};
use ca_parrot::mobility::Vec3;
use ca_parrot::routing::{
    Chirp, ChirpOutcome, NodeId, ParameterSet, RoutingConfig, RoutingState, SelfMotion,
    CHIRP_WIRE_BYTES,
};

fn main() {
    let range = derive_range(&RadioConfig::default());
    let tau = 30.0;
    let config = RoutingConfig {
        r_tx_m: range,
        tau_s: tau,
        params: ParameterSet::new(-5.0, 0.5, 0.8, 1, 1),
    };
    println!("assumed range {range:.1} m, rural tuple, nodes at x = 0 / 200 / 400 m");
    println!();

    let mut a = RoutingState::new(NodeId(0), config);
    let mut b = RoutingState::new(NodeId(1), config);
    let mut c = RoutingState::new(NodeId(2), config);
    let me = |x: f64| SelfMotion::linear(Vec3::new(x, 0.0, 50.0), Vec3::ZERO, tau);
    let (me_a, me_b, me_c) = (me(0.0), me(200.0), me(400.0));

    // One announcement round trip, shown at the wire level first.
    let chirp = a.originate_chirp(&me_a, 0.0);
    let wire = chirp.encode();
    assert_eq!(wire.len(), CHIRP_WIRE_BYTES);
    print!("first chirp on the wire ({CHIRP_WIRE_BYTES} bytes):");
    for (i, byte) in wire.iter().enumerate() {
        if i % 20 == 0 {
            print!("\n  ");
        }
        print!("{byte:02x} ");
    }
    println!();
    assert_eq!(Chirp::decode(&wire).unwrap(), chirp);
    println!("decode(encode(chirp)) round-trips exactly\n");

    println!(
        "{:>5}  {:>10}  {:>10}  {:>12}",
        "round", "Q_B(A<-A)", "Q_C(A<-B)", "C next hop"
    );
    for round in 0..10u32 {
        let now = round as f64 * 0.5;
        // Round 0 reuses the chirp encoded above.
        let announcement = if round == 0 { chirp } else { a.originate_chirp(&me_a, now) };
        let heard_by_b = b.receive(&announcement.encode(), NodeId(0), now, &me_b);
        if let ChirpOutcome::Forward(rewritten) = heard_by_b {
            // C hears B's rebroadcast; A hears its own echo and drops it.
            c.receive(&rewritten.encode(), NodeId(1), now, &me_c);
            assert_eq!(
                a.receive(&rewritten.encode(), NodeId(1), now, &me_a),
                ChirpOutcome::OwnEcho
            );
            // A duplicate of the same announcement is absorbed, not relayed.
            assert_eq!(
                b.receive(&announcement.encode(), NodeId(0), now, &me_b),
                ChirpOutcome::Absorb
            );
        }
        // Commit timers fire between announcement rounds.
        b.commit_tick(now + 0.25);
        c.commit_tick(now + 0.25);

        let hop = c
            .select_next_hop(NodeId(0), now + 0.25)
            .map(|n| format!("{n:?}"))
            .unwrap_or_else(|_| "no route".to_owned());
        println!(
            "{:>5}  {:>10.4}  {:>10.4}  {:>12}",
            round,
            b.q(NodeId(0), NodeId(0)).unwrap_or(0.0),
            c.q(NodeId(0), NodeId(1)).unwrap_or(0.0),
            hop
        );
    }

    println!();
    println!("routes at B:\n{}", b.dump_routes());
    println!("routes at C:\n{}", c.dump_routes());
    println!(
        "the gradient ranks B's direct link above C's relayed one; C forwards \
         packets for A to {:?}",
        c.select_next_hop(NodeId(0), 5.0).unwrap()
    );
}
