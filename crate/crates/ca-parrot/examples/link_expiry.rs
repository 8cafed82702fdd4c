//! Link expiry time from relative geometry.
//!
//! Two nodes share a link while their distance stays under the assumed
//! range. Given relative position and velocity the expiry time is the
//! smallest nonnegative root of |Δp + t·Δv| = range, clamped to the
//! prediction horizon. The range budget shifts the assumed range and with
//! it every expiry in the table.

use ca_parrot::channel::{derive_range, RadioConfig};
use ca_parrot::mobility::Vec3;
use ca_parrot::routing::{compute_let, phi_let};

fn main() {
    let radio = RadioConfig::default();
    let range = derive_range(&radio);
    let tau = 30.0;
    println!("assumed range {range:.1} m, horizon {tau} s");
    println!();

    let cases: [(&str, Vec3, Vec3); 6] = [
        ("head-on approach, 200 m apart, closing 20 m/s", Vec3::new(200.0, 0.0, 0.0), Vec3::new(-20.0, 0.0, 0.0)),
        ("fleeing, 200 m apart, separating 10 m/s", Vec3::new(200.0, 0.0, 0.0), Vec3::new(10.0, 0.0, 0.0)),
        ("crossing at right angles, 150 m apart", Vec3::new(150.0, 0.0, 0.0), Vec3::new(0.0, 15.0, 0.0)),
        ("hovering together, 100 m apart", Vec3::new(100.0, 0.0, 0.0), Vec3::ZERO),
        ("already out of range", Vec3::new(400.0, 0.0, 0.0), Vec3::new(-5.0, 0.0, 0.0)),
        ("grazing exit, 229 m apart, slow drift", Vec3::new(229.0, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0)),
    ];

    println!("{:>10}  {:>8}", "LET [s]", "phi");
    for (what, dp, dv) in cases {
        let t = compute_let(dp, dv, range, tau).unwrap();
        println!("{:>10.2}  {:>8.3}  {what}", t, phi_let(t, tau));
    }

    // The budget offsets the assumed range: negative trims optimistic
    // links early, positive keeps entries alive past the real coverage.
    println!();
    println!("range budget vs. expiry of the fleeing pair:");
    let dp = Vec3::new(200.0, 0.0, 0.0);
    let dv = Vec3::new(10.0, 0.0, 0.0);
    for budget in [-50.0, -5.0, 0.0, 20.0, 50.0, 600.0] {
        let effective = (range + budget).max(1.0);
        let t = compute_let(dp, dv, effective, tau).unwrap();
        println!("  r_b {:>6.0} m -> effective {:>6.1} m, LET {:>5.2} s", budget, effective, t);
    }
}
