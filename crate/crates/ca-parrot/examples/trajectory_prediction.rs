//! Waypoint motion and horizon prediction.
//!
//! Walks one node along a waypoint plan in 0.5 s steps while keeping its
//! position history, and at a few instants asks where the node will be a
//! full horizon ahead. While targets remain the prediction replays the
//! plan; once they run out it falls back to extrapolating recent history.

use ca_parrot::mobility::{
    advance_motion, extrapolate_history, predict_position, PositionHistory, PredictionConfig,
    Trajectory, Vec3,
};

fn main() {
    let bounds = (Vec3::ZERO, Vec3::new(500.0, 500.0, 250.0));
    let cruise = 50.0 / 3.6; // 50 km/h
    let waypoints = [
        Vec3::new(400.0, 80.0, 120.0),
        Vec3::new(420.0, 450.0, 60.0),
        Vec3::new(60.0, 380.0, 200.0),
    ];
    let trajectory = Trajectory::new(Vec3::new(50.0, 50.0, 100.0), &waypoints, cruise, bounds);

    let cfg = PredictionConfig { tau: 30.0, step_count: 20 };
    let dt = 0.5;

    let mut state = trajectory.state_at(0.0);
    let mut plan = trajectory.plan_at(0.0);
    let mut history = PositionHistory::new(16);
    history.push(0.0, state.position).unwrap();

    println!("cruise speed {:.1} m/s, horizon {} s, {} sub-steps", cruise, cfg.tau, cfg.step_count);
    println!();
    println!("{:>6}  {:>24}  {:>24}  {:>9}", "t [s]", "predicted t+30 [m]", "actual t+30 [m]", "error [m]");

    let mut t: f64 = 0.0;
    while t <= 90.0 {
        if (t / dt).round() as u64 % 30 == 0 {
            let predicted = predict_position(&state, &plan, &history, &cfg);
            let actual = trajectory.position_at(t + cfg.tau);
            println!(
                "{:>6.1}  ({:>6.1},{:>6.1},{:>6.1})  ({:>6.1},{:>6.1},{:>6.1})  {:>9.3}",
                t,
                predicted.x, predicted.y, predicted.z,
                actual.x, actual.y, actual.z,
                predicted.distance(actual)
            );
        }
        state = advance_motion(&state, &mut plan, dt);
        t += dt;
        history.push(t, state.position).unwrap();
    }

    // With the plan exhausted the predictor leans on history alone.
    let drained = trajectory.position_at(1e6);
    println!();
    println!("plan exhausted at ({:.1},{:.1},{:.1}); history extrapolation takes over:", drained.x, drained.y, drained.z);
    let mut tail = PositionHistory::new(8);
    for k in 0..5 {
        let tk = k as f64 * dt;
        tail.push(tk, Vec3::new(10.0 * tk, 0.0, 50.0)).unwrap();
    }
    let ahead = extrapolate_history(&tail, 30.0).unwrap();
    println!("  node drifting +10 m/s in x, 30 s ahead -> ({:.1},{:.1},{:.1})", ahead.x, ahead.y, ahead.z);
}
