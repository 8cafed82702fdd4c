//! Controlled-waypoint motion and trajectory prediction.
//!
//! Nodes fly straight lines at cruise speed between pre-calculated waypoints.
//! Because the waypoint list is known ahead of time, a node can predict its
//! own position a prediction width `tau` into the future by replaying the
//! remaining plan in equidistant sub-steps; once the plan runs out, the
//! remaining horizon is extrapolated from the recent position history.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

/// Number of recent history samples feeding the extrapolation velocity.
pub const HISTORY_WINDOW: usize = 5;

/// Distance below which a waypoint counts as reached.
pub const ARRIVAL_TOLERANCE_M: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum MobilityError {
    #[error("position history needs at least 2 samples, got {0}")]
    InsufficientHistory(usize),
    #[error("history timestamps must be strictly increasing ({prev} then {next})")]
    NonMonotonicSample { prev: f64, next: f64 },
}

/// 3-D vector in meters (or meters/second when used as a velocity).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// A node's position and velocity at a point in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub timestamp: f64,
}

/// Pre-calculated future targets plus the cruise speed used to fly them.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointPlan {
    targets: VecDeque<Vec3>,
    pub cruise_speed: f64,
    pub bounds: (Vec3, Vec3),
}

impl WaypointPlan {
    pub fn new(targets: Vec<Vec3>, cruise_speed: f64, bounds: (Vec3, Vec3)) -> Self {
        WaypointPlan { targets: targets.into(), cruise_speed, bounds }
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn current_target(&self) -> Option<Vec3> {
        self.targets.front().copied()
    }

    pub fn remaining(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.targets.iter().copied()
    }

    fn pop_target(&mut self) {
        self.targets.pop_front();
    }
}

/// Ring of timestamped positions, oldest first.
#[derive(Debug, Clone, Default)]
pub struct PositionHistory {
    samples: VecDeque<(f64, Vec3)>,
    capacity: usize,
}

impl PositionHistory {
    pub fn new(capacity: usize) -> Self {
        PositionHistory { samples: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn push(&mut self, timestamp: f64, position: Vec3) -> Result<(), MobilityError> {
        if let Some(&(prev, _)) = self.samples.back() {
            if timestamp <= prev {
                return Err(MobilityError::NonMonotonicSample { prev, next: timestamp });
            }
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((timestamp, position));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn recent(&self, n: usize) -> impl Iterator<Item = &(f64, Vec3)> {
        self.samples.iter().skip(self.samples.len().saturating_sub(n))
    }
}

/// Prediction width and its subdivision into equidistant sub-steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionConfig {
    /// Prediction width in seconds; serialized as `tau_s`.
    #[serde(rename = "tau_s")]
    pub tau: f64,
    pub step_count: usize,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        PredictionConfig { tau: 30.0, step_count: 20 }
    }
}

/// Moves `position` toward the plan's targets at cruise speed for `dt`
/// seconds, consuming reached targets. Returns the new position and the
/// time left over after the plan ran out (zero while targets remain).
fn fly(position: Vec3, plan: &mut WaypointPlan, dt: f64) -> (Vec3, f64) {
    let mut pos = position;
    let mut left = dt;
    while left > 0.0 {
        let Some(target) = plan.current_target() else {
            return (pos, left);
        };
        let gap = pos.distance(target);
        if gap <= ARRIVAL_TOLERANCE_M {
            pos = target;
            plan.pop_target();
            continue;
        }
        let reach = plan.cruise_speed * left;
        if reach >= gap {
            pos = target;
            plan.pop_target();
            left -= gap / plan.cruise_speed;
        } else {
            let dir = (target - pos) * (1.0 / gap);
            pos = pos + dir * reach;
            left = 0.0;
        }
    }
    (pos, 0.0)
}

/// Advances a node along its plan for `dt` seconds.
///
/// On arrival within `dt` the node snaps to the target, retargets the next
/// waypoint, and spends the remaining time toward it. With an empty plan the
/// node holds position at zero velocity.
pub fn advance_motion(state: &KinematicState, plan: &mut WaypointPlan, dt: f64) -> KinematicState {
    assert!(dt > 0.0, "advance_motion requires dt > 0");
    let (position, _) = fly(state.position, plan, dt);
    let velocity = match plan.current_target() {
        Some(target) if position.distance(target) > ARRIVAL_TOLERANCE_M => {
            let gap = position.distance(target);
            (target - position) * (plan.cruise_speed / gap)
        }
        _ => Vec3::ZERO,
    };
    KinematicState { position, velocity, timestamp: state.timestamp + dt }
}

/// Predicts where the node will be `cfg.tau` seconds from now.
///
/// The horizon is replayed in `cfg.step_count` equidistant sub-steps over the
/// remaining waypoint plan; once targets are exhausted the rest of the
/// horizon is extrapolated with the mean velocity of the last
/// [`HISTORY_WINDOW`] history samples. With neither targets nor usable
/// history the current position is returned.
pub fn predict_position(
    state: &KinematicState,
    plan: &WaypointPlan,
    history: &PositionHistory,
    cfg: &PredictionConfig,
) -> Vec3 {
    assert!(cfg.tau > 0.0 && cfg.step_count >= 1, "invalid prediction config");
    let step_dt = cfg.tau / cfg.step_count as f64;
    let mut scratch = plan.clone();
    let mut pos = state.position;
    let mut fallback: Option<Vec3> = None;
    for _ in 0..cfg.step_count {
        if scratch.is_empty() {
            let v = *fallback.get_or_insert_with(|| mean_history_velocity(history).unwrap_or(Vec3::ZERO));
            pos = pos + v * step_dt;
        } else {
            let (next, spare) = fly(pos, &mut scratch, step_dt);
            pos = next;
            if spare > 0.0 {
                let v = *fallback.get_or_insert_with(|| mean_history_velocity(history).unwrap_or(Vec3::ZERO));
                pos = pos + v * spare;
            }
        }
    }
    pos
}

/// Mean finite-difference velocity over the most recent history samples.
fn mean_history_velocity(history: &PositionHistory) -> Option<Vec3> {
    let recent: Vec<&(f64, Vec3)> = history.recent(HISTORY_WINDOW).collect();
    if recent.len() < 2 {
        return None;
    }
    let mut sum = Vec3::ZERO;
    let mut count = 0.0;
    for pair in recent.windows(2) {
        let (t0, p0) = *pair[0];
        let (t1, p1) = *pair[1];
        sum = sum + (p1 - p0) * (1.0 / (t1 - t0));
        count += 1.0;
    }
    Some(sum * (1.0 / count))
}

/// Extrapolates the last known position `horizon` seconds ahead using the
/// mean finite-difference velocity of the recent history.
pub fn extrapolate_history(history: &PositionHistory, horizon: f64) -> Result<Vec3, MobilityError> {
    let velocity =
        mean_history_velocity(history).ok_or(MobilityError::InsufficientHistory(history.len()))?;
    let (_, last) = *history.samples.back().expect("non-empty checked above");
    Ok(last + velocity * horizon)
}

/// Draws a seeded waypoint list uniformly inside `bounds`.
pub fn generate_waypoints<R: Rng>(rng: &mut R, bounds: (Vec3, Vec3), count: usize) -> Vec<Vec3> {
    (0..count)
        .map(|_| {
            Vec3::new(
                rng.gen_range(bounds.0.x..=bounds.1.x),
                rng.gen_range(bounds.0.y..=bounds.1.y),
                rng.gen_range(bounds.0.z..=bounds.1.z),
            )
        })
        .collect()
}

/// A fully pre-calculated flight path: piecewise-linear positions over the
/// whole run, sampled at arbitrary times. This is the "controlled waypoint"
/// property the prediction layer exploits.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Leg endpoints with cumulative arrival times, starting at (0, start).
    legs: Vec<(f64, Vec3)>,
    pub cruise_speed: f64,
    pub bounds: (Vec3, Vec3),
}

impl Trajectory {
    pub fn new(start: Vec3, waypoints: &[Vec3], cruise_speed: f64, bounds: (Vec3, Vec3)) -> Self {
        let mut legs = vec![(0.0, start)];
        if cruise_speed > 0.0 {
            let mut t = 0.0;
            let mut pos = start;
            for &wp in waypoints {
                let gap = pos.distance(wp);
                if gap <= ARRIVAL_TOLERANCE_M {
                    continue;
                }
                t += gap / cruise_speed;
                legs.push((t, wp));
                pos = wp;
            }
        }
        Trajectory { legs, cruise_speed, bounds }
    }

    /// A stationary node.
    pub fn fixed(position: Vec3, bounds: (Vec3, Vec3)) -> Self {
        Trajectory { legs: vec![(0.0, position)], cruise_speed: 0.0, bounds }
    }

    fn leg_index(&self, t: f64) -> usize {
        // index of the last leg endpoint at or before t
        match self.legs.binary_search_by(|&(lt, _)| lt.total_cmp(&t)) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    pub fn position_at(&self, t: f64) -> Vec3 {
        let i = self.leg_index(t.max(0.0));
        if i + 1 >= self.legs.len() {
            return self.legs[i].1;
        }
        let (t0, p0) = self.legs[i];
        let (t1, p1) = self.legs[i + 1];
        let frac = ((t.max(0.0) - t0) / (t1 - t0)).clamp(0.0, 1.0);
        p0 + (p1 - p0) * frac
    }

    pub fn velocity_at(&self, t: f64) -> Vec3 {
        let i = self.leg_index(t.max(0.0));
        if i + 1 >= self.legs.len() {
            return Vec3::ZERO;
        }
        let (t0, p0) = self.legs[i];
        let (t1, p1) = self.legs[i + 1];
        (p1 - p0) * (1.0 / (t1 - t0))
    }

    /// The not-yet-reached waypoints at time `t`, as a plan for prediction.
    pub fn plan_at(&self, t: f64) -> WaypointPlan {
        let i = self.leg_index(t.max(0.0));
        let targets: Vec<Vec3> = self.legs[i + 1..].iter().map(|&(_, p)| p).collect();
        WaypointPlan::new(targets, self.cruise_speed, self.bounds)
    }

    pub fn state_at(&self, t: f64) -> KinematicState {
        KinematicState { position: self.position_at(t), velocity: self.velocity_at(t), timestamp: t }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unbounded() -> (Vec3, Vec3) {
        (Vec3::new(-1e6, -1e6, -1e6), Vec3::new(1e6, 1e6, 1e6))
    }

    fn vx(x: f64) -> Vec3 {
        Vec3::new(x, 0.0, 0.0)
    }

    #[test]
    fn straight_line_step() {
        let state = KinematicState { position: Vec3::ZERO, velocity: Vec3::ZERO, timestamp: 0.0 };
        let mut plan = WaypointPlan::new(vec![vx(100.0)], 10.0, unbounded());
        let next = advance_motion(&state, &mut plan, 1.0);
        assert_relative_eq!(next.position.x, 10.0, epsilon = 1e-12);
        assert_relative_eq!(next.velocity.x, 10.0, epsilon = 1e-12);
        assert_eq!(next.timestamp, 1.0);
    }

    #[test]
    fn arrival_retargets_and_spends_remainder() {
        let state = KinematicState { position: vx(99.0), velocity: Vec3::ZERO, timestamp: 0.0 };
        let mut plan =
            WaypointPlan::new(vec![vx(100.0), Vec3::new(100.0, 20.0, 0.0)], 10.0, unbounded());
        let next = advance_motion(&state, &mut plan, 1.0);
        // 0.1 s to reach (100,0,0), remaining 0.9 s climbs 9 m toward the next target
        assert_relative_eq!(next.position.x, 100.0, epsilon = 1e-9);
        assert_relative_eq!(next.position.y, 9.0, epsilon = 1e-9);
        assert_eq!(plan.current_target(), Some(Vec3::new(100.0, 20.0, 0.0)));
    }

    #[test]
    fn empty_plan_holds_position() {
        let state = KinematicState { position: vx(7.0), velocity: vx(3.0), timestamp: 2.0 };
        let mut plan = WaypointPlan::new(vec![], 10.0, unbounded());
        let next = advance_motion(&state, &mut plan, 5.0);
        assert_eq!(next.position, vx(7.0));
        assert_eq!(next.velocity, Vec3::ZERO);
        assert_eq!(next.timestamp, 7.0);
    }

    #[test]
    fn predict_follows_unreached_target() {
        let state = KinematicState { position: Vec3::ZERO, velocity: vx(10.0), timestamp: 0.0 };
        let plan = WaypointPlan::new(vec![vx(1000.0)], 10.0, unbounded());
        let history = PositionHistory::new(8);
        let cfg = PredictionConfig { tau: 30.0, step_count: 30 };
        let p = predict_position(&state, &plan, &history, &cfg);
        assert_relative_eq!(p.x, 300.0, epsilon = 1e-9);
        assert_relative_eq!(p.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn predict_extrapolates_without_targets() {
        let state = KinematicState { position: Vec3::ZERO, velocity: vx(5.0), timestamp: 3.0 };
        let plan = WaypointPlan::new(vec![], 5.0, unbounded());
        let mut history = PositionHistory::new(8);
        for k in 0..4 {
            history.push(k as f64, vx(5.0 * k as f64 - 15.0)).unwrap();
        }
        let cfg = PredictionConfig { tau: 10.0, step_count: 20 };
        let p = predict_position(&state, &plan, &history, &cfg);
        assert_relative_eq!(p.x, 50.0, epsilon = 1e-9);
    }

    #[test]
    fn predict_stationary_returns_current_position() {
        let state = KinematicState { position: vx(4.0), velocity: Vec3::ZERO, timestamp: 0.0 };
        let plan = WaypointPlan::new(vec![], 5.0, unbounded());
        let mut history = PositionHistory::new(8);
        history.push(0.0, vx(4.0)).unwrap();
        history.push(1.0, vx(4.0)).unwrap();
        let p = predict_position(&state, &plan, &history, &PredictionConfig::default());
        assert_eq!(p, vx(4.0));
    }

    #[test]
    fn predict_without_plan_or_history_holds() {
        let state = KinematicState { position: vx(9.0), velocity: Vec3::ZERO, timestamp: 0.0 };
        let plan = WaypointPlan::new(vec![], 5.0, unbounded());
        let history = PositionHistory::new(8);
        let p = predict_position(&state, &plan, &history, &PredictionConfig::default());
        assert_eq!(p, vx(9.0));
    }

    #[test]
    fn extrapolation_finite_difference() {
        let mut history = PositionHistory::new(8);
        history.push(0.0, Vec3::ZERO).unwrap();
        history.push(1.0, vx(2.0)).unwrap();
        let p = extrapolate_history(&history, 3.0).unwrap();
        assert_relative_eq!(p.x, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn extrapolation_zero_velocity() {
        let mut history = PositionHistory::new(8);
        history.push(0.0, vx(5.0)).unwrap();
        history.push(2.0, vx(5.0)).unwrap();
        assert_eq!(extrapolate_history(&history, 10.0).unwrap(), vx(5.0));
    }

    #[test]
    fn extrapolation_needs_two_samples() {
        let mut history = PositionHistory::new(8);
        history.push(0.0, vx(1.0)).unwrap();
        assert_eq!(extrapolate_history(&history, 1.0), Err(MobilityError::InsufficientHistory(1)));
    }

    #[test]
    fn history_rejects_non_monotonic_timestamps() {
        let mut history = PositionHistory::new(4);
        history.push(1.0, Vec3::ZERO).unwrap();
        assert!(history.push(1.0, vx(1.0)).is_err());
        assert!(history.push(0.5, vx(1.0)).is_err());
    }

    #[test]
    fn predict_converges_to_current_for_small_tau() {
        let state = KinematicState { position: vx(10.0), velocity: vx(10.0), timestamp: 0.0 };
        let plan = WaypointPlan::new(vec![vx(500.0)], 10.0, unbounded());
        let history = PositionHistory::new(8);
        let cfg = PredictionConfig { tau: 1e-6, step_count: 4 };
        let p = predict_position(&state, &plan, &history, &cfg);
        assert!(p.distance(state.position) < 1e-4);
    }

    #[test]
    fn trajectory_matches_advance_motion_steps() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let bounds = (Vec3::ZERO, Vec3::new(500.0, 500.0, 250.0));
        for _ in 0..20 {
            let start = generate_waypoints(&mut rng, bounds, 1)[0];
            let wps = generate_waypoints(&mut rng, bounds, 6);
            let speed = 13.9;
            let traj = Trajectory::new(start, &wps, speed, bounds);
            let mut plan = WaypointPlan::new(wps, speed, bounds);
            let mut state = KinematicState { position: start, velocity: Vec3::ZERO, timestamp: 0.0 };
            for step in 1..=120 {
                state = advance_motion(&state, &mut plan, 0.5);
                let sampled = traj.position_at(step as f64 * 0.5);
                // snap tolerance at waypoint arrivals allows a small gap
                assert!(
                    state.position.distance(sampled) < 1.5,
                    "drift {} at t={}",
                    state.position.distance(sampled),
                    step as f64 * 0.5
                );
            }
        }
    }

    #[test]
    fn prediction_error_bounded_by_substep() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let bounds = (Vec3::ZERO, Vec3::new(500.0, 500.0, 250.0));
        let cfg = PredictionConfig { tau: 30.0, step_count: 20 };
        for _ in 0..30 {
            let start = generate_waypoints(&mut rng, bounds, 1)[0];
            let wps = generate_waypoints(&mut rng, bounds, 12);
            let speed = 13.9;
            let traj = Trajectory::new(start, &wps, speed, bounds);
            let state = traj.state_at(0.0);
            let plan = traj.plan_at(0.0);
            let history = PositionHistory::new(8);
            let predicted = predict_position(&state, &plan, &history, &cfg);
            let exact = traj.position_at(cfg.tau);
            let budget = speed * cfg.tau / cfg.step_count as f64;
            assert!(
                predicted.distance(exact) <= budget + ARRIVAL_TOLERANCE_M * wps.len() as f64,
                "error {} exceeds budget {}",
                predicted.distance(exact),
                budget
            );
        }
    }
}
