//! Link-expiry geometry, neighborhood cohesion, and the Q-value update.

use std::collections::BTreeSet;

use crate::mobility::Vec3;
use crate::routing::chirp::NodeId;
use crate::routing::RoutingError;

/// Tunable protocol knobs, switched as a unit when the radio environment
/// changes.
///
/// `range_budget_m` widens (positive) or shrinks (negative) the assumed
/// link range beyond the free-space estimate; `alpha` is the learning
/// rate; `gamma0` the base discount; `lambda` and `omega` weight the
/// link-expiry and cohesion factors inside the effective discount.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParameterSet {
    pub range_budget_m: f64,
    pub alpha: f64,
    pub gamma0: f64,
    pub lambda: u32,
    pub omega: u32,
}

impl ParameterSet {
    pub fn new(range_budget_m: f64, alpha: f64, gamma0: f64, lambda: u32, omega: u32) -> Self {
        Self {
            range_budget_m,
            alpha,
            gamma0,
            lambda,
            omega,
        }
    }
}

/// Nodes start on the open-terrain tuple until told otherwise.
impl Default for ParameterSet {
    fn default() -> Self {
        Self::new(-5.0, 0.5, 0.8, 1, 1)
    }
}

/// Predicted link expiry time in seconds.
///
/// Solves |Δp + t·Δv| = range for the smallest t ≥ 0, i.e. the quadratic
/// |Δv|²·t² + 2(Δp·Δv)·t + (|Δp|² − range²) = 0. Out of range now → 0;
/// never leaving range (no relative motion) → `tau_s`. The result is
/// clamped to [0, tau_s].
pub fn compute_let(
    rel_position: Vec3,
    rel_velocity: Vec3,
    range_m: f64,
    tau_s: f64,
) -> Result<f64, RoutingError> {
    if !(range_m > 0.0) {
        return Err(RoutingError::NonPositiveRange(range_m));
    }
    let a = rel_velocity.dot(rel_velocity);
    let b = 2.0 * rel_position.dot(rel_velocity);
    let c = rel_position.dot(rel_position) - range_m * range_m;
    if c > 0.0 {
        return Ok(0.0);
    }
    if a == 0.0 {
        return Ok(tau_s);
    }
    // c ≤ 0 and a > 0 put the roots on both sides of zero; the larger
    // root is the nonnegative one.
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let t = (-b + disc.sqrt()) / (2.0 * a);
    Ok(t.clamp(0.0, tau_s))
}

/// Normalizes a link expiry time into [0,1] against the horizon.
pub fn phi_let(let_s: f64, tau_s: f64) -> f64 {
    if tau_s <= 0.0 {
        return 0.0;
    }
    (let_s / tau_s).clamp(0.0, 1.0)
}

/// Fraction of current neighbors predicted to still be neighbors one
/// horizon ahead. An empty neighborhood counts as stable (1.0): there is
/// nothing to lose.
pub fn compute_cohesion(now: &BTreeSet<NodeId>, predicted: &BTreeSet<NodeId>) -> f64 {
    if now.is_empty() {
        return 1.0;
    }
    let kept = now.intersection(predicted).count();
    kept as f64 / now.len() as f64
}

/// One reinforcement step toward the discounted advertised value:
/// Q + α·(γ0·Φ_LET^λ·Φ_Coh^ω·V − Q).
pub fn q_update(q: f64, params: &ParameterSet, phi_let: f64, phi_coh: f64, value: f64) -> f64 {
    let gamma = params.gamma0
        * phi_let.powi(params.lambda as i32)
        * phi_coh.powi(params.omega as i32);
    q + params.alpha * (gamma * value - q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn set(ids: &[u32]) -> BTreeSet<NodeId> {
        ids.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn let_for_head_on_departure() {
        // Roots of 100t² − 2000t − 30000: −10 and 30.
        let t = compute_let(
            Vec3::new(100.0, 0.0, 0.0),
            Vec3::new(-10.0, 0.0, 0.0),
            200.0,
            60.0,
        )
        .unwrap();
        assert_relative_eq!(t, 30.0, max_relative = 1e-12);
    }

    #[test]
    fn let_static_in_range_saturates_at_horizon() {
        let t = compute_let(Vec3::new(50.0, 0.0, 0.0), Vec3::ZERO, 200.0, 60.0).unwrap();
        assert_eq!(t, 60.0);
    }

    #[test]
    fn let_departing_from_boundary_is_zero() {
        let t = compute_let(
            Vec3::new(200.0, 0.0, 0.0),
            Vec3::new(5.0, 0.0, 0.0),
            200.0,
            60.0,
        )
        .unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn let_out_of_range_is_zero() {
        let t = compute_let(
            Vec3::new(300.0, 0.0, 0.0),
            Vec3::new(-10.0, 0.0, 0.0),
            200.0,
            60.0,
        )
        .unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn let_rejects_nonpositive_range() {
        assert!(compute_let(Vec3::ZERO, Vec3::ZERO, 0.0, 60.0).is_err());
        assert!(compute_let(Vec3::ZERO, Vec3::ZERO, -5.0, 60.0).is_err());
    }

    #[test]
    fn let_is_clamped_to_horizon() {
        // Slow drift: exit time far beyond tau.
        let t = compute_let(
            Vec3::new(10.0, 0.0, 0.0),
            Vec3::new(0.1, 0.0, 0.0),
            200.0,
            30.0,
        )
        .unwrap();
        assert_eq!(t, 30.0);
    }

    #[test]
    fn phi_let_normalization() {
        assert_eq!(phi_let(60.0, 60.0), 1.0);
        assert_eq!(phi_let(0.0, 60.0), 0.0);
        assert_relative_eq!(phi_let(30.0, 60.0), 0.5);
    }

    #[test]
    fn cohesion_ratios() {
        assert_eq!(compute_cohesion(&set(&[2, 3]), &set(&[2, 3])), 1.0);
        assert_eq!(compute_cohesion(&set(&[2, 3]), &set(&[2])), 0.5);
        assert_eq!(compute_cohesion(&set(&[]), &set(&[])), 1.0);
        assert_eq!(compute_cohesion(&set(&[]), &set(&[7])), 1.0);
        // Gaining a predicted neighbor does not dilute the score.
        assert_eq!(compute_cohesion(&set(&[2]), &set(&[2, 9])), 1.0);
    }

    #[test]
    fn q_update_direct_evaluation() {
        let p = ParameterSet::new(0.0, 0.5, 0.8, 1, 1);
        assert_relative_eq!(q_update(0.0, &p, 1.0, 1.0, 1.0), 0.4);
    }

    #[test]
    fn q_update_alpha_one_overwrites() {
        let p = ParameterSet::new(0.0, 1.0, 0.3, 1, 2);
        let phi_l = 0.7;
        let phi_c = 0.9;
        let v = 0.5;
        let expected = 0.3 * phi_l * phi_c * phi_c * v;
        assert_relative_eq!(q_update(0.42, &p, phi_l, phi_c, v), expected);
    }

    #[test]
    fn q_update_fixed_point() {
        let p = ParameterSet::new(0.0, 0.6, 0.8, 1, 1);
        // γ·V = 0.8·0.5·0.5·1 = 0.2 = Q.
        let q = q_update(0.2, &p, 0.5, 1.0, 0.5);
        assert_relative_eq!(q, 0.2, max_relative = 1e-15);
    }

    #[test]
    fn q_update_stays_in_unit_interval() {
        let mut rng_state = 0x9E3779B97F4A7C15u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10_000 {
            let p = ParameterSet::new(0.0, next().max(1e-3), next() * 0.999, 1 + (next() * 4.0) as u32, 1 + (next() * 4.0) as u32);
            let q = q_update(next(), &p, next(), next(), next());
            assert!((0.0..=1.0).contains(&q), "q escaped unit interval: {q}");
        }
    }
}
