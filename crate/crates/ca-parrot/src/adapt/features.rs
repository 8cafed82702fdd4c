//! Observation window and feature extraction.
//!
//! Each node keeps a sliding window of (RSS, distance) pairs from the
//! chirps it actually received. A log-distance regression over the
//! window summarizes the propagation regime: the slope recovers the
//! pathloss exponent, the intercept the link-budget offset, and the
//! residual spread the fading intensity.

use std::collections::VecDeque;

/// Default sliding-window size: ≈ a few seconds of observations at the
/// default chirp rate with several neighbors.
pub const DEFAULT_WINDOW_CAPACITY: usize = 50;
/// Minimum samples before a fit is attempted.
pub const MIN_FEATURE_SAMPLES: usize = 10;
/// Dimensionality of [`FeatureVector`].
pub const FEATURE_COUNT: usize = 5;

/// Sliding ring of (rss_dbm, distance_m) observations. Non-finite
/// values and non-positive distances are silently refused.
#[derive(Debug, Clone)]
pub struct SampleWindow {
    samples: VecDeque<(f64, f64)>,
    capacity: usize,
}

impl SampleWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "window capacity must be at least 1");
        Self {
            samples: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, rss_dbm: f64, distance_m: f64) -> bool {
        if !rss_dbm.is_finite() || !distance_m.is_finite() || distance_m <= 0.0 {
            return false;
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((rss_dbm, distance_m));
        true
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().copied()
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }
}

impl Default for SampleWindow {
    fn default() -> Self {
        Self::new(DEFAULT_WINDOW_CAPACITY)
    }
}

/// Regression summary of one observation window.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureVector {
    /// Fitted pathloss exponent (slope of rss against −10·log10 d).
    pub exponent: f64,
    /// Fitted rss at 1 m, dB.
    pub intercept_db: f64,
    /// Root-mean-square regression residual, dB.
    pub residual_std_db: f64,
    /// Population variance of the raw rss values, dB².
    pub rss_variance_db2: f64,
    pub mean_distance_m: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.exponent,
            self.intercept_db,
            self.residual_std_db,
            self.rss_variance_db2,
            self.mean_distance_m,
        ]
    }

    pub fn from_array(a: [f64; FEATURE_COUNT]) -> Self {
        Self {
            exponent: a[0],
            intercept_db: a[1],
            residual_std_db: a[2],
            rss_variance_db2: a[3],
            mean_distance_m: a[4],
        }
    }

    /// Column names, aligned with [`FeatureVector::as_array`].
    pub fn names() -> [&'static str; FEATURE_COUNT] {
        [
            "exponent",
            "intercept_db",
            "residual_std_db",
            "rss_variance_db2",
            "mean_distance_m",
        ]
    }
}

/// Fits the log-distance model over a window; `None` when the window is
/// not ready (too few samples, or no distance diversity to regress on).
pub fn extract_features(window: &SampleWindow) -> Option<FeatureVector> {
    let samples: Vec<(f64, f64)> = window.iter().collect();
    fit_features(&samples)
}

/// Core least-squares fit of rss against −10·log10(distance).
pub fn fit_features(samples: &[(f64, f64)]) -> Option<FeatureVector> {
    let n = samples.len();
    if n < MIN_FEATURE_SAMPLES {
        return None;
    }
    let nf = n as f64;
    let xs: Vec<f64> = samples.iter().map(|&(_, d)| -10.0 * d.log10()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(r, _)| r).collect();
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx <= 1e-9 {
        return None;
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let mean_distance = samples.iter().map(|&(_, d)| d).sum::<f64>() / nf;
    Some(FeatureVector {
        exponent: slope,
        intercept_db: intercept,
        residual_std_db: (ssr / nf).sqrt(),
        rss_variance_db2: syy / nf,
        mean_distance_m: mean_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{pathloss_db, sample_rss, ChannelModel, RadioConfig};
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    /// Noiseless log-distance samples at a given exponent.
    fn synthetic_window(eta: f64, distances: &[f64]) -> SampleWindow {
        let cfg = RadioConfig::default();
        let mut w = SampleWindow::new(distances.len().max(DEFAULT_WINDOW_CAPACITY));
        for &d in distances {
            let pl = pathloss_db(ChannelModel::Friis { eta }, d, 10.0, 10.0, cfg.frequency_hz)
                .unwrap();
            w.push(cfg.tx_power_dbm - pl, d);
        }
        w
    }

    #[test]
    fn recovers_friis_exponent_exactly() {
        let distances: Vec<f64> = (1..=20).map(|i| 20.0 * i as f64).collect();
        let fv = extract_features(&synthetic_window(2.75, &distances)).unwrap();
        assert_relative_eq!(fv.exponent, 2.75, epsilon = 0.01);
        assert!(fv.residual_std_db < 1e-9);
        // Intercept = tx power − reference pathloss at 1 m.
        assert_relative_eq!(fv.intercept_db, 20.0 - 40.052008, epsilon = 1e-4);
        assert_relative_eq!(fv.mean_distance_m, 210.0, epsilon = 1e-9);
    }

    #[test]
    fn recovers_any_exponent_within_tolerance() {
        let distances: Vec<f64> = (1..=30).map(|i| 10.0 + 15.0 * i as f64).collect();
        for eta in [2.0, 2.4, 2.75, 3.1, 3.6, 4.0] {
            let fv = extract_features(&synthetic_window(eta, &distances)).unwrap();
            assert_relative_eq!(fv.exponent, eta, epsilon = 0.05);
        }
    }

    #[test]
    fn not_ready_on_few_samples_or_single_distance() {
        let mut w = SampleWindow::new(50);
        for _ in 0..9 {
            w.push(-70.0, 100.0);
        }
        assert!(extract_features(&w).is_none(), "too few samples");
        // Pad to 12 samples, all at the same distance.
        for _ in 0..3 {
            w.push(-71.0, 100.0);
        }
        assert!(extract_features(&w).is_none(), "no distance diversity");
        w.push(-75.0, 180.0);
        assert!(extract_features(&w).is_some());
    }

    #[test]
    fn fading_inflates_residual_spread() {
        let cfg = RadioConfig::default();
        let model = ChannelModel::Nakagami { eta: 2.75, m: 2.0 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut w = SampleWindow::new(10_000);
        for i in 0..10_000 {
            let d = 30.0 + (i % 200) as f64;
            let rss = sample_rss(model, &cfg, d, (10.0, 10.0), &mut rng).unwrap();
            w.push(rss, d);
        }
        let fv = extract_features(&w).unwrap();
        assert!(
            fv.residual_std_db > 1.0,
            "fading residual too small: {}",
            fv.residual_std_db
        );
        // Nakagami m=2 log-amplitude spread is ≈ 3.5 dB.
        assert_relative_eq!(fv.residual_std_db, 3.5, epsilon = 0.4);
    }

    #[test]
    fn window_slides_and_refuses_bad_samples() {
        let mut w = SampleWindow::new(3);
        assert!(!w.push(f64::NAN, 10.0));
        assert!(!w.push(-70.0, 0.0));
        assert!(!w.push(-70.0, -5.0));
        for i in 0..5 {
            assert!(w.push(-60.0 - i as f64, 100.0 + i as f64));
        }
        assert_eq!(w.len(), 3);
        let oldest = w.iter().next().unwrap();
        assert_eq!(oldest.1, 102.0);
    }
}
