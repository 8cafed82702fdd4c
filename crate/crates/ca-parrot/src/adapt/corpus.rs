//! Training-corpus synthesis and (de)serialization.
//!
//! Two interchangeable text layouts, distinguished by header:
//! feature rows (one window per row, what the generator writes) and raw
//! observation rows (`label,rss_dbm,distance_m`, windowed on load).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::{fit_features, FeatureVector, DEFAULT_WINDOW_CAPACITY, MIN_FEATURE_SAMPLES};
use super::{AdaptError, Rep};
use crate::channel::{reception, sample_rss, ChannelModel, RadioConfig};

pub const FEATURE_HEADER: &str =
    "label,exponent,intercept_db,residual_std_db,rss_variance_db2,mean_distance_m";
pub const RAW_HEADER: &str = "label,rss_dbm,distance_m";

/// What to synthesize: one channel per environment, how many windows
/// each, and the observation geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub classes: Vec<(Rep, ChannelModel)>,
    pub windows_per_class: usize,
    pub distance_range_m: (f64, f64),
    pub altitude_range_m: (f64, f64),
    pub window_capacity: usize,
    pub radio: RadioConfig,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            classes: vec![
                (Rep::Rural, ChannelModel::Friis { eta: 2.75 }),
                (Rep::Suburban, ChannelModel::TwoRayGround),
                (Rep::Urban, ChannelModel::Nakagami { eta: 2.75, m: 2.0 }),
            ],
            windows_per_class: 2000,
            distance_range_m: (10.0, 500.0),
            altitude_range_m: (1.5, 250.0),
            window_capacity: DEFAULT_WINDOW_CAPACITY,
            radio: RadioConfig::default(),
        }
    }
}

/// Draws labeled feature windows. Every window holds only observations
/// that would actually have been received (RSS above sensitivity), the
/// same censoring a live node experiences.
pub fn synthesize_corpus(
    spec: &CorpusSpec,
    seed: u64,
) -> Result<Vec<(FeatureVector, Rep)>, AdaptError> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(spec.classes.len() * spec.windows_per_class);
    let (d_lo, d_hi) = spec.distance_range_m;
    let (a_lo, a_hi) = spec.altitude_range_m;
    for &(label, channel) in &spec.classes {
        let mut produced = 0usize;
        let mut stalls = 0usize;
        while produced < spec.windows_per_class {
            let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
            let mut samples = Vec::with_capacity(spec.window_capacity);
            let mut attempts = 0usize;
            while samples.len() < spec.window_capacity && attempts < 400 * spec.window_capacity {
                attempts += 1;
                let d = rng.gen_range(d_lo..=d_hi);
                let alts = (rng.gen_range(a_lo..=a_hi), rng.gen_range(a_lo..=a_hi));
                let rss = sample_rss(channel, &spec.radio, d, alts, &mut rng)?;
                if reception(rss, &spec.radio) {
                    samples.push((rss, d));
                }
            }
            match fit_features(&samples) {
                Some(fv) => {
                    rows.push((fv, label));
                    produced += 1;
                }
                None => {
                    stalls += 1;
                    if stalls > 20 + spec.windows_per_class {
                        return Err(AdaptError::Synthesis(format!(
                            "cannot assemble a usable window for {label} \
                             (receptions too sparse in the configured geometry)"
                        )));
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Serializes feature rows; full-precision floats so parsing the output
/// reproduces the values bit-exactly.
pub fn corpus_to_string(rows: &[(FeatureVector, Rep)]) -> String {
    let mut out = String::with_capacity(rows.len() * 96 + FEATURE_HEADER.len() + 1);
    out.push_str(FEATURE_HEADER);
    out.push('\n');
    for (fv, label) in rows {
        out.push_str(&format!(
            "{label},{},{},{},{},{}\n",
            fv.exponent, fv.intercept_db, fv.residual_std_db, fv.rss_variance_db2, fv.mean_distance_m
        ));
    }
    out
}

pub fn write_corpus(path: &Path, rows: &[(FeatureVector, Rep)]) -> Result<(), AdaptError> {
    std::fs::write(path, corpus_to_string(rows))?;
    Ok(())
}

/// Parses either corpus layout, dispatching on the header line.
pub fn parse_corpus(text: &str) -> Result<Vec<(FeatureVector, Rep)>, AdaptError> {
    let mut lines = text.lines();
    let header = lines.next().map(str::trim).unwrap_or("");
    match header {
        FEATURE_HEADER => parse_feature_rows(lines),
        RAW_HEADER => parse_raw_rows(lines),
        other => Err(AdaptError::CorpusFormat {
            row: 1,
            msg: format!("unrecognized corpus header {other:?}"),
        }),
    }
}

pub fn load_corpus(path: &Path) -> Result<Vec<(FeatureVector, Rep)>, AdaptError> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

fn parse_feature_rows(lines: std::str::Lines<'_>) -> Result<Vec<(FeatureVector, Rep)>, AdaptError> {
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2; // 1-based, after the header
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(AdaptError::CorpusFormat {
                row,
                msg: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let label: Rep = fields[0].trim().parse().map_err(|_| AdaptError::CorpusFormat {
            row,
            msg: format!("unknown label {:?}", fields[0]),
        })?;
        let mut values = [0.0f64; 5];
        for (v, field) in values.iter_mut().zip(&fields[1..]) {
            *v = field
                .trim()
                .parse()
                .map_err(|_| AdaptError::CorpusFormat {
                    row,
                    msg: format!("not a number: {field:?}"),
                })?;
        }
        rows.push((FeatureVector::from_array(values), label));
    }
    Ok(rows)
}

/// Raw observations: consecutive same-label runs are cut into windows of
/// the default capacity; a tail shorter than the fit minimum is dropped.
fn parse_raw_rows(lines: std::str::Lines<'_>) -> Result<Vec<(FeatureVector, Rep)>, AdaptError> {
    let mut rows = Vec::new();
    let mut run_label: Option<Rep> = None;
    let mut run: Vec<(f64, f64)> = Vec::new();

    let flush = |label: Option<Rep>, run: &mut Vec<(f64, f64)>, rows: &mut Vec<_>| {
        if let Some(label) = label {
            for chunk in run.chunks(DEFAULT_WINDOW_CAPACITY) {
                if chunk.len() >= MIN_FEATURE_SAMPLES {
                    if let Some(fv) = fit_features(chunk) {
                        rows.push((fv, label));
                    }
                }
            }
        }
        run.clear();
    };

    for (i, line) in lines.enumerate() {
        let row = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(AdaptError::CorpusFormat {
                row,
                msg: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let label: Rep = fields[0].trim().parse().map_err(|_| AdaptError::CorpusFormat {
            row,
            msg: format!("unknown label {:?}", fields[0]),
        })?;
        let rss: f64 = fields[1].trim().parse().map_err(|_| AdaptError::CorpusFormat {
            row,
            msg: format!("not a number: {:?}", fields[1]),
        })?;
        let distance: f64 = fields[2].trim().parse().map_err(|_| AdaptError::CorpusFormat {
            row,
            msg: format!("not a number: {:?}", fields[2]),
        })?;
        if distance <= 0.0 {
            return Err(AdaptError::CorpusFormat {
                row,
                msg: format!("distance must be positive, got {distance}"),
            });
        }
        if run_label != Some(label) {
            flush(run_label, &mut run, &mut rows);
            run_label = Some(label);
        }
        run.push((rss, distance));
    }
    flush(run_label, &mut run, &mut rows);
    Ok(rows)
}
