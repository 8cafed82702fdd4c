//! Radio-environment classification and parameter adaptation: feature
//! extraction from observed (RSS, distance) pairs, a from-scratch random
//! forest (plus ANN and linear-SVM reference baselines), k-fold
//! evaluation, the exponential-backoff confirmation machine, and the
//! per-environment parameter database.

mod backoff;
mod baselines;
mod corpus;
mod eval;
mod features;
mod forest;

pub use backoff::{backoff_tick, BackoffOutcome, BackoffState, BACKOFF_CAP};
pub use baselines::{train_ann, train_svm, AnnHyper, AnnModel, SvmModel};
pub use corpus::{
    corpus_to_string, load_corpus, parse_corpus, synthesize_corpus, write_corpus, CorpusSpec,
    FEATURE_HEADER, RAW_HEADER,
};
pub use eval::{cross_validate, CrossValReport};
pub use features::{
    extract_features, fit_features, FeatureVector, SampleWindow, DEFAULT_WINDOW_CAPACITY,
    FEATURE_COUNT, MIN_FEATURE_SAMPLES,
};
pub use forest::{train_forest, ForestHyper, ForestModel};

use crate::routing::ParameterSet;

/// Radio environment prototype: which propagation regime the node
/// believes it is operating in.
#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    serde::Serialize,
    serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Rep {
    Rural,
    Suburban,
    Urban,
}

impl Rep {
    pub const ALL: [Rep; 3] = [Rep::Rural, Rep::Suburban, Rep::Urban];

    /// Stable index used for vote arrays and confusion matrices.
    pub fn index(self) -> usize {
        match self {
            Rep::Rural => 0,
            Rep::Suburban => 1,
            Rep::Urban => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Rep> {
        Rep::ALL.get(i).copied()
    }
}

impl std::fmt::Display for Rep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Rep::Rural => "rural",
            Rep::Suburban => "suburban",
            Rep::Urban => "urban",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Rep {
    type Err = AdaptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rural" => Ok(Rep::Rural),
            "suburban" => Ok(Rep::Suburban),
            "urban" => Ok(Rep::Urban),
            other => Err(AdaptError::UnknownLabel(other.to_string())),
        }
    }
}

/// Per-environment protocol parameter tuples.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ParameterDB {
    pub rural: ParameterSet,
    pub suburban: ParameterSet,
    pub urban: ParameterSet,
}

impl Default for ParameterDB {
    fn default() -> Self {
        Self {
            rural: ParameterSet::new(-5.0, 0.5, 0.8, 1, 1),
            suburban: ParameterSet::new(600.0, 0.2, 0.2, 3, 2),
            urban: ParameterSet::new(20.0, 0.6, 0.3, 1, 2),
        }
    }
}

impl ParameterDB {
    pub fn lookup(&self, label: Rep) -> ParameterSet {
        match label {
            Rep::Rural => self.rural,
            Rep::Suburban => self.suburban,
            Rep::Urban => self.urban,
        }
    }
}

/// Classification / training / corpus failures.
#[derive(Debug, thiserror::Error)]
pub enum AdaptError {
    #[error("unknown environment label {0:?}")]
    UnknownLabel(String),
    #[error("training data contains a single class; need at least two")]
    SingleClass,
    #[error("dataset has {samples} samples, fewer than {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("corpus row {row}: {msg}")]
    CorpusFormat { row: usize, msg: String },
    #[error("model file line {line}: {msg}")]
    ModelFormat { line: usize, msg: String },
    #[error("corpus synthesis stalled: {0}")]
    Synthesis(String),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
