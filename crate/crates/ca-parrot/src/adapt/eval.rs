//! Stratified k-fold comparison of the forest against the ANN and
//! linear-SVM baselines.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::baselines::{train_ann, train_svm, AnnHyper};
use super::forest::{train_forest, ForestHyper};
use super::{AdaptError, FeatureVector, Rep};

/// Mean fold accuracy per model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossValReport {
    pub folds: usize,
    pub forest_accuracy: f64,
    pub ann_accuracy: f64,
    pub svm_accuracy: f64,
}

impl CrossValReport {
    /// Highest-accuracy model; ties prefer the forest, then the ANN.
    pub fn best(&self) -> (&'static str, f64) {
        let mut best = ("random_forest", self.forest_accuracy);
        for (name, acc) in [("ann", self.ann_accuracy), ("svm_linear", self.svm_accuracy)] {
            if acc > best.1 {
                best = (name, acc);
            }
        }
        best
    }

    /// Tab-delimited table, one model per row.
    pub fn table(&self) -> String {
        format!(
            "model\taccuracy\nrandom_forest\t{:.4}\nann\t{:.4}\nsvm_linear\t{:.4}\n",
            self.forest_accuracy, self.ann_accuracy, self.svm_accuracy
        )
    }
}

/// Stratified k-fold cross-validation of all three models. Deterministic
/// for fixed (data, folds, seed); folds evaluate in parallel.
pub fn cross_validate(
    data: &[(FeatureVector, Rep)],
    folds: usize,
    seed: u64,
) -> Result<CrossValReport, AdaptError> {
    if folds < 2 {
        return Err(AdaptError::TooFewFolds(folds));
    }
    if data.len() < folds {
        return Err(AdaptError::TooFewSamples {
            samples: data.len(),
            folds,
        });
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);

    // Stratified assignment: shuffle within each class, then deal
    // consecutively across folds with a rolling cursor so no fold ends
    // up empty.
    let mut by_class: BTreeMap<Rep, Vec<usize>> = BTreeMap::new();
    for (i, (_, label)) in data.iter().enumerate() {
        by_class.entry(*label).or_default().push(i);
    }
    let mut fold_of = vec![0usize; data.len()];
    let mut cursor = 0usize;
    for idxs in by_class.values_mut() {
        for k in (1..idxs.len()).rev() {
            let j = master.gen_range(0..=k);
            idxs.swap(k, j);
        }
        for (k, &i) in idxs.iter().enumerate() {
            fold_of[i] = (cursor + k) % folds;
        }
        cursor = (cursor + idxs.len()) % folds;
    }

    let fold_seeds: Vec<[u64; 3]> = (0..folds)
        .map(|_| [master.gen(), master.gen(), master.gen()])
        .collect();

    let per_fold: Vec<(f64, f64, f64)> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, sample) in data.iter().enumerate() {
                if fold_of[i] == f {
                    test.push(*sample);
                } else {
                    train.push(*sample);
                }
            }
            let forest = train_forest(&train, ForestHyper::default(), fold_seeds[f][0])?;
            let ann = train_ann(&train, AnnHyper::default(), fold_seeds[f][1]);
            let svm = train_svm(&train, fold_seeds[f][2]);
            let total = test.len() as f64;
            let hits = |pred: &dyn Fn(&FeatureVector) -> Rep| {
                test.iter().filter(|(fv, l)| pred(fv) == *l).count() as f64 / total
            };
            Ok((
                hits(&|fv| forest.classify(fv)),
                hits(&|fv| ann.predict(fv)),
                hits(&|fv| svm.predict(fv)),
            ))
        })
        .collect::<Result<_, AdaptError>>()?;

    let k = folds as f64;
    Ok(CrossValReport {
        folds,
        forest_accuracy: per_fold.iter().map(|r| r.0).sum::<f64>() / k,
        ann_accuracy: per_fold.iter().map(|r| r.1).sum::<f64>() / k,
        svm_accuracy: per_fold.iter().map(|r| r.2).sum::<f64>() / k,
    })
}
