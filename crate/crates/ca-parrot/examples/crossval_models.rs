//! Cross-validating the forest against the ANN and linear SVM baselines.
//!
//! Runs stratified 5-fold cross-validation of all three models on one
//! synthesized corpus and prints mean fold accuracy per model. The same
//! (data, folds, seed) triple always reproduces the same table.

use ca_parrot::adapt::{cross_validate, synthesize_corpus, CorpusSpec};

fn main() {
    let spec = CorpusSpec { windows_per_class: 300, ..CorpusSpec::default() };
    let rows = synthesize_corpus(&spec, 11).expect("corpus synthesis");
    println!("corpus: {} windows across 3 environments", rows.len());

    let report = cross_validate(&rows, 5, 99).expect("cross-validation");
    println!();
    print!("{}", report.table());
    let (name, accuracy) = report.best();
    println!();
    println!("best model: {name} at {accuracy:.4} mean fold accuracy");

    let replay = cross_validate(&rows, 5, 99).expect("cross-validation");
    assert_eq!(report, replay);
    println!("second run with the same seed reproduces the table exactly");
}
