//! Training the radio-environment classifier.
//!
//! Synthesizes labeled observation windows from the three channel
//! prototypes, trains the random forest on one half, and scores it on the
//! other. The model survives a save/load round trip through its text
//! format unchanged.

use ca_parrot::adapt::{
    synthesize_corpus, train_forest, CorpusSpec, ForestHyper, ForestModel, Rep,
};

fn main() {
    let spec = CorpusSpec { windows_per_class: 400, ..CorpusSpec::default() };
    let rows = synthesize_corpus(&spec, 42).expect("corpus synthesis");
    println!(
        "synthesized {} windows ({} per environment), {} observations each",
        rows.len(),
        spec.windows_per_class,
        spec.window_capacity
    );

    // Interleaved split keeps the halves class-balanced.
    let train: Vec<_> = rows.iter().copied().step_by(2).collect();
    let test: Vec<_> = rows.iter().copied().skip(1).step_by(2).collect();

    let forest = train_forest(&train, ForestHyper::default(), 7).expect("training");
    println!("trained {} trees on {} windows", forest.tree_count(), train.len());

    let mut hits = 0usize;
    let mut per_class = [(0usize, 0usize); 3]; // (correct, total)
    for (features, label) in &test {
        let predicted = forest.classify(features);
        per_class[label.index()].1 += 1;
        if predicted == *label {
            hits += 1;
            per_class[label.index()].0 += 1;
        }
    }
    println!();
    println!("held-out accuracy {:.4}", hits as f64 / test.len() as f64);
    for label in Rep::ALL {
        let (correct, total) = per_class[label.index()];
        println!("  recall {label:<9} {:.4}  ({correct}/{total})", correct as f64 / total as f64);
    }

    let path = std::env::temp_dir().join("ca_parrot_example_forest.model");
    forest.save(&path).expect("save");
    let reloaded = ForestModel::load(&path).expect("load");
    let sample = &test[0].0;
    assert_eq!(forest.votes(sample), reloaded.votes(sample));
    println!();
    println!(
        "model saved to {} ({} bytes) and reloaded with identical votes",
        path.display(),
        std::fs::metadata(&path).unwrap().len()
    );
    std::fs::remove_file(&path).ok();
}
