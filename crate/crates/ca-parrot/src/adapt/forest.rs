//! Random forest over feature vectors, built from scratch: bootstrap
//! resampling, per-split random feature subsets (⌈√F⌉ of F), Gini
//! impurity splits, depth cap, majority vote, and out-of-bag accuracy.
//!
//! Models persist as versioned structured text (one line per node) so
//! they stay inspectable and diffable.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{AdaptError, FeatureVector, Rep, FEATURE_COUNT};

/// Forest hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestHyper {
    pub trees: usize,
    pub max_depth: usize,
}

impl Default for ForestHyper {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: 15,
        }
    }
}

/// Number of candidate features examined per split: ⌈√F⌉.
fn features_per_split() -> usize {
    (FEATURE_COUNT as f64).sqrt().ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(Rep),
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn classify(&self, x: &[f64; FEATURE_COUNT]) -> Rep {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf(label) => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

/// Trained forest classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<Tree>,
    pub hyper: ForestHyper,
    /// Accuracy over samples left out of each tree's bootstrap; `None`
    /// when every sample landed in every bag.
    pub oob_accuracy: Option<f64>,
}

impl ForestModel {
    /// Majority vote across trees; ties take the smaller label.
    pub fn classify(&self, features: &FeatureVector) -> Rep {
        majority_label(&self.votes(features))
    }

    /// Raw per-label vote counts.
    pub fn votes(&self, features: &FeatureVector) -> [usize; 3] {
        let x = features.as_array();
        let mut votes = [0usize; 3];
        for t in &self.trees {
            votes[t.classify(&x).index()] += 1;
        }
        votes
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    /// Versioned text export: header, then per-tree node lists.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("ca-parrot-forest v1\n");
        out.push_str(&format!("trees {}\n", self.trees.len()));
        out.push_str(&format!("max_depth {}\n", self.hyper.max_depth));
        out.push_str(&format!("features {FEATURE_COUNT}\n"));
        match self.oob_accuracy {
            Some(a) => out.push_str(&format!("oob_accuracy {a}\n")),
            None => out.push_str("oob_accuracy none\n"),
        }
        for (i, tree) in self.trees.iter().enumerate() {
            out.push_str(&format!("tree {i}\n"));
            for (n, node) in tree.nodes.iter().enumerate() {
                match node {
                    Node::Leaf(label) => out.push_str(&format!("{n} leaf {label}\n")),
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => out.push_str(&format!("{n} split {feature} {threshold} {left} {right}\n")),
                }
            }
            out.push_str("end\n");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, AdaptError> {
        let mut lines = text.lines().enumerate();

        let (ln, version) = expect_kv(&mut lines, "ca-parrot-forest")?;
        if version != "v1" {
            return Err(bad(ln, format!("unsupported version {version:?}")));
        }
        let (ln, trees_str) = expect_kv(&mut lines, "trees")?;
        let tree_count: usize = trees_str
            .parse()
            .map_err(|_| bad(ln, "tree count is not an integer".into()))?;
        let (ln, depth_str) = expect_kv(&mut lines, "max_depth")?;
        let max_depth: usize = depth_str
            .parse()
            .map_err(|_| bad(ln, "max depth is not an integer".into()))?;
        let (ln, feat_str) = expect_kv(&mut lines, "features")?;
        let features: usize = feat_str
            .parse()
            .map_err(|_| bad(ln, "feature count is not an integer".into()))?;
        if features != FEATURE_COUNT {
            return Err(bad(
                ln,
                format!("model has {features} features, this build uses {FEATURE_COUNT}"),
            ));
        }
        let (ln, oob_str) = expect_kv(&mut lines, "oob_accuracy")?;
        let oob_accuracy = if oob_str == "none" {
            None
        } else {
            Some(
                oob_str
                    .parse::<f64>()
                    .map_err(|_| bad(ln, "oob accuracy is not a number".into()))?,
            )
        };

        let mut trees = Vec::with_capacity(tree_count);
        for _ in 0..tree_count {
            let (ln, idx_str) = expect_kv(&mut lines, "tree")?;
            let idx: usize = idx_str
                .parse()
                .map_err(|_| bad(ln, "tree index is not an integer".into()))?;
            if idx != trees.len() {
                return Err(bad(ln, format!("tree index {idx} out of order")));
            }
            let mut nodes = Vec::new();
            let end_ln;
            loop {
                let (ln, l) = next_line(&mut lines)?;
                if l.trim() == "end" {
                    end_ln = ln;
                    break;
                }
                let parts: Vec<&str> = l.split_whitespace().collect();
                let n: usize = parts
                    .first()
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(|| bad(ln, "node line must start with an index".into()))?;
                if n != nodes.len() {
                    return Err(bad(ln, format!("node index {n} out of order")));
                }
                match parts.get(1).copied() {
                    Some("leaf") => {
                        let label: Rep = parts
                            .get(2)
                            .ok_or_else(|| bad(ln, "leaf without label".into()))?
                            .parse()
                            .map_err(|_| bad(ln, "unknown leaf label".into()))?;
                        nodes.push(Node::Leaf(label));
                    }
                    Some("split") => {
                        if parts.len() != 6 {
                            return Err(bad(ln, "split line needs 6 fields".into()));
                        }
                        let feature: usize = parts[2]
                            .parse()
                            .map_err(|_| bad(ln, "bad split feature index".into()))?;
                        if feature >= FEATURE_COUNT {
                            return Err(bad(ln, "split feature index out of range".into()));
                        }
                        let threshold: f64 = parts[3]
                            .parse()
                            .map_err(|_| bad(ln, "bad split threshold".into()))?;
                        let left: u32 = parts[4]
                            .parse()
                            .map_err(|_| bad(ln, "bad left child index".into()))?;
                        let right: u32 = parts[5]
                            .parse()
                            .map_err(|_| bad(ln, "bad right child index".into()))?;
                        nodes.push(Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        });
                    }
                    _ => return Err(bad(ln, "node kind must be leaf or split".into())),
                }
            }
            // Child indices must stay inside this tree.
            let len = nodes.len() as u32;
            for (n, node) in nodes.iter().enumerate() {
                if let Node::Split { left, right, .. } = node {
                    if *left >= len || *right >= len {
                        return Err(bad(
                            end_ln,
                            format!("tree {idx} node {n} points past the node list"),
                        ));
                    }
                }
            }
            trees.push(Tree { nodes });
        }
        Ok(ForestModel {
            trees,
            hyper: ForestHyper {
                trees: tree_count,
                max_depth,
            },
            oob_accuracy,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), AdaptError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, AdaptError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}

fn bad(line: usize, msg: String) -> AdaptError {
    AdaptError::ModelFormat { line, msg }
}

type NumberedLines<'a> = std::iter::Enumerate<std::str::Lines<'a>>;

fn next_line<'a>(lines: &mut NumberedLines<'a>) -> Result<(usize, &'a str), AdaptError> {
    lines
        .next()
        .map(|(i, l)| (i + 1, l))
        .ok_or_else(|| bad(0, "unexpected end of file".into()))
}

/// Reads one `key value…` line, enforcing the key.
fn expect_kv(lines: &mut NumberedLines<'_>, want: &str) -> Result<(usize, String), AdaptError> {
    let (ln, l) = next_line(lines)?;
    let mut parts = l.split_whitespace();
    if parts.next() != Some(want) {
        return Err(bad(ln, format!("expected `{want} …`, got {l:?}")));
    }
    Ok((ln, parts.collect::<Vec<_>>().join(" ")))
}

/// Trains a forest: one bootstrap + depth-capped Gini tree per seed
/// drawn from `seed`. Deterministic for fixed (data, hyper, seed).
pub fn train_forest(
    data: &[(FeatureVector, Rep)],
    hyper: ForestHyper,
    seed: u64,
) -> Result<ForestModel, AdaptError> {
    let xs: Vec<[f64; FEATURE_COUNT]> = data.iter().map(|(f, _)| f.as_array()).collect();
    let ys: Vec<Rep> = data.iter().map(|&(_, l)| l).collect();
    let n = xs.len();
    let mut classes = [false; 3];
    for y in &ys {
        classes[y.index()] = true;
    }
    if classes.iter().filter(|&&c| c).count() < 2 {
        return Err(AdaptError::SingleClass);
    }

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let tree_seeds: Vec<u64> = (0..hyper.trees).map(|_| master.gen()).collect();

    let grown: Vec<(Tree, Vec<usize>)> = tree_seeds
        .par_iter()
        .map(|&tree_seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let mut in_bag = vec![false; n];
            let mut sample: Vec<usize> = (0..n)
                .map(|_| {
                    let i = rng.gen_range(0..n);
                    in_bag[i] = true;
                    i
                })
                .collect();
            let mut nodes = Vec::new();
            build_node(&xs, &ys, &mut sample, hyper.max_depth, &mut rng, &mut nodes);
            let oob: Vec<usize> = (0..n).filter(|&i| !in_bag[i]).collect();
            (Tree { nodes }, oob)
        })
        .collect();

    let mut oob_votes = vec![[0usize; 3]; n];
    for (tree, oob) in &grown {
        for &i in oob {
            oob_votes[i][tree.classify(&xs[i]).index()] += 1;
        }
    }
    let mut counted = 0usize;
    let mut correct = 0usize;
    for i in 0..n {
        if oob_votes[i] == [0, 0, 0] {
            continue;
        }
        counted += 1;
        if majority_label(&oob_votes[i]) == ys[i] {
            correct += 1;
        }
    }
    let oob_accuracy = (counted > 0).then(|| correct as f64 / counted as f64);

    Ok(ForestModel {
        trees: grown.into_iter().map(|(t, _)| t).collect(),
        hyper,
        oob_accuracy,
    })
}

/// Highest vote count; ties go to the smaller label.
fn majority_label(counts: &[usize; 3]) -> Rep {
    let mut best = Rep::Rural;
    let mut best_count = counts[0];
    for label in [Rep::Suburban, Rep::Urban] {
        if counts[label.index()] > best_count {
            best = label;
            best_count = counts[label.index()];
        }
    }
    best
}

fn gini(counts: &[usize; 3], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * p
        })
        .sum::<f64>()
}

/// Grows one subtree over `indices`; returns its root node index.
fn build_node(
    xs: &[[f64; FEATURE_COUNT]],
    ys: &[Rep],
    indices: &mut [usize],
    depth_left: usize,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
) -> u32 {
    let mut counts = [0usize; 3];
    for &i in indices.iter() {
        counts[ys[i].index()] += 1;
    }
    let total = indices.len();
    let node_gini = gini(&counts, total);
    let majority = majority_label(&counts);
    if depth_left == 0 || node_gini == 0.0 || total < 2 {
        nodes.push(Node::Leaf(majority));
        return (nodes.len() - 1) as u32;
    }

    // Random feature subset for this split.
    let mut feats = [0usize, 1, 2, 3, 4];
    let mtry = features_per_split();
    for k in 0..mtry {
        let j = rng.gen_range(k..FEATURE_COUNT);
        feats.swap(k, j);
    }

    let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, weighted gini)
    let mut scratch: Vec<(f64, Rep)> = Vec::with_capacity(total);
    for &f in &feats[..mtry] {
        scratch.clear();
        scratch.extend(indices.iter().map(|&i| (xs[i][f], ys[i])));
        scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0usize; 3];
        for k in 0..total - 1 {
            left[scratch[k].1.index()] += 1;
            if scratch[k].0 == scratch[k + 1].0 {
                continue;
            }
            let nl = k + 1;
            let nr = total - nl;
            let right = [
                counts[0] - left[0],
                counts[1] - left[1],
                counts[2] - left[2],
            ];
            let weighted = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr))
                / total as f64;
            if best.map_or(true, |(_, _, bw)| weighted < bw) {
                let threshold = 0.5 * (scratch[k].0 + scratch[k + 1].0);
                best = Some((f, threshold, weighted));
            }
        }
    }

    match best {
        Some((feature, threshold, weighted)) if weighted < node_gini - 1e-12 => {
            let (mut lhs, mut rhs): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .copied()
                .partition(|&i| xs[i][feature] <= threshold);
            let slot = nodes.len();
            nodes.push(Node::Leaf(majority)); // placeholder until children exist
            let left = build_node(xs, ys, &mut lhs, depth_left - 1, rng, nodes);
            let right = build_node(xs, ys, &mut rhs, depth_left - 1, rng, nodes);
            nodes[slot] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
            slot as u32
        }
        _ => {
            nodes.push(Node::Leaf(majority));
            (nodes.len() - 1) as u32
        }
    }
}
