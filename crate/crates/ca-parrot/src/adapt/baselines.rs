//! Reference classifiers used only for the cross-validation comparison:
//! a small sigmoid feed-forward network and a linear SVM trained with
//! sequential minimal optimization (one machine per label pair).
//!
//! Both standardize features on their training split; the forest does
//! not need that, but gradient and margin methods do.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FeatureVector, Rep, FEATURE_COUNT};

/// Per-feature z-score transform fitted on a training split.
#[derive(Debug, Clone)]
struct Scaler {
    mean: [f64; FEATURE_COUNT],
    std: [f64; FEATURE_COUNT],
}

impl Scaler {
    fn fit(data: &[(FeatureVector, Rep)]) -> Self {
        let n = data.len().max(1) as f64;
        let mut mean = [0.0; FEATURE_COUNT];
        for (fv, _) in data {
            for (m, v) in mean.iter_mut().zip(fv.as_array()) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = [0.0; FEATURE_COUNT];
        for (fv, _) in data {
            for ((s, v), m) in var.iter_mut().zip(fv.as_array()).zip(mean) {
                *s += (v - m).powi(2);
            }
        }
        let mut std = [0.0; FEATURE_COUNT];
        for (s, v) in std.iter_mut().zip(var) {
            let sd = (v / n).sqrt();
            *s = if sd > 1e-12 { sd } else { 1.0 };
        }
        Self { mean, std }
    }

    fn transform(&self, fv: &FeatureVector) -> [f64; FEATURE_COUNT] {
        let mut x = fv.as_array();
        for i in 0..FEATURE_COUNT {
            x[i] = (x[i] - self.mean[i]) / self.std[i];
        }
        x
    }
}

/// Network shape and training schedule: two hidden layers, sigmoid
/// everywhere, plain SGD with momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnHyper {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
}

impl Default for AnnHyper {
    fn default() -> Self {
        Self {
            hidden: 10,
            learning_rate: 0.1,
            momentum: 0.01,
            epochs: 500,
        }
    }
}

const OUT: usize = 3;

/// One dense layer, row-major weights [outputs × inputs].
#[derive(Debug, Clone)]
struct Layer {
    w: Vec<f64>,
    b: Vec<f64>,
    vw: Vec<f64>,
    vb: Vec<f64>,
    inputs: usize,
    outputs: usize,
}

impl Layer {
    fn new(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            w: (0..inputs * outputs).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            b: (0..outputs).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            vw: vec![0.0; inputs * outputs],
            vb: vec![0.0; outputs],
            inputs,
            outputs,
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.w[o * self.inputs..(o + 1) * self.inputs];
                let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b[o];
                sigmoid(z)
            })
            .collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Trained feed-forward classifier.
#[derive(Debug, Clone)]
pub struct AnnModel {
    scaler: Scaler,
    layers: [Layer; 3],
}

impl AnnModel {
    pub fn predict(&self, features: &FeatureVector) -> Rep {
        let x = self.scaler.transform(features);
        let a1 = self.layers[0].forward(&x);
        let a2 = self.layers[1].forward(&a1);
        let a3 = self.layers[2].forward(&a2);
        argmax_label(&a3)
    }
}

fn argmax_label(scores: &[f64]) -> Rep {
    let mut best = 0usize;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    Rep::from_index(best).expect("output layer width matches label count")
}

/// Per-sample SGD with momentum over one-hot targets and squared error.
pub fn train_ann(data: &[(FeatureVector, Rep)], hyper: AnnHyper, seed: u64) -> AnnModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scaler = Scaler::fit(data);
    let xs: Vec<[f64; FEATURE_COUNT]> = data.iter().map(|(fv, _)| scaler.transform(fv)).collect();
    let ys: Vec<usize> = data.iter().map(|(_, l)| l.index()).collect();
    let mut layers = [
        Layer::new(FEATURE_COUNT, hyper.hidden, &mut rng),
        Layer::new(hyper.hidden, hyper.hidden, &mut rng),
        Layer::new(hyper.hidden, OUT, &mut rng),
    ];

    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..hyper.epochs {
        // Fisher-Yates reshuffle each epoch.
        for k in (1..n).rev() {
            let j = rng.gen_range(0..=k);
            order.swap(k, j);
        }
        for &s in &order {
            let x = &xs[s];
            let a1 = layers[0].forward(x);
            let a2 = layers[1].forward(&a1);
            let a3 = layers[2].forward(&a2);

            // Output delta: (a − y) ⊙ a(1 − a).
            let mut d3 = vec![0.0; OUT];
            for o in 0..OUT {
                let target = if o == ys[s] { 1.0 } else { 0.0 };
                d3[o] = (a3[o] - target) * a3[o] * (1.0 - a3[o]);
            }
            let d2 = backprop_delta(&layers[2], &d3, &a2);
            let d1 = backprop_delta(&layers[1], &d2, &a1);

            apply(&mut layers[2], &d3, &a2, hyper);
            apply(&mut layers[1], &d2, &a1, hyper);
            apply(&mut layers[0], &d1, x, hyper);
        }
    }
    AnnModel { scaler, layers }
}

/// δ_prev = (Wᵀ δ) ⊙ a(1 − a) for the layer feeding `layer`.
fn backprop_delta(layer: &Layer, delta: &[f64], activation: &[f64]) -> Vec<f64> {
    (0..layer.inputs)
        .map(|i| {
            let upstream: f64 = (0..layer.outputs)
                .map(|o| layer.w[o * layer.inputs + i] * delta[o])
                .sum();
            upstream * activation[i] * (1.0 - activation[i])
        })
        .collect()
}

fn apply(layer: &mut Layer, delta: &[f64], input: &[f64], hyper: AnnHyper) {
    for o in 0..layer.outputs {
        for i in 0..layer.inputs {
            let idx = o * layer.inputs + i;
            let step = -hyper.learning_rate * delta[o] * input[i] + hyper.momentum * layer.vw[idx];
            layer.vw[idx] = step;
            layer.w[idx] += step;
        }
        let step = -hyper.learning_rate * delta[o] + hyper.momentum * layer.vb[o];
        layer.vb[o] = step;
        layer.b[o] += step;
    }
}

/// One-vs-one linear SVM ensemble.
#[derive(Debug, Clone)]
pub struct SvmModel {
    scaler: Scaler,
    machines: Vec<(Rep, Rep, LinearBinary)>,
}

#[derive(Debug, Clone, Copy)]
struct LinearBinary {
    w: [f64; FEATURE_COUNT],
    b: f64,
}

impl LinearBinary {
    fn decision(&self, x: &[f64; FEATURE_COUNT]) -> f64 {
        self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b
    }
}

impl SvmModel {
    pub fn predict(&self, features: &FeatureVector) -> Rep {
        let x = self.scaler.transform(features);
        let mut votes = [0usize; 3];
        for (pos, neg, m) in &self.machines {
            let winner = if m.decision(&x) >= 0.0 { *pos } else { *neg };
            votes[winner.index()] += 1;
        }
        let mut best = Rep::Rural;
        for label in [Rep::Suburban, Rep::Urban] {
            if votes[label.index()] > votes[best.index()] {
                best = label;
            }
        }
        best
    }
}

/// Trains the three pairwise machines with simplified SMO (C = 1,
/// linear kernel). Deterministic for a fixed seed.
pub fn train_svm(data: &[(FeatureVector, Rep)], seed: u64) -> SvmModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scaler = Scaler::fit(data);
    let pairs = [
        (Rep::Rural, Rep::Suburban),
        (Rep::Rural, Rep::Urban),
        (Rep::Suburban, Rep::Urban),
    ];
    let mut machines = Vec::with_capacity(pairs.len());
    for (pos, neg) in pairs {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (fv, label) in data {
            if *label == pos {
                xs.push(scaler.transform(fv));
                ys.push(1.0);
            } else if *label == neg {
                xs.push(scaler.transform(fv));
                ys.push(-1.0);
            }
        }
        let machine = if ys.iter().any(|&y| y > 0.0) && ys.iter().any(|&y| y < 0.0) {
            smo(&xs, &ys, 1.0, 1e-3, 5, &mut rng)
        } else {
            // Degenerate pair (a label absent from this split); the
            // remaining machines carry the vote.
            LinearBinary {
                w: [0.0; FEATURE_COUNT],
                b: 0.0,
            }
        };
        machines.push((pos, neg, machine));
    }
    SvmModel { scaler, machines }
}

fn dot(a: &[f64; FEATURE_COUNT], b: &[f64; FEATURE_COUNT]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Simplified sequential minimal optimization for a linear kernel;
/// the weight vector is maintained incrementally.
fn smo(
    xs: &[[f64; FEATURE_COUNT]],
    ys: &[f64],
    c: f64,
    tol: f64,
    max_passes: usize,
    rng: &mut ChaCha8Rng,
) -> LinearBinary {
    let n = xs.len();
    let mut alpha = vec![0.0f64; n];
    let mut b = 0.0f64;
    let mut w = [0.0f64; FEATURE_COUNT];
    let mut passes = 0usize;
    let mut sweeps = 0usize;
    while passes < max_passes && sweeps < 10_000 {
        sweeps += 1;
        let mut changed = 0usize;
        for i in 0..n {
            let ei = dot(&w, &xs[i]) + b - ys[i];
            let violates = (ys[i] * ei < -tol && alpha[i] < c) || (ys[i] * ei > tol && alpha[i] > 0.0);
            if !violates {
                continue;
            }
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let ej = dot(&w, &xs[j]) + b - ys[j];
            let (ai_old, aj_old) = (alpha[i], alpha[j]);
            let (lo, hi) = if ys[i] != ys[j] {
                ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
            } else {
                ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
            };
            if lo >= hi {
                continue;
            }
            let kii = dot(&xs[i], &xs[i]);
            let kjj = dot(&xs[j], &xs[j]);
            let kij = dot(&xs[i], &xs[j]);
            let eta = 2.0 * kij - kii - kjj;
            if eta >= 0.0 {
                continue;
            }
            let aj = (aj_old - ys[j] * (ei - ej) / eta).clamp(lo, hi);
            if (aj - aj_old).abs() < 1e-5 {
                continue;
            }
            let ai = ai_old + ys[i] * ys[j] * (aj_old - aj);
            for d in 0..FEATURE_COUNT {
                w[d] += ys[i] * (ai - ai_old) * xs[i][d] + ys[j] * (aj - aj_old) * xs[j][d];
            }
            let b1 = b - ei - ys[i] * (ai - ai_old) * kii - ys[j] * (aj - aj_old) * kij;
            let b2 = b - ej - ys[i] * (ai - ai_old) * kij - ys[j] * (aj - aj_old) * kjj;
            b = if alpha_interior(ai, c) {
                b1
            } else if alpha_interior(aj, c) {
                b2
            } else {
                0.5 * (b1 + b2)
            };
            alpha[i] = ai;
            alpha[j] = aj;
            changed += 1;
        }
        if changed == 0 {
            passes += 1;
        } else {
            passes = 0;
        }
    }
    LinearBinary { w, b }
}

fn alpha_interior(a: f64, c: f64) -> bool {
    a > 0.0 && a < c
}
