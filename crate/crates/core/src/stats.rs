//! Small statistical toolkit shared by the fitness analyses: nearest-rank
//! percentiles, seeded stratified splits, and L2-regularized logistic
//! regression on standardized features.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Nearest-rank percentile: the value at 1-based rank `ceil(p/100 * n)` of
/// the ascending sort (rank at least 1).
pub fn nearest_rank<T: Copy + Ord>(values: &[T], percentile: f64) -> Option<T> {
    if values.is_empty() || !(0.0..=100.0).contains(&percentile) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let rank = ((percentile / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Indices of a seeded 80/20 split, stratified by label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn stratified_split(labels: &[bool], test_fraction: f64, seed: u64) -> Split {
    let mut rng = rng(seed);
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_test = (idx.len() as f64 * test_fraction).round() as usize;
        split.test.extend_from_slice(&idx[..n_test]);
        split.train.extend_from_slice(&idx[n_test..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    split
}

/// Labels in a seeded random order, for permutation nulls.
pub fn permuted(labels: &[bool], seed: u64) -> Vec<bool> {
    let mut out = labels.to_vec();
    out.shuffle(&mut rng(seed));
    out
}

/// Undersamples the larger class so both labels occur equally often.
pub fn balance_classes(labels: &[bool], seed: u64) -> Vec<usize> {
    let mut rng = rng(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    let n = pos.len().min(neg.len());
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut keep: Vec<usize> = pos[..n].iter().chain(&neg[..n]).copied().collect();
    keep.sort_unstable();
    keep
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticConfig {
    /// L2 penalty strength on the weights (the intercept is not penalized).
    pub l2: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2: 1.0,
            tolerance: 1e-8,
            max_iter: 1000,
        }
    }
}

/// Column means and standard deviations from a training matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x / n;
            }
        }
        let mut scale = vec![0.0; d];
        for r in rows {
            for ((s, x), m) in scale.iter_mut().zip(r).zip(&mean) {
                *s += (x - m) * (x - m) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    l2: f64,
}

impl Problem<'_> {
    fn loss(&self, w: &[f64], b: f64) -> f64 {
        let n = self.x.len() as f64;
        let data: f64 = self
            .x
            .iter()
            .zip(self.y)
            .map(|(row, &y)| {
                let z = b + dot(w, row);
                softplus(z) - if y { z } else { 0.0 }
            })
            .sum();
        data / n + self.l2 / (2.0 * n) * dot(w, w)
    }

    fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let n = self.x.len() as f64;
        let mut gw = vec![0.0; w.len()];
        let mut gb = 0.0;
        for (row, &y) in self.x.iter().zip(self.y) {
            let r = sigmoid(b + dot(w, row)) - if y { 1.0 } else { 0.0 };
            gb += r / n;
            for (g, x) in gw.iter_mut().zip(row) {
                *g += r * x / n;
            }
        }
        for (g, wi) in gw.iter_mut().zip(w) {
            *g += self.l2 / n * wi;
        }
        (gw, gb)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fits by gradient descent with backtracking line search until the loss
/// improves by less than `tolerance` or `max_iter` steps have run.
pub fn fit_logistic(x: &[Vec<f64>], y: &[bool], cfg: &LogisticConfig) -> Result<LogisticModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::DegenerateSplit("no training rows".to_string()));
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(Error::DegenerateSplit("training labels contain a single class".to_string()));
    }
    let standardizer = Standardizer::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| standardizer.transform(r)).collect();
    let problem = Problem { x: &z, y, l2: cfg.l2 };
    let d = standardizer.mean.len();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut loss = problem.loss(&w, b);
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let (gw, gb) = problem.gradient(&w, b);
        let gnorm2 = dot(&gw, &gw) + gb * gb;
        if gnorm2 == 0.0 {
            break;
        }
        step = (step * 2.0).min(16.0);
        let (nw, nb, nloss) = loop {
            let nw: Vec<f64> = w.iter().zip(&gw).map(|(wi, g)| wi - step * g).collect();
            let nb = b - step * gb;
            let nloss = problem.loss(&nw, nb);
            if nloss <= loss - 0.5 * step * gnorm2 || step < 1e-12 {
                break (nw, nb, nloss);
            }
            step *= 0.5;
        };
        let improvement = loss - nloss;
        w = nw;
        b = nb;
        loss = nloss;
        if improvement < cfg.tolerance {
            break;
        }
    }
    Ok(LogisticModel {
        standardizer,
        weights: w,
        bias: b,
        iterations,
    })
}

impl LogisticModel {
    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.bias + dot(&self.weights, &self.standardizer.transform(row)))
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        self.probability(row) >= 0.5
    }

    pub fn accuracy(&self, x: &[Vec<f64>], y: &[bool]) -> f64 {
        let hits = x.iter().zip(y).filter(|(r, &l)| self.predict(r) == l).count();
        hits as f64 / x.len() as f64
    }
}

/// Fits on the training indices of a split and scores on the test indices.
pub fn train_and_score(
    x: &[Vec<f64>],
    y: &[bool],
    split: &Split,
    cfg: &LogisticConfig,
) -> Result<f64> {
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<bool>) {
        (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
    };
    let (xt, yt) = pick(&split.train);
    let (xs, ys) = pick(&split.test);
    if xs.is_empty() {
        return Err(Error::DegenerateSplit("empty test split".to_string()));
    }
    let model = fit_logistic(&xt, &yt, cfg)?;
    Ok(model.accuracy(&xs, &ys))
}
