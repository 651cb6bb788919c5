//! Linear probing classifiers and the layer-wise / sample-size analyses.
//!
//! A probe is multinomial logistic regression trained with full-batch
//! gradient descent on frozen features. Training rows are put into a
//! canonical order (by label, then by feature bits) before any reduction, so
//! the trained model does not depend on how the caller ordered the rows.

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::Path;

use log::debug;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedstore::EmbeddingSet;
use crate::error::{Error, Result};
use crate::hash::mix_words;
use crate::tasks::{Split, TaskDataset, TaskKind};

pub const STD_FLOOR: f64 = 1e-8;
pub const DEFAULT_SAMPLE_SIZES: [usize; 3] = [100, 1000, 10_000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub l2_lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// The learning rate is multiplied by `decay_factor` every `decay_every`
    /// epochs.
    pub decay_every: usize,
    pub decay_factor: f64,
    /// Mini-batch size; `None` trains full-batch.
    pub batch: Option<usize>,
    pub seed: u64,
    pub standardize: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            l2_lambda: 1e-4,
            epochs: 200,
            learning_rate: 0.1,
            decay_every: 50,
            decay_factor: 0.5,
            batch: None,
            seed: 42,
            standardize: true,
        }
    }
}

impl ProbeConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Probe("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Probe("learning rate must be positive".into()));
        }
        if self.l2_lambda.is_nan() || self.l2_lambda < 0.0 {
            return Err(Error::Probe("l2 lambda must be non-negative".into()));
        }
        if self.batch == Some(0) {
            return Err(Error::Probe("batch size must be at least 1".into()));
        }
        if self.decay_every == 0 {
            return Err(Error::Probe("decay interval must be at least 1".into()));
        }
        Ok(())
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate * self.decay_factor.powi((epoch / self.decay_every) as i32)
    }
}

/// Per-dimension standardization fitted on the training features.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl Scaler {
    fn fit(x: &Array2<f64>) -> Scaler {
        let n = x.nrows() as f64;
        let mean = x.sum_axis(Axis(0)) / n;
        let mut var = Array1::<f64>::zeros(x.ncols());
        for row in x.rows() {
            for ((v, &m), &xi) in var.iter_mut().zip(&mean).zip(row) {
                *v += (xi - m) * (xi - m);
            }
        }
        let std = var.mapv(|v| (v / n).sqrt().max(STD_FLOOR));
        Scaler { mean, std }
    }

    fn apply(&self, x: &mut Array2<f64>) {
        for mut row in x.rows_mut() {
            for ((xi, &m), &s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *xi = (*xi - m) / s;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeModel {
    /// `[class_count × dim]`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub scaler: Option<Scaler>,
}

impl ProbeModel {
    pub fn class_count(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    fn prepare(&self, features: ArrayView2<'_, f32>) -> Result<Array2<f64>> {
        if features.ncols() != self.dim() {
            return Err(Error::Probe(format!(
                "feature dimension {} does not match the model dimension {}",
                features.ncols(),
                self.dim()
            )));
        }
        check_finite(features)?;
        let mut x = features.mapv(f64::from);
        if let Some(s) = &self.scaler {
            s.apply(&mut x);
        }
        Ok(x)
    }

    /// Argmax class per row; ties go to the lowest class code.
    pub fn predict(&self, features: ArrayView2<'_, f32>) -> Result<Vec<u32>> {
        let x = self.prepare(features)?;
        let logits = x.dot(&self.weights.t()) + &self.bias;
        Ok(logits
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best as u32
            })
            .collect())
    }
}

fn check_finite(features: ArrayView2<'_, f32>) -> Result<()> {
    if let Some((idx, _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Probe(format!("non-finite feature at row {}, column {}", idx.0, idx.1)));
    }
    Ok(())
}

/// Mean cross-entropy plus `(λ/2)·‖W‖²` and its gradient with respect to the
/// weights and the (unregularized) bias.
pub fn loss_and_gradient(
    weights: &Array2<f64>,
    bias: &Array1<f64>,
    x: &Array2<f64>,
    labels: &[u32],
    l2_lambda: f64,
) -> (f64, Array2<f64>, Array1<f64>) {
    let n = x.nrows() as f64;
    let mut probs = x.dot(&weights.t()) + bias;
    let mut nll = 0.0;
    for (mut row, &y) in probs.rows_mut().into_iter().zip(labels) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let z: f64 = row.sum();
        nll -= (row[y as usize] / z).ln();
        row.mapv_inplace(|v| v / z);
        row[y as usize] -= 1.0;
    }
    probs.mapv_inplace(|v| v / n);
    let grad_w = probs.t().dot(x) + &(weights * l2_lambda);
    let grad_b = probs.sum_axis(Axis(0));
    let loss = nll / n + 0.5 * l2_lambda * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

/// Rows sorted by (label, feature bits).
fn canonical_order(features: ArrayView2<'_, f32>, labels: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| {
        labels[a].cmp(&labels[b]).then_with(|| {
            features
                .row(a)
                .iter()
                .zip(features.row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    order
}

pub fn train_linear_probe(
    features: ArrayView2<'_, f32>,
    labels: &[u32],
    class_count: usize,
    config: &ProbeConfig,
) -> Result<ProbeModel> {
    train_linear_probe_traced(features, labels, class_count, config).map(|(m, _)| m)
}

/// Train a probe and also return the full-data training loss before each
/// epoch and after the last one (`epochs + 1` values).
pub fn train_linear_probe_traced(
    features: ArrayView2<'_, f32>,
    labels: &[u32],
    class_count: usize,
    config: &ProbeConfig,
) -> Result<(ProbeModel, Vec<f64>)> {
    config.validate()?;
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::Probe(format!("{n} feature rows but {} labels", labels.len())));
    }
    if class_count < 2 {
        return Err(Error::Probe("a probe needs at least two classes".into()));
    }
    if n < class_count {
        return Err(Error::Probe(format!("{n} training rows for {class_count} classes")));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= class_count) {
        return Err(Error::Probe(format!("label {bad} out of range for {class_count} classes")));
    }
    check_finite(features)?;

    let order = canonical_order(features, labels);
    let mut x = features.select(Axis(0), &order).mapv(f64::from);
    let y: Vec<u32> = order.iter().map(|&i| labels[i]).collect();
    let scaler = config.standardize.then(|| Scaler::fit(&x));
    if let Some(s) = &scaler {
        s.apply(&mut x);
    }

    let mut weights = Array2::<f64>::zeros((class_count, x.ncols()));
    let mut bias = Array1::<f64>::zeros(class_count);
    let mut losses = Vec::with_capacity(config.epochs + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows: Vec<usize> = (0..n).collect();

    for epoch in 0..config.epochs {
        let lr = config.learning_rate_at(epoch);
        match config.batch {
            None => {
                let (loss, gw, gb) = loss_and_gradient(&weights, &bias, &x, &y, config.l2_lambda);
                check_loss(loss, epoch)?;
                losses.push(loss);
                weights.scaled_add(-lr, &gw);
                bias.scaled_add(-lr, &gb);
            }
            Some(batch) => {
                let (loss, _, _) = loss_and_gradient(&weights, &bias, &x, &y, config.l2_lambda);
                check_loss(loss, epoch)?;
                losses.push(loss);
                rows.shuffle(&mut rng);
                for chunk in rows.chunks(batch) {
                    let xb = x.select(Axis(0), chunk);
                    let yb: Vec<u32> = chunk.iter().map(|&i| y[i]).collect();
                    let (_, gw, gb) =
                        loss_and_gradient(&weights, &bias, &xb, &yb, config.l2_lambda);
                    weights.scaled_add(-lr, &gw);
                    bias.scaled_add(-lr, &gb);
                }
            }
        }
    }
    let (loss, _, _) = loss_and_gradient(&weights, &bias, &x, &y, config.l2_lambda);
    check_loss(loss, config.epochs)?;
    losses.push(loss);
    Ok((ProbeModel { weights, bias, scaler }, losses))
}

fn check_loss(loss: f64, epoch: usize) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::Probe(format!(
            "training diverged at epoch {epoch} (loss is {loss}); try a smaller learning rate"
        )))
    }
}

pub fn evaluate(model: &ProbeModel, features: ArrayView2<'_, f32>, labels: &[u32]) -> Result<f64> {
    if features.nrows() == 0 {
        return Err(Error::Probe("empty evaluation set".into()));
    }
    if labels.len() != features.nrows() {
        return Err(Error::Probe(format!(
            "{} feature rows but {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    let predictions = model.predict(features)?;
    let correct = predictions.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(correct as f64 / labels.len() as f64)
}

// ---- analyses -----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub task: TaskKind,
    pub layer: usize,
    /// Nominal sample size: the dataset size the training split was drawn
    /// from (the full dataset for a layer-wise run).
    pub train_size: usize,
    pub seed: u64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProbeResults {
    pub entries: Vec<ResultEntry>,
}

impl ProbeResults {
    pub fn extend(&mut self, other: ProbeResults) {
        self.entries.extend(other.entries);
    }

    pub fn for_task(&self, task: TaskKind) -> impl Iterator<Item = &ResultEntry> {
        self.entries.iter().filter(move |e| e.task == task)
    }

    /// Test accuracy per layer for one task and size, ordered by layer.
    pub fn layer_curve(&self, task: TaskKind, train_size: usize) -> Vec<(usize, f64)> {
        let mut v: Vec<_> = self
            .for_task(task)
            .filter(|e| e.train_size == train_size)
            .map(|e| (e.layer, e.test_accuracy))
            .collect();
        v.sort_by_key(|p| p.0);
        v
    }

    /// Distinct train sizes for a task, ascending.
    pub fn sizes(&self, task: TaskKind) -> Vec<usize> {
        let mut v: Vec<usize> = self.for_task(task).map(|e| e.train_size).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn tasks(&self) -> Vec<TaskKind> {
        TaskKind::ALL.into_iter().filter(|t| self.for_task(*t).next().is_some()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("task,layer,train_size,seed,train_acc,test_acc\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.6}\n",
                e.task, e.layer, e.train_size, e.seed, e.train_accuracy, e.test_accuracy
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> std::result::Result<ProbeResults, String> {
        let mut lines = text.lines();
        match lines.next() {
            Some("task,layer,train_size,seed,train_acc,test_acc") => {}
            other => return Err(format!("unexpected header {other:?}")),
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(format!("line {}: expected 6 columns", i + 2));
            }
            let bad = |what: &str| format!("line {}: bad {what}", i + 2);
            let acc = |s: &str, what: &str| -> std::result::Result<f64, String> {
                let v: f64 = s.parse().map_err(|_| bad(what))?;
                if (0.0..=1.0).contains(&v) {
                    Ok(v)
                } else {
                    Err(bad(what))
                }
            };
            entries.push(ResultEntry {
                task: cols[0].parse().map_err(|_| bad("task"))?,
                layer: cols[1].parse().map_err(|_| bad("layer"))?,
                train_size: cols[2].parse().map_err(|_| bad("train_size"))?,
                seed: cols[3].parse().map_err(|_| bad("seed"))?,
                train_accuracy: acc(cols[4], "train_acc")?,
                test_accuracy: acc(cols[5], "test_acc")?,
            });
        }
        Ok(ProbeResults { entries })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<ProbeResults> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ProbeResults::from_csv(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message,
        })
    }
}

fn check_layers(embeddings: &EmbeddingSet, layers: &[usize]) -> Result<()> {
    if let Some(&l) = layers.iter().find(|&&l| l >= embeddings.n_layers) {
        return Err(Error::Probe(format!(
            "layer {l} out of range for {} layers",
            embeddings.n_layers
        )));
    }
    Ok(())
}

/// One probe per layer on the dataset's own train/test split.
pub fn run_layerwise(
    dataset: &TaskDataset,
    embeddings: &EmbeddingSet,
    config: &ProbeConfig,
) -> Result<ProbeResults> {
    let layers: Vec<usize> = (0..embeddings.n_layers).collect();
    run_layers(dataset, embeddings, &layers, config)
}

pub fn run_layers(
    dataset: &TaskDataset,
    embeddings: &EmbeddingSet,
    layers: &[usize],
    config: &ProbeConfig,
) -> Result<ProbeResults> {
    embeddings.check_alignment(dataset)?;
    check_layers(embeddings, layers)?;
    let train = dataset.split_indices(Split::Train);
    let test = dataset.split_indices(Split::Test);
    let entries = layers
        .par_iter()
        .map(|&layer| probe_layer(dataset, embeddings, layer, &train, &test, dataset.instances.len(), config))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeResults { entries })
}

/// Probe accuracy as a function of sample size, for every layer.
pub fn run_sample_curve(
    dataset: &TaskDataset,
    embeddings: &EmbeddingSet,
    sizes: &[usize],
    config: &ProbeConfig,
) -> Result<ProbeResults> {
    let layers: Vec<usize> = (0..embeddings.n_layers).collect();
    run_sample_curve_layers(dataset, embeddings, &layers, sizes, config)
}

pub fn run_sample_curve_layers(
    dataset: &TaskDataset,
    embeddings: &EmbeddingSet,
    layers: &[usize],
    sizes: &[usize],
    config: &ProbeConfig,
) -> Result<ProbeResults> {
    embeddings.check_alignment(dataset)?;
    check_layers(embeddings, layers)?;
    let total = dataset.instances.len();
    for &size in sizes {
        if size < dataset.class_count {
            return Err(Error::Probe(format!(
                "sample size {size} is smaller than the class count {}",
                dataset.class_count
            )));
        }
        if size > total {
            return Err(Error::Probe(format!(
                "sample size {size} exceeds the dataset size {total}"
            )));
        }
    }
    let test = dataset.split_indices(Split::Test);
    let train_fraction = dataset.train_fraction();
    let mut jobs = Vec::new();
    for &size in sizes {
        let target = ((size as f64 * train_fraction).round() as usize).max(dataset.class_count);
        let train = balanced_subsample(dataset, target, config.seed);
        debug!("{}: size {size} → {} training rows", dataset.task, train.len());
        for &layer in layers {
            jobs.push((size, layer, train.clone()));
        }
    }
    let entries = jobs
        .par_iter()
        .map(|(size, layer, train)| probe_layer(dataset, embeddings, *layer, train, &test, *size, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeResults { entries })
}

/// Class-balanced subset of the training split with `target` rows. Each
/// class uses a fixed seeded order, so smaller subsets nest inside larger
/// ones.
fn balanced_subsample(dataset: &TaskDataset, target: usize, seed: u64) -> Vec<usize> {
    let k = dataset.class_count;
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in dataset.split_indices(Split::Train) {
        per_class[dataset.instances[i].label as usize].push(i);
    }
    for (c, rows) in per_class.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_words(&[seed, c as u64, 0x5ca1e]));
        rows.shuffle(&mut rng);
    }
    let base = target / k;
    let mut quota = vec![base; k];
    let mut extra: Vec<usize> = (0..k).collect();
    extra.shuffle(&mut ChaCha8Rng::seed_from_u64(mix_words(&[seed, target as u64, 0xe7a])));
    for &c in extra.iter().take(target - base * k) {
        quota[c] += 1;
    }
    let mut out: Vec<usize> = per_class
        .iter()
        .zip(&quota)
        .flat_map(|(rows, &q)| rows.iter().take(q).copied())
        .collect();
    out.sort_unstable();
    out
}

fn probe_layer(
    dataset: &TaskDataset,
    embeddings: &EmbeddingSet,
    layer: usize,
    train: &[usize],
    test: &[usize],
    train_size: usize,
    config: &ProbeConfig,
) -> Result<ResultEntry> {
    let view = embeddings.layer(layer);
    let labels = dataset.labels();
    let x_train = view.select(Axis(0), train);
    let y_train: Vec<u32> = train.iter().map(|&i| labels[i]).collect();
    let x_test = view.select(Axis(0), test);
    let y_test: Vec<u32> = test.iter().map(|&i| labels[i]).collect();
    let model = train_linear_probe(x_train.view(), &y_train, dataset.class_count, config)?;
    Ok(ResultEntry {
        task: dataset.task,
        layer,
        train_size,
        seed: config.seed,
        train_accuracy: evaluate(&model, x_train.view(), &y_train)?,
        test_accuracy: evaluate(&model, x_test.view(), &y_test)?,
    })
}
