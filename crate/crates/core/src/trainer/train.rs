//! Mini-batch Adam training with best-test-loss checkpointing.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linear::LinearMap;
use crate::rng::SeededRng;
use crate::synth::Dataset;

use super::model::{Head, HeadSpec, MlpModel, Objective, Target, DEFAULT_HIDDEN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub objective: Objective,
    pub hidden: Vec<usize>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl TrainConfig {
    pub fn new(objective: Objective, seed: u64) -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 128,
            epochs: 200,
            seed,
            objective,
            hidden: DEFAULT_HIDDEN.to_vec(),
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return invalid("learning_rate must be positive");
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return invalid("batch_size and epochs must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return invalid("Adam moments must lie in [0, 1) and epsilon must be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return invalid("hidden layer widths must be positive");
        }
        Ok(())
    }
}

/// One training example in model coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example {
    pub input: [f64; 2],
    pub target: Target,
}

/// Builds examples for an objective: dequantized inputs and bin targets
/// for the discretized objectives, raw `(x, y, z)` for MLE.
pub fn examples(dataset: &Dataset, indices: &[usize], objective: Objective) -> Vec<Example> {
    let bins = &dataset.spec.bins;
    indices
        .iter()
        .map(|&i| {
            let t = &dataset.triples[i];
            match objective {
                Objective::Mle => Example { input: [t.x, t.y], target: Target { bin: t.qz, value: t.z } },
                _ => Example { input: dataset.input(t), target: Target { bin: t.qz, value: bins.dequantize(t.qz) } },
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Adam {
    m: Vec<LinearMap>,
    v: Vec<LinearMap>,
    step: i32,
}

impl Adam {
    fn new(model: &MlpModel) -> Self {
        Self { m: model.zeros_like(), v: model.zeros_like(), step: 0 }
    }

    fn update(&mut self, model: &mut MlpModel, grad: &[LinearMap], cfg: &TrainConfig) {
        self.step += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.step);
        let bc2 = 1.0 - cfg.beta2.powi(self.step);
        let step = cfg.learning_rate * bc2.sqrt() / bc1;
        for (((layer, g), m), v) in model.layers.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            for (((p, g), m), v) in layer.params_mut().zip(g.params()).zip(m.params_mut()).zip(v.params_mut()) {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                *p -= step * *m / (v.sqrt() + cfg.epsilon * bc2.sqrt());
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub model: MlpModel,
    pub config: TrainConfig,
    pub best_epoch: usize,
    pub best_test_loss: f64,
    pub history: Vec<EpochRecord>,
}

/// Mean loss over examples without gradients.
pub fn mean_loss(model: &MlpModel, head: &Head, data: &[Example], objective: Objective) -> f64 {
    let mut ws = model.workspace();
    data.iter()
        .map(|e| model.loss_and_grad(head, &e.input, e.target, objective, &mut ws, None))
        .sum::<f64>()
        / data.len() as f64
}

pub fn train(head: HeadSpec, dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    head.validate(dataset.spec.bins.len(), cfg.objective)?;
    let mut init_rng = SeededRng::derived(cfg.seed, 1);
    let mut model = MlpModel::new(head, dataset.spec.bins.clone(), &cfg.hidden, &mut init_rng)?;
    let train_set = examples(dataset, &dataset.train, cfg.objective);
    let test_set = examples(dataset, &dataset.test, cfg.objective);
    train_model(&mut model, &train_set, &test_set, cfg)
}

/// Trains `model` in place and returns the best checkpoint.
pub fn train_model(model: &mut MlpModel, train_set: &[Example], test_set: &[Example], cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    if train_set.is_empty() || test_set.is_empty() {
        return invalid("train and test sets must be nonempty");
    }
    let head = model.runtime_head();
    let mut shuffle_rng = SeededRng::derived(cfg.seed, 2);
    let mut adam = Adam::new(model);
    let mut grad = model.zeros_like();
    let mut ws = model.workspace();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best = (model.clone(), 0usize, mean_loss(model, &head, test_set, cfg.objective));
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.iter_mut().for_each(|g| g.params_mut().for_each(|v| *v = 0.0));
            let mut batch_loss = 0.0;
            for &i in batch {
                let e = &train_set[i];
                batch_loss += model.loss_and_grad(&head, &e.input, e.target, cfg.objective, &mut ws, Some(&mut grad));
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { loss: batch_loss, epoch, batch: b });
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| g.params_mut().for_each(|v| *v *= scale));
            adam.update(model, &grad, cfg);
            epoch_loss += batch_loss;
        }
        let test_loss = mean_loss(model, &head, test_set, cfg.objective);
        history.push(EpochRecord { epoch, train_loss: epoch_loss / train_set.len() as f64, test_loss });
        if test_loss < best.2 {
            best = (model.clone(), epoch, test_loss);
        }
    }
    let (model, best_epoch, best_test_loss) = best;
    Ok(TrainedModel { model, config: cfg.clone(), best_epoch, best_test_loss, history })
}
