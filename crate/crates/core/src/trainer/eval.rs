//! Test-set metrics: quantized KL against the true conditional,
//! smoothness of the predicted categoricals, expected-value MSE, and
//! perplexity for density-trained models.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fourier::LOG_FLOOR;
use crate::smoothness::{SmoothnessConfig, SmoothnessEvaluator};
use crate::synth::{quantized_true_conditional, Dataset};

use super::model::{floor_and_renormalize, Head, HeadKind, MlpModel, Objective};
use super::train::examples;

/// Grid resolution used to compare continuous densities.
pub const DENSITY_KL_GRID: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub kl: Option<f64>,
    pub smoothness: Option<f64>,
    pub mse: f64,
    pub perplexity: Option<f64>,
    pub mean_nll: Option<f64>,
    /// Test points whose prediction had to be floored before taking logs.
    pub floored: usize,
    pub test_size: usize,
}

/// KL(p || q) of two categoricals, `q` already floored.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum()
}

fn expected_value(p: &[f64], centers: &[f64]) -> f64 {
    p.iter().zip(centers).map(|(a, c)| a * c).sum()
}

/// Midpoints of `n` equal cells on [-1, 1].
fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -1.0 + (2 * i + 1) as f64 / n as f64).collect()
}

fn normalize(w: &mut [f64]) -> Option<()> {
    let total: f64 = w.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    w.iter_mut().for_each(|v| *v /= total);
    Some(())
}

pub fn evaluate(model: &MlpModel, dataset: &Dataset, objective: Objective) -> Result<EvalReport> {
    evaluate_with(model, dataset, objective, &SmoothnessConfig::default())
}

pub fn evaluate_with(model: &MlpModel, dataset: &Dataset, objective: Objective, smooth: &SmoothnessConfig) -> Result<EvalReport> {
    if dataset.test.is_empty() {
        return invalid("empty test set");
    }
    let head = model.runtime_head();
    let bins = &dataset.spec.bins;
    let centers = bins.centers();
    let test = examples(dataset, &dataset.test, objective);
    let smoother = SmoothnessEvaluator::new(bins.len(), smooth.clone())?;
    let grid = midpoint_grid(DENSITY_KL_GRID);
    let mut ws = model.workspace();
    let (mut kl, mut sm, mut se, mut nll) = (0.0, 0.0, 0.0, 0.0);
    let mut floored = 0;
    for (e, &i) in test.iter().zip(&dataset.test) {
        let raw = model.forward(&e.input, &mut ws).to_vec();
        let triple = &dataset.triples[i];
        let tc = dataset.true_conditional(triple);
        if let Head::Regression = head {
            se += (raw[0] - e.target.value).powi(2);
            continue;
        }
        let pmf = head.pmf(&raw).expect("categorical head");
        sm += smoother.eval(&pmf)?;
        se += (expected_value(&pmf, centers) - e.target.value).powi(2);
        match objective {
            Objective::Mle => {
                // continuous KL approximated on a fine midpoint grid
                let mut p: Vec<f64> = grid.iter().map(|&z| tc.pdf(z)).collect();
                let mut q: Vec<f64> = grid.iter().map(|&z| head.density(&raw, z).unwrap_or(0.0).max(0.0)).collect();
                if normalize(&mut p).is_none() {
                    p = quantized_true_conditional(&tc, bins)?.into_probs();
                    p.resize(grid.len(), 0.0);
                }
                if normalize(&mut q).is_none() {
                    q = vec![1.0 / grid.len() as f64; grid.len()];
                }
                if floor_and_renormalize(&mut q) {
                    floored += 1;
                }
                kl += kl_divergence(&p, &q);
                let density = head.density(&raw, e.target.value).unwrap_or(0.0);
                nll -= density.max(LOG_FLOOR).ln();
            }
            _ => {
                let reference = quantized_true_conditional(&tc, bins)?;
                let mut q = pmf;
                if floor_and_renormalize(&mut q) {
                    floored += 1;
                }
                kl += kl_divergence(reference.probs(), &q);
            }
        }
    }
    let n = test.len() as f64;
    let categorical = model.head.kind != HeadKind::Regression;
    let mle = objective == Objective::Mle;
    Ok(EvalReport {
        kl: categorical.then_some(kl / n),
        smoothness: categorical.then_some(sm / n),
        mse: se / n,
        perplexity: mle.then(|| (nll / n).exp()),
        mean_nll: mle.then_some(nll / n),
        floored,
        test_size: test.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample mean and population standard deviation.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self { mean, std: var.sqrt() })
    }
}

/// Metrics aggregated over seeds, with the per-seed reports kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub kl: Option<MeanStd>,
    pub smoothness: Option<MeanStd>,
    pub mse: MeanStd,
    pub perplexity: Option<MeanStd>,
    pub per_seed: Vec<(u64, EvalReport)>,
}

impl AggregateReport {
    pub fn new(per_seed: Vec<(u64, EvalReport)>) -> Result<Self> {
        if per_seed.is_empty() {
            return invalid("no reports to aggregate");
        }
        let collect = |f: &dyn Fn(&EvalReport) -> Option<f64>| -> Option<MeanStd> {
            let v: Option<Vec<f64>> = per_seed.iter().map(|(_, r)| f(r)).collect();
            v.and_then(|v| MeanStd::of(&v))
        };
        Ok(Self {
            kl: collect(&|r| r.kl),
            smoothness: collect(&|r| r.smoothness),
            mse: collect(&|r| Some(r.mse)).expect("nonempty"),
            perplexity: collect(&|r| r.perplexity),
            per_seed,
        })
    }
}
