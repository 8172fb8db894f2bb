//! MLP backbone with interchangeable output heads and manual backprop.

use serde::{Deserialize, Serialize};

use crate::binning::BinLayout;
use crate::error::{invalid, Error, Result};
use crate::fourier::{init_head_weights, CategoricalDistribution, FourierBasis, HeadConfig, LOG_FLOOR};
use crate::linear::LinearMap;
use crate::rng::SeededRng;

use super::gmm::{GmmBasis, GmmParams, GMM_RAW_DIM};

pub const DEFAULT_HIDDEN: [usize; 2] = [64, 32];
pub const INPUT_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    Linear,
    Fourier,
    Gmm,
    Regression,
}

impl HeadKind {
    pub const ALL: [HeadKind; 4] = [HeadKind::Linear, HeadKind::Fourier, HeadKind::Gmm, HeadKind::Regression];

    pub fn name(self) -> &'static str {
        match self {
            HeadKind::Linear => "linear",
            HeadKind::Fourier => "fourier",
            HeadKind::Gmm => "gmm",
            HeadKind::Regression => "regression",
        }
    }
}

impl std::str::FromStr for HeadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(HeadKind::Linear),
            "fourier" => Ok(HeadKind::Fourier),
            "gmm" | "gmm2" => Ok(HeadKind::Gmm),
            "regression" => Ok(HeadKind::Regression),
            other => invalid(format!("unknown head '{other}' (expected linear, fourier, gmm or regression)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    CrossEntropy,
    Mle,
    Mse,
}

impl Objective {
    /// The objective a head is trained with by default.
    pub fn default_for(head: HeadKind) -> Self {
        match head {
            HeadKind::Regression => Objective::Mse,
            _ => Objective::CrossEntropy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadSpec {
    pub kind: HeadKind,
    /// Fourier only.
    pub num_frequencies: usize,
    /// Fourier only.
    pub gamma: f64,
    /// GMM only: learn the mixture weights instead of fixing them at 1/2.
    pub learn_weights: bool,
    /// Fourier only: initial weight shrink factor.
    pub init_shrink: f64,
}

impl HeadSpec {
    pub fn new(kind: HeadKind) -> Self {
        Self { kind, num_frequencies: 12, gamma: 0.0, learn_weights: true, init_shrink: 1000.0 }
    }

    pub fn fourier(num_frequencies: usize, gamma: f64) -> Self {
        Self { num_frequencies, gamma, ..Self::new(HeadKind::Fourier) }
    }

    pub fn raw_dim(&self, num_bins: usize) -> usize {
        match self.kind {
            HeadKind::Linear => num_bins,
            HeadKind::Fourier => 2 * (self.num_frequencies + 1),
            HeadKind::Gmm => GMM_RAW_DIM,
            HeadKind::Regression => 1,
        }
    }

    pub fn validate(&self, num_bins: usize, objective: Objective) -> Result<()> {
        let ok = matches!(
            (self.kind, objective),
            (HeadKind::Linear, Objective::CrossEntropy)
                | (HeadKind::Fourier, Objective::CrossEntropy | Objective::Mle)
                | (HeadKind::Gmm, Objective::CrossEntropy | Objective::Mle)
                | (HeadKind::Regression, Objective::Mse)
        );
        if !ok {
            return invalid(format!("head {} cannot be trained with {objective:?}", self.kind.name()));
        }
        if self.kind == HeadKind::Fourier {
            if self.num_frequencies == 0 {
                return invalid("a Fourier head needs at least one frequency");
            }
            if objective == Objective::CrossEntropy {
                HeadConfig::new(DEFAULT_HIDDEN[1], num_bins, self.num_frequencies)?;
            }
            if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
                return invalid("gamma must be finite and nonnegative");
            }
        }
        Ok(())
    }
}

/// Runtime form of a head: precomputed tables plus loss functions on the
/// raw outputs of the last linear layer.
#[derive(Debug, Clone)]
pub enum Head {
    Linear,
    Fourier { basis: FourierBasis, gamma: f64 },
    Gmm(GmmBasis),
    Regression,
}

fn log_softmax_ce(logits: &[f64], target: usize, grad: Option<&mut [f64]>) -> f64 {
    let hi = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logits.iter().map(|l| (l - hi).exp()).sum();
    let ln_total = hi + total.ln();
    if let Some(g) = grad {
        for (gj, l) in g.iter_mut().zip(logits) {
            *gj = (l - ln_total).exp();
        }
        g[target] -= 1.0;
    }
    ln_total - logits[target]
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let hi = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits.iter().map(|l| (l - hi).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

/// What a loss is computed against: a bin index and a real value (the
/// continuous `z` for MLE, the bin center for MSE).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub bin: usize,
    pub value: f64,
}

impl Head {
    pub fn new(spec: &HeadSpec, bins: &BinLayout) -> Self {
        match spec.kind {
            HeadKind::Linear => Head::Linear,
            HeadKind::Fourier => Head::Fourier {
                basis: FourierBasis::new(spec.num_frequencies, bins.centers()),
                gamma: spec.gamma,
            },
            HeadKind::Gmm => Head::Gmm(GmmBasis::new(bins, spec.learn_weights)),
            HeadKind::Regression => Head::Regression,
        }
    }

    pub fn loss(&self, raw: &[f64], target: Target, objective: Objective, grad: Option<&mut [f64]>) -> f64 {
        match (self, objective) {
            (Head::Linear, _) => log_softmax_ce(raw, target.bin, grad),
            (Head::Fourier { basis, gamma }, Objective::Mle) => basis.negative_log_likelihood(raw, target.value, *gamma, grad).0,
            (Head::Fourier { basis, gamma }, _) => basis.cross_entropy(raw, target.bin, *gamma, grad),
            (Head::Gmm(b), Objective::Mle) => b.negative_log_likelihood(raw, target.value, grad),
            (Head::Gmm(b), _) => b.cross_entropy(raw, target.bin, grad),
            (Head::Regression, _) => {
                let d = raw[0] - target.value;
                if let Some(g) = grad {
                    g[0] = 2.0 * d;
                }
                d * d
            }
        }
    }

    /// Discretized categorical prediction; `None` for regression.
    pub fn pmf(&self, raw: &[f64]) -> Option<Vec<f64>> {
        match self {
            Head::Linear => Some(softmax(raw)),
            Head::Fourier { basis, .. } => {
                let mut out = vec![0.0; basis.num_bins()];
                basis.pmf_into(raw, &mut out);
                Some(out)
            }
            Head::Gmm(b) => Some(b.pmf(raw)),
            Head::Regression => None,
        }
    }

    /// Continuous density at `z`, for heads that define one.
    pub fn density(&self, raw: &[f64], z: f64) -> Option<f64> {
        match self {
            Head::Fourier { basis, .. } => Some(basis.density(raw).eval_periodic(z)),
            Head::Gmm(b) => Some(b.params(raw).pdf(z)),
            _ => None,
        }
    }

    pub fn gmm_params(&self, raw: &[f64]) -> Option<GmmParams> {
        match self {
            Head::Gmm(b) => Some(b.params(raw)),
            _ => None,
        }
    }
}

/// MLP `2 -> 64 -> 32 -> head` with ReLU between hidden layers. The last
/// entry of `layers` is the head's linear map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub head: HeadSpec,
    pub bins: BinLayout,
    pub layers: Vec<LinearMap>,
}

/// Scratch buffers for one forward/backward pass.
#[derive(Debug, Clone)]
pub struct Workspace {
    acts: Vec<Vec<f64>>,
    grads: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn new(head: HeadSpec, bins: BinLayout, hidden: &[usize], rng: &mut SeededRng) -> Result<Self> {
        if hidden.is_empty() || hidden.contains(&0) {
            return invalid("hidden layer widths must be positive");
        }
        let mut dims = vec![INPUT_DIM];
        dims.extend_from_slice(hidden);
        let mut layers: Vec<LinearMap> = dims.windows(2).map(|w| LinearMap::fan_in_uniform(w[0], w[1], rng)).collect();
        let last = *dims.last().unwrap();
        let head_layer = match head.kind {
            HeadKind::Fourier => {
                let cfg = HeadConfig {
                    input_dim: last,
                    output_dim: bins.len(),
                    num_frequencies: head.num_frequencies,
                    regularization_gamma: head.gamma,
                    init_shrink: head.init_shrink,
                };
                init_head_weights(&cfg, rng)
            }
            _ => LinearMap::fan_in_uniform(last, head.raw_dim(bins.len()), rng),
        };
        layers.push(head_layer);
        Ok(Self { head, bins, layers })
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(LinearMap::num_params).sum()
    }

    pub fn raw_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    pub fn runtime_head(&self) -> Head {
        Head::new(&self.head, &self.bins)
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            acts: self.layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
            grads: self.layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
        }
    }

    pub fn zeros_like(&self) -> Vec<LinearMap> {
        self.layers.iter().map(|l| LinearMap::zeros(l.in_dim, l.out_dim)).collect()
    }

    /// Runs the network and returns the raw head outputs.
    pub fn forward<'w>(&self, x: &[f64], ws: &'w mut Workspace) -> &'w [f64] {
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let (done, rest) = ws.acts.split_at_mut(i);
            let input = if i == 0 { x } else { &done[i - 1] };
            layer.apply_into(input, &mut rest[0]);
            if i < last {
                rest[0].iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        &ws.acts[last]
    }

    /// Loss at one example; accumulates parameter gradients into `grad`
    /// when given.
    pub fn loss_and_grad(
        &self,
        head: &Head,
        x: &[f64],
        target: Target,
        objective: Objective,
        ws: &mut Workspace,
        grad: Option<&mut [LinearMap]>,
    ) -> f64 {
        self.forward(x, ws);
        let last = self.layers.len() - 1;
        let Some(grad) = grad else {
            return head.loss(&ws.acts[last], target, objective, None);
        };
        let loss = head.loss(&ws.acts[last], target, objective, Some(&mut ws.grads[last]));
        for i in (0..=last).rev() {
            let (lower, upper) = ws.grads.split_at_mut(i);
            let grad_out = &upper[0];
            let input = if i == 0 { x } else { &ws.acts[i - 1] };
            let grad_input = if i == 0 { None } else { Some(&mut lower[i - 1][..]) };
            self.layers[i].backward_into(input, grad_out, &mut grad[i], grad_input);
            if i > 0 {
                for (g, a) in lower[i - 1].iter_mut().zip(&ws.acts[i - 1]) {
                    if *a <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
        }
        loss
    }

    pub fn raw_output(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != INPUT_DIM {
            return Err(Error::DimensionMismatch { expected: INPUT_DIM, got: x.len() });
        }
        let mut ws = self.workspace();
        Ok(self.forward(x, &mut ws).to_vec())
    }

    /// Predicted categorical over the model's bins.
    pub fn predict(&self, x: &[f64]) -> Result<CategoricalDistribution> {
        let raw = self.raw_output(x)?;
        match self.runtime_head().pmf(&raw) {
            Some(p) => CategoricalDistribution::new(p),
            None => invalid("a regression head has no categorical output"),
        }
    }

    pub fn param(&self, idx: usize) -> f64 {
        let mut idx = idx;
        for l in &self.layers {
            if idx < l.weights.len() {
                return l.weights[idx];
            }
            idx -= l.weights.len();
            if idx < l.bias.len() {
                return l.bias[idx];
            }
            idx -= l.bias.len();
        }
        panic!("parameter index out of range")
    }

    pub fn param_mut(&mut self, idx: usize) -> &mut f64 {
        let mut idx = idx;
        for l in &mut self.layers {
            if idx < l.weights.len() {
                return &mut l.weights[idx];
            }
            idx -= l.weights.len();
            if idx < l.bias.len() {
                return &mut l.bias[idx];
            }
            idx -= l.bias.len();
        }
        panic!("parameter index out of range")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: MlpModel = serde_json::from_str(text)?;
        let mut prev = INPUT_DIM;
        for l in &model.layers {
            if l.in_dim != prev || l.weights.len() != l.in_dim * l.out_dim || l.bias.len() != l.out_dim {
                return invalid("checkpoint layer shapes are inconsistent");
            }
            prev = l.out_dim;
        }
        if prev != model.head.raw_dim(model.bins.len()) {
            return Err(Error::DimensionMismatch { expected: model.head.raw_dim(model.bins.len()), got: prev });
        }
        Ok(model)
    }
}

/// Floors probabilities at [`LOG_FLOOR`] and renormalizes; returns whether
/// any entry was floored.
pub fn floor_and_renormalize(p: &mut [f64]) -> bool {
    let mut floored = false;
    for v in p.iter_mut() {
        if *v < LOG_FLOOR {
            *v = LOG_FLOOR;
            floored = true;
        }
    }
    if floored {
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
    }
    floored
}
