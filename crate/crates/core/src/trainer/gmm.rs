//! Two-component Gaussian mixture head: raw outputs
//! `(logit_1, logit_2, mean_1, mean_2, std_1, std_2)`.

use serde::{Deserialize, Serialize};

use crate::binning::BinLayout;
use crate::error::{Error, Result};
use crate::fourier::CategoricalDistribution;

pub const GMM_RAW_DIM: usize = 6;
pub const GMM_STD_FLOOR: f64 = 1e-3;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmParams {
    pub weights: [f64; 2],
    pub means: [f64; 2],
    pub stds: [f64; 2],
}

impl GmmParams {
    /// Maps raw outputs to mixture parameters. With `learn_weights` off the
    /// logits are ignored and both weights are 1/2.
    pub fn from_raw(raw: &[f64], learn_weights: bool) -> Result<Self> {
        if raw.len() != GMM_RAW_DIM {
            return Err(Error::DimensionMismatch { expected: GMM_RAW_DIM, got: raw.len() });
        }
        let weights = if learn_weights {
            let w0 = sigmoid(raw[0] - raw[1]);
            [w0, 1.0 - w0]
        } else {
            [0.5, 0.5]
        };
        Ok(Self {
            weights,
            means: [raw[2].tanh(), raw[3].tanh()],
            stds: [softplus(raw[4]) + GMM_STD_FLOOR, softplus(raw[5]) + GMM_STD_FLOOR],
        })
    }

    fn ln_weights(&self) -> [f64; 2] {
        [self.weights[0].ln(), self.weights[1].ln()]
    }

    fn ln_component(&self, ln_w: &[f64; 2], c: usize, z: f64) -> f64 {
        let u = (z - self.means[c]) / self.stds[c];
        ln_w[c] - 0.5 * u * u - self.stds[c].ln() - LN_SQRT_2PI
    }

    pub fn ln_pdf(&self, z: f64) -> f64 {
        let ln_w = self.ln_weights();
        log_sum_exp(self.ln_component(&ln_w, 0, z), self.ln_component(&ln_w, 1, z))
    }

    pub fn pdf(&self, z: f64) -> f64 {
        self.ln_pdf(z).exp()
    }

    /// Adds `scale * d ln p(z) / d raw` into `grad`.
    fn accumulate_ln_pdf_grad(&self, raw: &[f64], learn_weights: bool, z: f64, scale: f64, grad: &mut [f64]) {
        let ln_w = self.ln_weights();
        let l0 = self.ln_component(&ln_w, 0, z);
        let l1 = self.ln_component(&ln_w, 1, z);
        let total = log_sum_exp(l0, l1);
        let resp = [(l0 - total).exp(), (l1 - total).exp()];
        if learn_weights {
            // d ln w_0 / d(logit_0 - logit_1) = w_1, and ln w_1 gets -w_0
            let d = resp[0] * self.weights[1] - resp[1] * self.weights[0];
            grad[0] += scale * d;
            grad[1] -= scale * d;
        }
        for c in 0..2 {
            let (mu, s) = (self.means[c], self.stds[c]);
            let diff = z - mu;
            grad[2 + c] += scale * resp[c] * diff / (s * s) * (1.0 - mu * mu);
            grad[4 + c] += scale * resp[c] * (diff * diff / (s * s * s) - 1.0 / s) * sigmoid(raw[4 + c]);
        }
    }

    /// Log-weights of the discretization: `ln(pdf(b_j) * width_j)`.
    fn ln_bin_weights(&self, centers: &[f64], ln_widths: &[f64]) -> Vec<f64> {
        centers.iter().zip(ln_widths).map(|(&b, lw)| self.ln_pdf(b) + lw).collect()
    }
}

fn softmax_from_ln(ln_w: &[f64]) -> Vec<f64> {
    let hi = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = ln_w.iter().map(|l| (l - hi).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

/// Mixture pdf at the bin centers, times the bin widths, normalized.
pub fn gmm_head_forward(raw: &[f64], bins: &BinLayout, learn_weights: bool) -> Result<CategoricalDistribution> {
    let params = GmmParams::from_raw(raw, learn_weights)?;
    let ln_widths: Vec<f64> = bins.widths().iter().map(|w| w.ln()).collect();
    CategoricalDistribution::new(softmax_from_ln(&params.ln_bin_weights(bins.centers(), &ln_widths)))
}

/// Precomputed bin geometry for the GMM losses.
#[derive(Debug, Clone)]
pub struct GmmBasis {
    centers: Vec<f64>,
    ln_widths: Vec<f64>,
    learn_weights: bool,
}

impl GmmBasis {
    pub fn new(bins: &BinLayout, learn_weights: bool) -> Self {
        Self {
            centers: bins.centers().to_vec(),
            ln_widths: bins.widths().iter().map(|w| w.ln()).collect(),
            learn_weights,
        }
    }

    pub fn params(&self, raw: &[f64]) -> GmmParams {
        GmmParams::from_raw(raw, self.learn_weights).expect("raw dimension checked by the model")
    }

    pub fn pmf(&self, raw: &[f64]) -> Vec<f64> {
        softmax_from_ln(&self.params(raw).ln_bin_weights(&self.centers, &self.ln_widths))
    }

    /// Cross-entropy of the discretized mixture against bin `target`.
    pub fn cross_entropy(&self, raw: &[f64], target: usize, grad_raw: Option<&mut [f64]>) -> f64 {
        let params = self.params(raw);
        let ln_w = params.ln_bin_weights(&self.centers, &self.ln_widths);
        let hi = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ln_total = hi + ln_w.iter().map(|l| (l - hi).exp()).sum::<f64>().ln();
        let loss = ln_total - ln_w[target];
        if let Some(grad) = grad_raw {
            grad.iter_mut().for_each(|g| *g = 0.0);
            params.accumulate_ln_pdf_grad(raw, self.learn_weights, self.centers[target], -1.0, grad);
            for (j, l) in ln_w.iter().enumerate() {
                let p = (l - ln_total).exp();
                if p > 0.0 {
                    params.accumulate_ln_pdf_grad(raw, self.learn_weights, self.centers[j], p, grad);
                }
            }
        }
        loss
    }

    /// `-ln p(z)` of the continuous mixture.
    pub fn negative_log_likelihood(&self, raw: &[f64], z: f64, grad_raw: Option<&mut [f64]>) -> f64 {
        let params = self.params(raw);
        let loss = -params.ln_pdf(z);
        if let Some(grad) = grad_raw {
            grad.iter_mut().for_each(|g| *g = 0.0);
            params.accumulate_ln_pdf_grad(raw, self.learn_weights, z, -1.0, grad);
        }
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::binning::uniform_bins;

    fn normal_pdf(z: f64, mu: f64, s: f64) -> f64 {
        (-0.5 * ((z - mu) / s).powi(2)).exp() / (s * (2.0 * PI).sqrt())
    }

    fn inv_softplus(s: f64) -> f64 {
        (s.exp() - 1.0).ln()
    }

    fn raw_for(means: [f64; 2], stds: [f64; 2], logits: [f64; 2]) -> Vec<f64> {
        vec![
            logits[0],
            logits[1],
            means[0].atanh(),
            means[1].atanh(),
            inv_softplus(stds[0] - GMM_STD_FLOOR),
            inv_softplus(stds[1] - GMM_STD_FLOOR),
        ]
    }

    #[test]
    fn parameter_maps() {
        let p = GmmParams::from_raw(&[0.0, 0.0, 100.0, -100.0, -1e3, 0.0], true).unwrap();
        assert_eq!(p.weights, [0.5, 0.5]);
        assert_eq!(p.means, [1.0, -1.0]);
        assert!(p.stds[0] >= GMM_STD_FLOOR);
        assert!((p.stds[1] - (2f64.ln() + GMM_STD_FLOOR)).abs() < 1e-15);
        let fixed = GmmParams::from_raw(&[5.0, -5.0, 0.0, 0.0, 0.0, 0.0], false).unwrap();
        assert_eq!(fixed.weights, [0.5, 0.5]);
    }

    #[test]
    fn pdf_matches_direct_formula() {
        let raw = raw_for([-0.3, 0.4], [0.1, 0.2], [0.3, -0.2]);
        let p = GmmParams::from_raw(&raw, true).unwrap();
        for z in [-0.9, -0.3, 0.0, 0.41, 0.8] {
            let direct = p.weights[0] * normal_pdf(z, p.means[0], p.stds[0]) + p.weights[1] * normal_pdf(z, p.means[1], p.stds[1]);
            assert!((p.pdf(z) - direct).abs() < 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn symmetric_components_give_symmetric_pmf() {
        let bins = uniform_bins(50, -1.0, 1.0).unwrap();
        let y = gmm_head_forward(&raw_for([-0.5, 0.5], [0.1, 0.1], [0.0, 0.0]), &bins, true).unwrap();
        let p = y.probs();
        for k in 0..25 {
            assert!((p[k] - p[49 - k]).abs() < 1e-12);
        }
        let maxima = (1..49).filter(|&i| p[i] > p[i - 1] && p[i] > p[i + 1]).count();
        assert_eq!(maxima, 2);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dominant_weight_gives_single_gaussian() {
        let bins = uniform_bins(50, -1.0, 1.0).unwrap();
        let y = gmm_head_forward(&raw_for([0.2, -0.6], [0.1, 0.1], [60.0, -60.0]), &bins, true).unwrap();
        let w: Vec<f64> = bins.centers().iter().map(|&b| normal_pdf(b, 0.2, 0.1)).collect();
        let t: f64 = w.iter().sum();
        for (a, b) in y.probs().iter().zip(&w) {
            assert!((a - b / t).abs() < 1e-12);
        }
    }

    #[test]
    fn narrow_component_stays_finite() {
        let bins = uniform_bins(50, -1.0, 1.0).unwrap();
        let basis = GmmBasis::new(&bins, true);
        let raw = [0.0, 0.0, 0.3, 0.3, -50.0, -50.0];
        let mut g = [0.0; 6];
        let loss = basis.cross_entropy(&raw, 10, Some(&mut g));
        assert!(loss.is_finite() && g.iter().all(|v| v.is_finite()));
    }
}
