//! The Fourier head: a linear map to autocorrelation parameters, a
//! nonnegative truncated Fourier-series density on [-1, 1], and its
//! discretization at bin centers into a categorical distribution.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::binning::BinLayout;
use crate::error::{invalid, Error, Result};
use crate::linear::LinearMap;
use crate::rng::SeededRng;

/// Default floor applied to densities and probabilities before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub num_frequencies: usize,
    pub regularization_gamma: f64,
    pub init_shrink: f64,
}

impl HeadConfig {
    pub fn new(input_dim: usize, output_dim: usize, num_frequencies: usize) -> Result<Self> {
        let cfg = Self {
            input_dim,
            output_dim,
            num_frequencies,
            regularization_gamma: 0.0,
            init_shrink: 1000.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.regularization_gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_init_shrink(mut self, shrink: f64) -> Result<Self> {
        self.init_shrink = shrink;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return invalid("head dimensions must be at least 1");
        }
        // N < m/2
        if 2 * self.num_frequencies >= self.output_dim {
            return invalid(format!(
                "{} frequencies violate the Nyquist bound for {} bins (need N < m/2)",
                self.num_frequencies, self.output_dim
            ));
        }
        if !(self.regularization_gamma >= 0.0) {
            return invalid("regularization gamma must be nonnegative");
        }
        if !(self.init_shrink > 0.0) {
            return invalid("init_shrink must be positive");
        }
        Ok(())
    }

    /// Width of the linear layer output, `2(N+1)`.
    pub fn raw_dim(&self) -> usize {
        2 * (self.num_frequencies + 1)
    }
}

/// Complex autocorrelation parameters `a_k = alpha_k + i beta_k`, `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrInput(Vec<Complex64>);

impl AutocorrInput {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("autocorrelation input needs at least a_0");
        }
        Ok(Self(coeffs))
    }

    /// Reads `(alpha_0, beta_0, ..., alpha_N, beta_N)`.
    pub fn from_interleaved(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() || raw.len() % 2 != 0 {
            return invalid(format!("interleaved input must have even nonzero length, got {}", raw.len()));
        }
        Ok(Self(raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn num_frequencies(&self) -> usize {
        self.0.len() - 1
    }
}

/// Fourier coefficients `c_0..c_N` of a density on [-1, 1]. Evaluation
/// always divides by `Re(c_0)`, so normalized and unnormalized
/// coefficients describe the same density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityWire", into = "DensityWire")]
pub struct FourierDensity {
    coeffs: Vec<Complex64>,
    normalized: bool,
}

#[derive(Serialize, Deserialize)]
struct DensityWire {
    #[serde(rename = "N")]
    n: usize,
    coeffs: Vec<[f64; 2]>,
    normalized: bool,
}

impl From<FourierDensity> for DensityWire {
    fn from(d: FourierDensity) -> Self {
        Self {
            n: d.num_frequencies(),
            coeffs: d.coeffs.iter().map(|c| [c.re, c.im]).collect(),
            normalized: d.normalized,
        }
    }
}

impl TryFrom<DensityWire> for FourierDensity {
    type Error = Error;

    fn try_from(w: DensityWire) -> Result<Self> {
        if w.coeffs.len() != w.n + 1 {
            return Err(Error::DimensionMismatch { expected: w.n + 1, got: w.coeffs.len() });
        }
        FourierDensity::from_coeffs(w.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect(), w.normalized)
    }
}

impl FourierDensity {
    pub fn from_coeffs(coeffs: Vec<Complex64>, normalized: bool) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("density needs at least c_0");
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return invalid("density coefficients must be finite");
        }
        Ok(Self { coeffs, normalized })
    }

    /// The constant density `p = 1/2`.
    pub fn uniform(num_frequencies: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); num_frequencies + 1];
        coeffs[0] = Complex64::new(1.0, 0.0);
        Self { coeffs, normalized: true }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn num_frequencies(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `c_0 = 0` only arises from an all-zero autocorrelation input; it is
    /// treated as the uniform density.
    pub fn is_degenerate(&self) -> bool {
        !(self.coeffs[0].re > 0.0)
    }

    /// Divides every coefficient by `Re(c_0)`.
    pub fn normalize(&self) -> Self {
        if self.is_degenerate() {
            return Self::uniform(self.num_frequencies());
        }
        let scale = 1.0 / self.coeffs[0].re;
        let mut coeffs: Vec<Complex64> = self.coeffs.iter().map(|c| c * scale).collect();
        coeffs[0] = Complex64::new(1.0, 0.0);
        Self { coeffs, normalized: true }
    }

    /// `c_k / Re(c_0)` for `k = 1..=N`.
    fn scaled_tail(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let scale = if self.is_degenerate() { 0.0 } else { 1.0 / self.coeffs[0].re };
        self.coeffs.iter().enumerate().skip(1).map(move |(k, c)| (k, c * scale))
    }

    /// `p(z)` for `z` in [-1, 1].
    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&z) {
            return Err(Error::OutOfDomain { value: z });
        }
        Ok(self.eval_periodic(z))
    }

    /// `p(z)` extended 2-periodically to the real line.
    pub fn eval_periodic(&self, z: f64) -> f64 {
        0.5 + self
            .scaled_tail()
            .map(|(k, c)| {
                let (s, co) = (k as f64 * PI * z).sin_cos();
                c.re * co - c.im * s
            })
            .sum::<f64>()
    }

    /// Evaluates `p` at each center and normalizes. Also returns the
    /// pre-normalization sum, which equals `m/2` for uniform bins on
    /// [-1, 1] whenever `N < m/2`.
    pub fn discretize(&self, centers: &[f64]) -> Result<(CategoricalDistribution, f64)> {
        let values = centers.iter().map(|&b| self.eval(b)).collect::<Result<Vec<_>>>()?;
        let total: f64 = values.iter().sum();
        Ok((CategoricalDistribution::from_weights(&values)?, total))
    }
}

/// Autocorrelation `c_k = sum_l a_l conj(a_{l+k})`; the result is not yet
/// divided by `Re(c_0)`.
pub fn autocorrelate(a: &AutocorrInput) -> FourierDensity {
    let a = a.coeffs();
    let n = a.len() - 1;
    let mut coeffs: Vec<Complex64> = (0..=n)
        .map(|k| (0..=n - k).map(|l| a[l] * a[l + k].conj()).sum())
        .collect();
    // c_0 = sum |a_l|^2 is real by construction.
    coeffs[0] = Complex64::new(a.iter().map(|v| v.norm_sqr()).sum(), 0.0);
    FourierDensity { coeffs, normalized: false }
}

/// Convenience wrapper around [`FourierDensity::eval`].
pub fn eval_density(d: &FourierDensity, z: f64) -> Result<f64> {
    d.eval(z)
}

/// A length-m probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalDistribution {
    probs: Vec<f64>,
}

impl CategoricalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return invalid("categorical distribution needs at least one entry");
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return invalid("probabilities must be finite and nonnegative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights; small negative rounding noise is
    /// clipped to zero.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let clipped: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Degenerate(format!("weights sum to {total}")));
        }
        Ok(Self { probs: clipped.iter().map(|w| w / total).collect() })
    }

    pub fn uniform(m: usize) -> Self {
        Self { probs: vec![1.0 / m as f64; m] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn expected_value(&self, centers: &[f64]) -> f64 {
        self.probs.iter().zip(centers).map(|(p, c)| p * c).sum()
    }
}

/// Full forward pass: `x -> A x -> a -> c -> p -> y`.
pub fn head_forward(weights: &LinearMap, x: &[f64], bins: &BinLayout) -> Result<CategoricalDistribution> {
    let raw = weights.apply(x)?;
    let a = AutocorrInput::from_interleaved(&raw)?;
    let (y, _) = autocorrelate(&a).discretize(bins.centers())?;
    Ok(y)
}

/// `gamma * (2 pi^2 / m) * sum_{k=1}^N k^2 |c_k|^2` over the normalized
/// coefficients.
pub fn regularization_term(d: &FourierDensity, m: usize, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 0.0;
    }
    let sum: f64 = d.scaled_tail().map(|(k, c)| (k * k) as f64 * c.norm_sqr()).sum();
    gamma * 2.0 * PI * PI / m as f64 * sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    pub value: f64,
    /// The density fell below the floor and `ln(floor)` was returned.
    pub floored: bool,
}

pub fn log_likelihood(d: &FourierDensity, z: f64) -> Result<LogLikelihood> {
    log_likelihood_with_floor(d, z, LOG_FLOOR)
}

pub fn log_likelihood_with_floor(d: &FourierDensity, z: f64, floor: f64) -> Result<LogLikelihood> {
    let p = d.eval(z)?;
    Ok(if p < floor {
        LogLikelihood { value: floor.ln(), floored: true }
    } else {
        LogLikelihood { value: p.ln(), floored: false }
    })
}

/// Fan-in uniform initialization divided by `init_shrink`, with the bias
/// of `alpha_0` anchored at 1.
///
/// `c_k / Re(c_0)` is invariant to a common rescaling of all `a_k`, so
/// shrinking alone leaves the initial density unchanged. Anchoring `a_0`
/// near 1 while the rest shrink toward 0 makes the initial density close
/// to uniform, and exactly uniform in the infinite-shrink limit.
pub fn init_head_weights(config: &HeadConfig, rng: &mut SeededRng) -> LinearMap {
    let mut map = LinearMap::fan_in_uniform(config.input_dim, config.raw_dim(), rng);
    let inv = if config.init_shrink.is_infinite() { 0.0 } else { 1.0 / config.init_shrink };
    map.params_mut().for_each(|w| *w *= inv);
    map.bias[0] += 1.0;
    map
}

/// Precomputed cosine/sine tables of a Fourier head at fixed bin centers,
/// with losses and their gradients with respect to the raw `2(N+1)`
/// linear-layer outputs.
#[derive(Debug, Clone)]
pub struct FourierBasis {
    num_frequencies: usize,
    centers: Vec<f64>,
    // row k-1 holds cos(k pi b_j) / sin(k pi b_j)
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// Normalized coefficients `u_k = c_k / c_0` plus what backprop needs.
struct Coefficients {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    c0: f64,
    u_re: Vec<f64>,
    u_im: Vec<f64>,
}

impl FourierBasis {
    pub fn new(num_frequencies: usize, centers: &[f64]) -> Self {
        let m = centers.len();
        let mut cos = Vec::with_capacity(num_frequencies * m);
        let mut sin = Vec::with_capacity(num_frequencies * m);
        for k in 1..=num_frequencies {
            for &b in centers {
                let (s, c) = (k as f64 * PI * b).sin_cos();
                cos.push(c);
                sin.push(s);
            }
        }
        Self { num_frequencies, centers: centers.to_vec(), cos, sin }
    }

    pub fn num_frequencies(&self) -> usize {
        self.num_frequencies
    }

    pub fn num_bins(&self) -> usize {
        self.centers.len()
    }

    pub fn raw_dim(&self) -> usize {
        2 * (self.num_frequencies + 1)
    }

    fn coefficients(&self, raw: &[f64]) -> Coefficients {
        let n = self.num_frequencies;
        let alpha: Vec<f64> = raw.iter().step_by(2).copied().collect();
        let beta: Vec<f64> = raw.iter().skip(1).step_by(2).copied().collect();
        let c0: f64 = alpha.iter().map(|v| v * v).sum::<f64>() + beta.iter().map(|v| v * v).sum::<f64>();
        let mut u_re = vec![0.0; n + 1];
        let mut u_im = vec![0.0; n + 1];
        if c0 > 0.0 {
            for k in 1..=n {
                let (mut re, mut im) = (0.0, 0.0);
                for l in 0..=n - k {
                    re += alpha[l] * alpha[l + k] + beta[l] * beta[l + k];
                    im += beta[l] * alpha[l + k] - alpha[l] * beta[l + k];
                }
                u_re[k] = re / c0;
                u_im[k] = im / c0;
            }
        }
        Coefficients { alpha, beta, c0, u_re, u_im }
    }

    fn density_at_centers(&self, co: &Coefficients, out: &mut [f64]) {
        let m = self.centers.len();
        out.iter_mut().for_each(|p| *p = 0.5);
        for k in 1..=self.num_frequencies {
            let (ur, ui) = (co.u_re[k], co.u_im[k]);
            let row = (k - 1) * m;
            for (j, p) in out.iter_mut().enumerate() {
                *p += ur * self.cos[row + j] - ui * self.sin[row + j];
            }
        }
    }

    fn density_at(&self, co: &Coefficients, z: f64) -> f64 {
        let mut p = 0.5;
        for k in 1..=self.num_frequencies {
            let (s, c) = (k as f64 * PI * z).sin_cos();
            p += co.u_re[k] * c - co.u_im[k] * s;
        }
        p
    }

    /// Density implied by raw outputs, as a [`FourierDensity`].
    pub fn density(&self, raw: &[f64]) -> FourierDensity {
        let co = self.coefficients(raw);
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        coeffs.extend((1..=self.num_frequencies).map(|k| Complex64::new(co.u_re[k], co.u_im[k])));
        FourierDensity { coeffs, normalized: true }
    }

    /// Writes the categorical output into `out` and returns the
    /// pre-normalization sum of the density values.
    pub fn pmf_into(&self, raw: &[f64], out: &mut [f64]) -> f64 {
        let co = self.coefficients(raw);
        self.density_at_centers(&co, out);
        out.iter_mut().for_each(|p| *p = p.max(0.0));
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|p| *p /= total);
        total
    }

    fn regularization(&self, co: &Coefficients, gamma: f64) -> f64 {
        if gamma == 0.0 {
            return 0.0;
        }
        let scale = gamma * 2.0 * PI * PI / self.centers.len() as f64;
        scale
            * (1..=self.num_frequencies)
                .map(|k| (k * k) as f64 * (co.u_re[k].powi(2) + co.u_im[k].powi(2)))
                .sum::<f64>()
    }

    /// Accumulates the gradient of the regularizer into `g_re`, `g_im`.
    fn regularization_grad(&self, co: &Coefficients, gamma: f64, g_re: &mut [f64], g_im: &mut [f64]) {
        if gamma == 0.0 {
            return;
        }
        let scale = gamma * 2.0 * PI * PI / self.centers.len() as f64;
        for k in 1..=self.num_frequencies {
            let w = 2.0 * scale * (k * k) as f64;
            g_re[k] += w * co.u_re[k];
            g_im[k] += w * co.u_im[k];
        }
    }

    /// Chain rule from `dL/du_k` back through `u_k = c_k / c_0` and the
    /// autocorrelation to the interleaved raw outputs.
    fn backprop(&self, co: &Coefficients, g_re: &[f64], g_im: &[f64], grad_raw: &mut [f64]) {
        let n = self.num_frequencies;
        grad_raw.iter_mut().for_each(|g| *g = 0.0);
        if !(co.c0 > 0.0) {
            return;
        }
        let inv = 1.0 / co.c0;
        let mut gc_re = vec![0.0; n + 1];
        let mut gc_im = vec![0.0; n + 1];
        let mut gc0 = 0.0;
        for k in 1..=n {
            gc_re[k] = g_re[k] * inv;
            gc_im[k] = g_im[k] * inv;
            gc0 -= (g_re[k] * co.u_re[k] + g_im[k] * co.u_im[k]) * inv;
        }
        gc_re[0] = gc0;
        let (alpha, beta) = (&co.alpha, &co.beta);
        for l in 0..=n {
            let (mut ga, mut gb) = (0.0, 0.0);
            for k in 0..=n {
                let (fa, fb) = if l + k <= n { (alpha[l + k], beta[l + k]) } else { (0.0, 0.0) };
                let (ba, bb) = if k <= l { (alpha[l - k], beta[l - k]) } else { (0.0, 0.0) };
                ga += gc_re[k] * (fa + ba) + gc_im[k] * (bb - fb);
                gb += gc_re[k] * (fb + bb) + gc_im[k] * (fa - ba);
            }
            grad_raw[2 * l] = ga;
            grad_raw[2 * l + 1] = gb;
        }
    }

    /// Cross-entropy of the discretized output against bin `target`, plus
    /// the regularizer. Writes `dL/draw` into `grad_raw` when given.
    pub fn cross_entropy(&self, raw: &[f64], target: usize, gamma: f64, grad_raw: Option<&mut [f64]>) -> f64 {
        let co = self.coefficients(raw);
        let m = self.centers.len();
        let mut p = vec![0.0; m];
        self.density_at_centers(&co, &mut p);
        let total: f64 = p.iter().sum();
        let pt = p[target];
        let y = pt / total;
        let floored = !(y >= LOG_FLOOR);
        let loss = -(if floored { LOG_FLOOR } else { y }).ln() + self.regularization(&co, gamma);
        if let Some(grad_raw) = grad_raw {
            let n = self.num_frequencies;
            let mut g_re = vec![0.0; n + 1];
            let mut g_im = vec![0.0; n + 1];
            if !floored {
                // dL/dp_j = 1/S - [j = t]/p_t
                let inv_total = 1.0 / total;
                for k in 1..=n {
                    let row = (k - 1) * m;
                    let cs: f64 = self.cos[row..row + m].iter().sum();
                    let ss: f64 = self.sin[row..row + m].iter().sum();
                    g_re[k] = inv_total * cs - self.cos[row + target] / pt;
                    g_im[k] = -(inv_total * ss - self.sin[row + target] / pt);
                }
            }
            self.regularization_grad(&co, gamma, &mut g_re, &mut g_im);
            self.backprop(&co, &g_re, &g_im, grad_raw);
        }
        loss
    }

    /// Negative log-likelihood `-ln p(z)` of a continuous target, plus the
    /// regularizer. Returns `(loss, floored)`.
    pub fn negative_log_likelihood(
        &self,
        raw: &[f64],
        z: f64,
        gamma: f64,
        grad_raw: Option<&mut [f64]>,
    ) -> (f64, bool) {
        let co = self.coefficients(raw);
        let p = self.density_at(&co, z);
        let floored = !(p >= LOG_FLOOR);
        let loss = -(if floored { LOG_FLOOR } else { p }).ln() + self.regularization(&co, gamma);
        if let Some(grad_raw) = grad_raw {
            let n = self.num_frequencies;
            let mut g_re = vec![0.0; n + 1];
            let mut g_im = vec![0.0; n + 1];
            if !floored {
                for k in 1..=n {
                    let (s, c) = (k as f64 * PI * z).sin_cos();
                    g_re[k] = -c / p;
                    g_im[k] = s / p;
                }
            }
            self.regularization_grad(&co, gamma, &mut g_re, &mut g_im);
            self.backprop(&co, &g_re, &g_im, grad_raw);
        }
        (loss, floored)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::uniform_bins;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn autocorrelate_examples() {
        let d = autocorrelate(&AutocorrInput::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap());
        assert_eq!(d.coeffs(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let d = autocorrelate(&AutocorrInput::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap());
        assert_eq!(d.coeffs(), &[c(2.0, 0.0), c(1.0, 0.0)]);

        let d = autocorrelate(&AutocorrInput::new(vec![c(0.0, 1.0), c(1.0, 0.0)]).unwrap());
        assert_eq!(d.coeffs(), &[c(2.0, 0.0), c(0.0, 1.0)]);
        assert!(!d.is_normalized());
    }

    #[test]
    fn eval_examples() {
        let uniform = FourierDensity::uniform(0);
        for z in [-1.0, -0.3, 0.0, 0.9] {
            assert_eq!(uniform.eval(z).unwrap(), 0.5);
        }
        let d = autocorrelate(&AutocorrInput::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap()).normalize();
        assert!((d.eval(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(d.eval(1.0).unwrap().abs() < 1e-15);
        assert!(d.eval(-1.0).unwrap().abs() < 1e-15);
        assert!((d.eval(0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_outside_domain_unless_periodic() {
        let d = autocorrelate(&AutocorrInput::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap());
        assert!(matches!(d.eval(1.5), Err(Error::OutOfDomain { .. })));
        assert!((d.eval_periodic(2.0) - d.eval(0.0).unwrap()).abs() < 1e-12);
        assert!((d.eval_periodic(1.3) - d.eval(-0.7).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_input_is_uniform() {
        let d = autocorrelate(&AutocorrInput::new(vec![c(0.0, 0.0); 4]).unwrap());
        assert!(d.is_degenerate());
        assert_eq!(d.eval(0.3).unwrap(), 0.5);
        assert_eq!(d.normalize(), FourierDensity::uniform(3));

        let bins = uniform_bins(10, -1.0, 1.0).unwrap();
        let y = head_forward(&LinearMap::zeros(3, 8), &[1.0, 2.0, 3.0], &bins).unwrap();
        for p in y.probs() {
            assert!((p - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn head_forward_fixed_autocorrelation() {
        // bias drives a = (1, 1) regardless of x
        let map = LinearMap::from_parts(1, 4, vec![0.0; 4], vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let bins = uniform_bins(4, -1.0, 1.0).unwrap();
        let y = head_forward(&map, &[0.3], &bins).unwrap();
        let expected = [0.0732233047, 0.4267766953, 0.4267766953, 0.0732233047];
        for (p, e) in y.probs().iter().zip(expected) {
            assert!((p - e).abs() < 1e-9, "{p} vs {e}");
        }
    }

    #[test]
    fn head_forward_n0_is_uniform() {
        let mut rng = SeededRng::new(0);
        let map = LinearMap::fan_in_uniform(5, 2, &mut rng);
        let bins = uniform_bins(7, -1.0, 1.0).unwrap();
        let y = head_forward(&map, &[0.1, -0.4, 2.0, 0.0, 1.0], &bins).unwrap();
        for p in y.probs() {
            assert!((p - 1.0 / 7.0).abs() < 1e-15);
        }
    }

    #[test]
    fn head_forward_dimension_mismatch() {
        let bins = uniform_bins(4, -1.0, 1.0).unwrap();
        let r = head_forward(&LinearMap::zeros(3, 4), &[1.0], &bins);
        assert!(matches!(r, Err(Error::DimensionMismatch { expected: 3, got: 1 })));
    }

    #[test]
    fn regularization_examples() {
        let d = FourierDensity::from_coeffs(vec![c(1.0, 0.0), c(0.5, 0.0)], true).unwrap();
        assert_eq!(regularization_term(&d, 2, 0.0), 0.0);
        assert!((regularization_term(&d, 2, 1.0) - PI * PI / 4.0).abs() < 1e-12);
        assert_eq!(regularization_term(&FourierDensity::uniform(5), 50, 1e-6), 0.0);
    }

    #[test]
    fn log_likelihood_examples() {
        let u = FourierDensity::uniform(3);
        let ll = log_likelihood(&u, 0.2).unwrap();
        assert!((ll.value - 0.5f64.ln()).abs() < 1e-15 && !ll.floored);

        let d = autocorrelate(&AutocorrInput::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap());
        assert!(log_likelihood(&d, 0.0).unwrap().value.abs() < 1e-15);
        let edge = log_likelihood(&d, 1.0).unwrap();
        assert!(edge.floored);
        assert_eq!(edge.value, LOG_FLOOR.ln());
    }

    #[test]
    fn head_config_validation() {
        assert!(HeadConfig::new(32, 50, 24).is_ok());
        assert!(HeadConfig::new(32, 50, 25).is_err());
        assert!(HeadConfig::new(0, 50, 2).is_err());
        assert!(HeadConfig::new(3, 50, 2).unwrap().with_gamma(-1.0).is_err());
        assert_eq!(HeadConfig::new(3, 50, 12).unwrap().raw_dim(), 26);
    }

    fn max_deviation_from_uniform(map: &LinearMap, n_freq: usize, rng: &mut SeededRng) -> f64 {
        let x: Vec<f64> = (0..map.in_dim).map(|_| rng.normal()).collect();
        let raw = map.apply(&x).unwrap();
        let d = FourierBasis::new(n_freq, &[]).density(&raw);
        (0..=1000)
            .map(|i| (d.eval(-1.0 + 2.0 * i as f64 / 1000.0).unwrap() - 0.5).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn init_default_is_near_uniform() {
        let cfg = HeadConfig::new(32, 50, 12).unwrap();
        let map = init_head_weights(&cfg, &mut SeededRng::new(0));
        let dev = max_deviation_from_uniform(&map, 12, &mut SeededRng::new(100));
        assert!(dev < 0.01, "max |p - 1/2| = {dev}");

        let mut ok = 0;
        for seed in 0..200 {
            let map = init_head_weights(&cfg, &mut SeededRng::new(seed));
            if max_deviation_from_uniform(&map, 12, &mut SeededRng::new(1000 + seed)) < 0.01 {
                ok += 1;
            }
        }
        assert!(ok >= 198, "{ok}/200 seeds near uniform");
    }

    #[test]
    fn init_infinite_shrink_is_exactly_uniform() {
        let cfg = HeadConfig::new(8, 50, 12).unwrap().with_init_shrink(f64::INFINITY).unwrap();
        let map = init_head_weights(&cfg, &mut SeededRng::new(3));
        assert_eq!(max_deviation_from_uniform(&map, 12, &mut SeededRng::new(4)), 0.0);
    }

    #[test]
    fn init_without_shrink_is_not_uniform() {
        let cfg = HeadConfig::new(32, 50, 12).unwrap().with_init_shrink(1.0).unwrap();
        let map = init_head_weights(&cfg, &mut SeededRng::new(0));
        assert!(max_deviation_from_uniform(&map, 12, &mut SeededRng::new(100)) > 0.01);
    }

    #[test]
    fn basis_matches_direct_forward() {
        let mut rng = SeededRng::new(9);
        let bins = uniform_bins(50, -1.0, 1.0).unwrap();
        let basis = FourierBasis::new(6, bins.centers());
        let raw: Vec<f64> = (0..14).map(|_| rng.normal()).collect();
        let mut out = vec![0.0; 50];
        let total = basis.pmf_into(&raw, &mut out);
        let (direct, direct_total) =
            autocorrelate(&AutocorrInput::from_interleaved(&raw).unwrap()).discretize(bins.centers()).unwrap();
        assert!((total - direct_total).abs() < 1e-10);
        for (a, b) in out.iter().zip(direct.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn density_json_schema() {
        let d = FourierDensity::from_coeffs(vec![c(1.0, 0.0), c(0.25, -0.5)], true).unwrap();
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        assert_eq!(v["N"], 1);
        assert_eq!(v["coeffs"][1][1], -0.5);
        assert_eq!(v["normalized"], true);
        let bad = r#"{"N": 2, "coeffs": [[1,0],[0,0]], "normalized": true}"#;
        assert!(serde_json::from_str::<FourierDensity>(bad).is_err());
    }
}
