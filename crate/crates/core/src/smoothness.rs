//! Gaussian-smoothing smoothness score for discrete distributions, plus
//! the signals used to sanity-check it (truncated square waves, colored
//! noise) and spectral entropy as a comparison metric.
//!
//! The score of a histogram `y` of length `m` is
//! `s(y) = sum_{sigma >= 1} 6/(pi^2 sigma^2) * D(y, g_sigma * y)`, where
//! `g_sigma` is the discrete Gaussian kernel of radius `m - 1` normalized
//! to unit mass and `*` is circular convolution. The sum is truncated at
//! `sigma_max`; the tail is bounded by `Dmax * 6/(pi^2 sigma_max)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Discrepancy {
    L2,
    L1,
}

impl Discrepancy {
    /// Largest possible discrepancy between a distribution and a smoothed copy.
    fn max_value(self) -> f64 {
        match self {
            Discrepancy::L2 => std::f64::consts::SQRT_2,
            Discrepancy::L1 => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessConfig {
    pub sigma_max: usize,
    pub discrepancy: Discrepancy,
}

impl Default for SmoothnessConfig {
    fn default() -> Self {
        Self { sigma_max: 1000, discrepancy: Discrepancy::L2 }
    }
}

impl SmoothnessConfig {
    pub fn l1() -> Self {
        Self { discrepancy: Discrepancy::L1, ..Self::default() }
    }

    pub fn truncation_bound(&self) -> f64 {
        self.discrepancy.max_value() * 6.0 / (PI * PI * self.sigma_max as f64)
    }
}

/// Weight `6 / (pi^2 sigma^2)`; these sum to 1 over `sigma = 1, 2, ...`.
pub fn sigma_weight(sigma: usize) -> f64 {
    6.0 / (PI * PI * (sigma * sigma) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGaussianKernel {
    sigma: f64,
    radius: usize,
    weights: Vec<f64>,
}

impl DiscreteGaussianKernel {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Weights for offsets `-radius..=radius`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at signed offset `k`.
    pub fn at(&self, k: isize) -> f64 {
        self.weights[(k + self.radius as isize) as usize]
    }
}

fn gaussian_pdf(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// Discrete Gaussian of standard deviation `sigma` on offsets
/// `1-m..=m-1`, normalized by `S(m, sigma) = sum_k G_sigma(k)`.
pub fn gaussian_kernel(m: usize, sigma: f64) -> Result<DiscreteGaussianKernel> {
    if m < 2 {
        return invalid(format!("kernel needs m >= 2, got {m}"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma must be positive and finite, got {sigma}"));
    }
    let radius = m - 1;
    let raw: Vec<f64> = (0..2 * m - 1)
        .map(|i| gaussian_pdf(i as f64 - radius as f64, sigma))
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(DiscreteGaussianKernel { sigma, radius, weights: raw.iter().map(|g| g / total).collect() })
}

/// A nonnegative histogram with unit mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalHistogram(Vec<f64>);

impl SignalHistogram {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("histogram is empty");
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return invalid("histogram entries must be finite and nonnegative");
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("histogram sums to {total}, not 1"));
        }
        Ok(Self(values))
    }

    /// Clips negatives to zero and normalizes the sum to one.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Degenerate(format!("histogram weights sum to {total}")));
        }
        Ok(Self(weights.iter().map(|w| w.max(0.0) / total).collect()))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `(g * y)_j = sum_{k=1-m}^{m-1} g_k y_{(j-k) mod m}`.
pub fn circular_convolve(y: &SignalHistogram, g: &DiscreteGaussianKernel) -> Result<SignalHistogram> {
    let m = y.len();
    if g.radius() + 1 != m {
        return Err(Error::DimensionMismatch { expected: m, got: g.radius() + 1 });
    }
    let r = g.radius() as isize;
    let mi = m as isize;
    let out = (0..mi)
        .map(|j| {
            (-r..=r)
                .map(|k| g.at(k) * y.values()[(j - k).rem_euclid(mi) as usize])
                .sum::<f64>()
        })
        .collect();
    Ok(SignalHistogram(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub value: f64,
    pub sigma_max: usize,
    pub truncation_bound: f64,
    pub discrepancy: Discrepancy,
}

/// Smoothness scorer for a fixed histogram length.
///
/// Circular convolution is diagonal in the DFT basis, so the eigenvalues
/// of every `g_sigma` are computed once; an L2 score then costs one
/// forward transform plus `sigma_max * m` multiply-adds.
#[derive(Clone)]
pub struct SmoothnessEvaluator {
    m: usize,
    cfg: SmoothnessConfig,
    // row sigma-1: eigenvalues lambda_f of g_sigma, f = 0..m
    eigenvalues: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SmoothnessEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothnessEvaluator").field("m", &self.m).field("cfg", &self.cfg).finish()
    }
}

impl SmoothnessEvaluator {
    pub fn new(m: usize, cfg: SmoothnessConfig) -> Result<Self> {
        if m < 2 {
            return invalid(format!("smoothness needs at least 2 bins, got {m}"));
        }
        if cfg.sigma_max == 0 {
            return invalid("sigma_max must be at least 1");
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let mut eigenvalues = Vec::with_capacity(cfg.sigma_max * m);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for sigma in 1..=cfg.sigma_max {
            let kernel = gaussian_kernel(m, sigma as f64)?;
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for (i, w) in kernel.weights().iter().enumerate() {
                let offset = i as isize - kernel.radius() as isize;
                buf[offset.rem_euclid(m as isize) as usize].re += w;
            }
            forward.process(&mut buf);
            // unit mass: lambda_0 = 1 exactly
            eigenvalues.push(1.0);
            eigenvalues.extend(buf[1..].iter().map(|v| v.re));
        }
        Ok(Self { m, cfg, eigenvalues, forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn config(&self) -> &SmoothnessConfig {
        &self.cfg
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: y.len() });
        }
        // constant histograms are fixed points of every unit-mass kernel
        if y.iter().all(|&v| v == y[0]) {
            return Ok(0.0);
        }
        let mut spectrum: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut spectrum);
        let m = self.m as f64;
        let mut total = 0.0;
        match self.cfg.discrepancy {
            Discrepancy::L2 => {
                let power: Vec<f64> = spectrum.iter().map(|v| v.norm_sqr()).collect();
                for (s, lambdas) in self.eigenvalues.chunks_exact(self.m).enumerate() {
                    let sq: f64 = power.iter().zip(lambdas).map(|(p, l)| p * (1.0 - l) * (1.0 - l)).sum();
                    total += sigma_weight(s + 1) * (sq / m).sqrt();
                }
            }
            Discrepancy::L1 => {
                let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
                for (s, lambdas) in self.eigenvalues.chunks_exact(self.m).enumerate() {
                    for ((b, v), l) in buf.iter_mut().zip(&spectrum).zip(lambdas) {
                        *b = v * (1.0 - l);
                    }
                    self.inverse.process(&mut buf);
                    let l1: f64 = buf.iter().map(|v| v.re.abs()).sum::<f64>() / m;
                    total += sigma_weight(s + 1) * l1;
                }
            }
        }
        Ok(total)
    }

    pub fn report(&self, y: &[f64]) -> Result<SmoothnessReport> {
        Ok(SmoothnessReport {
            value: self.eval(y)?,
            sigma_max: self.cfg.sigma_max,
            truncation_bound: self.cfg.truncation_bound(),
            discrepancy: self.cfg.discrepancy,
        })
    }
}

/// One-off smoothness score; build a [`SmoothnessEvaluator`] when scoring
/// many histograms of the same length.
pub fn smoothness(y: &SignalHistogram, cfg: &SmoothnessConfig) -> Result<SmoothnessReport> {
    SmoothnessEvaluator::new(y.len(), *cfg)?.report(y.values())
}

/// Shannon entropy (bits) of the relative one-sided power spectrum
/// `|Y_k|^2, k = 0..=n/2`.
pub fn spectral_entropy(signal: &[f64]) -> Result<f64> {
    if signal.is_empty() {
        return invalid("spectral entropy of an empty signal");
    }
    if signal.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("zero signal has no spectrum".into()));
    }
    let n = signal.len();
    let mut spectrum: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    let power: Vec<f64> = spectrum[..=n / 2].iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = power.iter().sum();
    Ok(power
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            let q = p / total;
            -q * q.log2()
        })
        .sum())
}

/// Truncated square wave `(4/pi) sum_{n odd} sin(n pi x / L) / n` with the
/// first `num_harmonics` odd terms, sampled over one period, clipped at
/// zero and normalized to unit mass.
pub fn truncated_square_wave(num_harmonics: usize, num_samples: usize) -> Result<SignalHistogram> {
    square_wave(num_harmonics, num_samples, 1.0)
}

/// As [`truncated_square_wave`], with `periods` wavelengths across the
/// `num_samples` samples.
pub fn square_wave(num_harmonics: usize, num_samples: usize, periods: f64) -> Result<SignalHistogram> {
    if num_harmonics < 1 {
        return invalid("square wave needs at least one harmonic");
    }
    if num_samples < 16 {
        return invalid(format!("square wave needs at least 16 samples, got {num_samples}"));
    }
    if !(periods > 0.0 && periods.is_finite()) {
        return invalid("number of periods must be positive");
    }
    let values: Vec<f64> = (0..num_samples)
        .map(|j| {
            let x = periods * j as f64 / num_samples as f64;
            let wave: f64 = (0..num_harmonics)
                .map(|i| {
                    let n = (2 * i + 1) as f64;
                    (2.0 * PI * n * x).sin() / n
                })
                .sum();
            (4.0 / PI * wave).max(0.0)
        })
        .collect();
    SignalHistogram::from_weights(&values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Brown,
    Pink,
    White,
    Blue,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [NoiseKind::Brown, NoiseKind::Pink, NoiseKind::White, NoiseKind::Blue];

    /// Exponent `beta` of the power law `S ~ F^beta`.
    fn power_exponent(self) -> f64 {
        match self {
            NoiseKind::Brown => -2.0,
            NoiseKind::Pink => -1.0,
            NoiseKind::White => 0.0,
            NoiseKind::Blue => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Brown => "brown",
            NoiseKind::Pink => "pink",
            NoiseKind::White => "white",
            NoiseKind::Blue => "blue",
        }
    }
}

/// Colored noise framed as a histogram: white Gaussian samples reshaped in
/// the frequency domain so power scales as `F^beta`, min-max rescaled to
/// [0, 1] and normalized to unit mass.
pub fn colored_noise(kind: NoiseKind, length: usize, rng: &mut SeededRng) -> Result<SignalHistogram> {
    if length < 2 || !length.is_power_of_two() {
        return invalid(format!("noise length must be a power of two >= 2, got {length}"));
    }
    let mut signal: Vec<f64> = (0..length).map(|_| rng.normal()).collect();
    if kind != NoiseKind::White {
        let mut planner = FftPlanner::new();
        let mut buf: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        planner.plan_fft_forward(length).process(&mut buf);
        let half_exp = kind.power_exponent() / 2.0;
        for (k, v) in buf.iter_mut().enumerate() {
            let freq = k.min(length - k);
            if freq == 0 {
                if kind != NoiseKind::Blue {
                    *v = Complex64::new(0.0, 0.0);
                }
                continue;
            }
            *v *= (freq as f64).powf(half_exp);
        }
        planner.plan_fft_inverse(length).process(&mut buf);
        signal = buf.iter().map(|v| v.re / length as f64).collect();
    }
    let lo = signal.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = signal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Ok(SignalHistogram::uniform(length));
    }
    let scaled: Vec<f64> = signal.iter().map(|v| (v - lo) / (hi - lo)).collect();
    SignalHistogram::from_weights(&scaled)
}
