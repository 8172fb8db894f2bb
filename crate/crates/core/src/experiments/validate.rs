//! Sanity checks of the smoothness metric on square waves and colored
//! noise, compared against spectral entropy.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::SeededRng;
use crate::smoothness::{colored_noise, spectral_entropy, square_wave, NoiseKind, SmoothnessConfig, SmoothnessEvaluator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationOptions {
    pub max_harmonics: usize,
    pub square_wave_samples: usize,
    /// Wavelengths across the sampled window.
    pub square_wave_periods: f64,
    /// L1 inversions are looked for above this harmonic count.
    pub l1_inversion_threshold: usize,
    pub noise_trials: usize,
    pub noise_length: usize,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            max_harmonics: 100,
            square_wave_samples: 2048,
            square_wave_periods: 2.0,
            l1_inversion_threshold: 80,
            noise_trials: 1000,
            noise_length: 1024,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareWaveReport {
    pub l2: Vec<f64>,
    pub l1: Vec<f64>,
    /// Harmonic counts `h` where `s(h) <= s(h - 1)`.
    pub l2_inversions: Vec<usize>,
    pub l1_inversions: Vec<usize>,
    pub l2_strictly_increasing: bool,
    pub l1_inversion_above_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStats {
    pub kind: NoiseKind,
    pub smoothness_mean: f64,
    pub smoothness_std: f64,
    pub entropy_mean: f64,
    pub entropy_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    /// In the order brown, pink, white, blue.
    pub stats: Vec<NoiseStats>,
    pub smoothness_ordered: bool,
    pub entropy_ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub options: ValidationOptions,
    pub square_waves: SquareWaveReport,
    pub noise: NoiseReport,
    pub checks: Vec<(String, bool)>,
    pub passed: bool,
}

fn inversions(values: &[f64]) -> Vec<usize> {
    // values[i] belongs to i + 1 harmonics
    (1..values.len()).filter(|&i| values[i] <= values[i - 1]).map(|i| i + 1).collect()
}

fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] < w[1])
}

pub fn square_wave_sweep(opts: &ValidationOptions) -> Result<SquareWaveReport> {
    let l2_eval = SmoothnessEvaluator::new(opts.square_wave_samples, SmoothnessConfig::default())?;
    let l1_eval = SmoothnessEvaluator::new(opts.square_wave_samples, SmoothnessConfig::l1())?;
    let mut l2 = Vec::with_capacity(opts.max_harmonics);
    let mut l1 = Vec::with_capacity(opts.max_harmonics);
    for h in 1..=opts.max_harmonics {
        let wave = square_wave(h, opts.square_wave_samples, opts.square_wave_periods)?;
        l2.push(l2_eval.eval(wave.values())?);
        l1.push(l1_eval.eval(wave.values())?);
    }
    let l2_inversions = inversions(&l2);
    let l1_inversions = inversions(&l1);
    Ok(SquareWaveReport {
        l2_strictly_increasing: l2_inversions.is_empty(),
        l1_inversion_above_threshold: l1_inversions.iter().any(|&h| h > opts.l1_inversion_threshold),
        l2,
        l1,
        l2_inversions,
        l1_inversions,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (mean, (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt())
}

pub fn noise_bootstrap(opts: &ValidationOptions) -> Result<NoiseReport> {
    let eval = SmoothnessEvaluator::new(opts.noise_length, SmoothnessConfig::default())?;
    let mut stats = Vec::new();
    for (i, kind) in NoiseKind::ALL.into_iter().enumerate() {
        let mut rng = SeededRng::derived(opts.seed, 100 + i as u64);
        let mut smooth = Vec::with_capacity(opts.noise_trials);
        let mut entropy = Vec::with_capacity(opts.noise_trials);
        for _ in 0..opts.noise_trials {
            let y = colored_noise(kind, opts.noise_length, &mut rng)?;
            smooth.push(eval.eval(y.values())?);
            entropy.push(spectral_entropy(y.values())?);
        }
        let (smoothness_mean, smoothness_std) = mean_std(&smooth);
        let (entropy_mean, entropy_std) = mean_std(&entropy);
        stats.push(NoiseStats { kind, smoothness_mean, smoothness_std, entropy_mean, entropy_std });
    }
    let sm: Vec<f64> = stats.iter().map(|s| s.smoothness_mean).collect();
    let en: Vec<f64> = stats.iter().map(|s| s.entropy_mean).collect();
    Ok(NoiseReport { smoothness_ordered: strictly_increasing(&sm), entropy_ordered: strictly_increasing(&en), stats })
}

pub fn validate_smoothness(opts: &ValidationOptions) -> Result<ValidationReport> {
    let square_waves = square_wave_sweep(opts)?;
    let noise = noise_bootstrap(opts)?;
    let checks = vec![
        ("l2_square_wave_strictly_increasing".to_string(), square_waves.l2_strictly_increasing),
        ("l1_square_wave_inversion_above_threshold".to_string(), square_waves.l1_inversion_above_threshold),
        ("noise_smoothness_ordered".to_string(), noise.smoothness_ordered),
        ("noise_spectral_entropy_not_ordered".to_string(), !noise.entropy_ordered),
    ];
    let passed = checks.iter().all(|(_, ok)| *ok);
    Ok(ValidationReport { options: opts.clone(), square_waves, noise, checks, passed })
}
