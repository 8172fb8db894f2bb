//! Synthetic conditional-density datasets: `x ~ U(I)`, `y ~ P1(x)`,
//! `z ~ P2(x, y)`, quantized into bins, with the exact conditional density
//! of `z` kept alongside for evaluation.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use crate::binning::{uniform_bins, BinLayout};
use crate::canonical::{fmt_canonical, to_canonical_json};
use crate::error::{invalid, Error, Result};
use crate::fourier::CategoricalDistribution;
use crate::rng::SeededRng;

/// Beta shape parameters `100|x|` are floored here so `x = 0` stays valid.
pub const BETA_SHAPE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Gaussian,
    Gmm2,
    Beta,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 3] = [DatasetKind::Gaussian, DatasetKind::Gmm2, DatasetKind::Beta];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Gaussian => "gaussian",
            DatasetKind::Gmm2 => "gmm2",
            DatasetKind::Beta => "beta",
        }
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(DatasetKind::Gaussian),
            "gmm2" | "gmm-2" => Ok(DatasetKind::Gmm2),
            "beta" => Ok(DatasetKind::Beta),
            other => invalid(format!("unknown dataset '{other}' (expected gaussian, gmm2 or beta)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub interval: (f64, f64),
    pub sigma_sq: f64,
    pub size: usize,
    pub train_fraction: f64,
    pub bins: BinLayout,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(kind: DatasetKind, seed: u64) -> Self {
        Self {
            kind,
            interval: (-0.8, 0.8),
            sigma_sq: 0.01,
            size: 5000,
            train_fraction: 0.8,
            bins: uniform_bins(50, -1.0, 1.0).expect("static bin layout"),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        if !(lo < hi) || lo < -1.0 || hi > 1.0 {
            return invalid(format!("interval [{lo}, {hi}] must be a nonempty subset of [-1, 1]"));
        }
        if !(self.sigma_sq > 0.0) {
            return invalid("sigma_sq must be positive");
        }
        if self.size < 2 {
            return invalid("dataset needs at least 2 samples");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return invalid("train_fraction must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub qx: usize,
    pub qy: usize,
    pub qz: usize,
}

fn normal_pdf(z: f64, mean: f64, std: f64) -> f64 {
    let u = (z - mean) / std;
    (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * std)
}

fn normal_cdf(z: f64, mean: f64, std: f64) -> f64 {
    0.5 * (1.0 + erf((z - mean) / (std * std::f64::consts::SQRT_2)))
}

/// Mass of `N(mean, std^2)` inside [-1, 1].
fn mass_in_domain(mean: f64, std: f64) -> f64 {
    normal_cdf(1.0, mean, std) - normal_cdf(-1.0, mean, std)
}

/// Closed-form conditional density of `z` given `(x, y)`, restricted to
/// [-1, 1] (out-of-range draws are rejected during sampling).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrueConditional {
    Gaussian { mean: f64, std: f64 },
    Gmm2 { means: [f64; 2], std: f64 },
    Beta { a: f64, b: f64 },
}

impl TrueConditional {
    pub fn for_point(kind: DatasetKind, x: f64, y: f64, sigma: f64) -> Self {
        match kind {
            DatasetKind::Gaussian => TrueConditional::Gaussian { mean: y, std: sigma },
            DatasetKind::Gmm2 => TrueConditional::Gmm2 { means: [x, y], std: sigma },
            DatasetKind::Beta => TrueConditional::Beta {
                a: (100.0 * x.abs()).max(BETA_SHAPE_FLOOR),
                b: (100.0 * y.abs()).max(BETA_SHAPE_FLOOR),
            },
        }
    }

    pub fn pdf(&self, z: f64) -> f64 {
        if !(-1.0..=1.0).contains(&z) {
            return 0.0;
        }
        match *self {
            TrueConditional::Gaussian { mean, std } => normal_pdf(z, mean, std) / mass_in_domain(mean, std),
            TrueConditional::Gmm2 { means: [m1, m2], std } => {
                let mass = 0.5 * (mass_in_domain(m1, std) + mass_in_domain(m2, std));
                0.5 * (normal_pdf(z, m1, std) + normal_pdf(z, m2, std)) / mass
            }
            TrueConditional::Beta { a, b } => {
                let w = z.abs();
                if w == 0.0 || w == 1.0 {
                    // endpoint density: zero, finite or infinite depending on shape
                    let edge_shape = if w == 0.0 { a } else { b };
                    return match edge_shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Greater) => 0.0,
                        Some(std::cmp::Ordering::Equal) => 0.5 * (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)).exp(),
                        _ => f64::INFINITY,
                    };
                }
                let ln_pdf = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + (a - 1.0) * w.ln() + (b - 1.0) * (1.0 - w).ln();
                0.5 * ln_pdf.exp()
            }
        }
    }

    /// Draws `z`, rejecting values outside [-1, 1].
    pub fn sample(&self, rng: &mut SeededRng) -> f64 {
        loop {
            let z = match *self {
                TrueConditional::Gaussian { mean, std } => rng.normal_with(mean, std),
                TrueConditional::Gmm2 { means, std } => {
                    let mean = if rng.sign() > 0.0 { means[0] } else { means[1] };
                    rng.normal_with(mean, std)
                }
                TrueConditional::Beta { a, b } => rng.sign() * rng.beta(a, b),
            };
            if (-1.0..=1.0).contains(&z) {
                return z;
            }
        }
    }
}

/// Evaluates the density at the bin centers, scales by bin width and
/// normalizes.
pub fn quantized_true_conditional(tc: &TrueConditional, bins: &BinLayout) -> Result<CategoricalDistribution> {
    let mut weights: Vec<f64> = bins
        .centers()
        .iter()
        .zip(bins.widths())
        .map(|(&c, w)| tc.pdf(c) * w)
        .collect();
    if weights.iter().any(|w| w.is_infinite()) {
        // a pole at a bin center takes all the mass
        weights.iter_mut().for_each(|w| *w = if w.is_infinite() { 1.0 } else { 0.0 });
    }
    CategoricalDistribution::from_weights(&weights)
        .map_err(|_| Error::Degenerate("true conditional has no mass at any bin center".into()))
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub triples: Vec<Triple>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn sample_in_domain(rng: &mut SeededRng, mut draw: impl FnMut(&mut SeededRng) -> f64) -> f64 {
    loop {
        let v = draw(rng);
        if (-1.0..=1.0).contains(&v) {
            return v;
        }
    }
}

pub fn generate(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = SeededRng::derived(spec.seed, 0xda7a);
    let (lo, hi) = spec.interval;
    let sigma = spec.sigma();
    let bins = &spec.bins;
    let triples: Vec<Triple> = (0..spec.size)
        .map(|_| {
            let x = rng.uniform_range(lo, hi);
            let y = match spec.kind {
                DatasetKind::Gaussian | DatasetKind::Beta => sample_in_domain(&mut rng, |r| r.normal_with(x, sigma)),
                DatasetKind::Gmm2 => rng.uniform_range(lo, hi),
            };
            let z = TrueConditional::for_point(spec.kind, x, y, sigma).sample(&mut rng);
            Triple { x, y, z, qx: bins.quantize(x), qy: bins.quantize(y), qz: bins.quantize(z) }
        })
        .collect();
    let mut order: Vec<usize> = (0..spec.size).collect();
    rng.shuffle(&mut order);
    let n_train = ((spec.size as f64) * spec.train_fraction).round() as usize;
    let n_train = n_train.clamp(1, spec.size - 1);
    let test = order.split_off(n_train);
    Ok(Dataset { spec: spec.clone(), triples, train: order, test })
}

impl Dataset {
    pub fn true_conditional(&self, t: &Triple) -> TrueConditional {
        TrueConditional::for_point(self.spec.kind, t.x, t.y, self.spec.sigma())
    }

    pub fn reference(&self, t: &Triple) -> Result<CategoricalDistribution> {
        quantized_true_conditional(&self.true_conditional(t), &self.spec.bins)
    }

    /// Model inputs: the dequantized `(q(x), q(y))`.
    pub fn input(&self, t: &Triple) -> [f64; 2] {
        [self.spec.bins.dequantize(t.qx), self.spec.bins.dequantize(t.qy)]
    }

    pub fn train_triples(&self) -> impl Iterator<Item = &Triple> {
        self.train.iter().map(|&i| &self.triples[i])
    }

    pub fn test_triples(&self) -> impl Iterator<Item = &Triple> {
        self.test.iter().map(|&i| &self.triples[i])
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "x,y,z,qx,qy,qz")?;
        for t in &self.triples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_canonical(t.x),
                fmt_canonical(t.y),
                fmt_canonical(t.z),
                t.qx,
                t.qy,
                t.qz
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        std::fs::write(path, to_canonical_json(&self.spec)?)?;
        Ok(())
    }
}
