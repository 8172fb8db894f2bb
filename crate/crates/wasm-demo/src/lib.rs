//! Browser bindings for the Fourier head and the smoothness metric.
//!
//! Each exported function has a plain Rust twin in [`ops`] so the logic is
//! testable without a JS host.

use wasm_bindgen::prelude::*;

pub mod ops {
    use fourier_head::binning::uniform_bins;
    use fourier_head::fourier::{autocorrelate, AutocorrInput};
    use fourier_head::smoothness::{smoothness, square_wave, SignalHistogram, SmoothnessConfig};
    use fourier_head::synth::{quantized_true_conditional, DatasetKind, TrueConditional};
    use fourier_head::Result;

    /// Sigma cap used by the page. Lower than the library default so
    /// sliders stay responsive.
    pub const DEMO_SIGMA_MAX: usize = 200;

    fn config(l1: bool) -> SmoothnessConfig {
        let base = if l1 { SmoothnessConfig::l1() } else { SmoothnessConfig::default() };
        SmoothnessConfig { sigma_max: DEMO_SIGMA_MAX, ..base }
    }

    /// Categorical distribution over `bins` uniform bins from interleaved
    /// `(re, im)` autocorrelation parameters.
    pub fn fourier_pmf(raw: &[f64], bins: usize) -> Result<Vec<f64>> {
        let d = autocorrelate(&AutocorrInput::from_interleaved(raw)?);
        let layout = uniform_bins(bins, -1.0, 1.0)?;
        Ok(d.discretize(layout.centers())?.0.into_probs())
    }

    /// The continuous density at `points` evenly spaced z in [-1, 1].
    pub fn fourier_density(raw: &[f64], points: usize) -> Result<Vec<f64>> {
        let d = autocorrelate(&AutocorrInput::from_interleaved(raw)?);
        let step = 2.0 / (points.max(2) - 1) as f64;
        (0..points.max(2)).map(|j| d.eval((-1.0 + step * j as f64).min(1.0))).collect()
    }

    /// Smoothness of square waves with 1..=max_harmonics odd terms.
    pub fn square_wave_curve(max_harmonics: usize, samples: usize, l1: bool) -> Result<Vec<f64>> {
        let cfg = config(l1);
        (1..=max_harmonics)
            .map(|h| Ok(smoothness(&square_wave(h, samples, 2.0)?, &cfg)?.value))
            .collect()
    }

    /// Quantized true conditional of a toy dataset at input `(x, y)`.
    pub fn conditional_pmf(dataset: &str, x: f64, y: f64, bins: usize) -> Result<Vec<f64>> {
        let kind: DatasetKind = dataset.parse()?;
        let tc = TrueConditional::for_point(kind, x, y, 0.1);
        Ok(quantized_true_conditional(&tc, &uniform_bins(bins, -1.0, 1.0)?)?.into_probs())
    }

    pub fn histogram_smoothness(weights: &[f64], l1: bool) -> Result<f64> {
        Ok(smoothness(&SignalHistogram::from_weights(weights)?, &config(l1))?.value)
    }
}

fn js(e: fourier_head::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn fourier_pmf(raw: &[f64], bins: usize) -> Result<Vec<f64>, JsError> {
    ops::fourier_pmf(raw, bins).map_err(js)
}

#[wasm_bindgen]
pub fn fourier_density(raw: &[f64], points: usize) -> Result<Vec<f64>, JsError> {
    ops::fourier_density(raw, points).map_err(js)
}

#[wasm_bindgen]
pub fn square_wave_curve(max_harmonics: usize, samples: usize, l1: bool) -> Result<Vec<f64>, JsError> {
    ops::square_wave_curve(max_harmonics, samples, l1).map_err(js)
}

#[wasm_bindgen]
pub fn conditional_pmf(dataset: &str, x: f64, y: f64, bins: usize) -> Result<Vec<f64>, JsError> {
    ops::conditional_pmf(dataset, x, y, bins).map_err(js)
}

#[wasm_bindgen]
pub fn histogram_smoothness(weights: &[f64], l1: bool) -> Result<f64, JsError> {
    ops::histogram_smoothness(weights, l1).map_err(js)
}
