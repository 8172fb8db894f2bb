//! Least-squares fit of `s(N) = C1 - C2 / N^(2t - 1)` to a smoothness
//! curve, with `t >= 2`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const MIN_EXPONENT: f64 = 2.0;
pub const MAX_EXPONENT: f64 = 12.0;
/// A fit is accepted when its RMS residual is at most this fraction of the
/// standard deviation of the observations.
pub const RELATIVE_RESIDUAL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub c1: f64,
    pub c2: f64,
    pub t: f64,
    /// RMS residual.
    pub residual: f64,
    /// RMS residual over the standard deviation of the observations.
    pub relative_residual: f64,
    pub accepted: bool,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.c1 - self.c2 / n.powf(2.0 * self.t - 1.0)
    }
}

/// Best `(C1, C2)` for a fixed `t` and its sum of squared residuals.
fn linear_fit(ns: &[f64], s: &[f64], t: f64) -> (f64, f64, f64) {
    let xs: Vec<f64> = ns.iter().map(|n| -n.powf(-(2.0 * t - 1.0))).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = s.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(s).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c2 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c1 = my - c2 * mx;
    let sse = xs.iter().zip(s).map(|(x, y)| (y - c1 - c2 * x).powi(2)).sum();
    (c1, c2, sse)
}

pub fn fit_scaling_law(ns: &[f64], s: &[f64]) -> Result<ScalingFit> {
    if ns.len() != s.len() {
        return invalid("frequency and smoothness lists differ in length");
    }
    if ns.len() < 3 {
        return invalid("a scaling fit needs at least three points");
    }
    if ns.iter().any(|n| !(*n >= 1.0)) || s.iter().any(|v| !v.is_finite()) {
        return invalid("frequencies must be >= 1 and smoothness values finite");
    }
    let sse = |t: f64| linear_fit(ns, s, t).2;
    // coarse grid, then golden-section refinement around the best point
    let step = 0.05;
    let mut best_t = MIN_EXPONENT;
    let mut t = MIN_EXPONENT;
    while t <= MAX_EXPONENT + 1e-12 {
        if sse(t) < sse(best_t) {
            best_t = t;
        }
        t += step;
    }
    let (mut a, mut b) = ((best_t - step).max(MIN_EXPONENT), (best_t + step).min(MAX_EXPONENT));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if sse(c) < sse(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = 0.5 * (a + b);
    let t = if sse(refined) < sse(best_t) { refined } else { best_t };
    let (c1, c2, sse) = linear_fit(ns, s, t);
    let k = s.len() as f64;
    let residual = (sse / k).sqrt();
    let mean = s.iter().sum::<f64>() / k;
    let spread = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k).sqrt();
    let relative_residual = if spread > 0.0 { residual / spread } else { f64::INFINITY };
    Ok(ScalingFit {
        c1,
        c2,
        t,
        residual,
        relative_residual,
        accepted: c2 > 0.0 && relative_residual <= RELATIVE_RESIDUAL_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_curve() {
        let ns: Vec<f64> = (1..=10).map(|k| (2 * k) as f64).collect();
        let s: Vec<f64> = ns.iter().map(|n| 0.08 - 0.3 / n.powf(2.0 * 2.0 - 1.0)).collect();
        let fit = fit_scaling_law(&ns, &s).unwrap();
        assert!((fit.c1 - 0.08).abs() < 1e-6 && (fit.c2 - 0.3).abs() < 1e-4 && (fit.t - 2.0).abs() < 1e-3, "{fit:?}");
        assert!(fit.accepted);

        let s: Vec<f64> = ns.iter().map(|n| 1.0 - 5.0 / n.powf(4.0)).collect();
        let fit = fit_scaling_law(&ns, &s).unwrap();
        assert!((fit.t - 2.5).abs() < 1e-3 && (fit.c2 - 5.0).abs() < 1e-2, "{fit:?}");
    }

    #[test]
    fn decreasing_curve_not_accepted() {
        let ns: Vec<f64> = (1..=10).map(|k| (2 * k) as f64).collect();
        let s: Vec<f64> = ns.iter().map(|n| 0.05 + 0.3 / n.powi(3)).collect();
        let fit = fit_scaling_law(&ns, &s).unwrap();
        assert!(fit.c2 < 0.0 && !fit.accepted);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_scaling_law(&[2.0, 4.0], &[0.1, 0.2]).is_err());
        assert!(fit_scaling_law(&[2.0, 4.0, 6.0], &[0.1, 0.2]).is_err());
        assert!(fit_scaling_law(&[0.0, 4.0, 6.0], &[0.1, 0.2, 0.3]).is_err());
    }
}
