//! Quantization of a latent interval into ordered bins.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinStrategy {
    Uniform,
    MixedPrecision,
}

/// Ordered bins over `[lo, hi]`. Bins are left-closed/right-open except the
/// last one, which is closed on both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BinLayoutWire", into = "BinLayoutWire")]
pub struct BinLayout {
    strategy: BinStrategy,
    edges: Vec<f64>,
    centers: Vec<f64>,
    dense_fraction: Option<f64>,
    dense_range: Option<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct BinLayoutWire {
    strategy: BinStrategy,
    edges: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    centers: Option<Vec<f64>>,
    d: Option<f64>,
    dense_range: Option<[f64; 2]>,
}

impl From<BinLayout> for BinLayoutWire {
    fn from(b: BinLayout) -> Self {
        Self {
            strategy: b.strategy,
            edges: b.edges,
            centers: Some(b.centers),
            d: b.dense_fraction,
            dense_range: b.dense_range.map(|(a, c)| [a, c]),
        }
    }
}

impl TryFrom<BinLayoutWire> for BinLayout {
    type Error = crate::Error;

    fn try_from(w: BinLayoutWire) -> Result<Self> {
        if w.edges.len() < 3 || w.edges.windows(2).any(|p| !(p[0] < p[1])) {
            return invalid("bin edges must be strictly increasing with at least two bins");
        }
        let centers = match w.centers {
            Some(c) if c.len() + 1 == w.edges.len() && c.iter().zip(w.edges.windows(2)).all(|(x, p)| p[0] <= *x && *x <= p[1]) => c,
            Some(_) => return invalid("bin centers must lie inside their bins"),
            None => w.edges.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect(),
        };
        Ok(Self {
            strategy: w.strategy,
            edges: w.edges,
            centers,
            dense_fraction: w.d,
            dense_range: w.dense_range.map(|[a, c]| (a, c)),
        })
    }
}

/// Result of building a mixed-precision layout, with the number of samples
/// that had to be clamped into `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct MixedPrecisionBins {
    pub layout: BinLayout,
    pub clamped: usize,
}

impl BinLayout {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn strategy(&self) -> BinStrategy {
        self.strategy
    }

    pub fn dense_fraction(&self) -> Option<f64> {
        self.dense_fraction
    }

    pub fn dense_range(&self) -> Option<(f64, f64)> {
        self.dense_range
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn width(&self, k: usize) -> f64 {
        self.edges[k + 1] - self.edges[k]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|p| p[1] - p[0]).collect()
    }

    /// Index of the bin containing `v`; values outside the range clamp to
    /// the end bins.
    pub fn quantize(&self, v: f64) -> usize {
        let m = self.len();
        if !(v > self.lo()) {
            return 0;
        }
        if v >= self.hi() {
            return m - 1;
        }
        let k = self.edges.partition_point(|&e| e <= v);
        (k - 1).min(m - 1)
    }

    pub fn dequantize(&self, k: usize) -> f64 {
        self.centers[k]
    }

    /// `dequantize(quantize(v))`.
    pub fn snap(&self, v: f64) -> f64 {
        self.dequantize(self.quantize(v))
    }
}

/// Equal-width bins. On `[-1, 1]` the centers are `-1 + (1 + 2k)/m`.
pub fn uniform_bins(m: usize, lo: f64, hi: f64) -> Result<BinLayout> {
    if m < 2 {
        return invalid(format!("need at least 2 bins, got {m}"));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return invalid(format!("invalid range [{lo}, {hi}]"));
    }
    let span = hi - lo;
    let mf = m as f64;
    let mut edges: Vec<f64> = (0..=m).map(|k| lo + span * k as f64 / mf).collect();
    edges[m] = hi;
    let centers = (0..m).map(|k| lo + span * (1.0 + 2.0 * k as f64) / (2.0 * mf)).collect();
    Ok(BinLayout {
        strategy: BinStrategy::Uniform,
        edges,
        centers,
        dense_fraction: None,
        dense_range: None,
    })
}

/// Linear-interpolation percentile of sorted data, `p` in [0, 100].
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

fn linspace(lo: f64, hi: f64, count: usize, out: &mut Vec<f64>) {
    // pushes the left edges of `count` equal bins on [lo, hi)
    for k in 0..count {
        out.push(lo + (hi - lo) * k as f64 / count as f64);
    }
}

/// Mixed-precision layout: `m - floor(d*m)` equal bins over the dense range
/// (1st to 99th percentile of `samples`) and `floor(d*m)` equal bins split
/// over the two flanks in proportion to their length. A flank is capped
/// at the number of bins that keeps its bins at least as wide as the
/// dense bins, and the surplus moves to the dense range.
///
/// A flank that receives no bins is absorbed into the adjacent end bin of
/// the dense range so the layout still covers `[lo, hi]`.
pub fn mixed_precision_bins(samples: &[f64], m: usize, d: f64, lo: f64, hi: f64) -> Result<MixedPrecisionBins> {
    if samples.is_empty() {
        return invalid("mixed-precision binning needs at least one sample");
    }
    if !(0.0..1.0).contains(&d) {
        return invalid(format!("dense fraction d must lie in [0, 1), got {d}"));
    }
    // validates m, lo, hi
    uniform_bins(m, lo, hi)?;

    let mut clamped = 0;
    let mut sorted: Vec<f64> = samples
        .iter()
        .map(|&v| {
            if v < lo || v > hi {
                clamped += 1;
            }
            v.clamp(lo, hi)
        })
        .collect();
    if sorted.iter().any(|v| v.is_nan()) {
        return invalid("samples contain NaN");
    }
    sorted.sort_by(f64::total_cmp);
    let q_lo = percentile(&sorted, 1.0);
    let q_hi = percentile(&sorted, 99.0);
    if !(q_lo < q_hi) {
        return invalid(format!("dense range [{q_lo}, {q_hi}] is degenerate"));
    }

    let sparse = (d * m as f64).floor() as usize;
    let left_len = q_lo - lo;
    let right_len = hi - q_hi;
    let flank_len = left_len + right_len;
    let (mut left, mut right) = (0, 0);
    if flank_len > 0.0 {
        right = (sparse as f64 * right_len / flank_len).floor() as usize;
        left = sparse - right;
        // flank bins are never narrower than dense bins; the excess goes
        // to the dense range
        let dense_width = (q_hi - q_lo) / (m - sparse) as f64;
        left = left.min((left_len / dense_width).floor() as usize);
        right = right.min((right_len / dense_width).floor() as usize);
    }
    let dense = m - left - right;
    // dense must keep at least one bin
    if dense == 0 {
        return invalid("no bins left for the dense range");
    }

    let mut edges = Vec::with_capacity(m + 1);
    linspace(lo, q_lo, left, &mut edges);
    linspace(q_lo, q_hi, dense, &mut edges);
    linspace(q_hi, hi, right, &mut edges);
    edges.push(hi);
    if left == 0 {
        edges[0] = lo;
    }
    debug_assert_eq!(edges.len(), m + 1);
    if edges.windows(2).any(|p| !(p[0] < p[1])) {
        return invalid("mixed-precision layout produced an empty bin");
    }
    let centers = edges.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    Ok(MixedPrecisionBins {
        layout: BinLayout {
            strategy: BinStrategy::MixedPrecision,
            edges,
            centers,
            dense_fraction: Some(d),
            dense_range: Some((q_lo, q_hi)),
        },
        clamped,
    })
}
