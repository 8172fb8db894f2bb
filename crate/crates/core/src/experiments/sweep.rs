//! Grids of cells over datasets, heads, frequencies, regularization
//! strengths and seeds, with seed aggregation and scaling-law fits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canonical::fmt_canonical;
use crate::error::{invalid, Result};
use crate::synth::DatasetKind;
use crate::trainer::{AggregateReport, HeadKind, HeadSpec, Objective};

use super::cells::{Cell, CellOutcome, GroupKey};
use super::fit::{fit_scaling_law, ScalingFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub datasets: Vec<DatasetKind>,
    pub heads: Vec<HeadKind>,
    pub frequencies: Vec<usize>,
    pub gammas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Objective of the categorical and density heads; regression always
    /// uses squared error.
    pub objective: Objective,
    pub learn_gmm_weights: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            datasets: DatasetKind::ALL.to_vec(),
            heads: vec![HeadKind::Linear, HeadKind::Fourier, HeadKind::Gmm],
            frequencies: (1..=10).map(|k| 2 * k).collect(),
            gammas: vec![0.0, 1e-6],
            seeds: vec![0, 1, 2, 3],
            objective: Objective::CrossEntropy,
            learn_gmm_weights: true,
        }
    }
}

impl SweepSpec {
    /// Defaults of the density-estimation sweep: Fourier and GMM heads.
    pub fn mle() -> Self {
        Self { heads: vec![HeadKind::Fourier, HeadKind::Gmm], objective: Objective::Mle, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() || self.heads.is_empty() || self.seeds.is_empty() {
            return invalid("datasets, heads and seeds must be nonempty");
        }
        if self.heads.contains(&HeadKind::Fourier) && (self.frequencies.is_empty() || self.gammas.is_empty()) {
            return invalid("a Fourier sweep needs at least one frequency and one gamma");
        }
        if self.objective == Objective::Mse {
            return invalid("the sweep objective must be cross_entropy or mle");
        }
        for cell in self.cells() {
            cell.head.validate(50, cell.objective)?;
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &dataset in &self.datasets {
            for &kind in &self.heads {
                let objective = if kind == HeadKind::Regression { Objective::Mse } else { self.objective };
                let heads: Vec<HeadSpec> = match kind {
                    HeadKind::Fourier => self
                        .frequencies
                        .iter()
                        .flat_map(|&n| self.gammas.iter().map(move |&g| HeadSpec::fourier(n, g)))
                        .collect(),
                    HeadKind::Gmm => vec![HeadSpec { learn_weights: self.learn_gmm_weights, ..HeadSpec::new(kind) }],
                    _ => vec![HeadSpec::new(kind)],
                };
                for head in heads {
                    for &seed in &self.seeds {
                        cells.push(Cell { dataset, head: head.clone(), objective, seed });
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub dataset: DatasetKind,
    pub head: HeadKind,
    pub num_frequencies: Option<usize>,
    pub gamma: Option<f64>,
    pub aggregate: Option<AggregateReport>,
    pub failures: Vec<(u64, String)>,
}

/// Seed-aggregated metrics per (dataset, head, N, gamma), in key order.
pub fn summarize(outcomes: &[CellOutcome]) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<GroupKey, Vec<&CellOutcome>> = BTreeMap::new();
    for o in outcomes {
        groups.entry(o.cell.group()).or_default().push(o);
    }
    groups
        .into_values()
        .map(|members| {
            let first = &members[0].cell;
            let fp = first.fourier_params();
            let ok: Vec<(u64, crate::trainer::EvalReport)> = members
                .iter()
                .filter_map(|o| o.result.as_ref().ok().map(|s| (o.cell.seed, s.report.clone())))
                .collect();
            let failures = members
                .iter()
                .filter_map(|o| o.result.as_ref().err().map(|e| (o.cell.seed, e.clone())))
                .collect();
            GroupSummary {
                dataset: first.dataset,
                head: first.head.kind,
                num_frequencies: fp.map(|p| p.0),
                gamma: fp.map(|p| p.1),
                aggregate: AggregateReport::new(ok).ok(),
                failures,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub dataset: DatasetKind,
    pub gamma: f64,
    pub frequencies: Vec<usize>,
    pub smoothness: Vec<f64>,
    pub fit: std::result::Result<ScalingFit, String>,
}

/// Fits the scaling law to seed-averaged Fourier smoothness against `N`,
/// per dataset and gamma.
pub fn scaling_fits(groups: &[GroupSummary]) -> Vec<FitRecord> {
    let mut curves: BTreeMap<(DatasetKind, u64), Vec<(usize, f64)>> = BTreeMap::new();
    for g in groups.iter().filter(|g| g.head == HeadKind::Fourier) {
        let (Some(n), Some(gamma)) = (g.num_frequencies, g.gamma) else { continue };
        if let Some(s) = g.aggregate.as_ref().and_then(|a| a.smoothness) {
            curves.entry((g.dataset, gamma.to_bits())).or_default().push((n, s.mean));
        }
    }
    curves
        .into_iter()
        .map(|((dataset, gamma_bits), mut pts)| {
            pts.sort_by_key(|p| p.0);
            let ns: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
            let s: Vec<f64> = pts.iter().map(|p| p.1).collect();
            FitRecord {
                dataset,
                gamma: f64::from_bits(gamma_bits),
                frequencies: pts.iter().map(|p| p.0).collect(),
                fit: fit_scaling_law(&ns, &s).map_err(|e| e.to_string()),
                smoothness: s,
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_canonical).unwrap_or_default()
}

/// Per-cell CSV rows, in cell-key order.
pub fn cells_csv(outcomes: &[CellOutcome]) -> String {
    let mut out = String::from("dataset,head,N,gamma,seed,status,kl,smoothness,mse,perplexity,best_epoch\n");
    let mut sorted: Vec<&CellOutcome> = outcomes.iter().collect();
    sorted.sort_by_key(|o| o.cell.key());
    for o in sorted {
        let c = &o.cell;
        let (n, g) = c.fourier_params().map_or((String::new(), String::new()), |(n, g)| (n.to_string(), fmt_canonical(g)));
        let prefix = format!("{},{},{n},{g},{}", c.dataset.name(), c.head.kind.name(), c.seed);
        match &o.result {
            Ok(s) => {
                let r = &s.report;
                out.push_str(&format!(
                    "{prefix},ok,{},{},{},{},{}\n",
                    opt(r.kl),
                    opt(r.smoothness),
                    fmt_canonical(r.mse),
                    opt(r.perplexity),
                    s.best_epoch
                ));
            }
            Err(_) => out.push_str(&format!("{prefix},failed,,,,,\n")),
        }
    }
    out
}
