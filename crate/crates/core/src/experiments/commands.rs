//! The experiment commands: each runs its study and writes artifacts
//! through an [`ArtifactWriter`].

use serde::{Deserialize, Serialize};

use crate::canonical::fmt_canonical;
use crate::error::{invalid, Result};
use crate::synth::{generate, DatasetKind};
use crate::trainer::{AggregateReport, HeadKind, HeadSpec, Objective};

use super::cells::{run_cells, Cell, CellOutcome, TrainSettings};
use super::output::{ArtifactWriter, LineChart};
use super::sweep::{cells_csv, scaling_fits, summarize, FitRecord, GroupSummary, SweepSpec};
use super::validate::{validate_smoothness, ValidationOptions, ValidationReport};

/// Number of test inputs whose predicted and true PMFs are exported.
pub const PMF_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainToyConfig {
    pub dataset: DatasetKind,
    pub head: HeadKind,
    pub frequencies: usize,
    pub gamma: f64,
    pub learn_gmm_weights: bool,
    /// Defaults to cross-entropy (squared error for regression).
    pub objective: Option<Objective>,
    pub seeds: Vec<u64>,
    pub train: TrainSettings,
}

impl Default for TrainToyConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetKind::Gaussian,
            head: HeadKind::Fourier,
            frequencies: 12,
            gamma: 0.0,
            learn_gmm_weights: true,
            objective: None,
            seeds: vec![0],
            train: TrainSettings::default(),
        }
    }
}

impl TrainToyConfig {
    pub fn head_spec(&self) -> HeadSpec {
        HeadSpec {
            num_frequencies: self.frequencies,
            gamma: self.gamma,
            learn_weights: self.learn_gmm_weights,
            ..HeadSpec::new(self.head)
        }
    }

    pub fn objective(&self) -> Objective {
        self.objective.unwrap_or(Objective::default_for(self.head))
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.seeds
            .iter()
            .map(|&seed| Cell { dataset: self.dataset, head: self.head_spec(), objective: self.objective(), seed })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return invalid("at least one seed is required");
        }
        self.train.validate()?;
        self.head_spec().validate(50, self.objective())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToyResult {
    pub aggregate: Option<AggregateReport>,
    pub cells: Vec<CellOutcome>,
}

pub fn train_toy(cfg: &TrainToyConfig, jobs: usize, out: &ArtifactWriter) -> Result<ToyResult> {
    cfg.validate()?;
    let outcomes = run_cells(&cfg.cells(), &cfg.train, jobs, true)?;
    let dataset = generate(&cfg.train.dataset_spec(cfg.dataset))?;
    for o in &outcomes {
        let Some(t) = &o.trained else { continue };
        let seed = o.cell.seed;
        std::fs::write(out.path(&format!("checkpoint_seed{seed}.json")), t.model.to_json()? + "\n")?;
        let mut body = String::new();
        let samples = dataset.test.iter().take(PMF_SAMPLES).enumerate();
        if cfg.head == HeadKind::Regression {
            body.push_str("sample,x,y,z,prediction\n");
            for (s, &i) in samples {
                let tr = &dataset.triples[i];
                let pred = t.model.raw_output(&dataset.input(tr))?[0];
                body.push_str(&format!("{s},{},{},{},{}\n", fmt_canonical(tr.x), fmt_canonical(tr.y), fmt_canonical(tr.z), fmt_canonical(pred)));
            }
            out.write_csv(&format!("predictions_seed{seed}.csv"), &body)?;
            continue;
        }
        body.push_str("sample,x,y,bin,center,predicted,true\n");
        for (s, &i) in samples {
            let tr = &dataset.triples[i];
            let input = if o.cell.objective == Objective::Mle { [tr.x, tr.y] } else { dataset.input(tr) };
            let pred = t.model.predict(&input)?;
            let truth = dataset.reference(tr)?;
            for (k, c) in dataset.spec.bins.centers().iter().enumerate() {
                body.push_str(&format!(
                    "{s},{},{},{k},{},{},{}\n",
                    fmt_canonical(input[0]),
                    fmt_canonical(input[1]),
                    fmt_canonical(*c),
                    fmt_canonical(pred.probs()[k]),
                    fmt_canonical(truth.probs()[k])
                ));
            }
        }
        out.write_csv(&format!("pmf_seed{seed}.csv"), &body)?;
    }
    let ok: Vec<_> = outcomes.iter().filter_map(|o| o.result.as_ref().ok().map(|s| (o.cell.seed, s.report.clone()))).collect();
    let result = ToyResult { aggregate: AggregateReport::new(ok).ok(), cells: outcomes };
    out.write_json("report.json", &result)?;
    out.write_csv("cells.csv", &cells_csv(&result.cells))?;
    Ok(result)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub groups: Vec<GroupSummary>,
    pub fits: Vec<FitRecord>,
    pub failed_cells: usize,
}

fn metric_chart(groups: &[GroupSummary], title: &str, y_label: &str, metric: impl Fn(&AggregateReport) -> Option<f64>) -> LineChart {
    let mut chart = LineChart::new(title, "frequencies N", y_label);
    let keys: std::collections::BTreeSet<(DatasetKind, u64)> = groups
        .iter()
        .filter(|g| g.head == HeadKind::Fourier)
        .map(|g| (g.dataset, g.gamma.unwrap_or(0.0).to_bits()))
        .collect();
    for (dataset, gamma_bits) in keys {
        let pts: Vec<(f64, f64)> = groups
            .iter()
            .filter(|g| g.head == HeadKind::Fourier && g.dataset == dataset && g.gamma.map(f64::to_bits) == Some(gamma_bits))
            .filter_map(|g| Some((g.num_frequencies? as f64, metric(g.aggregate.as_ref()?)?)))
            .collect();
        chart = chart.with_series(&format!("{} gamma={}", dataset.name(), fmt_canonical(f64::from_bits(gamma_bits))), pts);
    }
    chart
}

pub fn sweep(spec: &SweepSpec, settings: &TrainSettings, jobs: usize, out: &ArtifactWriter) -> Result<SweepResult> {
    spec.validate()?;
    let outcomes = run_cells(&spec.cells(), settings, jobs, false)?;
    let groups = summarize(&outcomes);
    let fits = scaling_fits(&groups);
    let failed_cells = outcomes.iter().filter(|o| o.result.is_err()).count();
    out.write_csv("cells.csv", &cells_csv(&outcomes))?;
    let result = SweepResult { groups, fits, failed_cells };
    out.write_json("summary.json", &result)?;
    if spec.heads.contains(&HeadKind::Fourier) {
        out.write_svg("kl_vs_frequencies.svg", &metric_chart(&result.groups, "Fourier head KL", "KL", |a| a.kl.map(|m| m.mean)))?;
        out.write_svg(
            "smoothness_vs_frequencies.svg",
            &metric_chart(&result.groups, "Fourier head smoothness", "smoothness", |a| a.smoothness.map(|m| m.mean)),
        )?;
        if spec.objective == Objective::Mle {
            out.write_svg(
                "perplexity_vs_frequencies.svg",
                &metric_chart(&result.groups, "Fourier head perplexity", "perplexity", |a| a.perplexity.map(|m| m.mean)),
            )?;
        }
    }
    Ok(result)
}

pub fn run_validate_smoothness(opts: &ValidationOptions, out: &ArtifactWriter) -> Result<ValidationReport> {
    let report = validate_smoothness(opts)?;
    let sw = &report.square_waves;
    let mut body = String::from("harmonics,l2,l1\n");
    for (i, (a, b)) in sw.l2.iter().zip(&sw.l1).enumerate() {
        body.push_str(&format!("{},{},{}\n", i + 1, fmt_canonical(*a), fmt_canonical(*b)));
    }
    out.write_csv("square_waves.csv", &body)?;
    let mut body = String::from("noise,smoothness_mean,smoothness_std,spectral_entropy_mean,spectral_entropy_std\n");
    for s in &report.noise.stats {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            s.kind.name(),
            fmt_canonical(s.smoothness_mean),
            fmt_canonical(s.smoothness_std),
            fmt_canonical(s.entropy_mean),
            fmt_canonical(s.entropy_std)
        ));
    }
    out.write_csv("colored_noise.csv", &body)?;
    let idx = |v: &[f64]| -> Vec<(f64, f64)> { v.iter().enumerate().map(|(i, s)| ((i + 1) as f64, *s)).collect() };
    out.write_svg("square_waves_l2.svg", &LineChart::new("Square waves, L2", "sine waves", "smoothness").with_series("L2", idx(&sw.l2)))?;
    out.write_svg("square_waves_l1.svg", &LineChart::new("Square waves, L1", "sine waves", "smoothness").with_series("L1", idx(&sw.l1)))?;
    out.write_json("validation.json", &report)?;
    Ok(report)
}
