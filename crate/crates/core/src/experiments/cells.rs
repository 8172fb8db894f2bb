//! Experiment cells: one (dataset, head, objective, seed) training run,
//! executed sequentially or on a bounded thread pool.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::synth::{generate, Dataset, DatasetKind, DatasetSpec};
use crate::trainer::{evaluate, train, EvalReport, HeadKind, HeadSpec, Objective, TrainConfig, TrainedModel, DEFAULT_HIDDEN};

/// Training and data settings shared by every cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub hidden: Vec<usize>,
    pub dataset_size: usize,
    /// Seed of the generated datasets; model seeds vary per cell.
    pub data_seed: u64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self { learning_rate: 1e-3, batch_size: 128, epochs: 200, hidden: DEFAULT_HIDDEN.to_vec(), dataset_size: 5000, data_seed: 0 }
    }
}

impl TrainSettings {
    pub fn train_config(&self, objective: Objective, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            hidden: self.hidden.clone(),
            ..TrainConfig::new(objective, seed)
        }
    }

    pub fn dataset_spec(&self, kind: DatasetKind) -> DatasetSpec {
        DatasetSpec { size: self.dataset_size, ..DatasetSpec::new(kind, self.data_seed) }
    }

    pub fn validate(&self) -> Result<()> {
        self.train_config(Objective::CrossEntropy, 0).validate()?;
        self.dataset_spec(DatasetKind::Gaussian).validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub dataset: DatasetKind,
    pub head: HeadSpec,
    pub objective: Objective,
    pub seed: u64,
}

/// Sort key of a cell: dataset, head, N, gamma, seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellKey {
    pub dataset: DatasetKind,
    pub head: HeadKind,
    pub num_frequencies: usize,
    gamma_bits: u64,
    pub seed: u64,
}

/// Group key: a cell key without the seed.
pub type GroupKey = (DatasetKind, HeadKind, usize, u64);

impl Cell {
    pub fn key(&self) -> CellKey {
        let fourier = self.head.kind == HeadKind::Fourier;
        CellKey {
            dataset: self.dataset,
            head: self.head.kind,
            num_frequencies: if fourier { self.head.num_frequencies } else { 0 },
            gamma_bits: if fourier { self.head.gamma.to_bits() } else { 0 },
            seed: self.seed,
        }
    }

    pub fn group(&self) -> GroupKey {
        let k = self.key();
        (k.dataset, k.head, k.num_frequencies, k.gamma_bits)
    }

    /// `N` and `gamma` as reported in tables, absent for non-Fourier heads.
    pub fn fourier_params(&self) -> Option<(usize, f64)> {
        (self.head.kind == HeadKind::Fourier).then_some((self.head.num_frequencies, self.head.gamma))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSuccess {
    pub report: EvalReport,
    pub best_epoch: usize,
    pub best_test_loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellOutcome {
    pub cell: Cell,
    pub result: std::result::Result<CellSuccess, String>,
    #[serde(skip)]
    pub trained: Option<TrainedModel>,
}

fn run_one(cell: &Cell, dataset: &Dataset, settings: &TrainSettings, keep_model: bool) -> CellOutcome {
    let cfg = settings.train_config(cell.objective, cell.seed);
    let result = train(cell.head.clone(), dataset, &cfg).and_then(|t| {
        let report = evaluate(&t.model, dataset, cell.objective)?;
        Ok((CellSuccess { report, best_epoch: t.best_epoch, best_test_loss: t.best_test_loss }, t))
    });
    match result {
        Ok((s, t)) => CellOutcome { cell: cell.clone(), result: Ok(s), trained: keep_model.then_some(t) },
        Err(e) => CellOutcome { cell: cell.clone(), result: Err(e.to_string()), trained: None },
    }
}

/// Runs every cell on at most `jobs` threads. Outcomes come back sorted by
/// cell key regardless of scheduling; failures are kept, not dropped.
pub fn run_cells(cells: &[Cell], settings: &TrainSettings, jobs: usize, keep_models: bool) -> Result<Vec<CellOutcome>> {
    settings.validate()?;
    if jobs == 0 {
        return invalid("--jobs must be at least 1");
    }
    let mut datasets = BTreeMap::new();
    for c in cells {
        if !datasets.contains_key(&c.dataset) {
            datasets.insert(c.dataset, generate(&settings.dataset_spec(c.dataset))?);
        }
    }
    let mut sorted: Vec<&Cell> = cells.iter().collect();
    sorted.sort_by_key(|c| c.key());
    let work = |c: &&Cell| run_one(c, &datasets[&c.dataset], settings, keep_models);
    if jobs == 1 {
        return Ok(sorted.iter().map(work).collect());
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| crate::Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(|| sorted.par_iter().map(work).collect()))
}
