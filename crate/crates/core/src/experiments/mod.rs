//! Experiment orchestration: toy training runs, frequency sweeps, the
//! density-estimation sweep and smoothness-metric validation.

mod cells;
mod commands;
mod fit;
mod output;
mod sweep;
mod validate;

pub use cells::{run_cells, Cell, CellKey, CellOutcome, CellSuccess, GroupKey, TrainSettings};
pub use commands::{run_validate_smoothness, sweep, train_toy, SweepResult, ToyResult, TrainToyConfig, PMF_SAMPLES};
pub use fit::{fit_scaling_law, ScalingFit, MAX_EXPONENT, MIN_EXPONENT, RELATIVE_RESIDUAL_THRESHOLD};
pub use output::{ArtifactWriter, LineChart, VERSION};
pub use sweep::{cells_csv, scaling_fits, summarize, FitRecord, GroupSummary, SweepSpec};
pub use validate::{
    noise_bootstrap, square_wave_sweep, validate_smoothness, NoiseReport, NoiseStats, SquareWaveReport, ValidationOptions,
    ValidationReport,
};
