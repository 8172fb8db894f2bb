//! A small MLP trained on the synthetic datasets with one of four heads.

mod eval;
mod gmm;
mod gradcheck;
mod model;
mod train;

pub use eval::{evaluate, evaluate_with, kl_divergence, AggregateReport, EvalReport, MeanStd, DENSITY_KL_GRID};
pub use gradcheck::{gradient_check, GradientCheck};
pub use gmm::{gmm_head_forward, GmmBasis, GmmParams, GMM_RAW_DIM, GMM_STD_FLOOR};
pub use model::{
    floor_and_renormalize, Head, HeadKind, HeadSpec, MlpModel, Objective, Target, Workspace, DEFAULT_HIDDEN, INPUT_DIM,
};
pub use train::{examples, mean_loss, train, train_model, EpochRecord, Example, TrainConfig, TrainedModel};
