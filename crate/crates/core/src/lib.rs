pub mod binning;
pub mod canonical;
pub mod experiments;
pub mod error;
pub mod fourier;
pub mod linear;
pub mod rng;
pub mod smoothness;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
