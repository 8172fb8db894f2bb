use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Affine map `x -> W x + b` with `W` stored row-major (`out_dim` rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearMap {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    pub fn from_parts(in_dim: usize, out_dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != in_dim * out_dim {
            return Err(Error::DimensionMismatch { expected: in_dim * out_dim, got: weights.len() });
        }
        if bias.len() != out_dim {
            return Err(Error::DimensionMismatch { expected: out_dim, got: bias.len() });
        }
        Ok(Self { in_dim, out_dim, weights, bias })
    }

    /// Fan-in scaled uniform initialization, `U(-1/sqrt(n), 1/sqrt(n))` for
    /// both weights and biases.
    pub fn fan_in_uniform(in_dim: usize, out_dim: usize, rng: &mut SeededRng) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.uniform_range(-bound, bound)).collect();
        let bias = (0..out_dim).map(|_| rng.uniform_range(-bound, bound)).collect();
        Self { in_dim, out_dim, weights, bias }
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, got: x.len() });
        }
        let mut out = vec![0.0; self.out_dim];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked hot-path variant of [`LinearMap::apply`].
    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out.iter_mut().zip(self.weights.chunks_exact(self.in_dim).zip(&self.bias)) {
            *o = b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    /// Accumulates `dL/dW += g x^T`, `dL/db += g` into `grad` and writes
    /// `dL/dx = W^T g` into `grad_input` when requested.
    pub(crate) fn backward_into(
        &self,
        x: &[f64],
        grad_out: &[f64],
        grad: &mut LinearMap,
        grad_input: Option<&mut [f64]>,
    ) {
        for ((g, grow), gb) in grad_out
            .iter()
            .zip(grad.weights.chunks_exact_mut(self.in_dim))
            .zip(grad.bias.iter_mut())
        {
            *gb += g;
            for (gw, v) in grow.iter_mut().zip(x) {
                *gw += g * v;
            }
        }
        if let Some(gi) = grad_input {
            gi.iter_mut().for_each(|v| *v = 0.0);
            for (g, row) in grad_out.iter().zip(self.weights.chunks_exact(self.in_dim)) {
                for (d, w) in gi.iter_mut().zip(row) {
                    *d += g * w;
                }
            }
        }
    }

    pub(crate) fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.bias.iter())
    }

    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_checks_dimensions() {
        let map = LinearMap::zeros(3, 2);
        assert!(matches!(map.apply(&[1.0, 2.0]), Err(Error::DimensionMismatch { expected: 3, got: 2 })));
    }

    #[test]
    fn apply_row_major() {
        let map = LinearMap::from_parts(2, 2, vec![1.0, 2.0, 3.0, 4.0], vec![0.5, -0.5]).unwrap();
        assert_eq!(map.apply(&[1.0, 1.0]).unwrap(), vec![3.5, 6.5]);
    }
}
