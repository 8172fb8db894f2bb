//! Central-difference gradient checking of a whole model.

use crate::rng::SeededRng;

use super::model::{MlpModel, Objective, Target};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub coordinates: usize,
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, 1e-6)`.
    pub worst_relative_error: f64,
}

/// Compares backprop gradients of the summed loss over `batch` with
/// central differences of step `h` at `coordinates` random parameters.
pub fn gradient_check(
    model: &mut MlpModel,
    batch: &[([f64; 2], Target)],
    objective: Objective,
    coordinates: usize,
    h: f64,
    rng: &mut SeededRng,
) -> GradientCheck {
    let head = model.runtime_head();
    let total = |m: &MlpModel| -> f64 {
        let mut ws = m.workspace();
        batch.iter().map(|(x, t)| m.loss_and_grad(&head, x, *t, objective, &mut ws, None)).sum()
    };
    let mut grad = model.zeros_like();
    let mut ws = model.workspace();
    for (x, t) in batch {
        model.loss_and_grad(&head, x, *t, objective, &mut ws, Some(&mut grad));
    }
    let flat: Vec<f64> = grad.iter().flat_map(|g| g.weights.iter().chain(&g.bias).copied()).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..coordinates {
        let i = rng.index(flat.len());
        let orig = model.param(i);
        *model.param_mut(i) = orig + h;
        let up = total(model);
        *model.param_mut(i) = orig - h;
        let down = total(model);
        *model.param_mut(i) = orig;
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((numeric - flat[i]).abs() / numeric.abs().max(flat[i].abs()).max(1e-6));
    }
    GradientCheck { coordinates, worst_relative_error: worst }
}
