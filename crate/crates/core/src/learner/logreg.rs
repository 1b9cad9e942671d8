//! Binary logistic regression fit by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::sgns::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig { l2: 1e-4, learning_rate: 0.1, epochs: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2: f64,
}

impl LogRegModel {
    pub fn zeros(dim: usize, l2: f64) -> Self {
        LogRegModel { weights: vec![0.0; dim], bias: 0.0, l2 }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        sigmoid(self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

fn check(x: &[Vec<f64>], y: &[bool]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::Data(format!("{} feature rows but {} labels", x.len(), y.len())));
    }
    if x.len() < 2 || y.iter().all(|&l| l) || y.iter().all(|&l| !l) {
        return Err(Error::Data(
            "logistic regression needs both classes in the training data; add examples of the missing label".into(),
        ));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::Data("feature rows have differing lengths".into()));
    }
    Ok(dim)
}

/// Mean cross-entropy plus `(l2/2)‖w‖²`. The bias is not penalized.
pub fn logreg_loss(model: &LogRegModel, x: &[Vec<f64>], y: &[bool]) -> f64 {
    let mut total = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z = model.weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + model.bias;
        // -ln σ(z) for positives, -ln σ(-z) for negatives, written stably
        let s = if label { -z } else { z };
        total += if s > 0.0 { s + (-s).exp().ln_1p() } else { s.exp().ln_1p() };
    }
    let reg: f64 = model.weights.iter().map(|w| w * w).sum();
    total / x.len() as f64 + 0.5 * model.l2 * reg
}

/// Gradient of [`logreg_loss`] with respect to `(weights, bias)`.
pub fn logreg_gradient(model: &LogRegModel, x: &[Vec<f64>], y: &[bool]) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; model.weights.len()];
    let mut gb = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let err = model.probability(row) - if label { 1.0 } else { 0.0 };
        for (g, v) in gw.iter_mut().zip(row) {
            *g += err * v;
        }
        gb += err;
    }
    for (g, w) in gw.iter_mut().zip(&model.weights) {
        *g = *g / n + model.l2 * w;
    }
    (gw, gb / n)
}

/// Trains from zero weights for `config.epochs` full-batch steps.
pub fn train_logreg(x: &[Vec<f64>], y: &[bool], config: &LogRegConfig) -> Result<LogRegModel> {
    train_logreg_traced(x, y, config).map(|(m, _)| m)
}

/// Like [`train_logreg`], also returning the loss before each step and
/// after the last one (`epochs + 1` values).
pub fn train_logreg_traced(x: &[Vec<f64>], y: &[bool], config: &LogRegConfig) -> Result<(LogRegModel, Vec<f64>)> {
    let dim = check(x, y)?;
    let mut model = LogRegModel::zeros(dim, config.l2);
    let mut losses = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        losses.push(logreg_loss(&model, x, y));
        let (gw, gb) = logreg_gradient(&model, x, y);
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= config.learning_rate * g;
        }
        model.bias -= config.learning_rate * gb;
    }
    losses.push(logreg_loss(&model, x, y));
    if !model.is_finite() {
        return Err(Error::Invariant("logistic regression diverged to non-finite weights".into()));
    }
    Ok((model, losses))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn untrained_model_is_indifferent() {
        let m = LogRegModel::zeros(3, 0.0);
        assert_eq!(m.probability(&[5.0, -2.0, 1e6]), 0.5);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        let err = train_logreg(&x, &[true, true], &LogRegConfig::default()).unwrap_err();
        assert!(err.to_string().contains("both classes"));
        assert!(train_logreg(&x[..1], &[true], &LogRegConfig::default()).is_err());
    }

    #[test]
    fn loss_at_zero_is_ln2() {
        let x = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = LogRegModel::zeros(2, 0.5);
        assert!((logreg_loss(&m, &x, &[true, false]) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn extreme_margins_stay_finite() {
        let m = LogRegModel { weights: vec![1000.0], bias: 0.0, l2: 0.0 };
        let l = logreg_loss(&m, &[vec![1.0], vec![1.0]], &[false, true]);
        assert!((l - 500.0).abs() < 1e-9);
    }
}
