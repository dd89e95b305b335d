//! L2-regularized logistic regression on flattened feature windows.
//!
//! Objective, with `w` the feature weights and `b` the bias:
//!
//! ```text
//! L(w, b) = mean_i BCE(sigmoid(w·x_i + b), y_i) + (l2 / 2) * |w|^2
//! ```

use serde::{Deserialize, Serialize};

use super::window::FeatureWindow;
use super::TriggerError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub threshold: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-3,
            threshold: 0.5,
        }
    }
}

/// Per-term min-max bounds fitted on training windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaling {
    pub fn fit(windows: &[FeatureWindow]) -> Self {
        let n = windows.first().map_or(0, |w| w.terms.len());
        let mut min = vec![f64::INFINITY; n];
        let mut max = vec![f64::NEG_INFINITY; n];
        for row in windows.iter().flat_map(|w| &w.matrix) {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        for j in 0..n {
            if min[j] > max[j] {
                min[j] = 0.0;
                max[j] = 0.0;
            }
        }
        Scaling { min, max }
    }

    /// Flattened, scaled features. A term that was constant in training
    /// maps to 0.
    pub fn apply(&self, w: &FeatureWindow) -> Vec<f64> {
        w.matrix
            .iter()
            .flat_map(|row| {
                row.iter().enumerate().map(|(j, &v)| {
                    let span = self.max[j] - self.min[j];
                    if span > 0.0 {
                        (v - self.min[j]) / span
                    } else {
                        0.0
                    }
                })
            })
            .collect()
    }
}

/// Feature rows and 0/1 targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Design {
    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Objective value and its gradient. `params` holds the feature weights
/// followed by the bias; the bias is not regularized.
pub fn loss_and_gradient(params: &[f64], design: &Design, l2: f64) -> (f64, Vec<f64>) {
    let d = params.len() - 1;
    let n = design.x.len().max(1) as f64;
    let mut grad = vec![0.0; d + 1];
    let mut loss = 0.0;
    for (x, &y) in design.x.iter().zip(&design.y) {
        let z = params[d] + x.iter().zip(params).map(|(a, b)| a * b).sum::<f64>();
        // BCE(sigmoid(z), y) = softplus(z) - y z
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += r * xi;
        }
        grad[d] += r;
    }
    loss /= n;
    for g in &mut grad {
        *g /= n;
    }
    let mut norm2 = 0.0;
    for j in 0..d {
        norm2 += params[j] * params[j];
        grad[j] += l2 * params[j];
    }
    (loss + 0.5 * l2 * norm2, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerModel {
    pub terms: Vec<String>,
    pub window: usize,
    /// `window * terms.len()` feature weights followed by the bias.
    pub weights: Vec<f64>,
    pub scaling: Scaling,
    pub hyperparameters: Hyperparameters,
}

impl TriggerModel {
    pub fn zero(terms: Vec<String>, window: usize, hyperparameters: Hyperparameters) -> Self {
        let n = terms.len();
        TriggerModel {
            weights: vec![0.0; window * n + 1],
            scaling: Scaling {
                min: vec![0.0; n],
                max: vec![0.0; n],
            },
            terms,
            window,
            hyperparameters,
        }
    }

    pub fn score(&self, w: &FeatureWindow) -> Result<f64, TriggerError> {
        let x = self.scaling.apply(w);
        let d = self.weights.len() - 1;
        if x.len() != d {
            return Err(TriggerError::ShapeMismatch {
                expected: d,
                found: x.len(),
            });
        }
        Ok(self.weights[d] + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn fires(&self, w: &FeatureWindow) -> Result<bool, TriggerError> {
        Ok(predict(self, w)? >= self.hyperparameters.threshold)
    }
}

pub fn predict(model: &TriggerModel, w: &FeatureWindow) -> Result<f64, TriggerError> {
    model.score(w).map(sigmoid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Objective before the first epoch and after each one.
    pub loss_history: Vec<f64>,
    /// Step size in effect at the end (halved whenever a step would have
    /// increased the objective).
    pub final_rate: f64,
}

/// Full-batch gradient descent from zero weights.
pub fn train(
    windows: &[FeatureWindow],
    hp: &Hyperparameters,
) -> Result<(TriggerModel, TrainReport), TriggerError> {
    let positives = windows.iter().filter(|w| w.label).count();
    let negatives = windows.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(TriggerError::SingleClass {
            positives,
            negatives,
        });
    }
    let terms = windows[0].terms.clone();
    let window = windows[0].window;
    let scaling = Scaling::fit(windows);
    let design = Design {
        x: windows.iter().map(|w| scaling.apply(w)).collect(),
        y: windows.iter().map(|w| if w.label { 1.0 } else { 0.0 }).collect(),
    };
    let (params, report) = descend(&design, hp);
    Ok((
        TriggerModel {
            terms,
            window,
            weights: params,
            scaling,
            hyperparameters: *hp,
        },
        report,
    ))
}

/// Gradient descent on a prepared design matrix.
pub fn descend(design: &Design, hp: &Hyperparameters) -> (Vec<f64>, TrainReport) {
    let mut params = vec![0.0; design.dim() + 1];
    let mut rate = hp.learning_rate;
    let (mut loss, mut grad) = loss_and_gradient(&params, design, hp.l2);
    let mut history = vec![loss];
    for _ in 0..hp.epochs {
        loop {
            let cand: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - rate * g).collect();
            let (l, g) = loss_and_gradient(&cand, design, hp.l2);
            if l <= loss || rate < 1e-12 {
                if l <= loss {
                    params = cand;
                    loss = l;
                    grad = g;
                }
                break;
            }
            rate *= 0.5;
        }
        history.push(loss);
    }
    (
        params,
        TrainReport {
            loss_history: history,
            final_rate: rate,
        },
    )
}
