//! Linear SVM trained by stochastic sub-gradient descent on the
//! L2-regularized hinge loss
//! `reg/2 * |w|^2 + mean(max(0, 1 - y (w.z + b)))`,
//! where `z` is the z-scored projection of `x` onto the selected features.
//! Epoch `e` (0-based) uses step `step / sqrt(e + 1)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub epochs: usize,
    pub step: f64,
    pub reg: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            step: 0.01,
            reg: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub selected: Vec<usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Per selected feature; a zero scale maps that feature to 0.
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl LinearSvm {
    /// `labels[i]` is the positive class flag of row `i`.
    pub fn fit(
        x: &[Vec<f64>],
        labels: &[bool],
        selected: &[usize],
        config: &SvmConfig,
        seed: u64,
    ) -> Result<Self> {
        Self::fit_with_history(x, labels, selected, config, seed).map(|(m, _)| m)
    }

    /// Also returns the objective measured after every epoch.
    pub fn fit_with_history(
        x: &[Vec<f64>],
        labels: &[bool],
        selected: &[usize],
        config: &SvmConfig,
        seed: u64,
    ) -> Result<(Self, Vec<f64>)> {
        if x.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: labels.len(),
            });
        }
        if !(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l)) {
            return Err(Error::InvalidParameter(
                "SVM training needs samples of both classes".into(),
            ));
        }
        if selected.is_empty() {
            return Err(Error::InvalidParameter(
                "SVM needs at least one feature".into(),
            ));
        }
        let d = x[0].len();
        if let Some(&f) = selected.iter().find(|&&f| f >= d) {
            return Err(Error::InvalidParameter(format!(
                "feature index {f} out of range for {d} features"
            )));
        }

        let n = x.len() as f64;
        let k = selected.len();
        let mut mean = vec![0.0; k];
        let mut scale = vec![0.0; k];
        for (j, &f) in selected.iter().enumerate() {
            mean[j] = x.iter().map(|r| r[f]).sum::<f64>() / n;
            let var = x.iter().map(|r| (r[f] - mean[j]).powi(2)).sum::<f64>() / n;
            scale[j] = var.sqrt();
        }
        let mut model = Self {
            selected: selected.to_vec(),
            weights: vec![0.0; k],
            bias: 0.0,
            mean,
            scale,
        };
        let z: Vec<Vec<f64>> = x.iter().map(|r| model.standardize(r)).collect();
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..z.len()).collect();
        let mut history = Vec::with_capacity(config.epochs);
        for epoch in 0..config.epochs {
            let step = config.step / ((epoch + 1) as f64).sqrt();
            order.shuffle(&mut rng);
            for &i in &order {
                let margin = y[i] * model.raw_decision(&z[i]);
                for w in model.weights.iter_mut() {
                    *w -= step * config.reg * *w;
                }
                if margin < 1.0 {
                    for (w, zi) in model.weights.iter_mut().zip(&z[i]) {
                        *w += step * y[i] * zi;
                    }
                    model.bias += step * y[i];
                }
            }
            history.push(model.objective(&z, &y, config.reg));
        }
        Ok((model, history))
    }

    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        self.selected
            .iter()
            .enumerate()
            .map(|(j, &f)| {
                if self.scale[j] > 0.0 {
                    (x[f] - self.mean[j]) / self.scale[j]
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn raw_decision(&self, z: &[f64]) -> f64 {
        self.weights.iter().zip(z).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    fn objective(&self, z: &[Vec<f64>], y: &[f64], reg: f64) -> f64 {
        let hinge: f64 = z
            .iter()
            .zip(y)
            .map(|(zi, &yi)| (1.0 - yi * self.raw_decision(zi)).max(0.0))
            .sum::<f64>()
            / z.len() as f64;
        0.5 * reg * self.weights.iter().map(|w| w * w).sum::<f64>() + hinge
    }

    /// Signed distance proxy `w.z + b` on a full-width feature vector.
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.raw_decision(&self.standardize(x))
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) >= 0.0
    }
}
