//! Gradient-boosted regression trees under squared loss.
//!
//! `F_0` is the target mean and stage `k` adds `gamma * h_k(x)`, where `h_k`
//! is a regression tree fit to the residuals `y - F_{k-1}(x)`. Every stage
//! sees all rows and all features, so the rows are sorted once per feature
//! and reused by every stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::tree::{Presorted, RegressionTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: Option<usize>,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            n_stages: 200,
            learning_rate: 0.1,
            max_depth: Some(3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtStage {
    pub tree: RegressionTree,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtEnsemble {
    pub base: f64,
    pub stages: Vec<GbtStage>,
    pub n_features: usize,
}

impl GbtEnsemble {
    pub fn fit(x: &[Vec<f64>], y: &[f64], config: &GbtConfig) -> Result<Self> {
        Self::fit_with_history(x, y, config).map(|(m, _)| m)
    }

    /// Also returns the training MSE before the first stage and after each
    /// stage (`n_stages + 1` values).
    pub fn fit_with_history(
        x: &[Vec<f64>],
        y: &[f64],
        config: &GbtConfig,
    ) -> Result<(Self, Vec<f64>)> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::EmptyInput("training samples"));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: y.len(),
            });
        }
        if !(0.0..=1.0).contains(&config.learning_rate) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must lie in [0, 1], got {}",
                config.learning_rate
            )));
        }
        let d = x[0].len();
        let n = y.len() as f64;
        let base = y.iter().sum::<f64>() / n;
        let mut prediction = vec![base; y.len()];
        let mse = |p: &[f64]| y.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n;
        let mut history = vec![mse(&prediction)];

        let rows: Vec<usize> = (0..x.len()).collect();
        let features: Vec<usize> = (0..d).collect();
        let presorted = Presorted::new(x, &rows, &features);

        let mut stages = Vec::with_capacity(config.n_stages);
        let mut residual = vec![0.0; y.len()];
        for _ in 0..config.n_stages {
            for ((r, &t), &p) in residual.iter_mut().zip(y).zip(&prediction) {
                *r = t - p;
            }
            let tree = RegressionTree::fit_presorted(x, &residual, &presorted, config.max_depth);
            let gamma = config.learning_rate;
            for (p, row) in prediction.iter_mut().zip(x) {
                *p += gamma * tree.predict(row);
            }
            history.push(mse(&prediction));
            stages.push(GbtStage { tree, gamma });
        }

        Ok((
            Self {
                base,
                stages,
                n_features: d,
            },
            history,
        ))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        Ok(self
            .stages
            .iter()
            .fold(self.base, |acc, s| acc + s.gamma * s.tree.predict(x)))
    }
}
