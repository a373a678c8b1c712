//! Run configuration read from a `key = value` file.
//!
//! ```text
//! # comments and blank lines are ignored
//! window = 1800
//! kappa = 0.5
//! n_trees = 100
//! max_depth = none
//! ```
//!
//! Recognised keys: `window`, `kappa`, `lpa_max_iters`, `n_trees`,
//! `feature_sample_size`, `max_depth`, `row_bootstrap`, `gbt_stages`,
//! `gbt_gamma`, `gbt_max_depth`, `svm_epochs`, `svm_step`, `svm_reg`,
//! `select_k`, `hybrid`, `regressor_labels` (`truth` or `predicted`),
//! `train_ratio`, `test_ratio`. Depth keys accept `none` for unlimited.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evolution::DEFAULT_KAPPA;
use crate::model::{LtsConfig, RegressorLabels};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub window: Option<f64>,
    pub kappa: f64,
    pub lpa_max_iters: usize,
    pub model: LtsConfig,
    pub train_ratio: u32,
    pub test_ratio: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            window: None,
            kappa: DEFAULT_KAPPA,
            lpa_max_iters: 100,
            model: LtsConfig::default(),
            train_ratio: 10,
            test_ratio: 1,
        }
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Config {
        line,
        message: format!("invalid value `{raw}` for `{key}`"),
    })
}

fn depth(line: usize, key: &str, raw: &str) -> Result<Option<usize>> {
    if raw.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        value(line, key, raw).map(Some)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, val) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            cfg.set(line, key.trim(), val.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        let m = &mut self.model;
        match key {
            "window" => self.window = Some(value(line, key, v)?),
            "kappa" => self.kappa = value(line, key, v)?,
            "lpa_max_iters" => self.lpa_max_iters = value(line, key, v)?,
            "n_trees" => m.forest.n_trees = value(line, key, v)?,
            "feature_sample_size" => m.forest.feature_sample_size = value(line, key, v)?,
            "max_depth" => m.forest.max_depth = depth(line, key, v)?,
            "row_bootstrap" => m.forest.row_bootstrap = value(line, key, v)?,
            "gbt_stages" => m.gbt.n_stages = value(line, key, v)?,
            "gbt_gamma" => m.gbt.learning_rate = value(line, key, v)?,
            "gbt_max_depth" => m.gbt.max_depth = depth(line, key, v)?,
            "svm_epochs" => m.svm.epochs = value(line, key, v)?,
            "svm_step" => m.svm.step = value(line, key, v)?,
            "svm_reg" => m.svm.reg = value(line, key, v)?,
            "select_k" => m.select_k = value(line, key, v)?,
            "hybrid" => m.hybrid = value(line, key, v)?,
            "regressor_labels" => {
                m.regressor_labels = match v {
                    "truth" => RegressorLabels::Truth,
                    "predicted" => RegressorLabels::Predicted,
                    _ => {
                        return Err(Error::Config {
                            line,
                            message: format!(
                                "regressor_labels must be `truth` or `predicted`, got `{v}`"
                            ),
                        })
                    }
                }
            }
            "train_ratio" => self.train_ratio = value(line, key, v)?,
            "test_ratio" => self.test_ratio = value(line, key, v)?,
            _ => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key `{key}`"),
                })
            }
        }
        Ok(())
    }
}
