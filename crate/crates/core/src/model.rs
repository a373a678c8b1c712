//! Two-stage evolution model.
//!
//! Stage one is a random forest over the evolution types in which `continue`
//! and `expand` are merged into one class; whenever the forest votes for the
//! merged class, a linear SVM over a filtered feature subset decides between
//! the two. Stage two is a gradient-boosted regressor over the 15 features
//! followed by a one-hot of the evolution type, predicting the extent.

use std::path::Path;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::evolution::EvolutionType;
use crate::features::{FEATURE_NAMES, N_FEATURES};
use crate::learners::{
    oversample, select_features, ForestConfig, GbtConfig, GbtEnsemble, LinearSvm, RandomForest,
    SvmConfig,
};

pub const MODEL_FORMAT: &str = "commevo-ltsmodel";
pub const MODEL_VERSION: u32 = 1;

/// Width of the regressor input.
pub const AUGMENTED_WIDTH: usize = N_FEATURES + EvolutionType::TRAINABLE.len();

/// Which labels fill the one-hot block while training the regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorLabels {
    Truth,
    Predicted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtsConfig {
    pub forest: ForestConfig,
    pub gbt: GbtConfig,
    pub svm: SvmConfig,
    /// Features kept for the continue/expand refiner.
    pub select_k: usize,
    /// Merge continue/expand in the forest and refine with the SVM.
    pub hybrid: bool,
    pub regressor_labels: RegressorLabels,
}

impl Default for LtsConfig {
    fn default() -> Self {
        Self {
            forest: ForestConfig::default(),
            gbt: GbtConfig::default(),
            svm: SvmConfig::default(),
            select_k: 8,
            hybrid: true,
            regressor_labels: RegressorLabels::Truth,
        }
    }
}

/// A class of the stage-one forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestClass {
    Type(EvolutionType),
    ContinueOrExpand,
}

impl ForestClass {
    fn hybrid_classes() -> Vec<ForestClass> {
        vec![
            ForestClass::ContinueOrExpand,
            ForestClass::Type(EvolutionType::Dissolve),
            ForestClass::Type(EvolutionType::Shrink),
            ForestClass::Type(EvolutionType::Merge),
            ForestClass::Type(EvolutionType::Split),
        ]
    }

    fn flat_classes() -> Vec<ForestClass> {
        EvolutionType::TRAINABLE
            .iter()
            .map(|&t| ForestClass::Type(t))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtsModel {
    pub forest: RandomForest,
    pub forest_classes: Vec<ForestClass>,
    /// Present iff the forest has the merged class.
    pub refiner: Option<LinearSvm>,
    pub regressor: GbtEnsemble,
    /// One-hot order of the regressor's type block.
    pub encoding: Vec<EvolutionType>,
    pub feature_names: Vec<String>,
    pub config: LtsConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub etype: EvolutionType,
    pub extent: f64,
    /// Forest votes in `forest_classes` order.
    pub votes: Vec<usize>,
}

/// `x ‖ one-hot(etype)`.
pub fn augment(x: &[f64], etype: EvolutionType) -> Vec<f64> {
    let mut out = Vec::with_capacity(AUGMENTED_WIDTH);
    out.extend_from_slice(x);
    let hot = etype.class_index();
    out.extend((0..EvolutionType::TRAINABLE.len()).map(|i| if Some(i) == hot { 1.0 } else { 0.0 }));
    out
}

fn check_width(x: &[f64]) -> Result<()> {
    if x.len() == N_FEATURES {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: N_FEATURES,
            actual: x.len(),
        })
    }
}

impl LtsModel {
    pub fn train(samples: &[Sample], config: &LtsConfig, seed: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("training samples"));
        }
        if samples.iter().any(|s| s.etype == EvolutionType::Form) {
            return Err(Error::InvalidParameter(
                "form samples cannot be trained on".into(),
            ));
        }
        let mut present: Vec<EvolutionType> = samples.iter().map(|s| s.etype).collect();
        present.sort_unstable();
        present.dedup();
        if present.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 evolution types, found {}",
                present.len()
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (balance_seed, forest_seed, svm_seed): (u64, u64, u64) =
            (rng.random(), rng.random(), rng.random());

        let balanced = oversample(samples, |s| s.etype.class_index().unwrap(), balance_seed);
        let x: Vec<Vec<f64>> = balanced.iter().map(|s| s.features.0.to_vec()).collect();

        let has = |t| present.contains(&t);
        let hybrid = config.hybrid && has(EvolutionType::Continue) && has(EvolutionType::Expand);
        if config.hybrid && !hybrid {
            warn!("continue/expand refiner disabled: training data lacks one of the two types; using a 6-class forest");
        }
        let forest_classes = if hybrid {
            ForestClass::hybrid_classes()
        } else {
            ForestClass::flat_classes()
        };
        let class_of = |t: EvolutionType| -> usize {
            forest_classes
                .iter()
                .position(|&c| match c {
                    ForestClass::Type(u) => u == t,
                    ForestClass::ContinueOrExpand => {
                        t == EvolutionType::Continue || t == EvolutionType::Expand
                    }
                })
                .expect("every trainable type maps to a forest class")
        };
        let y: Vec<usize> = balanced.iter().map(|s| class_of(s.etype)).collect();
        let forest = RandomForest::fit(&x, &y, forest_classes.len(), &config.forest, forest_seed)?;

        let refiner = if hybrid {
            let (cx, cy): (Vec<Vec<f64>>, Vec<bool>) = samples
                .iter()
                .filter(|s| matches!(s.etype, EvolutionType::Continue | EvolutionType::Expand))
                .map(|s| (s.features.0.to_vec(), s.etype == EvolutionType::Expand))
                .unzip();
            let k = config.select_k.clamp(1, N_FEATURES);
            let selected = select_features(&cx, &cy, k)?;
            info!(
                "refiner features: {}",
                selected
                    .iter()
                    .map(|&f| FEATURE_NAMES[f])
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Some(LinearSvm::fit(&cx, &cy, &selected, &config.svm, svm_seed)?)
        } else {
            None
        };

        let mut model = Self {
            forest,
            forest_classes,
            refiner,
            regressor: GbtEnsemble {
                base: 0.0,
                stages: Vec::new(),
                n_features: AUGMENTED_WIDTH,
            },
            encoding: EvolutionType::TRAINABLE.to_vec(),
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            config: config.clone(),
        };

        let augmented = balanced
            .iter()
            .map(|s| {
                let label = match config.regressor_labels {
                    RegressorLabels::Truth => s.etype,
                    RegressorLabels::Predicted => model.classify(&s.features.0)?.0,
                };
                Ok(augment(&s.features.0, label))
            })
            .collect::<Result<Vec<_>>>()?;
        let targets: Vec<f64> = balanced.iter().map(|s| s.extent as f64).collect();
        model.regressor = GbtEnsemble::fit(&augmented, &targets, &config.gbt)?;
        Ok(model)
    }

    /// Stage one: evolution type plus the forest vote histogram.
    pub fn classify(&self, x: &[f64]) -> Result<(EvolutionType, Vec<usize>)> {
        check_width(x)?;
        let vote = self.forest.predict(x)?;
        let etype = match self.forest_classes[vote.class] {
            ForestClass::Type(t) => t,
            ForestClass::ContinueOrExpand => match &self.refiner {
                Some(svm) if svm.predict(x) => EvolutionType::Expand,
                Some(_) => EvolutionType::Continue,
                None => EvolutionType::Continue,
            },
        };
        Ok((etype, vote.votes))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let (etype, votes) = self.classify(x)?;
        let raw = self.regressor.predict(&augment(x, etype))?;
        let extent = match etype {
            EvolutionType::Continue => 0.0,
            EvolutionType::Dissolve => -raw.abs().round().max(1.0),
            _ => raw,
        };
        Ok(Prediction {
            etype,
            extent,
            votes,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Envelope {
            format: MODEL_FORMAT.to_owned(),
            version: MODEL_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Model(format!("corrupt or truncated model: {e}")))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(MODEL_FORMAT) => {}
            other => {
                return Err(Error::Model(format!(
                    "not a {MODEL_FORMAT} document (format tag {other:?})"
                )))
            }
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_VERSION as u64 => {}
            _ => {
                return Err(Error::ModelVersion {
                    found: value
                        .get("version")
                        .map_or_else(|| "<missing>".to_owned(), |v| v.to_string()),
                    supported: MODEL_VERSION,
                })
            }
        }
        let envelope: Envelope = serde_json::from_value(value)
            .map_err(|e| Error::Model(format!("malformed model body: {e}")))?;
        Ok(envelope.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: LtsModel,
}
