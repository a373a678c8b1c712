use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::tree::ClassificationTree;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features drawn with replacement per tree; duplicates collapse.
    pub feature_sample_size: usize,
    pub max_depth: Option<usize>,
    /// Also resample training rows with replacement per tree.
    pub row_bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            feature_sample_size: 4,
            max_depth: Some(12),
            row_bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<ClassificationTree>,
    pub feature_subsets: Vec<Vec<usize>>,
    pub n_classes: usize,
    pub n_features: usize,
}

/// Plurality class plus the full vote histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestVote {
    pub class: usize,
    pub votes: Vec<usize>,
}

impl RandomForest {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        config: &ForestConfig,
        seed: u64,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput("training samples"));
        }
        let d = x[0].len();
        if config.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
        }
        if config.feature_sample_size == 0 || config.feature_sample_size > d {
            return Err(Error::InvalidParameter(format!(
                "feature_sample_size must lie in 1..={d}, got {}",
                config.feature_sample_size
            )));
        }

        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let tree_seeds: Vec<u64> = (0..config.n_trees).map(|_| master.random()).collect();
        let n = x.len();

        let fitted = tree_seeds
            .par_iter()
            .map(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let mut features: Vec<usize> = (0..config.feature_sample_size)
                    .map(|_| rng.random_range(0..d))
                    .collect();
                features.sort_unstable();
                features.dedup();
                let rows: Vec<usize> = if config.row_bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let tree = ClassificationTree::fit_rows(
                    x,
                    y,
                    n_classes,
                    &rows,
                    &features,
                    config.max_depth,
                )?;
                Ok((tree, features))
            })
            .collect::<Result<Vec<_>>>()?;

        let (trees, feature_subsets) = fitted.into_iter().unzip();
        Ok(Self {
            trees,
            feature_subsets,
            n_classes,
            n_features: d,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<ForestVote> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        Ok(ForestVote {
            class: plurality(&votes),
            votes,
        })
    }
}

/// Index of the largest count; the smallest index wins ties.
pub fn plurality(votes: &[usize]) -> usize {
    let mut best = 0;
    for (i, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = i;
        }
    }
    best
}
