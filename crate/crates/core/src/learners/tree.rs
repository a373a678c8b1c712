//! Binary decision trees for classification (Gini) and regression (squared
//! error).
//!
//! Candidate thresholds are midpoints between consecutive distinct values and
//! a sample goes left when `x[feature] < threshold`. A feature used by an
//! ancestor is never split on again along the same path, so a tree is at most
//! as deep as its number of allowed features.

use std::collections::HashMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound(serialize = "L: Serialize", deserialize = "L: DeserializeOwned"))]
pub enum Node<L> {
    Leaf {
        value: L,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node<L>>,
        right: Box<Node<L>>,
    },
}

impl<L> Node<L> {
    pub fn leaf_for(&self, x: &[f64]) -> &L {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] < *threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }

    /// Feature sequences of every root-to-leaf path.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        fn walk<L>(node: &Node<L>, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            match node {
                Node::Leaf { .. } => out.push(prefix.clone()),
                Node::Split {
                    feature,
                    left,
                    right,
                    ..
                } => {
                    prefix.push(*feature);
                    walk(left, prefix, out);
                    walk(right, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Gini impurity `1 - Σ p_j²` of a label multiset.
pub fn gini(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("gini of an empty subset"));
    }
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = labels.len() as f64;
    Ok(1.0
        - counts
            .values()
            .map(|&c| (c as f64 / n).powi(2))
            .sum::<f64>())
}

/// Size-weighted Gini of the two subsets induced by `x[feature] < threshold`.
/// `None` when one side would be empty.
pub fn split_gini(x: &[Vec<f64>], y: &[usize], feature: usize, threshold: f64) -> Option<f64> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (row, &l) in x.iter().zip(y) {
        if row[feature] < threshold {
            left.push(l);
        } else {
            right.push(l);
        }
    }
    if left.is_empty() || right.is_empty() {
        return None;
    }
    let n = y.len() as f64;
    Some(left.len() as f64 / n * gini(&left).ok()? + right.len() as f64 / n * gini(&right).ok()?)
}

/// Split statistics for one kind of target.
pub(crate) trait Target {
    type Acc: Clone;
    type Leaf;

    fn empty(&self) -> Self::Acc;
    fn push(&self, acc: &mut Self::Acc, row: usize);
    /// `total - part`.
    fn minus(&self, total: &Self::Acc, part: &Self::Acc) -> Self::Acc;
    /// Sample count times impurity.
    fn weighted_impurity(&self, acc: &Self::Acc) -> f64;
    fn is_pure(&self, rows: &[usize]) -> bool;
    fn leaf(&self, rows: &[usize]) -> Self::Leaf;
}

pub(crate) struct ClassTarget<'a> {
    pub labels: &'a [usize],
    pub n_classes: usize,
}

impl Target for ClassTarget<'_> {
    type Acc = (usize, Vec<usize>);
    type Leaf = Vec<f64>;

    fn empty(&self) -> Self::Acc {
        (0, vec![0; self.n_classes])
    }

    fn push(&self, acc: &mut Self::Acc, row: usize) {
        acc.0 += 1;
        acc.1[self.labels[row]] += 1;
    }

    fn minus(&self, total: &Self::Acc, part: &Self::Acc) -> Self::Acc {
        (
            total.0 - part.0,
            total.1.iter().zip(&part.1).map(|(a, b)| a - b).collect(),
        )
    }

    fn weighted_impurity(&self, acc: &Self::Acc) -> f64 {
        if acc.0 == 0 {
            return 0.0;
        }
        let n = acc.0 as f64;
        let sq: f64 = acc.1.iter().map(|&c| (c as f64) * (c as f64)).sum();
        n - sq / n
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        rows.iter().all(|&r| self.labels[r] == self.labels[rows[0]])
    }

    fn leaf(&self, rows: &[usize]) -> Vec<f64> {
        let mut dist = vec![0.0; self.n_classes];
        for &r in rows {
            dist[self.labels[r]] += 1.0;
        }
        let n = rows.len() as f64;
        dist.iter_mut().for_each(|p| *p /= n);
        dist
    }
}

pub(crate) struct ValueTarget<'a> {
    pub values: &'a [f64],
}

impl Target for ValueTarget<'_> {
    /// (count, sum, sum of squares)
    type Acc = (usize, f64, f64);
    type Leaf = f64;

    fn empty(&self) -> Self::Acc {
        (0, 0.0, 0.0)
    }

    fn push(&self, acc: &mut Self::Acc, row: usize) {
        let y = self.values[row];
        acc.0 += 1;
        acc.1 += y;
        acc.2 += y * y;
    }

    fn minus(&self, total: &Self::Acc, part: &Self::Acc) -> Self::Acc {
        (total.0 - part.0, total.1 - part.1, total.2 - part.2)
    }

    fn weighted_impurity(&self, acc: &Self::Acc) -> f64 {
        if acc.0 == 0 {
            return 0.0;
        }
        (acc.2 - acc.1 * acc.1 / acc.0 as f64).max(0.0)
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        rows.iter().all(|&r| self.values[r] == self.values[rows[0]])
    }

    fn leaf(&self, rows: &[usize]) -> f64 {
        rows.iter().map(|&r| self.values[r]).sum::<f64>() / rows.len() as f64
    }
}

/// Node rows presorted by each allowed feature.
#[derive(Debug, Clone)]
pub(crate) struct Presorted {
    pub features: Vec<usize>,
    pub orders: Vec<Vec<usize>>,
}

impl Presorted {
    pub fn new(x: &[Vec<f64>], rows: &[usize], features: &[usize]) -> Self {
        let orders = features
            .iter()
            .map(|&f| {
                let mut o = rows.to_vec();
                o.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
                o
            })
            .collect();
        Self {
            features: features.to_vec(),
            orders,
        }
    }
}

struct BestSplit {
    slot: usize,
    threshold: f64,
    score: f64,
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m <= a || m > b {
        b
    } else {
        m
    }
}

pub(crate) fn grow<T: Target>(
    x: &[Vec<f64>],
    target: &T,
    presorted: Presorted,
    max_depth: Option<usize>,
) -> Node<T::Leaf> {
    let mut used = vec![false; presorted.features.len()];
    grow_node(
        x,
        target,
        &presorted.features,
        presorted.orders,
        &mut used,
        0,
        max_depth,
    )
}

fn grow_node<T: Target>(
    x: &[Vec<f64>],
    target: &T,
    features: &[usize],
    orders: Vec<Vec<usize>>,
    used: &mut [bool],
    depth: usize,
    max_depth: Option<usize>,
) -> Node<T::Leaf> {
    let rows = match orders.first() {
        Some(o) => o,
        None => unreachable!("presorted with no features is handled by the caller"),
    };
    let make_leaf = |rows: &[usize]| Node::Leaf {
        value: target.leaf(rows),
    };
    if rows.len() < 2
        || target.is_pure(rows)
        || max_depth.is_some_and(|m| depth >= m)
        || used.iter().all(|&u| u)
    {
        return make_leaf(rows);
    }

    let n = rows.len() as f64;
    let mut total = target.empty();
    for &r in rows {
        target.push(&mut total, r);
    }
    let parent = target.weighted_impurity(&total) / n;

    let mut best: Option<BestSplit> = None;
    for (slot, &f) in features.iter().enumerate() {
        if used[slot] {
            continue;
        }
        let order = &orders[slot];
        let mut left = target.empty();
        for i in 0..order.len() - 1 {
            target.push(&mut left, order[i]);
            let (a, b) = (x[order[i]][f], x[order[i + 1]][f]);
            if a >= b {
                continue;
            }
            let right = target.minus(&total, &left);
            let score = (target.weighted_impurity(&left) + target.weighted_impurity(&right)) / n;
            let better = match &best {
                None => true,
                Some(cur) => score < cur.score - 1e-12 * cur.score.abs().max(score.abs()),
            };
            if better {
                best = Some(BestSplit {
                    slot,
                    threshold: midpoint(a, b),
                    score,
                });
            }
        }
    }

    let best = match best {
        Some(b) if b.score < parent - 1e-12 * parent.abs() => b,
        _ => return make_leaf(rows),
    };

    let f = features[best.slot];
    let (mut left_orders, mut right_orders) = (Vec::new(), Vec::new());
    for o in &orders {
        let (l, r): (Vec<usize>, Vec<usize>) =
            o.iter().partition(|&&row| x[row][f] < best.threshold);
        left_orders.push(l);
        right_orders.push(r);
    }
    drop(orders);

    used[best.slot] = true;
    let left = grow_node(x, target, features, left_orders, used, depth + 1, max_depth);
    let right = grow_node(
        x,
        target,
        features,
        right_orders,
        used,
        depth + 1,
        max_depth,
    );
    used[best.slot] = false;

    Node::Split {
        feature: f,
        threshold: best.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

fn check_rows(x: &[Vec<f64>], n_targets: usize) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptyInput("training samples"));
    }
    if n_targets != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: n_targets,
        });
    }
    let d = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.len(),
        });
    }
    Ok(d)
}

fn check_features(allowed: &[usize], d: usize) -> Result<Vec<usize>> {
    let mut allowed = allowed.to_vec();
    allowed.sort_unstable();
    allowed.dedup();
    if let Some(&f) = allowed.iter().find(|&&f| f >= d) {
        return Err(Error::InvalidParameter(format!(
            "feature index {f} out of range for {d} features"
        )));
    }
    Ok(allowed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationTree {
    pub root: Node<Vec<f64>>,
    pub n_features: usize,
    pub n_classes: usize,
}

impl ClassificationTree {
    /// Fit on every row of `x`.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        allowed: &[usize],
        max_depth: Option<usize>,
    ) -> Result<Self> {
        let rows: Vec<usize> = (0..x.len()).collect();
        Self::fit_rows(x, y, n_classes, &rows, allowed, max_depth)
    }

    /// Fit on the (possibly repeated) rows `rows` of `x`.
    pub fn fit_rows(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        rows: &[usize],
        allowed: &[usize],
        max_depth: Option<usize>,
    ) -> Result<Self> {
        let d = check_rows(x, y.len())?;
        if rows.is_empty() {
            return Err(Error::EmptyInput("training samples"));
        }
        if let Some(&bad) = y.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }
        let allowed = check_features(allowed, d)?;
        let target = ClassTarget {
            labels: y,
            n_classes,
        };
        let root = if allowed.is_empty() {
            Node::Leaf {
                value: target.leaf(rows),
            }
        } else {
            grow(x, &target, Presorted::new(x, rows, &allowed), max_depth)
        };
        Ok(Self {
            root,
            n_features: d,
            n_classes,
        })
    }

    pub fn distribution(&self, x: &[f64]) -> &[f64] {
        self.root.leaf_for(x)
    }

    /// Most probable class, the smallest index winning ties.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(self.distribution(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub root: Node<f64>,
    pub n_features: usize,
}

impl RegressionTree {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        allowed: &[usize],
        max_depth: Option<usize>,
    ) -> Result<Self> {
        let d = check_rows(x, y.len())?;
        let allowed = check_features(allowed, d)?;
        let rows: Vec<usize> = (0..x.len()).collect();
        let presorted = Presorted::new(x, &rows, &allowed);
        Ok(Self::fit_presorted(x, y, &presorted, max_depth))
    }

    /// Fit against rows/features that were already sorted, so repeated fits
    /// over the same inputs (boosting stages) skip the sort.
    pub(crate) fn fit_presorted(
        x: &[Vec<f64>],
        y: &[f64],
        presorted: &Presorted,
        max_depth: Option<usize>,
    ) -> Self {
        let target = ValueTarget { values: y };
        let root = if presorted.features.is_empty() {
            let rows: Vec<usize> = (0..x.len()).collect();
            Node::Leaf {
                value: target.leaf(&rows),
            }
        } else {
            grow(x, &target, presorted.clone(), max_depth)
        };
        Self {
            root,
            n_features: x[0].len(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        *self.root.leaf_for(x)
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
