//! Feature filter for separating `continue` from `expand`.
//!
//! Features are ranked by the standardized mean gap
//! `|mean_a - mean_b| / pooled_std` (0 when the pooled std is 0). Walking the
//! ranking, a feature is dropped when its absolute Pearson correlation with an
//! already-kept feature exceeds [`REDUNDANCY_LIMIT`].

use crate::error::{Error, Result};

pub const REDUNDANCY_LIMIT: f64 = 0.95;

/// Standardized mean gap of every feature between the `true` and `false` rows.
pub fn differential_scores(x: &[Vec<f64>], labels: &[bool]) -> Vec<f64> {
    let d = x.first().map_or(0, Vec::len);
    let (pos, neg): (Vec<&Vec<f64>>, Vec<&Vec<f64>>) = {
        let mut p = Vec::new();
        let mut q = Vec::new();
        for (row, &l) in x.iter().zip(labels) {
            if l {
                p.push(row)
            } else {
                q.push(row)
            }
        }
        (p, q)
    };
    let (n1, n2) = (pos.len() as f64, neg.len() as f64);
    (0..d)
        .map(|f| {
            let m1 = pos.iter().map(|r| r[f]).sum::<f64>() / n1;
            let m2 = neg.iter().map(|r| r[f]).sum::<f64>() / n2;
            let ss = pos.iter().map(|r| (r[f] - m1).powi(2)).sum::<f64>()
                + neg.iter().map(|r| (r[f] - m2).powi(2)).sum::<f64>();
            let dof = n1 + n2 - 2.0;
            let pooled = if dof > 0.0 { (ss / dof).sqrt() } else { 0.0 };
            if pooled > 0.0 {
                (m1 - m2).abs() / pooled
            } else {
                0.0
            }
        })
        .collect()
}

fn correlation(x: &[Vec<f64>], a: usize, b: usize) -> f64 {
    let n = x.len() as f64;
    let ma = x.iter().map(|r| r[a]).sum::<f64>() / n;
    let mb = x.iter().map(|r| r[b]).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for r in x {
        let (da, db) = (r[a] - ma, r[b] - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa > 0.0 && sbb > 0.0 {
        sab / (saa * sbb).sqrt()
    } else {
        0.0
    }
}

/// Up to `k` feature indices, best first.
pub fn select_features(x: &[Vec<f64>], labels: &[bool], k: usize) -> Result<Vec<usize>> {
    if x.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: labels.len(),
        });
    }
    if !(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l)) {
        return Err(Error::InvalidParameter(
            "feature selection needs samples of both classes".into(),
        ));
    }
    let d = x[0].len();
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!(
            "k must lie in 1..={d}, got {k}"
        )));
    }
    let scores = differential_scores(x, labels);
    let mut ranked: Vec<usize> = (0..d).collect();
    ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut kept: Vec<usize> = Vec::with_capacity(k);
    for f in ranked {
        if kept.len() == k {
            break;
        }
        if kept
            .iter()
            .all(|&g| correlation(x, f, g).abs() <= REDUNDANCY_LIMIT)
        {
            kept.push(f);
        }
    }
    Ok(kept)
}
