//! Evolution labels from matching communities of consecutive snapshots.
//!
//! A front community `C` (snapshot `t`) matches a back community `C'`
//! (snapshot `t+1`) when `|C ∩ C'| / min(|C|, |C'|) >= kappa`. Labels are
//! assigned with priority dissolve > split > merge > size comparison, and the
//! extent is always the node-count change towards the aligned successor.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::communities::{CommunityInstance, Partition};
use crate::error::{Error, Result};
use crate::graph::{NodeIdx, TemporalGraph};

pub const DEFAULT_KAPPA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionType {
    Continue,
    Dissolve,
    Expand,
    Shrink,
    Merge,
    Split,
    Form,
}

impl EvolutionType {
    /// The six predictable types, in one-hot/class-index order. `Form` is
    /// labeled but never trained on or predicted.
    pub const TRAINABLE: [EvolutionType; 6] = [
        EvolutionType::Continue,
        EvolutionType::Dissolve,
        EvolutionType::Expand,
        EvolutionType::Shrink,
        EvolutionType::Merge,
        EvolutionType::Split,
    ];

    pub fn class_index(self) -> Option<usize> {
        Self::TRAINABLE.iter().position(|&t| t == self)
    }

    pub fn from_class_index(i: usize) -> Option<Self> {
        Self::TRAINABLE.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EvolutionType::Continue => "continue",
            EvolutionType::Dissolve => "dissolve",
            EvolutionType::Expand => "expand",
            EvolutionType::Shrink => "shrink",
            EvolutionType::Merge => "merge",
            EvolutionType::Split => "split",
            EvolutionType::Form => "form",
        }
    }
}

impl fmt::Display for EvolutionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvolutionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "continue" => EvolutionType::Continue,
            "dissolve" => EvolutionType::Dissolve,
            "expand" => EvolutionType::Expand,
            "shrink" => EvolutionType::Shrink,
            "merge" => EvolutionType::Merge,
            "split" => EvolutionType::Split,
            "form" => EvolutionType::Form,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown evolution type `{other}`"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub community: CommunityInstance,
    pub etype: EvolutionType,
    /// Signed node-count change towards the aligned successor.
    pub extent: i64,
    /// Ids of the matched successor communities, ascending.
    pub matched: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchOutcome {
    /// One record per front community, in front order.
    pub records: Vec<EvolutionRecord>,
    /// `Form` records for back communities nobody matched.
    pub formed: Vec<EvolutionRecord>,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "kappa must lie in (0, 1], got {kappa}"
        )))
    }
}

pub fn match_communities(
    front: &[CommunityInstance],
    back: &[CommunityInstance],
    kappa: f64,
) -> Result<MatchOutcome> {
    check_kappa(kappa)?;

    let mut owner: HashMap<NodeIdx, usize> = HashMap::new();
    for (j, c) in back.iter().enumerate() {
        for &v in &c.members {
            owner.insert(v, j);
        }
    }

    let matches: Vec<Vec<usize>> = front
        .iter()
        .map(|c| {
            let mut overlap: HashMap<usize, usize> = HashMap::new();
            for v in &c.members {
                if let Some(&j) = owner.get(v) {
                    *overlap.entry(j).or_default() += 1;
                }
            }
            let mut m: Vec<usize> = overlap
                .into_iter()
                .filter(|&(j, shared)| {
                    let smaller = c.len().min(back[j].len());
                    smaller > 0 && shared as f64 / smaller as f64 >= kappa
                })
                .map(|(j, _)| j)
                .collect();
            m.sort_unstable_by_key(|&j| (back[j].id, j));
            m
        })
        .collect();

    let mut claimed = vec![0usize; back.len()];
    for m in &matches {
        for &j in m {
            claimed[j] += 1;
        }
    }

    let records = front
        .iter()
        .zip(&matches)
        .map(|(c, m)| {
            let size = c.len() as i64;
            let (etype, extent) = match m.as_slice() {
                [] => (EvolutionType::Dissolve, -size),
                [j] => {
                    let succ = back[*j].len() as i64;
                    let etype = if claimed[*j] >= 2 {
                        EvolutionType::Merge
                    } else if succ == size {
                        EvolutionType::Continue
                    } else if succ > size {
                        EvolutionType::Expand
                    } else {
                        EvolutionType::Shrink
                    };
                    (etype, succ - size)
                }
                many => {
                    // largest successor, smallest id on ties
                    let aligned = many
                        .iter()
                        .copied()
                        .min_by_key(|&j| (std::cmp::Reverse(back[j].len()), back[j].id))
                        .unwrap();
                    (EvolutionType::Split, back[aligned].len() as i64 - size)
                }
            };
            EvolutionRecord {
                community: c.clone(),
                etype,
                extent,
                matched: m.iter().map(|&j| back[j].id).collect(),
            }
        })
        .collect();

    let formed = back
        .iter()
        .zip(&claimed)
        .filter(|(_, &n)| n == 0)
        .map(|(c, _)| EvolutionRecord {
            community: c.clone(),
            etype: EvolutionType::Form,
            extent: c.len() as i64,
            matched: Vec::new(),
        })
        .collect();

    Ok(MatchOutcome { records, formed })
}

/// Evolution records of every community outside the final snapshot.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledSet {
    pub records: Vec<EvolutionRecord>,
    /// Audit-only; never used as training samples.
    pub formed: Vec<EvolutionRecord>,
}

impl LabeledSet {
    /// Record counts per trainable type, in [`EvolutionType::TRAINABLE`] order.
    pub fn class_counts(&self) -> [usize; 6] {
        let mut counts = [0; 6];
        for r in &self.records {
            if let Some(i) = r.etype.class_index() {
                counts[i] += 1;
            }
        }
        counts
    }
}

pub fn build_labeled_set(
    graph: &TemporalGraph,
    partition: &Partition,
    kappa: f64,
) -> Result<LabeledSet> {
    check_kappa(kappa)?;
    if graph.len() < 2 {
        return Err(Error::NothingToLabel(graph.len()));
    }
    if partition.len() != graph.len() {
        return Err(Error::InvalidParameter(format!(
            "partition covers {} snapshots, graph has {}",
            partition.len(),
            graph.len()
        )));
    }
    let outcomes = (0..graph.len() - 1)
        .into_par_iter()
        .map(|t| match_communities(&partition[t], &partition[t + 1], kappa))
        .collect::<Result<Vec<_>>>()?;
    let mut set = LabeledSet::default();
    for o in outcomes {
        set.records.extend(o.records);
        set.formed.extend(o.formed);
    }
    Ok(set)
}

/// Write `snapshot community_id etype extent` rows.
pub fn write_labels<W: Write>(mut out: W, records: &[EvolutionRecord]) -> std::io::Result<()> {
    writeln!(out, "# snapshot community_id etype extent")?;
    for r in records {
        writeln!(
            out,
            "{} {} {} {}",
            r.community.snapshot, r.community.id, r.etype, r.extent
        )?;
    }
    Ok(())
}
