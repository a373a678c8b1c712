//! The 15 community features: eleven from the interaction network (nine
//! structural, two temporal) and four from the friendship network.
//!
//! Formulas are applied literally. In particular `Density` normalizes by
//! `|C|(|C|-1)`, so a clique scores 0.5, and `Cond = (d - Nei) / d`, so an
//! isolated clique scores 0.5 as well.

use std::collections::BTreeSet;
use std::ops::Index;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::communities::CommunityInstance;
use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionRecord, EvolutionType};
use crate::graph::{FriendshipGraph, NodeIdx, TemporalGraph};

pub const N_FEATURES: usize = 15;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "size",
    "nei",
    "d",
    "rei",
    "reo",
    "rd",
    "density",
    "extd",
    "cond",
    "active",
    "persist",
    "nsc",
    "sd",
    "sbdg",
    "density_circle",
];

/// Columns computed from the friendship network.
pub const FRIENDSHIP_FEATURES: std::ops::Range<usize> = 11..15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub const SIZE: usize = 0;
    pub const NEI: usize = 1;
    pub const DEGREE: usize = 2;
    pub const REI: usize = 3;
    pub const REO: usize = 4;
    pub const RD: usize = 5;
    pub const DENSITY: usize = 6;
    pub const EXTD: usize = 7;
    pub const COND: usize = 8;
    pub const ACTIVE: usize = 9;
    pub const PERSIST: usize = 10;
    pub const NSC: usize = 11;
    pub const SD: usize = 12;
    pub const SBDG: usize = 13;
    pub const DENSITY_CIRCLE: usize = 14;

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Copy with the friendship columns set to 0.
    pub fn without_friendship(&self) -> Self {
        let mut v = *self;
        for i in FRIENDSHIP_FEATURES {
            v.0[i] = 0.0;
        }
        v
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<&[f64]> for FeatureVector {
    type Error = Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        let arr: [f64; N_FEATURES] = values.try_into().map_err(|_| Error::DimensionMismatch {
            expected: N_FEATURES,
            actual: values.len(),
        })?;
        Ok(Self(arr))
    }
}

/// Featurizes communities of one temporal graph against one friendship graph.
/// Node names are joined across the two graphs once, up front.
pub struct Featurizer<'a> {
    graph: &'a TemporalGraph,
    friends: &'a FriendshipGraph,
    to_friend: Vec<Option<NodeIdx>>,
    from_friend: Vec<Option<NodeIdx>>,
}

impl<'a> Featurizer<'a> {
    pub fn new(graph: &'a TemporalGraph, friends: &'a FriendshipGraph) -> Self {
        let to_friend = graph
            .nodes()
            .names()
            .iter()
            .map(|n| friends.node_id(n))
            .collect();
        let from_friend = friends
            .nodes()
            .names()
            .iter()
            .map(|n| graph.node_id(n))
            .collect();
        Self {
            graph,
            friends,
            to_friend,
            from_friend,
        }
    }

    pub fn featurize(&self, c: &CommunityInstance) -> Result<FeatureVector> {
        let t = c.snapshot;
        let snap = self.graph.snapshot(t)?;
        let locals = c
            .members
            .iter()
            .map(|&v| {
                snap.local(v).ok_or_else(|| Error::NodeNotInSnapshot {
                    snapshot: t,
                    node: self
                        .graph
                        .nodes()
                        .names()
                        .get(v as usize)
                        .cloned()
                        .unwrap_or_else(|| format!("#{v}")),
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        // local positions follow global id order, so `locals` is sorted
        let in_c = |l: u32| locals.binary_search(&(l as usize)).is_ok();

        let size = c.len() as f64;
        let mut intra = 0usize;
        let mut degree_sum = 0usize;
        let mut extd = 0usize;
        for &a in &locals {
            let nbrs = snap.local_neighbors(a);
            degree_sum += nbrs.len();
            extd += nbrs.len();
            for &b in nbrs {
                extd += snap.local_neighbors(b as usize).len();
                if b as usize > a && in_c(b) {
                    intra += 1;
                }
            }
        }
        let nei = intra as f64;
        let d = degree_sum as f64;

        let mut v = [0.0; N_FEATURES];
        if !c.is_empty() {
            v[FeatureVector::SIZE] = size;
            v[FeatureVector::NEI] = nei;
            v[FeatureVector::DEGREE] = d;
            v[FeatureVector::REI] = nei / size;
            v[FeatureVector::REO] = (d - nei) / size;
            v[FeatureVector::RD] = d / size;
            v[FeatureVector::DENSITY] = if c.len() > 1 {
                nei / (size * (size - 1.0))
            } else {
                0.0
            };
            v[FeatureVector::EXTD] = extd as f64;
            v[FeatureVector::COND] = if degree_sum > 0 { (d - nei) / d } else { 0.0 };
            v[FeatureVector::ACTIVE] = self.previous_intra_edges(c) as f64 / size;
            v[FeatureVector::PERSIST] = c
                .members
                .iter()
                .map(|&m| self.graph.node_duration(m, t))
                .sum::<usize>() as f64
                / size;
            self.friendship_features(c, &mut v);
        }
        Ok(FeatureVector(v))
    }

    /// Edges of snapshot `t-1` with both endpoints in `c` (0 at `t = 0`).
    fn previous_intra_edges(&self, c: &CommunityInstance) -> usize {
        if c.snapshot == 0 {
            return 0;
        }
        let prev = &self.graph.snapshots()[c.snapshot - 1];
        c.members
            .iter()
            .filter_map(|&v| prev.local(v).map(|l| (v, l)))
            .map(|(v, l)| {
                prev.local_neighbors(l)
                    .iter()
                    .map(|&b| prev.global(b as usize))
                    .filter(|&u| u > v && c.contains(u))
                    .count()
            })
            .sum()
    }

    fn friendship_features(&self, c: &CommunityInstance, v: &mut [f64; N_FEATURES]) {
        let f = self.friends;
        let members: Vec<NodeIdx> = c
            .members
            .iter()
            .filter_map(|&m| self.to_friend[m as usize])
            .collect();
        if members.is_empty() {
            return;
        }
        let circles: BTreeSet<u32> = members.iter().map(|&m| f.circle_of(m)).collect();
        v[FeatureVector::NSC] = circles.len() as f64;

        let degree_sum: usize = members.iter().map(|&m| f.degree(m)).sum();
        v[FeatureVector::SD] = if f.d_max() > 0 {
            degree_sum as f64 / f.d_max() as f64
        } else {
            0.0
        };

        let bridged: BTreeSet<u32> = members
            .iter()
            .flat_map(|&m| f.friends(m).iter().copied())
            .filter(|&u| !self.from_friend[u as usize].is_some_and(|g| c.contains(g)))
            .map(|u| f.circle_of(u))
            .collect();
        v[FeatureVector::SBDG] = bridged.len() as f64;

        v[FeatureVector::DENSITY_CIRCLE] = members
            .iter()
            .map(|&m| f.circle_density(f.circle_of(m)))
            .sum();
    }
}

/// Featurize a single community. Prefer [`Featurizer`] for many communities.
pub fn featurize(
    c: &CommunityInstance,
    graph: &TemporalGraph,
    friends: &FriendshipGraph,
) -> Result<FeatureVector> {
    Featurizer::new(graph, friends).featurize(c)
}

/// One sample per labeled record, in record order. `Form` records are skipped.
pub fn featurize_all(
    records: &[EvolutionRecord],
    graph: &TemporalGraph,
    friends: &FriendshipGraph,
) -> Result<Vec<Sample>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("labeled set"));
    }
    let featurizer = Featurizer::new(graph, friends);
    let samples = records
        .par_iter()
        .filter(|r| r.etype != EvolutionType::Form)
        .map(|r| {
            Ok(Sample {
                snapshot: r.community.snapshot,
                community: r.community.id,
                features: featurizer.featurize(&r.community)?,
                etype: r.etype,
                extent: r.extent,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut counts = [0usize; 6];
    for s in &samples {
        if let Some(i) = s.etype.class_index() {
            counts[i] += 1;
        }
    }
    let summary: Vec<String> = EvolutionType::TRAINABLE
        .iter()
        .zip(counts)
        .map(|(t, n)| format!("{t}={n}"))
        .collect();
    info!(
        "featurized {} samples: {}",
        samples.len(),
        summary.join(" ")
    );
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::communities::LpaConfig;
    use crate::graph::Interaction;

    fn triangle_graph() -> TemporalGraph {
        TemporalGraph::ingest(
            &[
                Interaction::new("a", "b", 0.0),
                Interaction::new("b", "c", 0.0),
                Interaction::new("a", "c", 0.0),
                Interaction::new("x", "y", 0.0),
            ],
            10.0,
        )
        .unwrap()
    }

    fn community(g: &TemporalGraph, t: usize, names: &[&str]) -> CommunityInstance {
        CommunityInstance::new(t, 0, names.iter().map(|n| g.node_id(n).unwrap()).collect())
    }

    #[test]
    fn isolated_triangle() {
        let g = triangle_graph();
        let c = community(&g, 0, &["a", "b", "c"]);
        let f = featurize(&c, &g, &FriendshipGraph::empty()).unwrap();
        let expect = [
            3.0, 3.0, 6.0, 1.0, 1.0, 2.0, 0.5, 18.0, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
        ];
        assert_eq!(f.0, expect);
    }

    #[test]
    fn singleton_without_edges_is_all_zero_structure() {
        // `y` alone: one external edge, no internal ones
        let g = triangle_graph();
        let f = featurize(&community(&g, 0, &["y"]), &g, &FriendshipGraph::empty()).unwrap();
        assert_eq!(f[FeatureVector::NEI], 0.0);
        assert_eq!(f[FeatureVector::DENSITY], 0.0);
        assert_eq!(f[FeatureVector::COND], 1.0);
    }

    #[test]
    fn friendship_triangle() {
        let g = triangle_graph();
        // a, b, c each have friendship degree 2; hub h has degree 4 so d_max = 4
        let pairs = [
            ("a", "b"),
            ("b", "c"),
            ("a", "c"),
            ("h", "p"),
            ("h", "q"),
            ("h", "r"),
            ("h", "s"),
        ];
        let edges: Vec<(String, String)> = pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let assign: Vec<(String, String)> = ["a", "b", "c"]
            .iter()
            .map(|n| (n.to_string(), "tri".to_string()))
            .chain(
                ["h", "p", "q", "r", "s"]
                    .iter()
                    .map(|n| (n.to_string(), "star".to_string())),
            )
            .collect();
        let f = FriendshipGraph::ingest(&edges, Some(&assign), &LpaConfig::default()).unwrap();
        assert_eq!(f.d_max(), 4);
        let c = community(&g, 0, &["a", "b", "c"]);
        let v = featurize(&c, &g, &f).unwrap();
        assert_eq!(v[FeatureVector::NSC], 1.0);
        assert_eq!(v[FeatureVector::SD], 1.5);
        assert_eq!(v[FeatureVector::SBDG], 0.0);
        assert_eq!(v[FeatureVector::DENSITY_CIRCLE], 1.5);
    }

    #[test]
    fn social_bridge_counts_outside_circles() {
        let g = triangle_graph();
        let edges: Vec<(String, String)> = [("a", "b"), ("a", "z"), ("b", "w"), ("c", "x")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let assign: Vec<(String, String)> = [
            ("a", "1"),
            ("b", "1"),
            ("c", "1"),
            ("z", "2"),
            ("w", "2"),
            ("x", "3"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        let f = FriendshipGraph::ingest(&edges, Some(&assign), &LpaConfig::default()).unwrap();
        let v = featurize(&community(&g, 0, &["a", "b", "c"]), &g, &f).unwrap();
        // b's friend a is inside; z, w (circle 2) and x (circle 3) are outside
        assert_eq!(v[FeatureVector::SBDG], 2.0);
    }

    #[test]
    fn activeness_uses_previous_snapshot() {
        let g = TemporalGraph::ingest(
            &[
                Interaction::new("a", "b", 0.0),
                Interaction::new("b", "c", 0.0),
                Interaction::new("a", "b", 15.0),
                Interaction::new("b", "c", 15.0),
                Interaction::new("c", "a", 15.0),
            ],
            10.0,
        )
        .unwrap();
        let v = featurize(
            &community(&g, 1, &["a", "b", "c"]),
            &g,
            &FriendshipGraph::empty(),
        )
        .unwrap();
        assert_eq!(v[FeatureVector::ACTIVE], 2.0 / 3.0);
        assert_eq!(v[FeatureVector::PERSIST], 2.0);
    }

    #[test]
    fn absent_member_errors() {
        let g = triangle_graph();
        let c = CommunityInstance::new(0, 0, vec![g.node_id("a").unwrap(), 99]);
        assert!(featurize(&c, &g, &FriendshipGraph::empty()).is_err());
    }
}
