//! Per-snapshot community partitions: built-in label propagation or an
//! externally computed partition file.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{for_each_record, open, Adjacency, NodeIdx, Snapshot, TemporalGraph};

/// A community inside one snapshot. Members are sorted global node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityInstance {
    pub snapshot: usize,
    pub id: u64,
    pub members: Vec<NodeIdx>,
}

impl CommunityInstance {
    pub fn new(snapshot: usize, id: u64, mut members: Vec<NodeIdx>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self {
            snapshot,
            id,
            members,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeIdx) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// Communities of every snapshot, indexed by snapshot.
pub type Partition = Vec<Vec<CommunityInstance>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpaConfig {
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for LpaConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            seed: 0,
        }
    }
}

/// Asynchronous label propagation over dense positions.
///
/// Every node starts with its own position as label. Each sweep visits nodes
/// in a freshly shuffled order and moves a node to the label held by most of
/// its neighbors, the smallest label winning ties. Sweeps stop once a full
/// pass changes nothing or after `max_iters` passes.
pub fn label_propagation(graph: &impl Adjacency, config: &LpaConfig) -> Vec<u32> {
    label_propagation_stream(graph, config, 0)
}

fn label_propagation_stream(graph: &impl Adjacency, config: &LpaConfig, stream: u64) -> Vec<u32> {
    let n = graph.node_count();
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let mut scratch: Vec<u32> = Vec::new();

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < config.max_iters.max(1) {
        sweeps += 1;
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            let neighbors = graph.neighbors(v);
            if neighbors.is_empty() {
                continue;
            }
            scratch.clear();
            scratch.extend(neighbors.iter().map(|&u| labels[u as usize]));
            scratch.sort_unstable();
            let best = plurality_min(&scratch);
            if best != labels[v] {
                labels[v] = best;
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    if converged {
        debug!("label propagation converged after {sweeps} sweeps");
    } else {
        warn!("label propagation hit the {sweeps}-sweep cap; labels frozen");
    }
    labels
}

/// Most frequent value of a sorted slice; the smallest value wins ties.
fn plurality_min(sorted: &[u32]) -> u32 {
    let mut best = sorted[0];
    let mut best_count = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best_count {
            best_count = j - i;
            best = sorted[i];
        }
        i = j;
    }
    best
}

/// Detect communities of one snapshot. Community ids are assigned in order of
/// each community's smallest member.
pub fn detect_lpa(snapshot: &Snapshot, config: &LpaConfig) -> Vec<CommunityInstance> {
    if snapshot.is_empty() {
        return Vec::new();
    }
    let labels = label_propagation_stream(snapshot, config, snapshot.index() as u64);
    let mut groups: BTreeMap<u32, Vec<NodeIdx>> = BTreeMap::new();
    for (local, &label) in labels.iter().enumerate() {
        groups
            .entry(label)
            .or_default()
            .push(snapshot.global(local));
    }
    let mut members: Vec<Vec<NodeIdx>> = groups.into_values().collect();
    members.sort_unstable_by_key(|m| m[0]);
    members
        .into_iter()
        .enumerate()
        .map(|(id, m)| CommunityInstance::new(snapshot.index(), id as u64, m))
        .collect()
}

/// [`detect_lpa`] over every snapshot, in parallel.
pub fn detect_all(graph: &TemporalGraph, config: &LpaConfig) -> Partition {
    graph
        .snapshots()
        .par_iter()
        .map(|s| detect_lpa(s, config))
        .collect()
}

/// One `snapshot community_id node_id` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionRow {
    pub snapshot: usize,
    pub community: u64,
    pub node: String,
}

pub fn read_partition_rows<R: BufRead>(reader: R) -> Result<Vec<PartitionRow>> {
    let mut rows = Vec::new();
    for_each_record(reader, |line, tokens| {
        if tokens.len() != 3 {
            return Err(Error::parse(
                line,
                format!(
                    "expected `snapshot community node`, found {} fields",
                    tokens.len()
                ),
            ));
        }
        let snapshot = tokens[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad snapshot index `{}`", tokens[0])))?;
        let community = tokens[1]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad community id `{}`", tokens[1])))?;
        rows.push(PartitionRow {
            snapshot,
            community,
            node: tokens[2].to_owned(),
        });
        Ok(())
    })?;
    Ok(rows)
}

/// Group partition rows into communities, validated against `graph`.
///
/// Rows naming a node that is not edge-incident in their snapshot are dropped
/// with a warning, and communities left empty by such drops disappear.
pub fn partition_from_rows(rows: &[PartitionRow], graph: &TemporalGraph) -> Result<Partition> {
    let mut grouped: BTreeMap<(usize, u64), Vec<NodeIdx>> = BTreeMap::new();
    for row in rows {
        let snapshot = graph.snapshot(row.snapshot)?;
        match graph.node_id(&row.node).filter(|&v| snapshot.contains(v)) {
            Some(v) => grouped
                .entry((row.snapshot, row.community))
                .or_default()
                .push(v),
            None => {
                warn!(
                    "dropping node {} from community {} of snapshot {}: not present in snapshot",
                    row.node, row.community, row.snapshot
                );
                grouped.entry((row.snapshot, row.community)).or_default();
            }
        }
    }

    let mut partition: Partition = vec![Vec::new(); graph.len()];
    let mut owner: HashMap<(usize, NodeIdx), u64> = HashMap::new();
    for ((snapshot, id), members) in grouped {
        if members.is_empty() {
            warn!("dropping community {id} of snapshot {snapshot}: no valid members");
            continue;
        }
        let community = CommunityInstance::new(snapshot, id, members);
        for &v in &community.members {
            if owner.insert((snapshot, v), id).is_some() {
                return Err(Error::OverlappingCommunities {
                    snapshot,
                    node: graph.node_name(v).to_owned(),
                });
            }
        }
        partition[snapshot].push(community);
    }
    Ok(partition)
}

pub fn load_partition(path: &Path, graph: &TemporalGraph) -> Result<Partition> {
    let rows = read_partition_rows(open(path)?)?;
    partition_from_rows(&rows, graph)
}

pub fn write_partition<W: Write>(
    mut out: W,
    graph: &TemporalGraph,
    communities: impl IntoIterator<Item = impl std::borrow::Borrow<CommunityInstance>>,
) -> std::io::Result<()> {
    for c in communities {
        let c = c.borrow();
        for &v in &c.members {
            writeln!(out, "{} {} {}", c.snapshot, c.id, graph.node_name(v))?;
        }
    }
    Ok(())
}
