//! Temporal interaction network and static friendship network.
//!
//! Interaction edges are undirected and unweighted. Snapshots are fixed-width
//! windows `[t0 + k*w, t0 + (k+1)*w)` anchored at the earliest event `t0`; a
//! node belongs to a snapshot only when it is incident to an edge inside that
//! window, while the node index itself is shared by every snapshot.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::communities::{label_propagation, LpaConfig};
use crate::error::{Error, Result};

/// Compact node id, shared by every snapshot of a [`TemporalGraph`].
pub type NodeIdx = u32;

/// One raw interaction event.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub src: String,
    pub dst: String,
    pub time: f64,
}

impl Interaction {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, time: f64) -> Self {
        Self {
            src: src.into(),
            dst: dst.into(),
            time,
        }
    }
}

/// Read-only neighbor access over dense `0..node_count` positions.
pub trait Adjacency {
    fn node_count(&self) -> usize;
    fn neighbors(&self, v: usize) -> &[u32];
}

/// Bidirectional map between external node names and compact ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeIndex {
    names: Vec<String>,
    lookup: HashMap<String, NodeIdx>,
}

impl NodeIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> NodeIdx {
        if let Some(&id) = self.lookup.get(name) {
            return id;
        }
        let id = self.names.len() as NodeIdx;
        self.names.push(name.to_owned());
        self.lookup.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<NodeIdx> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, id: NodeIdx) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Undirected simple graph stored as CSR over snapshot-local positions.
#[derive(Debug, Clone, PartialEq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    /// `edges` must be sorted, deduplicated `(a, b)` pairs with `a < b` over
    /// positions `0..n`.
    fn from_sorted_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(a, b) in edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0u32; offsets[n]];
        for &(a, b) in edges {
            targets[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            targets[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Self { offsets, targets }
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Interaction edges that fall into one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    index: usize,
    start: f64,
    end: f64,
    /// Edge-incident nodes, sorted by global id. Position in this vector is
    /// the node's local id.
    nodes: Vec<NodeIdx>,
    adjacency: Csr,
}

impl Snapshot {
    pub fn index(&self) -> usize {
        self.index
    }

    /// Half-open `[start, end)` time window.
    pub fn window(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn nodes(&self) -> &[NodeIdx] {
        &self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn local(&self, node: NodeIdx) -> Option<usize> {
        self.nodes.binary_search(&node).ok()
    }

    pub fn global(&self, local: usize) -> NodeIdx {
        self.nodes[local]
    }

    pub fn contains(&self, node: NodeIdx) -> bool {
        self.local(node).is_some()
    }

    /// Neighbors of a local position, as local positions.
    pub fn local_neighbors(&self, local: usize) -> &[u32] {
        self.adjacency.neighbors(local)
    }

    /// Degree of a global node in this snapshot (0 when absent).
    pub fn degree(&self, node: NodeIdx) -> usize {
        self.local(node)
            .map_or(0, |l| self.adjacency.neighbors(l).len())
    }

    pub fn has_edge(&self, u: NodeIdx, v: NodeIdx) -> bool {
        match (self.local(u), self.local(v)) {
            (Some(a), Some(b)) => self
                .adjacency
                .neighbors(a)
                .binary_search(&(b as u32))
                .is_ok(),
            _ => false,
        }
    }

    /// Every edge once, as global ids with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeIdx, NodeIdx)> + '_ {
        (0..self.nodes.len()).flat_map(move |a| {
            self.adjacency
                .neighbors(a)
                .iter()
                .filter(move |&&b| (b as usize) > a)
                .map(move |&b| (self.nodes[a], self.nodes[b as usize]))
        })
    }
}

impl Adjacency for Snapshot {
    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        self.adjacency.neighbors(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    snapshots: Vec<Snapshot>,
    nodes: NodeIndex,
    /// Sorted snapshot indices per node.
    appearance: Vec<Vec<usize>>,
    t0: f64,
    window_length: f64,
}

impl TemporalGraph {
    /// Slice a stream of timestamped interactions into fixed-width snapshots.
    pub fn ingest(events: &[Interaction], window_length: f64) -> Result<Self> {
        if !(window_length.is_finite() && window_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window length must be positive and finite, got {window_length}"
            )));
        }
        if events.is_empty() {
            return Err(Error::NoEvents);
        }
        if let Some(bad) = events.iter().find(|e| !e.time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite timestamp on edge {} {}",
                bad.src, bad.dst
            )));
        }

        let t0 = events.iter().map(|e| e.time).fold(f64::INFINITY, f64::min);
        let t_max = events
            .iter()
            .map(|e| e.time)
            .fold(f64::NEG_INFINITY, f64::max);
        let n_snapshots = ((t_max - t0) / window_length).floor() as usize + 1;

        let mut nodes = NodeIndex::new();
        let mut buckets: Vec<Vec<(NodeIdx, NodeIdx)>> = vec![Vec::new(); n_snapshots];
        for e in events {
            let u = nodes.intern(&e.src);
            let v = nodes.intern(&e.dst);
            if u == v {
                continue;
            }
            let k = (((e.time - t0) / window_length).floor() as usize).min(n_snapshots - 1);
            buckets[k].push((u.min(v), u.max(v)));
        }

        let mut appearance = vec![Vec::new(); nodes.len()];
        let snapshots = buckets
            .into_iter()
            .enumerate()
            .map(|(k, mut edges)| {
                edges.sort_unstable();
                edges.dedup();
                let mut members: Vec<NodeIdx> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
                members.sort_unstable();
                members.dedup();
                for &v in &members {
                    appearance[v as usize].push(k);
                }
                let local: Vec<(u32, u32)> = edges
                    .iter()
                    .map(|&(a, b)| {
                        (
                            members.binary_search(&a).unwrap() as u32,
                            members.binary_search(&b).unwrap() as u32,
                        )
                    })
                    .collect();
                let adjacency = Csr::from_sorted_edges(members.len(), &local);
                let start = t0 + k as f64 * window_length;
                Snapshot {
                    index: k,
                    start,
                    end: start + window_length,
                    nodes: members,
                    adjacency,
                }
            })
            .collect();

        Ok(Self {
            snapshots,
            nodes,
            appearance,
            t0,
            window_length,
        })
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn snapshot(&self, index: usize) -> Result<&Snapshot> {
        self.snapshots.get(index).ok_or(Error::SnapshotOutOfRange {
            index,
            count: self.snapshots.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn nodes(&self) -> &NodeIndex {
        &self.nodes
    }

    pub fn node_id(&self, name: &str) -> Option<NodeIdx> {
        self.nodes.get(name)
    }

    pub fn node_name(&self, id: NodeIdx) -> &str {
        self.nodes.name(id)
    }

    /// Snapshot indices in which `node` is edge-incident.
    pub fn appearance(&self, node: NodeIdx) -> &[usize] {
        self.appearance
            .get(node as usize)
            .map_or(&[][..], |a| a.as_slice())
    }

    pub fn origin(&self) -> f64 {
        self.t0
    }

    pub fn window_length(&self) -> f64 {
        self.window_length
    }

    /// Number of snapshots `k <= t` in which `node` appears.
    pub fn node_duration(&self, node: NodeIdx, t: usize) -> usize {
        self.appearance(node).partition_point(|&k| k <= t)
    }

    /// [`Self::node_duration`] by external name; unknown nodes have duration 0.
    pub fn node_duration_by_name(&self, name: &str, t: usize) -> usize {
        self.node_id(name).map_or(0, |v| self.node_duration(v, t))
    }
}

/// Static friendship network partitioned into social circles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FriendshipGraph {
    nodes: NodeIndex,
    adjacency: Vec<Vec<u32>>,
    circle_of: Vec<u32>,
    circles: Vec<Vec<u32>>,
    circle_names: Vec<String>,
    circle_density: Vec<f64>,
    d_max: usize,
}

impl FriendshipGraph {
    /// The graph used when no friendship data is available; every friendship
    /// feature evaluates to 0 against it.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build the graph and freeze its circles. Without an explicit assignment
    /// the circles come from label propagation over the friendship edges.
    /// Graph nodes missing from an explicit assignment become singleton
    /// circles.
    pub fn ingest(
        edges: &[(String, String)],
        assignment: Option<&[(String, String)]>,
        lpa: &LpaConfig,
    ) -> Result<Self> {
        let mut nodes = NodeIndex::new();
        let mut pairs = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let u = nodes.intern(a);
            let v = nodes.intern(b);
            if u != v {
                pairs.push((u.min(v), u.max(v)));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &pairs {
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let d_max = adjacency.iter().map(Vec::len).max().unwrap_or(0);

        let mut graph = Self {
            nodes,
            adjacency,
            d_max,
            ..Self::default()
        };

        let (circle_of, circle_names) = match assignment {
            Some(rows) => graph.explicit_circles(rows)?,
            None => {
                let labels = label_propagation(&graph, lpa);
                let mut remap: HashMap<u32, u32> = HashMap::new();
                let mut names = Vec::new();
                let circle_of = labels
                    .iter()
                    .map(|&l| {
                        *remap.entry(l).or_insert_with(|| {
                            names.push(names.len().to_string());
                            (names.len() - 1) as u32
                        })
                    })
                    .collect();
                (circle_of, names)
            }
        };

        let mut circles = vec![Vec::new(); circle_names.len()];
        for (v, &c) in circle_of.iter().enumerate() {
            circles[c as usize].push(v as u32);
        }
        graph.circle_density = circles.iter().map(|m| graph.induced_density(m)).collect();
        graph.circle_of = circle_of;
        graph.circles = circles;
        graph.circle_names = circle_names;
        Ok(graph)
    }

    fn explicit_circles(&self, rows: &[(String, String)]) -> Result<(Vec<u32>, Vec<String>)> {
        let unknown: Vec<String> = rows
            .iter()
            .filter(|(node, _)| self.nodes.get(node).is_none())
            .map(|(node, _)| node.clone())
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownCircleNodes(unknown));
        }
        let mut names: Vec<String> = Vec::new();
        let mut by_name: HashMap<&str, u32> = HashMap::new();
        let mut circle_of: Vec<Option<u32>> = vec![None; self.nodes.len()];
        for (node, circle) in rows {
            let id = *by_name.entry(circle.as_str()).or_insert_with(|| {
                names.push(circle.clone());
                (names.len() - 1) as u32
            });
            circle_of[self.nodes.get(node).unwrap() as usize] = Some(id);
        }
        let circle_of = circle_of
            .into_iter()
            .enumerate()
            .map(|(v, c)| {
                c.unwrap_or_else(|| {
                    names.push(format!("singleton:{}", self.nodes.name(v as NodeIdx)));
                    (names.len() - 1) as u32
                })
            })
            .collect();
        Ok((circle_of, names))
    }

    /// `intra-edges / (n (n - 1))`, 0 for circles of size < 2.
    fn induced_density(&self, members: &[u32]) -> f64 {
        let n = members.len();
        if n < 2 {
            return 0.0;
        }
        let intra: usize = members
            .iter()
            .map(|&v| {
                self.adjacency[v as usize]
                    .iter()
                    .filter(|&&u| u > v && members.binary_search(&u).is_ok())
                    .count()
            })
            .sum();
        intra as f64 / (n * (n - 1)) as f64
    }

    pub fn nodes(&self) -> &NodeIndex {
        &self.nodes
    }

    pub fn node_id(&self, name: &str) -> Option<NodeIdx> {
        self.nodes.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn friends(&self, v: NodeIdx) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: NodeIdx) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn circle_of(&self, v: NodeIdx) -> u32 {
        self.circle_of[v as usize]
    }

    pub fn circles(&self) -> &[Vec<u32>] {
        &self.circles
    }

    pub fn circle_name(&self, circle: u32) -> &str {
        &self.circle_names[circle as usize]
    }

    pub fn circle_density(&self, circle: u32) -> f64 {
        self.circle_density[circle as usize]
    }
}

impl Adjacency for FriendshipGraph {
    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }
}

/// Iterate the non-comment, non-blank lines of a whitespace-separated file as
/// `(line_number, tokens)`.
pub(crate) fn for_each_record<R: BufRead>(
    reader: R,
    mut f: impl FnMut(usize, Vec<&str>) -> Result<()>,
) -> Result<()> {
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        f(line_no, trimmed.split_whitespace().collect())?;
    }
    Ok(())
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Parse `src dst epoch_seconds` lines.
pub fn read_interactions<R: BufRead>(reader: R) -> Result<Vec<Interaction>> {
    let mut out = Vec::new();
    for_each_record(reader, |line, tokens| {
        if tokens.len() != 3 {
            return Err(Error::parse(
                line,
                format!("expected `src dst time`, found {} fields", tokens.len()),
            ));
        }
        let time: f64 = tokens[2]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad timestamp `{}`", tokens[2])))?;
        if !time.is_finite() {
            return Err(Error::parse(
                line,
                format!("non-finite timestamp `{}`", tokens[2]),
            ));
        }
        out.push(Interaction::new(tokens[0], tokens[1], time));
        Ok(())
    })?;
    Ok(out)
}

pub fn load_interactions(path: &Path) -> Result<Vec<Interaction>> {
    read_interactions(open(path)?)
}

/// Parse two-column lines (`src dst` edges or `node circle` assignments).
pub fn read_pairs<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for_each_record(reader, |line, tokens| {
        if tokens.len() != 2 {
            return Err(Error::parse(
                line,
                format!("expected 2 fields, found {}", tokens.len()),
            ));
        }
        out.push((tokens[0].to_owned(), tokens[1].to_owned()));
        Ok(())
    })?;
    Ok(out)
}

pub fn load_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    read_pairs(open(path)?)
}
