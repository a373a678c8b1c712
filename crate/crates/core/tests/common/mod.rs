#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use commevo::dataset::Sample;
use commevo::features::{FeatureVector, N_FEATURES};
use commevo::graph::Interaction;
use commevo::EvolutionType;

// ---------------------------------------------------------------------------
// Random worlds and a brute-force feature oracle working on raw names.

#[derive(Debug, Clone)]
pub struct RawWorld {
    pub events: Vec<(String, String, f64)>,
    pub window: f64,
    pub friend_edges: Vec<(String, String)>,
    /// Every friendship node is assigned.
    pub circles: Vec<(String, String)>,
    /// (snapshot, community id, members)
    pub communities: Vec<(usize, u64, Vec<String>)>,
}

impl RawWorld {
    pub fn interactions(&self) -> Vec<Interaction> {
        self.events
            .iter()
            .map(|(a, b, t)| Interaction::new(a.clone(), b.clone(), *t))
            .collect()
    }
}

pub fn random_world(rng: &mut ChaCha8Rng) -> RawWorld {
    let n_nodes = rng.random_range(2..=50);
    let name = |i: usize| format!("v{i}");
    let n_windows = rng.random_range(1..=4);
    let window = 10.0;
    let p = rng.random_range(0.02..0.3);
    let mut events = Vec::new();
    for k in 0..n_windows {
        for a in 0..n_nodes {
            for b in 0..n_nodes {
                if a != b && rng.random_bool(p / 2.0) {
                    let t = (k * 10 + rng.random_range(0..10)) as f64;
                    events.push((name(a), name(b), t));
                }
            }
        }
    }
    if events.is_empty() {
        events.push((name(0), name(1), 0.0));
    }
    // occasional self-loops and duplicates
    if rng.random_bool(0.5) {
        let e = events[0].clone();
        events.push(e.clone());
        events.push((e.0.clone(), e.0.clone(), e.2));
    }

    // friendship over a random subset plus a few outsiders
    let mut friend_nodes: Vec<String> = (0..n_nodes)
        .filter(|_| rng.random_bool(0.7))
        .map(name)
        .collect();
    for i in 0..rng.random_range(0..5) {
        friend_nodes.push(format!("outsider{i}"));
    }
    let mut friend_edges = Vec::new();
    let q = rng.random_range(0.05..0.4);
    for i in 0..friend_nodes.len() {
        for j in i + 1..friend_nodes.len() {
            if rng.random_bool(q) {
                friend_edges.push((friend_nodes[i].clone(), friend_nodes[j].clone()));
            }
        }
    }
    let mut endpoints: BTreeSet<String> = BTreeSet::new();
    for (a, b) in &friend_edges {
        endpoints.insert(a.clone());
        endpoints.insert(b.clone());
    }
    let n_circles = rng.random_range(1..=4);
    let circles = endpoints
        .into_iter()
        .map(|v| (v, format!("c{}", rng.random_range(0..n_circles))))
        .collect();

    // random partition of every snapshot's present nodes
    let t0 = events.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
    let mut present: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (a, b, t) in &events {
        if a != b {
            let k = ((t - t0) / window).floor() as usize;
            present.entry(k).or_default().insert(a.clone());
            present.entry(k).or_default().insert(b.clone());
        }
    }
    let mut communities = Vec::new();
    for (k, nodes) in present {
        let groups = rng.random_range(1..=nodes.len().min(6));
        let mut members: Vec<Vec<String>> = vec![Vec::new(); groups];
        for v in nodes {
            members[rng.random_range(0..groups)].push(v);
        }
        for (g, m) in members.into_iter().enumerate() {
            if !m.is_empty() {
                communities.push((k, 100 + g as u64 * 7, m));
            }
        }
    }

    RawWorld {
        events,
        window,
        friend_edges,
        circles,
        communities,
    }
}

fn undirected(a: &str, b: &str) -> (String, String) {
    if a < b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

/// Edge set of every snapshot, recomputed from the raw events.
pub fn raw_snapshots(world: &RawWorld) -> Vec<HashSet<(String, String)>> {
    let t0 = world
        .events
        .iter()
        .map(|e| e.2)
        .fold(f64::INFINITY, f64::min);
    let mut out: Vec<HashSet<(String, String)>> = Vec::new();
    for (a, b, t) in &world.events {
        let k = ((t - t0) / world.window).floor() as usize;
        while out.len() <= k {
            out.push(HashSet::new());
        }
        if a != b {
            out[k].insert(undirected(a, b));
        }
    }
    out
}

fn degree(edges: &HashSet<(String, String)>, v: &str) -> usize {
    edges.iter().filter(|(a, b)| a == v || b == v).count()
}

fn neighbours<'a>(edges: &'a HashSet<(String, String)>, v: &str) -> Vec<&'a str> {
    edges
        .iter()
        .filter_map(|(a, b)| {
            if a == v {
                Some(b.as_str())
            } else if b == v {
                Some(a.as_str())
            } else {
                None
            }
        })
        .collect()
}

fn intra(edges: &HashSet<(String, String)>, c: &HashSet<&str>) -> usize {
    edges
        .iter()
        .filter(|(a, b)| c.contains(a.as_str()) && c.contains(b.as_str()))
        .count()
}

pub fn oracle_features(world: &RawWorld, t: usize, members: &[String]) -> [f64; N_FEATURES] {
    let snaps = raw_snapshots(world);
    let e = &snaps[t];
    let c: HashSet<&str> = members.iter().map(String::as_str).collect();
    let n = members.len() as f64;

    let nei = intra(e, &c) as f64;
    let d: f64 = members.iter().map(|v| degree(e, v) as f64).sum();
    let extd: f64 = members
        .iter()
        .map(|v| {
            degree(e, v) as f64
                + neighbours(e, v)
                    .iter()
                    .map(|u| degree(e, u) as f64)
                    .sum::<f64>()
        })
        .sum();
    let active = if t == 0 {
        0.0
    } else {
        intra(&snaps[t - 1], &c) as f64 / n
    };
    let persist: f64 = members
        .iter()
        .map(|v| {
            (0..=t)
                .filter(|&k| snaps[k].iter().any(|(a, b)| a == v || b == v))
                .count() as f64
        })
        .sum::<f64>()
        / n;

    // friendship side
    let fe: HashSet<(String, String)> = world
        .friend_edges
        .iter()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| undirected(a, b))
        .collect();
    let fnodes: HashSet<&str> = fe
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect();
    let circle: HashMap<&str, &str> = world
        .circles
        .iter()
        .map(|(v, c)| (v.as_str(), c.as_str()))
        .collect();
    let d_max = fnodes.iter().map(|v| degree(&fe, v)).max().unwrap_or(0);
    let circle_density = |id: &str| {
        let m: HashSet<&str> = circle
            .iter()
            .filter(|(_, c)| **c == id)
            .map(|(v, _)| *v)
            .collect();
        let k = m.len() as f64;
        if m.len() < 2 {
            0.0
        } else {
            intra(&fe, &m) as f64 / (k * (k - 1.0))
        }
    };
    let fmembers: Vec<&str> = members
        .iter()
        .map(String::as_str)
        .filter(|v| fnodes.contains(v))
        .collect();
    let nsc = fmembers
        .iter()
        .map(|v| circle[v])
        .collect::<HashSet<_>>()
        .len() as f64;
    let sd = if d_max == 0 {
        0.0
    } else {
        fmembers.iter().map(|v| degree(&fe, v) as f64).sum::<f64>() / d_max as f64
    };
    let sbdg = fmembers
        .iter()
        .flat_map(|v| neighbours(&fe, v))
        .filter(|u| !c.contains(u))
        .map(|u| circle[u])
        .collect::<HashSet<_>>()
        .len() as f64;
    let density_circle: f64 = fmembers.iter().map(|v| circle_density(circle[v])).sum();

    [
        n,
        nei,
        d,
        nei / n,
        (d - nei) / n,
        d / n,
        if members.len() > 1 {
            nei / (n * (n - 1.0))
        } else {
            0.0
        },
        extd,
        if d > 0.0 { (d - nei) / d } else { 0.0 },
        active,
        persist,
        nsc,
        sd,
        sbdg,
        density_circle,
    ]
}

pub const INTEGER_FEATURES: [usize; 6] = [0, 1, 2, 7, 11, 13];

/// `None` when every entry agrees; otherwise the first offending column.
pub fn compare_features(got: &[f64; N_FEATURES], want: &[f64; N_FEATURES]) -> Option<usize> {
    (0..N_FEATURES).find(|&j| {
        if INTEGER_FEATURES.contains(&j) {
            got[j] != want[j]
        } else {
            (got[j] - want[j]).abs() > 1e-12 * want[j].abs().max(1.0)
        }
    })
}

// ---------------------------------------------------------------------------
// Exhaustive split oracle.

pub fn gini_oracle(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    1.0 - counts
        .values()
        .map(|&c| (c as f64 / n).powi(2))
        .sum::<f64>()
}

/// Weighted child Gini of cutting `rows` at `x[f] < thr`; `None` if a side is empty.
pub fn split_score(x: &[Vec<f64>], y: &[usize], rows: &[usize], f: usize, thr: f64) -> Option<f64> {
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][f] < thr);
    if l.is_empty() || r.is_empty() {
        return None;
    }
    let ly: Vec<usize> = l.iter().map(|&i| y[i]).collect();
    let ry: Vec<usize> = r.iter().map(|&i| y[i]).collect();
    let n = rows.len() as f64;
    Some(ly.len() as f64 / n * gini_oracle(&ly) + ry.len() as f64 / n * gini_oracle(&ry))
}

/// Minimum over every feature in `allowed` and every cut between
/// consecutive distinct values.
pub fn best_split_oracle(
    x: &[Vec<f64>],
    y: &[usize],
    rows: &[usize],
    allowed: &[usize],
) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &f in allowed {
        let mut vals: Vec<f64> = rows.iter().map(|&i| x[i][f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            if let Some(s) = split_score(x, y, rows, f, (w[0] + w[1]) / 2.0) {
                best = Some(best.map_or(s, |b: f64| b.min(s)));
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Scripted clique evolution.

#[derive(Debug, Clone)]
pub enum Op {
    Keep(&'static str),
    Grow(&'static str, usize),
    Shrink(&'static str, usize),
    Merge(&'static str, &'static str, &'static str),
    /// Split into two parts; the first takes `usize` nodes.
    Split(&'static str, usize, &'static str, &'static str),
    Dissolve(&'static str),
    Form(&'static str, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedEvent {
    pub snapshot: usize,
    pub members: Vec<String>,
    pub etype: EvolutionType,
    pub extent: i64,
}

pub struct Script {
    pub events: Vec<Interaction>,
    pub window: f64,
    pub expected: Vec<ExpectedEvent>,
    pub n_snapshots: usize,
}

/// Plays `steps` (one list per transition) from the `initial` cliques.
/// Every live community must be named by exactly one op per step.
pub fn play_script(initial: &[(&'static str, usize)], steps: &[Vec<Op>]) -> Script {
    let mut fresh = 0usize;
    let mut next = |k: usize| -> Vec<String> {
        let v = (fresh..fresh + k).map(|i| format!("n{i:04}")).collect();
        fresh += k;
        v
    };
    let mut live: BTreeMap<&'static str, Vec<String>> = BTreeMap::new();
    for &(name, size) in initial {
        live.insert(name, next(size));
    }
    let window = 10.0;
    let mut events = Vec::new();
    let mut expected = Vec::new();
    let mut emit = |t: usize, live: &BTreeMap<&'static str, Vec<String>>| {
        for members in live.values() {
            let mut k = 0;
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    let time = t as f64 * window + (k % 10) as f64;
                    events.push(Interaction::new(
                        members[i].clone(),
                        members[j].clone(),
                        time,
                    ));
                    k += 1;
                }
            }
        }
    };
    emit(0, &live);
    for (t, ops) in steps.iter().enumerate() {
        let mut touched: BTreeSet<&str> = BTreeSet::new();
        let mut after: BTreeMap<&'static str, Vec<String>> = BTreeMap::new();
        let mut record = |members: &Vec<String>, etype, extent| {
            let mut m = members.clone();
            m.sort();
            expected.push(ExpectedEvent {
                snapshot: t,
                members: m,
                etype,
                extent,
            });
        };
        for op in ops {
            match *op {
                Op::Keep(a) => {
                    let m = live[a].clone();
                    record(&m, EvolutionType::Continue, 0);
                    touched.insert(a);
                    after.insert(a, m);
                }
                Op::Grow(a, k) => {
                    let mut m = live[a].clone();
                    record(&m, EvolutionType::Expand, k as i64);
                    m.extend(next(k));
                    touched.insert(a);
                    after.insert(a, m);
                }
                Op::Shrink(a, k) => {
                    let m = live[a].clone();
                    assert!(2 * k < m.len(), "shrink must keep a majority");
                    record(&m, EvolutionType::Shrink, -(k as i64));
                    touched.insert(a);
                    after.insert(a, m[..m.len() - k].to_vec());
                }
                Op::Merge(a, b, into) => {
                    let (ma, mb) = (live[a].clone(), live[b].clone());
                    let total = (ma.len() + mb.len()) as i64;
                    record(&ma, EvolutionType::Merge, total - ma.len() as i64);
                    record(&mb, EvolutionType::Merge, total - mb.len() as i64);
                    touched.insert(a);
                    touched.insert(b);
                    after.insert(into, ma.into_iter().chain(mb).collect());
                }
                Op::Split(a, k, x, y) => {
                    let m = live[a].clone();
                    let largest = k.max(m.len() - k) as i64;
                    record(&m, EvolutionType::Split, largest - m.len() as i64);
                    touched.insert(a);
                    after.insert(x, m[..k].to_vec());
                    after.insert(y, m[k..].to_vec());
                }
                Op::Dissolve(a) => {
                    let m = live[a].clone();
                    record(&m, EvolutionType::Dissolve, -(m.len() as i64));
                    touched.insert(a);
                }
                Op::Form(a, k) => {
                    after.insert(a, next(k));
                }
            }
        }
        let untouched: Vec<&&str> = live.keys().filter(|k| !touched.contains(**k)).collect();
        assert!(
            untouched.is_empty(),
            "step {t} leaves {untouched:?} unscripted"
        );
        live = after;
        emit(t + 1, &live);
    }
    Script {
        events,
        window,
        expected,
        n_snapshots: steps.len() + 1,
    }
}

/// Ten snapshots exercising every trainable event type.
pub fn ten_snapshot_script() -> Script {
    use Op::*;
    play_script(
        &[("a", 5), ("b", 4), ("c", 8), ("d", 6), ("e", 3)],
        &[
            vec![
                Keep("a"),
                Grow("b", 2),
                Keep("c"),
                Shrink("d", 2),
                Keep("e"),
            ],
            vec![
                Merge("a", "b", "ab"),
                Split("c", 5, "c1", "c2"),
                Keep("d"),
                Dissolve("e"),
            ],
            vec![
                Grow("ab", 3),
                Keep("c1"),
                Grow("c2", 1),
                Shrink("d", 1),
                Form("f", 7),
            ],
            vec![
                Split("ab", 6, "ab1", "ab2"),
                Merge("c1", "c2", "cc"),
                Keep("d"),
                Keep("f"),
            ],
            vec![
                Keep("ab1"),
                Shrink("ab2", 2),
                Grow("cc", 4),
                Dissolve("d"),
                Shrink("f", 3),
            ],
            vec![
                Merge("ab1", "ab2", "g"),
                Split("cc", 6, "h", "i"),
                Keep("f"),
                Form("j", 4),
            ],
            vec![
                Shrink("g", 4),
                Keep("h"),
                Dissolve("i"),
                Grow("f", 5),
                Keep("j"),
            ],
            vec![Keep("g"), Merge("h", "j", "hj"), Split("f", 4, "f1", "f2")],
            vec![Grow("g", 2), Shrink("hj", 3), Keep("f1"), Dissolve("f2")],
        ],
    )
}

// ---------------------------------------------------------------------------
// Synthetic feature datasets.

fn sample(features: [f64; N_FEATURES], etype: EvolutionType, extent: i64, i: usize) -> Sample {
    Sample {
        snapshot: i / 100,
        community: i as u64,
        features: FeatureVector(features),
        etype,
        extent,
    }
}

/// Type is a threshold function of size and conductance; the remaining
/// structural columns follow the feature formulas from a latent
/// `Nei = 2 * size` and `d = Nei / (1 - cond)`, so several columns carry
/// the same two signals. Extents: expand `3 * size`, shrink `-2`,
/// merge `size / 2`, split `-(size / 2)`, dissolve `-size`, continue 0.
pub fn learnable_dataset(n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let size = rng.random_range(4..=60) as f64;
            let cond: f64 = rng.random_range(0.0..0.9);
            let (etype, extent) = if cond < 0.3 {
                if size < 20.0 {
                    (EvolutionType::Continue, 0)
                } else if size < 40.0 {
                    (EvolutionType::Expand, 3 * size as i64)
                } else {
                    (EvolutionType::Merge, size as i64 / 2)
                }
            } else if cond < 0.6 {
                if size < 32.0 {
                    (EvolutionType::Shrink, -2)
                } else {
                    (EvolutionType::Split, -(size as i64 / 2))
                }
            } else {
                (EvolutionType::Dissolve, -(size as i64))
            };
            let nei = 2.0 * size;
            let d = nei / (1.0 - cond);
            let f = [
                size,
                nei,
                d,
                rng.random_range(0.0..3.0),
                (d - nei) / size,
                d / size,
                rng.random_range(0.0..0.5),
                7.0 * size,
                cond,
                rng.random_range(0.0..2.0),
                rng.random_range(1.0..5.0),
                rng.random_range(0..5) as f64,
                rng.random_range(0.0..3.0),
                rng.random_range(0..5) as f64,
                rng.random_range(0.0..2.0),
            ];
            sample(f, etype, extent, i)
        })
        .collect()
}

fn band(rng: &mut ChaCha8Rng, k: usize) -> [f64; 4] {
    let s = k as f64 * 10.0 + rng.random_range(0.5..9.5);
    [s, 2.0 * s + 1.0, 7.0 * s, s.sqrt()]
}

fn noise_row(rng: &mut ChaCha8Rng) -> [f64; N_FEATURES] {
    let mut f = [0.0; N_FEATURES];
    for v in f.iter_mut() {
        *v = rng.random_range(-3.0..3.0);
    }
    f
}

/// Non-continue/expand types occupy their own band of four monotone
/// columns (0, 1, 7, 10). Continue and expand share band 0 and differ only
/// through the sign of `f3 + f6`; every other column is noise.
pub fn refiner_dataset(n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut f = noise_row(&mut rng);
            let k: usize = rng.random_range(0..6);
            let etype = match k {
                0 | 1 => {
                    if f[3] + f[6] > 0.0 {
                        EvolutionType::Expand
                    } else {
                        EvolutionType::Continue
                    }
                }
                2 => EvolutionType::Dissolve,
                3 => EvolutionType::Shrink,
                4 => EvolutionType::Merge,
                _ => EvolutionType::Split,
            };
            let b = band(&mut rng, k.saturating_sub(1));
            f[0] = b[0];
            f[1] = b[1];
            f[7] = b[2];
            f[10] = b[3];
            let extent = extent_for(etype, b[0]);
            sample(f, etype, extent, i)
        })
        .collect()
}

fn extent_for(etype: EvolutionType, size: f64) -> i64 {
    let s = size.round() as i64 + 1;
    match etype {
        EvolutionType::Continue => 0,
        EvolutionType::Expand => 2 * s,
        EvolutionType::Shrink => -3,
        EvolutionType::Merge => s,
        EvolutionType::Split => -(s / 2) - 1,
        EvolutionType::Dissolve | EvolutionType::Form => -s,
    }
}

/// Like [`refiner_dataset`] but continue and expand are separated by the
/// social degree column alone (`sd > 1.5`).
pub fn friendship_dataset(n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut f = noise_row(&mut rng);
            for v in &mut f[11..15] {
                *v = v.abs();
            }
            let k: usize = rng.random_range(0..6);
            let etype = match k {
                0 | 1 => {
                    if f[FeatureVector::SD] > 1.5 {
                        EvolutionType::Expand
                    } else {
                        EvolutionType::Continue
                    }
                }
                2 => EvolutionType::Dissolve,
                3 => EvolutionType::Shrink,
                4 => EvolutionType::Merge,
                _ => EvolutionType::Split,
            };
            let b = band(&mut rng, k.saturating_sub(1));
            f[0] = b[0];
            f[1] = b[1];
            f[7] = b[2];
            f[10] = b[3];
            let extent = extent_for(etype, b[0]);
            sample(f, etype, extent, i)
        })
        .collect()
}

pub fn zero_friendship(samples: &[Sample]) -> Vec<Sample> {
    samples
        .iter()
        .map(|s| Sample {
            features: s.features.without_friendship(),
            ..s.clone()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Large planted-community stream.

/// `n_edges` interactions among communities of 8..40 nodes that drift
/// between windows; ~90% of events are intra-community.
pub fn planted_stream(n_edges: usize, n_windows: usize, seed: u64) -> Vec<Interaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_id = 0usize;
    let mut comms: Vec<Vec<usize>> = (0..n_edges / 400 + 2)
        .map(|_| {
            let k = rng.random_range(8..40);
            next_id += k;
            (next_id - k..next_id).collect()
        })
        .collect();
    let per_window = n_edges / n_windows;
    let mut out = Vec::with_capacity(n_edges);
    for w in 0..n_windows {
        let count = if w + 1 == n_windows {
            n_edges - out.len()
        } else {
            per_window
        };
        for _ in 0..count {
            let t = w as f64 * 100.0 + rng.random_range(0.0..100.0);
            let (a, b) = if rng.random_bool(0.9) {
                let c = &comms[rng.random_range(0..comms.len())];
                (
                    c[rng.random_range(0..c.len())],
                    c[rng.random_range(0..c.len())],
                )
            } else {
                (rng.random_range(0..next_id), rng.random_range(0..next_id))
            };
            out.push(Interaction::new(format!("u{a}"), format!("u{b}"), t));
        }
        // drift
        for c in comms.iter_mut() {
            match rng.random_range(0..6) {
                0 => {
                    let k = rng.random_range(1..5);
                    c.extend(next_id..next_id + k);
                    next_id += k;
                }
                1 if c.len() > 10 => {
                    let k = rng.random_range(1..4);
                    c.truncate(c.len() - k);
                }
                2 => c.shuffle(&mut rng),
                _ => {}
            }
        }
    }
    out
}

/// Peak resident set size of this process in KiB, when the platform reports it.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find(|l| l.starts_with("VmHWM:"))?
        .split_whitespace()
        .nth(1)?
        .parse()
        .ok()
}
