//! Temporal snapshot graphs and cross-semester edge classification.
//!
//! One [`Snapshot`] holds one semester's undirected simple graph over study
//! participants, with per-edge call and text counts. Consecutive snapshots
//! define the edge classes used throughout the analysis: existing,
//! to-be-formed, and non-existing pairs for the formation task, and
//! persisting versus dissolving edges for the persistence task. Pairs with
//! an endpoint missing from either snapshot are excluded from
//! cross-semester classification so that participant churn is never counted
//! as link dissolution.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque participant identifier, stable across semesters.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(id: u32) -> Self {
        NodeId(id)
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for NodeId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.parse::<u32>().map(NodeId)
    }
}

/// One semester of the study, with its calendar range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Semester {
    index: u16,
    label: String,
    start: NaiveDate,
    end: NaiveDate,
}

impl Semester {
    pub fn new(index: u16, label: impl Into<String>, start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if index == 0 {
            return Err(Error::Config("semester indices start at 1".into()));
        }
        if end < start {
            return Err(Error::Config(format!(
                "semester {index}: end date {end} precedes start date {start}"
            )));
        }
        Ok(Semester {
            index,
            label: label.into(),
            start,
            end,
        })
    }

    pub fn index(&self) -> u16 {
        self.index
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

/// Per-edge contact volume, kept separately by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeWeight {
    pub calls: u32,
    pub texts: u32,
}

impl EdgeWeight {
    pub fn new(calls: u32, texts: u32) -> Self {
        EdgeWeight { calls, texts }
    }

    pub fn total(&self) -> u32 {
        self.calls + self.texts
    }
}

/// Store an unordered pair with the smaller id first.
pub fn canonical_pair(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Edge status of a node pair across a semester pair (t, t+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    Existing,
    ToBeFormed,
    NonExisting,
}

impl EdgeClass {
    pub fn all() -> [EdgeClass; 3] {
        [EdgeClass::Existing, EdgeClass::ToBeFormed, EdgeClass::NonExisting]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeClass::Existing => "existing",
            EdgeClass::ToBeFormed => "to_be_formed",
            EdgeClass::NonExisting => "non_existing",
        }
    }
}

/// Fate of a semester-t edge in semester t+1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PersistenceClass {
    Persisting,
    Dissolving,
}

impl PersistenceClass {
    pub fn all() -> [PersistenceClass; 2] {
        [PersistenceClass::Persisting, PersistenceClass::Dissolving]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PersistenceClass::Persisting => "persisting",
            PersistenceClass::Dissolving => "dissolving",
        }
    }
}

/// Immutable undirected simple graph for one semester.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    semester: Semester,
    nodes: BTreeSet<NodeId>,
    edges: BTreeMap<(NodeId, NodeId), EdgeWeight>,
    neighbors: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl Snapshot {
    pub fn builder(semester: Semester) -> SnapshotBuilder {
        SnapshotBuilder {
            semester,
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
        }
    }

    pub fn semester(&self) -> &Semester {
        &self.semester
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_node(&self, u: NodeId) -> bool {
        self.nodes.contains(&u)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains_key(&canonical_pair(u, v))
    }

    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<&EdgeWeight> {
        self.edges.get(&canonical_pair(u, v))
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (&(NodeId, NodeId), &EdgeWeight)> {
        self.edges.iter()
    }

    pub fn neighbors(&self, u: NodeId) -> Result<&BTreeSet<NodeId>> {
        self.neighbors.get(&u).ok_or_else(|| Error::UnknownNode {
            node: u.value(),
            context: format!("semester-{} snapshot", self.semester.index()),
        })
    }

    pub fn degree(&self, u: NodeId) -> Result<usize> {
        Ok(self.neighbors(u)?.len())
    }

    fn check_node(&self, u: NodeId) -> Result<()> {
        if self.has_node(u) {
            Ok(())
        } else {
            Err(Error::UnknownNode {
                node: u.value(),
                context: format!("semester-{} snapshot", self.semester.index()),
            })
        }
    }
}

/// Single-writer construction for [`Snapshot`].
pub struct SnapshotBuilder {
    semester: Semester,
    nodes: BTreeSet<NodeId>,
    edges: BTreeMap<(NodeId, NodeId), EdgeWeight>,
}

impl SnapshotBuilder {
    pub fn add_node(&mut self, u: NodeId) -> &mut Self {
        self.nodes.insert(u);
        self
    }

    pub fn add_nodes<I: IntoIterator<Item = NodeId>>(&mut self, iter: I) -> &mut Self {
        self.nodes.extend(iter);
        self
    }

    /// Insert an undirected edge; repeated insertions (in either direction)
    /// accumulate onto the one canonical edge.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, weight: EdgeWeight) -> Result<&mut Self> {
        if u == v {
            return Err(Error::Validation(format!("self-loop on node {u} rejected")));
        }
        let entry = self.edges.entry(canonical_pair(u, v)).or_default();
        entry.calls += weight.calls;
        entry.texts += weight.texts;
        self.nodes.insert(u);
        self.nodes.insert(v);
        Ok(self)
    }

    pub fn build(self) -> Snapshot {
        let mut neighbors: BTreeMap<NodeId, BTreeSet<NodeId>> =
            self.nodes.iter().map(|&n| (n, BTreeSet::new())).collect();
        for &(u, v) in self.edges.keys() {
            neighbors.get_mut(&u).unwrap().insert(v);
            neighbors.get_mut(&v).unwrap().insert(u);
        }
        Snapshot {
            semester: self.semester,
            nodes: self.nodes,
            edges: self.edges,
            neighbors,
        }
    }
}

/// |N(u) ∩ N(v)| in one snapshot.
pub fn common_neighbors(snap: &Snapshot, u: NodeId, v: NodeId) -> Result<usize> {
    if u == v {
        return Err(Error::InvalidArgument(format!(
            "common_neighbors needs two distinct nodes, got {u} twice"
        )));
    }
    let nu = snap.neighbors(u)?;
    let nv = snap.neighbors(v)?;
    // Walk the smaller set.
    let (small, large) = if nu.len() <= nv.len() { (nu, nv) } else { (nv, nu) };
    Ok(small.iter().filter(|n| large.contains(n)).count())
}

/// Shortest-path length between two nodes, in hops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopDistance {
    Hops(u32),
    Unreachable,
}

impl HopDistance {
    pub fn within(&self, max_hops: u32) -> bool {
        matches!(self, HopDistance::Hops(h) if *h <= max_hops)
    }
}

/// Breadth-first shortest-path distance between `u` and `v`.
pub fn hop_distance(snap: &Snapshot, u: NodeId, v: NodeId) -> Result<HopDistance> {
    if u == v {
        return Err(Error::InvalidArgument(format!(
            "hop_distance needs two distinct nodes, got {u} twice"
        )));
    }
    snap.check_node(u)?;
    snap.check_node(v)?;
    let mut seen: BTreeMap<NodeId, u32> = BTreeMap::new();
    seen.insert(u, 0);
    let mut queue = VecDeque::from([u]);
    while let Some(cur) = queue.pop_front() {
        let d = seen[&cur];
        for &next in snap.neighbors(cur)? {
            if next == v {
                return Ok(HopDistance::Hops(d + 1));
            }
            if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(next) {
                e.insert(d + 1);
                queue.push_back(next);
            }
        }
    }
    Ok(HopDistance::Unreachable)
}

/// All nodes within `max_hops` of `u` (excluding `u`), with their distances.
pub fn nodes_within(snap: &Snapshot, u: NodeId, max_hops: u32) -> Result<BTreeMap<NodeId, u32>> {
    snap.check_node(u)?;
    let mut dist: BTreeMap<NodeId, u32> = BTreeMap::new();
    let mut queue = VecDeque::from([(u, 0u32)]);
    let mut seen = BTreeSet::from([u]);
    while let Some((cur, d)) = queue.pop_front() {
        if d == max_hops {
            continue;
        }
        for &next in snap.neighbors(cur)? {
            if seen.insert(next) {
                dist.insert(next, d + 1);
                queue.push_back((next, d + 1));
            }
        }
    }
    Ok(dist)
}

fn check_shared(snap_t: &Snapshot, snap_t1: &Snapshot, u: NodeId, v: NodeId) -> Result<()> {
    snap_t.check_node(u)?;
    snap_t.check_node(v)?;
    snap_t1.check_node(u)?;
    snap_t1.check_node(v)?;
    Ok(())
}

/// Classify a pair across consecutive snapshots. Both endpoints must be
/// present in both snapshots; pairs with departed endpoints are excluded
/// from all statistics.
pub fn classify_edge(
    snap_t: &Snapshot,
    snap_t1: &Snapshot,
    u: NodeId,
    v: NodeId,
) -> Result<EdgeClass> {
    if u == v {
        return Err(Error::InvalidArgument(format!(
            "classify_edge needs two distinct nodes, got {u} twice"
        )));
    }
    check_shared(snap_t, snap_t1, u, v)?;
    if snap_t.has_edge(u, v) {
        Ok(EdgeClass::Existing)
    } else if snap_t1.has_edge(u, v) {
        Ok(EdgeClass::ToBeFormed)
    } else {
        Ok(EdgeClass::NonExisting)
    }
}

/// Classify a semester-t edge as persisting or dissolving in t+1.
pub fn classify_persistence(
    snap_t: &Snapshot,
    snap_t1: &Snapshot,
    u: NodeId,
    v: NodeId,
) -> Result<PersistenceClass> {
    check_shared(snap_t, snap_t1, u, v)?;
    if !snap_t.has_edge(u, v) {
        return Err(Error::NotAnEdge {
            u: u.value(),
            v: v.value(),
            semester: snap_t.semester().index(),
        });
    }
    if snap_t1.has_edge(u, v) {
        Ok(PersistenceClass::Persisting)
    } else {
        Ok(PersistenceClass::Dissolving)
    }
}

/// Nodes present in both snapshots.
pub fn shared_nodes(snap_t: &Snapshot, snap_t1: &Snapshot) -> BTreeSet<NodeId> {
    snap_t
        .nodes()
        .intersection(snap_t1.nodes())
        .copied()
        .collect()
}

/// All canonical pairs over a node set, in order.
pub fn all_pairs(nodes: &BTreeSet<NodeId>) -> Vec<(NodeId, NodeId)> {
    let v: Vec<NodeId> = nodes.iter().copied().collect();
    let mut pairs = Vec::with_capacity(v.len() * (v.len().saturating_sub(1)) / 2);
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            pairs.push((v[i], v[j]));
        }
    }
    pairs
}

// --- CSV serialization -------------------------------------------------

const EDGES_VERSION: &str = "# linkdyn edges v1";
const NODES_VERSION: &str = "# linkdyn nodes v1";
const EDGES_HEADER: &str = "semester,node_u,node_v,call_count,text_count";
const NODES_HEADER: &str = "semester,node";

/// Write snapshots as an edge-list CSV plus a node-list CSV, rows ordered
/// by semester and then by canonical pair.
pub fn write_snapshots(
    snaps: &[Snapshot],
    edges_path: &Path,
    nodes_path: &Path,
) -> Result<()> {
    let mut edges = String::new();
    edges.push_str(EDGES_VERSION);
    edges.push('\n');
    edges.push_str(EDGES_HEADER);
    edges.push('\n');
    let mut nodes = String::new();
    nodes.push_str(NODES_VERSION);
    nodes.push('\n');
    nodes.push_str(NODES_HEADER);
    nodes.push('\n');
    for snap in snaps {
        let sem = snap.semester().index();
        for ((u, v), w) in snap.edges() {
            edges.push_str(&format!("{sem},{u},{v},{},{}\n", w.calls, w.texts));
        }
        for n in snap.nodes() {
            nodes.push_str(&format!("{sem},{n}\n"));
        }
    }
    std::fs::write(edges_path, edges).map_err(|e| Error::io(edges_path, e))?;
    std::fs::write(nodes_path, nodes).map_err(|e| Error::io(nodes_path, e))?;
    Ok(())
}

/// Read snapshots written by [`write_snapshots`]. Semester metadata comes
/// from `semesters`; indices in the files must resolve there.
pub fn read_snapshots(
    edges_path: &Path,
    nodes_path: &Path,
    semesters: &[Semester],
) -> Result<Vec<Snapshot>> {
    let lookup: BTreeMap<u16, &Semester> = semesters.iter().map(|s| (s.index(), s)).collect();
    let mut builders: BTreeMap<u16, SnapshotBuilder> = BTreeMap::new();

    let ensure = |builders: &mut BTreeMap<u16, SnapshotBuilder>, idx: u16| -> Result<()> {
        if let std::collections::btree_map::Entry::Vacant(e) = builders.entry(idx) {
            let sem = lookup.get(&idx).ok_or_else(|| {
                Error::Config(format!("semester index {idx} not in the calendar"))
            })?;
            e.insert(Snapshot::builder((*sem).clone()));
        }
        Ok(())
    };

    let node_file =
        std::fs::File::open(nodes_path).map_err(|e| Error::io(nodes_path, e))?;
    for (lineno, line) in BufReader::new(node_file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(nodes_path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == NODES_HEADER {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>, what: &str| -> Result<String> {
            s.map(|x| x.to_string()).ok_or_else(|| Error::Parse {
                path: nodes_path.to_path_buf(),
                line: lineno + 1,
                message: format!("missing {what}"),
            })
        };
        let sem: u16 = parse(parts.next(), "semester")?.parse().map_err(|_| Error::Parse {
            path: nodes_path.to_path_buf(),
            line: lineno + 1,
            message: "bad semester index".into(),
        })?;
        let node: NodeId = parse(parts.next(), "node")?.parse().map_err(|_| Error::Parse {
            path: nodes_path.to_path_buf(),
            line: lineno + 1,
            message: "bad node id".into(),
        })?;
        ensure(&mut builders, sem)?;
        builders.get_mut(&sem).unwrap().add_node(node);
    }

    let edge_file =
        std::fs::File::open(edges_path).map_err(|e| Error::io(edges_path, e))?;
    for (lineno, line) in BufReader::new(edge_file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(edges_path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == EDGES_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                path: edges_path.to_path_buf(),
                line: lineno + 1,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let bad = |message: String| Error::Parse {
            path: edges_path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let sem: u16 = fields[0].parse().map_err(|_| bad("bad semester index".into()))?;
        let u: NodeId = fields[1].parse().map_err(|_| bad("bad node id".into()))?;
        let v: NodeId = fields[2].parse().map_err(|_| bad("bad node id".into()))?;
        let calls: u32 = fields[3].parse().map_err(|_| bad("bad call count".into()))?;
        let texts: u32 = fields[4].parse().map_err(|_| bad("bad text count".into()))?;
        ensure(&mut builders, sem)?;
        builders
            .get_mut(&sem)
            .unwrap()
            .add_edge(u, v, EdgeWeight::new(calls, texts))?;
    }

    Ok(builders.into_values().map(|b| b.build()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sem(index: u16) -> Semester {
        Semester::new(
            index,
            format!("S{index}"),
            NaiveDate::from_ymd_opt(2011, 8, 1).unwrap(),
            NaiveDate::from_ymd_opt(2011, 12, 31).unwrap(),
        )
        .unwrap()
    }

    fn n(id: u32) -> NodeId {
        NodeId::new(id)
    }

    fn graph(index: u16, nodes: &[u32], edges: &[(u32, u32)]) -> Snapshot {
        let mut b = Snapshot::builder(sem(index));
        b.add_nodes(nodes.iter().map(|&i| n(i)));
        for &(u, v) in edges {
            b.add_edge(n(u), n(v), EdgeWeight::default()).unwrap();
        }
        b.build()
    }

    #[test]
    fn common_neighbors_path_graph() {
        let g = graph(1, &[0, 1, 2], &[(0, 1), (1, 2)]);
        assert_eq!(common_neighbors(&g, n(0), n(2)).unwrap(), 1);
    }

    #[test]
    fn common_neighbors_edgeless() {
        let g = graph(1, &[0, 1, 2, 3, 4], &[]);
        for i in 0..5u32 {
            for j in (i + 1)..5 {
                assert_eq!(common_neighbors(&g, n(i), n(j)).unwrap(), 0);
            }
        }
    }

    #[test]
    fn common_neighbors_symmetric() {
        let g = graph(1, &[0, 1, 2, 3], &[(0, 1), (0, 2), (1, 2), (2, 3)]);
        for i in 0..4u32 {
            for j in 0..4u32 {
                if i == j {
                    continue;
                }
                assert_eq!(
                    common_neighbors(&g, n(i), n(j)).unwrap(),
                    common_neighbors(&g, n(j), n(i)).unwrap()
                );
            }
        }
    }

    #[test]
    fn common_neighbors_unknown_node() {
        let g = graph(1, &[0, 1], &[(0, 1)]);
        let err = common_neighbors(&g, n(0), n(9)).unwrap_err();
        assert!(err.to_string().contains('9'));
    }

    #[test]
    fn hop_distance_direct_edge() {
        let g = graph(1, &[0, 1], &[(0, 1)]);
        assert_eq!(hop_distance(&g, n(0), n(1)).unwrap(), HopDistance::Hops(1));
    }

    #[test]
    fn hop_distance_path() {
        let g = graph(1, &[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(hop_distance(&g, n(0), n(3)).unwrap(), HopDistance::Hops(3));
    }

    #[test]
    fn hop_distance_unreachable() {
        let g = graph(1, &[0, 1, 2], &[(0, 1)]);
        assert_eq!(hop_distance(&g, n(0), n(2)).unwrap(), HopDistance::Unreachable);
    }

    #[test]
    fn hop_distance_one_iff_edge() {
        let g = graph(1, &[0, 1, 2, 3, 4], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        for i in 0..5u32 {
            for j in (i + 1)..5 {
                let d = hop_distance(&g, n(i), n(j)).unwrap();
                assert_eq!(d == HopDistance::Hops(1), g.has_edge(n(i), n(j)));
            }
        }
    }

    #[test]
    fn nodes_within_matches_hop_distance() {
        let g = graph(
            1,
            &[0, 1, 2, 3, 4, 5],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 5)],
        );
        let within = nodes_within(&g, n(0), 2).unwrap();
        for j in 1..6u32 {
            let d = hop_distance(&g, n(0), n(j)).unwrap();
            match d {
                HopDistance::Hops(h) if h <= 2 => assert_eq!(within.get(&n(j)), Some(&h)),
                _ => assert!(!within.contains_key(&n(j))),
            }
        }
    }

    #[test]
    fn classify_edge_cases() {
        // Edge present in t stays Existing even if dropped in t+1.
        let t = graph(1, &[0, 1, 2, 3], &[(0, 1), (2, 3)]);
        let t1 = graph(2, &[0, 1, 2, 3], &[(2, 3), (0, 2)]);
        assert_eq!(classify_edge(&t, &t1, n(0), n(1)).unwrap(), EdgeClass::Existing);
        assert_eq!(classify_edge(&t, &t1, n(0), n(2)).unwrap(), EdgeClass::ToBeFormed);
        assert_eq!(classify_edge(&t, &t1, n(1), n(3)).unwrap(), EdgeClass::NonExisting);
    }

    #[test]
    fn classify_edge_requires_shared_nodes() {
        let t = graph(1, &[0, 1, 2], &[(0, 1)]);
        let t1 = graph(2, &[0, 1], &[(0, 1)]);
        assert!(classify_edge(&t, &t1, n(0), n(2)).is_err());
    }

    #[test]
    fn classes_partition_shared_pairs() {
        let t = graph(1, &[0, 1, 2, 3, 4], &[(0, 1), (1, 2), (3, 4)]);
        let t1 = graph(2, &[0, 1, 2, 3], &[(0, 1), (0, 2)]);
        let shared = shared_nodes(&t, &t1);
        let pairs = all_pairs(&shared);
        let mut counts = BTreeMap::new();
        for &(u, v) in &pairs {
            *counts.entry(classify_edge(&t, &t1, u, v).unwrap()).or_insert(0usize) += 1;
        }
        let total: usize = counts.values().sum();
        assert_eq!(total, shared.len() * (shared.len() - 1) / 2);
    }

    #[test]
    fn classify_persistence_cases() {
        let t = graph(1, &[0, 1, 2], &[(0, 1), (1, 2)]);
        let t1 = graph(2, &[0, 1, 2], &[(0, 1)]);
        assert_eq!(
            classify_persistence(&t, &t1, n(0), n(1)).unwrap(),
            PersistenceClass::Persisting
        );
        assert_eq!(
            classify_persistence(&t, &t1, n(1), n(2)).unwrap(),
            PersistenceClass::Dissolving
        );
        assert!(classify_persistence(&t, &t1, n(0), n(2)).is_err());
    }

    #[test]
    fn edge_canonicalization_sums_weights() {
        let mut b = Snapshot::builder(sem(1));
        b.add_edge(n(2), n(1), EdgeWeight::new(3, 0)).unwrap();
        b.add_edge(n(1), n(2), EdgeWeight::new(1, 7)).unwrap();
        let g = b.build();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge_weight(n(1), n(2)).unwrap(), &EdgeWeight::new(4, 7));
    }

    #[test]
    fn self_loop_rejected() {
        let mut b = Snapshot::builder(sem(1));
        assert!(b.add_edge(n(1), n(1), EdgeWeight::default()).is_err());
    }

    #[test]
    fn snapshot_roundtrip_through_csv() {
        let g1 = graph(1, &[0, 1, 2, 9], &[(0, 1), (1, 2)]);
        let g2 = graph(2, &[0, 1, 2], &[(0, 2)]);
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("edges.csv");
        let nodes = dir.path().join("nodes.csv");
        write_snapshots(&[g1.clone(), g2.clone()], &edges, &nodes).unwrap();
        let back = read_snapshots(&edges, &nodes, &[sem(1), sem(2)]).unwrap();
        assert_eq!(back, vec![g1, g2]);
    }

    #[test]
    fn triangle_inequality_on_random_graph() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let nodes: Vec<u32> = (0..15).collect();
        let mut edges = Vec::new();
        for i in 0..15u32 {
            for j in (i + 1)..15 {
                if rng.random::<f64>() < 0.25 {
                    edges.push((i, j));
                }
            }
        }
        let g = graph(1, &nodes, &edges);
        let d = |a: u32, b: u32| match hop_distance(&g, n(a), n(b)).unwrap() {
            HopDistance::Hops(h) => Some(h),
            HopDistance::Unreachable => None,
        };
        for a in 0..15u32 {
            for b in 0..15u32 {
                for c in 0..15u32 {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    if let (Some(ab), Some(bc), Some(ac)) = (d(a, b), d(b, c), d(a, c)) {
                        assert!(ac <= ab + bc, "d({a},{c}) > d({a},{b}) + d({b},{c})");
                    }
                }
            }
        }
    }
}
