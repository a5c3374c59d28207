//! Labeled example sets for the formation and persistence tasks.
//!
//! Formation: to-be-formed pairs are positive; negatives are pairs absent
//! from both snapshots, optionally restricted to endpoints within a hop
//! bound on the semester-t snapshot (the imbalance control). Persistence:
//! one example per semester-t edge whose endpoints survive to t+1,
//! positive when the edge does too.
//!
//! Features always come from semester t; labels from semester t+1. Example
//! generation is parallel over candidate pairs with order-preserving
//! merges, so output is identical in sequential mode.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attributes::{
    edge_features, AgreementConfig, AttributeSchema, EdgeFeatureVector, Profile, ProfileStore,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::graphcore::{
    all_pairs, classify_edge, classify_persistence, nodes_within, shared_nodes, EdgeClass, NodeId,
    PersistenceClass, Snapshot,
};
use crate::linalg::Mat;

/// Which prediction problem a dataset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Formation,
    Persistence,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Formation => "formation",
            Task::Persistence => "persistence",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "formation" => Ok(Task::Formation),
            "persistence" => Ok(Task::Persistence),
            other => Err(Error::InvalidArgument(format!(
                "unknown task {other:?} (expected formation or persistence)"
            ))),
        }
    }
}

/// One labeled pair with its semester-t features.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub pair: (NodeId, NodeId),
    pub semester_index: u16,
    pub features: EdgeFeatureVector,
    pub positive: bool,
}

/// A feature-named collection of labeled examples.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub task: Task,
    pub feature_names: Vec<String>,
    pub examples: Vec<LabeledExample>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.examples.iter().filter(|e| e.positive).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    /// Feature matrix and label vector in example order.
    pub fn to_matrix(&self) -> Result<(Mat, Vec<bool>)> {
        let rows: Vec<Vec<f64>> = self.examples.iter().map(|e| e.features.flatten()).collect();
        let y = self.examples.iter().map(|e| e.positive).collect();
        Ok((Mat::from_rows(&rows)?, y))
    }

    /// Merge datasets of the same task and feature space.
    pub fn concat(mut parts: Vec<LabeledDataset>) -> Result<LabeledDataset> {
        let first = parts
            .first()
            .ok_or_else(|| Error::EmptyInput("no datasets to concatenate".into()))?;
        let task = first.task;
        let feature_names = first.feature_names.clone();
        let mut examples = Vec::new();
        for part in parts.iter_mut() {
            if part.task != task || part.feature_names != feature_names {
                return Err(Error::InvalidArgument(
                    "cannot concatenate datasets with different tasks or features".into(),
                ));
            }
            examples.append(&mut part.examples);
        }
        Ok(LabeledDataset {
            task,
            feature_names,
            examples,
        })
    }
}

fn profile_or_empty<'a>(
    profiles: &'a ProfileStore,
    schema: &AttributeSchema,
    sem: u16,
    node: NodeId,
    scratch: &'a mut Option<Profile>,
) -> &'a Profile {
    match profiles.get(sem, node) {
        Some(p) => p,
        None => {
            // Unsurveyed node: all answers missing, neutral agreements.
            *scratch = Some(Profile::empty(node, sem, schema));
            scratch.as_ref().unwrap()
        }
    }
}

fn features_for_pair(
    snap: &Snapshot,
    profiles: &ProfileStore,
    schema: &AttributeSchema,
    cfg: &AgreementConfig,
    u: NodeId,
    v: NodeId,
) -> Result<EdgeFeatureVector> {
    let sem = snap.semester().index();
    let mut su = None;
    let mut sv = None;
    let pu = profile_or_empty(profiles, schema, sem, u, &mut su);
    let pv = profile_or_empty(profiles, schema, sem, v, &mut sv);
    edge_features(schema, cfg, pu, pv, snap)
}

/// Build the formation dataset for one semester transition. Positives are
/// the to-be-formed pairs; negatives are non-existing pairs, restricted to
/// hop distance at most `max_hops` on the semester-t snapshot when given
/// (`None` keeps every non-existing pair).
pub fn formation_examples(
    snap_t: &Snapshot,
    snap_t1: &Snapshot,
    profiles: &ProfileStore,
    schema: &AttributeSchema,
    agreement: &AgreementConfig,
    max_hops: Option<u32>,
) -> Result<LabeledDataset> {
    if let Some(h) = max_hops {
        if h < 2 {
            return Err(Error::InvalidArgument(format!(
                "max_hops must be at least 2 (hop 1 is an existing edge), got {h}"
            )));
        }
    }
    let shared = shared_nodes(snap_t, snap_t1);
    let pairs = all_pairs(&shared);

    // One truncated BFS per node beats one BFS per pair.
    let reach: BTreeMap<NodeId, BTreeMap<NodeId, u32>> = match max_hops {
        Some(h) => {
            let nodes: Vec<NodeId> = shared.iter().copied().collect();
            let maps = exec::ordered_map(&nodes, |&u| nodes_within(snap_t, u, h));
            let mut out = BTreeMap::new();
            for (u, m) in nodes.into_iter().zip(maps) {
                out.insert(u, m?);
            }
            out
        }
        None => BTreeMap::new(),
    };

    let results = exec::ordered_map(&pairs, |&(u, v)| -> Result<Option<LabeledExample>> {
        let class = classify_edge(snap_t, snap_t1, u, v)?;
        let positive = match class {
            EdgeClass::Existing => return Ok(None),
            EdgeClass::ToBeFormed => true,
            EdgeClass::NonExisting => {
                if max_hops.is_some() && !reach[&u].contains_key(&v) {
                    return Ok(None);
                }
                false
            }
        };
        let features = features_for_pair(snap_t, profiles, schema, agreement, u, v)?;
        Ok(Some(LabeledExample {
            pair: (u, v),
            semester_index: snap_t.semester().index(),
            features,
            positive,
        }))
    });

    let mut examples = Vec::new();
    for r in results {
        if let Some(ex) = r? {
            examples.push(ex);
        }
    }
    let ds = LabeledDataset {
        task: Task::Formation,
        feature_names: schema.feature_names(),
        examples,
    };
    if ds.positives() == 0 {
        return Err(Error::Degenerate(format!(
            "no to-be-formed pairs between semesters {} and {}; choose a different semester pair",
            snap_t.semester().index(),
            snap_t1.semester().index()
        )));
    }
    Ok(ds)
}

/// Build the persistence dataset for one semester transition: one example
/// per semester-t edge whose endpoints survive to t+1, positive when the
/// edge persists.
pub fn persistence_examples(
    snap_t: &Snapshot,
    snap_t1: &Snapshot,
    profiles: &ProfileStore,
    schema: &AttributeSchema,
    agreement: &AgreementConfig,
) -> Result<LabeledDataset> {
    let qualifying: Vec<(NodeId, NodeId)> = snap_t
        .edges()
        .map(|(&pair, _)| pair)
        .filter(|&(u, v)| snap_t1.has_node(u) && snap_t1.has_node(v))
        .collect();
    if qualifying.is_empty() {
        return Err(Error::Degenerate(format!(
            "semester {} has no edges whose endpoints survive into semester {}",
            snap_t.semester().index(),
            snap_t1.semester().index()
        )));
    }
    let results = exec::ordered_map(&qualifying, |&(u, v)| -> Result<LabeledExample> {
        let class = classify_persistence(snap_t, snap_t1, u, v)?;
        let features = features_for_pair(snap_t, profiles, schema, agreement, u, v)?;
        Ok(LabeledExample {
            pair: (u, v),
            semester_index: snap_t.semester().index(),
            features,
            positive: class == PersistenceClass::Persisting,
        })
    });
    let mut examples = Vec::with_capacity(qualifying.len());
    for r in results {
        examples.push(r?);
    }
    Ok(LabeledDataset {
        task: Task::Persistence,
        feature_names: schema.feature_names(),
        examples,
    })
}

/// Pool per-transition datasets over all consecutive snapshot pairs.
pub fn pooled_examples(
    task: Task,
    snapshots: &[Snapshot],
    profiles: &ProfileStore,
    schema: &AttributeSchema,
    agreement: &AgreementConfig,
    max_hops: Option<u32>,
) -> Result<LabeledDataset> {
    if snapshots.len() < 2 {
        return Err(Error::EmptyInput(
            "pooling needs at least two snapshots".into(),
        ));
    }
    let mut parts = Vec::new();
    for w in snapshots.windows(2) {
        let part = match task {
            Task::Formation => {
                formation_examples(&w[0], &w[1], profiles, schema, agreement, max_hops)?
            }
            Task::Persistence => persistence_examples(&w[0], &w[1], profiles, schema, agreement)?,
        };
        parts.push(part);
    }
    LabeledDataset::concat(parts)
}

/// A train/test partition of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub seed: u64,
}

/// Stratified split: each label class is shuffled under the seed and cut
/// at `train_fraction` (rounded half-up) independently, so rare positives
/// keep their proportion in both halves.
pub fn split(ds: &LabeledDataset, train_fraction: f64, seed: u64) -> Result<SplitDataset> {
    if ds.is_empty() {
        return Err(Error::EmptyInput("cannot split an empty dataset".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx: Vec<usize> = Vec::new();
    let mut test_idx: Vec<usize> = Vec::new();
    for class in [true, false] {
        let mut members: Vec<usize> = (0..ds.len())
            .filter(|&i| ds.examples[i].positive == class)
            .collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::Degenerate(format!(
                "label class {} has fewer than 2 examples; cannot split",
                if class { "positive" } else { "negative" }
            )));
        }
        members.shuffle(&mut rng);
        let take = ((train_fraction * members.len() as f64) + 0.5).floor() as usize;
        let take = take.min(members.len());
        train_idx.extend(&members[..take]);
        test_idx.extend(&members[take..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| LabeledDataset {
        task: ds.task,
        feature_names: ds.feature_names.clone(),
        examples: idx.iter().map(|&i| ds.examples[i].clone()).collect(),
    };
    Ok(SplitDataset {
        train: pick(&train_idx),
        test: pick(&test_idx),
        seed,
    })
}

// --- CSV + metadata ----------------------------------------------------

/// Feature rows and labels as loaded back from a dataset CSV (pair
/// identities are not stored there).
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    pub feature_names: Vec<String>,
    pub x: Mat,
    pub y: Vec<bool>,
}

/// Sidecar metadata describing how a dataset CSV was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub task: Task,
    pub network: String,
    pub semester_pairs: Vec<u16>,
    pub max_hops: Option<u32>,
    pub threshold: Option<u32>,
    pub seed: Option<u64>,
    pub positives: usize,
    pub negatives: usize,
}

impl DatasetMeta {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self)
            .map_err(|e| Error::Config(format!("metadata serialization failed: {e}")))?;
        std::fs::write(path, format!("# linkdyn dataset meta v1\n{text}"))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("metadata parse failed: {e}")))
    }
}

const DATASET_VERSION: &str = "# linkdyn dataset v1";

/// Write a dataset as CSV: header is the feature names plus `label`, one
/// example per row, labels as 1/0.
pub fn write_dataset_csv(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(DATASET_VERSION);
    out.push('\n');
    out.push_str(&ds.feature_names.join(","));
    out.push_str(",label\n");
    for ex in &ds.examples {
        let row = ex.features.flatten();
        for value in row {
            out.push_str(&format!("{value},"));
        }
        out.push_str(if ex.positive { "1\n" } else { "0\n" });
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a dataset CSV written by [`write_dataset_csv`].
pub fn read_dataset_csv(path: &Path) -> Result<TabularDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut feature_names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').collect();
        match &feature_names {
            None => {
                if fields.last() != Some(&"label") {
                    return Err(bad("header must end with a label column".into()));
                }
                feature_names = Some(
                    fields[..fields.len() - 1]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                );
            }
            Some(names) => {
                if fields.len() != names.len() + 1 {
                    return Err(bad(format!(
                        "expected {} fields, got {}",
                        names.len() + 1,
                        fields.len()
                    )));
                }
                let mut row = Vec::with_capacity(names.len());
                for f in &fields[..names.len()] {
                    row.push(
                        f.parse::<f64>()
                            .map_err(|_| bad(format!("bad feature value {f:?}")))?,
                    );
                }
                y.push(match fields[names.len()] {
                    "1" => true,
                    "0" => false,
                    other => return Err(bad(format!("bad label {other:?}"))),
                });
                rows.push(row);
            }
        }
    }
    let feature_names =
        feature_names.ok_or_else(|| Error::EmptyInput(format!("{} has no header", path.display())))?;
    if rows.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} has no data rows",
            path.display()
        )));
    }
    Ok(TabularDataset {
        feature_names,
        x: Mat::from_rows(&rows)?,
        y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::AttributeKind;
    use crate::graphcore::{EdgeWeight, Semester};
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use rand::Rng;

    fn n(id: u32) -> NodeId {
        NodeId::new(id)
    }

    fn sem(index: u16) -> Semester {
        Semester::new(
            index,
            format!("S{index}"),
            NaiveDate::from_ymd_opt(2011, 8, 1).unwrap(),
            NaiveDate::from_ymd_opt(2011, 12, 31).unwrap(),
        )
        .unwrap()
    }

    fn graph(index: u16, nodes: &[u32], edges: &[(u32, u32)]) -> Snapshot {
        let mut b = Snapshot::builder(sem(index));
        b.add_nodes(nodes.iter().map(|&i| n(i)));
        for &(u, v) in edges {
            b.add_edge(n(u), n(v), EdgeWeight::default()).unwrap();
        }
        b.build()
    }

    fn schema() -> AttributeSchema {
        AttributeSchema::new(vec![(
            "flag".into(),
            AttributeKind::Binary,
        )])
        .unwrap()
    }

    fn empty_profiles() -> ProfileStore {
        ProfileStore::new()
    }

    fn agreement_cfg() -> AgreementConfig {
        AgreementConfig::default()
    }

    #[test]
    fn four_cycle_formation_example() {
        // 4-cycle a-b-c-d-a in t; (a,c) forms in t+1. With max_hops=2 the
        // only negative is the other diagonal (b,d).
        let t = graph(1, &[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let t1 = graph(2, &[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let ds = formation_examples(
            &t,
            &t1,
            &empty_profiles(),
            &schema(),
            &agreement_cfg(),
            Some(2),
        )
        .unwrap();
        let positives: Vec<_> = ds
            .examples
            .iter()
            .filter(|e| e.positive)
            .map(|e| e.pair)
            .collect();
        let negatives: Vec<_> = ds
            .examples
            .iter()
            .filter(|e| !e.positive)
            .map(|e| e.pair)
            .collect();
        assert_eq!(positives, vec![(n(0), n(2))]);
        assert_eq!(negatives, vec![(n(1), n(3))]);
    }

    #[test]
    fn star_graph_negatives_are_leaf_pairs() {
        // K_{1,4}: center 0, leaves 1-4. Every leaf pair is 2 hops apart.
        // One leaf pair forms in t+1 to satisfy the positives requirement;
        // the other five stay negatives.
        let t = graph(1, &[0, 1, 2, 3, 4], &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let t1 = graph(2, &[0, 1, 2, 3, 4], &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)]);
        let ds = formation_examples(
            &t,
            &t1,
            &empty_profiles(),
            &schema(),
            &agreement_cfg(),
            Some(2),
        )
        .unwrap();
        assert_eq!(ds.positives(), 1);
        assert_eq!(ds.negatives(), 5);
        for ex in &ds.examples {
            assert_ne!(ex.pair.0, n(0));
            assert_ne!(ex.pair.1, n(0));
        }
    }

    #[test]
    fn no_positives_is_an_error_with_advice() {
        let t = graph(1, &[0, 1, 2], &[(0, 1)]);
        let t1 = graph(2, &[0, 1, 2], &[(0, 1)]);
        let err = formation_examples(
            &t,
            &t1,
            &empty_profiles(),
            &schema(),
            &agreement_cfg(),
            Some(2),
        )
        .unwrap_err();
        assert!(err.to_string().contains("different semester pair"));
    }

    #[test]
    fn max_hops_below_two_rejected() {
        let t = graph(1, &[0, 1], &[(0, 1)]);
        let t1 = graph(2, &[0, 1], &[(0, 1)]);
        assert!(formation_examples(
            &t,
            &t1,
            &empty_profiles(),
            &schema(),
            &agreement_cfg(),
            Some(1),
        )
        .is_err());
    }

    /// Erdos-Renyi-ish random graph over `n` nodes.
    fn random_graph(index: u16, nodes: u32, p: f64, rng: &mut rand_chacha::ChaCha8Rng) -> Snapshot {
        let ids: Vec<u32> = (0..nodes).collect();
        let mut edges = Vec::new();
        for i in 0..nodes {
            for j in (i + 1)..nodes {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        graph(index, &ids, &edges)
    }

    #[test]
    fn negative_set_matches_bruteforce_bfs_oracle() {
        use crate::graphcore::{hop_distance, HopDistance};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let t = random_graph(1, 60, 0.06, &mut rng);
        let t1 = random_graph(2, 60, 0.06, &mut rng);
        let ds = formation_examples(
            &t,
            &t1,
            &empty_profiles(),
            &schema(),
            &agreement_cfg(),
            Some(2),
        )
        .unwrap();
        let negatives: std::collections::BTreeSet<(NodeId, NodeId)> = ds
            .examples
            .iter()
            .filter(|e| !e.positive)
            .map(|e| e.pair)
            .collect();
        // Oracle: full pair scan with direct BFS distances.
        let mut expected = std::collections::BTreeSet::new();
        for i in 0..60u32 {
            for j in (i + 1)..60 {
                if t.has_edge(n(i), n(j)) || t1.has_edge(n(i), n(j)) {
                    continue;
                }
                if let HopDistance::Hops(h) = hop_distance(&t, n(i), n(j)).unwrap() {
                    if h <= 2 {
                        expected.insert((n(i), n(j)));
                    }
                }
            }
        }
        assert_eq!(negatives, expected);
    }

    #[test]
    fn negatives_monotone_in_max_hops() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let t = random_graph(1, 50, 0.05, &mut rng);
        let t1 = random_graph(2, 50, 0.05, &mut rng);
        let p = &empty_profiles();
        let s = schema();
        let a = agreement_cfg();
        let mut last = 0usize;
        for hops in [Some(2), Some(3), Some(4), None] {
            let ds = formation_examples(&t, &t1, p, &s, &a, hops).unwrap();
            assert!(ds.negatives() >= last, "negatives shrank at {hops:?}");
            last = ds.negatives();
        }
    }

    #[test]
    fn persistence_examples_follow_definitions() {
        let t = graph(1, &[0, 1, 2, 9], &[(0, 1), (1, 2), (0, 9)]);
        // Node 9 leaves; its edge is excluded by the churn rule.
        let t1 = graph(2, &[0, 1, 2], &[(0, 1)]);
        let ds = persistence_examples(&t, &t1, &empty_profiles(), &schema(), &agreement_cfg())
            .unwrap();
        assert_eq!(ds.len(), 2);
        let by_pair: BTreeMap<(NodeId, NodeId), bool> = ds
            .examples
            .iter()
            .map(|e| (e.pair, e.positive))
            .collect();
        assert_eq!(by_pair[&(n(0), n(1))], true);
        assert_eq!(by_pair[&(n(1), n(2))], false);
        assert!(!by_pair.contains_key(&(n(0), n(9))));
    }

    #[test]
    fn persistence_count_equals_qualifying_edges() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let t = random_graph(1, 30, 0.1, &mut rng);
            let t1 = random_graph(2, 30, 0.1, &mut rng);
            let ds =
                persistence_examples(&t, &t1, &empty_profiles(), &schema(), &agreement_cfg())
                    .unwrap();
            let qualifying = t
                .edges()
                .filter(|(&(u, v), _)| t1.has_node(u) && t1.has_node(v))
                .count();
            assert_eq!(ds.len(), qualifying);
        }
    }

    fn tiny_dataset(pos: usize, neg: usize) -> LabeledDataset {
        let snap = graph(1, &[0, 1], &[]);
        let mut examples = Vec::new();
        for i in 0..(pos + neg) {
            let features = features_for_pair(
                &snap,
                &empty_profiles(),
                &schema(),
                &agreement_cfg(),
                n(0),
                n(1),
            )
            .unwrap();
            examples.push(LabeledExample {
                pair: (n(0), n(1)),
                semester_index: 1,
                features,
                positive: i < pos,
            });
        }
        LabeledDataset {
            task: Task::Formation,
            feature_names: schema().feature_names(),
            examples,
        }
    }

    #[test]
    fn split_exact_proportions() {
        let ds = tiny_dataset(10, 10);
        let s = split(&ds, 0.8, 7).unwrap();
        assert_eq!(s.train.positives(), 8);
        assert_eq!(s.train.negatives(), 8);
        assert_eq!(s.test.positives(), 2);
        assert_eq!(s.test.negatives(), 2);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = tiny_dataset(13, 29);
        let a = split(&ds, 0.8, 42).unwrap();
        let b = split(&ds, 0.8, 42).unwrap();
        assert_eq!(a, b);
        let c = split(&ds, 0.8, 43).unwrap();
        assert!(a != c || ds.len() <= 2);
    }

    #[test]
    fn split_rejects_tiny_classes() {
        let ds = tiny_dataset(1, 10);
        assert!(split(&ds, 0.8, 1).is_err());
    }

    #[test]
    fn dataset_csv_roundtrip() {
        let ds = tiny_dataset(3, 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        write_dataset_csv(&ds, &path).unwrap();
        let tab = read_dataset_csv(&path).unwrap();
        assert_eq!(tab.feature_names, ds.feature_names);
        let (x, y) = ds.to_matrix().unwrap();
        assert_eq!(tab.x, x);
        assert_eq!(tab.y, y);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn split_proportions_within_one_example(
            pos in 2usize..40,
            neg in 2usize..40,
            seed in 0u64..1000,
        ) {
            let ds = tiny_dataset(pos, neg);
            let s = split(&ds, 0.8, seed).unwrap();
            // Disjoint and exhaustive.
            prop_assert_eq!(s.train.len() + s.test.len(), ds.len());
            // Each class within one example of the requested fraction.
            let target_pos = 0.8 * pos as f64;
            let target_neg = 0.8 * neg as f64;
            prop_assert!((s.train.positives() as f64 - target_pos).abs() <= 1.0);
            prop_assert!((s.train.negatives() as f64 - target_neg).abs() <= 1.0);
        }
    }
}
