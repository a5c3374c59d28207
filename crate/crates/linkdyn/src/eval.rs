//! Metrics, descriptive statistics over edge classes, and report files.
//!
//! Accuracy and recall are the two reported metrics; recall is for the
//! positive class and is flagged undefined when no positives exist.
//! Class statistics average total agreement, per-attribute agreement, and
//! common-neighbor counts over every pair of shared nodes, cell by cell
//! (existing / to-be-formed / non-existing, and persisting / dissolving).
//! Report emission writes deterministic CSV tables, one per figure or
//! table analog, plus a plain-text summary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::attributes::{AgreementConfig, AttributeSchema, ProfileStore};
use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::exec;
use crate::graphcore::{
    all_pairs, classify_edge, classify_persistence, shared_nodes, EdgeClass, NodeId,
    PersistenceClass, Snapshot,
};
use crate::models::Prediction;
use crate::spectral::FeatureRanking;

/// Confusion counts over an evaluated set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Accuracy/recall pair with its underlying counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    /// Positive-class recall; zero with `recall_defined = false` when the
    /// truth has no positives.
    pub recall: f64,
    pub recall_defined: bool,
    pub counts: ConfusionCounts,
}

/// Accuracy and positive-class recall of predictions against truth.
pub fn metrics(preds: &[Prediction], truth: &[bool]) -> Result<Metrics> {
    if preds.is_empty() {
        return Err(Error::EmptyInput("metrics need at least one prediction".into()));
    }
    if preds.len() != truth.len() {
        return Err(Error::Dimension {
            context: "metrics truth labels".into(),
            expected: preds.len(),
            got: truth.len(),
        });
    }
    let mut counts = ConfusionCounts::default();
    for (p, &t) in preds.iter().zip(truth) {
        match (p.label, t) {
            (true, true) => counts.true_pos += 1,
            (true, false) => counts.false_pos += 1,
            (false, false) => counts.true_neg += 1,
            (false, true) => counts.false_neg += 1,
        }
    }
    let accuracy = (counts.true_pos + counts.true_neg) as f64 / counts.total() as f64;
    let positives = counts.true_pos + counts.false_neg;
    let (recall, recall_defined) = if positives == 0 {
        (0.0, false)
    } else {
        (counts.true_pos as f64 / positives as f64, true)
    };
    Ok(Metrics {
        accuracy,
        recall,
        recall_defined,
        counts,
    })
}

/// Mean and standard error of one statistic over one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation over sqrt(n); zero when n < 2.
    pub se: f64,
}

fn mean_se(values: &[f64]) -> MeanSe {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return MeanSe { mean, se: 0.0 };
    }
    let var = values
        .iter()
        .map(|v| {
            let d = v - mean;
            d * d
        })
        .sum::<f64>()
        / (n - 1) as f64;
    MeanSe {
        mean,
        se: (var / n as f64).sqrt(),
    }
}

/// Statistics for one edge-class cell of one semester transition.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub n: usize,
    pub total_agreement: MeanSe,
    pub common_neighbors: MeanSe,
    pub per_attribute: Vec<MeanSe>,
}

/// Per-transition, per-class agreement statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionClassStats {
    /// Semester index t of the (t, t+1) transition.
    pub semester_pair: u16,
    /// Absent cells (no pairs in the class) carry `None`, never zero.
    pub cells: BTreeMap<EdgeClass, Option<CellStats>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    pub attribute_names: Vec<String>,
    pub transitions: Vec<TransitionClassStats>,
}

struct PairSample {
    class: EdgeClass,
    total: f64,
    cn: f64,
    agreements: Vec<f64>,
}

fn collect_cell(samples: &[&PairSample], n_attrs: usize) -> Option<CellStats> {
    if samples.is_empty() {
        return None;
    }
    let totals: Vec<f64> = samples.iter().map(|s| s.total).collect();
    let cns: Vec<f64> = samples.iter().map(|s| s.cn).collect();
    let per_attribute = (0..n_attrs)
        .map(|a| {
            let values: Vec<f64> = samples.iter().map(|s| s.agreements[a]).collect();
            mean_se(&values)
        })
        .collect();
    Some(CellStats {
        n: samples.len(),
        total_agreement: mean_se(&totals),
        common_neighbors: mean_se(&cns),
        per_attribute,
    })
}

/// Agreement and common-neighbor statistics per edge class, one entry per
/// consecutive snapshot pair, computed over all pairs of shared nodes.
pub fn edge_class_stats(
    snapshots: &[Snapshot],
    profiles: &ProfileStore,
    schema: &AttributeSchema,
    agreement: &AgreementConfig,
) -> Result<ClassStats> {
    if snapshots.len() < 2 {
        return Err(Error::EmptyInput(
            "edge-class statistics need at least two consecutive snapshots".into(),
        ));
    }
    let mut transitions = Vec::new();
    for w in snapshots.windows(2) {
        let (snap_t, snap_t1) = (&w[0], &w[1]);
        let shared = shared_nodes(snap_t, snap_t1);
        let pairs = all_pairs(&shared);
        let samples: Vec<Result<PairSample>> = exec::ordered_map(&pairs, |&(u, v)| {
            let class = classify_edge(snap_t, snap_t1, u, v)?;
            let features = pair_features(snap_t, profiles, schema, agreement, u, v)?;
            Ok(PairSample {
                class,
                total: features.total_agreement,
                cn: features.common_neighbor_count as f64,
                agreements: features.agreements,
            })
        });
        let mut ok_samples = Vec::with_capacity(samples.len());
        for s in samples {
            ok_samples.push(s?);
        }
        let mut cells = BTreeMap::new();
        for class in EdgeClass::all() {
            let members: Vec<&PairSample> =
                ok_samples.iter().filter(|s| s.class == class).collect();
            cells.insert(class, collect_cell(&members, schema.len()));
        }
        transitions.push(TransitionClassStats {
            semester_pair: snap_t.semester().index(),
            cells,
        });
    }
    Ok(ClassStats {
        attribute_names: schema.entries().iter().map(|e| e.name.clone()).collect(),
        transitions,
    })
}

fn pair_features(
    snap: &Snapshot,
    profiles: &ProfileStore,
    schema: &AttributeSchema,
    agreement: &AgreementConfig,
    u: NodeId,
    v: NodeId,
) -> Result<crate::attributes::EdgeFeatureVector> {
    use crate::attributes::{edge_features, Profile};
    let sem = snap.semester().index();
    let empty_u;
    let pu = match profiles.get(sem, u) {
        Some(p) => p,
        None => {
            empty_u = Profile::empty(u, sem, schema);
            &empty_u
        }
    };
    let empty_v;
    let pv = match profiles.get(sem, v) {
        Some(p) => p,
        None => {
            empty_v = Profile::empty(v, sem, schema);
            &empty_v
        }
    };
    edge_features(schema, agreement, pu, pv, snap)
}

/// Per-cell stats for the persistence side (common neighbors and total
/// agreement of persisting versus dissolving edges).
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceCellStats {
    pub n: usize,
    pub common_neighbors: MeanSe,
    pub total_agreement: MeanSe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceStats {
    pub transitions: Vec<(u16, BTreeMap<PersistenceClass, Option<PersistenceCellStats>>)>,
}

/// Structure statistics for persisting versus dissolving edges over each
/// transition.
pub fn persistence_stats(
    snapshots: &[Snapshot],
    profiles: &ProfileStore,
    schema: &AttributeSchema,
    agreement: &AgreementConfig,
) -> Result<PersistenceStats> {
    if snapshots.len() < 2 {
        return Err(Error::EmptyInput(
            "persistence statistics need at least two consecutive snapshots".into(),
        ));
    }
    let mut transitions = Vec::new();
    for w in snapshots.windows(2) {
        let (snap_t, snap_t1) = (&w[0], &w[1]);
        let mut by_class: BTreeMap<PersistenceClass, Vec<(f64, f64)>> = BTreeMap::new();
        for (&(u, v), _) in snap_t.edges() {
            if !snap_t1.has_node(u) || !snap_t1.has_node(v) {
                continue;
            }
            let class = classify_persistence(snap_t, snap_t1, u, v)?;
            let features = pair_features(snap_t, profiles, schema, agreement, u, v)?;
            by_class
                .entry(class)
                .or_default()
                .push((features.common_neighbor_count as f64, features.total_agreement));
        }
        let mut cells = BTreeMap::new();
        for class in PersistenceClass::all() {
            let cell = by_class.get(&class).map(|values| {
                let cns: Vec<f64> = values.iter().map(|&(cn, _)| cn).collect();
                let totals: Vec<f64> = values.iter().map(|&(_, t)| t).collect();
                PersistenceCellStats {
                    n: values.len(),
                    common_neighbors: mean_se(&cns),
                    total_agreement: mean_se(&totals),
                }
            });
            cells.insert(class, cell);
        }
        transitions.push((snap_t.semester().index(), cells));
    }
    Ok(PersistenceStats { transitions })
}

/// Mean communication volumes for one persistence class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommCellStats {
    pub n: usize,
    pub mean_calls: f64,
    pub mean_texts: f64,
}

/// Per-network, per-transition communication statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCommStats {
    pub transitions: Vec<(u16, BTreeMap<PersistenceClass, Option<CommCellStats>>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommStats {
    pub activity: NetworkCommStats,
    pub friendship: NetworkCommStats,
}

fn comm_stats_for(snapshots: &[Snapshot]) -> Result<NetworkCommStats> {
    if snapshots.len() < 2 {
        return Err(Error::EmptyInput(
            "communication statistics need at least two consecutive snapshots".into(),
        ));
    }
    let mut transitions = Vec::new();
    for w in snapshots.windows(2) {
        let (snap_t, snap_t1) = (&w[0], &w[1]);
        let mut by_class: BTreeMap<PersistenceClass, Vec<(f64, f64)>> = BTreeMap::new();
        for (&(u, v), weight) in snap_t.edges() {
            if !snap_t1.has_node(u) || !snap_t1.has_node(v) {
                continue;
            }
            let class = classify_persistence(snap_t, snap_t1, u, v)?;
            by_class
                .entry(class)
                .or_default()
                .push((weight.calls as f64, weight.texts as f64));
        }
        let mut cells = BTreeMap::new();
        for class in PersistenceClass::all() {
            let cell = by_class.get(&class).map(|values| CommCellStats {
                n: values.len(),
                mean_calls: values.iter().map(|&(c, _)| c).sum::<f64>() / values.len() as f64,
                mean_texts: values.iter().map(|&(_, t)| t).sum::<f64>() / values.len() as f64,
            });
            cells.insert(class, cell);
        }
        transitions.push((snap_t.semester().index(), cells));
    }
    Ok(NetworkCommStats { transitions })
}

/// Mean calls and texts per edge for persisting versus dissolving edges,
/// for both networks. Friendship snapshots must already carry contact
/// weights (see `ingest::attach_contact_weights`).
pub fn comm_stats(
    activity_snaps: &[Snapshot],
    friendship_snaps: &[Snapshot],
) -> Result<CommStats> {
    Ok(CommStats {
        activity: comm_stats_for(activity_snaps)?,
        friendship: comm_stats_for(friendship_snaps)?,
    })
}

// --- report emission ---------------------------------------------------

/// One row of a metrics grid (classifier x feature set).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub classifier: String,
    pub feature_set: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsGrid {
    pub rows: Vec<MetricsRow>,
}

/// Everything a report can include; absent parts are skipped.
#[derive(Default)]
pub struct ReportInputs<'a> {
    pub class_stats: Option<&'a ClassStats>,
    pub persistence_stats: Option<&'a PersistenceStats>,
    pub comm_stats: Option<&'a CommStats>,
    pub metrics_grid: Option<(&'a MetricsGrid, Task)>,
    pub ranking: Option<(&'a [String], &'a FeatureRanking, Task)>,
    pub summary_lines: Vec<String>,
}

fn write_file(path: &Path, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    written.push(path.to_path_buf());
    Ok(())
}

fn fmt_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

/// Emit deterministic CSV tables plus a text summary into `out_dir`;
/// returns the written paths. Re-running on identical inputs writes
/// byte-identical files.
pub fn emit_report(inputs: &ReportInputs<'_>, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    if let Some(stats) = inputs.class_stats {
        // fig1: mean total agreement per class; fig2: mean common neighbors.
        let mut fig1 = String::from("# linkdyn fig1 v1\nsemester_pair,edge_class,n,mean_total_agreement,se_total_agreement\n");
        let mut fig2 = String::from("# linkdyn fig2 v1\nsemester_pair,edge_class,n,mean_common_neighbors,se_common_neighbors\n");
        for t in &stats.transitions {
            for class in EdgeClass::all() {
                let cell = t.cells[&class].as_ref();
                fig1.push_str(&format!(
                    "{},{},{},{},{}\n",
                    t.semester_pair,
                    class.as_str(),
                    cell.map(|c| c.n).unwrap_or(0),
                    fmt_cell(cell.map(|c| c.total_agreement.mean)),
                    fmt_cell(cell.map(|c| c.total_agreement.se)),
                ));
                fig2.push_str(&format!(
                    "{},{},{},{},{}\n",
                    t.semester_pair,
                    class.as_str(),
                    cell.map(|c| c.n).unwrap_or(0),
                    fmt_cell(cell.map(|c| c.common_neighbors.mean)),
                    fmt_cell(cell.map(|c| c.common_neighbors.se)),
                ));
            }
        }
        write_file(&out_dir.join("fig1.csv"), &fig1, &mut written)?;
        write_file(&out_dir.join("fig2.csv"), &fig2, &mut written)?;

        // Appendix analog: per-attribute means per class.
        let mut appendix = String::from(
            "# linkdyn appendix v1\nsemester_pair,edge_class,attribute,n,mean_agreement,se_agreement\n",
        );
        for t in &stats.transitions {
            for class in EdgeClass::all() {
                let cell = t.cells[&class].as_ref();
                for (a, name) in stats.attribute_names.iter().enumerate() {
                    appendix.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        t.semester_pair,
                        class.as_str(),
                        name,
                        cell.map(|c| c.n).unwrap_or(0),
                        fmt_cell(cell.map(|c| c.per_attribute[a].mean)),
                        fmt_cell(cell.map(|c| c.per_attribute[a].se)),
                    ));
                }
            }
        }
        write_file(&out_dir.join("appendix.csv"), &appendix, &mut written)?;
    }

    if let Some(stats) = inputs.persistence_stats {
        let mut fig3 = String::from("# linkdyn fig3 v1\nsemester_pair,persistence_class,n,mean_common_neighbors,se_common_neighbors,mean_total_agreement,se_total_agreement\n");
        for (sem, cells) in &stats.transitions {
            for class in PersistenceClass::all() {
                let cell = cells[&class].as_ref();
                fig3.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    sem,
                    class.as_str(),
                    cell.map(|c| c.n).unwrap_or(0),
                    fmt_cell(cell.map(|c| c.common_neighbors.mean)),
                    fmt_cell(cell.map(|c| c.common_neighbors.se)),
                    fmt_cell(cell.map(|c| c.total_agreement.mean)),
                    fmt_cell(cell.map(|c| c.total_agreement.se)),
                ));
            }
        }
        write_file(&out_dir.join("fig3.csv"), &fig3, &mut written)?;
    }

    if let Some(stats) = inputs.comm_stats {
        // figs 4-5: activity network calls/texts; figs 6-7: friendship.
        let nets = [
            (&stats.activity, "fig4.csv", "fig5.csv", "fig4", "fig5"),
            (&stats.friendship, "fig6.csv", "fig7.csv", "fig6", "fig7"),
        ];
        for (net, calls_file, texts_file, calls_tag, texts_tag) in nets {
            let mut calls = format!(
                "# linkdyn {calls_tag} v1\nsemester_pair,persistence_class,n,mean_calls\n"
            );
            let mut texts = format!(
                "# linkdyn {texts_tag} v1\nsemester_pair,persistence_class,n,mean_texts\n"
            );
            for (sem, cells) in &net.transitions {
                for class in PersistenceClass::all() {
                    let cell = cells[&class].as_ref();
                    calls.push_str(&format!(
                        "{},{},{},{}\n",
                        sem,
                        class.as_str(),
                        cell.map(|c| c.n).unwrap_or(0),
                        fmt_cell(cell.map(|c| c.mean_calls)),
                    ));
                    texts.push_str(&format!(
                        "{},{},{},{}\n",
                        sem,
                        class.as_str(),
                        cell.map(|c| c.n).unwrap_or(0),
                        fmt_cell(cell.map(|c| c.mean_texts)),
                    ));
                }
            }
            write_file(&out_dir.join(calls_file), &calls, &mut written)?;
            write_file(&out_dir.join(texts_file), &texts, &mut written)?;
        }
    }

    if let Some((grid, task)) = &inputs.metrics_grid {
        let (file, tag) = match task {
            Task::Formation => ("tableII.csv", "tableII"),
            Task::Persistence => ("tableIV.csv", "tableIV"),
        };
        let mut out = format!(
            "# linkdyn {tag} v1\nclassifier,feature_set,accuracy,recall,recall_defined,tp,fp,tn,fn\n"
        );
        for row in &grid.rows {
            let m = &row.metrics;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                row.classifier,
                row.feature_set,
                m.accuracy,
                m.recall,
                m.recall_defined,
                m.counts.true_pos,
                m.counts.false_pos,
                m.counts.true_neg,
                m.counts.false_neg,
            ));
        }
        write_file(&out_dir.join(file), &out, &mut written)?;
    }

    if let Some((names, ranking, task)) = &inputs.ranking {
        let (file, tag) = match task {
            Task::Formation => ("tableIII.csv", "tableIII"),
            Task::Persistence => ("tableV.csv", "tableV"),
        };
        let mut out = format!("# linkdyn {tag} v1\nrank,feature,score,abs_score\n");
        for (rank, &feature) in ranking.order.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                rank + 1,
                names[feature],
                ranking.scores[feature],
                ranking.scores[feature].abs(),
            ));
        }
        write_file(&out_dir.join(file), &out, &mut written)?;
    }

    let mut summary = String::from("linkdyn report\n");
    for line in &inputs.summary_lines {
        summary.push_str(line);
        summary.push('\n');
    }
    summary.push_str(&format!("files: {}\n", written.len() + 1));
    write_file(&out_dir.join("summary.txt"), &summary, &mut written)?;

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::{AttributeKind, AttributeValue, Profile};
    use crate::graphcore::{EdgeWeight, Semester};
    use chrono::NaiveDate;

    fn n(id: u32) -> NodeId {
        NodeId::new(id)
    }

    fn pred(label: bool) -> Prediction {
        Prediction {
            label,
            score: if label { 1.0 } else { 0.0 },
        }
    }

    #[test]
    fn metrics_all_correct() {
        let preds = vec![pred(true), pred(false), pred(true)];
        let truth = vec![true, false, true];
        let m = metrics(&preds, &truth).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.recall, 1.0);
        assert!(m.recall_defined);
    }

    #[test]
    fn all_negative_predictions_have_zero_recall() {
        // The degenerate imbalanced regime: high accuracy, no recall.
        let mut preds = vec![pred(false); 100];
        let mut truth = vec![false; 100];
        truth[3] = true;
        truth[57] = true;
        preds[10] = pred(false);
        let m = metrics(&preds, &truth).unwrap();
        assert_eq!(m.recall, 0.0);
        assert!(m.recall_defined);
        assert!((m.accuracy - 0.98).abs() < 1e-12);
    }

    #[test]
    fn recall_flagged_undefined_without_positives() {
        let preds = vec![pred(false), pred(true)];
        let truth = vec![false, false];
        let m = metrics(&preds, &truth).unwrap();
        assert!(!m.recall_defined);
        assert_eq!(m.recall, 0.0);
    }

    #[test]
    fn metrics_match_counting_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let preds: Vec<Prediction> = (0..200).map(|_| pred(rng.random())).collect();
        let truth: Vec<bool> = (0..200).map(|_| rng.random()).collect();
        let m = metrics(&preds, &truth).unwrap();
        // Independent confusion-count loop.
        let (mut tp, mut fp, mut tn, mut fneg) = (0usize, 0usize, 0usize, 0usize);
        for i in 0..200 {
            match (preds[i].label, truth[i]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fneg += 1,
            }
        }
        assert_eq!(m.counts.true_pos, tp);
        assert_eq!(m.counts.false_pos, fp);
        assert_eq!(m.counts.true_neg, tn);
        assert_eq!(m.counts.false_neg, fneg);
        assert_eq!(m.accuracy, (tp + tn) as f64 / 200.0);
        assert_eq!(m.recall, tp as f64 / (tp + fneg) as f64);
        assert_eq!(m.counts.total(), 200);
    }

    #[test]
    fn empty_metrics_is_an_error() {
        assert!(metrics(&[], &[]).is_err());
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

    fn one_flag_schema() -> AttributeSchema {
        AttributeSchema::new(vec![("flag".into(), AttributeKind::Binary)]).unwrap()
    }

    /// Profiles where listed nodes answer `true` and the rest `false`.
    fn flag_profiles(
        schema: &AttributeSchema,
        semesters: &[u16],
        nodes: &[u32],
        yes: &[u32],
    ) -> ProfileStore {
        let mut store = ProfileStore::new();
        for &s in semesters {
            for &id in nodes {
                let value = AttributeValue::Flag(yes.contains(&id));
                store.insert(
                    Profile::new(n(id), s, vec![Some(value)], schema).unwrap(),
                );
            }
        }
        store
    }

    #[test]
    fn constructed_extremes_give_one_and_zero() {
        // Edges join identical profiles; the non-edge joins opposites.
        let schema = one_flag_schema();
        let t = graph(1, &[0, 1, 2, 3], &[(0, 1), (2, 3)]);
        let t1 = graph(2, &[0, 1, 2, 3], &[(0, 1), (2, 3)]);
        let profiles = flag_profiles(&schema, &[1, 2], &[0, 1, 2, 3], &[0, 1]);
        let stats =
            edge_class_stats(&[t, t1], &profiles, &schema, &AgreementConfig::default()).unwrap();
        let cells = &stats.transitions[0].cells;
        let existing = cells[&EdgeClass::Existing].as_ref().unwrap();
        assert_eq!(existing.total_agreement.mean, 1.0);
        // Non-existing pairs: (0,2), (0,3), (1,2), (1,3) disagree; none
        // formed, and (2,3)/(0,1) are edges. Mean agreement 0.
        let non = cells[&EdgeClass::NonExisting].as_ref().unwrap();
        assert_eq!(non.total_agreement.mean, 0.0);
        assert!(cells[&EdgeClass::ToBeFormed].is_none());
    }

    #[test]
    fn class_stats_match_bruteforce_recomputation() {
        use rand::{Rng, SeedableRng};
        let schema = one_flag_schema();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let ids: Vec<u32> = (0..30).collect();
        let edges = |seed_shift: u64| {
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(6 + seed_shift);
            let mut e = Vec::new();
            for i in 0..30u32 {
                for j in (i + 1)..30 {
                    if r.random::<f64>() < 0.12 {
                        e.push((i, j));
                    }
                }
            }
            e
        };
        let t = graph(1, &ids, &edges(1));
        let t1 = graph(2, &ids, &edges(2));
        let yes: Vec<u32> = (0..30).filter(|_| rng.random()).collect();
        let profiles = flag_profiles(&schema, &[1, 2], &ids, &yes);
        let cfg = AgreementConfig::default();
        let stats = edge_class_stats(
            &[t.clone(), t1.clone()],
            &profiles,
            &schema,
            &cfg,
        )
        .unwrap();
        // Brute-force oracle: recompute every cell mean directly.
        for class in EdgeClass::all() {
            let mut totals = Vec::new();
            for i in 0..30u32 {
                for j in (i + 1)..30 {
                    if classify_edge(&t, &t1, n(i), n(j)).unwrap() == class {
                        let same = yes.contains(&i) == yes.contains(&j);
                        totals.push(if same { 1.0 } else { 0.0 });
                    }
                }
            }
            let cell = stats.transitions[0].cells[&class].as_ref();
            match cell {
                None => assert!(totals.is_empty()),
                Some(c) => {
                    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
                    assert_eq!(c.n, totals.len());
                    assert!((c.total_agreement.mean - mean).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn weighted_class_means_recover_global_mean() {
        use rand::{Rng, SeedableRng};
        let schema = one_flag_schema();
        let ids: Vec<u32> = (0..20).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        for i in 0..20u32 {
            for j in (i + 1)..20 {
                if rng.random::<f64>() < 0.2 {
                    e1.push((i, j));
                }
                if rng.random::<f64>() < 0.2 {
                    e2.push((i, j));
                }
            }
        }
        let t = graph(1, &ids, &e1);
        let t1 = graph(2, &ids, &e2);
        let yes: Vec<u32> = (0..20).filter(|_| rng.random()).collect();
        let profiles = flag_profiles(&schema, &[1, 2], &ids, &yes);
        let stats = edge_class_stats(
            &[t, t1],
            &profiles,
            &schema,
            &AgreementConfig::default(),
        )
        .unwrap();
        let cells = &stats.transitions[0].cells;
        let mut weighted = 0.0;
        let mut count = 0usize;
        for class in EdgeClass::all() {
            if let Some(c) = cells[&class].as_ref() {
                weighted += c.total_agreement.mean * c.n as f64;
                count += c.n;
            }
        }
        let global_mean = {
            let mut total = 0.0;
            for i in 0..20u32 {
                for j in (i + 1)..20 {
                    total += if yes.contains(&i) == yes.contains(&j) {
                        1.0
                    } else {
                        0.0
                    };
                }
            }
            total / 190.0
        };
        assert_eq!(count, 190);
        assert!((weighted / count as f64 - global_mean).abs() < 1e-9);
    }

    #[test]
    fn persistence_cells_sum_to_qualifying_edges() {
        let schema = one_flag_schema();
        let t = graph(1, &[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3)]);
        let t1 = graph(2, &[0, 1, 2], &[(0, 1)]);
        let profiles = flag_profiles(&schema, &[1, 2], &[0, 1, 2, 3], &[0]);
        let stats = persistence_stats(
            &[t, t1],
            &profiles,
            &schema,
            &AgreementConfig::default(),
        )
        .unwrap();
        let cells = &stats.transitions[0].1;
        let persisting = cells[&PersistenceClass::Persisting].as_ref().unwrap();
        let dissolving = cells[&PersistenceClass::Dissolving].as_ref().unwrap();
        // Edge (2,3) is excluded: node 3 left the study.
        assert_eq!(persisting.n + dissolving.n, 2);
    }

    #[test]
    fn single_edge_comm_classes_are_exact() {
        let mut b = Snapshot::builder(sem(1));
        b.add_edge(n(0), n(1), EdgeWeight::new(10, 50)).unwrap();
        b.add_edge(n(2), n(3), EdgeWeight::new(2, 5)).unwrap();
        let t = b.build();
        let t1 = graph(2, &[0, 1, 2, 3], &[(0, 1)]);
        let stats = comm_stats_for(&[t, t1]).unwrap();
        let cells = &stats.transitions[0].1;
        let persisting = cells[&PersistenceClass::Persisting].as_ref().unwrap();
        assert_eq!((persisting.mean_calls, persisting.mean_texts), (10.0, 50.0));
        let dissolving = cells[&PersistenceClass::Dissolving].as_ref().unwrap();
        assert_eq!((dissolving.mean_calls, dissolving.mean_texts), (2.0, 5.0));
    }

    #[test]
    fn comm_stats_match_bruteforce_means() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let mut b = Snapshot::builder(sem(1));
        let mut edges = Vec::new();
        for i in 0..12u32 {
            for j in (i + 1)..12 {
                if rng.random::<f64>() < 0.3 {
                    let w = EdgeWeight::new(rng.random_range(0..40), rng.random_range(0..100));
                    b.add_edge(n(i), n(j), w).unwrap();
                    edges.push(((i, j), w));
                }
            }
        }
        b.add_nodes((0..12).map(n));
        let t = b.build();
        let mut keep = Vec::new();
        for (&(u, v), _) in t.edges() {
            if rng.random() {
                keep.push((u.value(), v.value()));
            }
        }
        let t1 = graph(2, &(0..12).collect::<Vec<_>>(), &keep);
        let stats = comm_stats_for(&[t.clone(), t1.clone()]).unwrap();
        let cells = &stats.transitions[0].1;
        for class in PersistenceClass::all() {
            let members: Vec<&((u32, u32), EdgeWeight)> = edges
                .iter()
                .filter(|((u, v), _)| {
                    let persisted = t1.has_edge(n(*u), n(*v));
                    (class == PersistenceClass::Persisting) == persisted
                })
                .collect();
            match cells[&class].as_ref() {
                None => assert!(members.is_empty()),
                Some(c) => {
                    assert_eq!(c.n, members.len());
                    let mean_calls = members.iter().map(|(_, w)| w.calls as f64).sum::<f64>()
                        / members.len() as f64;
                    let mean_texts = members.iter().map(|(_, w)| w.texts as f64).sum::<f64>()
                        / members.len() as f64;
                    assert!((c.mean_calls - mean_calls).abs() < 1e-12);
                    assert!((c.mean_texts - mean_texts).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let schema = one_flag_schema();
        let t = graph(1, &[0, 1, 2, 3], &[(0, 1), (1, 2)]);
        let t1 = graph(2, &[0, 1, 2, 3], &[(0, 1), (0, 2)]);
        let profiles = flag_profiles(&schema, &[1, 2], &[0, 1, 2, 3], &[0, 1]);
        let cfg = AgreementConfig::default();
        let snaps = vec![t, t1];
        let class_stats = edge_class_stats(&snaps, &profiles, &schema, &cfg).unwrap();
        let pers = persistence_stats(&snaps, &profiles, &schema, &cfg).unwrap();
        let comm = comm_stats(&snaps, &snaps).unwrap();
        let inputs = ReportInputs {
            class_stats: Some(&class_stats),
            persistence_stats: Some(&pers),
            comm_stats: Some(&comm),
            summary_lines: vec!["seed: 1".into()],
            ..Default::default()
        };
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let w1 = emit_report(&inputs, dir1.path()).unwrap();
        let w2 = emit_report(&inputs, dir2.path()).unwrap();
        assert_eq!(w1.len(), w2.len());
        for (a, b) in w1.iter().zip(&w2) {
            assert_eq!(
                std::fs::read(a).unwrap(),
                std::fs::read(b).unwrap(),
                "{} differs",
                a.display()
            );
        }
    }

    #[test]
    fn fig1_rows_follow_transitions_times_classes() {
        let schema = one_flag_schema();
        let ids: Vec<u32> = (0..6).collect();
        let snaps: Vec<Snapshot> = (1..=4)
            .map(|s| graph(s, &ids, &[(0, 1), (2, 3), (s as u32 % 4, 5)]))
            .collect();
        let profiles = flag_profiles(&schema, &[1, 2, 3, 4], &ids, &[0, 2]);
        let stats =
            edge_class_stats(&snaps, &profiles, &schema, &AgreementConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let inputs = ReportInputs {
            class_stats: Some(&stats),
            ..Default::default()
        };
        emit_report(&inputs, dir.path()).unwrap();
        let fig1 = std::fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
        let data_rows = fig1
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("semester_pair") && !l.is_empty())
            .count();
        assert_eq!(data_rows, 3 * 3); // 3 transitions x 3 classes
    }

    #[test]
    fn empty_grid_emits_header_only_table() {
        let grid = MetricsGrid::default();
        let inputs = ReportInputs {
            metrics_grid: Some((&grid, Task::Formation)),
            ..Default::default()
        };
        let dir = tempfile::tempdir().unwrap();
        emit_report(&inputs, dir.path()).unwrap();
        let table = std::fs::read_to_string(dir.path().join("tableII.csv")).unwrap();
        assert_eq!(table.lines().count(), 2); // version comment + header
    }
}
