//! End-to-end runs: ingest, network construction, dataset assembly,
//! SVD, training, evaluation, ranking, and report emission, each behind a
//! command-shaped entry point the CLI wraps.
//!
//! Every run writes a `manifest.toml` into its output directory before
//! producing any report (status `incomplete`, flipped to `complete` at the
//! end), recording the resolved configuration and SHA-256 digests of the
//! inputs. Manifests and reports contain no timestamps, so a rerun over
//! identical inputs is byte-identical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attributes::{AgreementConfig, AttributeSchema, ProfileStore};
use crate::dataset::{
    pooled_examples, read_dataset_csv, split, write_dataset_csv, DatasetMeta, LabeledDataset, Task,
};
use crate::error::{Error, Result};
use crate::eval::{emit_report, metrics, MetricsGrid, MetricsRow, ReportInputs};
use crate::graphcore::{write_snapshots, Snapshot};
use crate::ingest::{
    attach_contact_weights, build_activity_network, build_friendship_network, parse_contact_log,
    parse_nominations, ActivityConfig, ContactRecord, Nomination, NominationRule, ParseOptions,
    Roster, SemesterCalendar,
};
use crate::linalg::Mat;
use crate::models::{fit, predict, ClassifierKind, Prediction, TrainConfig, TrainedModel};
use crate::spectral::{
    project, rank_features, svd, FeatureMatrix, FeatureRanking, Standardization, SvdFactors,
};

/// Which of the two networks a command operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    Activity,
    Friendship,
}

impl NetworkKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NetworkKind::Activity => "activity",
            NetworkKind::Friendship => "friendship",
        }
    }
}

impl std::str::FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "activity" => Ok(NetworkKind::Activity),
            "friendship" => Ok(NetworkKind::Friendship),
            other => Err(Error::InvalidArgument(format!(
                "unknown network {other:?} (expected activity or friendship)"
            ))),
        }
    }
}

// --- manifest ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Incomplete,
    Complete,
}

/// The reproducibility record of one command run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub status: RunStatus,
    pub seed: Option<u64>,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.toml";

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Manifest {
            artifact: "linkdyn".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            status: RunStatus::Incomplete,
            seed,
            config: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.insert(key.into(), value.to_string());
        self
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: hex,
        });
        Ok(())
    }

    /// Write to `dir/manifest.toml`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(MANIFEST_FILE);
        let body = toml::to_string(self)
            .map_err(|e| Error::Config(format!("manifest serialization failed: {e}")))?;
        std::fs::write(&path, format!("# linkdyn manifest v1\n{body}"))
            .map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("manifest parse failed: {e}")))
    }

    /// Record outputs (as names relative to the run directory) and flip
    /// the status to complete.
    pub fn finish(&mut self, dir: &Path, written: &[PathBuf]) -> Result<()> {
        let mut names: Vec<String> = written
            .iter()
            .map(|p| {
                p.strip_prefix(dir)
                    .unwrap_or(p)
                    .display()
                    .to_string()
            })
            .collect();
        names.sort();
        names.dedup();
        self.outputs = names;
        self.status = RunStatus::Complete;
        self.write(dir)?;
        Ok(())
    }
}

// --- data directory ----------------------------------------------------

/// Parsed contents of an input data directory (the three CSVs plus the
/// schema).
#[derive(Debug)]
pub struct DataDir {
    pub schema: AttributeSchema,
    pub profiles: ProfileStore,
    pub roster: Roster,
    pub contacts: Vec<ContactRecord>,
    pub nominations: Vec<Nomination>,
    pub calendar: SemesterCalendar,
    pub input_paths: Vec<PathBuf>,
}

/// Load `contacts.csv`, `profiles.csv`, `nominations.csv`, and
/// `schema.toml` from a directory. The calendar spans the semesters that
/// actually appear in the survey data.
pub fn load_data_dir(dir: &Path, opts: ParseOptions) -> Result<DataDir> {
    let schema_path = dir.join(crate::synth::SCHEMA_FILE);
    let contacts_path = dir.join(crate::synth::CONTACTS_FILE);
    let profiles_path = dir.join(crate::synth::PROFILES_FILE);
    let nominations_path = dir.join(crate::synth::NOMINATIONS_FILE);
    for p in [&schema_path, &contacts_path, &profiles_path, &nominations_path] {
        if !p.exists() {
            return Err(Error::Config(format!(
                "missing input file {}",
                p.display()
            )));
        }
    }
    let schema = AttributeSchema::load(&schema_path)?;
    let profiles = crate::attributes::read_profiles(&profiles_path, &schema)?;
    if profiles.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} holds no profiles",
            profiles_path.display()
        )));
    }
    let contacts = parse_contact_log(&contacts_path, opts)?;
    let nominations = parse_nominations(&nominations_path, opts)?;
    let roster = Roster::from_profiles(&profiles);
    let max_sem = profiles
        .semesters()
        .into_iter()
        .chain(nominations.nominations.iter().map(|n| n.semester_index))
        .max()
        .unwrap_or(1);
    let calendar = SemesterCalendar::generate(max_sem as usize);
    Ok(DataDir {
        schema,
        profiles,
        roster,
        contacts: contacts.records,
        nominations: nominations.nominations,
        calendar,
        input_paths: vec![schema_path, contacts_path, profiles_path, nominations_path],
    })
}

/// Build the requested network's snapshots; friendship snapshots carry
/// contact volumes from the log.
pub fn build_network(
    data: &DataDir,
    kind: NetworkKind,
    threshold: u32,
    rule: NominationRule,
) -> Result<Vec<Snapshot>> {
    match kind {
        NetworkKind::Activity => {
            let cfg = ActivityConfig {
                threshold,
                include_isolates: true,
            };
            let (snaps, _) =
                build_activity_network(&data.contacts, &data.calendar, &cfg, &data.roster)?;
            Ok(snaps)
        }
        NetworkKind::Friendship => {
            let (snaps, _) = build_friendship_network(
                &data.nominations,
                &data.calendar,
                rule,
                &data.roster,
                true,
            )?;
            attach_contact_weights(&snaps, &data.contacts, &data.calendar)
        }
    }
}

// --- saved models ------------------------------------------------------

/// Standardization plus top-k factors fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTransform {
    pub standardization: Standardization,
    pub factors: SvdFactors,
    pub k: usize,
}

impl ProjectionTransform {
    pub fn apply(&self, raw: &Mat) -> Result<Mat> {
        let standardized = self.standardization.apply(raw)?;
        project(&standardized, &self.factors, self.k)
    }
}

const PIPELINE_MODEL_VERSION: u32 = 1;

/// A trained classifier bundled with its feature space: names, and the
/// train-time projection when one was used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub transform: Option<ProjectionTransform>,
    pub model: TrainedModel,
}

impl PipelineModel {
    pub fn new(
        feature_names: Vec<String>,
        transform: Option<ProjectionTransform>,
        model: TrainedModel,
    ) -> Self {
        PipelineModel {
            format_version: PIPELINE_MODEL_VERSION,
            feature_names,
            transform,
            model,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("model serialization failed: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: PipelineModel = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("model parse failed: {e}")))?;
        if model.format_version != PIPELINE_MODEL_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }

    /// Predict on raw feature rows, applying the stored transform first
    /// when present.
    pub fn predict_raw(&self, raw: &Mat) -> Result<Vec<Prediction>> {
        match &self.transform {
            Some(t) => predict(&self.model, &t.apply(raw)?),
            None => predict(&self.model, raw),
        }
    }
}

// --- commands ----------------------------------------------------------

/// `synth`: generate a world and write its input files.
pub struct SynthCmd {
    pub config: crate::synth::SynthConfig,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
}

pub fn run_synth(cmd: &SynthCmd) -> Result<Vec<PathBuf>> {
    let schema = AttributeSchema::default_survey();
    let mut manifest = Manifest::new("synth", Some(cmd.config.seed));
    manifest.set("n_nodes", cmd.config.n_nodes);
    manifest.set("n_semesters", cmd.config.n_semesters);
    manifest.set("homophily_strength", cmd.config.homophily_strength);
    manifest.set("pruning_strength", cmd.config.pruning_strength);
    manifest.set("triadic_strength", cmd.config.triadic_strength);
    manifest.set("polarization", cmd.config.polarization);
    manifest.set("activity_threshold", cmd.config.activity_threshold);
    if let Some(path) = &cmd.config_path {
        manifest.add_input(path)?;
    }
    manifest.write(&cmd.out_dir)?;
    let world = crate::synth::generate(&cmd.config, &schema)?;
    let written = crate::synth::write_world(&world, &schema, &cmd.out_dir)?;
    manifest.finish(&cmd.out_dir, &written)?;
    Ok(written)
}

/// `build`: construct one network and write its snapshot CSVs.
pub struct BuildCmd {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub network: NetworkKind,
    pub threshold: u32,
    pub nomination_rule: NominationRule,
    pub strict: bool,
}

pub fn run_build(cmd: &BuildCmd) -> Result<Vec<PathBuf>> {
    let data = load_data_dir(&cmd.data_dir, ParseOptions { strict: cmd.strict })?;
    let mut manifest = Manifest::new("build", None);
    manifest.set("network", cmd.network.as_str());
    manifest.set("threshold", cmd.threshold);
    manifest.set("nomination_rule", format!("{:?}", cmd.nomination_rule));
    for p in &data.input_paths {
        manifest.add_input(p)?;
    }
    manifest.write(&cmd.out_dir)?;
    let snaps = build_network(&data, cmd.network, cmd.threshold, cmd.nomination_rule)?;
    let edges = cmd.out_dir.join("edges.csv");
    let nodes = cmd.out_dir.join("nodes.csv");
    write_snapshots(&snaps, &edges, &nodes)?;
    let written = vec![edges, nodes];
    manifest.finish(&cmd.out_dir, &written)?;
    Ok(written)
}

/// `dataset`: build the pooled labeled dataset and an 80/20-style split.
pub struct DatasetCmd {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub task: Task,
    pub network: NetworkKind,
    pub threshold: u32,
    pub nomination_rule: NominationRule,
    pub max_hops: Option<u32>,
    pub train_fraction: f64,
    pub seed: u64,
    pub strict: bool,
}

pub fn run_dataset(cmd: &DatasetCmd) -> Result<Vec<PathBuf>> {
    let data = load_data_dir(&cmd.data_dir, ParseOptions { strict: cmd.strict })?;
    let mut manifest = Manifest::new("dataset", Some(cmd.seed));
    manifest.set("task", cmd.task.as_str());
    manifest.set("network", cmd.network.as_str());
    manifest.set("threshold", cmd.threshold);
    manifest.set(
        "max_hops",
        cmd.max_hops.map_or("all".to_string(), |h| h.to_string()),
    );
    manifest.set("train_fraction", cmd.train_fraction);
    for p in &data.input_paths {
        manifest.add_input(p)?;
    }
    manifest.write(&cmd.out_dir)?;

    let snaps = build_network(&data, cmd.network, cmd.threshold, cmd.nomination_rule)?;
    let agreement = AgreementConfig::default();
    let max_hops = match cmd.task {
        Task::Formation => cmd.max_hops,
        Task::Persistence => None,
    };
    let ds = pooled_examples(
        cmd.task,
        &snaps,
        &data.profiles,
        &data.schema,
        &agreement,
        max_hops,
    )?;
    let parts = split(&ds, cmd.train_fraction, cmd.seed)?;

    let full = cmd.out_dir.join("dataset.csv");
    let train = cmd.out_dir.join("train.csv");
    let test = cmd.out_dir.join("test.csv");
    write_dataset_csv(&ds, &full)?;
    write_dataset_csv(&parts.train, &train)?;
    write_dataset_csv(&parts.test, &test)?;
    let meta_path = cmd.out_dir.join("dataset.meta.toml");
    let meta = DatasetMeta {
        task: cmd.task,
        network: cmd.network.as_str().into(),
        semester_pairs: (1..data.calendar.len() as u16).collect(),
        max_hops,
        threshold: Some(cmd.threshold),
        seed: Some(cmd.seed),
        positives: ds.positives(),
        negatives: ds.negatives(),
    };
    meta.save(&meta_path)?;
    let written = vec![full, train, test, meta_path];
    manifest.finish(&cmd.out_dir, &written)?;
    Ok(written)
}

/// `train`: fit one classifier on a dataset CSV, optionally through a
/// top-k eigenfeature projection.
pub struct TrainCmd {
    pub train_csv: PathBuf,
    pub out_dir: PathBuf,
    pub classifier: ClassifierKind,
    /// `Some(k)` trains on the top-k projection; `None` trains on the raw
    /// features.
    pub k: Option<usize>,
    pub train_config: TrainConfig,
}

pub fn run_train(cmd: &TrainCmd) -> Result<PathBuf> {
    let tab = read_dataset_csv(&cmd.train_csv)?;
    let mut manifest = Manifest::new("train", Some(cmd.train_config.seed));
    manifest.set("classifier", cmd.classifier.as_str());
    manifest.set("k", cmd.k.map_or("no_svd".to_string(), |k| k.to_string()));
    manifest.set("epochs", cmd.train_config.epochs);
    manifest.set("learning_rate", cmd.train_config.learning_rate);
    manifest.set("regularization", cmd.train_config.regularization);
    manifest.add_input(&cmd.train_csv)?;
    manifest.write(&cmd.out_dir)?;

    let (transform, x) = match cmd.k {
        None => (None, tab.x.clone()),
        Some(k) => {
            let fm = FeatureMatrix::new(tab.x.clone())?.standardized();
            let factors = svd(&fm)?;
            if k == 0 || k > factors.rank_dim() {
                return Err(Error::InvalidArgument(format!(
                    "k={k} outside 1..={} for this dataset",
                    factors.rank_dim()
                )));
            }
            let projected = project(fm.data(), &factors, k)?;
            let transform = ProjectionTransform {
                standardization: fm.standardization().expect("standardized above").clone(),
                factors,
                k,
            };
            (Some(transform), projected)
        }
    };
    let model = fit(cmd.classifier, &x, &tab.y, &cmd.train_config)?;
    let bundle = PipelineModel::new(tab.feature_names.clone(), transform, model);
    let model_path = cmd.out_dir.join("model.json");
    bundle.save(&model_path)?;
    manifest.finish(&cmd.out_dir, &[model_path.clone()])?;
    Ok(model_path)
}

/// `eval`: score a saved model on a dataset CSV.
pub struct EvalCmd {
    pub model_path: PathBuf,
    pub test_csv: PathBuf,
    pub out_dir: PathBuf,
}

pub fn run_eval(cmd: &EvalCmd) -> Result<crate::eval::Metrics> {
    let bundle = PipelineModel::load(&cmd.model_path)?;
    let tab = read_dataset_csv(&cmd.test_csv)?;
    if tab.feature_names != bundle.feature_names {
        return Err(Error::Config(
            "test dataset features do not match the model's training features".into(),
        ));
    }
    let mut manifest = Manifest::new("eval", None);
    manifest.set("classifier", bundle.model.kind().as_str());
    manifest.add_input(&cmd.model_path)?;
    manifest.add_input(&cmd.test_csv)?;
    manifest.write(&cmd.out_dir)?;

    let preds = bundle.predict_raw(&tab.x)?;
    let m = metrics(&preds, &tab.y)?;
    let path = cmd.out_dir.join("metrics.csv");
    let mut out = String::from(
        "# linkdyn metrics v1\nclassifier,accuracy,recall,recall_defined,tp,fp,tn,fn\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{}\n",
        bundle.model.kind(),
        m.accuracy,
        m.recall,
        m.recall_defined,
        m.counts.true_pos,
        m.counts.false_pos,
        m.counts.true_neg,
        m.counts.false_neg,
    ));
    std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    manifest.finish(&cmd.out_dir, &[path])?;
    Ok(m)
}

/// `rank`: back-project a saved linear model's weights into original
/// feature scores.
pub struct RankCmd {
    pub model_path: PathBuf,
    pub out_dir: PathBuf,
}

pub fn run_rank(cmd: &RankCmd) -> Result<FeatureRanking> {
    let bundle = PipelineModel::load(&cmd.model_path)?;
    let transform = bundle.transform.as_ref().ok_or_else(|| {
        Error::Config("ranking needs a model trained on an SVD projection (pass --k)".into())
    })?;
    let (weights, _) = bundle.model.linear_weights().ok_or_else(|| {
        Error::Config(
            "ranking needs a linear model (logistic or linear_svm) for its weight vector".into(),
        )
    })?;
    let mut manifest = Manifest::new("rank", None);
    manifest.set("classifier", bundle.model.kind().as_str());
    manifest.set("k", transform.k);
    manifest.add_input(&cmd.model_path)?;
    manifest.write(&cmd.out_dir)?;

    let ranking = rank_features(&transform.factors, weights)?;
    let path = cmd.out_dir.join("ranking.csv");
    let mut out = String::from("# linkdyn ranking v1\nrank,feature,score,abs_score\n");
    for (rank, &feature) in ranking.order.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            rank + 1,
            bundle.feature_names[feature],
            ranking.scores[feature],
            ranking.scores[feature].abs(),
        ));
    }
    std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    manifest.finish(&cmd.out_dir, &[path])?;
    Ok(ranking)
}

/// `stats`: descriptive statistics (figure analogs) for both networks.
pub struct StatsCmd {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub threshold: u32,
    pub nomination_rule: NominationRule,
    pub strict: bool,
}

pub fn run_stats(cmd: &StatsCmd) -> Result<Vec<PathBuf>> {
    let data = load_data_dir(&cmd.data_dir, ParseOptions { strict: cmd.strict })?;
    let mut manifest = Manifest::new("stats", None);
    manifest.set("threshold", cmd.threshold);
    manifest.set("nomination_rule", format!("{:?}", cmd.nomination_rule));
    for p in &data.input_paths {
        manifest.add_input(p)?;
    }
    manifest.write(&cmd.out_dir)?;

    let activity = build_network(&data, NetworkKind::Activity, cmd.threshold, cmd.nomination_rule)?;
    let friendship =
        build_network(&data, NetworkKind::Friendship, cmd.threshold, cmd.nomination_rule)?;
    let agreement = AgreementConfig::default();
    let class_stats =
        crate::eval::edge_class_stats(&activity, &data.profiles, &data.schema, &agreement)?;
    let pers_stats =
        crate::eval::persistence_stats(&activity, &data.profiles, &data.schema, &agreement)?;
    let comm = crate::eval::comm_stats(&activity, &friendship)?;
    let inputs = ReportInputs {
        class_stats: Some(&class_stats),
        persistence_stats: Some(&pers_stats),
        comm_stats: Some(&comm),
        summary_lines: vec![
            format!("networks: activity, friendship (threshold {})", cmd.threshold),
            format!(
                "semesters: {}, activity edges per semester: {}",
                data.calendar.len(),
                activity
                    .iter()
                    .map(|s| s.edge_count().to_string())
                    .collect::<Vec<_>>()
                    .join("/")
            ),
        ],
        ..Default::default()
    };
    let written = emit_report(&inputs, &cmd.out_dir)?;
    manifest.finish(&cmd.out_dir, &written)?;
    Ok(written)
}

/// `pipeline`: the full task run, from raw files to metric grids and a
/// feature ranking.
pub struct PipelineCmd {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub task: Task,
    pub network: NetworkKind,
    pub threshold: u32,
    pub nomination_rule: NominationRule,
    pub max_hops: Option<u32>,
    pub k_list: Vec<usize>,
    pub classifiers: Vec<ClassifierKind>,
    pub train_fraction: f64,
    pub train_config: TrainConfig,
    pub strict: bool,
}

impl PipelineCmd {
    pub fn new(data_dir: PathBuf, out_dir: PathBuf, task: Task) -> Self {
        PipelineCmd {
            data_dir,
            out_dir,
            task,
            network: NetworkKind::Activity,
            threshold: 5,
            nomination_rule: NominationRule::Either,
            max_hops: Some(2),
            k_list: vec![2, 15, 28],
            classifiers: ClassifierKind::all().to_vec(),
            train_fraction: 0.8,
            train_config: TrainConfig::default(),
            strict: false,
        }
    }
}

/// What a pipeline run produced, for callers that want more than files.
pub struct PipelineSummary {
    pub grid: MetricsGrid,
    pub ranking: Option<FeatureRanking>,
    pub feature_names: Vec<String>,
    pub train_examples: usize,
    pub test_examples: usize,
    pub positives: usize,
    pub negatives: usize,
    pub written: Vec<PathBuf>,
}

fn dataset_matrices(ds: &LabeledDataset) -> Result<(Mat, Vec<bool>)> {
    ds.to_matrix()
}

pub fn run_pipeline(cmd: &PipelineCmd) -> Result<PipelineSummary> {
    if cmd.k_list.is_empty() && cmd.classifiers.is_empty() {
        return Err(Error::InvalidArgument(
            "pipeline needs at least one classifier".into(),
        ));
    }
    let data = load_data_dir(&cmd.data_dir, ParseOptions { strict: cmd.strict })?;
    let mut manifest = Manifest::new("pipeline", Some(cmd.train_config.seed));
    manifest.set("task", cmd.task.as_str());
    manifest.set("network", cmd.network.as_str());
    manifest.set("threshold", cmd.threshold);
    manifest.set(
        "max_hops",
        cmd.max_hops.map_or("all".to_string(), |h| h.to_string()),
    );
    manifest.set(
        "k_list",
        cmd.k_list
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.set(
        "classifiers",
        cmd.classifiers
            .iter()
            .map(|c| c.as_str().to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.set("train_fraction", cmd.train_fraction);
    manifest.set("epochs", cmd.train_config.epochs);
    for p in &data.input_paths {
        manifest.add_input(p)?;
    }
    manifest.write(&cmd.out_dir)?;

    let snaps = build_network(&data, cmd.network, cmd.threshold, cmd.nomination_rule)?;
    let agreement = AgreementConfig::default();
    let max_hops = match cmd.task {
        Task::Formation => cmd.max_hops,
        Task::Persistence => None,
    };
    let ds = pooled_examples(
        cmd.task,
        &snaps,
        &data.profiles,
        &data.schema,
        &agreement,
        max_hops,
    )?;
    let parts = split(&ds, cmd.train_fraction, cmd.train_config.seed)?;
    let (train_x, train_y) = dataset_matrices(&parts.train)?;
    let (test_x, test_y) = dataset_matrices(&parts.test)?;

    // The factors are fitted once on the standardized training matrix and
    // shared by every k.
    let standardized = FeatureMatrix::new(train_x.clone())?.standardized();
    let factors = svd(&standardized)?;
    for &k in &cmd.k_list {
        if k == 0 || k > factors.rank_dim() {
            return Err(Error::InvalidArgument(format!(
                "k={k} outside 1..={} for this dataset",
                factors.rank_dim()
            )));
        }
    }
    let std_test = standardized
        .standardization()
        .expect("standardized above")
        .apply(&test_x)?;

    let mut grid = MetricsGrid::default();
    for &classifier in &cmd.classifiers {
        // Raw features first, then each eigenfeature budget.
        let mut views: Vec<(String, Mat, Mat)> =
            vec![("no_svd".into(), train_x.clone(), test_x.clone())];
        for &k in &cmd.k_list {
            let ptrain = project(standardized.data(), &factors, k)?;
            let ptest = project(&std_test, &factors, k)?;
            views.push((format!("k{k}"), ptrain, ptest));
        }
        for (name, xtr, xte) in views {
            let model = fit(classifier, &xtr, &train_y, &cmd.train_config)?;
            let preds = predict(&model, &xte)?;
            let m = metrics(&preds, &test_y)?;
            grid.rows.push(MetricsRow {
                classifier: classifier.as_str().into(),
                feature_set: name,
                metrics: m,
            });
        }
    }

    // Ranking: logistic weights on the largest requested projection.
    let ranking = match cmd.k_list.iter().max() {
        None => None,
        Some(&k_rank) => {
            let ptrain = project(standardized.data(), &factors, k_rank)?;
            let logistic = fit(
                ClassifierKind::Logistic,
                &ptrain,
                &train_y,
                &cmd.train_config,
            )?;
            let (weights, _) = logistic.linear_weights().expect("logistic is linear");
            Some(rank_features(&factors, weights)?)
        }
    };

    let inputs = ReportInputs {
        metrics_grid: Some((&grid, cmd.task)),
        ranking: ranking
            .as_ref()
            .map(|r| (ds.feature_names.as_slice(), r, cmd.task)),
        summary_lines: vec![
            format!("task: {}", cmd.task.as_str()),
            format!("network: {}", cmd.network.as_str()),
            format!(
                "examples: {} ({} positive, {} negative)",
                ds.len(),
                ds.positives(),
                ds.negatives()
            ),
            format!(
                "split: {} train / {} test (fraction {}, seed {})",
                parts.train.len(),
                parts.test.len(),
                cmd.train_fraction,
                cmd.train_config.seed
            ),
        ],
        ..Default::default()
    };
    let written = emit_report(&inputs, &cmd.out_dir)?;
    manifest.finish(&cmd.out_dir, &written)?;

    Ok(PipelineSummary {
        grid,
        ranking,
        feature_names: ds.feature_names.clone(),
        train_examples: parts.train.len(),
        test_examples: parts.test.len(),
        positives: ds.positives(),
        negatives: ds.negatives(),
        written,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, write_world, SynthConfig};

    fn tiny_world_dir(dir: &Path, seed: u64) {
        let schema = AttributeSchema::default_survey();
        let cfg = SynthConfig {
            n_nodes: 36,
            n_semesters: 3,
            seed,
            ..SynthConfig::default()
        };
        let world = generate(&cfg, &schema).unwrap();
        write_world(&world, &schema, dir).unwrap();
    }

    #[test]
    fn data_dir_roundtrip_loads_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        tiny_world_dir(dir.path(), 1);
        let data = load_data_dir(dir.path(), ParseOptions { strict: true }).unwrap();
        assert_eq!(data.calendar.len(), 3);
        assert_eq!(data.roster.participants().len(), 36);
        assert!(!data.contacts.is_empty());
    }

    #[test]
    fn missing_inputs_are_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_data_dir(dir.path(), ParseOptions::default()).unwrap_err();
        assert!(err.is_usage());
    }

    #[test]
    fn manifest_is_written_before_outputs_and_completed_after() {
        let dir = tempfile::tempdir().unwrap();
        let data_dir = dir.path().join("data");
        tiny_world_dir(&data_dir, 2);
        let out = dir.path().join("out");
        let cmd = BuildCmd {
            data_dir,
            out_dir: out.clone(),
            network: NetworkKind::Activity,
            threshold: 5,
            nomination_rule: NominationRule::Either,
            strict: false,
        };
        run_build(&cmd).unwrap();
        let manifest = Manifest::load(&out.join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.status, RunStatus::Complete);
        assert_eq!(manifest.outputs, vec!["edges.csv", "nodes.csv"]);
        assert_eq!(manifest.inputs.len(), 4);
    }

    #[test]
    fn train_eval_rank_chain_works() {
        let dir = tempfile::tempdir().unwrap();
        let data_dir = dir.path().join("data");
        tiny_world_dir(&data_dir, 3);
        let ds_out = dir.path().join("ds");
        run_dataset(&DatasetCmd {
            data_dir,
            out_dir: ds_out.clone(),
            task: Task::Persistence,
            network: NetworkKind::Activity,
            threshold: 5,
            nomination_rule: NominationRule::Either,
            max_hops: None,
            train_fraction: 0.8,
            seed: 5,
            strict: false,
        })
        .unwrap();

        let model_out = dir.path().join("model");
        let model_path = run_train(&TrainCmd {
            train_csv: ds_out.join("train.csv"),
            out_dir: model_out,
            classifier: ClassifierKind::Logistic,
            k: Some(8),
            train_config: TrainConfig::default(),
        })
        .unwrap();

        let eval_out = dir.path().join("eval");
        let m = run_eval(&EvalCmd {
            model_path: model_path.clone(),
            test_csv: ds_out.join("test.csv"),
            out_dir: eval_out.clone(),
        })
        .unwrap();
        assert!(m.accuracy >= 0.0 && m.accuracy <= 1.0);
        assert!(eval_out.join("metrics.csv").exists());

        let rank_out = dir.path().join("rank");
        let ranking = run_rank(&RankCmd {
            model_path,
            out_dir: rank_out.clone(),
        })
        .unwrap();
        assert_eq!(ranking.scores.len(), 29);
        assert!(rank_out.join("ranking.csv").exists());
    }

    #[test]
    fn rank_requires_projection_and_linear_model() {
        let dir = tempfile::tempdir().unwrap();
        let data_dir = dir.path().join("data");
        tiny_world_dir(&data_dir, 4);
        let ds_out = dir.path().join("ds");
        run_dataset(&DatasetCmd {
            data_dir,
            out_dir: ds_out.clone(),
            task: Task::Persistence,
            network: NetworkKind::Activity,
            threshold: 5,
            nomination_rule: NominationRule::Either,
            max_hops: None,
            train_fraction: 0.8,
            seed: 5,
            strict: false,
        })
        .unwrap();
        // No projection.
        let raw_model = run_train(&TrainCmd {
            train_csv: ds_out.join("train.csv"),
            out_dir: dir.path().join("m1"),
            classifier: ClassifierKind::Logistic,
            k: None,
            train_config: TrainConfig::default(),
        })
        .unwrap();
        assert!(run_rank(&RankCmd {
            model_path: raw_model,
            out_dir: dir.path().join("r1"),
        })
        .is_err());
        // Non-linear model.
        let knn_model = run_train(&TrainCmd {
            train_csv: ds_out.join("train.csv"),
            out_dir: dir.path().join("m2"),
            classifier: ClassifierKind::Knn,
            k: Some(5),
            train_config: TrainConfig::default(),
        })
        .unwrap();
        assert!(run_rank(&RankCmd {
            model_path: knn_model,
            out_dir: dir.path().join("r2"),
        })
        .is_err());
    }
}
