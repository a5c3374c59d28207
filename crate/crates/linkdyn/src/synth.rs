//! Synthetic co-evolving networks with planted mechanism strengths.
//!
//! Each world draws static per-node profiles (optionally polarized into
//! latent groups so that pairwise agreement actually varies), seeds a
//! sparse random graph, and then evolves it semester by semester: a
//! non-edge forms with probability
//! `clamp(base_formation + h * norm_agreement + c * norm_cn)` and an edge
//! dissolves with probability `clamp(base_dissolution - p * norm_agreement)`,
//! where `norm_agreement` is total agreement over the attribute count and
//! `norm_cn` is the common-neighbor count capped and scaled to [0, 1].
//!
//! The generator also emits a contact log consistent with the snapshots
//! (every edge meets the activity threshold; persisting edges draw from a
//! higher-volume distribution than dissolving ones), nominations mirroring
//! the edges, and a decision log for planted-mechanism assertions.
//!
//! Structure, attributes, contacts, and nominations use separate random
//! streams, so varying one mechanism strength leaves the other draws
//! aligned across runs of the same seed.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::Duration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::attributes::{
    write_profiles, AttributeKind, AttributeSchema, AttributeValue, Profile, ProfileStore,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::graphcore::{
    all_pairs, common_neighbors, EdgeWeight, NodeId, Snapshot,
};
use crate::ingest::{
    write_contact_log, write_nominations, ContactKind, ContactRecord, Nomination,
    SemesterCalendar,
};
use crate::seeds;

/// Poisson means for per-edge contact volumes by persistence fate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactRates {
    pub persisting_calls_mean: f64,
    pub persisting_texts_mean: f64,
    pub dissolving_calls_mean: f64,
    pub dissolving_texts_mean: f64,
}

impl Default for ContactRates {
    fn default() -> Self {
        ContactRates {
            persisting_calls_mean: 12.0,
            persisting_texts_mean: 40.0,
            dissolving_calls_mean: 3.0,
            dissolving_texts_mean: 8.0,
        }
    }
}

/// All planted parameters of a synthetic world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_nodes: usize,
    pub n_semesters: usize,
    /// Latent profile groups; 1 disables group structure.
    pub n_groups: usize,
    /// How strongly attribute draws follow the node's group (0 = iid).
    pub polarization: f64,
    /// Homophily strength h on formation.
    pub homophily_strength: f64,
    /// Pruning strength p on dissolution.
    pub pruning_strength: f64,
    /// Triadic-closure strength c on formation.
    pub triadic_strength: f64,
    pub base_formation_rate: f64,
    pub base_dissolution_rate: f64,
    pub initial_edge_prob: f64,
    /// Common-neighbor count that saturates norm_cn at 1.
    pub cn_cap: u32,
    /// Threshold the emitted contact log is generated to satisfy.
    pub activity_threshold: u32,
    /// Probability that an edge yields nominations in both directions.
    pub mutual_nomination_prob: f64,
    pub contact_rates: ContactRates,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_nodes: 200,
            n_semesters: 4,
            n_groups: 2,
            polarization: 0.8,
            homophily_strength: 0.3,
            pruning_strength: 0.0,
            triadic_strength: 0.4,
            base_formation_rate: 0.005,
            base_dissolution_rate: 0.4,
            initial_edge_prob: 0.02,
            cn_cap: 8,
            activity_threshold: 5,
            mutual_nomination_prob: 0.3,
            contact_rates: ContactRates::default(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::Config("n_nodes must be at least 2".into()));
        }
        if self.n_semesters < 2 {
            return Err(Error::Config("n_semesters must be at least 2".into()));
        }
        if self.n_groups == 0 {
            return Err(Error::Config("n_groups must be at least 1".into()));
        }
        let unit = [
            ("polarization", self.polarization),
            ("base_formation_rate", self.base_formation_rate),
            ("base_dissolution_rate", self.base_dissolution_rate),
            ("initial_edge_prob", self.initial_edge_prob),
            ("mutual_nomination_prob", self.mutual_nomination_prob),
        ];
        for (name, value) in unit {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        let nonneg = [
            ("homophily_strength", self.homophily_strength),
            ("pruning_strength", self.pruning_strength),
            ("triadic_strength", self.triadic_strength),
            (
                "persisting_calls_mean",
                self.contact_rates.persisting_calls_mean,
            ),
            (
                "persisting_texts_mean",
                self.contact_rates.persisting_texts_mean,
            ),
            (
                "dissolving_calls_mean",
                self.contact_rates.dissolving_calls_mean,
            ),
            (
                "dissolving_texts_mean",
                self.contact_rates.dissolving_texts_mean,
            ),
        ];
        for (name, value) in nonneg {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Config(format!("{name} must be non-negative")));
            }
        }
        if self.cn_cap == 0 {
            return Err(Error::Config("cn_cap must be at least 1".into()));
        }
        if self.activity_threshold == 0 {
            return Err(Error::Config("activity_threshold must be at least 1".into()));
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> String {
        let body = toml::to_string(self).expect("config serializes");
        format!("# linkdyn synth config v1\n{body}")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SynthConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("synth config parse failure: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }
}

/// Which per-pair probability a decision sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecisionKind {
    Formation,
    Dissolution,
}

/// One formation or dissolution draw, for mechanism-recovery assertions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Semester index t of the (t, t+1) transition.
    pub transition: u16,
    pub u: NodeId,
    pub v: NodeId,
    pub kind: DecisionKind,
    pub norm_agreement: f64,
    pub norm_cn: f64,
    pub probability: f64,
    pub occurred: bool,
}

/// A generated world: profiles, snapshots, the consistent contact log and
/// nominations, plus the decision log behind the evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthWorld {
    pub config: SynthConfig,
    pub calendar: SemesterCalendar,
    pub groups: Vec<usize>,
    pub profiles: ProfileStore,
    pub snapshots: Vec<Snapshot>,
    pub contacts: Vec<ContactRecord>,
    pub nominations: Vec<Nomination>,
    pub decisions: Vec<Decision>,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn group_fraction(group: usize, n_groups: usize) -> f64 {
    if n_groups <= 1 {
        0.5
    } else {
        group as f64 / (n_groups - 1) as f64
    }
}

fn draw_value(
    kind: &AttributeKind,
    group: usize,
    n_groups: usize,
    polarization: f64,
    rng: &mut ChaCha8Rng,
) -> AttributeValue {
    let frac = group_fraction(group, n_groups);
    match kind {
        AttributeKind::Binary => {
            let p_true = 0.5 + (frac - 0.5) * polarization;
            AttributeValue::Flag(rng.random::<f64>() < p_true)
        }
        AttributeKind::Ordinal { min, max } => {
            let range = (max - min) as f64;
            let center = *min as f64 + (0.5 + (frac - 0.5) * polarization) * range;
            let sigma = 0.25 * (1.0 - polarization) * range;
            let noisy = if sigma > 0.0 {
                let normal = Normal::new(0.0, sigma).expect("sigma is finite");
                center + normal.sample(rng)
            } else {
                center
            };
            let level = noisy.round().clamp(*min as f64, *max as f64) as i64;
            AttributeValue::Level(level)
        }
        AttributeKind::Categorical { categories } => {
            let preferred = (group as u32) % categories;
            let p_pref = 1.0 / *categories as f64
                + polarization * (1.0 - 1.0 / *categories as f64);
            if rng.random::<f64>() < p_pref {
                AttributeValue::Category(preferred)
            } else {
                // Uniform over the other categories.
                let mut pick = rng.random_range(0..categories - 1);
                if pick >= preferred {
                    pick += 1;
                }
                AttributeValue::Category(pick)
            }
        }
        AttributeKind::SetValued { universe } => {
            let len = universe.len();
            let block = len.div_ceil(n_groups).max(1);
            let start = (group * block).min(len.saturating_sub(1));
            let end = ((group + 1) * block).min(len);
            let p_pref = 0.5 + 0.5 * polarization;
            let p_other = 0.5 * (1.0 - polarization);
            let items: BTreeSet<String> = universe
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let p = if *i >= start && *i < end { p_pref } else { p_other };
                    rng.random::<f64>() < p
                })
                .map(|(_, item)| item.clone())
                .collect();
            AttributeValue::Items(items)
        }
    }
}

/// Total agreement over the attribute count for one profile pair.
fn norm_agreement(
    schema: &AttributeSchema,
    a: &Profile,
    b: &Profile,
) -> f64 {
    let cfg = crate::attributes::AgreementConfig::default();
    let mut total = 0.0;
    for i in 0..schema.len() {
        total += crate::attributes::agreement(schema.kind(i), a.value(i), b.value(i), &cfg)
            .expect("generated values conform to the schema");
    }
    total / schema.len() as f64
}

/// Expected-density walk used as the sparse-regime guard. The per-pair
/// agreement distribution is exact (profiles are already drawn); the
/// common-neighbor term is approximated from the running density.
fn expected_density_guard(
    cfg: &SynthConfig,
    agreements: &[f64],
) -> Result<()> {
    let n = cfg.n_nodes as f64;
    let mut density = cfg.initial_edge_prob;
    let check = |d: f64, stage: &str| -> Result<()> {
        if d > 0.5 {
            Err(Error::Config(format!(
                "expected edge density {d:.3} exceeds 0.5 {stage}; pick sparser rates"
            )))
        } else {
            Ok(())
        }
    };
    check(density, "at the initial snapshot")?;
    for t in 1..cfg.n_semesters {
        let cn_norm = ((n - 2.0) * density * density / cfg.cn_cap as f64).min(1.0);
        let mean_form = agreements
            .iter()
            .map(|&a| {
                clamp01(
                    cfg.base_formation_rate
                        + cfg.homophily_strength * a
                        + cfg.triadic_strength * cn_norm,
                )
            })
            .sum::<f64>()
            / agreements.len() as f64;
        let mean_diss = agreements
            .iter()
            .map(|&a| clamp01(cfg.base_dissolution_rate - cfg.pruning_strength * a))
            .sum::<f64>()
            / agreements.len() as f64;
        density = density + (1.0 - density) * mean_form - density * mean_diss;
        check(density, &format!("after transition {t}"))?;
    }
    Ok(())
}

/// Generate a deterministic world from a config and schema.
pub fn generate(cfg: &SynthConfig, schema: &AttributeSchema) -> Result<SynthWorld> {
    cfg.validate()?;
    let calendar = SemesterCalendar::generate(cfg.n_semesters);
    let mut attr_rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, 1));
    let mut structure_rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, 2));
    let mut contact_rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, 3));
    let mut nomination_rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, 4));

    let nodes: Vec<NodeId> = (0..cfg.n_nodes as u32).map(NodeId::new).collect();
    let groups: Vec<usize> = (0..cfg.n_nodes).map(|i| i % cfg.n_groups).collect();

    // Static profiles, replicated into every semester of the store.
    let base_profiles: Vec<Profile> = nodes
        .iter()
        .zip(&groups)
        .map(|(&node, &group)| {
            let values: Vec<Option<AttributeValue>> = schema
                .entries()
                .iter()
                .map(|e| {
                    Some(draw_value(
                        &e.kind,
                        group,
                        cfg.n_groups,
                        cfg.polarization,
                        &mut attr_rng,
                    ))
                })
                .collect();
            Profile::new(node, 1, values, schema).expect("drawn values conform")
        })
        .collect();
    let mut profiles = ProfileStore::new();
    for sem in calendar.semesters() {
        for p in &base_profiles {
            profiles.insert(
                Profile::new(p.node(), sem.index(), p.values().to_vec(), schema)
                    .expect("profile values already validated"),
            );
        }
    }

    // Per-pair agreement, reused across transitions (profiles are static).
    let node_set: BTreeSet<NodeId> = nodes.iter().copied().collect();
    let pairs = all_pairs(&node_set);
    let agreements: Vec<f64> = exec::ordered_map(&pairs, |&(u, v)| {
        norm_agreement(
            schema,
            &base_profiles[u.value() as usize],
            &base_profiles[v.value() as usize],
        )
    });

    expected_density_guard(cfg, &agreements)?;

    // Initial sparse random graph.
    let mut current: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for &pair in &pairs {
        if structure_rng.random::<f64>() < cfg.initial_edge_prob {
            current.insert(pair);
        }
    }

    let build_snapshot = |edges: &BTreeSet<(NodeId, NodeId)>, sem_index: u16| -> Snapshot {
        let sem = calendar.get(sem_index).expect("index within calendar").clone();
        let mut b = Snapshot::builder(sem);
        b.add_nodes(nodes.iter().copied());
        for &(u, v) in edges {
            b.add_edge(u, v, EdgeWeight::default()).expect("no self-loops");
        }
        b.build()
    };

    let mut edge_sets = vec![current.clone()];
    let mut decisions = Vec::new();
    for t in 1..cfg.n_semesters as u16 {
        let snap = build_snapshot(&current, t);
        // Common neighbors per pair on the current snapshot (read-only,
        // parallel); the uniform draws below stay sequential so the
        // structure stream is identical in every execution mode.
        let cns: Vec<f64> = exec::ordered_map(&pairs, |&(u, v)| {
            common_neighbors(&snap, u, v).expect("nodes exist") as f64
        });
        let mut next = current.clone();
        for (idx, &pair) in pairs.iter().enumerate() {
            let norm_cn = (cns[idx] / cfg.cn_cap as f64).min(1.0);
            let agreement = agreements[idx];
            let draw = structure_rng.random::<f64>();
            if current.contains(&pair) {
                let p_diss = clamp01(
                    cfg.base_dissolution_rate - cfg.pruning_strength * agreement,
                );
                let occurred = draw < p_diss;
                if occurred {
                    next.remove(&pair);
                }
                decisions.push(Decision {
                    transition: t,
                    u: pair.0,
                    v: pair.1,
                    kind: DecisionKind::Dissolution,
                    norm_agreement: agreement,
                    norm_cn,
                    probability: p_diss,
                    occurred,
                });
            } else {
                let p_form = clamp01(
                    cfg.base_formation_rate
                        + cfg.homophily_strength * agreement
                        + cfg.triadic_strength * norm_cn,
                );
                let occurred = draw < p_form;
                if occurred {
                    next.insert(pair);
                }
                decisions.push(Decision {
                    transition: t,
                    u: pair.0,
                    v: pair.1,
                    kind: DecisionKind::Formation,
                    norm_agreement: agreement,
                    norm_cn,
                    probability: p_form,
                    occurred,
                });
            }
        }
        edge_sets.push(next.clone());
        current = next;
    }

    // Contact log: per semester, per edge, volumes drawn by persistence
    // fate; the combined count always reaches the activity threshold so
    // thresholding the log reproduces the snapshots exactly.
    let mut contacts = Vec::new();
    for (s, edges) in edge_sets.iter().enumerate() {
        let sem = calendar.get((s + 1) as u16).expect("semester exists");
        let span_seconds =
            (sem.end() - sem.start()).num_seconds() + 24 * 3600;
        for &(u, v) in edges {
            let persisting = match edge_sets.get(s + 1) {
                Some(next) => next.contains(&(u, v)),
                // The last semester has no successor; volumes use the
                // persisting distribution.
                None => true,
            };
            let (calls_mean, texts_mean) = if persisting {
                (
                    cfg.contact_rates.persisting_calls_mean,
                    cfg.contact_rates.persisting_texts_mean,
                )
            } else {
                (
                    cfg.contact_rates.dissolving_calls_mean,
                    cfg.contact_rates.dissolving_texts_mean,
                )
            };
            let mut draw_count = |mean: f64| -> u32 {
                if mean <= 0.0 {
                    0
                } else {
                    let poisson = Poisson::new(mean).expect("mean is positive and finite");
                    poisson.sample(&mut contact_rng) as u32
                }
            };
            let calls = draw_count(calls_mean);
            let mut texts = draw_count(texts_mean);
            let total = calls + texts;
            if total < cfg.activity_threshold {
                texts += cfg.activity_threshold - total;
            }
            let total = calls + texts;
            for k in 0..total {
                let offset = span_seconds * (k as i64 + 1) / (total as i64 + 1);
                let timestamp = sem
                    .start()
                    .and_hms_opt(0, 0, 0)
                    .expect("midnight exists")
                    + Duration::seconds(offset);
                let (sender, receiver) = if k % 2 == 0 { (u, v) } else { (v, u) };
                let kind = if k < calls {
                    ContactKind::Call
                } else {
                    ContactKind::Text
                };
                let magnitude = match kind {
                    ContactKind::Call => 30.0 + contact_rng.random_range(0..570) as f64,
                    ContactKind::Text => 1.0 + contact_rng.random_range(0..159) as f64,
                };
                contacts.push(ContactRecord {
                    timestamp,
                    sender,
                    receiver,
                    kind,
                    magnitude,
                });
            }
        }
    }
    contacts.sort_by(|a, b| {
        (a.timestamp, a.sender, a.receiver, a.kind.as_str())
            .cmp(&(b.timestamp, b.sender, b.receiver, b.kind.as_str()))
    });

    // Nominations mirror the edges: one direction always, both sometimes.
    let mut nominations = Vec::new();
    for (s, edges) in edge_sets.iter().enumerate() {
        let sem_index = (s + 1) as u16;
        for &(u, v) in edges {
            let (a, b) = if nomination_rng.random::<bool>() {
                (u, v)
            } else {
                (v, u)
            };
            nominations.push(Nomination {
                semester_index: sem_index,
                nominator: a,
                nominee: b,
            });
            if nomination_rng.random::<f64>() < cfg.mutual_nomination_prob {
                nominations.push(Nomination {
                    semester_index: sem_index,
                    nominator: b,
                    nominee: a,
                });
            }
        }
    }

    let snapshots: Vec<Snapshot> = edge_sets
        .iter()
        .enumerate()
        .map(|(s, edges)| build_snapshot(edges, (s + 1) as u16))
        .collect();
    // Snapshots carry the generated contact volumes as weights.
    let snapshots = crate::ingest::attach_contact_weights(&snapshots, &contacts, &calendar)?;

    Ok(SynthWorld {
        config: cfg.clone(),
        calendar,
        groups,
        profiles,
        snapshots,
        contacts,
        nominations,
        decisions,
    })
}

/// Realized counts for one transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionCounts {
    pub semester_pair: u16,
    pub formation_candidates: usize,
    pub formed: usize,
    pub dissolution_candidates: usize,
    pub dissolved: usize,
}

/// Planted parameters plus realized evolution counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: SynthConfig,
    pub per_transition: Vec<TransitionCounts>,
    pub edge_counts: Vec<usize>,
    pub final_density: f64,
}

/// Summarize a world: the planted config and realized per-transition
/// formation/dissolution counts.
pub fn describe(world: &SynthWorld) -> GroundTruth {
    let mut per_transition = Vec::new();
    for t in 1..world.config.n_semesters as u16 {
        let of_kind = |kind: DecisionKind| {
            world
                .decisions
                .iter()
                .filter(move |d| d.transition == t && d.kind == kind)
        };
        per_transition.push(TransitionCounts {
            semester_pair: t,
            formation_candidates: of_kind(DecisionKind::Formation).count(),
            formed: of_kind(DecisionKind::Formation).filter(|d| d.occurred).count(),
            dissolution_candidates: of_kind(DecisionKind::Dissolution).count(),
            dissolved: of_kind(DecisionKind::Dissolution)
                .filter(|d| d.occurred)
                .count(),
        });
    }
    let edge_counts: Vec<usize> = world.snapshots.iter().map(|s| s.edge_count()).collect();
    let n = world.config.n_nodes;
    let final_density =
        *edge_counts.last().unwrap_or(&0) as f64 / (n * (n - 1) / 2) as f64;
    GroundTruth {
        config: world.config.clone(),
        per_transition,
        edge_counts,
        final_density,
    }
}

impl GroundTruth {
    pub fn to_toml_string(&self) -> String {
        let body = toml::to_string(self).expect("ground truth serializes");
        format!("# linkdyn ground truth v1\n{body}")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }
}

/// File names written by [`write_world`].
pub const CONTACTS_FILE: &str = "contacts.csv";
pub const PROFILES_FILE: &str = "profiles.csv";
pub const NOMINATIONS_FILE: &str = "nominations.csv";
pub const SCHEMA_FILE: &str = "schema.toml";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.toml";

/// Write the world in exactly the CSV formats the ingest module reads.
pub fn write_world(world: &SynthWorld, schema: &AttributeSchema, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let contacts = dir.join(CONTACTS_FILE);
    write_contact_log(&world.contacts, &contacts)?;
    let profiles = dir.join(PROFILES_FILE);
    write_profiles(&world.profiles, schema, &profiles)?;
    let nominations = dir.join(NOMINATIONS_FILE);
    write_nominations(&world.nominations, &nominations)?;
    let schema_path = dir.join(SCHEMA_FILE);
    schema.save(&schema_path)?;
    let truth = dir.join(GROUND_TRUTH_FILE);
    describe(world).save(&truth)?;
    Ok(vec![contacts, profiles, nominations, schema_path, truth])
}
