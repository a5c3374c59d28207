//! Attribute schemas, per-student survey profiles, and pairwise agreement.
//!
//! Every attribute agreement is normalized to [0, 1]: equal binary or
//! categorical answers score 1 and unequal ones 0, ordinal answers scale
//! linearly with their absolute difference over the answer range, and
//! set-valued answers (classes taken, clubs joined) use Jaccard similarity.
//! A missing answer on either side yields a configurable neutral value.
//!
//! The edge feature vector for a node pair is the 27 per-attribute
//! agreements plus the pair's common-neighbor count and the total (summed)
//! agreement, 29 features in all.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphcore::{common_neighbors, NodeId, Snapshot};

/// The value domain of one survey attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeKind {
    Binary,
    Categorical { categories: u32 },
    Ordinal { min: i64, max: i64 },
    SetValued { universe: Vec<String> },
}

impl AttributeKind {
    fn validate_kind(&self, name: &str) -> Result<()> {
        match self {
            AttributeKind::Binary => Ok(()),
            AttributeKind::Categorical { categories } => {
                if *categories < 2 {
                    Err(Error::Config(format!(
                        "attribute {name}: categorical needs >= 2 categories"
                    )))
                } else {
                    Ok(())
                }
            }
            AttributeKind::Ordinal { min, max } => {
                if max <= min {
                    Err(Error::Config(format!(
                        "attribute {name}: ordinal max must exceed min"
                    )))
                } else {
                    Ok(())
                }
            }
            AttributeKind::SetValued { universe } => {
                if universe.is_empty() {
                    return Err(Error::Config(format!(
                        "attribute {name}: set-valued universe is empty"
                    )));
                }
                let mut seen = BTreeSet::new();
                for item in universe {
                    if item.contains(',') || item.contains(';') || item.is_empty() {
                        return Err(Error::Config(format!(
                            "attribute {name}: universe item {item:?} must be non-empty and free of ',' and ';'"
                        )));
                    }
                    if !seen.insert(item) {
                        return Err(Error::Config(format!(
                            "attribute {name}: duplicate universe item {item:?}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// One survey answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttributeValue {
    Flag(bool),
    Category(u32),
    Level(i64),
    Items(BTreeSet<String>),
}

/// Check that a value conforms to its attribute kind.
pub fn validate_value(kind: &AttributeKind, value: &AttributeValue, name: &str) -> Result<()> {
    match (kind, value) {
        (AttributeKind::Binary, AttributeValue::Flag(_)) => Ok(()),
        (AttributeKind::Categorical { categories }, AttributeValue::Category(c)) => {
            if c >= categories {
                Err(Error::Validation(format!(
                    "attribute {name}: category {c} out of range (< {categories})"
                )))
            } else {
                Ok(())
            }
        }
        (AttributeKind::Ordinal { min, max }, AttributeValue::Level(l)) => {
            if l < min || l > max {
                Err(Error::Validation(format!(
                    "attribute {name}: level {l} outside [{min}, {max}]"
                )))
            } else {
                Ok(())
            }
        }
        (AttributeKind::SetValued { universe }, AttributeValue::Items(items)) => {
            for item in items {
                if !universe.iter().any(|u| u == item) {
                    return Err(Error::Validation(format!(
                        "attribute {name}: item {item:?} not in universe"
                    )));
                }
            }
            Ok(())
        }
        _ => Err(Error::Validation(format!(
            "attribute {name}: value does not match attribute kind"
        ))),
    }
}

/// How the total-agreement feature is computed from the per-attribute
/// entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TotalAgreementMode {
    /// Sum of the agreement values (soft count).
    Soft,
    /// Number of entries at or above the threshold.
    HardCount { threshold: f64 },
}

/// Knobs for agreement computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementConfig {
    /// Agreement assigned when either answer is missing.
    pub missing_neutral: f64,
    pub total_mode: TotalAgreementMode,
}

impl Default for AgreementConfig {
    fn default() -> Self {
        AgreementConfig {
            missing_neutral: 0.5,
            total_mode: TotalAgreementMode::Soft,
        }
    }
}

/// Agreement in [0, 1] between two optional answers of the same kind.
pub fn agreement(
    kind: &AttributeKind,
    a: Option<&AttributeValue>,
    b: Option<&AttributeValue>,
    cfg: &AgreementConfig,
) -> Result<f64> {
    let (a, b) = match (a, b) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(cfg.missing_neutral),
    };
    validate_value(kind, a, "lhs")?;
    validate_value(kind, b, "rhs")?;
    let value = match (kind, a, b) {
        (AttributeKind::Binary, AttributeValue::Flag(x), AttributeValue::Flag(y)) => {
            if x == y {
                1.0
            } else {
                0.0
            }
        }
        (
            AttributeKind::Categorical { .. },
            AttributeValue::Category(x),
            AttributeValue::Category(y),
        ) => {
            if x == y {
                1.0
            } else {
                0.0
            }
        }
        (
            AttributeKind::Ordinal { min, max },
            AttributeValue::Level(x),
            AttributeValue::Level(y),
        ) => {
            let range = (max - min) as f64;
            1.0 - ((x - y).abs() as f64) / range
        }
        (AttributeKind::SetValued { .. }, AttributeValue::Items(x), AttributeValue::Items(y)) => {
            let inter = x.intersection(y).count();
            let union = x.union(y).count();
            if union == 0 {
                1.0
            } else {
                inter as f64 / union as f64
            }
        }
        _ => unreachable!("validated above"),
    };
    Ok(value)
}

/// Ordered list of named attributes; the unit the whole pipeline is
/// configured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    attributes: Vec<SchemaEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaEntry {
    pub name: String,
    #[serde(flatten)]
    pub kind: AttributeKind,
}

pub const COMMON_NEIGHBORS_FEATURE: &str = "common_neighbors";
pub const TOTAL_AGREEMENT_FEATURE: &str = "total_agreement";

impl AttributeSchema {
    pub fn new(entries: Vec<(String, AttributeKind)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("schema has no attributes".into()));
        }
        let mut names = BTreeSet::new();
        for (name, kind) in &entries {
            if name.is_empty() || name.contains(',') || name.contains(';') {
                return Err(Error::Config(format!(
                    "attribute name {name:?} must be non-empty and free of ',' and ';'"
                )));
            }
            if name == COMMON_NEIGHBORS_FEATURE || name == TOTAL_AGREEMENT_FEATURE {
                return Err(Error::Config(format!(
                    "attribute name {name:?} collides with a derived feature name"
                )));
            }
            if !names.insert(name.clone()) {
                return Err(Error::Config(format!("duplicate attribute name {name:?}")));
            }
            kind.validate_kind(name)?;
        }
        Ok(AttributeSchema {
            attributes: entries
                .into_iter()
                .map(|(name, kind)| SchemaEntry { name, kind })
                .collect(),
        })
    }

    /// Number of attributes (27 in the default schema).
    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn entries(&self) -> &[SchemaEntry] {
        &self.attributes
    }

    pub fn kind(&self, i: usize) -> &AttributeKind {
        &self.attributes[i].kind
    }

    pub fn name(&self, i: usize) -> &str {
        &self.attributes[i].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|e| e.name == name)
    }

    /// Names of the full edge feature vector: one per attribute, then the
    /// common-neighbor count, then the total agreement (29 with the
    /// default schema).
    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.attributes.iter().map(|e| e.name.clone()).collect();
        names.push(COMMON_NEIGHBORS_FEATURE.into());
        names.push(TOTAL_AGREEMENT_FEATURE.into());
        names
    }

    pub fn feature_count(&self) -> usize {
        self.len() + 2
    }

    /// The shipped 27-attribute survey schema: student background, views
    /// on social issues, habits, weekly time allocations, and set-valued
    /// classes and clubs. The source survey aggregates a few of these
    /// (the three behavioral traits are usually reported as one row), so
    /// this enumeration is a documented reconstruction.
    pub fn default_survey() -> Self {
        let ord = |min: i64, max: i64| AttributeKind::Ordinal { min, max };
        let cat = |categories: u32| AttributeKind::Categorical { categories };
        let set = |prefix: &str, count: usize| AttributeKind::SetValued {
            universe: (0..count).map(|i| format!("{prefix}_{i:03}")).collect(),
        };
        let entries: Vec<(String, AttributeKind)> = vec![
            ("major".into(), cat(40)),
            ("is_talkative".into(), ord(1, 5)),
            ("is_outgoing".into(), ord(1, 5)),
            ("is_enthusiastic".into(), ord(1, 5)),
            ("parental_income".into(), ord(1, 8)),
            ("race".into(), cat(6)),
            ("religion".into(), cat(8)),
            ("political_views".into(), ord(1, 7)),
            ("views_abortion".into(), ord(1, 7)),
            ("views_marijuana_legalization".into(), ord(1, 7)),
            ("views_homosexuality".into(), ord(1, 7)),
            ("views_gay_marriage".into(), ord(1, 7)),
            ("views_premarital_sex".into(), ord(1, 7)),
            ("views_social_welfare".into(), ord(1, 7)),
            ("views_social_security".into(), ord(1, 7)),
            ("views_equality".into(), ord(1, 7)),
            ("views_affirmative_action".into(), ord(1, 7)),
            ("drinking_habits".into(), ord(1, 5)),
            ("time_studying".into(), ord(1, 6)),
            ("time_partying".into(), ord(1, 6)),
            ("time_socializing".into(), ord(1, 6)),
            ("time_volunteering".into(), ord(1, 6)),
            ("time_campaigning".into(), ord(1, 6)),
            ("time_exercising".into(), ord(1, 6)),
            ("time_college_clubs".into(), ord(1, 6)),
            ("classes_taken".into(), set("class", 60)),
            ("clubs_joined".into(), set("club", 30)),
        ];
        AttributeSchema::new(entries).expect("default schema is valid")
    }

    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            attribute: &'a [SchemaEntry],
        }
        let body = toml::to_string(&Doc {
            attribute: &self.attributes,
        })
        .expect("schema serializes");
        format!("# linkdyn schema v1\n{body}")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            attribute: Vec<SchemaEntry>,
        }
        let doc: Doc =
            toml::from_str(text).map_err(|e| Error::Config(format!("schema parse failure: {e}")))?;
        AttributeSchema::new(
            doc.attribute
                .into_iter()
                .map(|e| (e.name, e.kind))
                .collect(),
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

/// One participant's answers for one semester, indexed by schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    node: NodeId,
    semester_index: u16,
    values: Vec<Option<AttributeValue>>,
}

impl Profile {
    pub fn new(
        node: NodeId,
        semester_index: u16,
        values: Vec<Option<AttributeValue>>,
        schema: &AttributeSchema,
    ) -> Result<Self> {
        if values.len() != schema.len() {
            return Err(Error::Dimension {
                context: format!("profile for node {node}"),
                expected: schema.len(),
                got: values.len(),
            });
        }
        for (i, value) in values.iter().enumerate() {
            if let Some(v) = value {
                validate_value(schema.kind(i), v, schema.name(i))?;
            }
        }
        Ok(Profile {
            node,
            semester_index,
            values,
        })
    }

    /// A profile with every answer missing.
    pub fn empty(node: NodeId, semester_index: u16, schema: &AttributeSchema) -> Self {
        Profile {
            node,
            semester_index,
            values: vec![None; schema.len()],
        }
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn semester_index(&self) -> u16 {
        self.semester_index
    }

    pub fn value(&self, i: usize) -> Option<&AttributeValue> {
        self.values[i].as_ref()
    }

    pub fn values(&self) -> &[Option<AttributeValue>] {
        &self.values
    }
}

/// Profiles keyed by (semester, node).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileStore {
    map: BTreeMap<(u16, NodeId), Profile>,
}

impl ProfileStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, profile: Profile) {
        self.map
            .insert((profile.semester_index, profile.node), profile);
    }

    pub fn get(&self, semester_index: u16, node: NodeId) -> Option<&Profile> {
        self.map.get(&(semester_index, node))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Profile> {
        self.map.values()
    }

    /// Participants surveyed in a given semester.
    pub fn surveyed(&self, semester_index: u16) -> BTreeSet<NodeId> {
        self.map
            .range((semester_index, NodeId::new(0))..=(semester_index, NodeId::new(u32::MAX)))
            .map(|((_, node), _)| *node)
            .collect()
    }

    /// All participants across semesters.
    pub fn participants(&self) -> BTreeSet<NodeId> {
        self.map.keys().map(|&(_, node)| node).collect()
    }

    pub fn semesters(&self) -> BTreeSet<u16> {
        self.map.keys().map(|&(sem, _)| sem).collect()
    }
}

/// The flattened per-pair feature vector.
// Never empty: the two derived features are always present.
#[allow(clippy::len_without_is_empty)]
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFeatureVector {
    pub agreements: Vec<f64>,
    pub common_neighbor_count: usize,
    pub total_agreement: f64,
}

impl EdgeFeatureVector {
    /// Flatten to the canonical feature order: agreements, common-neighbor
    /// count, total agreement.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.agreements.clone();
        out.push(self.common_neighbor_count as f64);
        out.push(self.total_agreement);
        out
    }

    pub fn len(&self) -> usize {
        self.agreements.len() + 2
    }
}

/// Compute the edge feature vector for a pair of profiles on one snapshot.
pub fn edge_features(
    schema: &AttributeSchema,
    cfg: &AgreementConfig,
    p_u: &Profile,
    p_v: &Profile,
    snap: &Snapshot,
) -> Result<EdgeFeatureVector> {
    let sem = snap.semester().index();
    for p in [p_u, p_v] {
        if p.semester_index() != sem {
            return Err(Error::SemesterMismatch {
                expected: sem,
                got: p.semester_index(),
            });
        }
    }
    let mut agreements = Vec::with_capacity(schema.len());
    for i in 0..schema.len() {
        agreements.push(agreement(schema.kind(i), p_u.value(i), p_v.value(i), cfg)?);
    }
    let total = match cfg.total_mode {
        TotalAgreementMode::Soft => agreements.iter().sum(),
        TotalAgreementMode::HardCount { threshold } => {
            agreements.iter().filter(|&&a| a >= threshold).count() as f64
        }
    };
    let cn = common_neighbors(snap, p_u.node(), p_v.node())?;
    Ok(EdgeFeatureVector {
        agreements,
        common_neighbor_count: cn,
        total_agreement: total,
    })
}

// --- profile CSV -------------------------------------------------------

const PROFILES_VERSION: &str = "# linkdyn profiles v1";
const PROFILES_HEADER: &str = "semester,node,attr_name,value";

pub fn format_value(value: &AttributeValue) -> String {
    match value {
        AttributeValue::Flag(b) => if *b { "1" } else { "0" }.to_string(),
        AttributeValue::Category(c) => c.to_string(),
        AttributeValue::Level(l) => l.to_string(),
        AttributeValue::Items(items) => items.iter().cloned().collect::<Vec<_>>().join(";"),
    }
}

pub fn parse_value(kind: &AttributeKind, text: &str) -> Result<AttributeValue> {
    let value = match kind {
        AttributeKind::Binary => match text {
            "0" => AttributeValue::Flag(false),
            "1" => AttributeValue::Flag(true),
            _ => {
                return Err(Error::Validation(format!(
                    "binary value must be 0 or 1, got {text:?}"
                )))
            }
        },
        AttributeKind::Categorical { .. } => AttributeValue::Category(
            text.parse()
                .map_err(|_| Error::Validation(format!("bad category {text:?}")))?,
        ),
        AttributeKind::Ordinal { .. } => AttributeValue::Level(
            text.parse()
                .map_err(|_| Error::Validation(format!("bad ordinal level {text:?}")))?,
        ),
        AttributeKind::SetValued { .. } => AttributeValue::Items(
            text.split(';')
                .filter(|s| !s.is_empty())
                .map(|s| s.to_string())
                .collect(),
        ),
    };
    Ok(value)
}

/// Write profiles as `semester,node,attr_name,value` rows, one row per
/// attribute, missing answers as empty values; deterministic order.
pub fn write_profiles(store: &ProfileStore, schema: &AttributeSchema, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(PROFILES_VERSION);
    out.push('\n');
    out.push_str(PROFILES_HEADER);
    out.push('\n');
    for profile in store.iter() {
        for i in 0..schema.len() {
            let value = profile.value(i).map(format_value).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                profile.semester_index(),
                profile.node(),
                schema.name(i),
                value
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a profiles CSV against a schema. Attributes absent from the file
/// stay missing; unknown attribute names are an error.
pub fn read_profiles(path: &Path, schema: &AttributeSchema) -> Result<ProfileStore> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows: BTreeMap<(u16, NodeId), Vec<Option<AttributeValue>>> = BTreeMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') || line == PROFILES_HEADER {
            continue;
        }
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.splitn(4, ',').collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", fields.len())));
        }
        let sem: u16 = fields[0].parse().map_err(|_| bad("bad semester".into()))?;
        let node: NodeId = fields[1].parse().map_err(|_| bad("bad node id".into()))?;
        let attr = fields[2];
        let idx = schema
            .index_of(attr)
            .ok_or_else(|| bad(format!("unknown attribute {attr:?}")))?;
        let entry = rows
            .entry((sem, node))
            .or_insert_with(|| vec![None; schema.len()]);
        if fields[3].is_empty() {
            entry[idx] = None;
        } else {
            let value =
                parse_value(schema.kind(idx), fields[3]).map_err(|e| bad(e.to_string()))?;
            entry[idx] = Some(value);
        }
    }
    let mut store = ProfileStore::new();
    for ((sem, node), values) in rows {
        store.insert(Profile::new(node, sem, values, schema)?);
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::{EdgeWeight, Semester, Snapshot};
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn cfg() -> AgreementConfig {
        AgreementConfig::default()
    }

    fn items(names: &[&str]) -> AttributeValue {
        AttributeValue::Items(names.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn binary_agreement_anchors() {
        let k = AttributeKind::Binary;
        let yes = AttributeValue::Flag(true);
        let no = AttributeValue::Flag(false);
        assert_eq!(agreement(&k, Some(&yes), Some(&yes), &cfg()).unwrap(), 1.0);
        assert_eq!(agreement(&k, Some(&yes), Some(&no), &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn ordinal_agreement_midpoint() {
        let k = AttributeKind::Ordinal { min: 1, max: 5 };
        let a = AttributeValue::Level(2);
        let b = AttributeValue::Level(4);
        assert_eq!(agreement(&k, Some(&a), Some(&b), &cfg()).unwrap(), 0.5);
    }

    #[test]
    fn set_agreement_jaccard() {
        let k = AttributeKind::SetValued {
            universe: vec!["algebra".into(), "chem".into(), "bio".into()],
        };
        let a = items(&["algebra", "chem"]);
        let b = items(&["chem", "bio"]);
        let got = agreement(&k, Some(&a), Some(&b), &cfg()).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-15);
        // Both empty counts as full agreement.
        let empty = items(&[]);
        assert_eq!(
            agreement(&k, Some(&empty), Some(&empty), &cfg()).unwrap(),
            1.0
        );
    }

    #[test]
    fn missing_answer_is_neutral() {
        let k = AttributeKind::Binary;
        let yes = AttributeValue::Flag(true);
        assert_eq!(agreement(&k, Some(&yes), None, &cfg()).unwrap(), 0.5);
        assert_eq!(agreement(&k, None, None, &cfg()).unwrap(), 0.5);
        let custom = AgreementConfig {
            missing_neutral: 0.25,
            ..cfg()
        };
        assert_eq!(agreement(&k, None, Some(&yes), &custom).unwrap(), 0.25);
    }

    #[test]
    fn out_of_range_values_rejected() {
        let ord = AttributeKind::Ordinal { min: 1, max: 5 };
        let bad = AttributeValue::Level(9);
        assert!(agreement(&ord, Some(&bad), Some(&bad), &cfg()).is_err());
        let set = AttributeKind::SetValued {
            universe: vec!["a".into()],
        };
        let outside = items(&["zzz"]);
        assert!(agreement(&set, Some(&outside), Some(&outside), &cfg()).is_err());
        let cat = AttributeKind::Categorical { categories: 3 };
        let far = AttributeValue::Category(3);
        assert!(agreement(&cat, Some(&far), Some(&far), &cfg()).is_err());
    }

    #[test]
    fn default_schema_shape() {
        let schema = AttributeSchema::default_survey();
        assert_eq!(schema.len(), 27);
        assert_eq!(schema.feature_count(), 29);
        let names = schema.feature_names();
        assert_eq!(names.len(), 29);
        assert_eq!(names[27], COMMON_NEIGHBORS_FEATURE);
        assert_eq!(names[28], TOTAL_AGREEMENT_FEATURE);
    }

    #[test]
    fn schema_rejects_duplicates() {
        let entries = vec![
            ("a".into(), AttributeKind::Binary),
            ("a".into(), AttributeKind::Binary),
        ];
        assert!(AttributeSchema::new(entries).is_err());
    }

    #[test]
    fn schema_toml_roundtrip() {
        let schema = AttributeSchema::default_survey();
        let text = schema.to_toml_string();
        let back = AttributeSchema::from_toml_str(&text).unwrap();
        assert_eq!(schema, back);
    }

    fn snapshot_for(nodes: &[u32], edges: &[(u32, u32)]) -> Snapshot {
        let sem = Semester::new(
            1,
            "S1",
            NaiveDate::from_ymd_opt(2011, 8, 1).unwrap(),
            NaiveDate::from_ymd_opt(2011, 12, 31).unwrap(),
        )
        .unwrap();
        let mut b = Snapshot::builder(sem);
        b.add_nodes(nodes.iter().map(|&i| NodeId::new(i)));
        for &(u, v) in edges {
            b.add_edge(NodeId::new(u), NodeId::new(v), EdgeWeight::default())
                .unwrap();
        }
        b.build()
    }

    fn tiny_schema() -> AttributeSchema {
        AttributeSchema::new(vec![
            ("flag".into(), AttributeKind::Binary),
            ("level".into(), AttributeKind::Ordinal { min: 1, max: 5 }),
        ])
        .unwrap()
    }

    #[test]
    fn edge_features_identical_profiles() {
        let schema = AttributeSchema::default_survey();
        let snap = snapshot_for(&[0, 1], &[]);
        let values: Vec<Option<AttributeValue>> = schema
            .entries()
            .iter()
            .map(|e| {
                Some(match &e.kind {
                    AttributeKind::Binary => AttributeValue::Flag(true),
                    AttributeKind::Categorical { .. } => AttributeValue::Category(0),
                    AttributeKind::Ordinal { min, .. } => AttributeValue::Level(*min),
                    AttributeKind::SetValued { universe } => {
                        AttributeValue::Items([universe[0].clone()].into_iter().collect())
                    }
                })
            })
            .collect();
        let p0 = Profile::new(NodeId::new(0), 1, values.clone(), &schema).unwrap();
        let p1 = Profile::new(NodeId::new(1), 1, values, &schema).unwrap();
        let f = edge_features(&schema, &cfg(), &p0, &p1, &snap).unwrap();
        assert!(f.agreements.iter().all(|&a| a == 1.0));
        assert_eq!(f.common_neighbor_count, 0);
        assert!((f.total_agreement - 27.0).abs() < 1e-12);
        assert_eq!(f.flatten().len(), 29);
    }

    #[test]
    fn edge_features_opposite_binary_profiles() {
        let schema = AttributeSchema::new(vec![
            ("a".into(), AttributeKind::Binary),
            ("b".into(), AttributeKind::Binary),
        ])
        .unwrap();
        let snap = snapshot_for(&[0, 1], &[]);
        let p0 = Profile::new(
            NodeId::new(0),
            1,
            vec![
                Some(AttributeValue::Flag(true)),
                Some(AttributeValue::Flag(false)),
            ],
            &schema,
        )
        .unwrap();
        let p1 = Profile::new(
            NodeId::new(1),
            1,
            vec![
                Some(AttributeValue::Flag(false)),
                Some(AttributeValue::Flag(true)),
            ],
            &schema,
        )
        .unwrap();
        let f = edge_features(&schema, &cfg(), &p0, &p1, &snap).unwrap();
        assert!(f.agreements.iter().all(|&a| a == 0.0));
        assert_eq!(f.total_agreement, 0.0);
    }

    #[test]
    fn edge_features_semester_mismatch() {
        let schema = tiny_schema();
        let snap = snapshot_for(&[0, 1], &[]);
        let p0 = Profile::empty(NodeId::new(0), 2, &schema);
        let p1 = Profile::empty(NodeId::new(1), 1, &schema);
        assert!(edge_features(&schema, &cfg(), &p0, &p1, &snap).is_err());
    }

    #[test]
    fn total_agreement_matches_independent_sum() {
        // Oracle: recompute each agreement separately and sum.
        use rand::{Rng, SeedableRng};
        let schema = AttributeSchema::default_survey();
        let snap = snapshot_for(&(0..50).collect::<Vec<_>>(), &[]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut random_profile = |node: u32| {
            let values: Vec<Option<AttributeValue>> = schema
                .entries()
                .iter()
                .map(|e| {
                    if rng.random::<f64>() < 0.1 {
                        return None;
                    }
                    Some(match &e.kind {
                        AttributeKind::Binary => AttributeValue::Flag(rng.random()),
                        AttributeKind::Categorical { categories } => {
                            AttributeValue::Category(rng.random_range(0..*categories))
                        }
                        AttributeKind::Ordinal { min, max } => {
                            AttributeValue::Level(rng.random_range(*min..=*max))
                        }
                        AttributeKind::SetValued { universe } => AttributeValue::Items(
                            universe
                                .iter()
                                .filter(|_| rng.random::<f64>() < 0.3)
                                .cloned()
                                .collect(),
                        ),
                    })
                })
                .collect();
            Profile::new(NodeId::new(node), 1, values, &schema).unwrap()
        };
        let profiles: Vec<Profile> = (0..50).map(&mut random_profile).collect();
        let acfg = cfg();
        for i in 0..50usize {
            for j in (i + 1)..50 {
                let f = edge_features(&schema, &acfg, &profiles[i], &profiles[j], &snap).unwrap();
                let oracle: f64 = (0..schema.len())
                    .map(|a| {
                        agreement(
                            schema.kind(a),
                            profiles[i].value(a),
                            profiles[j].value(a),
                            &acfg,
                        )
                        .unwrap()
                    })
                    .sum();
                assert!((f.total_agreement - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hard_count_mode() {
        let schema = tiny_schema();
        let snap = snapshot_for(&[0, 1], &[]);
        let p0 = Profile::new(
            NodeId::new(0),
            1,
            vec![
                Some(AttributeValue::Flag(true)),
                Some(AttributeValue::Level(1)),
            ],
            &schema,
        )
        .unwrap();
        let p1 = Profile::new(
            NodeId::new(1),
            1,
            vec![
                Some(AttributeValue::Flag(true)),
                Some(AttributeValue::Level(3)),
            ],
            &schema,
        )
        .unwrap();
        let hard = AgreementConfig {
            total_mode: TotalAgreementMode::HardCount { threshold: 0.75 },
            ..cfg()
        };
        let f = edge_features(&schema, &hard, &p0, &p1, &snap).unwrap();
        // Agreements are [1.0, 0.5]; only the first clears 0.75.
        assert_eq!(f.total_agreement, 1.0);
    }

    #[test]
    fn profiles_csv_roundtrip() {
        let schema = tiny_schema();
        let mut store = ProfileStore::new();
        store.insert(
            Profile::new(
                NodeId::new(4),
                1,
                vec![Some(AttributeValue::Flag(false)), None],
                &schema,
            )
            .unwrap(),
        );
        store.insert(
            Profile::new(
                NodeId::new(2),
                2,
                vec![None, Some(AttributeValue::Level(3))],
                &schema,
            )
            .unwrap(),
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.csv");
        write_profiles(&store, &schema, &path).unwrap();
        let back = read_profiles(&path, &schema).unwrap();
        assert_eq!(store, back);
    }

    #[test]
    fn read_profiles_rejects_unknown_attribute() {
        let schema = tiny_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.csv");
        std::fs::write(&path, "semester,node,attr_name,value\n1,1,nope,1\n").unwrap();
        assert!(read_profiles(&path, &schema).is_err());
    }

    proptest! {
        #[test]
        fn agreement_is_symmetric(a in 1i64..=7, b in 1i64..=7) {
            let k = AttributeKind::Ordinal { min: 1, max: 7 };
            let va = AttributeValue::Level(a);
            let vb = AttributeValue::Level(b);
            let ab = agreement(&k, Some(&va), Some(&vb), &cfg()).unwrap();
            let ba = agreement(&k, Some(&vb), Some(&va), &cfg()).unwrap();
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn agreement_is_reflexive(a in 1i64..=7) {
            let k = AttributeKind::Ordinal { min: 1, max: 7 };
            let va = AttributeValue::Level(a);
            let s = agreement(&k, Some(&va), Some(&va), &cfg()).unwrap();
            prop_assert_eq!(s, 1.0);
        }

        #[test]
        fn ordinal_agreement_translation_invariant(
            a in 1i64..=9,
            b in 1i64..=9,
            shift in -100i64..=100,
        ) {
            let k1 = AttributeKind::Ordinal { min: 1, max: 9 };
            let k2 = AttributeKind::Ordinal { min: 1 + shift, max: 9 + shift };
            let base = agreement(
                &k1,
                Some(&AttributeValue::Level(a)),
                Some(&AttributeValue::Level(b)),
                &cfg(),
            ).unwrap();
            let shifted = agreement(
                &k2,
                Some(&AttributeValue::Level(a + shift)),
                Some(&AttributeValue::Level(b + shift)),
                &cfg(),
            ).unwrap();
            prop_assert!((base - shifted).abs() < 1e-15);
        }

        #[test]
        fn agreement_always_in_unit_interval(a in 1i64..=9, b in 1i64..=9) {
            let k = AttributeKind::Ordinal { min: 1, max: 9 };
            let s = agreement(
                &k,
                Some(&AttributeValue::Level(a)),
                Some(&AttributeValue::Level(b)),
                &cfg(),
            ).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
