//! Contact-log and nomination parsing, and network construction.
//!
//! The activity network links a pair in a semester when their combined call
//! and text events reach a threshold; the friendship network links a pair
//! when at least one nominated the other (configurable to mutual). Both
//! networks are limited to study participants, and node sets include every
//! surveyed participant of the semester by default so snapshot sizes
//! reflect survey participation.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};

use crate::attributes::ProfileStore;
use crate::error::{Error, Result};
use crate::graphcore::{canonical_pair, EdgeWeight, NodeId, Semester, Snapshot};

/// Call or text message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    Call,
    Text,
}

impl ContactKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ContactKind::Call => "call",
            ContactKind::Text => "text",
        }
    }
}

/// One logged communication event.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactRecord {
    pub timestamp: NaiveDateTime,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub kind: ContactKind,
    /// Seconds for calls, characters for texts. Metadata only; thresholds
    /// count events.
    pub magnitude: f64,
}

/// One name-generator survey entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nomination {
    pub semester_index: u16,
    pub nominator: NodeId,
    pub nominee: NodeId,
}

/// Ordered, non-overlapping semesters covering the study window.
#[derive(Debug, Clone, PartialEq)]
pub struct SemesterCalendar {
    semesters: Vec<Semester>,
}

impl SemesterCalendar {
    pub fn new(semesters: Vec<Semester>) -> Result<Self> {
        if semesters.is_empty() {
            return Err(Error::Config("calendar needs at least one semester".into()));
        }
        for pair in semesters.windows(2) {
            if pair[1].index() <= pair[0].index() {
                return Err(Error::Config(
                    "semester indices must be strictly increasing".into(),
                ));
            }
            if pair[1].start() <= pair[0].end() {
                return Err(Error::Config(format!(
                    "semester {} overlaps semester {}",
                    pair[1].index(),
                    pair[0].index()
                )));
            }
        }
        Ok(SemesterCalendar { semesters })
    }

    /// The four study semesters: fall 2011 through spring 2013, with no
    /// summer entry (too little traffic to form a snapshot).
    pub fn netsense_default() -> Self {
        Self::generate(4)
    }

    /// Alternating fall (Aug-Dec) and spring (Jan-May) semesters starting
    /// fall 2011; summers stay uncovered.
    pub fn generate(n_semesters: usize) -> Self {
        let mut semesters = Vec::with_capacity(n_semesters);
        let mut year = 2011i32;
        let mut fall = true;
        for i in 0..n_semesters {
            let (label, start, end) = if fall {
                (
                    format!("Fall {year}"),
                    NaiveDate::from_ymd_opt(year, 8, 1).unwrap(),
                    NaiveDate::from_ymd_opt(year, 12, 31).unwrap(),
                )
            } else {
                (
                    format!("Spring {year}"),
                    NaiveDate::from_ymd_opt(year, 1, 1).unwrap(),
                    NaiveDate::from_ymd_opt(year, 5, 31).unwrap(),
                )
            };
            semesters.push(Semester::new((i + 1) as u16, label, start, end).unwrap());
            if fall {
                year += 1;
            }
            fall = !fall;
        }
        SemesterCalendar::new(semesters).expect("generated calendar is valid")
    }

    pub fn semesters(&self) -> &[Semester] {
        &self.semesters
    }

    pub fn len(&self) -> usize {
        self.semesters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.semesters.is_empty()
    }

    pub fn get(&self, index: u16) -> Option<&Semester> {
        self.semesters.iter().find(|s| s.index() == index)
    }

    /// The semester containing a timestamp, if any (summer gaps match
    /// nothing).
    pub fn semester_of(&self, ts: NaiveDateTime) -> Option<&Semester> {
        let date = ts.date();
        self.semesters.iter().find(|s| s.contains(date))
    }
}

/// Parser behavior for malformed rows.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Fail on the first malformed row or unknown header instead of
    /// collecting issues.
    pub strict: bool,
}

/// A skipped input row and why.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseIssue {
    pub line: usize,
    pub message: String,
}

/// Parsed contact log plus its error report.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactLog {
    pub records: Vec<ContactRecord>,
    pub issues: Vec<ParseIssue>,
}

const CONTACTS_HEADER: &str = "timestamp,sender,receiver,kind,magnitude";
const NOMINATIONS_HEADER: &str = "semester,nominator,nominee";
pub(crate) const CONTACTS_VERSION: &str = "# linkdyn contacts v1";
pub(crate) const NOMINATIONS_VERSION: &str = "# linkdyn nominations v1";
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

fn parse_record(line: &str) -> std::result::Result<ContactRecord, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, got {}", fields.len()));
    }
    let timestamp = NaiveDateTime::parse_from_str(fields[0], TIMESTAMP_FORMAT)
        .map_err(|_| format!("bad timestamp {:?}", fields[0]))?;
    let sender: NodeId = fields[1]
        .parse()
        .map_err(|_| format!("bad sender {:?}", fields[1]))?;
    let receiver: NodeId = fields[2]
        .parse()
        .map_err(|_| format!("bad receiver {:?}", fields[2]))?;
    if sender == receiver {
        return Err(format!("sender and receiver are both {sender}"));
    }
    let kind = match fields[3] {
        "call" => ContactKind::Call,
        "text" => ContactKind::Text,
        other => return Err(format!("bad kind {other:?}")),
    };
    let magnitude: f64 = fields[4]
        .parse()
        .map_err(|_| format!("bad magnitude {:?}", fields[4]))?;
    if !magnitude.is_finite() || magnitude < 0.0 {
        return Err(format!("magnitude {magnitude} must be non-negative"));
    }
    Ok(ContactRecord {
        timestamp,
        sender,
        receiver,
        kind,
        magnitude,
    })
}

/// Parse a contact-log CSV. Malformed rows are collected into the issue
/// report (fatal in strict mode); an unreadable file is always fatal.
pub fn parse_contact_log(path: &Path, opts: ParseOptions) -> Result<ContactLog> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut issues = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            saw_header = true;
            if line == CONTACTS_HEADER {
                continue;
            }
            if opts.strict {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("unknown header {line:?}"),
                });
            }
            // Lenient mode falls through and tries the line as data.
        }
        match parse_record(line) {
            Ok(record) => records.push(record),
            Err(message) => {
                if opts.strict {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        message,
                    });
                }
                issues.push(ParseIssue {
                    line: lineno + 1,
                    message,
                });
            }
        }
    }
    Ok(ContactLog { records, issues })
}

/// Write contact records in file order.
pub fn write_contact_log(records: &[ContactRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(CONTACTS_VERSION);
    out.push('\n');
    out.push_str(CONTACTS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.timestamp.format(TIMESTAMP_FORMAT),
            r.sender,
            r.receiver,
            r.kind.as_str(),
            r.magnitude
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Parsed nominations plus issue report.
#[derive(Debug, Clone, PartialEq)]
pub struct NominationFile {
    pub nominations: Vec<Nomination>,
    pub issues: Vec<ParseIssue>,
}

pub fn parse_nominations(path: &Path, opts: ParseOptions) -> Result<NominationFile> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut nominations = Vec::new();
    let mut issues = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            saw_header = true;
            if line == NOMINATIONS_HEADER {
                continue;
            }
            if opts.strict {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("unknown header {line:?}"),
                });
            }
        }
        let parsed = (|| -> std::result::Result<Nomination, String> {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(format!("expected 3 fields, got {}", fields.len()));
            }
            let semester_index: u16 = fields[0]
                .parse()
                .map_err(|_| format!("bad semester {:?}", fields[0]))?;
            let nominator: NodeId = fields[1]
                .parse()
                .map_err(|_| format!("bad nominator {:?}", fields[1]))?;
            let nominee: NodeId = fields[2]
                .parse()
                .map_err(|_| format!("bad nominee {:?}", fields[2]))?;
            if nominator == nominee {
                return Err("self-nomination".into());
            }
            Ok(Nomination {
                semester_index,
                nominator,
                nominee,
            })
        })();
        match parsed {
            Ok(nom) => nominations.push(nom),
            Err(message) => {
                if opts.strict {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        message,
                    });
                }
                issues.push(ParseIssue {
                    line: lineno + 1,
                    message,
                });
            }
        }
    }
    Ok(NominationFile {
        nominations,
        issues,
    })
}

pub fn write_nominations(noms: &[Nomination], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(NOMINATIONS_VERSION);
    out.push('\n');
    out.push_str(NOMINATIONS_HEADER);
    out.push('\n');
    for n in noms {
        out.push_str(&format!(
            "{},{},{}\n",
            n.semester_index, n.nominator, n.nominee
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Study participants, per semester and overall.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Roster {
    per_semester: BTreeMap<u16, BTreeSet<NodeId>>,
    all: BTreeSet<NodeId>,
}

impl Roster {
    pub fn from_profiles(store: &ProfileStore) -> Self {
        let mut per_semester: BTreeMap<u16, BTreeSet<NodeId>> = BTreeMap::new();
        for sem in store.semesters() {
            per_semester.insert(sem, store.surveyed(sem));
        }
        let all = store.participants();
        Roster { per_semester, all }
    }

    pub fn from_parts(per_semester: BTreeMap<u16, BTreeSet<NodeId>>) -> Self {
        let all = per_semester.values().flatten().copied().collect();
        Roster { per_semester, all }
    }

    pub fn participants(&self) -> &BTreeSet<NodeId> {
        &self.all
    }

    pub fn surveyed(&self, semester_index: u16) -> Option<&BTreeSet<NodeId>> {
        self.per_semester.get(&semester_index)
    }

    pub fn is_participant(&self, node: NodeId) -> bool {
        self.all.contains(&node)
    }
}

/// Which nominations create a friendship edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NominationRule {
    /// An edge when at least one endpoint nominated the other.
    #[default]
    Either,
    /// An edge only when both nominated each other.
    Mutual,
}

impl NominationRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            NominationRule::Either => "either",
            NominationRule::Mutual => "mutual",
        }
    }
}

impl std::str::FromStr for NominationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "either" => Ok(NominationRule::Either),
            "mutual" => Ok(NominationRule::Mutual),
            other => Err(Error::InvalidArgument(format!(
                "unknown nomination rule {other:?} (expected either or mutual)"
            ))),
        }
    }
}

/// Options for activity-network construction.
#[derive(Debug, Clone, Copy)]
pub struct ActivityConfig {
    /// Minimum combined call+text events per semester for an edge.
    pub threshold: u32,
    /// Include surveyed-but-inactive participants as isolated nodes.
    pub include_isolates: bool,
}

impl Default for ActivityConfig {
    fn default() -> Self {
        ActivityConfig {
            threshold: 5,
            include_isolates: true,
        }
    }
}

/// Dropped-input counts from network construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildReport {
    /// Records falling outside every semester range (summer gaps).
    pub out_of_range_records: usize,
    /// Records or nominations involving a non-participant.
    pub non_participant_drops: usize,
}

/// Build one activity snapshot per semester: an edge per pair whose total
/// contact events within the semester reach the threshold, weights split
/// by kind.
pub fn build_activity_network(
    records: &[ContactRecord],
    cal: &SemesterCalendar,
    cfg: &ActivityConfig,
    roster: &Roster,
) -> Result<(Vec<Snapshot>, BuildReport)> {
    if cfg.threshold == 0 {
        return Err(Error::InvalidArgument(
            "activity threshold must be at least 1".into(),
        ));
    }
    let mut report = BuildReport::default();
    let mut counts: BTreeMap<u16, BTreeMap<(NodeId, NodeId), EdgeWeight>> = BTreeMap::new();
    let mut active: BTreeMap<u16, BTreeSet<NodeId>> = BTreeMap::new();
    for record in records {
        let Some(sem) = cal.semester_of(record.timestamp) else {
            report.out_of_range_records += 1;
            continue;
        };
        if !roster.is_participant(record.sender) || !roster.is_participant(record.receiver) {
            report.non_participant_drops += 1;
            continue;
        }
        let idx = sem.index();
        let active_set = active.entry(idx).or_default();
        active_set.insert(record.sender);
        active_set.insert(record.receiver);
        let pair = canonical_pair(record.sender, record.receiver);
        let w = counts.entry(idx).or_default().entry(pair).or_default();
        match record.kind {
            ContactKind::Call => w.calls += 1,
            ContactKind::Text => w.texts += 1,
        }
    }

    let mut snapshots = Vec::with_capacity(cal.len());
    for sem in cal.semesters() {
        let idx = sem.index();
        let mut builder = Snapshot::builder(sem.clone());
        if cfg.include_isolates {
            if let Some(surveyed) = roster.surveyed(idx) {
                builder.add_nodes(surveyed.iter().copied());
            }
        }
        if let Some(active_set) = active.get(&idx) {
            builder.add_nodes(active_set.iter().copied());
        }
        if let Some(pair_counts) = counts.get(&idx) {
            for (&(u, v), &w) in pair_counts {
                if w.total() >= cfg.threshold {
                    builder.add_edge(u, v, w)?;
                }
            }
        }
        snapshots.push(builder.build());
    }
    Ok((snapshots, report))
}

/// Build one friendship snapshot per semester from nominations. Weights
/// are zero; use [`attach_contact_weights`] to fill them from a contact
/// log for communication statistics.
pub fn build_friendship_network(
    noms: &[Nomination],
    cal: &SemesterCalendar,
    rule: NominationRule,
    roster: &Roster,
    include_isolates: bool,
) -> Result<(Vec<Snapshot>, BuildReport)> {
    let mut report = BuildReport::default();
    let mut nominated: BTreeMap<u16, BTreeSet<(NodeId, NodeId)>> = BTreeMap::new();
    let mut active: BTreeMap<u16, BTreeSet<NodeId>> = BTreeMap::new();
    for nom in noms {
        if cal.get(nom.semester_index).is_none() {
            report.out_of_range_records += 1;
            continue;
        }
        if !roster.is_participant(nom.nominator) || !roster.is_participant(nom.nominee) {
            report.non_participant_drops += 1;
            continue;
        }
        nominated
            .entry(nom.semester_index)
            .or_default()
            .insert((nom.nominator, nom.nominee));
        let active_set = active.entry(nom.semester_index).or_default();
        active_set.insert(nom.nominator);
        active_set.insert(nom.nominee);
    }

    let mut snapshots = Vec::with_capacity(cal.len());
    for sem in cal.semesters() {
        let idx = sem.index();
        let mut builder = Snapshot::builder(sem.clone());
        if include_isolates {
            if let Some(surveyed) = roster.surveyed(idx) {
                builder.add_nodes(surveyed.iter().copied());
            }
        }
        if let Some(active_set) = active.get(&idx) {
            builder.add_nodes(active_set.iter().copied());
        }
        if let Some(directed) = nominated.get(&idx) {
            let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
            for &(a, b) in directed {
                let keep = match rule {
                    NominationRule::Either => true,
                    NominationRule::Mutual => directed.contains(&(b, a)),
                };
                if keep {
                    edges.insert(canonical_pair(a, b));
                }
            }
            for (u, v) in edges {
                builder.add_edge(u, v, EdgeWeight::default())?;
            }
        }
        snapshots.push(builder.build());
    }
    Ok((snapshots, report))
}

/// Return copies of `snaps` whose edge weights are the per-pair call and
/// text counts from the contact log, regardless of any threshold. Used to
/// give friendship edges their communication volumes.
pub fn attach_contact_weights(
    snaps: &[Snapshot],
    records: &[ContactRecord],
    cal: &SemesterCalendar,
) -> Result<Vec<Snapshot>> {
    let mut counts: BTreeMap<(u16, (NodeId, NodeId)), EdgeWeight> = BTreeMap::new();
    for record in records {
        let Some(sem) = cal.semester_of(record.timestamp) else {
            continue;
        };
        let pair = canonical_pair(record.sender, record.receiver);
        let w = counts.entry((sem.index(), pair)).or_default();
        match record.kind {
            ContactKind::Call => w.calls += 1,
            ContactKind::Text => w.texts += 1,
        }
    }
    let mut out = Vec::with_capacity(snaps.len());
    for snap in snaps {
        let idx = snap.semester().index();
        let mut builder = Snapshot::builder(snap.semester().clone());
        builder.add_nodes(snap.nodes().iter().copied());
        for (&(u, v), _) in snap.edges() {
            let w = counts.get(&(idx, (u, v))).copied().unwrap_or_default();
            builder.add_edge(u, v, w)?;
        }
        out.push(builder.build());
    }
    Ok(out)
}
