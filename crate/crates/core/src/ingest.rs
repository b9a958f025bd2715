//! Log parsing and network construction.
//!
//! File formats (UTF-8, CSV quoting per RFC 4180):
//!
//! | file               | CSV header                          | JSONL keys                                   |
//! |--------------------|-------------------------------------|----------------------------------------------|
//! | photos             | `photo_id,participant[,timestamp]`  | `photo_id`, `participants[]`, `timestamp?`   |
//! | interactions       | `source,target,kind[,timestamp]`    | `source`, `target`, `kind`, `timestamp?`     |
//! | roles              | `node_id,role`                      | (CSV only)                                   |
//!
//! Identifiers compare by exact bytes. Interaction direction, kind and
//! multiplicity are dropped when building the undirected network.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: photo {photo_id} has no participants")]
    EmptyParticipants { line: u64, photo_id: String },
    #[error("line {line}: {node} interacts with itself")]
    SelfInteraction { line: u64, node: NodeId },
    #[error("line {line}: unknown interaction kind {kind:?}")]
    UnknownKind { line: u64, kind: String },
    #[error("line {line}: unknown role {role:?}")]
    UnknownRole { line: u64, role: String },
    #[error("line {line}: node {node} listed with conflicting roles")]
    DuplicateNode { line: u64, node: NodeId },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IngestError {
    pub fn line(&self) -> Option<u64> {
        match self {
            IngestError::Parse { line, .. }
            | IngestError::EmptyParticipants { line, .. }
            | IngestError::SelfInteraction { line, .. }
            | IngestError::UnknownKind { line, .. }
            | IngestError::UnknownRole { line, .. }
            | IngestError::DuplicateNode { line, .. } => Some(*line),
            IngestError::Io(_) => None,
        }
    }
}

fn parse_err(line: u64, message: impl Into<String>) -> IngestError {
    IngestError::Parse { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    Csv,
    Jsonl,
}

impl LogFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(LogFormat::Csv),
            "jsonl" | "ndjson" => Some(LogFormat::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhotoRecord {
    pub photo_id: String,
    pub participants: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    Wave,
    Like,
    Comment,
    Tag,
    RsvpOther,
}

impl InteractionKind {
    pub const ALL: [InteractionKind; 5] = [
        InteractionKind::Wave,
        InteractionKind::Like,
        InteractionKind::Comment,
        InteractionKind::Tag,
        InteractionKind::RsvpOther,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Wave => "wave",
            InteractionKind::Like => "like",
            InteractionKind::Comment => "comment",
            InteractionKind::Tag => "tag",
            InteractionKind::RsvpOther => "rsvp_other",
        }
    }
}

impl FromStr for InteractionKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InteractionKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub source: NodeId,
    pub target: NodeId,
    pub kind: InteractionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    SeededDeveloper,
    Participant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::SeededDeveloper => "seeded_developer",
            Role::Participant => "participant",
        }
    }
}

impl FromStr for Role {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seeded_developer" => Ok(Role::SeededDeveloper),
            "participant" => Ok(Role::Participant),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Role labels. Nodes without an entry are participants.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleTable {
    roles: BTreeMap<NodeId, Role>,
}

impl RoleTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: NodeId, role: Role) -> Option<Role> {
        self.roles.insert(node, role)
    }

    pub fn role(&self, node: &NodeId) -> Role {
        self.roles.get(node).copied().unwrap_or(Role::Participant)
    }

    pub fn is_developer(&self, node: &NodeId) -> bool {
        self.role(node) == Role::SeededDeveloper
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, Role)> {
        self.roles.iter().map(|(n, r)| (n, *r))
    }

    pub fn developers(&self) -> impl Iterator<Item = &NodeId> {
        self.iter().filter(|(_, r)| *r == Role::SeededDeveloper).map(|(n, _)| n)
    }
}

impl FromIterator<(NodeId, Role)> for RoleTable {
    fn from_iter<T: IntoIterator<Item = (NodeId, Role)>>(iter: T) -> Self {
        RoleTable { roles: iter.into_iter().collect() }
    }
}

/// A network with its role labels. Role entries for nodes outside the graph
/// are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    pub roles: RoleTable,
    pub provenance: String,
}

impl Dataset {
    pub fn new(graph: Graph, roles: RoleTable, provenance: impl Into<String>) -> Self {
        let roles = roles.iter().filter(|(n, _)| graph.contains(n)).map(|(n, r)| (n.clone(), r)).collect();
        Dataset { graph, roles, provenance: provenance.into() }
    }
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::None).from_reader(input)
}

fn csv_line(err: &csv::Error) -> u64 {
    err.position().map_or(0, |p| p.line())
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), IngestError> {
    let headers = rdr.headers().map_err(|e| parse_err(csv_line(&e).max(1), e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    // trailing optional columns may be omitted
    let ok = got.len() <= expected.len()
        && got.len() >= expected.len().min(2)
        && got.iter().zip(expected).all(|(g, e)| g == e);
    if !ok {
        return Err(parse_err(1, format!("expected header {}, found {}", expected.join(","), got.join(","))));
    }
    Ok(())
}

fn node(line: u64, raw: &str, what: &str) -> Result<NodeId, IngestError> {
    NodeId::new(raw).map_err(|_| parse_err(line, format!("empty {what}")))
}

fn optional(raw: Option<&str>) -> Option<String> {
    raw.filter(|s| !s.is_empty()).map(str::to_string)
}

/// Non-blank JSONL lines with their 1-based line numbers.
fn jsonl_lines<R: Read>(input: R) -> impl Iterator<Item = Result<(u64, String), IngestError>> {
    std::io::BufReader::new(input)
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i as u64 + 1, l)).map_err(IngestError::from))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

#[derive(Deserialize)]
struct PhotoLine {
    photo_id: String,
    participants: Vec<String>,
    #[serde(default)]
    timestamp: Option<String>,
}

/// One record per photo, in order of first appearance. CSV rows sharing a
/// `photo_id` merge; repeated participants within a photo collapse.
pub fn parse_photo_log<R: Read>(input: R, format: LogFormat) -> Result<Vec<PhotoRecord>, IngestError> {
    let mut photos: Vec<PhotoRecord> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    let mut seen: Vec<BTreeSet<NodeId>> = Vec::new();

    let mut add = |photo_id: String, who: Vec<NodeId>, ts: Option<String>| {
        let slot = *by_id.entry(photo_id.clone()).or_insert_with(|| {
            photos.push(PhotoRecord { photo_id, participants: Vec::new(), timestamp: None });
            seen.push(BTreeSet::new());
            photos.len() - 1
        });
        let rec = &mut photos[slot];
        if rec.timestamp.is_none() {
            rec.timestamp = ts;
        }
        for p in who {
            if seen[slot].insert(p.clone()) {
                rec.participants.push(p);
            }
        }
    };

    match format {
        LogFormat::Csv => {
            let mut rdr = csv_reader(input);
            check_header(&mut rdr, &["photo_id", "participant", "timestamp"])?;
            for row in rdr.records() {
                let row = row.map_err(|e| parse_err(csv_line(&e), e.to_string()))?;
                let line = row.position().map_or(0, |p| p.line());
                let photo_id = row.get(0).unwrap_or_default();
                if photo_id.is_empty() {
                    return Err(parse_err(line, "empty photo_id"));
                }
                let participant = row.get(1).unwrap_or_default();
                if participant.is_empty() {
                    return Err(IngestError::EmptyParticipants { line, photo_id: photo_id.to_string() });
                }
                let p = node(line, participant, "participant")?;
                add(photo_id.to_string(), vec![p], optional(row.get(2)));
            }
        }
        LogFormat::Jsonl => {
            for item in jsonl_lines(input) {
                let (line, text) = item?;
                let rec: PhotoLine = serde_json::from_str(&text).map_err(|e| parse_err(line, e.to_string()))?;
                if rec.photo_id.is_empty() {
                    return Err(parse_err(line, "empty photo_id"));
                }
                if rec.participants.is_empty() {
                    return Err(IngestError::EmptyParticipants { line, photo_id: rec.photo_id });
                }
                let who =
                    rec.participants.iter().map(|p| node(line, p, "participant")).collect::<Result<Vec<_>, _>>()?;
                add(rec.photo_id, who, rec.timestamp.filter(|t| !t.is_empty()));
            }
        }
    }
    Ok(photos)
}

#[derive(Deserialize)]
struct InteractionLine {
    source: String,
    target: String,
    kind: String,
    #[serde(default)]
    timestamp: Option<String>,
}

fn interaction(
    line: u64,
    source: &str,
    target: &str,
    kind: &str,
    timestamp: Option<String>,
) -> Result<InteractionRecord, IngestError> {
    let source = node(line, source, "source")?;
    let target = node(line, target, "target")?;
    let kind =
        kind.parse::<InteractionKind>().map_err(|_| IngestError::UnknownKind { line, kind: kind.to_string() })?;
    if source == target {
        return Err(IngestError::SelfInteraction { line, node: source });
    }
    Ok(InteractionRecord { source, target, kind, timestamp })
}

pub fn parse_interaction_log<R: Read>(input: R, format: LogFormat) -> Result<Vec<InteractionRecord>, IngestError> {
    let mut out = Vec::new();
    match format {
        LogFormat::Csv => {
            let mut rdr = csv_reader(input);
            check_header(&mut rdr, &["source", "target", "kind", "timestamp"])?;
            for row in rdr.records() {
                let row = row.map_err(|e| parse_err(csv_line(&e), e.to_string()))?;
                let line = row.position().map_or(0, |p| p.line());
                if row.len() < 3 {
                    return Err(parse_err(line, format!("expected at least 3 fields, found {}", row.len())));
                }
                out.push(interaction(line, &row[0], &row[1], &row[2], optional(row.get(3)))?);
            }
        }
        LogFormat::Jsonl => {
            for item in jsonl_lines(input) {
                let (line, text) = item?;
                let rec: InteractionLine = serde_json::from_str(&text).map_err(|e| parse_err(line, e.to_string()))?;
                let ts = rec.timestamp.filter(|t| !t.is_empty());
                out.push(interaction(line, &rec.source, &rec.target, &rec.kind, ts)?);
            }
        }
    }
    Ok(out)
}

/// Reads `node_id,role` rows. Repeating a node with the same role is
/// accepted; a conflicting repeat is an error.
pub fn parse_roles<R: Read>(input: R) -> Result<RoleTable, IngestError> {
    let mut rdr = csv_reader(input);
    check_header(&mut rdr, &["node_id", "role"])?;
    let mut roles = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| parse_err(csv_line(&e), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, found {}", row.len())));
        }
        let id = node(line, &row[0], "node_id")?;
        let role: Role = row[1].parse().map_err(|_| IngestError::UnknownRole { line, role: row[1].to_string() })?;
        match roles.entry(id) {
            Entry::Vacant(v) => {
                v.insert(role);
            }
            Entry::Occupied(o) if *o.get() == role => {}
            Entry::Occupied(o) => return Err(IngestError::DuplicateNode { line, node: o.key().clone() }),
        }
    }
    Ok(RoleTable { roles })
}

/// Every photo becomes a clique over its participants.
pub fn co_appearance_network(photos: &[PhotoRecord]) -> Graph {
    let nodes: Vec<NodeId> = photos.iter().flat_map(|p| p.participants.iter().cloned()).collect();
    let mut edges = Vec::new();
    for photo in photos {
        for (i, a) in photo.participants.iter().enumerate() {
            for b in &photo.participants[i + 1..] {
                if a != b {
                    edges.push((a.clone(), b.clone()));
                }
            }
        }
    }
    Graph::new(nodes, edges).expect("endpoints are drawn from the node list")
}

/// One undirected edge per interacting pair.
pub fn interaction_network(records: &[InteractionRecord]) -> Graph {
    let nodes: Vec<NodeId> = records.iter().flat_map(|r| [r.source.clone(), r.target.clone()]).collect();
    let edges = records.iter().map(|r| (r.source.clone(), r.target.clone()));
    Graph::new(nodes, edges).expect("records never hold self-interactions")
}

/// Union of node and edge sets.
pub fn merge_graphs(a: &Graph, b: &Graph) -> Graph {
    let nodes = a.nodes().iter().chain(b.nodes()).cloned();
    let edges = a.edges().chain(b.edges()).map(|(x, y)| (x.clone(), y.clone()));
    Graph::new(nodes, edges).expect("edges come from well-formed graphs")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// Canonical CSV: one row per (photo, participant).
pub fn write_photo_csv<W: Write>(out: W, photos: &[PhotoRecord]) -> Result<(), IngestError> {
    let mut w = csv_writer(out);
    w.write_record(["photo_id", "participant", "timestamp"]).map_err(csv_io)?;
    for photo in photos {
        let ts = photo.timestamp.as_deref().unwrap_or("");
        for p in &photo.participants {
            w.write_record([photo.photo_id.as_str(), p.as_str(), ts]).map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_interaction_csv<W: Write>(out: W, records: &[InteractionRecord]) -> Result<(), IngestError> {
    let mut w = csv_writer(out);
    w.write_record(["source", "target", "kind", "timestamp"]).map_err(csv_io)?;
    for r in records {
        let ts = r.timestamp.as_deref().unwrap_or("");
        w.write_record([r.source.as_str(), r.target.as_str(), r.kind.as_str(), ts]).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_roles_csv<W: Write>(out: W, roles: &RoleTable) -> Result<(), IngestError> {
    let mut w = csv_writer(out);
    w.write_record(["node_id", "role"]).map_err(csv_io)?;
    for (n, r) in roles.iter() {
        w.write_record([n.as_str(), r.as_str()]).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> IngestError {
    IngestError::Io(std::io::Error::other(e))
}
