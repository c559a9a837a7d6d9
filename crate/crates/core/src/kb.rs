//! ConceptNet-style knowledge store.
//!
//! # On-disk layout (version 1, little endian)
//!
//! ```text
//! index file <store>:
//!   magic     4 bytes  "MQKB"
//!   version   u32      1
//!   n_edges   u32
//!   n_edges × edge, sorted by (subject, relation id, object):
//!     u16 len, subject bytes (UTF-8)
//!     u8  relation id (position in Relation::ALL)
//!     u16 len, object bytes
//!     f64 weight
//!   n_concepts u32
//!   n_concepts × concept, sorted by name:
//!     u16 len, name bytes
//!     u32 degree, degree × u32 edge index
//!
//! append log <store>.log:
//!   TSV lines (subject, relation, object, weight) added since the last
//!   compaction; replayed on open.
//! ```
//!
//! Duplicate (subject, relation, object) edges keep the maximum weight, so
//! re-ingesting the same dump is a no-op.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::text;

pub const MAGIC: &[u8; 4] = b"MQKB";
pub const FORMAT_VERSION: u32 = 1;
pub const MAX_TAXONOMY_DISTANCE: usize = 6;

macro_rules! relations {
    ($( $name:ident => $phrase:literal ),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Relation { $( $name ),* }

        impl Relation {
            pub const ALL: &'static [Relation] = &[ $( Relation::$name ),* ];

            pub fn name(self) -> &'static str {
                match self { $( Relation::$name => stringify!($name) ),* }
            }

            /// Verb phrase used when a fact is realized as a sentence.
            pub fn phrase(self) -> &'static str {
                match self { $( Relation::$name => $phrase ),* }
            }
        }
    };
}

relations! {
    RelatedTo => "is related to",
    FormOf => "is a form of",
    IsA => "is a type of",
    PartOf => "is part of",
    HasA => "has",
    UsedFor => "is used for",
    CapableOf => "is capable of",
    AtLocation => "is found at",
    Causes => "causes",
    HasSubevent => "involves",
    HasFirstSubevent => "starts with",
    HasLastSubevent => "ends with",
    HasPrerequisite => "requires",
    HasProperty => "is",
    MotivatedByGoal => "is motivated by",
    ObstructedBy => "is obstructed by",
    Desires => "desires",
    CreatedBy => "is created by",
    Synonym => "means the same as",
    Antonym => "is the opposite of",
    DistinctFrom => "is distinct from",
    DerivedFrom => "is derived from",
    SymbolOf => "is a symbol of",
    DefinedAs => "is defined as",
    MannerOf => "is a way of",
    LocatedNear => "is located near",
    HasContext => "is used in the context of",
    SimilarTo => "is similar to",
    EtymologicallyRelatedTo => "is etymologically related to",
    EtymologicallyDerivedFrom => "is etymologically derived from",
    CausesDesire => "makes people want",
    MadeOf => "is made of",
    ReceivesAction => "can be",
    InstanceOf => "is an instance of",
    Entails => "entails",
    NotDesires => "does not desire",
}

impl Relation {
    fn id(self) -> u8 {
        Relation::ALL.iter().position(|r| *r == self).expect("relation listed") as u8
    }

    fn from_id(id: u8) -> Option<Relation> {
        Relation::ALL.get(usize::from(id)).copied()
    }

    pub fn is_taxonomic(self) -> bool {
        matches!(self, Relation::IsA | Relation::Synonym | Relation::PartOf)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown relation {0:?}")]
pub struct UnknownRelation(pub String);

impl FromStr for Relation {
    type Err = UnknownRelation;

    /// Accepts `IsA` and `/r/IsA`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bare = s.trim().trim_start_matches("/r/");
        Relation::ALL
            .iter()
            .copied()
            .find(|r| r.name() == bare)
            .ok_or_else(|| UnknownRelation(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeEdge {
    pub subject: String,
    pub relation: Relation,
    pub object: String,
    pub weight: f64,
}

impl KnowledgeEdge {
    /// The endpoint that is not `concept`.
    pub fn other(&self, concept: &str) -> &str {
        if self.subject == concept {
            &self.object
        } else {
            &self.subject
        }
    }

    fn sort_key(&self) -> (&str, Relation, &str) {
        (&self.subject, self.relation, &self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationPool {
    pub name: String,
    pub relations: BTreeSet<Relation>,
}

impl RelationPool {
    pub fn new(name: impl Into<String>, relations: impl IntoIterator<Item = Relation>) -> Self {
        let relations: BTreeSet<_> = relations.into_iter().collect();
        assert!(!relations.is_empty(), "relation pool must be non-empty");
        RelationPool { name: name.into(), relations }
    }

    /// Hand-selected relations for background-knowledge retrieval.
    pub fn background_knowledge() -> Self {
        use Relation::*;
        RelationPool::new(
            "bk",
            [
                PartOf, IsA, HasSubevent, Synonym, Antonym, MadeOf, DerivedFrom, DefinedAs,
                RelatedTo, UsedFor, CapableOf, AtLocation, Causes, HasProperty, Desires, CreatedBy,
                DistinctFrom, SymbolOf, LocatedNear, SimilarTo,
            ],
        )
    }

    /// Relations whose neighbors make plausible-but-wrong replacements.
    pub fn distractor() -> Self {
        use Relation::*;
        RelationPool::new(
            "distractor",
            [RelatedTo, Antonym, DistinctFrom, AtLocation, UsedFor, CapableOf, SimilarTo],
        )
    }

    pub fn contains(&self, r: Relation) -> bool {
        self.relations.contains(&r)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path} is not a knowledge store (bad magic)")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported store version {version}")]
    Version { path: PathBuf, version: u32 },
    #[error("{path}: corrupt store: {message}")]
    Corrupt { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub lines: usize,
    pub accepted: usize,
    pub skipped_unknown_relation: usize,
    pub skipped_malformed: usize,
    pub duplicates_merged: usize,
    pub edges_in_store: usize,
}

/// In-memory view of a store. Read-only after construction, so it can be
/// shared across threads behind an `Arc`.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeStore {
    edges: Vec<KnowledgeEdge>,
    adjacency: HashMap<String, Vec<u32>>,
}

enum TsvLine {
    Edge(KnowledgeEdge),
    UnknownRelation(String),
    Malformed,
}

fn parse_tsv_line(line: &str) -> TsvLine {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() < 3 || cols.len() > 4 {
        return TsvLine::Malformed;
    }
    let relation = match cols[1].parse::<Relation>() {
        Ok(r) => r,
        Err(e) => return TsvLine::UnknownRelation(e.0),
    };
    let weight = match cols.get(3).map(|w| w.trim().parse::<f64>()) {
        None => 1.0,
        Some(Ok(w)) if w.is_finite() && w >= 0.0 => w,
        Some(_) => return TsvLine::Malformed,
    };
    let subject = text::normalize_concept(cols[0]);
    let object = text::normalize_concept(cols[2]);
    if subject.is_empty() || object.is_empty() || subject == object {
        return TsvLine::Malformed;
    }
    TsvLine::Edge(KnowledgeEdge { subject, relation, object, weight })
}

fn log_path(store: &Path) -> PathBuf {
    let mut p = store.as_os_str().to_owned();
    p.push(".log");
    PathBuf::from(p)
}

fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    let len = u16::try_from(s.len()).map_err(|_| io::Error::other("string longer than 65535 bytes"))?;
    w.write_u16::<LittleEndian>(len)?;
    w.write_all(s.as_bytes())
}

fn read_str<R: Read>(r: &mut R) -> io::Result<String> {
    let len = r.read_u16::<LittleEndian>()?;
    let mut buf = vec![0; usize::from(len)];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

impl KnowledgeStore {
    /// Builds a store from edges, merging duplicates by maximum weight.
    pub fn from_edges(edges: impl IntoIterator<Item = KnowledgeEdge>) -> Self {
        let mut store = KnowledgeStore::default();
        let mut merged = 0;
        store.extend(edges, &mut merged);
        store
    }

    fn extend(&mut self, edges: impl IntoIterator<Item = KnowledgeEdge>, merged: &mut usize) {
        let mut map: BTreeMap<(String, Relation, String), f64> = self
            .edges
            .drain(..)
            .map(|e| ((e.subject, e.relation, e.object), e.weight))
            .collect();
        for e in edges {
            match map.entry((e.subject, e.relation, e.object)) {
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    *merged += 1;
                    if e.weight > *o.get() {
                        o.insert(e.weight);
                    }
                }
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(e.weight);
                }
            }
        }
        self.edges = map
            .into_iter()
            .map(|((subject, relation, object), weight)| KnowledgeEdge { subject, relation, object, weight })
            .collect();
        self.reindex();
    }

    fn reindex(&mut self) {
        self.adjacency.clear();
        for (i, e) in self.edges.iter().enumerate() {
            self.adjacency.entry(e.subject.clone()).or_default().push(i as u32);
            self.adjacency.entry(e.object.clone()).or_default().push(i as u32);
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[KnowledgeEdge] {
        &self.edges
    }

    pub fn contains_concept(&self, concept: &str) -> bool {
        self.adjacency.contains_key(&text::normalize_concept(concept))
    }

    fn incident(&self, concept: &str) -> impl Iterator<Item = &KnowledgeEdge> {
        self.adjacency
            .get(concept)
            .into_iter()
            .flatten()
            .map(|&i| &self.edges[i as usize])
    }

    /// Edges touching `concept` whose relation is in `pool`, strongest first,
    /// then lexicographic by (subject, relation, object). At most `limit`.
    pub fn neighbors(&self, concept: &str, pool: &RelationPool, limit: usize) -> Vec<KnowledgeEdge> {
        let concept = text::normalize_concept(concept);
        let mut out: Vec<&KnowledgeEdge> =
            self.incident(&concept).filter(|e| pool.contains(e.relation)).collect();
        out.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.sort_key().cmp(&b.sort_key())));
        out.into_iter().take(limit).cloned().collect()
    }

    /// Taxonomy distance over IsA / Synonym / PartOf, undirected, capped.
    pub fn taxonomy_distance(&self, a: &str, b: &str) -> Option<usize> {
        let a = text::normalize_concept(a);
        let b = text::normalize_concept(b);
        if a == b {
            return Some(0);
        }
        let mut seen: HashSet<&str> = HashSet::new();
        let mut queue: VecDeque<(&str, usize)> = VecDeque::new();
        let start = self.adjacency.get_key_value(a.as_str())?.0.as_str();
        seen.insert(start);
        queue.push_back((start, 0));
        while let Some((node, d)) = queue.pop_front() {
            if d == MAX_TAXONOMY_DISTANCE {
                continue;
            }
            for e in self.incident(node).filter(|e| e.relation.is_taxonomic()) {
                let next = e.other(node);
                if next == b {
                    return Some(d + 1);
                }
                if seen.insert(next) {
                    queue.push_back((next, d + 1));
                }
            }
        }
        None
    }

    /// `1 / (1 + d)` over the taxonomy; 1 for equal concepts, 0 beyond distance 6.
    pub fn concept_similarity(&self, a: &str, b: &str) -> f64 {
        match self.taxonomy_distance(a, b) {
            Some(d) => 1.0 / (1.0 + d as f64),
            None => 0.0,
        }
    }

    /// Loads the index and replays the append log, if any.
    pub fn open(path: &Path) -> Result<Self, KbError> {
        let io_err = |source| KbError::Io { path: path.to_path_buf(), source };
        let mut r = BufReader::new(File::open(path).map_err(io_err)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io_err)?;
        if &magic != MAGIC {
            return Err(KbError::BadMagic { path: path.to_path_buf() });
        }
        let version = r.read_u32::<LittleEndian>().map_err(io_err)?;
        if version != FORMAT_VERSION {
            return Err(KbError::Version { path: path.to_path_buf(), version });
        }
        let corrupt = |message: String| KbError::Corrupt { path: path.to_path_buf(), message };
        let n = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
        let mut edges = Vec::with_capacity(n);
        for _ in 0..n {
            let subject = read_str(&mut r).map_err(io_err)?;
            let rel_id = r.read_u8().map_err(io_err)?;
            let relation = Relation::from_id(rel_id).ok_or_else(|| corrupt(format!("relation id {rel_id}")))?;
            let object = read_str(&mut r).map_err(io_err)?;
            let weight = r.read_f64::<LittleEndian>().map_err(io_err)?;
            edges.push(KnowledgeEdge { subject, relation, object, weight });
        }
        let n_concepts = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
        let mut adjacency = HashMap::with_capacity(n_concepts);
        for _ in 0..n_concepts {
            let name = read_str(&mut r).map_err(io_err)?;
            let degree = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
            let mut ids = Vec::with_capacity(degree);
            for _ in 0..degree {
                let id = r.read_u32::<LittleEndian>().map_err(io_err)?;
                if id as usize >= edges.len() {
                    return Err(corrupt(format!("edge index {id} out of range")));
                }
                ids.push(id);
            }
            adjacency.insert(name, ids);
        }
        let mut store = KnowledgeStore { edges, adjacency };

        let log = log_path(path);
        if log.exists() {
            let file = File::open(&log).map_err(|source| KbError::Io { path: log.clone(), source })?;
            let mut pending = Vec::new();
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|source| KbError::Io { path: log.clone(), source })?;
                if let TsvLine::Edge(e) = parse_tsv_line(&line) {
                    pending.push(e);
                }
            }
            if !pending.is_empty() {
                store.extend(pending, &mut 0);
            }
        }
        Ok(store)
    }

    /// Writes the sorted index atomically and truncates the append log.
    pub fn save(&self, path: &Path) -> Result<(), KbError> {
        let tmp = path.with_extension("tmp");
        let io_err = |source| KbError::Io { path: tmp.clone(), source };
        {
            let mut w = BufWriter::new(File::create(&tmp).map_err(io_err)?);
            w.write_all(MAGIC).map_err(io_err)?;
            w.write_u32::<LittleEndian>(FORMAT_VERSION).map_err(io_err)?;
            w.write_u32::<LittleEndian>(self.edges.len() as u32).map_err(io_err)?;
            for e in &self.edges {
                write_str(&mut w, &e.subject).map_err(io_err)?;
                w.write_u8(e.relation.id()).map_err(io_err)?;
                write_str(&mut w, &e.object).map_err(io_err)?;
                w.write_f64::<LittleEndian>(e.weight).map_err(io_err)?;
            }
            let concepts: BTreeMap<&String, &Vec<u32>> = self.adjacency.iter().collect();
            w.write_u32::<LittleEndian>(concepts.len() as u32).map_err(io_err)?;
            for (name, ids) in concepts {
                write_str(&mut w, name).map_err(io_err)?;
                w.write_u32::<LittleEndian>(ids.len() as u32).map_err(io_err)?;
                for id in ids {
                    w.write_u32::<LittleEndian>(*id).map_err(io_err)?;
                }
            }
            w.into_inner().map_err(|e| io_err(e.into_error()))?.sync_all().map_err(io_err)?;
        }
        fs::rename(&tmp, path).map_err(|source| KbError::Io { path: path.to_path_buf(), source })?;
        let log = log_path(path);
        if log.exists() {
            fs::remove_file(&log).map_err(|source| KbError::Io { path: log, source })?;
        }
        Ok(())
    }

    /// Appends one edge to the store's log without rewriting the index.
    pub fn append(path: &Path, edge: &KnowledgeEdge) -> Result<(), KbError> {
        let log = log_path(path);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log)
            .map_err(|source| KbError::Io { path: log.clone(), source })?;
        writeln!(f, "{}\t{}\t{}\t{}", edge.subject, edge.relation, edge.object, edge.weight)
            .and_then(|_| f.sync_data())
            .map_err(|source| KbError::Io { path: log, source })
    }
}

/// Parses a TSV edge dump (subject, relation, object[, weight]) into the
/// store at `out`, merging with whatever is already there.
pub fn ingest(tsv: &Path, out: &Path) -> Result<(KnowledgeStore, IngestReport), KbError> {
    let file = File::open(tsv).map_err(|source| KbError::Io { path: tsv.to_path_buf(), source })?;
    let mut report = IngestReport::default();
    let mut accepted = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| KbError::Io { path: tsv.to_path_buf(), source })?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        report.lines += 1;
        match parse_tsv_line(&line) {
            TsvLine::Edge(e) => accepted.push(e),
            TsvLine::UnknownRelation(name) => {
                report.skipped_unknown_relation += 1;
                tracing::warn!(relation = %name, "skipping edge with unknown relation");
            }
            TsvLine::Malformed => report.skipped_malformed += 1,
        }
    }
    report.accepted = accepted.len();
    let mut store = if out.exists() { KnowledgeStore::open(out)? } else { KnowledgeStore::default() };
    store.extend(accepted, &mut report.duplicates_merged);
    store.save(out)?;
    report.edges_in_store = store.len();
    Ok((store, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(s: &str, r: Relation, o: &str, w: f64) -> KnowledgeEdge {
        KnowledgeEdge { subject: s.into(), relation: r, object: o.into(), weight: w }
    }

    fn write_tsv(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("edges.tsv");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn three_edge_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let tsv = write_tsv(
            dir.path(),
            "trombone\tIsA\tbrass_instrument\t2.0\nboy\t/r/AtLocation\tschool\t1.0\nboy\tAntonym\tgirl\t1.5\n",
        );
        let out = dir.path().join("kb.bin");
        let (store, report) = ingest(&tsv, &out).unwrap();
        assert_eq!(store.len(), 3);
        assert_eq!(report.accepted, 3);
        let reopened = KnowledgeStore::open(&out).unwrap();
        assert_eq!(reopened.edges(), store.edges());
        assert_eq!(reopened.neighbors("boy", &RelationPool::distractor(), 10).len(), 2);
    }

    #[test]
    fn duplicates_keep_max_weight_and_reingest_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let tsv = write_tsv(dir.path(), "a\tIsA\tb\t1.0\na\tIsA\tb\t2.0\n");
        let out = dir.path().join("kb.bin");
        let (store, report) = ingest(&tsv, &out).unwrap();
        assert_eq!(store.edges(), &[edge("a", Relation::IsA, "b", 2.0)]);
        assert_eq!(report.duplicates_merged, 1);
        let before = fs::read(&out).unwrap();
        ingest(&tsv, &out).unwrap();
        assert_eq!(fs::read(&out).unwrap(), before);
    }

    #[test]
    fn unknown_relations_are_counted() {
        let dir = tempfile::tempdir().unwrap();
        let tsv = write_tsv(dir.path(), "a\tIsA\tb\t1\na\tMadeUpRel\tc\t1\nbroken line\n");
        let (_, report) = ingest(&tsv, &dir.path().join("kb.bin")).unwrap();
        assert_eq!(report.lines, 3);
        assert_eq!(report.accepted, 1);
        assert_eq!(report.skipped_unknown_relation, 1);
        assert_eq!(report.skipped_malformed, 1);
    }

    #[test]
    fn append_log_is_replayed() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("kb.bin");
        KnowledgeStore::from_edges([edge("a", Relation::IsA, "b", 1.0)]).save(&out).unwrap();
        KnowledgeStore::append(&out, &edge("b", Relation::IsA, "c", 1.0)).unwrap();
        let store = KnowledgeStore::open(&out).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.taxonomy_distance("a", "c"), Some(2));
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        fs::write(&p, b"NOPE\x01\x00\x00\x00").unwrap();
        assert!(matches!(KnowledgeStore::open(&p), Err(KbError::BadMagic { .. })));
    }

    #[test]
    fn neighbors_order_and_limit() {
        let store = KnowledgeStore::from_edges([
            edge("trombone", Relation::IsA, "brass_instrument", 2.0),
            edge("trombone", Relation::RelatedTo, "slide", 1.0),
            edge("jazz", Relation::RelatedTo, "trombone", 1.0),
            edge("trombone", Relation::HasA, "bell", 5.0),
        ]);
        let bk = RelationPool::background_knowledge();
        let got: Vec<_> = store.neighbors("Trombone", &bk, 10).into_iter().map(|e| e.object).collect();
        assert_eq!(got, vec!["brass_instrument", "trombone", "slide"]);
        assert_eq!(store.neighbors("trombone", &bk, 1)[0].object, "brass_instrument");
        assert!(store.neighbors("tuba", &bk, 5).is_empty());
    }

    #[test]
    fn similarity_cases() {
        let store = KnowledgeStore::from_edges([
            edge("trombone", Relation::IsA, "brass_instrument", 1.0),
            edge("brass_instrument", Relation::IsA, "instrument", 1.0),
            edge("dog", Relation::IsA, "animal", 1.0),
            edge("trombone", Relation::RelatedTo, "dog", 1.0),
        ]);
        assert_eq!(store.concept_similarity("trombone", "Trombone"), 1.0);
        assert_eq!(store.concept_similarity("trombone", "brass instrument"), 0.5);
        assert!((store.concept_similarity("instrument", "trombone") - 1.0 / 3.0).abs() < 1e-15);
        // RelatedTo is not taxonomic
        assert_eq!(store.concept_similarity("trombone", "dog"), 0.0);
        assert_eq!(store.concept_similarity("x", "y"), 0.0);
    }

    #[test]
    fn distance_cap_is_six() {
        let chain: Vec<_> = (0..8)
            .map(|i| edge(&format!("c{i}"), Relation::IsA, &format!("c{}", i + 1), 1.0))
            .collect();
        let store = KnowledgeStore::from_edges(chain);
        assert_eq!(store.taxonomy_distance("c0", "c6"), Some(6));
        assert_eq!(store.taxonomy_distance("c0", "c7"), None);
        assert_eq!(store.concept_similarity("c0", "c7"), 0.0);
    }
}
