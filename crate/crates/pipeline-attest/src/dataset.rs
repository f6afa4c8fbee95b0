//! Training records and committed datasets.
//!
//! A record is a fixed-width numeric row that always traces back to a
//! raw asset by hash. On disk a dataset is JSON-lines, one canonical
//! JSON record per line, with fixed-point values written as scaled
//! integers. Committed datasets blind each record into a Merkle leaf;
//! the training dataset keeps its leaves sorted so deletions can later
//! be proven by non-membership.

use crate::canonical::to_canonical_json;
use crate::commit::{tagged_hash, Blinding, Digest, DomainTag, MerkleTree, SortedMerkleTree};
use crate::field::FixedPoint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("record payload is not a valid numeric row: {0}")]
    PayloadParse(String),
    #[error("schema mismatch: expected {expected} features, got {got}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("dataset is empty")]
    Empty,
    #[error(transparent)]
    Merkle(#[from] crate::commit::MerkleError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One training example: feature vector, label, and the hash of the raw
/// asset it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub features: Vec<FixedPoint>,
    pub label: FixedPoint,
    pub source: Digest,
}

/// The numeric row shape carried inside raw asset payloads.
#[derive(Debug, Serialize, Deserialize)]
struct RowPayload {
    features: Vec<i64>,
    label: i64,
}

impl Record {
    /// Parses a raw asset payload (canonical JSON row of scaled integers)
    /// into a record bound to the asset hash.
    pub fn from_payload(payload: &[u8], source: Digest) -> Result<Self, DatasetError> {
        let row: RowPayload = serde_json::from_slice(payload)
            .map_err(|e| DatasetError::PayloadParse(e.to_string()))?;
        let features = row
            .features
            .iter()
            .map(|&s| FixedPoint::from_scaled(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| DatasetError::PayloadParse(e.to_string()))?;
        let label = FixedPoint::from_scaled(row.label)
            .map_err(|e| DatasetError::PayloadParse(e.to_string()))?;
        Ok(Record {
            features,
            label,
            source,
        })
    }

    /// Canonical JSON bytes; this is what gets committed into leaves.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        to_canonical_json(self)
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// Serializes a payload row (what a raw asset file contains).
pub fn row_payload_bytes(features: &[i64], label: i64) -> Vec<u8> {
    to_canonical_json(&RowPayload {
        features: features.to_vec(),
        label,
    })
}

/// Leaf for a corpus tree: SHA-256(0x00 || blinding || asset_hash || record bytes).
pub fn corpus_leaf(blinding: &Blinding, asset_hash: &Digest, record: &Record) -> Digest {
    tagged_hash(
        DomainTag::Leaf,
        &[blinding, asset_hash.as_bytes(), &record.canonical_bytes()],
    )
}

/// Leaf for a transformed-dataset tree: SHA-256(0x00 || blinding || record bytes).
pub fn record_leaf(blinding: &Blinding, record: &Record) -> Digest {
    tagged_hash(DomainTag::Leaf, &[blinding, &record.canonical_bytes()])
}

/// A corpus committed in input order. Row `i` of `records` owns leaf `i`.
#[derive(Debug, Clone)]
pub struct CommittedCorpus {
    pub records: Vec<Record>,
    pub blindings: Vec<Blinding>,
    pub asset_hashes: Vec<Digest>,
    pub tree: MerkleTree,
}

impl CommittedCorpus {
    pub fn root(&self) -> Digest {
        self.tree.root()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// A dataset committed as a sorted-leaf tree. Records are held in sorted
/// leaf order: index `i` everywhere (batch schedules, proofs, openings)
/// means the `i`-th leaf of the sorted tree.
#[derive(Debug, Clone)]
pub struct CommittedDataset {
    pub records: Vec<Record>,
    pub blindings: Vec<Blinding>,
    pub tree: SortedMerkleTree,
}

impl CommittedDataset {
    /// Blinds and commits records; the given order is forgotten in favor
    /// of sorted leaf order.
    pub fn commit(
        records: Vec<Record>,
        blindings: Vec<Blinding>,
    ) -> Result<Self, DatasetError> {
        if records.is_empty() {
            return Err(DatasetError::Empty);
        }
        assert_eq!(records.len(), blindings.len());
        let mut entries: Vec<(Digest, Record, Blinding)> = records
            .into_iter()
            .zip(blindings)
            .map(|(rec, blind)| (record_leaf(&blind, &rec), rec, blind))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|a, b| a.0 == b.0);
        let leaves: Vec<Digest> = entries.iter().map(|e| e.0).collect();
        let tree = SortedMerkleTree::from_leaf_digests(leaves)?;
        let (records, blindings) = entries.into_iter().map(|(_, r, b)| (r, b)).unzip();
        Ok(CommittedDataset {
            records,
            blindings,
            tree,
        })
    }

    pub fn root(&self) -> Digest {
        self.tree.root()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.records.first().map(|r| r.dim()).unwrap_or(0)
    }

    /// Drops the record at sorted index `i`, preserving order. The
    /// surviving leaves are unchanged, so the new tree is the old one
    /// minus exactly that leaf.
    pub fn without_index(&self, index: usize) -> Result<Self, DatasetError> {
        let mut records = self.records.clone();
        let mut blindings = self.blindings.clone();
        if index >= records.len() {
            return Err(DatasetError::Empty);
        }
        records.remove(index);
        blindings.remove(index);
        if records.is_empty() {
            return Err(DatasetError::Empty);
        }
        let leaves: Vec<Digest> = records
            .iter()
            .zip(&blindings)
            .map(|(r, b)| record_leaf(b, r))
            .collect();
        let tree = SortedMerkleTree::from_leaf_digests(leaves)?;
        Ok(CommittedDataset {
            records,
            blindings,
            tree,
        })
    }
}

/// Writes records as JSON-lines (one canonical JSON record per line).
pub fn write_jsonl(records: &[Record]) -> Vec<u8> {
    let mut out = Vec::new();
    for record in records {
        out.extend_from_slice(&record.canonical_bytes());
        out.push(b'\n');
    }
    out
}

/// Parses a JSON-lines dataset, enforcing a constant feature width.
pub fn read_jsonl(data: &[u8]) -> Result<Vec<Record>, DatasetError> {
    let mut records = Vec::new();
    let mut dim = None;
    for line in data.split(|&b| b == b'\n') {
        if line.is_empty() {
            continue;
        }
        let record: Record = serde_json::from_slice(line)
            .map_err(|e| DatasetError::PayloadParse(e.to_string()))?;
        match dim {
            None => dim = Some(record.dim()),
            Some(d) if d != record.dim() => {
                return Err(DatasetError::SchemaMismatch {
                    expected: d,
                    got: record.dim(),
                })
            }
            _ => {}
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(records)
}
