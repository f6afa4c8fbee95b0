//! Hashing, hiding commitments, Merkle evidence, and the Fiat-Shamir
//! transcript that derives every challenge in the pipeline.
//!
//! All hashing is tagged SHA-256. The domain tags keep leaf hashes,
//! internal nodes, value commitments, transcript states, and stage
//! records in disjoint input domains:
//!
//! | tag  | domain            |
//! |------|-------------------|
//! | 0x00 | Merkle leaf       |
//! | 0x01 | Merkle inner node |
//! | 0x02 | value commitment  |
//! | 0x03 | transcript        |
//! | 0x04 | stage record      |

mod merkle;
mod transcript;

pub use merkle::{
    MerkleError, MerklePath, MerkleTree, NeighborProof, NonMembershipProof, Side, SortedMerkleTree,
};
pub use transcript::{HashStream, Transcript, TranscriptError};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

/// A 32-byte SHA-256 output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest([u8; 32]);

impl Digest {
    pub const LEN: usize = 32;

    pub fn new(bytes: [u8; 32]) -> Self {
        Digest(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, hex::FromHexError> {
        let v = hex::decode(s)?;
        let bytes: [u8; 32] = v
            .try_into()
            .map_err(|_| hex::FromHexError::InvalidStringLength)?;
        Ok(Digest(bytes))
    }

    pub const fn zero() -> Self {
        Digest([0u8; 32])
    }
}

impl std::fmt::Display for Digest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Digest::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Domain separation tags for every hash in the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum DomainTag {
    Leaf = 0x00,
    Node = 0x01,
    Value = 0x02,
    Transcript = 0x03,
    StageRecord = 0x04,
}

/// SHA-256 over the concatenation of `parts`.
pub fn sha256(parts: &[&[u8]]) -> Digest {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    Digest(hasher.finalize().into())
}

/// SHA-256 with a leading domain tag byte.
pub fn tagged_hash(tag: DomainTag, parts: &[&[u8]]) -> Digest {
    let mut hasher = Sha256::new();
    hasher.update([tag as u8]);
    for part in parts {
        hasher.update(part);
    }
    Digest(hasher.finalize().into())
}

/// 32 bytes of commitment randomness.
pub type Blinding = [u8; 32];

/// A hiding, binding commitment digest. The opening (blinding and payload)
/// stays with the committer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Commitment {
    pub digest: Digest,
}

/// digest = SHA-256(tag || blinding || payload).
pub fn commit(tag: DomainTag, blinding: &Blinding, payload: &[u8]) -> Commitment {
    Commitment {
        digest: tagged_hash(tag, &[blinding, payload]),
    }
}

/// Recomputes the digest from an opening and compares bit-exactly.
pub fn verify_opening(
    commitment: &Commitment,
    tag: DomainTag,
    blinding: &Blinding,
    payload: &[u8],
) -> bool {
    commit(tag, blinding, payload) == *commitment
}

/// Deterministic secret material for a pipeline run. Every blinding is
/// derived from one master seed so a run can be reproduced bit-exactly,
/// and so later commands can re-derive earlier commitments without
/// storing per-leaf randomness.
#[derive(Debug, Clone)]
pub struct Secrets {
    master: [u8; 32],
}

impl Secrets {
    pub fn new(master: [u8; 32]) -> Self {
        Secrets { master }
    }

    pub fn from_os_rng() -> Self {
        use rand::RngCore;
        let mut master = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut master);
        Secrets { master }
    }

    pub fn master(&self) -> &[u8; 32] {
        &self.master
    }

    /// Blinding for position `index` within a named domain.
    pub fn blinding(&self, domain: &str, index: u64) -> Blinding {
        let d = sha256(&[
            &self.master,
            &(domain.len() as u32).to_le_bytes(),
            domain.as_bytes(),
            &index.to_le_bytes(),
        ]);
        *d.as_bytes()
    }
}
