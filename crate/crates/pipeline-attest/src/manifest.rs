//! Provenance manifests for raw assets.
//!
//! A manifest hard-binds an asset by hash, carries consent assertions
//! (`data_mining`, `ai_inference`, `ai_training`), lists ingredient
//! manifests by digest, and is Ed25519-signed over canonical claim
//! bytes. Corpus verification filters a set of raw assets through
//! manifest checks and an assertion policy, then commits the accepted
//! set as a Merkle root of blinded leaves.
//!
//! Trust is a flat set of public keys; verification failures are report
//! entries, never exceptions, so a partially bad corpus still yields a
//! usable accept/reject partition.

use crate::canonical::to_canonical_json;
use crate::commit::{sha256, Blinding, Digest, MerkleTree, Secrets};
use crate::dataset::{corpus_leaf, CommittedCorpus, Record};
use ed25519_dalek::{Signature, Signer, SigningKey, VerifyingKey};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Ingredient graphs are walked at most this deep before the check
/// reports `depth_exceeded`.
pub const MAX_INGREDIENT_DEPTH: usize = 8;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("no assets passed corpus verification")]
    EmptyAcceptedSet,
    #[error("malformed key material: {0}")]
    BadKey(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Consent assertion names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertionFlag {
    DataMining,
    AiInference,
    AiTraining,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertionValue {
    Allow,
    Deny,
}

pub type Assertions = BTreeMap<AssertionFlag, AssertionValue>;

/// Hex-encoded 32-byte public key in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PublicKeyBytes(pub [u8; 32]);

impl Serialize for PublicKeyBytes {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.0))
    }
}

impl<'de> Deserialize<'de> for PublicKeyBytes {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let v = hex::decode(&s).map_err(serde::de::Error::custom)?;
        let bytes: [u8; 32] = v
            .try_into()
            .map_err(|_| serde::de::Error::custom("expected 32 bytes"))?;
        Ok(PublicKeyBytes(bytes))
    }
}

/// Hex-encoded 64-byte signature in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignatureBytes(pub [u8; 64]);

impl Serialize for SignatureBytes {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.0))
    }
}

impl<'de> Deserialize<'de> for SignatureBytes {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let v = hex::decode(&s).map_err(serde::de::Error::custom)?;
        let bytes: [u8; 64] = v
            .try_into()
            .map_err(|_| serde::de::Error::custom("expected 64 bytes"))?;
        Ok(SignatureBytes(bytes))
    }
}

/// A provenance manifest: asset hard binding, assertions, ingredients,
/// and a signature over the canonical claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub asset_id: String,
    pub asset_hash: Digest,
    pub assertions: Assertions,
    pub ingredients: Vec<Digest>,
    pub signer_public_key: PublicKeyBytes,
    pub signature: SignatureBytes,
}

/// The signed portion of a manifest.
#[derive(Serialize)]
struct Claim<'a> {
    asset_id: &'a str,
    asset_hash: &'a Digest,
    assertions: &'a Assertions,
    ingredients: &'a [Digest],
    signer_public_key: &'a PublicKeyBytes,
}

impl Manifest {
    /// Canonical claim bytes: the manifest minus its signature, as
    /// canonical JSON.
    pub fn claim_bytes(&self) -> Vec<u8> {
        to_canonical_json(&Claim {
            asset_id: &self.asset_id,
            asset_hash: &self.asset_hash,
            assertions: &self.assertions,
            ingredients: &self.ingredients,
            signer_public_key: &self.signer_public_key,
        })
    }

    /// Canonical JSON of the full manifest (what manifest files contain).
    pub fn canonical_bytes(&self) -> Vec<u8> {
        to_canonical_json(self)
    }

    /// Identifies this manifest as an ingredient of another.
    pub fn digest(&self) -> Digest {
        sha256(&[&self.canonical_bytes()])
    }
}

/// Signs a manifest over an asset payload.
pub fn manifest_sign(
    asset_id: &str,
    payload: &[u8],
    assertions: Assertions,
    ingredients: Vec<Digest>,
    signing_key: &SigningKey,
) -> Manifest {
    let mut manifest = Manifest {
        asset_id: asset_id.to_string(),
        asset_hash: sha256(&[payload]),
        assertions,
        ingredients,
        signer_public_key: PublicKeyBytes(signing_key.verifying_key().to_bytes()),
        signature: SignatureBytes([0u8; 64]),
    };
    let sig = signing_key.sign(&manifest.claim_bytes());
    manifest.signature = SignatureBytes(sig.to_bytes());
    manifest
}

/// One named pass/fail entry in a verification report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Per-manifest verification outcome. Failures are entries, not errors.
#[derive(Debug, Clone, Serialize, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn push(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Trusted signer public keys (flat set; file form is one hex key per line).
#[derive(Debug, Clone, Default)]
pub struct TrustedKeys {
    keys: BTreeSet<[u8; 32]>,
}

impl TrustedKeys {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: [u8; 32]) {
        self.keys.insert(key);
    }

    pub fn contains(&self, key: &[u8; 32]) -> bool {
        self.keys.contains(key)
    }

    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let mut keys = BTreeSet::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v = hex::decode(line).map_err(|e| ManifestError::BadKey(e.to_string()))?;
            let bytes: [u8; 32] = v
                .try_into()
                .map_err(|_| ManifestError::BadKey("expected 32 bytes".into()))?;
            keys.insert(bytes);
        }
        Ok(TrustedKeys { keys })
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for key in &self.keys {
            out.push_str(&hex::encode(key));
            out.push('\n');
        }
        out
    }
}

/// Resolves ingredient digests to their manifests during recursive checks.
#[derive(Debug, Clone, Default)]
pub struct ManifestStore {
    by_digest: BTreeMap<Digest, Manifest>,
}

impl ManifestStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, manifest: Manifest) {
        self.by_digest.insert(manifest.digest(), manifest);
    }

    pub fn get(&self, digest: &Digest) -> Option<&Manifest> {
        self.by_digest.get(digest)
    }
}

fn signature_valid(manifest: &Manifest) -> bool {
    let Ok(vk) = VerifyingKey::from_bytes(&manifest.signer_public_key.0) else {
        return false;
    };
    let sig = Signature::from_bytes(&manifest.signature.0);
    vk.verify_strict(&manifest.claim_bytes(), &sig).is_ok()
}

fn check_ingredients(
    manifest: &Manifest,
    trusted: &TrustedKeys,
    store: &ManifestStore,
    depth: usize,
    report: &mut VerificationReport,
) {
    if depth > MAX_INGREDIENT_DEPTH {
        report.push(
            "ingredients",
            false,
            format!("depth_exceeded at {depth} for {}", manifest.asset_id),
        );
        return;
    }
    for digest in &manifest.ingredients {
        match store.get(digest) {
            None => {
                report.push(
                    "ingredients",
                    false,
                    format!("unresolved ingredient {digest}"),
                );
            }
            Some(ingredient) => {
                if !signature_valid(ingredient) {
                    report.push(
                        "ingredients",
                        false,
                        format!("ingredient {} signature invalid", ingredient.asset_id),
                    );
                } else if !trusted.contains(&ingredient.signer_public_key.0) {
                    report.push(
                        "ingredients",
                        false,
                        format!("ingredient {} signer untrusted", ingredient.asset_id),
                    );
                } else {
                    check_ingredients(ingredient, trusted, store, depth + 1, report);
                }
            }
        }
    }
}

/// Verifies a manifest against an asset payload: hash binding, signature,
/// signer trust, and recursive ingredient validity.
pub fn manifest_verify(
    payload: &[u8],
    manifest: &Manifest,
    trusted: &TrustedKeys,
    store: &ManifestStore,
) -> VerificationReport {
    let mut report = VerificationReport::default();

    let actual = sha256(&[payload]);
    report.push(
        "hash_binding",
        actual == manifest.asset_hash,
        format!("asset hash {actual}"),
    );

    let sig_ok = signature_valid(manifest);
    report.push("signature", sig_ok, "ed25519 over canonical claim bytes");

    report.push(
        "signer_trust",
        trusted.contains(&manifest.signer_public_key.0),
        hex::encode(manifest.signer_public_key.0),
    );

    if manifest.ingredients.is_empty() {
        report.push("ingredients", true, "no ingredients");
    } else {
        let before = report.checks.len();
        check_ingredients(manifest, trusted, store, 1, &mut report);
        if report.checks.len() == before {
            report.push(
                "ingredients",
                true,
                format!("{} ingredient(s) valid", manifest.ingredients.len()),
            );
        }
    }

    report
}

/// Required assertion values for corpus admission.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Policy {
    pub required: BTreeMap<AssertionFlag, AssertionValue>,
}

impl Policy {
    /// Admits only assets explicitly allowing AI training.
    pub fn training_allowed() -> Self {
        let mut required = BTreeMap::new();
        required.insert(AssertionFlag::AiTraining, AssertionValue::Allow);
        Policy { required }
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        to_canonical_json(self)
    }

    pub fn hash(&self) -> Digest {
        sha256(&[&self.canonical_bytes()])
    }

    fn satisfied_by(&self, assertions: &Assertions) -> bool {
        self.required
            .iter()
            .all(|(flag, value)| assertions.get(flag) == Some(value))
    }
}

/// A raw asset: opaque payload bytes plus the manifest binding them.
#[derive(Debug, Clone)]
pub struct RawAsset {
    pub payload: Vec<u8>,
    pub manifest: Manifest,
}

/// An asset rejected by corpus verification, with the first failing check.
#[derive(Debug, Clone, Serialize)]
pub struct Rejection {
    pub asset_id: String,
    pub reason: String,
}

/// Outcome of corpus verification: the accepted, committed subset plus
/// the rejection list.
#[derive(Debug)]
pub struct CorpusOutcome {
    pub corpus: CommittedCorpus,
    pub accepted_manifests: Vec<Manifest>,
    pub rejections: Vec<Rejection>,
}

/// Filters assets through manifest verification and the assertion policy,
/// then commits the accepted set in input order. Blindings come from the
/// `corpus` secrets domain, keyed by accepted position.
pub fn corpus_verify(
    assets: &[RawAsset],
    policy: &Policy,
    trusted: &TrustedKeys,
    secrets: &Secrets,
) -> Result<CorpusOutcome, ManifestError> {
    let mut store = ManifestStore::new();
    for asset in assets {
        store.insert(asset.manifest.clone());
    }

    let mut records: Vec<Record> = Vec::new();
    let mut blindings: Vec<Blinding> = Vec::new();
    let mut asset_hashes = Vec::new();
    let mut leaves = Vec::new();
    let mut accepted_manifests = Vec::new();
    let mut rejections = Vec::new();

    for asset in assets {
        let report = manifest_verify(&asset.payload, &asset.manifest, trusted, &store);
        if let Some(check) = report.first_failure() {
            rejections.push(Rejection {
                asset_id: asset.manifest.asset_id.clone(),
                reason: check.name.clone(),
            });
            continue;
        }
        if !policy.satisfied_by(&asset.manifest.assertions) {
            rejections.push(Rejection {
                asset_id: asset.manifest.asset_id.clone(),
                reason: "assertion_policy".into(),
            });
            continue;
        }
        let record = match Record::from_payload(&asset.payload, asset.manifest.asset_hash) {
            Ok(r) => r,
            Err(_) => {
                rejections.push(Rejection {
                    asset_id: asset.manifest.asset_id.clone(),
                    reason: "payload_parse".into(),
                });
                continue;
            }
        };
        // the first accepted record fixes the schema width
        if let Some(first) = records.first() {
            if record.dim() != first.dim() {
                rejections.push(Rejection {
                    asset_id: asset.manifest.asset_id.clone(),
                    reason: "schema_mismatch".into(),
                });
                continue;
            }
        }
        let index = records.len() as u64;
        let blinding = secrets.blinding("corpus", index);
        leaves.push(corpus_leaf(&blinding, &asset.manifest.asset_hash, &record));
        records.push(record);
        blindings.push(blinding);
        asset_hashes.push(asset.manifest.asset_hash);
        accepted_manifests.push(asset.manifest.clone());
    }

    if records.is_empty() {
        return Err(ManifestError::EmptyAcceptedSet);
    }

    let tree = MerkleTree::from_leaf_digests(leaves)
        .map_err(|_| ManifestError::EmptyAcceptedSet)?;

    Ok(CorpusOutcome {
        corpus: CommittedCorpus {
            records,
            blindings,
            asset_hashes,
            tree,
        },
        accepted_manifests,
        rejections,
    })
}
