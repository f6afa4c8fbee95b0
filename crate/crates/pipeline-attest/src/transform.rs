//! Verifiable transformation of a committed corpus into a committed
//! training dataset.
//!
//! A transform spec is an ordered list of deterministic operations:
//! affine-threshold filters, per-feature normalization with public
//! statistics, precision coarsening, and a seeded shuffle-split. Applying
//! a spec is a pure function of (records, spec); the output is committed
//! as a sorted-leaf tree so that later deletions can be proven by
//! non-membership.
//!
//! The proof opens a transcript-chosen sample of output rows together
//! with their claimed source rows in the input tree; the verifier
//! re-executes the per-row portion of the spec on each opened pair and
//! demands bit-exact agreement. A single forged output row therefore
//! escapes detection only if it avoids every challenge, i.e. with
//! probability (n - c) / n.

use crate::canonical::to_canonical_json;
use crate::codec::{CodecError, Reader, Writer};
use crate::commit::{
    sha256, Blinding, Digest, HashStream, MerklePath, Secrets, SortedMerkleTree, Transcript,
};
use crate::dataset::{record_leaf, CommittedCorpus, CommittedDataset, Record};
use crate::field::{dot, FieldError, FixedPoint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("transform produced no output rows")]
    EmptyOutput,
    #[error("challenge count {count} exceeds output rows {rows}")]
    ChallengeCountExceedsRows { count: usize, rows: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Merkle(#[from] crate::commit::MerkleError),
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}

/// Comparison direction for filter predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterOp {
    /// keep rows where the affine form is >= 0
    Ge,
    /// keep rows where the affine form is < 0
    Lt,
}

/// An affine threshold over features and label:
/// `sum_j weights[j] * x_j + label_weight * y + offset  <op>  0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterPredicate {
    pub weights: Vec<FixedPoint>,
    pub label_weight: FixedPoint,
    pub offset: FixedPoint,
    pub op: FilterOp,
}

impl FilterPredicate {
    /// Keep rows whose label is >= 0.
    pub fn label_nonnegative(dim: usize) -> Self {
        FilterPredicate {
            weights: vec![FixedPoint::ZERO; dim],
            label_weight: FixedPoint::one(),
            offset: FixedPoint::ZERO,
            op: FilterOp::Ge,
        }
    }

    pub fn eval(&self, record: &Record) -> Result<bool, TransformError> {
        if self.weights.len() != record.dim() {
            return Err(TransformError::SchemaMismatch(format!(
                "predicate width {} vs record width {}",
                self.weights.len(),
                record.dim()
            )));
        }
        let mut acc = dot(&self.weights, &record.features)?;
        acc = acc.add(self.label_weight.mul_rescale(record.label)?);
        acc = acc.add(self.offset);
        let nonneg = acc.scaled() >= 0;
        Ok(match self.op {
            FilterOp::Ge => nonneg,
            FilterOp::Lt => !nonneg,
        })
    }
}

/// One step of a transform pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TransformOp {
    Filter {
        predicate: FilterPredicate,
    },
    /// x'_j = (x_j - mean[j]) * inv_std[j], with public statistics.
    Normalize {
        mean: Vec<FixedPoint>,
        inv_std: Vec<FixedPoint>,
    },
    /// Coarsens each feature to `keep_bits` fractional bits by flooring.
    Quantize {
        keep_bits: u8,
    },
    /// Seeded Fisher-Yates shuffle, then keep the first
    /// floor(n * train_num / train_den) rows in shuffled order.
    Split {
        train_num: u32,
        train_den: u32,
        seed: u64,
    },
}

/// An ordered, deterministic transform pipeline. The canonical JSON hash
/// identifies it everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TransformSpec {
    pub ops: Vec<TransformOp>,
}

impl TransformSpec {
    pub fn identity() -> Self {
        TransformSpec { ops: vec![] }
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        to_canonical_json(self)
    }

    pub fn hash(&self) -> Digest {
        sha256(&[&self.canonical_bytes()])
    }

    /// The per-row part of the pipeline: every op except selection.
    /// Returns `None` when a filter drops the row. This is what the
    /// verifier re-executes on challenged rows.
    pub fn apply_row(&self, record: &Record) -> Result<Option<Record>, TransformError> {
        let mut current = record.clone();
        for op in &self.ops {
            match op {
                TransformOp::Filter { predicate } => {
                    if !predicate.eval(&current)? {
                        return Ok(None);
                    }
                }
                TransformOp::Normalize { mean, inv_std } => {
                    if mean.len() != current.dim() || inv_std.len() != current.dim() {
                        return Err(TransformError::SchemaMismatch(format!(
                            "normalize width {} vs record width {}",
                            mean.len(),
                            current.dim()
                        )));
                    }
                    for (j, feature) in current.features.iter_mut().enumerate() {
                        *feature = feature.sub(mean[j]).mul_rescale(inv_std[j])?;
                    }
                }
                TransformOp::Quantize { keep_bits } => {
                    let keep = (*keep_bits).min(16) as u32;
                    let drop = 16 - keep;
                    if drop > 0 {
                        let unit = 1i128 << drop;
                        for feature in current.features.iter_mut() {
                            let s = feature.scaled().div_euclid(unit) * unit;
                            *feature = FixedPoint::from_raw(
                                crate::field::FieldElement::from_centered(s),
                            );
                        }
                    }
                }
                TransformOp::Split { .. } => {}
            }
        }
        Ok(Some(current))
    }
}

/// Prover-side result of applying a spec: the committed output dataset
/// plus, for every sorted output leaf, the input row it came from.
#[derive(Debug, Clone)]
pub struct TransformOutput {
    pub dataset: CommittedDataset,
    /// `source_rows[i]` is the input-tree index behind sorted leaf `i`.
    pub source_rows: Vec<u32>,
}

impl TransformOutput {
    pub fn root(&self) -> Digest {
        self.dataset.root()
    }
}

/// Applies the spec to the corpus records and commits the result.
/// Output blindings come from the `transform` secrets domain keyed by
/// pipeline position, so a re-run with the same secrets is bit-identical.
pub fn transform_apply(
    input: &[Record],
    spec: &TransformSpec,
    secrets: &Secrets,
) -> Result<TransformOutput, TransformError> {
    if input.is_empty() {
        return Err(TransformError::EmptyOutput);
    }
    let dim = input[0].dim();
    if input.iter().any(|r| r.dim() != dim) {
        return Err(TransformError::SchemaMismatch(
            "input rows have differing widths".into(),
        ));
    }

    // Selection ops act on the whole list; row ops act per record.
    let mut rows: Vec<(u32, Record)> = input
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, r)| (i as u32, r))
        .collect();

    for op in &spec.ops {
        match op {
            TransformOp::Filter { predicate } => {
                let mut kept = Vec::with_capacity(rows.len());
                for (idx, record) in rows {
                    if predicate.eval(&record)? {
                        kept.push((idx, record));
                    }
                }
                rows = kept;
            }
            TransformOp::Normalize { .. } | TransformOp::Quantize { .. } => {
                // handled uniformly below through apply_row; skip here
            }
            TransformOp::Split {
                train_num,
                train_den,
                seed,
            } => {
                let mut stream = HashStream::new(seed.to_le_bytes().to_vec());
                let perm = stream.permutation(rows.len());
                let take = (rows.len() as u64 * *train_num as u64 / (*train_den).max(1) as u64)
                    as usize;
                let mut selected = Vec::with_capacity(take);
                for &p in perm.iter().take(take) {
                    selected.push(rows[p as usize].clone());
                }
                rows = selected;
            }
        }
    }

    // Row ops must match apply_row bit-exactly, so run apply_row itself on
    // the original input record of every surviving row.
    let mut output: Vec<(u32, Record)> = Vec::with_capacity(rows.len());
    for (idx, _) in &rows {
        let source = &input[*idx as usize];
        match spec.apply_row(source)? {
            Some(record) => output.push((*idx, record)),
            None => unreachable!("row survived selection but fails its own filter"),
        }
    }

    if output.is_empty() {
        return Err(TransformError::EmptyOutput);
    }

    // Blind by pipeline position, then sort by leaf digest.
    let mut entries: Vec<(Digest, Record, Blinding, u32)> = output
        .into_iter()
        .enumerate()
        .map(|(k, (idx, record))| {
            let blinding = secrets.blinding("transform", k as u64);
            (record_leaf(&blinding, &record), record, blinding, idx)
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries.dedup_by(|a, b| a.0 == b.0);

    let leaves: Vec<Digest> = entries.iter().map(|e| e.0).collect();
    let tree = SortedMerkleTree::from_leaf_digests(leaves)?;
    let mut records = Vec::with_capacity(entries.len());
    let mut blindings = Vec::with_capacity(entries.len());
    let mut source_rows = Vec::with_capacity(entries.len());
    for (_, record, blinding, idx) in entries {
        records.push(record);
        blindings.push(blinding);
        source_rows.push(idx);
    }

    Ok(TransformOutput {
        dataset: CommittedDataset {
            records,
            blindings,
            tree,
        },
        source_rows,
    })
}

/// One challenged output row with its opened provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowChallenge {
    pub output_index: u32,
    pub output_blinding: Blinding,
    pub output_record: Vec<u8>,
    pub output_path: MerklePath,
    pub input_index: u32,
    pub input_blinding: Blinding,
    pub input_asset_hash: Digest,
    pub input_record: Vec<u8>,
    pub input_path: MerklePath,
}

/// Spot-check evidence that a committed output dataset is the spec image
/// of a committed input corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformProof {
    pub input_root: Digest,
    pub output_root: Digest,
    pub spec_hash: Digest,
    pub input_rows: u32,
    pub output_rows: u32,
    pub challenges: Vec<RowChallenge>,
}

fn challenge_transcript(input_root: &Digest, output_root: &Digest, spec_hash: &Digest) -> Transcript {
    let mut t = Transcript::new("transform");
    t.absorb_digest("input_root", input_root);
    t.absorb_digest("output_root", output_root);
    t.absorb_digest("spec_hash", spec_hash);
    t
}

/// Builds the proof by opening `count` transcript-chosen output rows.
pub fn transform_prove(
    corpus: &CommittedCorpus,
    output: &TransformOutput,
    spec: &TransformSpec,
    count: usize,
) -> Result<TransformProof, TransformError> {
    let n_out = output.dataset.len();
    if count > n_out {
        return Err(TransformError::ChallengeCountExceedsRows {
            count,
            rows: n_out,
        });
    }
    let input_root = corpus.root();
    let output_root = output.root();
    let spec_hash = spec.hash();
    let mut transcript = challenge_transcript(&input_root, &output_root, &spec_hash);
    let indices = transcript
        .challenge_indices(count, n_out)
        .expect("count <= rows checked above");

    let mut challenges = Vec::with_capacity(count);
    for &out_idx in &indices {
        let i = out_idx as usize;
        let in_idx = output.source_rows[i] as usize;
        challenges.push(RowChallenge {
            output_index: out_idx,
            output_blinding: output.dataset.blindings[i],
            output_record: output.dataset.records[i].canonical_bytes(),
            output_path: output.dataset.tree.prove(i)?,
            input_index: in_idx as u32,
            input_blinding: corpus.blindings[in_idx],
            input_asset_hash: corpus.asset_hashes[in_idx],
            input_record: corpus.records[in_idx].canonical_bytes(),
            input_path: corpus.tree.prove(in_idx)?,
        });
    }

    Ok(TransformProof {
        input_root,
        output_root,
        spec_hash,
        input_rows: corpus.len() as u32,
        output_rows: n_out as u32,
        challenges,
    })
}

/// Checks a transform proof against public roots and the spec. True iff
/// the challenge set matches the transcript, every opening verifies
/// against its root, and re-applying the spec's row pipeline to each
/// opened input reproduces the opened output bit-exactly.
pub fn transform_verify(
    input_root: &Digest,
    input_rows: usize,
    output_root: &Digest,
    output_rows: usize,
    spec: &TransformSpec,
    proof: &TransformProof,
) -> bool {
    if proof.input_root != *input_root
        || proof.output_root != *output_root
        || proof.spec_hash != spec.hash()
        || proof.input_rows as usize != input_rows
        || proof.output_rows as usize != output_rows
    {
        return false;
    }
    let mut transcript = challenge_transcript(input_root, output_root, &proof.spec_hash);
    let Ok(indices) = transcript.challenge_indices(proof.challenges.len(), output_rows) else {
        return false;
    };
    if indices.len() != proof.challenges.len() {
        return false;
    }

    for (expected_idx, challenge) in indices.iter().zip(&proof.challenges) {
        if challenge.output_index != *expected_idx {
            return false;
        }
        // Openings against both roots.
        let out_leaf = crate::commit::tagged_hash(
            crate::commit::DomainTag::Leaf,
            &[&challenge.output_blinding, &challenge.output_record],
        );
        if challenge.output_path.leaf_index != challenge.output_index
            || !challenge
                .output_path
                .verify(output_root, output_rows, &out_leaf)
        {
            return false;
        }
        let in_leaf = crate::commit::tagged_hash(
            crate::commit::DomainTag::Leaf,
            &[
                &challenge.input_blinding,
                challenge.input_asset_hash.as_bytes(),
                &challenge.input_record,
            ],
        );
        if challenge.input_path.leaf_index != challenge.input_index
            || !challenge.input_path.verify(input_root, input_rows, &in_leaf)
        {
            return false;
        }
        // Row re-execution must reproduce the output record exactly; a row
        // that the spec filters out can never be a valid output.
        let Ok(input_record) = serde_json::from_slice::<Record>(&challenge.input_record) else {
            return false;
        };
        match spec.apply_row(&input_record) {
            Ok(Some(expected)) => {
                if expected.canonical_bytes() != challenge.output_record {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

impl TransformProof {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_digest(&self.input_root);
        w.put_digest(&self.output_root);
        w.put_digest(&self.spec_hash);
        w.put_u32(self.input_rows);
        w.put_u32(self.output_rows);
        w.put_u32(self.challenges.len() as u32);
        for c in &self.challenges {
            w.put_u32(c.output_index);
            w.put_fixed_bytes(&c.output_blinding);
            w.put_bytes(&c.output_record);
            c.output_path.write(&mut w);
            w.put_u32(c.input_index);
            w.put_fixed_bytes(&c.input_blinding);
            w.put_digest(&c.input_asset_hash);
            w.put_bytes(&c.input_record);
            c.input_path.write(&mut w);
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let input_root = r.get_digest()?;
        let output_root = r.get_digest()?;
        let spec_hash = r.get_digest()?;
        let input_rows = r.get_u32()?;
        let output_rows = r.get_u32()?;
        let n = r.get_count()?;
        let mut challenges = Vec::with_capacity(n);
        for _ in 0..n {
            challenges.push(RowChallenge {
                output_index: r.get_u32()?,
                output_blinding: r.get_fixed_bytes()?,
                output_record: r.get_bytes()?,
                output_path: MerklePath::read(&mut r)?,
                input_index: r.get_u32()?,
                input_blinding: r.get_fixed_bytes()?,
                input_asset_hash: r.get_digest()?,
                input_record: r.get_bytes()?,
                input_path: MerklePath::read(&mut r)?,
            });
        }
        let proof = TransformProof {
            input_root,
            output_root,
            spec_hash,
            input_rows,
            output_rows,
            challenges,
        };
        r.finish()?;
        Ok(proof)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commit::MerkleTree;
    use crate::dataset::corpus_leaf;

    fn fp(x: f64) -> FixedPoint {
        FixedPoint::encode(x).unwrap()
    }

    fn record(features: &[f64], label: f64, tag: u8) -> Record {
        Record {
            features: features.iter().map(|&x| fp(x)).collect(),
            label: fp(label),
            source: sha256(&[&[tag]]),
        }
    }

    fn corpus_from(records: Vec<Record>, secrets: &Secrets) -> CommittedCorpus {
        let blindings: Vec<Blinding> = (0..records.len())
            .map(|i| secrets.blinding("corpus", i as u64))
            .collect();
        let asset_hashes: Vec<Digest> = records.iter().map(|r| r.source).collect();
        let leaves: Vec<Digest> = records
            .iter()
            .zip(&blindings)
            .zip(&asset_hashes)
            .map(|((r, b), h)| corpus_leaf(b, h, r))
            .collect();
        CommittedCorpus {
            records,
            blindings,
            asset_hashes,
            tree: MerkleTree::from_leaf_digests(leaves).unwrap(),
        }
    }

    fn sample_corpus(n: usize, secrets: &Secrets) -> CommittedCorpus {
        let records = (0..n)
            .map(|i| {
                record(
                    &[i as f64 * 0.25 - 1.0, 1.0 - i as f64 * 0.125],
                    (i % 2) as f64,
                    i as u8,
                )
            })
            .collect();
        corpus_from(records, secrets)
    }

    #[test]
    fn identity_spec_recommits_same_records() {
        let secrets = Secrets::new([1u8; 32]);
        let corpus = sample_corpus(4, &secrets);
        let out = transform_apply(&corpus.records, &TransformSpec::identity(), &secrets).unwrap();
        assert_eq!(out.dataset.len(), 4);
        let mut expected = corpus.records.clone();
        let mut got = out.dataset.records.clone();
        expected.sort_by_key(|r| r.canonical_bytes());
        got.sort_by_key(|r| r.canonical_bytes());
        assert_eq!(expected, got);
        // fresh blindings: root differs from the corpus root
        assert_ne!(out.root(), corpus.root());
    }

    #[test]
    fn filter_keeps_matching_labels() {
        let secrets = Secrets::new([2u8; 32]);
        let records = vec![
            record(&[0.0, 0.0], -1.0, 0),
            record(&[0.0, 0.0], 0.0, 1),
            record(&[0.0, 0.0], 2.0, 2),
        ];
        let spec = TransformSpec {
            ops: vec![TransformOp::Filter {
                predicate: FilterPredicate::label_nonnegative(2),
            }],
        };
        let out = transform_apply(&records, &spec, &secrets).unwrap();
        assert_eq!(out.dataset.len(), 2);
        assert!(out
            .dataset
            .records
            .iter()
            .all(|r| r.label.scaled() >= 0));
    }

    #[test]
    fn normalize_then_quantize_matches_integer_oracle() {
        let secrets = Secrets::new([3u8; 32]);
        // Fixed 4-row table with hand-computable values.
        let records = vec![
            record(&[1.0, 4.0], 0.0, 0),
            record(&[2.0, 8.0], 0.0, 1),
            record(&[3.0, 12.0], 1.0, 2),
            record(&[4.0, 16.0], 1.0, 3),
        ];
        let spec = TransformSpec {
            ops: vec![
                TransformOp::Normalize {
                    mean: vec![fp(2.5), fp(10.0)],
                    inv_std: vec![fp(0.5), fp(0.125)],
                },
                TransformOp::Quantize { keep_bits: 8 },
            ],
        };
        let out = transform_apply(&records, &spec, &secrets).unwrap();

        // Integer oracle, computed independently with i128 arithmetic:
        // normalized s' = floor((s - mean_s) * inv_s / 2^16), then floor to
        // a multiple of 2^8.
        let oracle = |s: i128, mean: i128, inv: i128| -> i128 {
            let normalized = ((s - mean) * inv).div_euclid(65536);
            normalized.div_euclid(256) * 256
        };
        for rec in &records {
            let expect0 = oracle(rec.features[0].scaled(), fp(2.5).scaled(), fp(0.5).scaled());
            let expect1 = oracle(rec.features[1].scaled(), fp(10.0).scaled(), fp(0.125).scaled());
            let transformed = spec.apply_row(rec).unwrap().unwrap();
            assert_eq!(transformed.features[0].scaled(), expect0);
            assert_eq!(transformed.features[1].scaled(), expect1);
            // the committed output contains exactly this record
            assert!(out.dataset.records.contains(&transformed));
        }
    }

    #[test]
    fn split_is_deterministic_and_sized() {
        let secrets = Secrets::new([4u8; 32]);
        let corpus = sample_corpus(10, &secrets);
        let spec = TransformSpec {
            ops: vec![TransformOp::Split {
                train_num: 7,
                train_den: 10,
                seed: 99,
            }],
        };
        let a = transform_apply(&corpus.records, &spec, &secrets).unwrap();
        let b = transform_apply(&corpus.records, &spec, &secrets).unwrap();
        assert_eq!(a.dataset.len(), 7);
        assert_eq!(a.root(), b.root());
    }

    #[test]
    fn apply_is_pure_function_of_inputs() {
        let secrets = Secrets::new([5u8; 32]);
        let corpus = sample_corpus(8, &secrets);
        let spec = TransformSpec {
            ops: vec![TransformOp::Normalize {
                mean: vec![fp(0.0), fp(0.0)],
                inv_std: vec![fp(1.0), fp(1.0)],
            }],
        };
        let a = transform_apply(&corpus.records, &spec, &secrets).unwrap();
        let b = transform_apply(&corpus.records, &spec, &secrets).unwrap();
        assert_eq!(a.root(), b.root());
        assert_eq!(a.source_rows, b.source_rows);
    }

    #[test]
    fn every_output_row_reproduces_from_its_source() {
        let secrets = Secrets::new([6u8; 32]);
        let corpus = sample_corpus(16, &secrets);
        let spec = TransformSpec {
            ops: vec![
                TransformOp::Filter {
                    predicate: FilterPredicate::label_nonnegative(2),
                },
                TransformOp::Normalize {
                    mean: vec![fp(0.5), fp(0.25)],
                    inv_std: vec![fp(2.0), fp(1.0)],
                },
            ],
        };
        let out = transform_apply(&corpus.records, &spec, &secrets).unwrap();
        for (i, rec) in out.dataset.records.iter().enumerate() {
            let source = &corpus.records[out.source_rows[i] as usize];
            let reproduced = spec.apply_row(source).unwrap().unwrap();
            assert_eq!(&reproduced, rec);
        }
    }

    #[test]
    fn proof_completeness_and_determinism() {
        let secrets = Secrets::new([7u8; 32]);
        let corpus = sample_corpus(16, &secrets);
        let spec = TransformSpec {
            ops: vec![TransformOp::Normalize {
                mean: vec![fp(0.0), fp(0.0)],
                inv_std: vec![fp(1.0), fp(1.0)],
            }],
        };
        let out = transform_apply(&corpus.records, &spec, &secrets).unwrap();

        let proof = transform_prove(&corpus, &out, &spec, 4).unwrap();
        assert!(transform_verify(
            &corpus.root(),
            corpus.len(),
            &out.root(),
            out.dataset.len(),
            &spec,
            &proof
        ));

        // full reveal also verifies
        let full = transform_prove(&corpus, &out, &spec, out.dataset.len()).unwrap();
        assert!(transform_verify(
            &corpus.root(),
            corpus.len(),
            &out.root(),
            out.dataset.len(),
            &spec,
            &full
        ));

        // byte-identical proofs for identical inputs
        let again = transform_prove(&corpus, &out, &spec, 4).unwrap();
        assert_eq!(proof.to_bytes(), again.to_bytes());

        // codec roundtrip
        let back = TransformProof::from_bytes(&proof.to_bytes()).unwrap();
        assert_eq!(proof, back);
    }

    #[test]
    fn tampered_challenged_row_rejected() {
        let secrets = Secrets::new([8u8; 32]);
        let corpus = sample_corpus(16, &secrets);
        let spec = TransformSpec::identity();
        let out = transform_apply(&corpus.records, &spec, &secrets).unwrap();
        let mut proof = transform_prove(&corpus, &out, &spec, 4).unwrap();

        // corrupt the opened output record of the first challenge
        let mut record: Record =
            serde_json::from_slice(&proof.challenges[0].output_record).unwrap();
        record.features[0] = record.features[0].add(FixedPoint::one());
        proof.challenges[0].output_record = record.canonical_bytes();

        assert!(!transform_verify(
            &corpus.root(),
            corpus.len(),
            &out.root(),
            out.dataset.len(),
            &spec,
            &proof
        ));
    }

    #[test]
    fn proof_bound_to_roots_and_spec() {
        let secrets = Secrets::new([9u8; 32]);
        let corpus = sample_corpus(8, &secrets);
        let spec = TransformSpec::identity();
        let out = transform_apply(&corpus.records, &spec, &secrets).unwrap();
        let proof = transform_prove(&corpus, &out, &spec, 2).unwrap();

        let other_spec = TransformSpec {
            ops: vec![TransformOp::Quantize { keep_bits: 8 }],
        };
        assert!(!transform_verify(
            &corpus.root(),
            corpus.len(),
            &out.root(),
            out.dataset.len(),
            &other_spec,
            &proof
        ));
        let wrong_root = sha256(&[b"nope"]);
        assert!(!transform_verify(
            &wrong_root,
            corpus.len(),
            &out.root(),
            out.dataset.len(),
            &spec,
            &proof
        ));
    }

    #[test]
    fn challenge_count_cannot_exceed_rows() {
        let secrets = Secrets::new([10u8; 32]);
        let corpus = sample_corpus(4, &secrets);
        let spec = TransformSpec::identity();
        let out = transform_apply(&corpus.records, &spec, &secrets).unwrap();
        assert!(matches!(
            transform_prove(&corpus, &out, &spec, 5),
            Err(TransformError::ChallengeCountExceedsRows { count: 5, rows: 4 })
        ));
    }

    #[test]
    fn schema_mismatch_detected() {
        let secrets = Secrets::new([11u8; 32]);
        let records = vec![record(&[1.0], 0.0, 0), record(&[1.0, 2.0], 0.0, 1)];
        assert!(matches!(
            transform_apply(&records, &TransformSpec::identity(), &secrets),
            Err(TransformError::SchemaMismatch(_))
        ));
        let spec = TransformSpec {
            ops: vec![TransformOp::Normalize {
                mean: vec![fp(0.0)],
                inv_std: vec![fp(1.0)],
            }],
        };
        let two_wide = vec![record(&[1.0, 2.0], 0.0, 0)];
        assert!(matches!(
            transform_apply(&two_wide, &spec, &secrets),
            Err(TransformError::SchemaMismatch(_))
        ));
    }

    #[test]
    fn empty_output_is_error() {
        let secrets = Secrets::new([12u8; 32]);
        let records = vec![record(&[0.0], -1.0, 0)];
        let spec = TransformSpec {
            ops: vec![TransformOp::Filter {
                predicate: FilterPredicate::label_nonnegative(1),
            }],
        };
        assert!(matches!(
            transform_apply(&records, &spec, &secrets),
            Err(TransformError::EmptyOutput)
        ));
    }
}
