//! Inference bound to a committed model, and verifiable evaluation on a
//! public benchmark.
//!
//! Inference runs the same forward pass as training (shared code path,
//! asserted by a cross-module test) and commits its input, output, and
//! intermediate values. Two verification modes exist in place of true
//! zero-knowledge inference:
//!
//! * **audit** — a trusted verifier receives full weight openings and
//!   recomputes the output bit-exactly; mirrors a regulator issuing a
//!   certificate after private verification.
//! * **spotcheck** — a public verifier sees `c` challenged coordinate
//!   openings of the weights and of the per-coordinate products
//!   `u_j = w_j * x_j`; the sum linking the products to the output is
//!   checked only when every coordinate is opened (`c = d`), and the
//!   verdict says whether it was.
//!
//! Evaluation predicts over an unblinded public benchmark tree, commits
//! each prediction, and reports exact accuracy counts (overall and for
//! one declared group column). Audit-mode verification recounts
//! everything from opened weights and demands exact equality.

use crate::canonical::to_canonical_json;
use crate::codec::{CodecError, Reader, Writer};
use crate::commit::{
    commit, tagged_hash, Blinding, Digest, DomainTag, MerklePath, MerkleTree, Secrets, Transcript,
};
use crate::dataset::Record;
use crate::field::{FieldElement, FieldError, FixedPoint};
use crate::train::{forward, sigmoid_cubic, ModelKind, ModelWeights};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Merkle(#[from] crate::commit::MerkleError),
    #[error(transparent)]
    Transcript(#[from] crate::commit::TranscriptError),
    #[error("group column {column} out of range for width {width}")]
    GroupColumnOutOfRange { column: usize, width: usize },
    #[error("benchmark is empty")]
    EmptyBenchmark,
}

/// The model's answer for one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferenceOutput {
    Regression(FixedPoint),
    /// Score and the thresholded class; score >= 1/2 maps to class 1.
    Class { label: bool, score: FixedPoint },
}

impl InferenceOutput {
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            InferenceOutput::Regression(v) => {
                w.put_u8(0);
                w.put_fixed(*v);
            }
            InferenceOutput::Class { label, score } => {
                w.put_u8(1);
                w.put_u8(*label as u8);
                w.put_fixed(*score);
            }
        }
        w.finish()
    }

    pub fn read(r: &mut Reader) -> Result<Self, CodecError> {
        Ok(match r.get_u8()? {
            0 => InferenceOutput::Regression(r.get_fixed()?),
            1 => InferenceOutput::Class {
                label: r.get_u8()? != 0,
                score: r.get_fixed()?,
            },
            _ => return Err(CodecError::Invalid("output tag")),
        })
    }
}

fn classify(score: FixedPoint) -> bool {
    // ties at exactly 1/2 resolve to class 1
    score.scaled() >= FixedPoint::encode(0.5).expect("constant").scaled()
}

fn features_bytes(features: &[FixedPoint]) -> Vec<u8> {
    let mut w = Writer::new();
    w.put_u32(features.len() as u32);
    for &f in features {
        w.put_fixed(f);
    }
    w.finish()
}

/// A committed inference: public commitments binding the input, the
/// intermediate values, and the output to a weights root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceRecord {
    pub weights_root: Digest,
    pub input: Vec<FixedPoint>,
    pub output: InferenceOutput,
    pub input_commitment: Digest,
    pub z_commitment: Digest,
    pub activated_commitment: Digest,
    pub output_commitment: Digest,
}

/// Prover-side secrets backing an [`InferenceRecord`].
#[derive(Debug, Clone)]
pub struct InferenceWitness {
    pub z: FixedPoint,
    pub activated: FixedPoint,
    /// Raw per-coordinate products w_j * x_j at scale 2^32.
    pub products: Vec<FieldElement>,
    pub input_blinding: Blinding,
    pub z_blinding: Blinding,
    pub activated_blinding: Blinding,
    pub output_blinding: Blinding,
    pub product_blindings: Vec<Blinding>,
}

/// Runs the model on an input and commits the result. Blindings come
/// from the `domain` secrets namespace.
pub fn infer(
    kind: ModelKind,
    weights: &ModelWeights,
    weights_root: Digest,
    input: &[FixedPoint],
    secrets: &Secrets,
    domain: &str,
) -> Result<(InferenceRecord, InferenceWitness), InferenceError> {
    let fwd = forward(kind, weights, input)?;
    let output = match kind {
        ModelKind::LinearRegression => InferenceOutput::Regression(fwd.activated),
        ModelKind::LogisticRegression => InferenceOutput::Class {
            label: classify(fwd.activated),
            score: fwd.activated,
        },
    };

    let mut products = Vec::with_capacity(weights.dim());
    for (w, x) in weights.w.iter().zip(input) {
        products.push(FieldElement::from_centered(w.scaled() * x.scaled()));
    }

    let input_blinding = secrets.blinding(&format!("{domain}/input"), 0);
    let z_blinding = secrets.blinding(&format!("{domain}/z"), 0);
    let activated_blinding = secrets.blinding(&format!("{domain}/activated"), 0);
    let output_blinding = secrets.blinding(&format!("{domain}/output"), 0);
    let product_blindings: Vec<Blinding> = (0..products.len())
        .map(|j| secrets.blinding(&format!("{domain}/product"), j as u64))
        .collect();

    let record = InferenceRecord {
        weights_root,
        input: input.to_vec(),
        output,
        input_commitment: commit(DomainTag::Value, &input_blinding, &features_bytes(input))
            .digest,
        z_commitment: commit(DomainTag::Value, &z_blinding, &fwd.z.raw().to_le_bytes()).digest,
        activated_commitment: commit(
            DomainTag::Value,
            &activated_blinding,
            &fwd.activated.raw().to_le_bytes(),
        )
        .digest,
        output_commitment: commit(DomainTag::Value, &output_blinding, &output.canonical_bytes())
            .digest,
    };
    let witness = InferenceWitness {
        z: fwd.z,
        activated: fwd.activated,
        products,
        input_blinding,
        z_blinding,
        activated_blinding,
        output_blinding,
        product_blindings,
    };
    Ok((record, witness))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMode {
    Audit,
    Spotcheck,
}

/// One challenged coordinate in spotcheck mode: the weight leaf opened
/// against the weights root, and the product opened against its
/// commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateOpening {
    pub index: u32,
    pub weight: FixedPoint,
    pub weight_blinding: Blinding,
    pub weight_path: MerklePath,
    pub product: FieldElement,
    pub product_blinding: Blinding,
}

/// Proof that a committed inference is consistent with the committed
/// model, in one of the two modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceProof {
    pub mode: InferenceMode,
    pub input_blinding: Blinding,
    pub output_blinding: Blinding,
    /// audit mode: every weight coordinate opened
    pub audit: Option<AuditWeights>,
    /// spotcheck mode: product commitments and challenged openings
    pub spotcheck: Option<SpotcheckData>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditWeights {
    pub weights: ModelWeights,
    pub weight_blindings: Vec<Blinding>,
    pub z_blinding: Blinding,
    pub activated_blinding: Blinding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpotcheckData {
    pub product_commitments: Vec<Digest>,
    pub challenged: Vec<CoordinateOpening>,
    /// Bias leaf opening; needed to link the product sum to z when every
    /// coordinate is challenged.
    pub bias: FixedPoint,
    pub bias_blinding: Blinding,
    pub bias_path: MerklePath,
    pub z: FixedPoint,
    pub z_blinding: Blinding,
}

fn spotcheck_indices(
    record: &InferenceRecord,
    count: usize,
    width: usize,
) -> Result<Vec<u32>, crate::commit::TranscriptError> {
    let mut t = Transcript::new("inference");
    t.absorb_digest("weights_root", &record.weights_root);
    t.absorb_digest("input_commitment", &record.input_commitment);
    t.absorb_digest("output_commitment", &record.output_commitment);
    t.challenge_indices(count, width)
}

/// Builds an inference proof. `weights_tree` and `weight_blindings` must
/// be the committed model behind `record.weights_root`.
pub fn prove_inference(
    record: &InferenceRecord,
    witness: &InferenceWitness,
    weights: &ModelWeights,
    weights_tree: &MerkleTree,
    weight_blindings: &[Blinding],
    mode: InferenceMode,
    count: usize,
) -> Result<InferenceProof, InferenceError> {
    let d = weights.dim();
    let proof = match mode {
        InferenceMode::Audit => InferenceProof {
            mode,
            input_blinding: witness.input_blinding,
            output_blinding: witness.output_blinding,
            audit: Some(AuditWeights {
                weights: weights.clone(),
                weight_blindings: weight_blindings.to_vec(),
                z_blinding: witness.z_blinding,
                activated_blinding: witness.activated_blinding,
            }),
            spotcheck: None,
        },
        InferenceMode::Spotcheck => {
            let indices = spotcheck_indices(record, count, d)?;
            let product_commitments: Vec<Digest> = witness
                .products
                .iter()
                .zip(&witness.product_blindings)
                .map(|(p, b)| commit(DomainTag::Value, b, &p.to_le_bytes()).digest)
                .collect();
            let challenged = indices
                .iter()
                .map(|&j| {
                    let idx = j as usize;
                    Ok(CoordinateOpening {
                        index: j,
                        weight: weights.w[idx],
                        weight_blinding: weight_blindings[idx],
                        weight_path: weights_tree.prove(idx)?,
                        product: witness.products[idx],
                        product_blinding: witness.product_blindings[idx],
                    })
                })
                .collect::<Result<Vec<_>, crate::commit::MerkleError>>()?;
            InferenceProof {
                mode,
                input_blinding: witness.input_blinding,
                output_blinding: witness.output_blinding,
                audit: None,
                spotcheck: Some(SpotcheckData {
                    product_commitments,
                    challenged,
                    bias: weights.bias,
                    bias_blinding: weight_blindings[d],
                    bias_path: weights_tree.prove(d)?,
                    z: witness.z,
                    z_blinding: witness.z_blinding,
                }),
            }
        }
    };
    Ok(proof)
}

/// Verification verdict: `sum_checked` reports whether the link from
/// per-coordinate products to the committed output was actually checked
/// (it is in audit mode and in spotcheck with every coordinate opened).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InferenceVerdict {
    pub pass: bool,
    pub sum_checked: bool,
}

fn fail() -> InferenceVerdict {
    InferenceVerdict {
        pass: false,
        sum_checked: false,
    }
}

/// Verifies an inference proof against the public record. The verifier
/// supplies the model kind (public algorithm) and knows the input from
/// the record itself.
pub fn verify_inference(
    kind: ModelKind,
    record: &InferenceRecord,
    proof: &InferenceProof,
) -> InferenceVerdict {
    // The input and output openings bind the record's public values.
    let input_ok = commit(
        DomainTag::Value,
        &proof.input_blinding,
        &features_bytes(&record.input),
    )
    .digest
        == record.input_commitment;
    let output_ok = commit(
        DomainTag::Value,
        &proof.output_blinding,
        &record.output.canonical_bytes(),
    )
    .digest
        == record.output_commitment;
    if !input_ok || !output_ok {
        return fail();
    }

    match proof.mode {
        InferenceMode::Audit => {
            let Some(audit) = &proof.audit else { return fail() };
            let d = audit.weights.dim();
            if record.input.len() != d || audit.weight_blindings.len() != d + 1 {
                return fail();
            }
            // Full weight opening must rebuild the committed root.
            if audit.weights.commit_tree(&audit.weight_blindings).root() != record.weights_root {
                return fail();
            }
            // Recompute the forward pass bit-exactly.
            let Ok(fwd) = forward(kind, &audit.weights, &record.input) else {
                return fail();
            };
            let z_ok = commit(DomainTag::Value, &audit.z_blinding, &fwd.z.raw().to_le_bytes())
                .digest
                == record.z_commitment;
            let act_ok = commit(
                DomainTag::Value,
                &audit.activated_blinding,
                &fwd.activated.raw().to_le_bytes(),
            )
            .digest
                == record.activated_commitment;
            let expected = match kind {
                ModelKind::LinearRegression => InferenceOutput::Regression(fwd.activated),
                ModelKind::LogisticRegression => InferenceOutput::Class {
                    label: classify(fwd.activated),
                    score: fwd.activated,
                },
            };
            InferenceVerdict {
                pass: z_ok && act_ok && expected == record.output,
                sum_checked: true,
            }
        }
        InferenceMode::Spotcheck => {
            let Some(spot) = &proof.spotcheck else { return fail() };
            let d = record.input.len();
            if spot.product_commitments.len() != d {
                return fail();
            }
            let Ok(expected_indices) =
                spotcheck_indices(record, spot.challenged.len(), d)
            else {
                return fail();
            };
            if spot
                .challenged
                .iter()
                .map(|c| c.index)
                .collect::<Vec<_>>()
                != expected_indices
            {
                return fail();
            }
            // Bias leaf opens at index d of the weights tree.
            let bias_leaf = tagged_hash(
                DomainTag::Leaf,
                &[&spot.bias_blinding, &spot.bias.raw().to_le_bytes()],
            );
            if spot.bias_path.leaf_index as usize != d
                || !spot.bias_path.verify(&record.weights_root, d + 1, &bias_leaf)
            {
                return fail();
            }
            for c in &spot.challenged {
                let idx = c.index as usize;
                if idx >= d {
                    return fail();
                }
                let weight_leaf = tagged_hash(
                    DomainTag::Leaf,
                    &[&c.weight_blinding, &c.weight.raw().to_le_bytes()],
                );
                if c.weight_path.leaf_index != c.index
                    || !c.weight_path.verify(&record.weights_root, d + 1, &weight_leaf)
                {
                    return fail();
                }
                // Product opening, and the product relation itself.
                let commitment =
                    commit(DomainTag::Value, &c.product_blinding, &c.product.to_le_bytes());
                if commitment.digest != spot.product_commitments[idx] {
                    return fail();
                }
                let expected = FieldElement::from_centered(
                    c.weight.scaled() * record.input[idx].scaled(),
                );
                if c.product != expected {
                    return fail();
                }
            }

            // Only a full opening lets the verifier rebuild z from the
            // committed products.
            if spot.challenged.len() == d {
                let mut acc: i128 = 0;
                for c in &spot.challenged {
                    acc += c.product.centered();
                }
                let Ok(z_lin) = crate::field::rescale_wide(acc) else {
                    return fail();
                };
                let z = z_lin.add(spot.bias);
                if z != spot.z {
                    return fail();
                }
                let z_ok = commit(DomainTag::Value, &spot.z_blinding, &z.raw().to_le_bytes())
                    .digest
                    == record.z_commitment;
                if !z_ok {
                    return fail();
                }
                let activated = match kind {
                    ModelKind::LinearRegression => z,
                    ModelKind::LogisticRegression => sigmoid_cubic(z),
                };
                let expected = match kind {
                    ModelKind::LinearRegression => InferenceOutput::Regression(activated),
                    ModelKind::LogisticRegression => InferenceOutput::Class {
                        label: classify(activated),
                        score: activated,
                    },
                };
                InferenceVerdict {
                    pass: expected == record.output,
                    sum_checked: true,
                }
            } else {
                InferenceVerdict {
                    pass: true,
                    sum_checked: false,
                }
            }
        }
    }
}

/// Public benchmark tree: unblinded leaves over canonical record bytes,
/// so any third party can rebuild it.
pub fn benchmark_tree(records: &[Record]) -> Result<MerkleTree, InferenceError> {
    if records.is_empty() {
        return Err(InferenceError::EmptyBenchmark);
    }
    Ok(MerkleTree::from_payloads(
        records.iter().map(|r| r.canonical_bytes()),
    )?)
}

/// Exact evaluation counts over a public benchmark, with per-example
/// prediction commitments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub benchmark_root: Digest,
    pub examples: u32,
    pub prediction_commitments: Vec<Digest>,
    pub accuracy_count: u32,
    /// Correct-prediction counts keyed by the group column's scaled value.
    pub group_counts: BTreeMap<String, u32>,
    pub group_column: u32,
    pub weights_root: Digest,
}

impl EvaluationReport {
    pub fn canonical_bytes(&self) -> Vec<u8> {
        to_canonical_json(self)
    }

    /// Structural invariants any honest report satisfies.
    pub fn well_formed(&self) -> bool {
        self.accuracy_count <= self.examples
            && self.prediction_commitments.len() == self.examples as usize
            && self.group_counts.values().sum::<u32>() == self.accuracy_count
    }
}

/// Prover-side evaluation secrets.
#[derive(Debug, Clone)]
pub struct EvaluationWitness {
    pub predictions: Vec<InferenceOutput>,
    pub blindings: Vec<Blinding>,
}

fn correct(kind: ModelKind, prediction: &InferenceOutput, label: FixedPoint) -> bool {
    let half = FixedPoint::encode(0.5).expect("constant").scaled();
    match (kind, prediction) {
        (_, InferenceOutput::Class { label: class, .. }) => *class == (label.scaled() >= half),
        (_, InferenceOutput::Regression(score)) => {
            (score.scaled() >= half) == (label.scaled() >= half)
        }
    }
}

/// Evaluates the model over a benchmark and commits every prediction.
pub fn evaluate(
    kind: ModelKind,
    weights: &ModelWeights,
    weights_root: Digest,
    benchmark: &[Record],
    group_column: usize,
    secrets: &Secrets,
    domain: &str,
) -> Result<(EvaluationReport, EvaluationWitness), InferenceError> {
    if benchmark.is_empty() {
        return Err(InferenceError::EmptyBenchmark);
    }
    let width = benchmark[0].dim();
    if group_column >= width {
        return Err(InferenceError::GroupColumnOutOfRange {
            column: group_column,
            width,
        });
    }
    let tree = benchmark_tree(benchmark)?;

    let mut predictions = Vec::with_capacity(benchmark.len());
    let mut blindings = Vec::with_capacity(benchmark.len());
    let mut commitments = Vec::with_capacity(benchmark.len());
    let mut accuracy = 0u32;
    let mut groups: BTreeMap<String, u32> = BTreeMap::new();

    for (i, record) in benchmark.iter().enumerate() {
        let fwd = forward(kind, weights, &record.features)?;
        let prediction = match kind {
            ModelKind::LinearRegression => InferenceOutput::Regression(fwd.activated),
            ModelKind::LogisticRegression => InferenceOutput::Class {
                label: classify(fwd.activated),
                score: fwd.activated,
            },
        };
        let blinding = secrets.blinding(&format!("{domain}/prediction"), i as u64);
        commitments.push(commit(DomainTag::Value, &blinding, &prediction.canonical_bytes()).digest);
        if correct(kind, &prediction, record.label) {
            accuracy += 1;
            let key = record.features[group_column].scaled().to_string();
            *groups.entry(key).or_insert(0) += 1;
        }
        predictions.push(prediction);
        blindings.push(blinding);
    }

    Ok((
        EvaluationReport {
            benchmark_root: tree.root(),
            examples: benchmark.len() as u32,
            prediction_commitments: commitments,
            accuracy_count: accuracy,
            group_counts: groups,
            group_column: group_column as u32,
            weights_root,
        },
        EvaluationWitness {
            predictions,
            blindings,
        },
    ))
}

/// Audit opening for an evaluation report: the full model plus the
/// per-example prediction blindings.
#[derive(Debug, Clone)]
pub struct EvaluationOpening {
    pub weights: ModelWeights,
    pub weight_blindings: Vec<Blinding>,
    pub prediction_blindings: Vec<Blinding>,
}

/// Audit-mode verification: rebuilds the benchmark tree, recomputes every
/// prediction from the opened weights, re-derives every commitment, and
/// recounts both metrics, demanding exact equality throughout.
pub fn verify_evaluation(
    kind: ModelKind,
    report: &EvaluationReport,
    benchmark: &[Record],
    opening: &EvaluationOpening,
) -> bool {
    if !report.well_formed() || benchmark.len() != report.examples as usize {
        return false;
    }
    let Ok(tree) = benchmark_tree(benchmark) else {
        return false;
    };
    if tree.root() != report.benchmark_root {
        return false;
    }
    let d = opening.weights.dim();
    if opening.weight_blindings.len() != d + 1
        || opening
            .weights
            .commit_tree(&opening.weight_blindings)
            .root()
            != report.weights_root
    {
        return false;
    }
    if opening.prediction_blindings.len() != benchmark.len() {
        return false;
    }
    let group_column = report.group_column as usize;
    if benchmark.iter().any(|r| group_column >= r.dim()) {
        return false;
    }

    let mut accuracy = 0u32;
    let mut groups: BTreeMap<String, u32> = BTreeMap::new();
    for (i, record) in benchmark.iter().enumerate() {
        let Ok(fwd) = forward(kind, &opening.weights, &record.features) else {
            return false;
        };
        let prediction = match kind {
            ModelKind::LinearRegression => InferenceOutput::Regression(fwd.activated),
            ModelKind::LogisticRegression => InferenceOutput::Class {
                label: classify(fwd.activated),
                score: fwd.activated,
            },
        };
        let commitment = commit(
            DomainTag::Value,
            &opening.prediction_blindings[i],
            &prediction.canonical_bytes(),
        );
        if commitment.digest != report.prediction_commitments[i] {
            return false;
        }
        if correct(kind, &prediction, record.label) {
            accuracy += 1;
            let key = record.features[group_column].scaled().to_string();
            *groups.entry(key).or_insert(0) += 1;
        }
    }
    accuracy == report.accuracy_count && groups == report.group_counts
}

// --- canonical binary serialization for the proof ---

impl InferenceRecord {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_digest(&self.weights_root);
        w.put_u32(self.input.len() as u32);
        for &x in &self.input {
            w.put_fixed(x);
        }
        w.put_bytes(&self.output.canonical_bytes());
        w.put_digest(&self.input_commitment);
        w.put_digest(&self.z_commitment);
        w.put_digest(&self.activated_commitment);
        w.put_digest(&self.output_commitment);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let weights_root = r.get_digest()?;
        let n = r.get_count()?;
        let mut input = Vec::with_capacity(n);
        for _ in 0..n {
            input.push(r.get_fixed()?);
        }
        let output_bytes = r.get_bytes()?;
        let mut or = Reader::new(&output_bytes);
        let output = InferenceOutput::read(&mut or)?;
        or.finish()?;
        let record = InferenceRecord {
            weights_root,
            input,
            output,
            input_commitment: r.get_digest()?,
            z_commitment: r.get_digest()?,
            activated_commitment: r.get_digest()?,
            output_commitment: r.get_digest()?,
        };
        r.finish()?;
        Ok(record)
    }
}

impl InferenceProof {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_u8(match self.mode {
            InferenceMode::Audit => 0,
            InferenceMode::Spotcheck => 1,
        });
        w.put_fixed_bytes(&self.input_blinding);
        w.put_fixed_bytes(&self.output_blinding);
        match &self.audit {
            Some(a) => {
                w.put_u8(1);
                a.weights.write(&mut w);
                w.put_u32(a.weight_blindings.len() as u32);
                for b in &a.weight_blindings {
                    w.put_fixed_bytes(b);
                }
                w.put_fixed_bytes(&a.z_blinding);
                w.put_fixed_bytes(&a.activated_blinding);
            }
            None => w.put_u8(0),
        }
        match &self.spotcheck {
            Some(s) => {
                w.put_u8(1);
                w.put_u32(s.product_commitments.len() as u32);
                for d in &s.product_commitments {
                    w.put_digest(d);
                }
                w.put_u32(s.challenged.len() as u32);
                for c in &s.challenged {
                    w.put_u32(c.index);
                    w.put_fixed(c.weight);
                    w.put_fixed_bytes(&c.weight_blinding);
                    c.weight_path.write(&mut w);
                    w.put_field(c.product);
                    w.put_fixed_bytes(&c.product_blinding);
                }
                w.put_fixed(s.bias);
                w.put_fixed_bytes(&s.bias_blinding);
                s.bias_path.write(&mut w);
                w.put_fixed(s.z);
                w.put_fixed_bytes(&s.z_blinding);
            }
            None => w.put_u8(0),
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let mode = match r.get_u8()? {
            0 => InferenceMode::Audit,
            1 => InferenceMode::Spotcheck,
            _ => return Err(CodecError::Invalid("mode")),
        };
        let input_blinding = r.get_fixed_bytes()?;
        let output_blinding = r.get_fixed_bytes()?;
        let audit = match r.get_u8()? {
            0 => None,
            1 => {
                let weights = ModelWeights::read(&mut r)?;
                let n = r.get_count()?;
                let mut weight_blindings = Vec::with_capacity(n);
                for _ in 0..n {
                    weight_blindings.push(r.get_fixed_bytes()?);
                }
                Some(AuditWeights {
                    weights,
                    weight_blindings,
                    z_blinding: r.get_fixed_bytes()?,
                    activated_blinding: r.get_fixed_bytes()?,
                })
            }
            _ => return Err(CodecError::Invalid("option tag")),
        };
        let spotcheck = match r.get_u8()? {
            0 => None,
            1 => {
                let n = r.get_count()?;
                let mut product_commitments = Vec::with_capacity(n);
                for _ in 0..n {
                    product_commitments.push(r.get_digest()?);
                }
                let nc = r.get_count()?;
                let mut challenged = Vec::with_capacity(nc);
                for _ in 0..nc {
                    challenged.push(CoordinateOpening {
                        index: r.get_u32()?,
                        weight: r.get_fixed()?,
                        weight_blinding: r.get_fixed_bytes()?,
                        weight_path: MerklePath::read(&mut r)?,
                        product: r.get_field()?,
                        product_blinding: r.get_fixed_bytes()?,
                    });
                }
                Some(SpotcheckData {
                    product_commitments,
                    challenged,
                    bias: r.get_fixed()?,
                    bias_blinding: r.get_fixed_bytes()?,
                    bias_path: MerklePath::read(&mut r)?,
                    z: r.get_fixed()?,
                    z_blinding: r.get_fixed_bytes()?,
                })
            }
            _ => return Err(CodecError::Invalid("option tag")),
        };
        let proof = InferenceProof {
            mode,
            input_blinding,
            output_blinding,
            audit,
            spotcheck,
        };
        r.finish()?;
        Ok(proof)
    }
}
