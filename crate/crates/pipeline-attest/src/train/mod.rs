//! Deterministic fixed-point training with a committed trace.
//!
//! Training is a pure function of (dataset bytes, model spec, initial
//! weights): minibatch SGD where every arithmetic step follows the field
//! module's rules, so any re-execution reproduces the trace bit-exactly.
//! Each iteration's state is blinded into a Merkle leaf and folded into
//! a hash chain seeded by the spec hash; proofs open a challenged sample
//! of iterations for re-execution (see [`proof`]).
//!
//! The logistic path replaces the sigmoid with the cubic
//! `1/2 + z/4 - z^3/48` applied after clamping z to [-4, 4]; fixed
//! polynomial degree keeps the computation exactly reproducible in
//! fixed point.

pub mod proof;

pub use proof::{
    prove_training, unlearn, verify_training, verify_unlearning, TrainPublic, TrainingProof,
    UnlearnOutcome, UnlearningProof,
};

use crate::canonical::to_canonical_json;
use crate::codec::{CodecError, Reader, Writer};
use crate::commit::{
    commit, sha256, tagged_hash, Blinding, Commitment, Digest, DomainTag, HashStream, MerkleTree,
    Secrets,
};
use crate::dataset::{CommittedDataset, Record};
use crate::field::{dot_raw, rescale_wide, FieldElement, FieldError, FixedPoint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("batch size {batch} exceeds dataset size {rows}")]
    BatchExceedsDataset { batch: usize, rows: usize },
    #[error("prior weights opening does not match the prior root")]
    InvalidPriorOpening,
    #[error("record not found in the dataset tree")]
    RecordNotFound,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Merkle(#[from] crate::commit::MerkleError),
    #[error(transparent)]
    Transcript(#[from] crate::commit::TranscriptError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LinearRegression,
    LogisticRegression,
}

/// Public training algorithm description. The canonical JSON hash
/// identifies the algorithm, seeds the trace chain, and binds the
/// Fiat-Shamir challenges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub feature_dim: usize,
    pub learning_rate: FixedPoint,
    pub batch_size: usize,
    pub iterations: usize,
    pub shuffle_seed: u64,
    /// Unlearning retrains from the declared initialization; recorded
    /// here so the choice is part of the spec hash.
    #[serde(default = "default_unlearning_mode")]
    pub unlearning_mode: String,
}

fn default_unlearning_mode() -> String {
    "retrain_from_init".to_string()
}

impl ModelSpec {
    pub fn canonical_bytes(&self) -> Vec<u8> {
        to_canonical_json(self)
    }

    pub fn hash(&self) -> Digest {
        sha256(&[&self.canonical_bytes()])
    }

    /// Full batches per epoch; a trailing partial batch is dropped.
    pub fn batches_per_epoch(&self, rows: usize) -> usize {
        rows / self.batch_size
    }
}

/// Model parameters: one weight per feature plus a bias.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelWeights {
    pub w: Vec<FixedPoint>,
    pub bias: FixedPoint,
}

impl ModelWeights {
    pub fn zeros(dim: usize) -> Self {
        ModelWeights {
            w: vec![FixedPoint::ZERO; dim],
            bias: FixedPoint::ZERO,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn write(&self, w: &mut Writer) {
        w.put_u32(self.w.len() as u32);
        for &coord in &self.w {
            w.put_fixed(coord);
        }
        w.put_fixed(self.bias);
    }

    pub fn read(r: &mut Reader) -> Result<Self, CodecError> {
        let d = r.get_count()?;
        let mut w = Vec::with_capacity(d);
        for _ in 0..d {
            w.push(r.get_fixed()?);
        }
        let bias = r.get_fixed()?;
        Ok(ModelWeights { w, bias })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let out = Self::read(&mut r)?;
        r.finish()?;
        Ok(out)
    }

    /// Per-coordinate blinded leaves: coordinates 0..d, then the bias at
    /// index d.
    pub fn leaf_digests(&self, blindings: &[Blinding]) -> Vec<Digest> {
        assert_eq!(blindings.len(), self.w.len() + 1);
        let mut leaves: Vec<Digest> = self
            .w
            .iter()
            .zip(blindings)
            .map(|(coord, b)| tagged_hash(DomainTag::Leaf, &[b, &coord.raw().to_le_bytes()]))
            .collect();
        leaves.push(tagged_hash(
            DomainTag::Leaf,
            &[&blindings[self.w.len()], &self.bias.raw().to_le_bytes()],
        ));
        leaves
    }

    pub fn commit_tree(&self, blindings: &[Blinding]) -> MerkleTree {
        MerkleTree::from_leaf_digests(self.leaf_digests(blindings))
            .expect("weights have at least the bias leaf")
    }
}

/// The cubic sigmoid stand-in: 1/2 + z/4 - z^3/48 after clamping z to
/// [-4, 4]. All constants are fixed-point encodings; the whole
/// computation is exact given the clamp.
pub fn sigmoid_cubic(z: FixedPoint) -> FixedPoint {
    let zs = z.saturate(4.0);
    let half = FixedPoint::encode(0.5).expect("constant");
    let quarter = FixedPoint::encode(0.25).expect("constant");
    let inv48 = FixedPoint::encode(1.0 / 48.0).expect("constant");
    let z2 = zs.mul_rescale(zs).expect("|z| <= 4");
    let z3 = z2.mul_rescale(zs).expect("|z| <= 4");
    half.add(zs.mul_rescale(quarter).expect("|z| <= 4"))
        .sub(z3.mul_rescale(inv48).expect("|z^3| <= 64"))
}

/// One forward pass with its intermediate values exposed for proofs.
#[derive(Debug, Clone)]
pub struct Forward {
    /// Raw scale-2^32 accumulator of the dot product, before rescale.
    pub z_acc: FieldElement,
    /// z = rescale(z_acc) + bias.
    pub z: FixedPoint,
    /// z for linear models; the cubic sigmoid of the clamped z for
    /// logistic models.
    pub activated: FixedPoint,
}

/// Shared forward pass; training re-execution and inference both call
/// this, so the two stages agree bit-exactly by construction.
pub fn forward(
    kind: ModelKind,
    weights: &ModelWeights,
    features: &[FixedPoint],
) -> Result<Forward, FieldError> {
    if features.len() != weights.dim() {
        return Err(FieldError::DimensionMismatch {
            expected: weights.dim(),
            got: features.len(),
        });
    }
    let z_acc = dot_raw(&weights.w, features)?;
    let z = rescale_wide(z_acc.centered())?.add(weights.bias);
    let activated = match kind {
        ModelKind::LinearRegression => z,
        ModelKind::LogisticRegression => sigmoid_cubic(z),
    };
    Ok(Forward { z_acc, z, activated })
}

/// The committed per-iteration state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceState {
    pub iteration: u64,
    pub weights: ModelWeights,
    /// Dataset indices consumed by this step; empty for the initial state.
    pub batch: Vec<u32>,
}

impl TraceState {
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_u64(self.iteration);
        self.weights.write(&mut w);
        w.put_u32(self.batch.len() as u32);
        for &idx in &self.batch {
            w.put_u32(idx);
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let iteration = r.get_u64()?;
        let weights = ModelWeights::read(&mut r)?;
        let n = r.get_count()?;
        let mut batch = Vec::with_capacity(n);
        for _ in 0..n {
            batch.push(r.get_u32()?);
        }
        r.finish()?;
        Ok(TraceState {
            iteration,
            weights,
            batch,
        })
    }
}

/// The full committed training history: states s_0..s_T, their blinded
/// leaves, the running hash chain (seeded by the spec hash), and the
/// Merkle tree over the leaves.
#[derive(Debug, Clone)]
pub struct TrainingTrace {
    pub states: Vec<TraceState>,
    pub blindings: Vec<Blinding>,
    pub leaves: Vec<Digest>,
    pub chain: Vec<Digest>,
    pub tree: MerkleTree,
}

impl TrainingTrace {
    pub fn root(&self) -> Digest {
        self.tree.root()
    }

    pub fn chain_head(&self) -> Digest {
        *self.chain.last().expect("chain includes s_0")
    }
}

/// Recomputes the trace hash chain from leaves: h_{-1} = spec hash,
/// h_i = SHA-256(h_{i-1} || leaf_i).
pub fn fold_chain(spec_hash: &Digest, leaves: &[Digest]) -> Vec<Digest> {
    let mut chain = Vec::with_capacity(leaves.len());
    let mut head = *spec_hash;
    for leaf in leaves {
        head = sha256(&[head.as_bytes(), leaf.as_bytes()]);
        chain.push(head);
    }
    chain
}

/// Minibatch for an iteration: a fresh Fisher-Yates permutation per
/// epoch, consumed in sequential full batches. `iteration` is 1-based.
pub fn batch_schedule(spec: &ModelSpec, rows: usize, iteration: u64) -> Vec<u32> {
    let bpe = spec.batches_per_epoch(rows) as u64;
    let epoch = (iteration - 1) / bpe;
    let slot = ((iteration - 1) % bpe) as usize;
    let mut prefix = Vec::with_capacity(16);
    prefix.extend_from_slice(&spec.shuffle_seed.to_le_bytes());
    prefix.extend_from_slice(&epoch.to_le_bytes());
    let perm = HashStream::new(prefix).permutation(rows);
    perm[slot * spec.batch_size..(slot + 1) * spec.batch_size].to_vec()
}

/// Everything one SGD step computes, exposed so the verifier can check
/// the committed accumulators and the weight update independently.
#[derive(Debug, Clone)]
pub struct StepDetail {
    /// Per-record raw dot-product accumulators (scale 2^32).
    pub z_acc: Vec<FieldElement>,
    /// Per-record prediction minus label.
    pub residuals: Vec<FixedPoint>,
    /// Per-coordinate raw gradient accumulators (scale 2^32).
    pub grad_acc: Vec<FieldElement>,
    pub new_weights: ModelWeights,
}

/// One SGD step over a batch. Update rule per coordinate:
/// grad_j = (1/B) * rescale(sum_i x_ij * r_i), w_j' = w_j - eta * grad_j,
/// with 1/B realized as multiplication by encode(1/B).
pub fn sgd_step(
    spec: &ModelSpec,
    weights: &ModelWeights,
    batch: &[&Record],
) -> Result<StepDetail, TrainError> {
    let d = weights.dim();
    let inv_batch = FixedPoint::encode(1.0 / spec.batch_size as f64)?;

    let mut z_acc = Vec::with_capacity(batch.len());
    let mut residuals = Vec::with_capacity(batch.len());
    for record in batch {
        if record.dim() != d {
            return Err(TrainError::DimensionMismatch(format!(
                "record width {} vs weights width {d}",
                record.dim()
            )));
        }
        let fwd = forward(spec.kind, weights, &record.features)?;
        z_acc.push(fwd.z_acc);
        residuals.push(fwd.activated.sub(record.label));
    }

    let mut grad_acc = Vec::with_capacity(d);
    let mut new_w = Vec::with_capacity(d);
    for j in 0..d {
        let xs: Vec<FixedPoint> = batch.iter().map(|r| r.features[j]).collect();
        let acc = dot_raw(&xs, &residuals)?;
        grad_acc.push(acc);
        let grad = inv_batch.mul_rescale(rescale_wide(acc.centered())?)?;
        new_w.push(weights.w[j].sub(spec.learning_rate.mul_rescale(grad)?));
    }

    let mut residual_sum = FixedPoint::ZERO;
    for &r in &residuals {
        residual_sum = residual_sum.add(r);
    }
    let grad_bias = inv_batch.mul_rescale(residual_sum)?;
    let new_bias = weights.bias.sub(spec.learning_rate.mul_rescale(grad_bias)?);

    Ok(StepDetail {
        z_acc,
        residuals,
        grad_acc,
        new_weights: ModelWeights {
            w: new_w,
            bias: new_bias,
        },
    })
}

/// A finished training run with everything needed to prove it.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: ModelWeights,
    pub trace: TrainingTrace,
    pub weights_tree: MerkleTree,
    pub weight_blindings: Vec<Blinding>,
    pub init_blinding: Blinding,
    pub init_commitment: Commitment,
    pub prior_root: Option<Digest>,
}

impl TrainOutcome {
    pub fn weights_root(&self) -> Digest {
        self.weights_tree.root()
    }
}

/// Runs deterministic SGD over the committed dataset. `domain` prefixes
/// the secrets domains so distinct pipeline stages never share blindings.
pub fn train(
    dataset: &CommittedDataset,
    spec: &ModelSpec,
    init: &ModelWeights,
    secrets: &Secrets,
    domain: &str,
) -> Result<TrainOutcome, TrainError> {
    train_with_prior(dataset, spec, init, secrets, domain, None)
}

fn train_with_prior(
    dataset: &CommittedDataset,
    spec: &ModelSpec,
    init: &ModelWeights,
    secrets: &Secrets,
    domain: &str,
    prior_root: Option<Digest>,
) -> Result<TrainOutcome, TrainError> {
    let rows = dataset.len();
    let d = spec.feature_dim;
    if dataset.dim() != d || init.dim() != d {
        return Err(TrainError::DimensionMismatch(format!(
            "dataset width {}, init width {}, spec width {d}",
            dataset.dim(),
            init.dim()
        )));
    }
    if spec.batch_size == 0 || spec.batch_size > rows {
        return Err(TrainError::BatchExceedsDataset {
            batch: spec.batch_size,
            rows,
        });
    }

    let mut states = Vec::with_capacity(spec.iterations + 1);
    states.push(TraceState {
        iteration: 0,
        weights: init.clone(),
        batch: vec![],
    });

    let mut weights = init.clone();
    for i in 1..=spec.iterations as u64 {
        let batch = batch_schedule(spec, rows, i);
        let records: Vec<&Record> = batch.iter().map(|&k| &dataset.records[k as usize]).collect();
        let step = sgd_step(spec, &weights, &records)?;
        weights = step.new_weights;
        states.push(TraceState {
            iteration: i,
            weights: weights.clone(),
            batch,
        });
    }

    let blindings: Vec<Blinding> = (0..states.len())
        .map(|i| secrets.blinding(&format!("{domain}/trace"), i as u64))
        .collect();
    let leaves: Vec<Digest> = states
        .iter()
        .zip(&blindings)
        .map(|(state, blinding)| {
            tagged_hash(DomainTag::Leaf, &[blinding, &state.canonical_bytes()])
        })
        .collect();
    let chain = fold_chain(&spec.hash(), &leaves);
    let tree = MerkleTree::from_leaf_digests(leaves.clone())?;

    let weight_blindings: Vec<Blinding> = (0..=d)
        .map(|j| secrets.blinding(&format!("{domain}/weights"), j as u64))
        .collect();
    let weights_tree = weights.commit_tree(&weight_blindings);

    let init_blinding = secrets.blinding(&format!("{domain}/init"), 0);
    let init_commitment = commit(DomainTag::Value, &init_blinding, &init.canonical_bytes());

    Ok(TrainOutcome {
        weights,
        trace: TrainingTrace {
            states,
            blindings,
            leaves,
            chain,
            tree,
        },
        weights_tree,
        weight_blindings,
        init_blinding,
        init_commitment,
        prior_root,
    })
}

/// A prior model opened for fine-tuning: full per-coordinate blindings
/// against the prior weights root.
#[derive(Debug, Clone)]
pub struct PriorOpening {
    pub root: Digest,
    pub weights: ModelWeights,
    pub blindings: Vec<Blinding>,
}

/// Continues training from committed prior weights. The opening must
/// rebuild the prior root exactly; the resulting outcome records the
/// prior root as an input commitment.
pub fn fine_tune(
    dataset: &CommittedDataset,
    spec: &ModelSpec,
    prior: &PriorOpening,
    secrets: &Secrets,
    domain: &str,
) -> Result<TrainOutcome, TrainError> {
    if prior.blindings.len() != prior.weights.dim() + 1 {
        return Err(TrainError::InvalidPriorOpening);
    }
    let rebuilt = prior.weights.commit_tree(&prior.blindings);
    if rebuilt.root() != prior.root {
        return Err(TrainError::InvalidPriorOpening);
    }
    train_with_prior(
        dataset,
        spec,
        &prior.weights,
        secrets,
        domain,
        Some(prior.root),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::record_leaf;

    pub(super) fn fp(x: f64) -> FixedPoint {
        FixedPoint::encode(x).unwrap()
    }

    pub(super) fn spec(kind: ModelKind, d: usize, eta: f64, b: usize, t: usize) -> ModelSpec {
        ModelSpec {
            kind,
            feature_dim: d,
            learning_rate: fp(eta),
            batch_size: b,
            iterations: t,
            shuffle_seed: 7,
            unlearning_mode: default_unlearning_mode(),
        }
    }

    pub(super) fn dataset_from(rows: Vec<(Vec<f64>, f64)>, secrets: &Secrets) -> CommittedDataset {
        let records: Vec<Record> = rows
            .iter()
            .enumerate()
            .map(|(i, (features, label))| Record {
                features: features.iter().map(|&x| fp(x)).collect(),
                label: fp(*label),
                source: sha256(&[&(i as u64).to_le_bytes()]),
            })
            .collect();
        let blindings: Vec<Blinding> = (0..records.len())
            .map(|i| secrets.blinding("dataset", i as u64))
            .collect();
        CommittedDataset::commit(records, blindings).unwrap()
    }

    #[test]
    fn sigmoid_cubic_fixed_values() {
        // sigma(0) = 1/2 exactly.
        assert_eq!(sigmoid_cubic(FixedPoint::ZERO), fp(0.5));
        // At the clamp boundary: 1/2 + 1 - floor-ish(64/48); stays in [0,1].
        let at4 = sigmoid_cubic(fp(4.0)).decode();
        assert!((0.0..=1.0).contains(&at4));
        let at_neg4 = sigmoid_cubic(fp(-4.0)).decode();
        assert!((0.0..=1.0).contains(&at_neg4));
        // Beyond the clamp the value equals the clamped value.
        assert_eq!(sigmoid_cubic(fp(10.0)), sigmoid_cubic(fp(4.0)));
        // Near zero it approximates the real sigmoid well.
        let at_half = sigmoid_cubic(fp(0.5)).decode();
        let real = 1.0 / (1.0 + (-0.5f64).exp());
        assert!((at_half - real).abs() < 0.005, "{at_half} vs {real}");
    }

    #[test]
    fn zero_iterations_returns_init() {
        let secrets = Secrets::new([1u8; 32]);
        let ds = dataset_from(vec![(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 0.0)], &secrets);
        let spec = spec(ModelKind::LinearRegression, 2, 0.5, 2, 0);
        let init = ModelWeights::zeros(2);
        let out = train(&ds, &spec, &init, &secrets, "t").unwrap();
        assert_eq!(out.weights, init);
        assert_eq!(out.trace.states.len(), 1);
        assert_eq!(out.trace.leaves.len(), 1);
    }

    #[test]
    fn one_full_batch_step_matches_integer_oracle() {
        // Crafted so a single full-batch linear step from zero gives
        // w = (0.5, 0.25): sum x1*y = 4, sum x2*y = 2, eta = 0.5, B = 4.
        let secrets = Secrets::new([2u8; 32]);
        let ds = dataset_from(
            vec![
                (vec![1.0, 0.0], 1.0),
                (vec![1.0, 0.0], 1.0),
                (vec![1.0, 1.0], 1.0),
                (vec![1.0, 1.0], 1.0),
            ],
            &secrets,
        );
        let spec = spec(ModelKind::LinearRegression, 2, 0.5, 4, 1);
        let out = train(&ds, &spec, &ModelWeights::zeros(2), &secrets, "t").unwrap();
        assert_eq!(out.weights.w[0], fp(0.5));
        assert_eq!(out.weights.w[1], fp(0.25));
        assert_eq!(out.weights.bias, fp(0.5));
    }

    #[test]
    fn training_is_deterministic() {
        let secrets = Secrets::new([3u8; 32]);
        let rows: Vec<(Vec<f64>, f64)> = (0..8)
            .map(|i| {
                (
                    vec![(i as f64) / 8.0, 1.0 - (i as f64) / 4.0],
                    (i % 2) as f64,
                )
            })
            .collect();
        let ds = dataset_from(rows, &secrets);
        let spec = spec(ModelKind::LogisticRegression, 2, 0.25, 4, 10);
        let init = ModelWeights::zeros(2);
        let a = train(&ds, &spec, &init, &secrets, "t").unwrap();
        let b = train(&ds, &spec, &init, &secrets, "t").unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.trace.root(), b.trace.root());
        assert_eq!(a.trace.chain_head(), b.trace.chain_head());
        assert_eq!(a.weights_root(), b.weights_root());
    }

    #[test]
    fn chain_folds_from_spec_hash() {
        let secrets = Secrets::new([4u8; 32]);
        let ds = dataset_from(vec![(vec![1.0], 1.0), (vec![0.5], 0.0)], &secrets);
        let spec = spec(ModelKind::LinearRegression, 1, 0.5, 2, 3);
        let out = train(&ds, &spec, &ModelWeights::zeros(1), &secrets, "t").unwrap();
        let refolded = fold_chain(&spec.hash(), &out.trace.leaves);
        assert_eq!(refolded, out.trace.chain);
        assert_eq!(out.trace.chain_head(), *refolded.last().unwrap());
    }

    #[test]
    fn schedule_covers_dataset_per_epoch() {
        let spec = spec(ModelKind::LinearRegression, 1, 0.5, 4, 8);
        let mut seen: Vec<u32> = Vec::new();
        // 8 rows, B = 4: two batches per epoch.
        for i in 1..=2 {
            seen.extend(batch_schedule(&spec, 8, i));
        }
        seen.sort_unstable();
        assert_eq!(seen, (0..8).collect::<Vec<u32>>());
        // Different epochs permute differently (overwhelmingly likely).
        assert_ne!(batch_schedule(&spec, 8, 1), batch_schedule(&spec, 8, 3));
    }

    #[test]
    fn batch_larger_than_dataset_rejected() {
        let secrets = Secrets::new([5u8; 32]);
        let ds = dataset_from(vec![(vec![1.0], 1.0), (vec![0.5], 0.0)], &secrets);
        let spec = spec(ModelKind::LinearRegression, 1, 0.5, 3, 1);
        assert!(matches!(
            train(&ds, &spec, &ModelWeights::zeros(1), &secrets, "t"),
            Err(TrainError::BatchExceedsDataset { batch: 3, rows: 2 })
        ));
    }

    #[test]
    fn fine_tune_equals_fresh_train_from_same_init() {
        let secrets = Secrets::new([6u8; 32]);
        let rows: Vec<(Vec<f64>, f64)> = (0..8)
            .map(|i| (vec![(i as f64) / 4.0 - 1.0], (i % 2) as f64))
            .collect();
        let ds = dataset_from(rows, &secrets);
        let sp = spec(ModelKind::LinearRegression, 1, 0.25, 4, 6);

        // Commit a prior model.
        let prior_weights = ModelWeights {
            w: vec![fp(0.125)],
            bias: fp(-0.5),
        };
        let prior_blindings: Vec<Blinding> =
            (0..=1).map(|j| secrets.blinding("prior", j)).collect();
        let prior = PriorOpening {
            root: prior_weights.commit_tree(&prior_blindings).root(),
            weights: prior_weights.clone(),
            blindings: prior_blindings.clone(),
        };

        let tuned = fine_tune(&ds, &sp, &prior, &secrets, "ft").unwrap();
        let fresh = train(&ds, &sp, &prior_weights, &secrets, "fresh").unwrap();
        assert_eq!(tuned.weights, fresh.weights);
        // Same numbers, different blinding domains: the roots differ.
        assert_ne!(tuned.weights_root(), fresh.weights_root());
        assert_eq!(tuned.prior_root, Some(prior.root));

        // Zero-iteration fine-tune recommits the prior weights.
        let sp0 = spec(ModelKind::LinearRegression, 1, 0.25, 4, 0);
        let noop = fine_tune(&ds, &sp0, &prior, &secrets, "ft0").unwrap();
        assert_eq!(noop.weights, prior_weights);
    }

    #[test]
    fn tampered_prior_opening_rejected() {
        let secrets = Secrets::new([7u8; 32]);
        let ds = dataset_from(vec![(vec![1.0], 1.0), (vec![0.0], 0.0)], &secrets);
        let sp = spec(ModelKind::LinearRegression, 1, 0.25, 2, 1);
        let weights = ModelWeights {
            w: vec![fp(1.0)],
            bias: fp(0.0),
        };
        let blindings: Vec<Blinding> = (0..=1).map(|j| secrets.blinding("p", j)).collect();
        let mut prior = PriorOpening {
            root: weights.commit_tree(&blindings).root(),
            weights,
            blindings,
        };
        prior.weights.w[0] = fp(2.0); // opening no longer matches the root
        assert!(matches!(
            fine_tune(&ds, &sp, &prior, &secrets, "ft"),
            Err(TrainError::InvalidPriorOpening)
        ));
    }

    #[test]
    fn trace_state_codec_roundtrip() {
        let state = TraceState {
            iteration: 17,
            weights: ModelWeights {
                w: vec![fp(0.5), fp(-0.25)],
                bias: fp(1.0),
            },
            batch: vec![3, 1, 4],
        };
        let back = TraceState::from_bytes(&state.canonical_bytes()).unwrap();
        assert_eq!(state, back);
    }

    #[test]
    fn dataset_order_is_sorted_leaf_order() {
        let secrets = Secrets::new([8u8; 32]);
        let ds = dataset_from(
            vec![(vec![1.0], 1.0), (vec![2.0], 0.0), (vec![3.0], 1.0)],
            &secrets,
        );
        for (i, (rec, blind)) in ds.records.iter().zip(&ds.blindings).enumerate() {
            assert_eq!(ds.tree.leaves()[i], record_leaf(blind, rec));
        }
    }
}
