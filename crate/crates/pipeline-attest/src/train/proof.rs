//! Challenge-response proofs of training, and exact unlearning built on
//! them.
//!
//! A training proof publishes the blinded leaf digests of the whole
//! trace (leaves reveal nothing; publishing them lets any verifier
//! recompute both the trace root and the hash-chain head), then opens a
//! transcript-chosen sample of iterations. For each challenged iteration
//! the verifier re-executes the SGD step from the opened predecessor
//! state and minibatch and demands the committed successor bit-exactly.
//! When a step is large enough, the two dot-product accumulations inside
//! it are certified through the sum-check matrix verifier instead of
//! being recomputed term by term.
//!
//! Unlearning is exact: delete the leaf, retrain from the declared
//! initialization on what remains, and prove membership of the deleted
//! leaf in the old tree, non-membership in the new tree, and honesty of
//! the retraining run.

use super::{
    batch_schedule, fold_chain, sgd_step, train, ModelSpec, ModelWeights, TraceState, TrainError,
    TrainOutcome,
};
use crate::codec::{CodecError, Reader, Writer};
use crate::commit::{
    commit, tagged_hash, Blinding, Digest, DomainTag, MerklePath, MerkleTree, NonMembershipProof,
    Secrets, Transcript,
};
use crate::dataset::{CommittedDataset, Record};
use crate::field::{rescale_wide, FieldElement, FixedPoint};
use crate::sumcheck::{verify_matmul, Matrix};

/// Steps whose batch-size x width product reaches this bound route their
/// dot-product accumulations through the sum-check matrix verifier;
/// smaller steps are recomputed directly.
pub const SUMCHECK_THRESHOLD: usize = 64;

/// An opened committed value: blinding, payload bytes, and the leaf's
/// authentication path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateOpening {
    pub blinding: Blinding,
    pub bytes: Vec<u8>,
    pub path: MerklePath,
}

impl StateOpening {
    fn write(&self, w: &mut Writer) {
        w.put_fixed_bytes(&self.blinding);
        w.put_bytes(&self.bytes);
        self.path.write(w);
    }

    fn read(r: &mut Reader) -> Result<Self, CodecError> {
        Ok(StateOpening {
            blinding: r.get_fixed_bytes()?,
            bytes: r.get_bytes()?,
            path: MerklePath::read(r)?,
        })
    }
}

/// One opened minibatch record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinibatchOpening {
    pub index: u32,
    pub blinding: Blinding,
    pub record: Vec<u8>,
    pub path: MerklePath,
}

/// Everything the verifier needs to re-execute one challenged iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChallengedIteration {
    pub iteration: u64,
    pub prev: StateOpening,
    pub state: StateOpening,
    pub minibatch: Vec<MinibatchOpening>,
    /// Per-record raw forward accumulators, certified by sum-check on
    /// the large-step route.
    pub z_acc: Vec<FieldElement>,
    /// Per-coordinate raw gradient accumulators.
    pub grad_acc: Vec<FieldElement>,
}

/// Full openings handed to a trusted auditor: every weight coordinate
/// against the weights root, plus the final trace state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditOpening {
    pub weight_blindings: Vec<Blinding>,
    pub weights: ModelWeights,
    pub final_state: StateOpening,
}

/// Evidence that a committed training run was executed honestly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingProof {
    pub dataset_root: Digest,
    pub spec_hash: Digest,
    pub init_commitment: Digest,
    pub trace_root: Digest,
    pub chain_head: Digest,
    pub weights_root: Digest,
    pub prior_root: Option<Digest>,
    /// Blinded leaf digests of s_0..s_T.
    pub trace_leaves: Vec<Digest>,
    pub challenges: Vec<ChallengedIteration>,
    /// Present when iteration 1 is challenged: opens the initialization
    /// commitment against the revealed s_0.
    pub init_blinding: Option<Blinding>,
    pub audit: Option<AuditOpening>,
}

/// Public inputs a verifier must supply (or take from the stage chain).
#[derive(Debug, Clone)]
pub struct TrainPublic {
    pub dataset_root: Digest,
    pub dataset_rows: usize,
    pub spec: ModelSpec,
    pub init_commitment: Digest,
    pub trace_root: Digest,
    pub chain_head: Digest,
    pub weights_root: Digest,
    pub prior_root: Option<Digest>,
    pub challenge_count: usize,
    pub require_audit: bool,
}

impl TrainPublic {
    pub fn from_outcome(
        outcome: &TrainOutcome,
        dataset: &CommittedDataset,
        spec: &ModelSpec,
        challenge_count: usize,
        require_audit: bool,
    ) -> Self {
        TrainPublic {
            dataset_root: dataset.root(),
            dataset_rows: dataset.len(),
            spec: spec.clone(),
            init_commitment: outcome.init_commitment.digest,
            trace_root: outcome.trace.root(),
            chain_head: outcome.trace.chain_head(),
            weights_root: outcome.weights_root(),
            prior_root: outcome.prior_root,
            challenge_count,
            require_audit,
        }
    }
}

fn challenge_iterations(
    proof_inputs: (&Digest, &Digest, &Digest, &Digest, &Digest, &Digest),
    count: usize,
    iterations: usize,
) -> Result<Vec<u64>, crate::commit::TranscriptError> {
    let (dataset_root, spec_hash, init_commitment, trace_root, chain_head, weights_root) =
        proof_inputs;
    let mut t = Transcript::new("train");
    t.absorb_digest("dataset_root", dataset_root);
    t.absorb_digest("spec_hash", spec_hash);
    t.absorb_digest("init_commitment", init_commitment);
    t.absorb_digest("trace_root", trace_root);
    t.absorb_digest("chain_head", chain_head);
    t.absorb_digest("weights_root", weights_root);
    Ok(t
        .challenge_indices(count, iterations)?
        .into_iter()
        .map(|i| i as u64 + 1)
        .collect())
}

/// Builds a training proof with `count` challenged iterations. With
/// `audit` set, the proof additionally opens every weight coordinate and
/// the final state for a trusted verifier.
pub fn prove_training(
    outcome: &TrainOutcome,
    dataset: &CommittedDataset,
    spec: &ModelSpec,
    count: usize,
    audit: bool,
) -> Result<TrainingProof, TrainError> {
    let trace = &outcome.trace;
    let t_iters = spec.iterations;
    let spec_hash = spec.hash();
    let iterations = challenge_iterations(
        (
            &dataset.root(),
            &spec_hash,
            &outcome.init_commitment.digest,
            &trace.root(),
            &trace.chain_head(),
            &outcome.weights_root(),
        ),
        count,
        t_iters,
    )?;

    let mut challenges = Vec::with_capacity(iterations.len());
    for &i in &iterations {
        let idx = i as usize;
        let state = &trace.states[idx];
        let mut minibatch = Vec::with_capacity(state.batch.len());
        for &record_idx in &state.batch {
            let k = record_idx as usize;
            minibatch.push(MinibatchOpening {
                index: record_idx,
                blinding: dataset.blindings[k],
                record: dataset.records[k].canonical_bytes(),
                path: dataset.tree.prove(k)?,
            });
        }
        let batch_records: Vec<&Record> =
            state.batch.iter().map(|&k| &dataset.records[k as usize]).collect();
        let step = sgd_step(spec, &trace.states[idx - 1].weights, &batch_records)?;
        challenges.push(ChallengedIteration {
            iteration: i,
            prev: StateOpening {
                blinding: trace.blindings[idx - 1],
                bytes: trace.states[idx - 1].canonical_bytes(),
                path: trace.tree.prove(idx - 1)?,
            },
            state: StateOpening {
                blinding: trace.blindings[idx],
                bytes: state.canonical_bytes(),
                path: trace.tree.prove(idx)?,
            },
            minibatch,
            z_acc: step.z_acc,
            grad_acc: step.grad_acc,
        });
    }

    let init_blinding = iterations.contains(&1).then_some(outcome.init_blinding);
    let audit = audit.then(|| AuditOpening {
        weight_blindings: outcome.weight_blindings.clone(),
        weights: outcome.weights.clone(),
        final_state: StateOpening {
            blinding: trace.blindings[t_iters],
            bytes: trace.states[t_iters].canonical_bytes(),
            path: trace.tree.prove(t_iters).expect("final state in range"),
        },
    });

    Ok(TrainingProof {
        dataset_root: dataset.root(),
        spec_hash,
        init_commitment: outcome.init_commitment.digest,
        trace_root: trace.root(),
        chain_head: trace.chain_head(),
        weights_root: outcome.weights_root(),
        prior_root: outcome.prior_root,
        trace_leaves: trace.leaves.clone(),
        challenges,
        init_blinding,
        audit,
    })
}

fn state_opening_valid(
    opening: &StateOpening,
    expected_leaf: &Digest,
    trace_root: &Digest,
    leaf_count: usize,
    index: usize,
) -> bool {
    let leaf = tagged_hash(DomainTag::Leaf, &[&opening.blinding, &opening.bytes]);
    leaf == *expected_leaf
        && opening.path.leaf_index as usize == index
        && opening.path.verify(trace_root, leaf_count, &leaf)
}

/// Re-executes one challenged step and compares against the opened
/// successor state. Returns false on any discrepancy.
fn check_step(
    spec: &ModelSpec,
    public: &TrainPublic,
    challenge: &ChallengedIteration,
    prev_state: &TraceState,
    schedule: &[u32],
    records: &[Record],
) -> bool {
    let d = spec.feature_dim;
    let b = spec.batch_size;
    if challenge.z_acc.len() != b || challenge.grad_acc.len() != d {
        return false;
    }

    let new_weights = if b * d >= SUMCHECK_THRESHOLD {
        // Sum-check route: certify the two accumulations, then derive the
        // update from the certified accumulators.
        let mut transcript = Transcript::new("train/step");
        transcript.absorb_digest("trace_root", &public.trace_root);
        transcript.absorb_u64("iteration", challenge.iteration);

        let x = Matrix::from_fn(b, d, |r, c| records[r].features[c].raw());
        let w_col = Matrix::from_fn(d, 1, |r, _| prev_state.weights.w[r].raw());
        let z_col = Matrix::from_fn(b, 1, |r, _| challenge.z_acc[r]);
        match verify_matmul(&x, &w_col, &z_col, &mut transcript) {
            Ok(true) => {}
            _ => return false,
        }

        let mut residuals = Vec::with_capacity(b);
        for (i, record) in records.iter().enumerate() {
            let Ok(z_lin) = rescale_wide(challenge.z_acc[i].centered()) else {
                return false;
            };
            let z = z_lin.add(prev_state.weights.bias);
            let activated = match spec.kind {
                super::ModelKind::LinearRegression => z,
                super::ModelKind::LogisticRegression => super::sigmoid_cubic(z),
            };
            residuals.push(activated.sub(record.label));
        }

        let xt = Matrix::from_fn(d, b, |r, c| records[c].features[r].raw());
        let r_col = Matrix::from_fn(b, 1, |r, _| residuals[r].raw());
        let g_col = Matrix::from_fn(d, 1, |r, _| challenge.grad_acc[r]);
        let mut t2 = transcript;
        match verify_matmul(&xt, &r_col, &g_col, &mut t2) {
            Ok(true) => {}
            _ => return false,
        }

        let Ok(inv_batch) = FixedPoint::encode(1.0 / b as f64) else {
            return false;
        };
        let mut new_w = Vec::with_capacity(d);
        for j in 0..d {
            let Ok(rescaled) = rescale_wide(challenge.grad_acc[j].centered()) else {
                return false;
            };
            let Ok(grad) = inv_batch.mul_rescale(rescaled) else {
                return false;
            };
            let Ok(delta) = spec.learning_rate.mul_rescale(grad) else {
                return false;
            };
            new_w.push(prev_state.weights.w[j].sub(delta));
        }
        let mut residual_sum = FixedPoint::ZERO;
        for &r in &residuals {
            residual_sum = residual_sum.add(r);
        }
        let Ok(grad_bias) = inv_batch.mul_rescale(residual_sum) else {
            return false;
        };
        let Ok(delta_bias) = spec.learning_rate.mul_rescale(grad_bias) else {
            return false;
        };
        ModelWeights {
            w: new_w,
            bias: prev_state.weights.bias.sub(delta_bias),
        }
    } else {
        // Plain route: recompute the step outright; the committed
        // accumulators must still match.
        let refs: Vec<&Record> = records.iter().collect();
        let Ok(step) = sgd_step(spec, &prev_state.weights, &refs) else {
            return false;
        };
        if step.z_acc != challenge.z_acc || step.grad_acc != challenge.grad_acc {
            return false;
        }
        step.new_weights
    };

    let expected_state = TraceState {
        iteration: challenge.iteration,
        weights: new_weights,
        batch: schedule.to_vec(),
    };
    expected_state.canonical_bytes() == challenge.state.bytes
}

/// Verifies a training proof against its public inputs.
pub fn verify_training(proof: &TrainingProof, public: &TrainPublic) -> bool {
    let spec = &public.spec;
    let spec_hash = spec.hash();
    let t_iters = spec.iterations;

    if proof.dataset_root != public.dataset_root
        || proof.spec_hash != spec_hash
        || proof.init_commitment != public.init_commitment
        || proof.trace_root != public.trace_root
        || proof.chain_head != public.chain_head
        || proof.weights_root != public.weights_root
        || proof.prior_root != public.prior_root
    {
        return false;
    }
    if public.require_audit && proof.audit.is_none() {
        return false;
    }

    // The published leaves must rebuild both commitments to the trace:
    // the Merkle root and the chain head.
    if proof.trace_leaves.len() != t_iters + 1 {
        return false;
    }
    match MerkleTree::from_leaf_digests(proof.trace_leaves.clone()) {
        Ok(tree) if tree.root() == proof.trace_root => {}
        _ => return false,
    }
    match fold_chain(&spec_hash, &proof.trace_leaves).last() {
        Some(head) if *head == proof.chain_head => {}
        _ => return false,
    }

    // Challenge set must match the transcript derivation exactly.
    if proof.challenges.len() != public.challenge_count {
        return false;
    }
    let Ok(expected_iterations) = challenge_iterations(
        (
            &proof.dataset_root,
            &proof.spec_hash,
            &proof.init_commitment,
            &proof.trace_root,
            &proof.chain_head,
            &proof.weights_root,
        ),
        public.challenge_count,
        t_iters,
    ) else {
        return false;
    };
    if proof
        .challenges
        .iter()
        .map(|c| c.iteration)
        .collect::<Vec<_>>()
        != expected_iterations
    {
        return false;
    }

    for challenge in &proof.challenges {
        let i = challenge.iteration as usize;
        if i == 0 || i > t_iters {
            return false;
        }
        if !state_opening_valid(
            &challenge.prev,
            &proof.trace_leaves[i - 1],
            &proof.trace_root,
            t_iters + 1,
            i - 1,
        ) || !state_opening_valid(
            &challenge.state,
            &proof.trace_leaves[i],
            &proof.trace_root,
            t_iters + 1,
            i,
        ) {
            return false;
        }
        let Ok(prev_state) = TraceState::from_bytes(&challenge.prev.bytes) else {
            return false;
        };
        let Ok(state) = TraceState::from_bytes(&challenge.state.bytes) else {
            return false;
        };
        if prev_state.iteration != challenge.iteration - 1
            || state.iteration != challenge.iteration
            || prev_state.weights.dim() != spec.feature_dim
        {
            return false;
        }

        // The consumed minibatch must equal the public schedule.
        let schedule = batch_schedule(spec, public.dataset_rows, challenge.iteration);
        if state.batch != schedule || challenge.minibatch.len() != schedule.len() {
            return false;
        }
        let mut records = Vec::with_capacity(schedule.len());
        for (opening, &expected_idx) in challenge.minibatch.iter().zip(&schedule) {
            if opening.index != expected_idx
                || opening.path.leaf_index != expected_idx
            {
                return false;
            }
            let leaf = tagged_hash(DomainTag::Leaf, &[&opening.blinding, &opening.record]);
            if !opening
                .path
                .verify(&proof.dataset_root, public.dataset_rows, &leaf)
            {
                return false;
            }
            let Ok(record) = serde_json::from_slice::<Record>(&opening.record) else {
                return false;
            };
            if record.dim() != spec.feature_dim {
                return false;
            }
            records.push(record);
        }

        if !check_step(spec, public, challenge, &prev_state, &schedule, &records) {
            return false;
        }

        // A challenge on the first step also opens the initialization.
        if challenge.iteration == 1 {
            let Some(init_blinding) = proof.init_blinding else {
                return false;
            };
            let expected = commit(
                DomainTag::Value,
                &init_blinding,
                &prev_state.weights.canonical_bytes(),
            );
            if expected.digest != proof.init_commitment {
                return false;
            }
        }
    }

    // Audit openings, when present, must rebuild the weights root and
    // agree with the committed final state.
    if let Some(audit) = &proof.audit {
        if audit.weight_blindings.len() != audit.weights.dim() + 1
            || audit.weights.dim() != spec.feature_dim
        {
            return false;
        }
        let rebuilt = audit.weights.commit_tree(&audit.weight_blindings);
        if rebuilt.root() != proof.weights_root {
            return false;
        }
        if !state_opening_valid(
            &audit.final_state,
            &proof.trace_leaves[t_iters],
            &proof.trace_root,
            t_iters + 1,
            t_iters,
        ) {
            return false;
        }
        let Ok(final_state) = TraceState::from_bytes(&audit.final_state.bytes) else {
            return false;
        };
        if final_state.weights != audit.weights {
            return false;
        }
    }

    true
}

/// Adversary simulator for soundness experiments: runs training honestly
/// up to `forged_iteration`, perturbs that one update, then continues
/// honestly from the forged state. The resulting trace, chain, and
/// weights commitments are all self-consistent; only re-execution of the
/// forged step can expose it.
pub fn forged_train(
    dataset: &CommittedDataset,
    spec: &ModelSpec,
    init: &ModelWeights,
    secrets: &Secrets,
    domain: &str,
    forged_iteration: u64,
) -> Result<TrainOutcome, TrainError> {
    let rows = dataset.len();
    let mut states = vec![TraceState {
        iteration: 0,
        weights: init.clone(),
        batch: vec![],
    }];
    let mut weights = init.clone();
    for i in 1..=spec.iterations as u64 {
        let batch = batch_schedule(spec, rows, i);
        let records: Vec<&Record> = batch.iter().map(|&k| &dataset.records[k as usize]).collect();
        let step = sgd_step(spec, &weights, &records)?;
        weights = step.new_weights;
        if i == forged_iteration {
            // a small, silent nudge on the first coordinate
            weights.w[0] = weights.w[0].add(FixedPoint::from_raw(FieldElement::new(1 << 8)));
        }
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
        .map(|(s, b)| tagged_hash(DomainTag::Leaf, &[b, &s.canonical_bytes()]))
        .collect();
    let chain = fold_chain(&spec.hash(), &leaves);
    let tree = MerkleTree::from_leaf_digests(leaves.clone())?;
    let weight_blindings: Vec<Blinding> = (0..=spec.feature_dim)
        .map(|j| secrets.blinding(&format!("{domain}/weights"), j as u64))
        .collect();
    let weights_tree = weights.commit_tree(&weight_blindings);
    let init_blinding = secrets.blinding(&format!("{domain}/init"), 0);
    let init_commitment = commit(DomainTag::Value, &init_blinding, &init.canonical_bytes());

    Ok(TrainOutcome {
        weights,
        trace: super::TrainingTrace {
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
        prior_root: None,
    })
}

/// The result of an exact unlearning run.
#[derive(Debug)]
pub struct UnlearnOutcome {
    pub new_dataset: CommittedDataset,
    pub retrain: TrainOutcome,
    pub proof: UnlearningProof,
}

/// Evidence that one record was removed and the model retrained without
/// it: old-tree membership, new-tree non-membership, an exact leaf-list
/// difference, and a full training proof over the new root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnlearningProof {
    pub old_root: Digest,
    pub old_rows: u32,
    pub new_root: Digest,
    pub deleted_leaf: Digest,
    pub old_leaves: Vec<Digest>,
    pub new_leaves: Vec<Digest>,
    pub membership: MerklePath,
    pub non_membership: NonMembershipProof,
    pub retraining: TrainingProof,
    pub retrain_challenges: u32,
}

/// Deletes `deleted_leaf` from the dataset and retrains from `init` on
/// the remainder.
pub fn unlearn(
    dataset: &CommittedDataset,
    deleted_leaf: &Digest,
    spec: &ModelSpec,
    init: &ModelWeights,
    secrets: &Secrets,
    domain: &str,
    challenge_count: usize,
) -> Result<UnlearnOutcome, TrainError> {
    let index = dataset
        .tree
        .index_of(deleted_leaf)
        .ok_or(TrainError::RecordNotFound)?;
    let membership = dataset.tree.prove(index)?;
    let new_dataset = dataset
        .without_index(index)
        .map_err(|_| TrainError::RecordNotFound)?;
    let non_membership = new_dataset.tree.prove_non_membership(deleted_leaf)?;

    let retrain = train(&new_dataset, spec, init, secrets, domain)?;
    let retraining = prove_training(&retrain, &new_dataset, spec, challenge_count, false)?;

    let proof = UnlearningProof {
        old_root: dataset.root(),
        old_rows: dataset.len() as u32,
        new_root: new_dataset.root(),
        deleted_leaf: *deleted_leaf,
        old_leaves: dataset.tree.leaves().to_vec(),
        new_leaves: new_dataset.tree.leaves().to_vec(),
        membership,
        non_membership,
        retraining,
        retrain_challenges: challenge_count as u32,
    };
    Ok(UnlearnOutcome {
        new_dataset,
        retrain,
        proof,
    })
}

/// Verifies an unlearning proof against the public old/new roots and the
/// training spec.
pub fn verify_unlearning(
    proof: &UnlearningProof,
    old_root: &Digest,
    old_rows: usize,
    new_root: &Digest,
    spec: &ModelSpec,
) -> bool {
    if proof.old_root != *old_root
        || proof.new_root != *new_root
        || proof.old_rows as usize != old_rows
        || proof.old_leaves.len() != old_rows
    {
        return false;
    }
    // Opened leaf lists must rebuild both roots.
    match MerkleTree::from_leaf_digests(proof.old_leaves.clone()) {
        Ok(tree) if tree.root() == *old_root => {}
        _ => return false,
    }
    match MerkleTree::from_leaf_digests(proof.new_leaves.clone()) {
        Ok(tree) if tree.root() == *new_root => {}
        _ => return false,
    }
    // The new leaf list must be the old one minus exactly the deleted leaf.
    let Ok(position) = proof.old_leaves.binary_search(&proof.deleted_leaf) else {
        return false;
    };
    if proof.new_leaves.len() + 1 != proof.old_leaves.len() {
        return false;
    }
    let (before, after) = proof.old_leaves.split_at(position);
    if proof.new_leaves[..position] != *before || proof.new_leaves[position..] != after[1..] {
        return false;
    }

    if proof.membership.leaf_index as usize != position
        || !proof
            .membership
            .verify(old_root, old_rows, &proof.deleted_leaf)
    {
        return false;
    }
    if proof.non_membership.target != proof.deleted_leaf
        || !proof
            .non_membership
            .verify(new_root, proof.new_leaves.len())
    {
        return false;
    }

    let public = TrainPublic {
        dataset_root: *new_root,
        dataset_rows: proof.new_leaves.len(),
        spec: spec.clone(),
        init_commitment: proof.retraining.init_commitment,
        trace_root: proof.retraining.trace_root,
        chain_head: proof.retraining.chain_head,
        weights_root: proof.retraining.weights_root,
        prior_root: proof.retraining.prior_root,
        challenge_count: proof.retrain_challenges as usize,
        require_audit: false,
    };
    verify_training(&proof.retraining, &public)
}

// --- canonical binary serialization ---

fn write_opt_digest(w: &mut Writer, d: &Option<Digest>) {
    match d {
        Some(d) => {
            w.put_u8(1);
            w.put_digest(d);
        }
        None => w.put_u8(0),
    }
}

fn read_opt_digest(r: &mut Reader) -> Result<Option<Digest>, CodecError> {
    Ok(match r.get_u8()? {
        0 => None,
        1 => Some(r.get_digest()?),
        _ => return Err(CodecError::Invalid("option tag")),
    })
}

impl TrainingProof {
    pub fn write(&self, w: &mut Writer) {
        w.put_digest(&self.dataset_root);
        w.put_digest(&self.spec_hash);
        w.put_digest(&self.init_commitment);
        w.put_digest(&self.trace_root);
        w.put_digest(&self.chain_head);
        w.put_digest(&self.weights_root);
        write_opt_digest(w, &self.prior_root);
        w.put_u32(self.trace_leaves.len() as u32);
        for leaf in &self.trace_leaves {
            w.put_digest(leaf);
        }
        w.put_u32(self.challenges.len() as u32);
        for c in &self.challenges {
            w.put_u64(c.iteration);
            c.prev.write(w);
            c.state.write(w);
            w.put_u32(c.minibatch.len() as u32);
            for m in &c.minibatch {
                w.put_u32(m.index);
                w.put_fixed_bytes(&m.blinding);
                w.put_bytes(&m.record);
                m.path.write(w);
            }
            w.put_u32(c.z_acc.len() as u32);
            for &v in &c.z_acc {
                w.put_field(v);
            }
            w.put_u32(c.grad_acc.len() as u32);
            for &v in &c.grad_acc {
                w.put_field(v);
            }
        }
        match &self.init_blinding {
            Some(b) => {
                w.put_u8(1);
                w.put_fixed_bytes(b);
            }
            None => w.put_u8(0),
        }
        match &self.audit {
            Some(a) => {
                w.put_u8(1);
                w.put_u32(a.weight_blindings.len() as u32);
                for b in &a.weight_blindings {
                    w.put_fixed_bytes(b);
                }
                a.weights.write(w);
                a.final_state.write(w);
            }
            None => w.put_u8(0),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn read(r: &mut Reader) -> Result<Self, CodecError> {
        let dataset_root = r.get_digest()?;
        let spec_hash = r.get_digest()?;
        let init_commitment = r.get_digest()?;
        let trace_root = r.get_digest()?;
        let chain_head = r.get_digest()?;
        let weights_root = r.get_digest()?;
        let prior_root = read_opt_digest(r)?;
        let n_leaves = r.get_count()?;
        let mut trace_leaves = Vec::with_capacity(n_leaves);
        for _ in 0..n_leaves {
            trace_leaves.push(r.get_digest()?);
        }
        let n_challenges = r.get_count()?;
        let mut challenges = Vec::with_capacity(n_challenges);
        for _ in 0..n_challenges {
            let iteration = r.get_u64()?;
            let prev = StateOpening::read(r)?;
            let state = StateOpening::read(r)?;
            let n_batch = r.get_count()?;
            let mut minibatch = Vec::with_capacity(n_batch);
            for _ in 0..n_batch {
                minibatch.push(MinibatchOpening {
                    index: r.get_u32()?,
                    blinding: r.get_fixed_bytes()?,
                    record: r.get_bytes()?,
                    path: MerklePath::read(r)?,
                });
            }
            let nz = r.get_count()?;
            let mut z_acc = Vec::with_capacity(nz);
            for _ in 0..nz {
                z_acc.push(r.get_field()?);
            }
            let ng = r.get_count()?;
            let mut grad_acc = Vec::with_capacity(ng);
            for _ in 0..ng {
                grad_acc.push(r.get_field()?);
            }
            challenges.push(ChallengedIteration {
                iteration,
                prev,
                state,
                minibatch,
                z_acc,
                grad_acc,
            });
        }
        let init_blinding = match r.get_u8()? {
            0 => None,
            1 => Some(r.get_fixed_bytes()?),
            _ => return Err(CodecError::Invalid("option tag")),
        };
        let audit = match r.get_u8()? {
            0 => None,
            1 => {
                let nb = r.get_count()?;
                let mut weight_blindings = Vec::with_capacity(nb);
                for _ in 0..nb {
                    weight_blindings.push(r.get_fixed_bytes()?);
                }
                let weights = ModelWeights::read(r)?;
                let final_state = StateOpening::read(r)?;
                Some(AuditOpening {
                    weight_blindings,
                    weights,
                    final_state,
                })
            }
            _ => return Err(CodecError::Invalid("option tag")),
        };
        Ok(TrainingProof {
            dataset_root,
            spec_hash,
            init_commitment,
            trace_root,
            chain_head,
            weights_root,
            prior_root,
            trace_leaves,
            challenges,
            init_blinding,
            audit,
        })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let proof = Self::read(&mut r)?;
        r.finish()?;
        Ok(proof)
    }
}

impl UnlearningProof {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_digest(&self.old_root);
        w.put_u32(self.old_rows);
        w.put_digest(&self.new_root);
        w.put_digest(&self.deleted_leaf);
        w.put_u32(self.old_leaves.len() as u32);
        for leaf in &self.old_leaves {
            w.put_digest(leaf);
        }
        w.put_u32(self.new_leaves.len() as u32);
        for leaf in &self.new_leaves {
            w.put_digest(leaf);
        }
        self.membership.write(&mut w);
        self.non_membership.write(&mut w);
        self.retraining.write(&mut w);
        w.put_u32(self.retrain_challenges);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let old_root = r.get_digest()?;
        let old_rows = r.get_u32()?;
        let new_root = r.get_digest()?;
        let deleted_leaf = r.get_digest()?;
        let n_old = r.get_count()?;
        let mut old_leaves = Vec::with_capacity(n_old);
        for _ in 0..n_old {
            old_leaves.push(r.get_digest()?);
        }
        let n_new = r.get_count()?;
        let mut new_leaves = Vec::with_capacity(n_new);
        for _ in 0..n_new {
            new_leaves.push(r.get_digest()?);
        }
        let membership = MerklePath::read(&mut r)?;
        let non_membership = NonMembershipProof::read(&mut r)?;
        let retraining = TrainingProof::read(&mut r)?;
        let retrain_challenges = r.get_u32()?;
        r.finish()?;
        Ok(UnlearningProof {
            old_root,
            old_rows,
            new_root,
            deleted_leaf,
            old_leaves,
            new_leaves,
            membership,
            non_membership,
            retraining,
            retrain_challenges,
        })
    }
}
