//! End-to-end auditable machine-learning pipeline at desk scale.
//!
//! Every stage — raw-data provenance, transformation, training,
//! evaluation, inference, unlearning — consumes verified commitments
//! from the previous stage, executes deterministically over a prime
//! field, emits new commitments, and produces evidence of honest
//! execution. A verifier can check any single stage or the whole chain.
//!
//! The guide under `book/` walks through each concept; its code
//! snippets compile and run as doc-tests.

pub mod canonical;
pub mod codec;
pub mod commit;
pub mod dataset;
pub mod field;
pub mod inference;
pub mod manifest;
pub mod sumcheck;
pub mod train;
pub mod transform;
