//! Fiat-Shamir transcript and the deterministic hash stream used for
//! shuffles.
//!
//! A transcript is a running tagged SHA-256 state over length-prefixed,
//! labeled messages. Challenges are squeezed by hashing `state || counter`
//! and never feed back into the state, so the challenge stream is a pure
//! function of the absorbed history.

use super::{sha256, Digest, DomainTag};
use crate::field::{FieldElement, MODULUS};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("cannot draw {count} distinct indices from a range of {range}")]
    TooManyIndices { count: usize, range: usize },
}

#[derive(Debug, Clone)]
pub struct Transcript {
    state: [u8; 32],
    counter: u64,
}

impl Transcript {
    pub fn new(domain: &str) -> Self {
        let state = sha256(&[
            &[DomainTag::Transcript as u8],
            b"init",
            &(domain.len() as u32).to_le_bytes(),
            domain.as_bytes(),
        ]);
        Transcript {
            state: *state.as_bytes(),
            counter: 0,
        }
    }

    pub fn absorb(&mut self, label: &str, message: &[u8]) {
        let state = sha256(&[
            &[DomainTag::Transcript as u8],
            &self.state,
            &(label.len() as u32).to_le_bytes(),
            label.as_bytes(),
            &(message.len() as u32).to_le_bytes(),
            message,
        ]);
        self.state = *state.as_bytes();
    }

    pub fn absorb_digest(&mut self, label: &str, digest: &Digest) {
        self.absorb(label, digest.as_bytes());
    }

    pub fn absorb_field(&mut self, label: &str, value: FieldElement) {
        self.absorb(label, &value.to_le_bytes());
    }

    pub fn absorb_u64(&mut self, label: &str, value: u64) {
        self.absorb(label, &value.to_le_bytes());
    }

    fn squeeze(&mut self) -> [u8; 32] {
        let h = sha256(&[&self.state, &self.counter.to_le_bytes()]);
        self.counter += 1;
        *h.as_bytes()
    }

    fn squeeze_u64(&mut self) -> u64 {
        let h = self.squeeze();
        u64::from_le_bytes(h[..8].try_into().unwrap())
    }

    /// A uniform field element, via rejection sampling on the low 8 bytes
    /// of each squeeze.
    pub fn challenge_field(&mut self) -> FieldElement {
        loop {
            let v = self.squeeze_u64();
            if v < MODULUS {
                return FieldElement::new(v);
            }
        }
    }

    /// `count` distinct indices in `[0, range)`, drawn by repeated
    /// reduction mod `range` with duplicates discarded, returned in
    /// ascending order.
    pub fn challenge_indices(
        &mut self,
        count: usize,
        range: usize,
    ) -> Result<Vec<u32>, TranscriptError> {
        if count > range {
            return Err(TranscriptError::TooManyIndices { count, range });
        }
        let mut seen = BTreeSet::new();
        while seen.len() < count {
            let v = (self.squeeze_u64() % range as u64) as u32;
            seen.insert(v);
        }
        Ok(seen.into_iter().collect())
    }
}

/// Deterministic byte stream: block `i` is SHA-256(prefix || i), consumed
/// eight bytes at a time. Drives the Fisher-Yates shuffles for dataset
/// splits and epoch permutations.
#[derive(Debug, Clone)]
pub struct HashStream {
    prefix: Vec<u8>,
    counter: u64,
}

impl HashStream {
    pub fn new(prefix: Vec<u8>) -> Self {
        HashStream { prefix, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let h = sha256(&[&self.prefix, &self.counter.to_le_bytes()]);
        self.counter += 1;
        u64::from_le_bytes(h.as_bytes()[..8].try_into().unwrap())
    }

    /// In-place Fisher-Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<u32> {
        let mut out: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            out.swap(i, j);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_absorbs_give_identical_challenges() {
        let mut a = Transcript::new("test");
        let mut b = Transcript::new("test");
        for t in [&mut a, &mut b] {
            t.absorb("first", b"hello");
            t.absorb("second", b"world");
        }
        assert_eq!(a.challenge_field(), b.challenge_field());
        assert_eq!(
            a.challenge_indices(3, 10).unwrap(),
            b.challenge_indices(3, 10).unwrap()
        );
    }

    #[test]
    fn one_byte_difference_diverges() {
        let mut a = Transcript::new("test");
        let mut b = Transcript::new("test");
        a.absorb("msg", b"hello");
        b.absorb("msg", b"hellp");
        assert_ne!(a.challenge_field(), b.challenge_field());
    }

    #[test]
    fn domain_and_label_separation() {
        let mut a = Transcript::new("one");
        let mut b = Transcript::new("two");
        assert_ne!(a.challenge_field(), b.challenge_field());

        let mut c = Transcript::new("x");
        let mut d = Transcript::new("x");
        c.absorb("label-a", b"m");
        d.absorb("label-b", b"m");
        assert_ne!(c.challenge_field(), d.challenge_field());
    }

    #[test]
    fn full_range_draw_is_complete_set() {
        let mut t = Transcript::new("indices");
        t.absorb("ctx", b"anything");
        let idx = t.challenge_indices(8, 8).unwrap();
        assert_eq!(idx, (0..8).collect::<Vec<u32>>());
    }

    #[test]
    fn too_many_indices_rejected() {
        let mut t = Transcript::new("indices");
        assert!(matches!(
            t.challenge_indices(9, 8),
            Err(TranscriptError::TooManyIndices { count: 9, range: 8 })
        ));
    }

    #[test]
    fn indices_sorted_and_distinct() {
        let mut t = Transcript::new("indices");
        t.absorb("ctx", b"seed");
        let idx = t.challenge_indices(20, 100).unwrap();
        assert_eq!(idx.len(), 20);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn hash_stream_is_deterministic() {
        let mut a = HashStream::new(b"prefix".to_vec());
        let mut b = HashStream::new(b"prefix".to_vec());
        assert_eq!(a.next_u64(), b.next_u64());
        assert_eq!(a.permutation(10), b.permutation(10));
        let mut c = HashStream::new(b"other".to_vec());
        assert_ne!(HashStream::new(b"prefix".to_vec()).permutation(10), c.permutation(10));
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut s = HashStream::new(b"p".to_vec());
        let perm = s.permutation(50);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<u32>>());
    }
}
