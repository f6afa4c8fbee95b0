//! Merkle trees with membership proofs, plus sorted-leaf trees carrying
//! non-membership proofs between adjacent neighbors.
//!
//! Node rules: leaf = SHA-256(0x00 || payload), inner = SHA-256(0x01 ||
//! left || right). A level with an odd node count duplicates its last
//! node. Verification takes the public leaf count; without it the
//! duplication rule would let a path for a duplicated phantom position
//! pass, and boundary non-membership could not pin the last index.

use super::{tagged_hash, Digest, DomainTag};
use crate::codec::{CodecError, Reader, Writer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MerkleError {
    #[error("cannot build a tree from an empty leaf set")]
    EmptyLeafSet,
    #[error("leaf index {index} out of range for {count} leaves")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("target is present in the tree")]
    TargetPresent,
}

/// Which side a path sibling sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn to_byte(self) -> u8 {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    fn from_byte(b: u8) -> Result<Self, CodecError> {
        match b {
            0 => Ok(Side::Left),
            1 => Ok(Side::Right),
            _ => Err(CodecError::Invalid("side flag")),
        }
    }
}

/// Hashes a leaf payload into its leaf node digest.
pub fn leaf_digest(payload: &[u8]) -> Digest {
    tagged_hash(DomainTag::Leaf, &[payload])
}

fn node_digest(left: &Digest, right: &Digest) -> Digest {
    tagged_hash(DomainTag::Node, &[left.as_bytes(), right.as_bytes()])
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (n - 1).ilog2() as usize + 1
    }
}

/// A fully materialized Merkle tree. `levels[0]` holds the leaf digests.
#[derive(Debug, Clone)]
pub struct MerkleTree {
    levels: Vec<Vec<Digest>>,
}

impl MerkleTree {
    pub fn from_leaf_digests(leaves: Vec<Digest>) -> Result<Self, MerkleError> {
        if leaves.is_empty() {
            return Err(MerkleError::EmptyLeafSet);
        }
        let mut levels = vec![leaves];
        while levels.last().unwrap().len() > 1 {
            let cur = levels.last().unwrap();
            let mut next = Vec::with_capacity((cur.len() + 1) / 2);
            for pair in cur.chunks(2) {
                let left = &pair[0];
                let right = pair.get(1).unwrap_or(left); // odd level: duplicate last
                next.push(node_digest(left, right));
            }
            levels.push(next);
        }
        Ok(MerkleTree { levels })
    }

    pub fn from_payloads<I, B>(payloads: I) -> Result<Self, MerkleError>
    where
        I: IntoIterator<Item = B>,
        B: AsRef<[u8]>,
    {
        let leaves = payloads
            .into_iter()
            .map(|p| leaf_digest(p.as_ref()))
            .collect();
        Self::from_leaf_digests(leaves)
    }

    pub fn root(&self) -> Digest {
        self.levels.last().unwrap()[0]
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn leaves(&self) -> &[Digest] {
        &self.levels[0]
    }

    pub fn prove(&self, index: usize) -> Result<MerklePath, MerkleError> {
        let count = self.leaf_count();
        if index >= count {
            return Err(MerkleError::IndexOutOfRange { index, count });
        }
        let mut siblings = Vec::with_capacity(ceil_log2(count));
        let mut idx = index;
        for level in &self.levels[..self.levels.len() - 1] {
            let sib_idx = idx ^ 1;
            let sibling = if sib_idx < level.len() {
                level[sib_idx]
            } else {
                level[idx] // duplicated last node
            };
            let side = if idx % 2 == 0 { Side::Right } else { Side::Left };
            siblings.push((sibling, side));
            idx /= 2;
        }
        Ok(MerklePath {
            leaf_index: index as u32,
            siblings,
        })
    }
}

/// An authentication path from a leaf to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerklePath {
    pub leaf_index: u32,
    pub siblings: Vec<(Digest, Side)>,
}

impl MerklePath {
    /// Checks the path against a root for a tree of `leaf_count` leaves.
    /// The index must be in range, the path length must match the tree
    /// depth, and each stored side flag must agree with the index bits.
    pub fn verify(&self, root: &Digest, leaf_count: usize, leaf: &Digest) -> bool {
        let index = self.leaf_index as usize;
        if index >= leaf_count || self.siblings.len() != ceil_log2(leaf_count) {
            return false;
        }
        let mut current = *leaf;
        let mut idx = index;
        for (sibling, side) in &self.siblings {
            let expected = if idx % 2 == 0 { Side::Right } else { Side::Left };
            if *side != expected {
                return false;
            }
            current = match side {
                Side::Left => node_digest(sibling, &current),
                Side::Right => node_digest(&current, sibling),
            };
            idx /= 2;
        }
        current == *root
    }

    /// Convenience: hashes the payload into a leaf first.
    pub fn verify_payload(&self, root: &Digest, leaf_count: usize, payload: &[u8]) -> bool {
        self.verify(root, leaf_count, &leaf_digest(payload))
    }

    pub fn write(&self, w: &mut Writer) {
        w.put_u32(self.leaf_index);
        w.put_u32(self.siblings.len() as u32);
        for (digest, side) in &self.siblings {
            w.put_digest(digest);
            w.put_u8(side.to_byte());
        }
    }

    pub fn read(r: &mut Reader) -> Result<Self, CodecError> {
        let leaf_index = r.get_u32()?;
        let n = r.get_count()?;
        let mut siblings = Vec::with_capacity(n);
        for _ in 0..n {
            let digest = r.get_digest()?;
            let side = Side::from_byte(r.get_u8()?)?;
            siblings.push((digest, side));
        }
        Ok(MerklePath {
            leaf_index,
            siblings,
        })
    }
}

/// A Merkle tree whose leaves are strictly sorted and deduplicated, the
/// shape that supports non-membership evidence.
#[derive(Debug, Clone)]
pub struct SortedMerkleTree {
    tree: MerkleTree,
}

impl SortedMerkleTree {
    /// Sorts and deduplicates the given leaf digests, then builds the tree.
    pub fn from_leaf_digests(mut leaves: Vec<Digest>) -> Result<Self, MerkleError> {
        leaves.sort();
        leaves.dedup();
        Ok(SortedMerkleTree {
            tree: MerkleTree::from_leaf_digests(leaves)?,
        })
    }

    pub fn tree(&self) -> &MerkleTree {
        &self.tree
    }

    pub fn root(&self) -> Digest {
        self.tree.root()
    }

    pub fn leaf_count(&self) -> usize {
        self.tree.leaf_count()
    }

    pub fn leaves(&self) -> &[Digest] {
        self.tree.leaves()
    }

    pub fn index_of(&self, target: &Digest) -> Option<usize> {
        self.tree.leaves().binary_search(target).ok()
    }

    pub fn prove(&self, index: usize) -> Result<MerklePath, MerkleError> {
        self.tree.prove(index)
    }

    /// Builds adjacency evidence that `target` is not a leaf. Extremes are
    /// handled by virtual all-0x00 / all-0xFF sentinel leaves: a missing
    /// neighbor pins the present one to the first or last index.
    pub fn prove_non_membership(&self, target: &Digest) -> Result<NonMembershipProof, MerkleError> {
        let leaves = self.tree.leaves();
        match leaves.binary_search(target) {
            Ok(_) => Err(MerkleError::TargetPresent),
            Err(insert_at) => {
                let left = if insert_at > 0 {
                    let idx = insert_at - 1;
                    Some(NeighborProof {
                        leaf: leaves[idx],
                        path: self.tree.prove(idx)?,
                    })
                } else {
                    None
                };
                let right = if insert_at < leaves.len() {
                    Some(NeighborProof {
                        leaf: leaves[insert_at],
                        path: self.tree.prove(insert_at)?,
                    })
                } else {
                    None
                };
                Ok(NonMembershipProof {
                    target: *target,
                    left,
                    right,
                })
            }
        }
    }
}

/// One opened neighbor leaf with its authentication path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborProof {
    pub leaf: Digest,
    pub path: MerklePath,
}

/// Evidence that a digest is absent from a sorted-leaf tree: its would-be
/// neighbors are adjacent and bracket it strictly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonMembershipProof {
    pub target: Digest,
    pub left: Option<NeighborProof>,
    pub right: Option<NeighborProof>,
}

impl NonMembershipProof {
    pub fn verify(&self, root: &Digest, leaf_count: usize) -> bool {
        let sentinel_low = Digest::zero();
        let sentinel_high = Digest::new([0xff; 32]);
        match (&self.left, &self.right) {
            (Some(left), Some(right)) => {
                left.leaf < self.target
                    && self.target < right.leaf
                    && right.path.leaf_index == left.path.leaf_index + 1
                    && left.path.verify(root, leaf_count, &left.leaf)
                    && right.path.verify(root, leaf_count, &right.leaf)
            }
            (None, Some(right)) => {
                sentinel_low < self.target
                    && self.target < right.leaf
                    && right.path.leaf_index == 0
                    && right.path.verify(root, leaf_count, &right.leaf)
            }
            (Some(left), None) => {
                left.leaf < self.target
                    && self.target < sentinel_high
                    && left.path.leaf_index as usize == leaf_count - 1
                    && left.path.verify(root, leaf_count, &left.leaf)
            }
            (None, None) => false,
        }
    }

    pub fn write(&self, w: &mut Writer) {
        w.put_digest(&self.target);
        for neighbor in [&self.left, &self.right] {
            match neighbor {
                Some(n) => {
                    w.put_u8(1);
                    w.put_digest(&n.leaf);
                    n.path.write(w);
                }
                None => w.put_u8(0),
            }
        }
    }

    pub fn read(r: &mut Reader) -> Result<Self, CodecError> {
        let target = r.get_digest()?;
        let mut neighbors = [None, None];
        for slot in &mut neighbors {
            if r.get_u8()? == 1 {
                let leaf = r.get_digest()?;
                let path = MerklePath::read(r)?;
                *slot = Some(NeighborProof { leaf, path });
            }
        }
        let [left, right] = neighbors;
        Ok(NonMembershipProof {
            target,
            left,
            right,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commit::sha256;

    /// Independent recursive oracle for the root, sharing no code with the
    /// level-building implementation above.
    fn oracle_root(leaves: &[Digest]) -> Digest {
        fn go(nodes: &[Digest]) -> Digest {
            if nodes.len() == 1 {
                return nodes[0];
            }
            let mut next = Vec::new();
            let mut i = 0;
            while i < nodes.len() {
                let left = nodes[i];
                let right = if i + 1 < nodes.len() { nodes[i + 1] } else { nodes[i] };
                let mut input = vec![0x01u8];
                input.extend_from_slice(left.as_bytes());
                input.extend_from_slice(right.as_bytes());
                next.push(sha256(&[&input]));
                i += 2;
            }
            go(&next)
        }
        go(leaves)
    }

    fn payloads(n: usize) -> Vec<Vec<u8>> {
        (0..n).map(|i| format!("leaf-{i}").into_bytes()).collect()
    }

    #[test]
    fn single_leaf_root_is_leaf_hash() {
        let tree = MerkleTree::from_payloads([b"only".as_slice()]).unwrap();
        let mut input = vec![0x00u8];
        input.extend_from_slice(b"only");
        assert_eq!(tree.root(), sha256(&[&input]));
        let path = tree.prove(0).unwrap();
        assert!(path.siblings.is_empty());
        assert!(path.verify_payload(&tree.root(), 1, b"only"));
    }

    #[test]
    fn roots_match_recursive_oracle() {
        for n in 1..=16 {
            let tree = MerkleTree::from_payloads(payloads(n)).unwrap();
            assert_eq!(tree.root(), oracle_root(tree.leaves()), "n = {n}");
        }
    }

    #[test]
    fn odd_count_duplicates_last_leaf() {
        let tree = MerkleTree::from_payloads(payloads(3)).unwrap();
        let leaves = tree.leaves().to_vec();
        // Oracle with the duplication applied by hand at level 0.
        let padded = vec![leaves[0], leaves[1], leaves[2], leaves[2]];
        assert_eq!(tree.root(), oracle_root(&padded));
    }

    #[test]
    fn empty_leaf_set_rejected() {
        assert!(matches!(
            MerkleTree::from_payloads(Vec::<Vec<u8>>::new()),
            Err(MerkleError::EmptyLeafSet)
        ));
    }

    #[test]
    fn honest_paths_verify_and_corruptions_fail() {
        for n in 1..=16 {
            let data = payloads(n);
            let tree = MerkleTree::from_payloads(&data).unwrap();
            for i in 0..n {
                let path = tree.prove(i).unwrap();
                assert!(path.verify_payload(&tree.root(), n, &data[i]));

                // corrupt the leaf payload
                let mut bad = data[i].clone();
                bad[0] ^= 1;
                assert!(!path.verify_payload(&tree.root(), n, &bad));

                // corrupt each sibling digest
                for k in 0..path.siblings.len() {
                    let mut tampered = path.clone();
                    let mut bytes = *tampered.siblings[k].0.as_bytes();
                    bytes[0] ^= 1;
                    tampered.siblings[k].0 = Digest::new(bytes);
                    assert!(!tampered.verify_payload(&tree.root(), n, &data[i]));
                }
            }
        }
    }

    #[test]
    fn path_for_wrong_leaf_fails_all_pairs() {
        let n = 8;
        let data = payloads(n);
        let tree = MerkleTree::from_payloads(&data).unwrap();
        for i in 0..n {
            let path = tree.prove(i).unwrap();
            for j in 0..n {
                let ok = path.verify_payload(&tree.root(), n, &data[j]);
                assert_eq!(ok, i == j, "path {i} vs leaf {j}");
            }
        }
    }

    #[test]
    fn index_tampering_fails() {
        let n = 8;
        let data = payloads(n);
        let tree = MerkleTree::from_payloads(&data).unwrap();
        for i in 0..n {
            let path = tree.prove(i).unwrap();
            for bit in 0..8 {
                let mut tampered = path.clone();
                tampered.leaf_index ^= 1 << bit;
                assert!(
                    !tampered.verify_payload(&tree.root(), n, &data[i]),
                    "index {i} bit {bit}"
                );
            }
        }
    }

    #[test]
    fn prove_out_of_range() {
        let tree = MerkleTree::from_payloads(payloads(4)).unwrap();
        assert!(matches!(
            tree.prove(4),
            Err(MerkleError::IndexOutOfRange { index: 4, count: 4 })
        ));
    }

    fn sorted_tree(n: usize) -> (SortedMerkleTree, Vec<Digest>) {
        let leaves: Vec<Digest> = (0..n)
            .map(|i| leaf_digest(format!("item-{i}").as_bytes()))
            .collect();
        let tree = SortedMerkleTree::from_leaf_digests(leaves).unwrap();
        let sorted = tree.leaves().to_vec();
        (tree, sorted)
    }

    #[test]
    fn non_membership_between_neighbors() {
        let (tree, sorted) = sorted_tree(6);
        // A target strictly between leaves 2 and 3.
        let mut bytes = *sorted[2].as_bytes();
        bytes[31] = bytes[31].wrapping_add(1);
        let target = Digest::new(bytes);
        assert!(sorted.binary_search(&target).is_err(), "test target collided");
        let proof = tree.prove_non_membership(&target).unwrap();
        assert!(proof.verify(&tree.root(), tree.leaf_count()));

        // Brute-force oracle: verification must equal NOT membership.
        let member = sorted[3];
        assert!(matches!(
            tree.prove_non_membership(&member),
            Err(MerkleError::TargetPresent)
        ));
    }

    #[test]
    fn non_membership_extremes_use_sentinels() {
        let (tree, sorted) = sorted_tree(5);
        let below = Digest::new([0u8; 32]);
        let above = Digest::new([0xfe; 32]);
        assert!(below < sorted[0] && above > *sorted.last().unwrap());

        let p = tree.prove_non_membership(&below);
        // all-zero target equals the low sentinel, so it cannot be proven;
        // anything strictly above it can.
        assert!(p.is_err() || !p.unwrap().verify(&tree.root(), 5) || below != Digest::zero());
        let mut bytes = [0u8; 32];
        bytes[31] = 1;
        let low = Digest::new(bytes);
        if sorted.binary_search(&low).is_err() && low < sorted[0] {
            let proof = tree.prove_non_membership(&low).unwrap();
            assert!(proof.left.is_none());
            assert!(proof.verify(&tree.root(), 5));
        }

        let proof = tree.prove_non_membership(&above).unwrap();
        assert!(proof.right.is_none());
        assert!(proof.verify(&tree.root(), 5));
    }

    #[test]
    fn non_adjacent_neighbors_rejected() {
        let (tree, sorted) = sorted_tree(6);
        let mut bytes = *sorted[2].as_bytes();
        bytes[31] = bytes[31].wrapping_add(1);
        let target = Digest::new(bytes);
        let mut proof = tree.prove_non_membership(&target).unwrap();
        // Swap the right neighbor for a farther leaf: ordering still holds
        // but adjacency breaks.
        proof.right = Some(NeighborProof {
            leaf: sorted[4],
            path: tree.prove(4).unwrap(),
        });
        assert!(!proof.verify(&tree.root(), tree.leaf_count()));
    }

    #[test]
    fn exhaustive_non_membership_eight_leaves() {
        let (tree, sorted) = sorted_tree(8);
        // Probe every leaf and a neighborhood of perturbed targets.
        for leaf in &sorted {
            assert!(matches!(
                tree.prove_non_membership(leaf),
                Err(MerkleError::TargetPresent)
            ));
            for delta in [1u8, 2, 0x80] {
                let mut bytes = *leaf.as_bytes();
                bytes[31] = bytes[31].wrapping_add(delta);
                let target = Digest::new(bytes);
                let is_member = sorted.binary_search(&target).is_ok();
                match tree.prove_non_membership(&target) {
                    Ok(proof) => {
                        assert!(!is_member);
                        assert!(proof.verify(&tree.root(), 8));
                    }
                    Err(MerkleError::TargetPresent) => assert!(is_member),
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }

    #[test]
    fn path_codec_roundtrip() {
        let tree = MerkleTree::from_payloads(payloads(7)).unwrap();
        let path = tree.prove(5).unwrap();
        let mut w = Writer::new();
        path.write(&mut w);
        let buf = w.finish();
        let mut r = Reader::new(&buf);
        let back = MerklePath::read(&mut r).unwrap();
        r.finish().unwrap();
        assert_eq!(path, back);
    }
}
