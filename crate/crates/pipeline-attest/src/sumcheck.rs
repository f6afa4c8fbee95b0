//! Sum-check over multilinear extensions, and the matrix-product check
//! built on it.
//!
//! The protocol proves a claim of the form `sum over the boolean
//! hypercube of g(x) * h(x)`. Each round sends a degree-2 univariate
//! polynomial as three coefficients; challenges come from the shared
//! Fiat-Shamir transcript, labeled `sumcheck/round/i`. The verifier
//! finishes with a single evaluation of g and h at the challenge point
//! (it holds the tables in every use this crate makes of the protocol).
//!
//! `verify_matmul` reduces `C = A * B` over the field to one sum-check
//! instance at a random row/column point. It is self-contained: given
//! all three matrices it derives the point, plays both roles locally,
//! and accepts or rejects. Re-execution auditors use it to certify the
//! dot-product accumulators inside training and inference steps.

use crate::codec::{CodecError, Reader, Writer};
use crate::commit::{sha256, Transcript};
use crate::field::{FieldElement, FieldError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SumcheckError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A multilinear polynomial by its evaluations over the boolean
/// hypercube. Index bit `i` is variable `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearPoly {
    num_vars: usize,
    evals: Vec<FieldElement>,
}

impl MultilinearPoly {
    pub fn new(num_vars: usize, evals: Vec<FieldElement>) -> Result<Self, SumcheckError> {
        if evals.len() != 1usize << num_vars {
            return Err(SumcheckError::DimensionMismatch(format!(
                "expected 2^{num_vars} evaluations, got {}",
                evals.len()
            )));
        }
        Ok(MultilinearPoly { num_vars, evals })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn evals(&self) -> &[FieldElement] {
        &self.evals
    }

    pub fn hypercube_sum(&self) -> FieldElement {
        let mut acc = FieldElement::ZERO;
        for &e in &self.evals {
            acc += e;
        }
        acc
    }

    /// Multilinear extension value at an arbitrary field point, by
    /// iterative folding of one variable at a time.
    pub fn eval(&self, point: &[FieldElement]) -> Result<FieldElement, SumcheckError> {
        if point.len() != self.num_vars {
            return Err(SumcheckError::DimensionMismatch(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.num_vars
            )));
        }
        let mut table = self.evals.clone();
        for &t in point {
            let half = table.len() / 2;
            let mut next = Vec::with_capacity(half);
            for k in 0..half {
                let lo = table[2 * k];
                let hi = table[2 * k + 1];
                next.push(lo + t * (hi - lo));
            }
            table = next;
        }
        Ok(table[0])
    }

    fn fold(&self, r: FieldElement) -> MultilinearPoly {
        let half = self.evals.len() / 2;
        let mut next = Vec::with_capacity(half);
        for k in 0..half {
            let lo = self.evals[2 * k];
            let hi = self.evals[2 * k + 1];
            next.push(lo + r * (hi - lo));
        }
        MultilinearPoly {
            num_vars: self.num_vars - 1,
            evals: next,
        }
    }
}

/// Lagrange weights of a point over the hypercube: `weights[b] =
/// prod_i (b_i ? t_i : 1 - t_i)`. `MLE(f)(t) = sum_b weights[b] * f[b]`.
pub fn eq_weights(point: &[FieldElement]) -> Vec<FieldElement> {
    let mut weights = vec![FieldElement::ONE];
    for &t in point {
        let mut next = Vec::with_capacity(weights.len() * 2);
        for &w in &weights {
            next.push(w * (FieldElement::ONE - t));
            next.push(w * t);
        }
        weights = next;
    }
    weights
}

/// Transcript of a completed sum-check run on a product of two
/// multilinears: the claim, one coefficient triple per round, and the
/// challenge point the run ended at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumcheckProof {
    pub claimed_sum: FieldElement,
    pub rounds: Vec<[FieldElement; 3]>,
    pub final_point: Vec<FieldElement>,
}

impl SumcheckProof {
    pub fn write(&self, w: &mut Writer) {
        w.put_field(self.claimed_sum);
        w.put_u32(self.rounds.len() as u32);
        for round in &self.rounds {
            for &c in round {
                w.put_field(c);
            }
        }
        for &p in &self.final_point {
            w.put_field(p);
        }
    }

    pub fn read(r: &mut Reader) -> Result<Self, CodecError> {
        let claimed_sum = r.get_field()?;
        let m = r.get_count()?;
        let mut rounds = Vec::with_capacity(m);
        for _ in 0..m {
            rounds.push([r.get_field()?, r.get_field()?, r.get_field()?]);
        }
        let mut final_point = Vec::with_capacity(m);
        for _ in 0..m {
            final_point.push(r.get_field()?);
        }
        Ok(SumcheckProof {
            claimed_sum,
            rounds,
            final_point,
        })
    }
}

fn round_coefficients(g: &MultilinearPoly, h: &MultilinearPoly) -> [FieldElement; 3] {
    // Pair (g0 + bt)(h0 + dt) contributes coefficient-wise; summing pairs
    // gives the exact degree-2 round polynomial with no division.
    let mut c0 = FieldElement::ZERO;
    let mut c1 = FieldElement::ZERO;
    let mut c2 = FieldElement::ZERO;
    let half = g.evals.len() / 2;
    for k in 0..half {
        let a = g.evals[2 * k];
        let b = g.evals[2 * k + 1] - a;
        let c = h.evals[2 * k];
        let d = h.evals[2 * k + 1] - c;
        c0 += a * c;
        c1 += a * d + b * c;
        c2 += b * d;
    }
    [c0, c1, c2]
}

fn eval_round(coeffs: &[FieldElement; 3], t: FieldElement) -> FieldElement {
    coeffs[0] + coeffs[1] * t + coeffs[2] * t * t
}

fn absorb_round(transcript: &mut Transcript, index: usize, coeffs: &[FieldElement; 3]) {
    let mut bytes = Vec::with_capacity(24);
    for c in coeffs {
        bytes.extend_from_slice(&c.to_le_bytes());
    }
    transcript.absorb(&format!("sumcheck/round/{index}"), &bytes);
}

/// Proves `claimed = sum g(x) h(x)` where `claimed` is the true sum.
pub fn prove_product(
    g: &MultilinearPoly,
    h: &MultilinearPoly,
    transcript: &mut Transcript,
) -> Result<SumcheckProof, SumcheckError> {
    let mut claimed = FieldElement::ZERO;
    for (a, b) in g.evals.iter().zip(&h.evals) {
        claimed += *a * *b;
    }
    prove_product_with_claim(g, h, claimed, transcript)
}

/// Runs the prover rounds against an externally supplied claim. The
/// rounds are always honest for (g, h); if the claim disagrees with the
/// true sum the resulting proof cannot verify. This is exactly what the
/// matrix check needs: the claim comes from C, the rounds from A and B.
pub fn prove_product_with_claim(
    g: &MultilinearPoly,
    h: &MultilinearPoly,
    claimed: FieldElement,
    transcript: &mut Transcript,
) -> Result<SumcheckProof, SumcheckError> {
    if g.num_vars != h.num_vars {
        return Err(SumcheckError::DimensionMismatch(format!(
            "g has {} variables, h has {}",
            g.num_vars, h.num_vars
        )));
    }
    transcript.absorb_field("sumcheck/claim", claimed);
    let m = g.num_vars;
    let mut g_cur = g.clone();
    let mut h_cur = h.clone();
    let mut rounds = Vec::with_capacity(m);
    let mut final_point = Vec::with_capacity(m);
    for i in 0..m {
        let coeffs = round_coefficients(&g_cur, &h_cur);
        absorb_round(transcript, i, &coeffs);
        let r = transcript.challenge_field();
        rounds.push(coeffs);
        final_point.push(r);
        g_cur = g_cur.fold(r);
        h_cur = h_cur.fold(r);
    }
    Ok(SumcheckProof {
        claimed_sum: claimed,
        rounds,
        final_point,
    })
}

/// Verifies a sum-check proof. `final_eval` must return g(r) * h(r) at
/// the final challenge point; in this crate the verifier holds the
/// evaluation tables and computes it directly.
pub fn verify_product<F>(
    claimed_sum: FieldElement,
    proof: &SumcheckProof,
    transcript: &mut Transcript,
    final_eval: F,
) -> bool
where
    F: FnOnce(&[FieldElement]) -> Option<FieldElement>,
{
    if proof.claimed_sum != claimed_sum {
        return false;
    }
    let m = proof.rounds.len();
    if proof.final_point.len() != m {
        return false;
    }
    transcript.absorb_field("sumcheck/claim", claimed_sum);
    let mut expected = claimed_sum;
    let mut point = Vec::with_capacity(m);
    for (i, coeffs) in proof.rounds.iter().enumerate() {
        // s_i(0) + s_i(1) must match the running expectation
        let at_zero = coeffs[0];
        let at_one = coeffs[0] + coeffs[1] + coeffs[2];
        if at_zero + at_one != expected {
            return false;
        }
        absorb_round(transcript, i, coeffs);
        let r = transcript.challenge_field();
        if proof.final_point[i] != r {
            return false;
        }
        expected = eval_round(coeffs, r);
        point.push(r);
    }
    match final_eval(&point) {
        Some(value) => value == expected,
        None => false,
    }
}

/// A row-major matrix of field elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<FieldElement>) -> Result<Self, SumcheckError> {
        if data.len() != rows * cols {
            return Err(SumcheckError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> FieldElement) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                FieldElement::ONE
            } else {
                FieldElement::ZERO
            }
        })
    }

    pub fn get(&self, row: usize, col: usize) -> FieldElement {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: FieldElement) {
        self.data[row * self.cols + col] = value;
    }

    /// Plain field matrix product; the comparison baseline for the
    /// sum-check route.
    pub fn multiply(&self, rhs: &Matrix) -> Result<Matrix, SumcheckError> {
        if self.cols != rhs.rows {
            return Err(SumcheckError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = FieldElement::ZERO;
            for k in 0..self.cols {
                acc += self.get(r, k) * rhs.get(k, c);
            }
            acc
        }))
    }

    fn content_hash(&self) -> crate::commit::Digest {
        let mut bytes = Vec::with_capacity(16 + self.data.len() * 8);
        bytes.extend_from_slice(&(self.rows as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        sha256(&[&bytes])
    }

    fn padded(&self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |r, c| {
            if r < self.rows && c < self.cols {
                self.get(r, c)
            } else {
                FieldElement::ZERO
            }
        })
    }
}

fn next_power_of_two(n: usize) -> usize {
    n.next_power_of_two().max(1)
}

/// Checks `c == a * b` by one sum-check at a transcript-derived random
/// point. Dimensions are padded to powers of two internally. Returns
/// `Ok(false)` on any mismatch that a cheating prover could have caused;
/// `Err` only for malformed dimensions.
pub fn verify_matmul(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    transcript: &mut Transcript,
) -> Result<bool, SumcheckError> {
    if a.cols != b.rows || c.rows != a.rows || c.cols != b.cols {
        return Err(SumcheckError::DimensionMismatch(format!(
            "a: {}x{}, b: {}x{}, c: {}x{}",
            a.rows, a.cols, b.rows, b.cols, c.rows, c.cols
        )));
    }
    let rows = next_power_of_two(a.rows);
    let inner = next_power_of_two(a.cols);
    let cols = next_power_of_two(b.cols);
    let ap = a.padded(rows, inner);
    let bp = b.padded(inner, cols);
    let cp = c.padded(rows, cols);

    transcript.absorb_u64("matmul/rows", rows as u64);
    transcript.absorb_u64("matmul/inner", inner as u64);
    transcript.absorb_u64("matmul/cols", cols as u64);
    transcript.absorb_digest("matmul/a", &ap.content_hash());
    transcript.absorb_digest("matmul/b", &bp.content_hash());
    transcript.absorb_digest("matmul/c", &cp.content_hash());

    let row_point: Vec<FieldElement> = (0..rows.trailing_zeros())
        .map(|_| transcript.challenge_field())
        .collect();
    let col_point: Vec<FieldElement> = (0..cols.trailing_zeros())
        .map(|_| transcript.challenge_field())
        .collect();
    let w_rows = eq_weights(&row_point);
    let w_cols = eq_weights(&col_point);

    // g(y) = A~(row_point, y), h(y) = B~(y, col_point)
    let mut g = vec![FieldElement::ZERO; inner];
    for (x, &wx) in w_rows.iter().enumerate() {
        for (y, slot) in g.iter_mut().enumerate() {
            *slot += wx * ap.get(x, y);
        }
    }
    let mut h = vec![FieldElement::ZERO; inner];
    for (y, slot) in h.iter_mut().enumerate() {
        for (z, &wz) in w_cols.iter().enumerate() {
            *slot += bp.get(y, z) * wz;
        }
    }
    // claimed = C~(row_point, col_point)
    let mut claimed = FieldElement::ZERO;
    for (x, &wx) in w_rows.iter().enumerate() {
        for (z, &wz) in w_cols.iter().enumerate() {
            claimed += wx * cp.get(x, z) * wz;
        }
    }

    let g_poly = MultilinearPoly::new(inner.trailing_zeros() as usize, g)?;
    let h_poly = MultilinearPoly::new(inner.trailing_zeros() as usize, h)?;

    let mut prover_transcript = transcript.clone();
    let proof = prove_product_with_claim(&g_poly, &h_poly, claimed, &mut prover_transcript)?;
    Ok(verify_product(claimed, &proof, transcript, |point| {
        let gr = g_poly.eval(point).ok()?;
        let hr = h_poly.eval(point).ok()?;
        Some(gr * hr)
    }))
}
