//! Poisson-kernel dilation of pure tuples:
//! `K h = Σ_α e^α ⊗ Δ_T (T^α)* h` into `Γ_A ⊗ range(Δ_T)`, with dilation `S_i ⊗ I`.
//!
//! The embedding is stored block-wise, one `rank(Δ) × d` block per admissible
//! word, and words `α` with `T^α = 0` are pruned together with all their
//! extensions. Non-pure tuples can be handled through `rT` for a caller-chosen
//! `r < 1`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dilate::kernel::dilate_kernel;
use crate::dilate::{DilationResult, Method};
use crate::error::{Error, Result};
use crate::fock::TruncatedFock;
use crate::linalg::{identity, kron, op_norm, orth, zeros, CMat};
use crate::tuples::{defect, eval_word, purity_profile, OperatorTuple};
use crate::words::{admissible_up_to, TransitionMatrix, Word};

/// Words whose operator norm falls below this are treated as vanishing.
const PRUNE: f64 = 1e-15;

/// Dense realizations are refused above this dimension.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Debug)]
pub struct PoissonDilation {
    a: TransitionMatrix,
    /// The tuple actually dilated (`T` or `rT`).
    tuple: OperatorTuple,
    level: usize,
    r: Option<f64>,
    /// `Δ` of the dilated tuple.
    defect: CMat,
    /// Orthonormal frame of `range(Δ)`.
    defect_frame: CMat,
    words: Vec<Word>,
    index: HashMap<Word, usize>,
    blocks: Vec<CMat>,
    /// `p_1, …, p_{N+1}` of the dilated tuple.
    profile: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    /// `‖K*K − I‖`.
    pub isometry_defect: f64,
    /// A priori bound for the isometry defect.
    pub tail_bound: f64,
    /// `max ‖K*(S^α ⊗ I)K − T^α‖`.
    pub compression: f64,
    /// `max ‖K*(S^α P_0 (S^β)* ⊗ I)K − T^α Δ² (T^β)*‖`.
    pub vacuum_sandwich: f64,
    /// `max ‖K*(S^α (S^β)* ⊗ I)K − T^α (T^β)*‖`.
    pub cp_identity: f64,
}

/// Builds the Poisson embedding at truncation level `N`. With `r = None` the
/// tuple must be pure at truncation (`p_{N+1} ≤ tol`); otherwise `rT` is dilated.
pub fn dilate_poisson(t: &OperatorTuple, a: &TransitionMatrix, level: usize, r: Option<f64>, tol: f64) -> Result<PoissonDilation> {
    if level == 0 {
        return Err(Error::input("truncation level must be at least 1"));
    }
    let tuple = match r {
        Some(r) if !(r > 0.0 && r < 1.0) => return Err(Error::input(format!("r must lie in (0,1), got {r}"))),
        Some(r) => t.scaled(r),
        None => t.clone(),
    };
    let profile = purity_profile(&tuple, a, level + 1)?;
    if r.is_none() && profile[level] > tol {
        return Err(Error::Construction {
            message: format!(
                "tuple is not pure at truncation level {level} (p_{} = {:e}); supply r < 1",
                level + 1,
                profile[level]
            ),
            diagnostics: profile,
        });
    }
    let delta = defect(&tuple, tol)?;
    let defect_frame = orth(&delta, 1e-10);
    let reduced = defect_frame.adjoint() * &delta;
    let mut words = Vec::new();
    let mut blocks = Vec::new();
    // depth-first over admissible words, pruning vanishing products
    let mut stack = vec![(Word::empty(), identity(tuple.dim()))];
    while let Some((w, tw)) = stack.pop() {
        blocks.push(&reduced * tw.adjoint());
        if w.len() < level {
            for l in (1..=tuple.n()).rev() {
                if w.last().is_ok_and(|p| !a.allows(p, l)) {
                    continue;
                }
                let next = &tw * tuple.get(l);
                if op_norm(&next) > PRUNE {
                    stack.push((w.append(l), next));
                }
            }
        }
        words.push(w);
    }
    let mut order: Vec<usize> = (0..words.len()).collect();
    order.sort_by(|&x, &y| crate::words::length_lex_cmp(&words[x], &words[y]));
    let words: Vec<Word> = order.iter().map(|&k| words[k].clone()).collect();
    let blocks: Vec<CMat> = order.iter().map(|&k| blocks[k].clone()).collect();
    let index = words.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect();
    Ok(PoissonDilation { a: a.clone(), tuple, level, r, defect: delta, defect_frame, words, index, blocks, profile })
}

impl PoissonDilation {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn r(&self) -> Option<f64> {
        self.r
    }

    /// The tuple whose dilation this is (`T`, or `rT` on the `r` path).
    pub fn dilated_tuple(&self) -> &OperatorTuple {
        &self.tuple
    }

    pub fn defect_rank(&self) -> usize {
        self.defect_frame.ncols()
    }

    pub fn purity_profile(&self) -> &[f64] {
        &self.profile
    }

    /// Words carrying a nonzero block of `K`.
    pub fn support(&self) -> &[Word] {
        &self.words
    }

    /// Nonzero blocks `Y* Δ (T^α)*` of `K`, keyed by word.
    pub fn blocks(&self) -> impl Iterator<Item = (&Word, &CMat)> {
        self.words.iter().zip(&self.blocks)
    }

    fn block(&self, w: &Word) -> Option<&CMat> {
        self.index.get(w).map(|&k| &self.blocks[k])
    }

    fn joins(&self, left: &Word, right: &Word) -> bool {
        match (left.last(), right.first()) {
            (Ok(p), Ok(q)) => self.a.allows(p, q),
            _ => true,
        }
    }

    /// `((S^α ⊗ I)K)* ((S^β ⊗ I)K)`.
    pub fn shifted_gram(&self, alpha: &Word, beta: &Word) -> CMat {
        let d = self.tuple.dim();
        let mut out = zeros(d, d);
        if let Some(delta) = alpha.strip_prefix_of(beta) {
            // αγ = βγ' forces γ = δγ'
            for (gp, b) in self.words.iter().zip(&self.blocks) {
                if beta.len() + gp.len() > self.level || !self.joins(beta, gp) {
                    continue;
                }
                if let Some(bb) = self.block(&delta.concat(gp)) {
                    out += bb.adjoint() * b;
                }
            }
        } else if let Some(delta) = beta.strip_prefix_of(alpha) {
            for (g, b) in self.words.iter().zip(&self.blocks) {
                if alpha.len() + g.len() > self.level || !self.joins(alpha, g) {
                    continue;
                }
                if let Some(bb) = self.block(&delta.concat(g)) {
                    out += b.adjoint() * bb;
                }
            }
        }
        out
    }

    /// `‖K*K − I‖`.
    pub fn isometry_defect(&self) -> f64 {
        let d = self.tuple.dim();
        let kk = self.blocks.iter().fold(zeros(d, d), |acc, b| acc + b.adjoint() * b);
        op_norm(&(kk - identity(d)))
    }

    /// `p_{N+1}` for pure tuples, `r^{2(N+1)}/(1 − r²)` on the `r` path.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound_at(self.level)
    }

    /// The same bound with `N` replaced by `level ≤ N`.
    pub fn tail_bound_at(&self, level: usize) -> f64 {
        match self.r {
            Some(r) => r.powi(2 * (level as i32 + 1)) / (1.0 - r * r),
            None => self.profile[level.min(self.level)],
        }
    }

    fn sum_over_tails(&self, left: &Word, right: &Word) -> CMat {
        // Σ_γ B_{αγ}* B_{βγ}, i.e. K*(S^α (S^β)* ⊗ I)K
        let d = self.tuple.dim();
        let mut out = zeros(d, d);
        for g in &self.words {
            if let (Some(x), Some(y)) = (self.block(&left.concat(g)), self.block(&right.concat(g))) {
                out += x.adjoint() * y;
            }
        }
        out
    }

    /// Compares the embedding identities for admissible words of length `≤ max_len`.
    pub fn report(&self, max_len: usize) -> Result<PoissonReport> {
        let words = admissible_up_to(&self.a, max_len.min(self.level));
        let delta_sq = &self.defect * &self.defect;
        let powers: Vec<CMat> = words.iter().map(|w| eval_word(&self.tuple, w)).collect::<Result<_>>()?;
        let zero = zeros(self.defect_frame.ncols(), self.tuple.dim());
        let mut compression: f64 = 0.0;
        let mut vacuum_sandwich: f64 = 0.0;
        let mut cp_identity: f64 = 0.0;
        for (alpha, ta) in words.iter().zip(&powers) {
            // K*(S^α ⊗ I)K = Σ_γ B_{αγ}* B_γ
            let lifted = self.sum_over_tails(alpha, &Word::empty());
            compression = compression.max(op_norm(&(lifted - ta)));
            let ba = self.block(alpha).unwrap_or(&zero);
            for (beta, tb) in words.iter().zip(&powers) {
                let bb = self.block(beta).unwrap_or(&zero);
                let expect = ta * &delta_sq * tb.adjoint();
                vacuum_sandwich = vacuum_sandwich.max(op_norm(&(ba.adjoint() * bb - expect)));
                let cp = self.sum_over_tails(alpha, beta);
                cp_identity = cp_identity.max(op_norm(&(cp - ta * tb.adjoint())));
            }
        }
        Ok(PoissonReport {
            isometry_defect: self.isometry_defect(),
            tail_bound: self.tail_bound(),
            compression,
            vacuum_sandwich,
            cp_identity,
        })
    }

    /// Dense realization: `S_i ⊗ I` on `Γ_A(N) ⊗ range(Δ)` with embedding `K`.
    pub fn to_dilation_result(&self) -> Result<DilationResult> {
        let fock = TruncatedFock::new(&self.a, self.level)?;
        let rd = self.defect_frame.ncols();
        let dim = fock.dim() * rd;
        if dim > DENSE_LIMIT {
            return Err(Error::input(format!(
                "dense Poisson dilation would have dimension {dim} (limit {DENSE_LIMIT})"
            )));
        }
        if rd == 0 {
            return Err(Error::domain("tuple has zero defect; the Poisson dilation space is trivial"));
        }
        let id = identity(rd);
        let mats = fock.creation_s().iter().map(|s| kron(&s.to_dense(), &id)).collect();
        let mut k = zeros(dim, self.tuple.dim());
        for (w, b) in self.words.iter().zip(&self.blocks) {
            let row = fock.index_of(w).expect("support words are basis words") * rd;
            k.view_mut((row, 0), b.shape()).copy_from(b);
        }
        Ok(DilationResult { tuple: OperatorTuple::new(mats)?, embedding: k, method: Method::Poisson, level: self.level })
    }
}

/// `max |⟨T̃^α u, T̃^β v⟩ − ⟨(S^α⊗I)Ku, (S^β⊗I)Kv⟩|` over admissible `|α|, |β| ≤ m − 1`,
/// comparing the kernel dilation at level `m` with the Poisson dilation at level `N`.
pub fn gram_equivalence(t: &OperatorTuple, a: &TransitionMatrix, m: usize, level: usize, tol: f64) -> Result<f64> {
    let kd = dilate_kernel(t, a, m, tol)?;
    let pd = dilate_poisson(t, a, level, None, tol)?;
    let words = admissible_up_to(a, m.saturating_sub(1));
    let v = &kd.result.embedding;
    let lifted: Vec<CMat> = words
        .iter()
        .map(|w| Ok(eval_word(&kd.result.tuple, w)? * v))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for (alpha, la) in words.iter().zip(&lifted) {
        for (beta, lb) in words.iter().zip(&lifted) {
            let diff = la.adjoint() * lb - pd.shifted_gram(alpha, beta);
            worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    Ok(worst)
}
