//! Minimal Cuntz-Krieger dilation through the positive definite kernel
//! indexed by admissible words, factored as a Gram matrix.
//!
//! The dilation space is truncated to `H_m = span{λ(α,u) : |α| ≤ m}`. This
//! subspace is co-invariant for the true dilation, so the operators built here
//! are its exact compression: adjoints act exactly on `H_m`, and identities
//! involving words of length `ℓ` are exact on `H_{m−ℓ}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dilate::{DilationResult, Method};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, identity, op_norm, orth, rank, zeros, CMat};
use crate::tuples::{defect, is_row_contraction, satisfies_a_relations, OperatorTuple};
use crate::words::{admissible_up_to, TransitionMatrix, Word};

/// Cache of `T^w` for admissible words up to a fixed length.
struct WordPowers {
    powers: HashMap<Word, CMat>,
}

impl WordPowers {
    fn new(t: &OperatorTuple, a: &TransitionMatrix, max_len: usize) -> Self {
        let mut powers = HashMap::new();
        powers.insert(Word::empty(), identity(t.dim()));
        for w in admissible_up_to(a, max_len).into_iter().filter(|w| !w.is_empty()) {
            let tail = w.tail();
            let value = t.get(w.letters()[0]) * &powers[&tail];
            powers.insert(w, value);
        }
        WordPowers { powers }
    }

    fn get(&self, w: &Word) -> &CMat {
        &self.powers[w]
    }
}

/// The five-case kernel block between admissible words `α` and `β`:
/// `I` at `(∅,∅)`, `Q_{t(α)}` at `(α,α)`, `T^γ` for `β = αγ`, `(T^γ)*` for
/// `α = βγ`, and 0 otherwise.
pub fn kernel_block(t: &OperatorTuple, a: &TransitionMatrix, alpha: &Word, beta: &Word) -> Result<CMat> {
    let d = t.dim();
    if alpha == beta {
        return Ok(match alpha.last() {
            Ok(l) => t.q_operator(a, l),
            Err(_) => identity(d),
        });
    }
    if let Some(gamma) = alpha.strip_prefix_of(beta) {
        return crate::tuples::eval_word(t, &gamma);
    }
    if let Some(gamma) = beta.strip_prefix_of(alpha) {
        return Ok(crate::tuples::eval_word(t, &gamma)?.adjoint());
    }
    Ok(zeros(d, d))
}

fn block_from_cache(t: &OperatorTuple, a: &TransitionMatrix, cache: &WordPowers, alpha: &Word, beta: &Word) -> CMat {
    if alpha == beta {
        return match alpha.last() {
            Ok(l) => t.q_operator(a, l),
            Err(_) => identity(t.dim()),
        };
    }
    if let Some(gamma) = alpha.strip_prefix_of(beta) {
        return cache.get(&gamma).clone();
    }
    if let Some(gamma) = beta.strip_prefix_of(alpha) {
        return cache.get(&gamma).adjoint();
    }
    zeros(t.dim(), t.dim())
}

/// The kernel compressed to admissible words of length `≤ m`, assembled as a
/// `(d·|words|)`-square block matrix in length-lex word order.
#[derive(Clone, Debug)]
pub struct KernelGram {
    a: TransitionMatrix,
    tuple: OperatorTuple,
    level: usize,
    words: Vec<Word>,
    matrix: CMat,
}

impl KernelGram {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn tuple(&self) -> &OperatorTuple {
        &self.tuple
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.a
    }

    pub fn block(&self, alpha: &Word, beta: &Word) -> Option<CMat> {
        let d = self.tuple.dim();
        let i = self.words.iter().position(|w| w == alpha)?;
        let j = self.words.iter().position(|w| w == beta)?;
        Some(self.matrix.view((i * d, j * d), (d, d)).into_owned())
    }

    /// `‖G − G*‖`.
    pub fn hermitian_residual(&self) -> f64 {
        op_norm(&(&self.matrix - self.matrix.adjoint()))
    }
}

fn assemble(t: &OperatorTuple, a: &TransitionMatrix, cache: &WordPowers, rows: &[Word], cols: &[Word]) -> CMat {
    let d = t.dim();
    let mut g = zeros(rows.len() * d, cols.len() * d);
    for (i, alpha) in rows.iter().enumerate() {
        for (j, beta) in cols.iter().enumerate() {
            let b = block_from_cache(t, a, cache, alpha, beta);
            g.view_mut((i * d, j * d), (d, d)).copy_from(&b);
        }
    }
    g
}

fn check_preconditions(t: &OperatorTuple, a: &TransitionMatrix, tol: f64) -> Result<()> {
    let rel = satisfies_a_relations(t, a, tol)?;
    if !rel.holds {
        return Err(Error::domain(format!(
            "tuple violates the A-relations (‖T_iT_j‖ = {:e} at {:?})",
            rel.max_violation, rel.worst_pair
        )));
    }
    let con = is_row_contraction(t, tol);
    if !con.contractive {
        return Err(Error::domain(format!(
            "tuple is not a row contraction (min eigenvalue {:e})",
            con.min_eigenvalue
        )));
    }
    Ok(())
}

pub fn kernel_gram(t: &OperatorTuple, a: &TransitionMatrix, m: usize, tol: f64) -> Result<KernelGram> {
    if m == 0 {
        return Err(Error::input("kernel level must be at least 1"));
    }
    check_preconditions(t, a, tol)?;
    let words = admissible_up_to(a, m);
    let cache = WordPowers::new(t, a, m);
    let matrix = assemble(t, a, &cache, &words, &words);
    Ok(KernelGram { a: a.clone(), tuple: t.clone(), level: m, words, matrix })
}

/// Smallest eigenvalue of the assembled kernel matrix.
pub fn kernel_psd_check(g: &KernelGram) -> f64 {
    hermitian_eig(g.matrix()).0.last().copied().unwrap_or(0.0)
}

/// Outcome of the `K^(m) = L_1 ⋯ L_m Q^(m) L_m* ⋯ L_1*` factorization test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    /// Operator-norm residual of the factorization.
    pub residual: f64,
    /// Whether the defect operator was appended as an extra letter.
    pub augmented: bool,
    /// `‖I − Σ T_i T_i*‖` of the (possibly augmented) tuple.
    pub unitality_residual: f64,
    /// How far the original kernel is from the corresponding sub-block of the augmented one.
    pub restriction_residual: f64,
}

/// `L_k`: `T_i` at `(α, αi)` with `|αi| = k`, `I` at `(α, α)` with `|α| ≥ k`, 0 elsewhere.
fn l_factor(t: &OperatorTuple, words: &[Word], index: &HashMap<Word, usize>, k: usize) -> CMat {
    let d = t.dim();
    let mut l = zeros(words.len() * d, words.len() * d);
    for (i, alpha) in words.iter().enumerate() {
        if alpha.len() >= k {
            l.view_mut((i * d, i * d), (d, d)).copy_from(&identity(d));
        }
        if alpha.len() + 1 == k {
            for letter in 1..=t.n() {
                if let Some(&j) = index.get(&alpha.append(letter)) {
                    l.view_mut((i * d, j * d), (d, d)).copy_from(t.get(letter));
                }
            }
        }
    }
    l
}

/// Checks the product factorization of `K^(m)`. Non-unital tuples are first
/// augmented by `Δ_T` as letter `n + 1`, with `A` extended by a row and column of ones.
pub fn kernel_factorization_check(t: &OperatorTuple, a: &TransitionMatrix, m: usize, tol: f64) -> Result<FactorizationReport> {
    if m == 0 {
        return Err(Error::input("kernel level must be at least 1"));
    }
    check_preconditions(t, a, tol)?;
    let unital = is_row_contraction(t, tol).unital;
    let (tt, aa) = if unital {
        (t.clone(), a.clone())
    } else {
        let mut mats = t.mats().to_vec();
        mats.push(defect(t, tol)?);
        (OperatorTuple::new(mats)?, a.extend_with_ones())
    };
    let d = tt.dim();
    let words = admissible_up_to(&aa, m);
    let index: HashMap<Word, usize> = words.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect();
    let cache = WordPowers::new(&tt, &aa, m);
    let k = assemble(&tt, &aa, &cache, &words, &words);
    let mut q = zeros(words.len() * d, words.len() * d);
    for (i, w) in words.iter().enumerate() {
        if w.len() == m {
            q.view_mut((i * d, i * d), (d, d))
                .copy_from(&tt.q_operator(&aa, w.last()?));
        }
    }
    let mut left = identity(words.len() * d);
    for level in 1..=m {
        left *= l_factor(&tt, &words, &index, level);
    }
    let product = &left * q * left.adjoint();
    let residual = op_norm(&(k - product));
    let unitality_residual = op_norm(&tt.deficiency());
    let restriction_residual = if unital {
        0.0
    } else {
        let original = admissible_up_to(a, m);
        let own = assemble(t, a, &WordPowers::new(t, a, m), &original, &original);
        let mut sub = zeros(original.len() * t.dim(), original.len() * t.dim());
        for (i, alpha) in original.iter().enumerate() {
            for (j, beta) in original.iter().enumerate() {
                let b = block_from_cache(&tt, &aa, &cache, alpha, beta);
                sub.view_mut((i * d, j * d), (d, d)).copy_from(&b);
            }
        }
        op_norm(&(own - sub))
    };
    Ok(FactorizationReport { residual, augmented: !unital, unitality_residual, restriction_residual })
}

/// Kernel-method dilation together with its Gram data.
#[derive(Clone, Debug)]
pub struct KernelDilation {
    pub result: DilationResult,
    pub gram: KernelGram,
    /// Gram eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Numerical rank of the Gram matrix, the dimension of the dilation space.
    pub rank: usize,
    /// `F` with `G = F* F`; column `(α, u)` is `λ(α, u)`.
    pub factor: CMat,
}

impl KernelDilation {
    /// Isometric frame onto `H_k = span{λ(α,u) : |α| ≤ k}`.
    pub fn level_frame(&self, k: usize) -> CMat {
        let d = self.gram.tuple.dim();
        let cols = self.gram.words.iter().filter(|w| w.len() <= k).count() * d;
        orth(&self.factor.columns(0, cols).into_owned(), 1e-10)
    }

    /// Rank of `[R^α V]` over admissible `|α| ≤ m`.
    pub fn minimality_rank(&self) -> Result<usize> {
        let v = &self.result.embedding;
        let blocks: Vec<CMat> = self
            .gram
            .words
            .iter()
            .map(|w| Ok(crate::tuples::eval_word(&self.result.tuple, w)? * v))
            .collect::<Result<_>>()?;
        let d = v.ncols();
        let mut stacked = zeros(v.nrows(), blocks.len() * d);
        for (k, b) in blocks.iter().enumerate() {
            stacked.view_mut((0, k * d), b.shape()).copy_from(b);
        }
        Ok(rank(&stacked, 1e-8, 0.0))
    }
}

/// Factors the kernel Gram matrix and realizes `T̃_i λ(α,u) = λ(iα,u)` as the
/// compression of the true dilation to the factored space `H_m`.
pub fn dilate_kernel(t: &OperatorTuple, a: &TransitionMatrix, m: usize, tol: f64) -> Result<KernelDilation> {
    let gram = kernel_gram(t, a, m, tol)?;
    let d = t.dim();
    let (vals, vecs) = hermitian_eig(gram.matrix());
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let bottom = vals.last().copied().unwrap_or(0.0);
    if bottom < -1e-8 * top.max(1.0) {
        return Err(Error::Construction {
            message: "kernel matrix is not positive semidefinite".into(),
            diagnostics: vec![bottom, top],
        });
    }
    let r = vals.iter().filter(|&&v| v > tol * top).count();
    if r < d {
        return Err(Error::Construction {
            message: format!("Gram rank {r} is below the dimension {d} of the original space"),
            diagnostics: vals.clone(),
        });
    }
    let ur = vecs.columns(0, r).into_owned();
    let sqrt: Vec<f64> = vals[..r].iter().map(|v| v.sqrt()).collect();
    let mut factor = ur.adjoint();
    for (k, s) in sqrt.iter().enumerate() {
        factor.row_mut(k).scale_mut(*s);
    }
    // whitened basis vectors of H_m in word coordinates: U_r Σ^{-1/2}
    let mut whiten = ur.clone();
    for (k, s) in sqrt.iter().enumerate() {
        whiten.column_mut(k).scale_mut(1.0 / s);
    }
    let cache = WordPowers::new(t, a, m + 1);
    let mats: Vec<CMat> = (1..=t.n())
        .map(|i| {
            let shifted: Vec<Option<Word>> = gram
                .words
                .iter()
                .map(|w| match w.first() {
                    Ok(f) if !a.allows(i, f) => None,
                    _ => Some(w.prepend(i)),
                })
                .collect();
            let mut ci = zeros(gram.words.len() * d, gram.words.len() * d);
            for (row, gamma) in gram.words.iter().enumerate() {
                for (col, target) in shifted.iter().enumerate() {
                    if let Some(beta) = target {
                        let b = block_from_cache(t, a, &cache, gamma, beta);
                        ci.view_mut((row * d, col * d), (d, d)).copy_from(&b);
                    }
                }
            }
            whiten.adjoint() * ci * &whiten
        })
        .collect();
    let embedding = factor.columns(0, d).into_owned();
    let result = DilationResult { tuple: OperatorTuple::new(mats)?, embedding, method: Method::Kernel, level: m };
    Ok(KernelDilation { result, gram, eigenvalues: vals, rank: r, factor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows};
    use crate::tuples::{flip_pair, partial_isometry_checks, DEFAULT_TOL};

    #[test]
    fn flip_pair_blocks() {
        let (t, a) = flip_pair();
        let g = kernel_gram(&t, &a, 3, DEFAULT_TOL).unwrap();
        let w = |l: &[usize]| Word::new(l.to_vec());
        assert_eq!(g.block(&w(&[1]), &w(&[1])).unwrap(), from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(g.block(&Word::empty(), &w(&[1, 2])).unwrap(), from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]));
        assert_eq!(g.block(&w(&[1]), &w(&[2])).unwrap(), zeros(2, 2));
        assert_eq!(g.hermitian_residual(), 0.0);
        assert!(kernel_psd_check(&g) > -1e-12);
    }

    #[test]
    fn flip_pair_factorization() {
        let (t, a) = flip_pair();
        for m in 1..=4 {
            let rep = kernel_factorization_check(&t, &a, m, DEFAULT_TOL).unwrap();
            assert!(!rep.augmented);
            assert!(rep.residual < 1e-12, "m={m}: {}", rep.residual);
        }
    }

    #[test]
    fn non_unital_factorization_uses_augmentation() {
        let (t, a) = flip_pair();
        let rep = kernel_factorization_check(&t.scaled(0.7), &a, 3, DEFAULT_TOL).unwrap();
        assert!(rep.augmented);
        assert!(rep.residual < 1e-10);
        assert!(rep.unitality_residual < 1e-12);
        assert!(rep.restriction_residual < 1e-12);
    }

    #[test]
    fn flip_pair_dilates_to_itself() {
        let (t, a) = flip_pair();
        let kd = dilate_kernel(&t, &a, 4, DEFAULT_TOL).unwrap();
        assert_eq!(kd.rank, 2);
        let v = &kd.result.embedding;
        assert!(crate::linalg::isometry_defect(v) < 1e-12);
        for i in 1..=2 {
            let back = v.adjoint() * kd.result.tuple.get(i) * v;
            assert!(op_norm(&(back - t.get(i))) < 1e-12);
        }
    }

    #[test]
    fn scalar_identity_dilates_to_identity() {
        let t = OperatorTuple::new(vec![identity(1)]).unwrap();
        let a = TransitionMatrix::all_ones(1);
        let kd = dilate_kernel(&t, &a, 3, DEFAULT_TOL).unwrap();
        assert_eq!(kd.rank, 1);
        assert!((kd.result.tuple.get(1)[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_tuple_dilates_to_shift() {
        let t = OperatorTuple::zero(1, 1);
        let a = TransitionMatrix::all_ones(1);
        let m = 4;
        let kd = dilate_kernel(&t, &a, m, DEFAULT_TOL).unwrap();
        assert_eq!(kd.rank, m + 1);
        let s = kd.result.tuple.get(1);
        // a truncated shift: nilpotent of order m + 1, rank m
        assert_eq!(rank(s, 1e-10, 0.0), m);
        let mut p = identity(m + 1);
        for _ in 0..=m {
            p = &p * s;
        }
        assert!(op_norm(&p) < 1e-12);
        let rep = partial_isometry_checks(&kd.result.tuple, &a, 1, Some(&kd.level_frame(m - 1))).unwrap();
        assert!(rep.max_residual() < 1e-12);
    }

    #[test]
    fn rejects_non_contractions() {
        let t = OperatorTuple::new(vec![identity(1) * c(2.0, 0.0)]).unwrap();
        let a = TransitionMatrix::all_ones(1);
        assert!(matches!(kernel_gram(&t, &a, 2, DEFAULT_TOL), Err(Error::Domain(_))));
    }
}
