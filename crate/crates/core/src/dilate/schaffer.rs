//! Minimal isometric dilation of a row contraction on
//! `ℂ^d ⊕ (F(ℂ^n) ⊗ range(D))`, truncated at Fock level `N`:
//! `L̂_i (h ⊕ f) = T_i h ⊕ (ω ⊗ D(e_i ⊗ h) + e_i ⊗ f)` with `D² = I − T_row* T_row`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dilate::{DilationResult, Method};
use crate::error::{Error, Result};
use crate::fock::{SparseMatrix, TruncatedFock};
use crate::linalg::{direct_sum, identity, kron, op_norm, orth, psd_sqrt, rank, zeros, CMat};
use crate::dilate::kernel::dilate_kernel;
use crate::tuples::{is_row_contraction, OperatorTuple};
use crate::words::{admissible_up_to, TransitionMatrix, Word};

#[derive(Clone, Debug)]
pub struct SchafferDilation {
    pub result: DilationResult,
    /// `D` on `ℂ^n ⊗ ℂ^d`.
    pub defect_root: CMat,
    /// Orthonormal frame of `range(D)`.
    pub defect_frame: CMat,
    pub fock: TruncatedFock,
}

fn row_operator(t: &OperatorTuple) -> CMat {
    let d = t.dim();
    let mut row = zeros(d, t.n() * d);
    for (i, m) in t.mats().iter().enumerate() {
        row.view_mut((0, i * d), (d, d)).copy_from(m);
    }
    row
}

/// Builds `L̂` at Fock level `N`. The tuple only needs to be a row contraction.
pub fn dilate_isometric_schaffer(t: &OperatorTuple, level: usize, tol: f64) -> Result<SchafferDilation> {
    let rep = is_row_contraction(t, tol);
    if !rep.contractive {
        return Err(Error::domain(format!(
            "tuple is not a row contraction (min eigenvalue of I − ΣT_iT_i* is {:e})",
            rep.min_eigenvalue
        )));
    }
    let (n, d) = (t.n(), t.dim());
    let row = row_operator(t);
    let d_sq = identity(n * d) - row.adjoint() * &row;
    let defect_root = if op_norm(&(&d_sq * &d_sq - &d_sq)) <= tol {
        d_sq
    } else {
        psd_sqrt(&d_sq, tol).ok_or_else(|| Error::domain("I − T_row* T_row is not positive semidefinite"))?
    };
    let defect_frame = orth(&defect_root, 1e-10);
    let r = defect_frame.ncols();
    let fock = TruncatedFock::full(n, level)?;
    let coupling = defect_frame.adjoint() * &defect_root;
    let id_r = identity(r);
    let shifts = fock.creation_s();
    let mats = (0..n)
        .map(|i| {
            let mut li = direct_sum(t.get(i + 1), &kron(&shifts[i].to_dense(), &id_r));
            // h ↦ ω ⊗ Y*D(e_i ⊗ h), the vacuum occupies the first r rows of the Fock part
            li.view_mut((d, 0), (r, d)).copy_from(&coupling.columns(i * d, d));
            li
        })
        .collect();
    let total = d + fock.dim() * r;
    let mut embedding = zeros(total, d);
    embedding.view_mut((0, 0), (d, d)).copy_from(&identity(d));
    Ok(SchafferDilation {
        result: DilationResult { tuple: OperatorTuple::new(mats)?, embedding, method: Method::Schaffer, level },
        defect_root,
        defect_frame,
        fock,
    })
}

impl SchafferDilation {
    pub fn defect_rank(&self) -> usize {
        self.defect_frame.ncols()
    }

    /// Frame of `ℂ^d ⊕ (levels < N) ⊗ range(D)`, where `L̂` is exactly isometric.
    pub fn interior_frame(&self) -> CMat {
        let d = self.result.embedding.ncols();
        let r = self.defect_rank();
        let inner = self.fock.dim_up_to(self.fock.level() - 1) * r;
        let total = self.result.tuple.dim();
        let mut f = zeros(total, d + inner);
        f.view_mut((0, 0), (d + inner, d + inner)).copy_from(&identity(d + inner));
        f
    }

    /// `max_{i,j} ‖(L̂_i* L̂_j − δ_ij) P‖` on the interior.
    pub fn isometry_residual(&self) -> f64 {
        let p = self.interior_frame();
        let mats = self.result.tuple.mats();
        let mut worst: f64 = 0.0;
        for (i, li) in mats.iter().enumerate() {
            for (j, lj) in mats.iter().enumerate() {
                let mut g = li.adjoint() * lj;
                if i == j {
                    g -= identity(g.nrows());
                }
                worst = worst.max(op_norm(&(g * &p)));
            }
        }
        worst
    }
}

/// Defect ranks `rank(I − Σ R_i R_i*)` of the Schäffer dilation, the kernel
/// dilation and the tuple itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTriple {
    pub schaffer: usize,
    pub kernel: usize,
    pub tuple: usize,
}

impl RankTriple {
    pub fn agrees(&self) -> bool {
        self.schaffer == self.tuple && self.kernel == self.tuple
    }
}

fn defect_rank_of(t: &OperatorTuple) -> usize {
    rank(&t.deficiency(), 1e-9, 1e-9)
}

/// Builds both dilations (kernel at level `m`, Schäffer at level `N`) and compares defect ranks.
pub fn defect_rank_check(t: &OperatorTuple, a: &TransitionMatrix, m: usize, level: usize, tol: f64) -> Result<RankTriple> {
    let kd = dilate_kernel(t, a, m, tol)?;
    let sd = dilate_isometric_schaffer(t, level, tol)?;
    Ok(RankTriple {
        schaffer: defect_rank_of(&sd.result.tuple),
        kernel: defect_rank_of(&kd.result.tuple),
        tuple: defect_rank_of(t),
    })
}

/// `max ‖(L̂^α L̂_i L̂_j)* V‖` over `a_ij = 0` and all words `|α| ≤ max_len`.
pub fn annihilation_residual(s: &SchafferDilation, a: &TransitionMatrix, max_len: usize) -> Result<f64> {
    let l = &s.result.tuple;
    let stars: Vec<SparseMatrix> = l.mats().iter().map(|m| SparseMatrix::from_dense(m).adjoint()).collect();
    let prefixes = admissible_up_to(&TransitionMatrix::all_ones(l.n()), max_len);
    // (L̂^α)* V, keyed by α; each word extends a shorter one by its last letter
    let mut images: HashMap<Word, CMat> = HashMap::new();
    let mut worst: f64 = 0.0;
    for alpha in &prefixes {
        let base = match alpha.letters().split_last() {
            None => s.result.embedding.clone(),
            Some((&k, head)) => stars[k - 1].mul_dense(&images[&Word::new(head.to_vec())]),
        };
        for i in 1..=l.n() {
            let after_i = stars[i - 1].mul_dense(&base);
            for j in (1..=l.n()).filter(|&j| !a.allows(i, j)) {
                worst = worst.max(op_norm(&stars[j - 1].mul_dense(&after_i)));
            }
        }
        images.insert(alpha.clone(), base);
    }
    Ok(worst)
}

/// Dilates `T` by the kernel method at level `m`, dilates the result
/// isometrically at level `N`, and measures how far the embedded dilation
/// space is from being annihilated by `(L̂^α L̂_i L̂_j)*` (`a_ij = 0`, `|α| ≤ N − 2`).
pub fn dilation_annihilation_check(t: &OperatorTuple, a: &TransitionMatrix, m: usize, level: usize, tol: f64) -> Result<f64> {
    if level < 2 {
        return Err(Error::input("Fock level must be at least 2"));
    }
    let kd = dilate_kernel(t, a, m, tol)?;
    let sd = dilate_isometric_schaffer(&kd.result.tuple, level, tol)?;
    annihilation_residual(&sd, a, level - 2)
}
