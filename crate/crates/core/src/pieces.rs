//! Maximal pieces of operator tuples with respect to finite sets of
//! noncommutative polynomials.
//!
//! The maximal piece `L^p(R)` is the largest co-invariant subspace on which the
//! compressed tuple annihilates every polynomial of the set. It is the
//! orthogonal complement of the smallest `R`-invariant subspace containing the
//! ranges of all `p_ξ(R)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, columns, complement, extend_orthonormal, frame_from_columns, hermitian_eig, identity, intersect,
    isometry_defect, max_principal_angle, op_norm, zeros, CMat, CVec, ONE,
};
use crate::tuples::{eval_word, OperatorTuple};
use crate::words::{TransitionMatrix, Word};

/// Default relative rank cutoff for piece computations.
pub const PIECE_TOL: f64 = 1e-9;

/// A noncommutative polynomial `Σ c_w z^w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NcPoly {
    terms: Vec<(Complex64, Word)>,
}

impl NcPoly {
    /// Merges repeated words and drops zero coefficients; terms are kept in word order.
    pub fn new(terms: Vec<(Complex64, Word)>) -> Self {
        let mut merged: BTreeMap<Word, Complex64> = BTreeMap::new();
        for (coef, w) in terms {
            *merged.entry(w).or_insert(Complex64::new(0.0, 0.0)) += coef;
        }
        NcPoly {
            terms: merged
                .into_iter()
                .filter(|(_, coef)| coef.norm() != 0.0)
                .map(|(w, coef)| (coef, w))
                .collect(),
        }
    }

    pub fn monomial(coef: Complex64, w: Word) -> Self {
        NcPoly::new(vec![(coef, w)])
    }

    pub fn terms(&self) -> &[(Complex64, Word)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `Σ c_w R^w`.
pub fn eval_poly(p: &NcPoly, r: &OperatorTuple) -> Result<CMat> {
    let d = r.dim();
    p.terms
        .iter()
        .try_fold(zeros(d, d), |acc, (coef, w)| Ok(acc + eval_word(r, w)? * *coef))
}

/// A closed subspace given by an orthonormal column frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: CMat,
}

impl Subspace {
    pub fn new(frame: CMat) -> Result<Self> {
        let defect = isometry_defect(&frame);
        if defect > 1e-10 {
            return Err(Error::input(format!("frame is not orthonormal (defect {defect:e})")));
        }
        Ok(Subspace { frame })
    }

    pub fn whole(dim: usize) -> Self {
        Subspace { frame: identity(dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Subspace { frame: zeros(dim, 0) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn projector(&self) -> CMat {
        &self.frame * self.frame.adjoint()
    }

    pub fn orthogonal_complement(&self) -> Subspace {
        Subspace { frame: complement(&self.frame) }
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        Subspace { frame: intersect(&self.frame, &other.frame) }
    }

    /// Largest principal angle; `π/2` when dimensions differ.
    pub fn angle_to(&self, other: &Subspace) -> f64 {
        max_principal_angle(&self.frame, &other.frame)
    }

    /// `‖(I − P) R_i* P‖` maximized over `i`.
    pub fn co_invariance_residual(&self, r: &OperatorTuple) -> f64 {
        let f = &self.frame;
        r.mats()
            .iter()
            .map(|m| {
                let img = m.adjoint() * f;
                op_norm(&(&img - f * (f.adjoint() * &img)))
            })
            .fold(0.0, f64::max)
    }
}

fn scale_of(r: &OperatorTuple, values: &[CMat]) -> f64 {
    r.mats()
        .iter()
        .chain(values)
        .map(op_norm)
        .fold(1.0, f64::max)
}

/// Complement of the smallest `R`-invariant subspace containing every `range p_ξ(R)`,
/// grown by `V ← V + Σ_i R_i V` with pivoted Gram-Schmidt until it stabilizes.
pub fn maximal_piece(r: &OperatorTuple, polys: &[NcPoly], tol: f64) -> Result<Subspace> {
    let d = r.dim();
    let values: Vec<CMat> = polys.iter().map(|p| eval_poly(p, r)).collect::<Result<_>>()?;
    let cutoff = tol * scale_of(r, &values);
    let mut basis: Vec<CVec> = Vec::new();
    extend_orthonormal(&mut basis, values.iter().flat_map(columns).collect(), cutoff, d);
    let mut fresh = 0;
    while fresh < basis.len() && basis.len() < d {
        let start = basis.len();
        let candidates: Vec<CVec> = basis[fresh..]
            .iter()
            .flat_map(|v| r.mats().iter().map(move |m| m * v))
            .collect();
        extend_orthonormal(&mut basis, candidates, cutoff, d - start);
        fresh = start;
    }
    let invariant = frame_from_columns(d, &basis);
    Ok(Subspace { frame: complement(&invariant) })
}

/// Brute-force form: the common kernel of `(R^α p_ξ(R) R^β)*` over all words
/// `|α|, |β| ≤ l_max`, read off from the eigenvectors of
/// `Σ_{α,β,ξ} (R^α p_ξ R^β)(R^α p_ξ R^β)*` with eigenvalue below
/// `max(tol², 1e-12)·λ_max`.
pub fn maximal_piece_oracle(r: &OperatorTuple, polys: &[NcPoly], l_max: usize, tol: f64) -> Result<Subspace> {
    let d = r.dim();
    // Σ_{|β| ≤ l_max} R^β (R^β)*
    let mut level = identity(d);
    let mut right = identity(d);
    for _ in 0..l_max {
        level = r.mats().iter().fold(zeros(d, d), |acc, m| acc + m * &level * m.adjoint());
        right += &level;
    }
    let mut seed = zeros(d, d);
    for p in polys {
        let v = eval_poly(p, r)?;
        seed += &v * &right * v.adjoint();
    }
    // Σ_{|α| ≤ l_max} R^α seed (R^α)*, level k divided by ‖Σ R_i R_i*‖^k when that exceeds 1
    let growth = op_norm(&r.row_square()).max(1.0);
    let mut level = seed;
    let mut total = level.clone();
    for _ in 0..l_max {
        level = r.mats().iter().fold(zeros(d, d), |acc, m| acc + m * &level * m.adjoint()) * c(1.0 / growth, 0.0);
        total += &level;
    }
    let (vals, vecs) = hermitian_eig(&total);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let cut = (tol * tol).max(1e-12) * top;
    let kernel: Vec<CVec> = vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| top == 0.0 || v <= cut)
        .map(|(k, _)| vecs.column(k).into_owned())
        .collect();
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, kernel, 1e-8, d);
    Ok(Subspace { frame: frame_from_columns(d, &basis) })
}

/// `frame* R_i frame`.
pub fn compress(r: &OperatorTuple, s: &Subspace) -> Result<OperatorTuple> {
    if s.ambient_dim() != r.dim() {
        return Err(Error::input("subspace and tuple live in different dimensions"));
    }
    if s.dim() == 0 {
        return Err(Error::domain("cannot compress to the zero subspace"));
    }
    let f = s.frame();
    OperatorTuple::new(r.mats().iter().map(|m| f.adjoint() * m * f).collect())
}

/// Compression to a piece, certifying co-invariance and `p_ξ(compressed) = 0`.
pub fn compress_piece(r: &OperatorTuple, s: &Subspace, polys: &[NcPoly], tol: f64) -> Result<OperatorTuple> {
    let co = s.co_invariance_residual(r);
    if co > tol {
        return Err(Error::domain(format!("subspace is not co-invariant (residual {co:e})")));
    }
    let t = compress(r, s)?;
    for p in polys {
        let v = op_norm(&eval_poly(p, &t)?);
        if v > tol {
            return Err(Error::domain(format!("compressed tuple violates a relation (residual {v:e})")));
        }
    }
    Ok(t)
}

/// Polynomial families for the standard relation classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyPreset {
    /// `z_l z_m` for every `a_lm = 0`.
    ARelation,
    /// `z_l z_m − z_m z_l` for `l < m`.
    Commuting,
    /// `z_j z_i − q_ij z_i z_j` for all `i, j`.
    QCommuting(Vec<Vec<f64>>),
    /// `z_j z_i + z_i z_j` for `i ≠ j` together with `z_i²`.
    Fermionic,
    Union(Vec<PolyPreset>),
}

fn zz(l: usize, m: usize) -> Word {
    Word::new(vec![l, m])
}

pub fn preset_polysets(a: &TransitionMatrix, kind: &PolyPreset) -> Result<Vec<NcPoly>> {
    let n = a.n();
    let polys = match kind {
        PolyPreset::ARelation => a_relation_polys(a),
        PolyPreset::Commuting => {
            let mut out = Vec::new();
            for l in 1..=n {
                for m in (l + 1)..=n {
                    out.push(NcPoly::new(vec![(ONE, zz(l, m)), (-ONE, zz(m, l))]));
                }
            }
            out
        }
        PolyPreset::QCommuting(q) => {
            if q.len() != n || q.iter().any(|row| row.len() != n) {
                return Err(Error::input(format!("q matrix must be {n}x{n}")));
            }
            q_commuting_polys(n, |i, j| q[i - 1][j - 1])
        }
        PolyPreset::Fermionic => {
            let mut out = q_commuting_polys(n, |i, j| if i == j { 1.0 } else { -1.0 });
            let mut off = vec![vec![1u8; n]; n];
            for (i, row) in off.iter_mut().enumerate() {
                row[i] = 0;
            }
            if n > 1 {
                out.extend(a_relation_polys(&TransitionMatrix::new(off)?));
            } else {
                out.push(NcPoly::monomial(ONE, zz(1, 1)));
            }
            out
        }
        PolyPreset::Union(kinds) => {
            let mut out = Vec::new();
            for k in kinds {
                out.extend(preset_polysets(a, k)?);
            }
            out
        }
    };
    Ok(polys.into_iter().filter(|p| !p.is_zero()).collect())
}

fn a_relation_polys(a: &TransitionMatrix) -> Vec<NcPoly> {
    let n = a.n();
    let mut out = Vec::new();
    for l in 1..=n {
        for m in 1..=n {
            let coef = 1.0 - a.get(l, m) as f64;
            out.push(NcPoly::monomial(c(coef, 0.0), zz(l, m)));
        }
    }
    out
}

fn q_commuting_polys(n: usize, q: impl Fn(usize, usize) -> f64) -> Vec<NcPoly> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            out.push(NcPoly::new(vec![(ONE, zz(j, i)), (c(-q(i, j), 0.0), zz(i, j))]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use crate::tuples::flip_pair;

    #[test]
    fn poly_normalization() {
        let p = NcPoly::new(vec![(ONE, zz(1, 2)), (-ONE, zz(1, 2))]);
        assert!(p.is_zero());
        let q = NcPoly::new(vec![(ONE, zz(2, 1)), (ONE, zz(1, 2)), (ONE, zz(2, 1))]);
        assert_eq!(q.terms().len(), 2);
    }

    #[test]
    fn eval_examples() {
        let (t, a) = flip_pair();
        let sq = NcPoly::monomial(ONE, zz(1, 1));
        assert_eq!(op_norm(&eval_poly(&sq, &t).unwrap()), 0.0);
        let comm = &preset_polysets(&a, &PolyPreset::Commuting).unwrap()[0];
        let d = from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let pair = OperatorTuple::new(vec![d.clone(), &d * &d]).unwrap();
        assert_eq!(op_norm(&eval_poly(comm, &pair).unwrap()), 0.0);
        let ones = TransitionMatrix::all_ones(2);
        assert!(preset_polysets(&ones, &PolyPreset::ARelation).unwrap().is_empty());
    }

    #[test]
    fn preset_sizes() {
        let a = TransitionMatrix::all_ones(4);
        assert_eq!(preset_polysets(&a, &PolyPreset::Commuting).unwrap().len(), 6);
        let f = preset_polysets(&TransitionMatrix::all_ones(2), &PolyPreset::Fermionic).unwrap();
        // z_1z_2 + z_2z_1 twice (one per ordered pair) and z_1², z_2²
        assert_eq!(f.len(), 4);
    }

    #[test]
    fn trivial_pieces() {
        let (t, a) = flip_pair();
        let polys = preset_polysets(&a, &PolyPreset::ARelation).unwrap();
        let whole = maximal_piece(&t, &polys, PIECE_TOL).unwrap();
        assert_eq!(whole.dim(), 2);
        assert_eq!(maximal_piece(&t, &[], PIECE_TOL).unwrap().dim(), 2);
        let inv = NcPoly::monomial(ONE, Word::empty());
        assert_eq!(maximal_piece(&t, std::slice::from_ref(&inv), PIECE_TOL).unwrap().dim(), 0);
        assert_eq!(maximal_piece_oracle(&t, &[inv], 2, PIECE_TOL).unwrap().dim(), 0);
        let z = OperatorTuple::zero(2, 3);
        assert_eq!(maximal_piece_oracle(&z, &polys, 2, PIECE_TOL).unwrap().dim(), 3);
    }

    #[test]
    fn compress_whole_space_is_identity_map() {
        let (t, _) = flip_pair();
        assert_eq!(compress(&t, &Subspace::whole(2)).unwrap(), t);
    }
}
