//! Finite-dimensional operator tuples and the predicates attached to them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, identity, op_norm, psd_sqrt, zeros, CMat};
use crate::words::{admissible_up_to, enumerate_admissible, TransitionMatrix, Word};

/// Default absolute tolerance (operator-norm scale).
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps: f64,
}

impl Tolerance {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps >= 0.0 {
            Ok(Tolerance { eps })
        } else {
            Err(Error::input(format!("tolerance must be finite and non-negative, got {eps}")))
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps: DEFAULT_TOL }
    }
}

/// `n` complex `d × d` matrices `T_1, …, T_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTuple {
    mats: Vec<CMat>,
}

impl OperatorTuple {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::input("operator tuple must contain at least one matrix"))?;
        let d = first.nrows();
        if d == 0 {
            return Err(Error::input("operators must act on a nonzero space"));
        }
        for (k, m) in mats.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::input(format!(
                    "matrix {} has shape {}x{}, expected {d}x{d}",
                    k + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::input(format!("matrix {} has a non-finite entry", k + 1)));
            }
        }
        Ok(OperatorTuple { mats })
    }

    /// The tuple of `n` zero operators on `ℂ^d`.
    pub fn zero(n: usize, d: usize) -> Self {
        OperatorTuple { mats: vec![zeros(d, d); n] }
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    /// `T_i`, 1-based.
    pub fn get(&self, i: usize) -> &CMat {
        &self.mats[i - 1]
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn into_mats(self) -> Vec<CMat> {
        self.mats
    }

    pub fn scaled(&self, r: f64) -> Self {
        OperatorTuple { mats: self.mats.iter().map(|m| m * crate::linalg::c(r, 0.0)).collect() }
    }

    pub fn adjoints(&self) -> Vec<CMat> {
        self.mats.iter().map(|m| m.adjoint()).collect()
    }

    /// `Σ_i T_i T_i*`.
    pub fn row_square(&self) -> CMat {
        let d = self.dim();
        self.mats.iter().fold(zeros(d, d), |acc, t| acc + t * t.adjoint())
    }

    /// `I − Σ_i T_i T_i*`.
    pub fn deficiency(&self) -> CMat {
        identity(self.dim()) - self.row_square()
    }

    /// `Q_i = I − Σ_j (1 − a_ij) T_j T_j*`.
    pub fn q_operator(&self, a: &TransitionMatrix, i: usize) -> CMat {
        let d = self.dim();
        let mut q = identity(d);
        for j in 1..=self.n() {
            if !a.allows(i, j) {
                let t = self.get(j);
                q -= t * t.adjoint();
            }
        }
        q
    }

    /// Unitary conjugation `U* T_i U`.
    pub fn conjugate(&self, u: &CMat) -> Self {
        OperatorTuple { mats: self.mats.iter().map(|m| u.adjoint() * m * u).collect() }
    }

    /// Direct sum `T_i ⊕ R_i`.
    pub fn direct_sum(&self, other: &OperatorTuple) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::input("direct sum needs tuples of equal length"));
        }
        Ok(OperatorTuple {
            mats: self
                .mats
                .iter()
                .zip(&other.mats)
                .map(|(a, b)| crate::linalg::direct_sum(a, b))
                .collect(),
        })
    }

    fn check_compatible(&self, a: &TransitionMatrix) -> Result<()> {
        if a.n() != self.n() {
            return Err(Error::input(format!(
                "transition matrix has size {} but tuple has {} operators",
                a.n(),
                self.n()
            )));
        }
        Ok(())
    }
}

/// `T^w = T_{w_1} ⋯ T_{w_m}`; the empty word gives the identity.
pub fn eval_word(t: &OperatorTuple, w: &Word) -> Result<CMat> {
    let mut out = identity(t.dim());
    for &l in w.letters() {
        if l == 0 || l > t.n() {
            return Err(Error::input(format!("letter {l} outside 1..={}", t.n())));
        }
        out *= t.get(l);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub contractive: bool,
    pub unital: bool,
    /// `‖I − Σ T_i T_i*‖`.
    pub deficiency: f64,
    /// Smallest eigenvalue of `I − Σ T_i T_i*`.
    pub min_eigenvalue: f64,
}

pub fn is_row_contraction(t: &OperatorTuple, tol: f64) -> ContractionReport {
    let def = t.deficiency();
    let min_eigenvalue = hermitian_eig(&def).0.last().copied().unwrap_or(0.0);
    let deficiency = op_norm(&def);
    ContractionReport {
        contractive: min_eigenvalue >= -tol,
        unital: deficiency <= tol,
        deficiency,
        min_eigenvalue,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub holds: bool,
    pub max_violation: f64,
    /// The pair `(i, j)` with `a_ij = 0` where `‖T_i T_j‖` is largest.
    pub worst_pair: Option<(usize, usize)>,
}

/// Checks `T_i T_j = 0` for every pair with `a_ij = 0`.
pub fn satisfies_a_relations(t: &OperatorTuple, a: &TransitionMatrix, tol: f64) -> Result<RelationReport> {
    t.check_compatible(a)?;
    let mut max_violation = 0.0;
    let mut worst_pair = None;
    for i in 1..=t.n() {
        for j in 1..=t.n() {
            if a.allows(i, j) {
                continue;
            }
            let v = op_norm(&(t.get(i) * t.get(j)));
            if worst_pair.is_none() || v > max_violation {
                max_violation = v;
                worst_pair = Some((i, j));
            }
        }
    }
    Ok(RelationReport { holds: max_violation <= tol, max_violation, worst_pair })
}

/// `Δ_T = (I − Σ T_i T_i*)^{1/2}`.
pub fn defect(t: &OperatorTuple, tol: f64) -> Result<CMat> {
    psd_sqrt(&t.deficiency(), tol).ok_or_else(|| {
        let report = is_row_contraction(t, tol);
        Error::domain(format!(
            "tuple is not a row contraction (min eigenvalue of I − ΣT_iT_i* is {:e})",
            report.min_eigenvalue
        ))
    })
}

/// For each first letter `j`, the sums `Σ_{|α|=m, o(α)=j} T^α (T^α)*` over admissible `α`,
/// built level by level.
fn purity_blocks(t: &OperatorTuple, a: &TransitionMatrix, m_max: usize) -> Vec<Vec<CMat>> {
    let n = t.n();
    let d = t.dim();
    let mut levels: Vec<Vec<CMat>> = Vec::with_capacity(m_max);
    let mut current: Vec<CMat> = t.mats().iter().map(|m| m * m.adjoint()).collect();
    for _ in 0..m_max {
        levels.push(current.clone());
        current = (1..=n)
            .map(|j| {
                let inner = (1..=n)
                    .filter(|&k| a.allows(j, k))
                    .fold(zeros(d, d), |acc, k| acc + &levels.last().unwrap()[k - 1]);
                t.get(j) * inner * t.get(j).adjoint()
            })
            .collect();
    }
    levels
}

/// `Σ_{|α|=m} T^α (T^α)*` over admissible words, for `m = 1..=m_max`.
pub fn level_sums(t: &OperatorTuple, a: &TransitionMatrix, m_max: usize) -> Result<Vec<CMat>> {
    t.check_compatible(a)?;
    let d = t.dim();
    Ok(purity_blocks(t, a, m_max)
        .into_iter()
        .map(|blocks| blocks.into_iter().fold(zeros(d, d), |acc, b| acc + b))
        .collect())
}

/// `p_m = ‖Σ_{|α|=m} T^α (T^α)*‖` over admissible words, `m = 1..=m_max`.
pub fn purity_profile(t: &OperatorTuple, a: &TransitionMatrix, m_max: usize) -> Result<Vec<f64>> {
    if m_max == 0 {
        return Err(Error::input("purity profile needs m_max ≥ 1"));
    }
    Ok(level_sums(t, a, m_max)?.iter().map(op_norm).collect())
}

pub fn is_pure_at(profile: &[f64], tol: f64) -> bool {
    profile.last().is_some_and(|&p| p <= tol)
}

/// Residuals of the partial-isometry and Cuntz-Krieger-type identities, each in operator norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialIsometryReport {
    /// `max_i ‖T_i T_i* T_i − T_i‖`.
    pub partial_isometry: f64,
    /// `max_{i≠j} ‖T_i* T_j‖`.
    pub orthogonal_ranges: f64,
    /// Per `i`: `‖T_i* T_i − (I − Σ_j (1 − a_ij) T_j T_j*)‖`.
    pub relation_per_index: Vec<f64>,
    /// `max_α ‖T^α (T^α)* T^α − T^α‖` over admissible words.
    pub word_partial_isometry: f64,
    /// `max ‖(T^α)* T^β − δ_αβ Q_{t(α)}‖` over admissible words of equal length.
    pub word_orthogonality: f64,
}

impl PartialIsometryReport {
    pub fn relation(&self) -> f64 {
        self.relation_per_index.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        [
            self.partial_isometry,
            self.orthogonal_ranges,
            self.relation(),
            self.word_partial_isometry,
            self.word_orthogonality,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Evaluates the partial-isometry identities for words of length `≤ max_len`.
///
/// When `domain` is given (an isometric frame), every residual is measured on
/// that subspace only: `‖(LHS − RHS)·domain‖`.
pub fn partial_isometry_checks(
    t: &OperatorTuple,
    a: &TransitionMatrix,
    max_len: usize,
    domain: Option<&CMat>,
) -> Result<PartialIsometryReport> {
    t.check_compatible(a)?;
    let restrict = |m: CMat| -> f64 {
        match domain {
            Some(f) => op_norm(&(m * f)),
            None => op_norm(&m),
        }
    };
    let n = t.n();
    let mut partial_isometry: f64 = 0.0;
    let mut orthogonal_ranges: f64 = 0.0;
    let mut relation_per_index = Vec::with_capacity(n);
    for i in 1..=n {
        let ti = t.get(i);
        partial_isometry = partial_isometry.max(restrict(ti * ti.adjoint() * ti - ti));
        for j in 1..=n {
            if i != j {
                orthogonal_ranges = orthogonal_ranges.max(restrict(ti.adjoint() * t.get(j)));
            }
        }
        relation_per_index.push(restrict(ti.adjoint() * ti - t.q_operator(a, i)));
    }
    let mut word_partial_isometry: f64 = 0.0;
    let mut word_orthogonality: f64 = 0.0;
    for m in 1..=max_len {
        let words = enumerate_admissible(a, m);
        let evals: Vec<CMat> = words.iter().map(|w| eval_word(t, w)).collect::<Result<_>>()?;
        for (alpha, ta) in words.iter().zip(&evals) {
            word_partial_isometry = word_partial_isometry.max(restrict(ta * ta.adjoint() * ta - ta));
            let q = t.q_operator(a, alpha.last()?);
            for (beta, tb) in words.iter().zip(&evals) {
                let lhs = ta.adjoint() * tb;
                let resid = if alpha == beta { lhs - &q } else { lhs };
                word_orthogonality = word_orthogonality.max(restrict(resid));
            }
        }
    }
    Ok(PartialIsometryReport {
        partial_isometry,
        orthogonal_ranges,
        relation_per_index,
        word_partial_isometry,
        word_orthogonality,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalReport {
    pub spherical: bool,
    /// `max_{i,j} ‖[T_i, T_j]‖`.
    pub commutators: f64,
    /// `max_i ‖[T_i, T_i*]‖`.
    pub self_commutators: f64,
    /// `‖I − Σ T_i T_i*‖`.
    pub unitality: f64,
}

pub fn is_spherical_unitary(t: &OperatorTuple, tol: f64) -> SphericalReport {
    let mut commutators: f64 = 0.0;
    let mut self_commutators: f64 = 0.0;
    for i in 1..=t.n() {
        let ti = t.get(i);
        self_commutators = self_commutators.max(op_norm(&(ti * ti.adjoint() - ti.adjoint() * ti)));
        for j in (i + 1)..=t.n() {
            let tj = t.get(j);
            commutators = commutators.max(op_norm(&(ti * tj - tj * ti)));
        }
    }
    let unitality = op_norm(&t.deficiency());
    SphericalReport {
        spherical: commutators <= tol && self_commutators <= tol && unitality <= tol,
        commutators,
        self_commutators,
        unitality,
    }
}

/// `max ‖T^w‖` over non-admissible words of length `≤ max_len` (all vanish for A-relation tuples).
pub fn non_admissible_word_norm(t: &OperatorTuple, a: &TransitionMatrix, max_len: usize) -> Result<f64> {
    t.check_compatible(a)?;
    let all = TransitionMatrix::all_ones(t.n());
    let mut worst: f64 = 0.0;
    for w in admissible_up_to(&all, max_len) {
        if !crate::words::is_admissible(a, &w)? {
            worst = worst.max(op_norm(&eval_word(t, &w)?));
        }
    }
    Ok(worst)
}

/// The matrix units `E_12`, `E_21` on `ℂ²` together with `A = [[0,1],[1,0]]`.
/// A unital tuple of partial isometries satisfying the A-relations.
pub fn flip_pair() -> (OperatorTuple, TransitionMatrix) {
    let t1 = crate::linalg::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let t2 = crate::linalg::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
    (
        OperatorTuple::new(vec![t1, t2]).expect("valid tuple"),
        TransitionMatrix::new(vec![vec![0, 1], vec![1, 0]]).expect("valid matrix"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows};

    #[test]
    fn flip_pair_words() {
        let (t, _) = flip_pair();
        let t12 = eval_word(&t, &Word::new(vec![1, 2])).unwrap();
        assert_eq!(t12, from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]));
        assert_eq!(eval_word(&t, &Word::empty()).unwrap(), identity(2));
        assert_eq!(eval_word(&t, &Word::new(vec![1, 1])).unwrap(), zeros(2, 2));
    }

    #[test]
    fn contraction_reports() {
        let (t, _) = flip_pair();
        let r = is_row_contraction(&t, DEFAULT_TOL);
        assert!(r.contractive && r.unital);
        let z = is_row_contraction(&OperatorTuple::zero(2, 2), DEFAULT_TOL);
        assert!(z.contractive && !z.unital);
        assert!((z.deficiency - 1.0).abs() < 1e-15);
        let big = OperatorTuple::new(vec![identity(2) * c(2.0, 0.0)]).unwrap();
        assert!(!is_row_contraction(&big, DEFAULT_TOL).contractive);
    }

    #[test]
    fn relation_reports() {
        let (t, a) = flip_pair();
        assert!(satisfies_a_relations(&t, &a, DEFAULT_TOL).unwrap().holds);
        let ii = OperatorTuple::new(vec![identity(2), identity(2)]).unwrap();
        let a12 = TransitionMatrix::new(vec![vec![1, 0], vec![1, 1]]).unwrap();
        let rep = satisfies_a_relations(&ii, &a12, DEFAULT_TOL).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.worst_pair, Some((1, 2)));
        assert!(satisfies_a_relations(&t, &TransitionMatrix::all_ones(2), 0.0).unwrap().holds);
    }

    #[test]
    fn defect_examples() {
        let (t, _) = flip_pair();
        assert!(op_norm(&defect(&t, DEFAULT_TOL).unwrap()) < 1e-15);
        assert!(op_norm(&(defect(&OperatorTuple::zero(1, 3), DEFAULT_TOL).unwrap() - identity(3))) < 1e-15);
        let r = 0.6;
        let s = OperatorTuple::new(vec![identity(2) * c(r, 0.0)]).unwrap();
        let expect = identity(2) * c((1.0 - r * r).sqrt(), 0.0);
        assert!(op_norm(&(defect(&s, DEFAULT_TOL).unwrap() - expect)) < 1e-15);
        let big = OperatorTuple::new(vec![identity(1) * c(2.0, 0.0)]).unwrap();
        assert!(matches!(defect(&big, DEFAULT_TOL), Err(Error::Domain(_))));
    }

    #[test]
    fn purity_examples() {
        let (t, a) = flip_pair();
        let p = purity_profile(&t, &a, 5).unwrap();
        assert!(p.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let p = purity_profile(&t.scaled(0.5), &a, 5).unwrap();
        for (m, v) in p.iter().enumerate() {
            assert!((v - 0.25f64.powi(m as i32 + 1)).abs() < 1e-15);
        }
        let z = purity_profile(&OperatorTuple::zero(2, 2), &a, 1).unwrap();
        assert_eq!(z, vec![0.0]);
    }

    #[test]
    fn partial_isometry_examples() {
        let (t, a) = flip_pair();
        let rep = partial_isometry_checks(&t, &a, 4, None).unwrap();
        assert_eq!(rep.max_residual(), 0.0);
        let z = partial_isometry_checks(&OperatorTuple::zero(2, 2), &a, 2, None).unwrap();
        assert_eq!(z.partial_isometry, 0.0);
        assert_eq!(z.orthogonal_ranges, 0.0);
        assert!(z.relation() > 0.5);
    }

    #[test]
    fn spherical_examples() {
        let (t, _) = flip_pair();
        let rep = is_spherical_unitary(&t, DEFAULT_TOL);
        assert!(!rep.spherical);
        assert!((rep.self_commutators - 1.0).abs() < 1e-15);
        let s = 1.0 / 2f64.sqrt();
        let u = from_real_rows(&[&[s, 0.0], &[0.0, -s]]);
        let v = from_real_rows(&[&[s, 0.0], &[0.0, s]]);
        assert!(is_spherical_unitary(&OperatorTuple::new(vec![u, v]).unwrap(), 1e-14).spherical);
    }
}
