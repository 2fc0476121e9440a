//! The variety `M = {z ∈ ∂B_n : z_i z_j = a_ij z_i z_j}`, the symmetrized
//! graph behind it, and finite GNS realizations of Cuntz-Krieger states.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dilate::{dilate_kernel, dilate_poisson, KernelDilation};
use crate::error::{Error, Result};
use crate::fock::SymTruncatedFock;
use crate::linalg::{op_norm, zeros, CMat};
use crate::random::random_sphere_point;
use crate::tuples::{eval_word, OperatorTuple};
use crate::words::{admissible_up_to, TransitionMatrix, Word};

/// Largest alphabet accepted by [`admissible_supports`].
pub const MAX_SUPPORT_N: usize = 20;

/// The graph of `A′ = (a_ij a_ji)`. `A′` may have zero rows, so it is kept as
/// a plain 0-1 matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub a_sym: Vec<Vec<u8>>,
    /// Vertices `i` (1-based) with `a′_ii = 0`.
    pub zero_vertices: Vec<usize>,
    /// Pairs `i < j` with `a′_ij = 1`.
    pub edges: Vec<(usize, usize)>,
}

impl GraphSummary {
    pub fn n(&self) -> usize {
        self.a_sym.len()
    }

    fn adjacent(&self, i: usize, j: usize) -> bool {
        self.a_sym[i - 1][j - 1] == 1
    }
}

pub fn symmetrize(a: &TransitionMatrix) -> GraphSummary {
    let n = a.n();
    let a_sym: Vec<Vec<u8>> = (1..=n).map(|i| (1..=n).map(|j| a.get(i, j) * a.get(j, i)).collect()).collect();
    let zero_vertices = (1..=n).filter(|&i| a_sym[i - 1][i - 1] == 0).collect();
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            if a_sym[i - 1][j - 1] == 1 {
                edges.push((i, j));
            }
        }
    }
    GraphSummary { a_sym, zero_vertices, edges }
}

/// Maximal complete induced subgraphs on the non-zero vertices, each sorted,
/// listed lexicographically.
pub fn admissible_supports(g: &GraphSummary) -> Result<Vec<Vec<usize>>> {
    let n = g.n();
    if n > MAX_SUPPORT_N {
        return Err(Error::input(format!("support enumeration limited to n ≤ {MAX_SUPPORT_N}, got {n}")));
    }
    let vertices: Vec<usize> = (1..=n).filter(|&i| g.adjacent(i, i)).collect();
    let mut out = Vec::new();
    // Bron-Kerbosch without pivoting; candidates and excluded kept in increasing order
    fn extend(g: &GraphSummary, clique: &mut Vec<usize>, cand: Vec<usize>, mut excl: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cand.is_empty() && excl.is_empty() {
            out.push(clique.clone());
            return;
        }
        let mut cand = cand;
        while let Some(&v) = cand.first() {
            let nc = cand.iter().copied().filter(|&u| u != v && g.adjacent(u, v)).collect();
            let nx = excl.iter().copied().filter(|&u| g.adjacent(u, v)).collect();
            clique.push(v);
            extend(g, clique, nc, nx, out);
            clique.pop();
            cand.remove(0);
            excl.push(v);
        }
    }
    extend(g, &mut Vec::new(), vertices, Vec::new(), &mut out);
    for s in &mut out {
        s.sort_unstable();
    }
    out.sort();
    out.retain(|s| !s.is_empty());
    Ok(out)
}

/// `Σ|z_i|² = 1` and `|z_i z_j| (1 − a_ij) ≤ tol` for all `i, j`, using `A` itself.
pub fn point_in_m(a: &TransitionMatrix, z: &[Complex64], tol: f64) -> bool {
    if z.len() != a.n() {
        return false;
    }
    let norm: f64 = z.iter().map(|x| x.norm_sqr()).sum();
    if (norm - 1.0).abs() > tol {
        return false;
    }
    (1..=a.n()).all(|i| (1..=a.n()).all(|j| a.allows(i, j) || (z[i - 1] * z[j - 1]).norm() <= tol))
}

/// Membership through the support description: the coordinates above `tol`
/// lie inside one admissible support.
pub fn point_in_m_by_support(a: &TransitionMatrix, z: &[Complex64], tol: f64) -> Result<bool> {
    if z.len() != a.n() {
        return Ok(false);
    }
    let norm: f64 = z.iter().map(|x| x.norm_sqr()).sum();
    if (norm - 1.0).abs() > tol {
        return Ok(false);
    }
    let support: Vec<usize> = (1..=a.n()).filter(|&i| z[i - 1].norm() > tol).collect();
    let supports = admissible_supports(&symmetrize(a))?;
    Ok(supports.iter().any(|s| support.iter().all(|i| s.contains(i))))
}

/// The 1-dimensional tuple `(z_1, …, z_n)`.
pub fn scalar_tuple(z: &[Complex64]) -> Result<OperatorTuple> {
    OperatorTuple::new(z.iter().map(|&x| CMat::from_element(1, 1, x)).collect())
}

fn word_value(z: &[Complex64], w: &Word) -> Complex64 {
    w.letters().iter().fold(Complex64::new(1.0, 0.0), |acc, &l| acc * z[l - 1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub alpha: Word,
    pub beta: Word,
    /// `z^α conj(z^β)`.
    pub expected: Complex64,
    /// `V* S̃^α (S̃^β)* V`.
    pub computed: Complex64,
}

#[derive(Clone, Debug)]
pub struct StateGns {
    pub dilation: KernelDilation,
    pub table: Vec<StateEntry>,
}

impl StateGns {
    pub fn max_residual(&self) -> f64 {
        self.table.iter().map(|e| (e.expected - e.computed).norm()).fold(0.0, f64::max)
    }
}

/// GNS realization of the state `s^α (s^β)* ↦ z^α conj(z^β)` as the kernel
/// dilation of the scalar tuple `z` at level `m`, with the state table on
/// admissible words of length `≤ m − 2`.
pub fn ck_state_gns(a: &TransitionMatrix, z: &[Complex64], m: usize, tol: f64) -> Result<StateGns> {
    if !point_in_m(a, z, tol.max(1e-12)) {
        return Err(Error::domain("point does not lie on the variety M"));
    }
    let t = scalar_tuple(z)?;
    let dilation = dilate_kernel(&t, a, m, tol)?;
    let words = admissible_up_to(a, m.saturating_sub(2));
    let v = &dilation.result.embedding;
    let lifted: Vec<CMat> = words
        .iter()
        .map(|w| Ok(eval_word(&dilation.result.tuple, w)?.adjoint() * v))
        .collect::<Result<_>>()?;
    let mut table = Vec::new();
    for (alpha, la) in words.iter().zip(&lifted) {
        for (beta, lb) in words.iter().zip(&lifted) {
            table.push(StateEntry {
                alpha: alpha.clone(),
                beta: beta.clone(),
                expected: word_value(z, alpha) * word_value(z, beta).conj(),
                computed: (la.adjoint() * lb)[(0, 0)],
            });
        }
    }
    Ok(StateGns { dilation, table })
}

/// Uniformly chosen admissible support with a random unit vector on it.
pub fn random_variety_point(rng: &mut impl Rng, a: &TransitionMatrix) -> Result<Vec<Complex64>> {
    let supports = admissible_supports(&symmetrize(a))?;
    if supports.is_empty() {
        return Err(Error::domain("the variety M is empty for this A"));
    }
    let s = &supports[rng.random_range(0..supports.len())];
    Ok(random_sphere_point(rng, a.n(), s))
}

/// Diagonal tuple whose `k`-th diagonal entries form a point of `M`; commuting,
/// unital and satisfying the A-relations.
pub fn random_commuting_tuple(rng: &mut impl Rng, a: &TransitionMatrix, d: usize) -> Result<OperatorTuple> {
    let points: Vec<Vec<Complex64>> = (0..d).map(|_| random_variety_point(rng, a)).collect::<Result<_>>()?;
    OperatorTuple::new(
        (0..a.n())
            .map(|i| CMat::from_diagonal(&nalgebra::DVector::from_fn(d, |k, _| points[k][i])))
            .collect(),
    )
}

/// `‖(I − P_sym ⊗ I) K‖` for the Poisson embedding of a commuting tuple
/// (of `rT` when `r` is given): the embedding lands in `Γ_sA ⊗ range(Δ)`.
pub fn poisson_symmetric_residual(t: &OperatorTuple, a: &TransitionMatrix, level: usize, r: Option<f64>, tol: f64) -> Result<f64> {
    let pd = dilate_poisson(t, a, level, r, tol)?;
    let sym = SymTruncatedFock::new(a, level)?;
    let ambient = sym.ambient();
    let d = t.dim();
    let rd = pd.defect_rank();
    // projections of K onto each u_c ⊗ range(Δ)
    let mut coef = vec![zeros(rd, d); sym.dim()];
    let mut owner = std::collections::HashMap::new();
    for c in 0..sym.dim() {
        for (&idx, &x) in sym.vector(c) {
            owner.insert(idx, (c, x));
        }
    }
    for (w, b) in pd.blocks() {
        let idx = ambient.index_of(w).expect("support words are admissible");
        if let Some(&(c, x)) = owner.get(&idx) {
            coef[c] += b * x.conj();
        }
    }
    let support: Vec<(&Word, &CMat)> = pd.blocks().collect();
    let mut resid = zeros(support.len() * rd, d);
    for (k, (w, b)) in support.iter().enumerate() {
        let idx = ambient.index_of(w).expect("support words are admissible");
        let mut r_w = (*b).clone();
        if let Some(&(c, x)) = owner.get(&idx) {
            r_w -= &coef[c] * x;
        }
        resid.view_mut((k * rd, 0), (rd, d)).copy_from(&r_w);
    }
    Ok(op_norm(&resid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;
    use crate::tuples::is_spherical_unitary;

    fn four_letter() -> TransitionMatrix {
        TransitionMatrix::new(vec![vec![1, 1, 1, 0], vec![1, 1, 0, 0], vec![1, 1, 0, 0], vec![1, 0, 0, 1]]).unwrap()
    }

    #[test]
    fn four_letter_graph() {
        let g = symmetrize(&four_letter());
        assert_eq!(g.a_sym, vec![vec![1, 1, 1, 0], vec![1, 1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, 1]]);
        assert_eq!(g.zero_vertices, vec![3]);
        assert_eq!(admissible_supports(&g).unwrap(), vec![vec![1, 2], vec![4]]);
    }

    #[test]
    fn membership() {
        let a = four_letter();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = [Complex64::new(h, 0.0), Complex64::new(h, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!(point_in_m(&a, &z, 1e-12));
        let e3 = [0.0, 0.0, 1.0, 0.0].map(|x| Complex64::new(x, 0.0));
        assert!(!point_in_m(&a, &e3, 1e-12));
        assert!(!point_in_m_by_support(&a, &e3, 1e-12).unwrap());
    }

    #[test]
    fn gns_table_on_edge_support() {
        let a = four_letter();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = [Complex64::new(h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let gns = ck_state_gns(&a, &z, 4, 1e-10).unwrap();
        assert!(gns.max_residual() < 1e-10);
        assert!(is_spherical_unitary(&scalar_tuple(&z).unwrap(), 1e-12).spherical);
    }

    #[test]
    fn commuting_tuples_embed_symmetrically() {
        let mut rng = seeded(11);
        let a = TransitionMatrix::all_ones(2);
        let t = random_commuting_tuple(&mut rng, &a, 2).unwrap();
        assert!(poisson_symmetric_residual(&t, &a, 8, Some(0.5), 1e-10).unwrap() < 1e-12);
    }
}
