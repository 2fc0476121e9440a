//! Truncated Fock spaces: the full Fock space over `ℂⁿ`, the A-Fock space
//! spanned by admissible words, and the commuting A-Fock space of
//! symmetrized admissible words.
//!
//! Creation operators send the top level `N` to zero. Every identity is
//! therefore exact only on the interior, i.e. on source vectors of level
//! `≤ N − 1` (or lower, for longer words).

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{zeros, CMat, ONE, ZERO};
use crate::tuples::OperatorTuple;
use crate::words::{admissible_up_to, enumerate_admissible, TransitionMatrix, Word};

/// Sparse vector as an ordered map from index to value.
pub type SparseVec = BTreeMap<usize, Complex64>;

pub fn sparse_unit(i: usize) -> SparseVec {
    SparseVec::from([(i, ONE)])
}

pub fn sparse_norm(v: &SparseVec) -> f64 {
    v.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `a + s·b`, dropping exact zeros.
pub fn sparse_axpy(a: &SparseVec, s: Complex64, b: &SparseVec) -> SparseVec {
    let mut out = a.clone();
    for (&k, &v) in b {
        *out.entry(k).or_insert(ZERO) += s * v;
    }
    out.retain(|_, v| *v != ZERO);
    out
}

pub fn sparse_distance(a: &SparseVec, b: &SparseVec) -> f64 {
    sparse_norm(&sparse_axpy(a, -ONE, b))
}

/// Column-compressed sparse complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, cols: vec![Vec::new(); ncols] }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut cols: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); ncols];
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) outside {nrows}x{ncols}");
            *cols[c].entry(r).or_insert(ZERO) += v;
        }
        SparseMatrix {
            nrows,
            ncols,
            cols: cols
                .into_iter()
                .map(|col| col.into_iter().filter(|(_, v)| *v != ZERO).collect())
                .collect(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, j: usize) -> &[(usize, Complex64)] {
        &self.cols[j]
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.cols[j].iter().find(|(r, _)| *r == i).map_or(ZERO, |&(_, v)| v)
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Keeps the exactly nonzero entries of `m`.
    pub fn from_dense(m: &CMat) -> Self {
        let cols = (0..m.ncols())
            .map(|c| (0..m.nrows()).filter(|&r| m[(r, c)] != ZERO).map(|r| (r, m[(r, c)])).collect())
            .collect();
        SparseMatrix { nrows: m.nrows(), ncols: m.ncols(), cols }
    }

    /// `self · b` for a dense `b`.
    pub fn mul_dense(&self, b: &CMat) -> CMat {
        assert_eq!(self.ncols, b.nrows());
        let mut out = zeros(self.nrows, b.ncols());
        for (j, col) in self.cols.iter().enumerate() {
            for &(r, a) in col {
                for k in 0..b.ncols() {
                    out[(r, k)] += a * b[(j, k)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        SparseMatrix::from_triplets(self.ncols, self.nrows, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (&j, &x) in v {
            for &(r, a) in &self.cols[j] {
                *out.entry(r).or_insert(ZERO) += a * x;
            }
        }
        out.retain(|_, z| *z != ZERO);
        out
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut triplets = Vec::new();
        for c in 0..other.ncols {
            let col: SparseVec = other.cols[c].iter().copied().collect();
            for (r, v) in self.apply(&col) {
                triplets.push((r, c, v));
            }
        }
        SparseMatrix::from_triplets(self.nrows, other.ncols, triplets)
    }

    /// Largest absolute entry (0 for the zero matrix).
    pub fn max_abs(&self) -> f64 {
        self.triplets().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }
}

/// `T^w e` for a sparse operator tuple (rightmost letter applied first).
pub fn apply_word(ops: &[SparseMatrix], w: &Word, v: &SparseVec) -> SparseVec {
    w.letters().iter().rev().fold(v.clone(), |acc, &l| ops[l - 1].apply(&acc))
}

/// `(T^w)* e` for a sparse tuple given through its adjoints.
pub fn apply_word_adjoint(adjoints: &[SparseMatrix], w: &Word, v: &SparseVec) -> SparseVec {
    w.letters().iter().fold(v.clone(), |acc, &l| adjoints[l - 1].apply(&acc))
}

/// Orthonormal basis `e^α` of admissible words of length `≤ N` in length-lex order.
#[derive(Clone, Debug)]
pub struct TruncatedFock {
    a: TransitionMatrix,
    full: bool,
    level: usize,
    basis: Vec<Word>,
    index: HashMap<Word, usize>,
    level_offsets: Vec<usize>,
}

impl TruncatedFock {
    /// The A-Fock space truncated at level `N`.
    pub fn new(a: &TransitionMatrix, level: usize) -> Result<Self> {
        Self::build(a.clone(), false, level)
    }

    /// The full Fock space over `ℂⁿ` truncated at level `N`.
    pub fn full(n: usize, level: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("alphabet size must be positive"));
        }
        Self::build(TransitionMatrix::all_ones(n), true, level)
    }

    fn build(a: TransitionMatrix, full: bool, level: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::input("truncation level must be at least 1"));
        }
        let mut basis = Vec::new();
        let mut level_offsets = vec![0];
        for m in 0..=level {
            basis.extend(enumerate_admissible(&a, m));
            level_offsets.push(basis.len());
        }
        let index = basis.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect();
        Ok(TruncatedFock { a, full, level, basis, index, level_offsets })
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.a
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Word] {
        &self.basis
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn word(&self, k: usize) -> &Word {
        &self.basis[k]
    }

    /// Number of basis vectors of level `≤ m` (levels above `N` are clamped).
    pub fn dim_up_to(&self, m: usize) -> usize {
        self.level_offsets[m.min(self.level) + 1]
    }

    /// Indices of basis words of exactly level `m`.
    pub fn level_range(&self, m: usize) -> std::ops::Range<usize> {
        self.level_offsets[m]..self.level_offsets[m + 1]
    }

    /// Isometric frame onto the span of basis words of level `≤ m`.
    pub fn interior_frame(&self, m: usize) -> CMat {
        let k = self.dim_up_to(m);
        let mut f = zeros(self.dim(), k);
        for j in 0..k {
            f[(j, j)] = ONE;
        }
        f
    }

    fn basis_map(&self, image: impl Fn(&Word) -> Option<Word>) -> SparseMatrix {
        let triplets = self.basis.iter().enumerate().filter_map(|(col, w)| {
            if w.len() >= self.level {
                return None;
            }
            image(w).and_then(|t| self.index_of(&t)).map(|row| (row, col, ONE))
        });
        SparseMatrix::from_triplets(self.dim(), self.dim(), triplets.collect::<Vec<_>>())
    }

    /// `S_i e^α = e^{iα}` when `iα` is admissible, 0 otherwise; the top level maps to 0.
    pub fn creation_s(&self) -> Vec<SparseMatrix> {
        (1..=self.n())
            .map(|i| {
                self.basis_map(|w| match w.first() {
                    Ok(f) if !self.a.allows(i, f) => None,
                    _ => Some(w.prepend(i)),
                })
            })
            .collect()
    }

    /// Adjoints of [`Self::creation_s`]: `S_i* e^α` deletes a leading `i`.
    pub fn annihilation_s_star(&self) -> Vec<SparseMatrix> {
        self.creation_s().iter().map(SparseMatrix::adjoint).collect()
    }

    /// The deletion formula `S_i* e^α = δ_{iα_1} e^{α_2⋯α_m}`, `S_i* ω = 0`, evaluated directly.
    pub fn deletion(&self, i: usize, w: &Word) -> SparseVec {
        match w.first() {
            Ok(f) if f == i => self.index_of(&w.tail()).map(sparse_unit).unwrap_or_default(),
            _ => SparseVec::new(),
        }
    }

    /// Right creation `X_i e^α = e^{αi}` when `αi` is admissible; the top level maps to 0.
    pub fn creation_x(&self) -> Vec<SparseMatrix> {
        (1..=self.n())
            .map(|i| {
                self.basis_map(|w| match w.last() {
                    Ok(l) if !self.a.allows(l, i) => None,
                    _ => Some(w.append(i)),
                })
            })
            .collect()
    }

    /// Rank-one projection onto the vacuum.
    pub fn vacuum_projection(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.dim(), self.dim(), [(0, 0, ONE)])
    }

    /// The creation tuple as dense matrices (small spaces only).
    pub fn s_tuple(&self) -> OperatorTuple {
        OperatorTuple::new(self.creation_s().iter().map(SparseMatrix::to_dense).collect())
            .expect("creation operators are square")
    }

    /// Right creation tuple as dense matrices.
    pub fn x_tuple(&self) -> OperatorTuple {
        OperatorTuple::new(self.creation_x().iter().map(SparseMatrix::to_dense).collect())
            .expect("creation operators are square")
    }

    fn interior_indices(&self, max_level: usize) -> std::ops::Range<usize> {
        0..self.dim_up_to(max_level)
    }

    /// `max ‖(I − Σ S_i S_i* − P_0) e^α‖` over basis words of level `≤ max_level`.
    pub fn vacuum_identity_residual(&self, max_level: usize) -> f64 {
        let s = self.creation_s();
        let s_star = self.annihilation_s_star();
        let p0 = self.vacuum_projection();
        self.interior_indices(max_level)
            .map(|k| {
                let e = sparse_unit(k);
                let mut v = sparse_axpy(&e, -ONE, &p0.apply(&e));
                for i in 0..self.n() {
                    v = sparse_axpy(&v, -ONE, &s[i].apply(&s_star[i].apply(&e)));
                }
                sparse_norm(&v)
            })
            .fold(0.0, f64::max)
    }

    /// `max_{i≠j} |S_i* S_j|` entrywise over the whole truncated space.
    pub fn orthogonal_ranges_residual(&self) -> f64 {
        let s = self.creation_s();
        let s_star = self.annihilation_s_star();
        let mut worst: f64 = 0.0;
        for (i, si_star) in s_star.iter().enumerate() {
            for (j, sj) in s.iter().enumerate() {
                if i != j {
                    worst = worst.max(si_star.mul(sj).max_abs());
                }
            }
        }
        worst
    }

    /// `max ‖(S_i S_i* S_i − S_i) e^α‖` over basis words of level `≤ max_level`.
    pub fn partial_isometry_residual(&self, max_level: usize) -> f64 {
        let s = self.creation_s();
        let s_star = self.annihilation_s_star();
        let mut worst: f64 = 0.0;
        for k in self.interior_indices(max_level) {
            let e = sparse_unit(k);
            for i in 0..self.n() {
                let se = s[i].apply(&e);
                let sss = s[i].apply(&s_star[i].apply(&se));
                worst = worst.max(sparse_distance(&sss, &se));
            }
        }
        worst
    }

    /// Compares, on each basis word of level `≤ max_level`, the four expressions
    /// `S_i* S_i`, `I − Σ_j (1 − a_ij) S_j S_j*`, `P_0 + Σ_j a_ij S_j S_j*` and the
    /// explicit value (`ω` on the vacuum, `a_{iα_1} e^α` otherwise).
    pub fn cuntz_krieger_residual(&self, max_level: usize) -> f64 {
        let s = self.creation_s();
        let s_star = self.annihilation_s_star();
        let p0 = self.vacuum_projection();
        let mut worst: f64 = 0.0;
        for k in self.interior_indices(max_level) {
            let e = sparse_unit(k);
            let w = &self.basis[k];
            let ssj: Vec<SparseVec> = (0..self.n()).map(|j| s[j].apply(&s_star[j].apply(&e))).collect();
            for i in 1..=self.n() {
                let explicit = match w.first() {
                    Ok(f) if !self.a.allows(i, f) => SparseVec::new(),
                    _ => e.clone(),
                };
                let lhs = s_star[i - 1].apply(&s[i - 1].apply(&e));
                let mut second = e.clone();
                let mut third = p0.apply(&e);
                for (j, v) in ssj.iter().enumerate() {
                    if self.a.allows(i, j + 1) {
                        third = sparse_axpy(&third, ONE, v);
                    } else {
                        second = sparse_axpy(&second, -ONE, v);
                    }
                }
                for candidate in [&lhs, &second, &third] {
                    worst = worst.max(sparse_distance(candidate, &explicit));
                }
            }
        }
        worst
    }

    /// Word-level identities for words of length `1..=max_len`, measured on basis
    /// vectors of level `≤ N − max_len`. Returns `(partial isometry, orthogonality)`:
    /// `‖(S^α (S^α)* S^α − S^α) e^γ‖` and
    /// `‖((S^α)* S^β − δ_αβ (I − Σ_j (1 − a_{t(α)j}) S_j S_j*)) e^γ‖` for `|α| = |β|`.
    pub fn word_identity_residuals(&self, max_len: usize) -> (f64, f64) {
        let s = self.creation_s();
        let s_star = self.annihilation_s_star();
        let interior = self.level.saturating_sub(max_len);
        let mut pi: f64 = 0.0;
        let mut orth: f64 = 0.0;
        for k in self.interior_indices(interior) {
            let e = sparse_unit(k);
            let ssj: Vec<SparseVec> = (0..self.n()).map(|j| s[j].apply(&s_star[j].apply(&e))).collect();
            for m in 1..=max_len {
                let words = enumerate_admissible(&self.a, m);
                let images: Vec<SparseVec> = words.iter().map(|w| apply_word(&s, w, &e)).collect();
                for (alpha, sa) in words.iter().zip(&images) {
                    let back = apply_word(&s, alpha, &apply_word_adjoint(&s_star, alpha, sa));
                    pi = pi.max(sparse_distance(&back, sa));
                    let t = alpha.last().expect("nonempty word");
                    let mut q = e.clone();
                    for (j, v) in ssj.iter().enumerate() {
                        if !self.a.allows(t, j + 1) {
                            q = sparse_axpy(&q, -ONE, v);
                        }
                    }
                    for (beta, sb) in words.iter().zip(&images) {
                        let lhs = apply_word_adjoint(&s_star, alpha, sb);
                        let rhs = if alpha == beta { q.clone() } else { SparseVec::new() };
                        orth = orth.max(sparse_distance(&lhs, &rhs));
                    }
                }
            }
        }
        (pi, orth)
    }

    /// `max ‖S^α X^{β'} e^γ − X^{β'} S^α e^γ‖` over admissible `α, β, γ` with
    /// `|α| + |β| + |γ| ≤ max_total_len`, where `β'` is `β` reversed.
    pub fn commutant_check(&self, max_total_len: usize) -> Result<f64> {
        if max_total_len > self.level {
            return Err(Error::input(format!(
                "total word length {max_total_len} exceeds truncation level {}",
                self.level
            )));
        }
        let s = self.creation_s();
        let x = self.creation_x();
        let words = admissible_up_to(&self.a, max_total_len);
        let mut worst: f64 = 0.0;
        for gamma in &words {
            let e = sparse_unit(self.index_of(gamma).expect("basis word"));
            for alpha in words.iter().filter(|w| w.len() + gamma.len() <= max_total_len) {
                for beta in words.iter().filter(|w| w.len() + alpha.len() + gamma.len() <= max_total_len) {
                    let bp = beta.reversed();
                    let left = apply_word(&s, alpha, &apply_word(&x, &bp, &e));
                    let right = apply_word(&x, &bp, &apply_word(&s, alpha, &e));
                    worst = worst.max(sparse_distance(&left, &right));
                }
            }
        }
        Ok(worst)
    }
}

/// Whether the letters of `w` satisfy `a_{w_i w_j} = 1` for all positions `i ≠ j`.
pub fn in_sym_admissible(a: &TransitionMatrix, w: &Word) -> bool {
    let l = w.letters();
    if l.len() <= 1 {
        return true;
    }
    (0..l.len()).all(|p| (0..l.len()).all(|q| p == q || a.allows(l[p], l[q])))
}

/// Letter multiplicities of a word over `{1, …, n}`.
pub fn letter_counts(n: usize, w: &Word) -> Vec<usize> {
    let mut c = vec![0; n];
    for &l in w.letters() {
        c[l - 1] += 1;
    }
    c
}

/// All distinct rearrangements of the multiset with multiplicities `counts`, lexicographically.
pub fn multiset_permutations(counts: &[usize]) -> Vec<Word> {
    fn go(counts: &mut [usize], left: usize, cur: &mut Vec<usize>, out: &mut Vec<Word>) {
        if left == 0 {
            out.push(Word::new(cur.clone()));
            return;
        }
        for l in 0..counts.len() {
            if counts[l] > 0 {
                counts[l] -= 1;
                cur.push(l + 1);
                go(counts, left - 1, cur, out);
                cur.pop();
                counts[l] += 1;
            }
        }
    }
    let mut counts = counts.to_vec();
    let total = counts.iter().sum();
    let mut out = Vec::new();
    go(&mut counts, total, &mut Vec::new(), &mut out);
    out
}

/// Truncated commuting A-Fock space: orbit-normalized symmetrizations of the
/// words `α` with `a_{α_iα_j} = 1` for all positions `i ≠ j`.
#[derive(Clone, Debug)]
pub struct SymTruncatedFock {
    ambient: TruncatedFock,
    reps: Vec<Word>,
    counts: Vec<Vec<usize>>,
    vectors: Vec<SparseVec>,
    index: HashMap<Vec<usize>, usize>,
}

impl SymTruncatedFock {
    pub fn new(a: &TransitionMatrix, level: usize) -> Result<Self> {
        let ambient = TruncatedFock::new(a, level)?;
        let n = a.n();
        let mut reps = Vec::new();
        let mut counts = Vec::new();
        let mut vectors = Vec::new();
        let mut index = HashMap::new();
        for m in 0..=level {
            // sorted words are the orbit representatives
            for w in enumerate_admissible(&TransitionMatrix::all_ones(n), m) {
                if !w.letters().windows(2).all(|p| p[0] <= p[1]) || !in_sym_admissible(a, &w) {
                    continue;
                }
                let c = letter_counts(n, &w);
                let orbit = multiset_permutations(&c);
                let scale = 1.0 / (orbit.len() as f64).sqrt();
                let v: SparseVec = orbit
                    .iter()
                    .map(|u| (ambient.index_of(u).expect("rearrangements stay admissible"), Complex64::new(scale, 0.0)))
                    .collect();
                index.insert(c.clone(), reps.len());
                reps.push(w);
                counts.push(c);
                vectors.push(v);
            }
        }
        Ok(SymTruncatedFock { ambient, reps, counts, vectors, index })
    }

    pub fn ambient(&self) -> &TruncatedFock {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn level(&self) -> usize {
        self.ambient.level()
    }

    pub fn representatives(&self) -> &[Word] {
        &self.reps
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    /// Orbit-normalized vector of basis element `k` in ambient coordinates.
    pub fn vector(&self, k: usize) -> &SparseVec {
        &self.vectors[k]
    }

    /// Isometric embedding `E` of the symmetric space into the ambient A-Fock space.
    pub fn embedding(&self) -> SparseMatrix {
        let triplets = self
            .vectors
            .iter()
            .enumerate()
            .flat_map(|(c, v)| v.iter().map(move |(&r, &x)| (r, c, x)))
            .collect::<Vec<_>>();
        SparseMatrix::from_triplets(self.ambient.dim(), self.dim(), triplets)
    }

    fn compatible(&self, i: usize, counts: &[usize]) -> bool {
        let a = self.ambient.transition();
        counts
            .iter()
            .enumerate()
            .all(|(l, &c)| c == 0 || (a.allows(i, l + 1) && a.allows(l + 1, i)))
    }

    /// `W_i u_c = √((c_i+1)/(m+1)) u_{c+e_i}` when `a_{il} a_{li} = 1` for every letter `l`
    /// of the representative, 0 otherwise; the top level maps to 0.
    pub fn creation_w(&self) -> Vec<CMat> {
        let n = self.ambient.n();
        let d = self.dim();
        (1..=n)
            .map(|i| {
                let mut w = zeros(d, d);
                for (k, c) in self.counts.iter().enumerate() {
                    let m = self.reps[k].len();
                    if m >= self.level() || !self.compatible(i, c) {
                        continue;
                    }
                    let mut next = c.clone();
                    next[i - 1] += 1;
                    if let Some(&row) = self.index.get(&next) {
                        let f = ((c[i - 1] + 1) as f64 / (m + 1) as f64).sqrt();
                        w[(row, k)] = Complex64::new(f, 0.0);
                    }
                }
                w
            })
            .collect()
    }

    pub fn w_tuple(&self) -> OperatorTuple {
        OperatorTuple::new(self.creation_w()).expect("square matrices")
    }

    /// Eigenvalue of `[W_i, W_i*]` on basis element `k` (the commutator is diagonal
    /// in the orbit-normalized basis): `c_i/m − (c_i+1)/(m+1)` when `i` is compatible
    /// with every letter (`−1` on the vacuum), `1/m` when `α` contains `i` and
    /// `a_ii = 0`, and 0 otherwise.
    pub fn commutator_eigenvalue(&self, i: usize, k: usize) -> f64 {
        let c = &self.counts[k];
        let m = self.reps[k].len();
        if m == 0 {
            return -1.0;
        }
        let ci = c[i - 1] as f64;
        let mf = m as f64;
        if self.compatible(i, c) {
            ci / mf - (ci + 1.0) / (mf + 1.0)
        } else if c[i - 1] > 0 && !self.ambient.transition().allows(i, i) {
            1.0 / mf
        } else {
            0.0
        }
    }

    /// `max |[W_i,W_i*]u_c − λ u_c|` over basis elements of level `≤ N − 1`.
    pub fn commutator_residual(&self) -> f64 {
        let w = self.creation_w();
        let interior: Vec<usize> = (0..self.dim()).filter(|&k| self.reps[k].len() < self.level()).collect();
        let mut worst: f64 = 0.0;
        for (i, wi) in w.iter().enumerate() {
            let comm = wi * wi.adjoint() - wi.adjoint() * wi;
            for &k in &interior {
                let mut col = comm.column(k).into_owned();
                col[k] -= Complex64::new(self.commutator_eigenvalue(i + 1, k), 0.0);
                worst = worst.max(col.norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip() -> TransitionMatrix {
        TransitionMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    fn w(l: &[usize]) -> Word {
        Word::new(l.to_vec())
    }

    #[test]
    fn dimensions() {
        assert_eq!(TruncatedFock::new(&flip(), 3).unwrap().dim(), 7);
        assert_eq!(TruncatedFock::full(2, 2).unwrap().dim(), 7);
        let f = TruncatedFock::new(&flip(), 3).unwrap();
        assert_eq!(f.word(0), &Word::empty());
        assert!(TruncatedFock::new(&flip(), 0).is_err());
    }

    #[test]
    fn creation_and_annihilation_examples() {
        let f = TruncatedFock::new(&flip(), 3).unwrap();
        let s = f.creation_s();
        let idx = |l: &[usize]| f.index_of(&w(l)).unwrap();
        assert_eq!(s[0].apply(&sparse_unit(idx(&[2, 1]))), sparse_unit(idx(&[1, 2, 1])));
        assert!(s[0].apply(&sparse_unit(idx(&[1, 2]))).is_empty());
        assert_eq!(s[0].apply(&sparse_unit(0)), sparse_unit(idx(&[1])));
        let ss = f.annihilation_s_star();
        assert_eq!(ss[0].apply(&sparse_unit(idx(&[1, 2, 1]))), sparse_unit(idx(&[2, 1])));
        assert!(ss[0].apply(&sparse_unit(0)).is_empty());
        assert!(ss[1].apply(&sparse_unit(idx(&[1, 2]))).is_empty());
        for k in 0..f.dim() {
            for i in 1..=2 {
                assert_eq!(ss[i - 1].apply(&sparse_unit(k)), f.deletion(i, f.word(k)));
            }
        }
    }

    #[test]
    fn right_creation_examples() {
        let f = TruncatedFock::new(&flip(), 3).unwrap();
        let x = f.creation_x();
        let idx = |l: &[usize]| f.index_of(&w(l)).unwrap();
        assert_eq!(x[0].apply(&sparse_unit(0)), sparse_unit(idx(&[1])));
        assert_eq!(x[0].apply(&sparse_unit(idx(&[2]))), sparse_unit(idx(&[2, 1])));
        assert!(x[0].apply(&sparse_unit(idx(&[1]))).is_empty());
    }

    #[test]
    fn vacuum_identity_is_exact() {
        let f = TruncatedFock::new(&flip(), 4).unwrap();
        assert_eq!(f.vacuum_identity_residual(3), 0.0);
        assert_eq!(f.orthogonal_ranges_residual(), 0.0);
        assert_eq!(f.partial_isometry_residual(3), 0.0);
        assert_eq!(f.cuntz_krieger_residual(3), 0.0);
        let p0 = f.vacuum_projection().to_dense();
        assert_eq!(p0[(0, 0)], ONE);
        assert_eq!(crate::linalg::frobenius(&p0), 1.0);
    }

    #[test]
    fn top_level_breaks_cuntz_krieger_relation() {
        let f = TruncatedFock::new(&flip(), 3).unwrap();
        assert!(f.cuntz_krieger_residual(3) > 0.5);
    }

    #[test]
    fn commutant_examples() {
        let f = TruncatedFock::new(&flip(), 5).unwrap();
        assert_eq!(f.commutant_check(4).unwrap(), 0.0);
        let g = TruncatedFock::full(2, 4).unwrap();
        assert_eq!(g.commutant_check(4).unwrap(), 0.0);
        assert!(f.commutant_check(6).is_err());
    }

    #[test]
    fn multiset_orbits() {
        let p = multiset_permutations(&[2, 1]);
        assert_eq!(p, vec![w(&[1, 1, 2]), w(&[1, 2, 1]), w(&[2, 1, 1])]);
    }

    #[test]
    fn symmetric_creation_examples() {
        let a = TransitionMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let fs = SymTruncatedFock::new(&a, 3).unwrap();
        let ws = fs.creation_w();
        let idx = |c: Vec<usize>| fs.index[&c];
        assert_eq!(ws[0][(idx(vec![1, 0]), 0)], ONE);
        let v = ws[0][(idx(vec![1, 1]), idx(vec![0, 1]))];
        assert!((v.re - (0.5f64).sqrt()).abs() < 1e-15);
        let b = TransitionMatrix::new(vec![vec![1, 1], vec![0, 1]]).unwrap();
        let fb = SymTruncatedFock::new(&b, 3).unwrap();
        let wb = fb.creation_w();
        let col = fb.index[&vec![0, 1]];
        assert!(wb[0].column(col).iter().all(|z| *z == ZERO));
    }

    #[test]
    fn symmetric_space_orthonormal() {
        let a = TransitionMatrix::new(vec![vec![1, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        let fs = SymTruncatedFock::new(&a, 4).unwrap();
        let e = fs.embedding().to_dense();
        assert!(crate::linalg::isometry_defect(&e) < 1e-14);
        assert!(fs.commutator_residual() < 1e-12);
    }
}
