//! Dense complex linear algebra shared by every module.
//!
//! Everything is built on `nalgebra::DMatrix<Complex64>`. Frames (orthonormal
//! column sets) are produced by a pivoted, re-orthogonalized Gram-Schmidt
//! sweep so that outputs are reproducible bit-for-bit; spectral data comes
//! from nalgebra's Hermitian eigensolver and SVD.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Builds a complex matrix from real row-major data.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMat::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

/// Spectral norm (largest singular value). Empty matrices have norm 0.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    // ‖M‖² is the top eigenvalue of the smaller Gram matrix
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let top = hermitian_eig(&gram).0.first().copied().unwrap_or(0.0);
    top.max(0.0).sqrt()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues in descending order.
pub fn hermitian_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eig(m).0.last().copied().unwrap_or(0.0)
}

/// Positive square root of a Hermitian PSD matrix; eigenvalues in `[-clip, 0)` are treated as 0.
/// Returns `None` when an eigenvalue is below `-clip`.
pub fn psd_sqrt(m: &CMat, clip: f64) -> Option<CMat> {
    let (vals, vecs) = hermitian_eig(m);
    if vals.iter().any(|&v| v < -clip) {
        return None;
    }
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    Some(&scaled * vecs.adjoint())
}

/// Numerical rank: singular values above `rel * σ_max` (and above `abs_floor`).
pub fn rank(m: &CMat, rel: f64, abs_floor: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let cut = (rel * sv.max()).max(abs_floor);
    sv.iter().filter(|&&v| v > cut).count()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Orthogonal projector onto the column span of an orthonormal frame.
pub fn projector(frame: &CMat) -> CMat {
    frame * frame.adjoint()
}

fn project_out(v: &mut CVec, basis: &[CVec]) {
    // two passes of classical Gram-Schmidt are enough for double precision
    for _ in 0..2 {
        for q in basis {
            let coef = q.dotc(v);
            v.axpy(-coef, q, ONE);
        }
    }
}

/// Extends an orthonormal `basis` by the span of `candidates` using pivoted
/// Gram-Schmidt: at each step the candidate with the largest residual norm is
/// taken (ties go to the lowest index); residuals at or below `cutoff` are
/// discarded. At most `limit` vectors are added.
pub fn extend_orthonormal(basis: &mut Vec<CVec>, candidates: Vec<CVec>, cutoff: f64, limit: usize) {
    let mut residuals: Vec<CVec> = candidates
        .into_iter()
        .map(|mut v| {
            project_out(&mut v, basis);
            v
        })
        .collect();
    let mut added = 0;
    while added < limit && !residuals.is_empty() {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (k, v) in residuals.iter().enumerate() {
            let nv = v.norm();
            if nv > best_norm {
                best = k;
                best_norm = nv;
            }
        }
        if best_norm <= cutoff {
            break;
        }
        let mut q = residuals.remove(best);
        project_out(&mut q, basis);
        let nq = q.norm();
        if nq <= cutoff {
            continue;
        }
        q.unscale_mut(nq);
        for v in residuals.iter_mut() {
            let coef = q.dotc(v);
            v.axpy(-coef, &q, ONE);
        }
        basis.push(q);
        added += 1;
    }
}

pub fn columns(m: &CMat) -> Vec<CVec> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}

pub fn frame_from_columns(dim: usize, cols: &[CVec]) -> CMat {
    if cols.is_empty() {
        return zeros(dim, 0);
    }
    CMat::from_columns(cols)
}

/// Orthonormal frame for the column span of `m`.
pub fn orth(m: &CMat, cutoff: f64) -> CMat {
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, columns(m), cutoff, m.nrows());
    frame_from_columns(m.nrows(), &basis)
}

/// Orthonormal frame for the orthogonal complement of an orthonormal frame.
pub fn complement(frame: &CMat) -> CMat {
    let dim = frame.nrows();
    let mut basis = columns(frame);
    let k = basis.len();
    let candidates = (0..dim)
        .map(|i| {
            let mut e = CVec::zeros(dim);
            e[i] = ONE;
            e
        })
        .collect();
    extend_orthonormal(&mut basis, candidates, 1e-8, dim.saturating_sub(k));
    frame_from_columns(dim, &basis[k..])
}

/// Frame for the intersection of two subspaces given by orthonormal frames.
pub fn intersect(a: &CMat, b: &CMat) -> CMat {
    let ca = complement(a);
    let cb = complement(b);
    let mut basis = columns(&ca);
    extend_orthonormal(&mut basis, columns(&cb), 1e-8, a.nrows());
    let sum = frame_from_columns(a.nrows(), &basis);
    complement(&sum)
}

/// Largest principal angle between two subspaces, measured through
/// `sin θ_max = ‖(I − P_U) V‖` so that tiny angles are resolved accurately.
/// Subspaces of different dimension are at angle π/2.
pub fn max_principal_angle(u: &CMat, v: &CMat) -> f64 {
    if u.ncols() != v.ncols() || u.nrows() != v.nrows() {
        return std::f64::consts::FRAC_PI_2;
    }
    if u.ncols() == 0 {
        return 0.0;
    }
    let resid = v - u * (u.adjoint() * v);
    op_norm(&resid).min(1.0).asin()
}

/// ‖frame* frame − I‖, the isometry defect of a frame.
pub fn isometry_defect(frame: &CMat) -> f64 {
    op_norm(&(frame.adjoint() * frame - identity(frame.ncols())))
}

/// Unit vector `e_i` in dimension `dim`.
pub fn unit(dim: usize, i: usize) -> CVec {
    let mut e = CVec::zeros(dim);
    e[i] = ONE;
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn op_norm_of_diagonal() {
        let m = from_real_rows(&[&[3.0, 0.0], &[0.0, -4.0]]);
        assert!((op_norm(&m) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let s = psd_sqrt(&m, 1e-12).unwrap();
        assert!(op_norm(&(&s * &s - &m)) < 1e-12);
        assert!(psd_sqrt(&from_real_rows(&[&[-1.0]]), 1e-12).is_none());
    }

    #[test]
    fn complement_of_empty_frame_is_identity() {
        let comp = complement(&zeros(3, 0));
        assert_eq!(comp, identity(3));
    }

    #[test]
    fn intersection_of_coordinate_planes() {
        let xy = from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
        let yz = from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let y = intersect(&xy, &yz);
        assert_eq!(y.ncols(), 1);
        assert!(max_principal_angle(&y, &from_real_rows(&[&[0.0], &[1.0], &[0.0]])) < 1e-12);
    }

    #[test]
    fn small_angles_are_resolved() {
        let t: f64 = 1e-9;
        let u = from_real_rows(&[&[1.0], &[0.0]]);
        let v = from_real_rows(&[&[t.cos()], &[t.sin()]]);
        let a = max_principal_angle(&u, &v);
        assert!((a - t).abs() < 1e-15);
    }

    #[test]
    fn rank_ignores_roundoff() {
        let m = from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0 + 1e-17]]);
        assert_eq!(rank(&m, 1e-10, 0.0), 1);
    }
}
