//! Seeded generators for test inputs.
//!
//! Every generator takes the caller's RNG, so a fixed seed reproduces the same
//! sequence of instances.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fock::TruncatedFock;
use crate::linalg::{extend_orthonormal, frame_from_columns, zeros, CMat, CVec};
use crate::tuples::OperatorTuple;
use crate::words::TransitionMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rng: &mut impl Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| gaussian(rng))
}

pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> CVec {
    loop {
        let v = CVec::from_fn(dim, |_, _| gaussian(rng));
        let nv = v.norm();
        if nv > 1e-8 {
            return v.unscale(nv);
        }
    }
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMat {
    let qr = gaussian_matrix(rng, d, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { Complex64::new(1.0, 0.0) };
        for x in q.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// Uniform 0-1 matrix conditioned on every row and column being nonzero.
pub fn random_transition(rng: &mut impl Rng, n: usize) -> TransitionMatrix {
    loop {
        let rows: Vec<Vec<u8>> = (0..n).map(|_| (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect()).collect();
        if let Ok(a) = TransitionMatrix::new(rows) {
            return a;
        }
    }
}

/// Arbitrary tuple of Gaussian matrices scaled to row norm `scale`.
pub fn random_tuple(rng: &mut impl Rng, n: usize, d: usize, scale: f64) -> OperatorTuple {
    let t = OperatorTuple::new((0..n).map(|_| gaussian_matrix(rng, d, d)).collect()).expect("nonempty square tuple");
    let norm = crate::linalg::op_norm(&t.row_square()).sqrt();
    t.scaled(scale / norm)
}

/// Compresses the A-Fock creation tuple to a random co-invariant subspace.
///
/// The subspace is the `S*`-hull of `seeds` random combinations of basis words
/// of length `≤ depth`, then rotated by a random unitary. Its dimension is
/// capped at `max_dim`; seeds that would overflow the cap are dropped.
pub fn random_coinvariant_compression(
    rng: &mut impl Rng,
    a: &TransitionMatrix,
    depth: usize,
    seeds: usize,
    max_dim: usize,
) -> Result<OperatorTuple> {
    let fock = TruncatedFock::new(a, depth + 1)?;
    let s = fock.s_tuple();
    let stars: Vec<CMat> = s.adjoints();
    let pool = fock.dim_up_to(depth);
    let mut basis: Vec<CVec> = Vec::new();
    for _ in 0..seeds {
        let mut v = CVec::zeros(fock.dim());
        let support = rng.random_range(1..=3usize);
        for _ in 0..support {
            v[rng.random_range(0..pool)] += gaussian(rng);
        }
        let mut trial = basis.clone();
        let mut fresh = vec![v];
        while !fresh.is_empty() && trial.len() <= max_dim {
            let start = trial.len();
            extend_orthonormal(&mut trial, fresh, 1e-10, fock.dim());
            fresh = trial[start..].iter().flat_map(|x| stars.iter().map(move |m| m * x)).collect();
        }
        if trial.len() <= max_dim {
            basis = trial;
        }
    }
    if basis.is_empty() {
        return Err(Error::input("max_dim too small for any co-invariant seed"));
    }
    let v = frame_from_columns(fock.dim(), &basis);
    let u = random_unitary(rng, v.ncols());
    let v = v * u;
    OperatorTuple::new(s.mats().iter().map(|m| v.adjoint() * m * &v).collect())
}

/// A unital A-relation tuple on `ℂ^n`: `T_i = e_i v_i*` with `v_i` a unit vector
/// supported on `{j : a_ij = 1}`, conjugated by a random unitary.
pub fn random_unital_tuple(rng: &mut impl Rng, a: &TransitionMatrix) -> OperatorTuple {
    let n = a.n();
    let mats = (1..=n)
        .map(|i| {
            let mut v = random_unit_vector(rng, n);
            for j in 1..=n {
                if !a.allows(i, j) {
                    v[j - 1] = Complex64::new(0.0, 0.0);
                }
            }
            let v = v.normalize();
            let mut t = zeros(n, n);
            t.row_mut(i - 1).copy_from(&v.adjoint());
            t
        })
        .collect();
    let t = OperatorTuple::new(mats).expect("square tuple");
    t.conjugate(&random_unitary(rng, n))
}

/// Direct sum of `copies` independent unital tuples, dimension `copies · n`.
pub fn random_unital_sum(rng: &mut impl Rng, a: &TransitionMatrix, copies: usize) -> OperatorTuple {
    let mut t = random_unital_tuple(rng, a);
    for _ in 1..copies {
        t = t.direct_sum(&random_unital_tuple(rng, a)).expect("same arity");
    }
    t
}

/// Random point on the unit sphere supported on `support` (1-based letters).
pub fn random_sphere_point(rng: &mut impl Rng, n: usize, support: &[usize]) -> Vec<Complex64> {
    let v = random_unit_vector(rng, support.len());
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for (k, &i) in support.iter().enumerate() {
        z[i - 1] = v[k];
    }
    z
}
