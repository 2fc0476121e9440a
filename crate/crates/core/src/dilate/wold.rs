//! Wold decomposition of a Cuntz-Krieger tuple `H = H_C ⊕ H_N`, where
//! `H_C` is generated by the wandering subspace `range(I − Σ T_i T_i*)` and
//! `H_N = range(lim P_k)` with `P_k = Σ_{|α|=k} T^α (T^α)*`.

use serde::{Deserialize, Serialize};

use crate::dilate::kernel::KernelDilation;
use crate::error::{Error, Result};
use crate::linalg::{columns, complement, extend_orthonormal, frame_from_columns, identity, op_norm, orth, projector, CMat};
use crate::tuples::{level_sums, partial_isometry_checks, purity_profile, OperatorTuple};
use crate::words::TransitionMatrix;

#[derive(Clone, Debug)]
pub struct WoldDecomposition {
    /// `P_N = lim P_k`.
    pub limit: CMat,
    /// Level at which `P_k` stabilised.
    pub converged_at: usize,
    /// `‖P_{k+1} − P_k‖` for `k = 0, 1, …`.
    pub increments: Vec<f64>,
    pub wandering: CMat,
    /// Frame of `H_C`.
    pub shift_part: CMat,
    /// Frame of `H_N`.
    pub cuntz_part: CMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WoldReport {
    /// `‖P_N − P_{H_N}‖`.
    pub limit_projection: f64,
    /// `max_i ‖(I − P) T_i P‖ + ‖P T_i (I − P)‖` for `P = P_{H_C}`.
    pub reducing: f64,
    /// `‖P_{H_N} (I − Σ T_i T_i*) P_{H_N}‖`.
    pub cuntz_unitality: f64,
    pub shift_dim: usize,
    pub cuntz_dim: usize,
}

/// Computes the decomposition, iterating `P_k` up to `k_max`. The relations
/// `T_i* T_i = I − Σ_j (1 − a_ij) T_j T_j*` are required, on `domain` when given.
pub fn wold(t: &OperatorTuple, a: &TransitionMatrix, k_max: usize, tol: f64, domain: Option<&CMat>) -> Result<WoldDecomposition> {
    let pre = partial_isometry_checks(t, a, 1, domain)?;
    if !pre.passes(tol.max(1e-9)) {
        return Err(Error::domain(format!(
            "tuple is not a Cuntz-Krieger family (residual {:e})",
            pre.max_residual()
        )));
    }
    if k_max == 0 {
        return Err(Error::input("k_max must be at least 1"));
    }
    let d = t.dim();
    let mut prev = identity(d);
    let mut increments = Vec::new();
    let mut calm = 0;
    let mut converged_at = None;
    for (k, pk) in level_sums(t, a, k_max)?.into_iter().enumerate() {
        let inc = op_norm(&(&pk - &prev));
        increments.push(inc);
        calm = if inc <= tol { calm + 1 } else { 0 };
        prev = pk;
        if calm == 2 {
            converged_at = Some(k + 1);
            break;
        }
    }
    let Some(converged_at) = converged_at else {
        return Err(Error::Construction {
            message: format!("P_k did not stabilise within {k_max} levels"),
            diagnostics: increments,
        });
    };
    let wandering = orth(&t.deficiency(), 1e-8);
    let mut basis = columns(&wandering);
    let mut fresh = basis.clone();
    while !fresh.is_empty() && basis.len() < d {
        let start = basis.len();
        let candidates = fresh.iter().flat_map(|v| t.mats().iter().map(move |m| m * v)).collect();
        extend_orthonormal(&mut basis, candidates, 1e-8, d);
        fresh = basis[start..].to_vec();
    }
    let shift_part = frame_from_columns(d, &basis);
    let cuntz_part = complement(&shift_part);
    Ok(WoldDecomposition { limit: prev, converged_at, increments, wandering, shift_part, cuntz_part })
}

impl WoldDecomposition {
    pub fn report(&self, t: &OperatorTuple) -> WoldReport {
        let pc = projector(&self.shift_part);
        let pn = projector(&self.cuntz_part);
        let id = identity(t.dim());
        let reducing = t
            .mats()
            .iter()
            .map(|m| op_norm(&((&id - &pc) * m * &pc)) + op_norm(&(&pc * m * (&id - &pc))))
            .fold(0.0, f64::max);
        WoldReport {
            limit_projection: op_norm(&(&self.limit - &pn)),
            reducing,
            cuntz_unitality: op_norm(&(&pn * t.deficiency() * &pn)),
            shift_dim: self.shift_part.ncols(),
            cuntz_dim: self.cuntz_part.ncols(),
        }
    }
}

/// Purity profile `p_1, …, p_{k_max}` of `Q`, the compression of the kernel
/// dilation to the orthocomplement of the embedded space.
pub fn q_purity_check(kd: &KernelDilation, a: &TransitionMatrix, k_max: usize) -> Result<Vec<f64>> {
    let e = complement(&kd.result.embedding);
    if e.ncols() == 0 {
        return Ok(vec![0.0; k_max]);
    }
    let q = OperatorTuple::new(kd.result.tuple.mats().iter().map(|m| e.adjoint() * m * &e).collect())?;
    purity_profile(&q, a, k_max)
}
