//! Dilation constructions: the minimal Cuntz-Krieger dilation by the kernel
//! method and by the Poisson kernel, the minimal isometric dilation of
//! Schäffer type, and the Wold decomposition of Cuntz-Krieger tuples.

pub mod kernel;
pub mod poisson;
pub mod schaffer;
pub mod wold;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{isometry_defect, op_norm, CMat};
use crate::tuples::{eval_word, OperatorTuple};
use crate::words::{admissible_up_to, TransitionMatrix};

pub use kernel::{
    dilate_kernel, kernel_factorization_check, kernel_gram, kernel_psd_check, KernelDilation, KernelGram,
};
pub use poisson::{dilate_poisson, gram_equivalence, PoissonDilation};
pub use schaffer::{
    annihilation_residual, defect_rank_check, dilate_isometric_schaffer, dilation_annihilation_check, RankTriple,
    SchafferDilation,
};
pub use wold::{q_purity_check, wold, WoldDecomposition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Kernel,
    Poisson,
    Schaffer,
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Method::Kernel),
            "poisson" => Ok(Method::Poisson),
            "schaffer" => Ok(Method::Schaffer),
            other => Err(crate::error::Error::input(format!("unknown dilation method `{other}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Kernel => "kernel",
            Method::Poisson => "poisson",
            Method::Schaffer => "schaffer",
        })
    }
}

/// A dilation `R` of `T`: `R_i* V = V T_i*` for the embedding `V`.
#[derive(Clone, Debug)]
pub struct DilationResult {
    pub tuple: OperatorTuple,
    /// Columns span the embedded copy of the original space.
    pub embedding: CMat,
    pub method: Method,
    pub level: usize,
}

impl DilationResult {
    /// `‖V* V − I‖`.
    pub fn embedding_defect(&self) -> f64 {
        isometry_defect(&self.embedding)
    }

    /// `max_i ‖R_i* V − V T_i*‖`.
    pub fn co_invariance_residual(&self, t: &OperatorTuple) -> f64 {
        let v = &self.embedding;
        self.tuple
            .mats()
            .iter()
            .zip(t.mats())
            .map(|(r, ti)| op_norm(&(r.adjoint() * v - v * ti.adjoint())))
            .fold(0.0, f64::max)
    }

    /// `max ‖V* R^α (R^β)* V − T^α (T^β)*‖` over admissible `|α|, |β| ≤ max_len`.
    pub fn compression_residual(&self, t: &OperatorTuple, a: &TransitionMatrix, max_len: usize) -> Result<f64> {
        let v = &self.embedding;
        let words = admissible_up_to(a, max_len);
        let lifted: Vec<CMat> = words
            .iter()
            .map(|w| Ok(eval_word(&self.tuple, w)?.adjoint() * v))
            .collect::<Result<_>>()?;
        let base: Vec<CMat> = words.iter().map(|w| eval_word(t, w)).collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for (la, ta) in lifted.iter().zip(&base) {
            for (lb, tb) in lifted.iter().zip(&base) {
                worst = worst.max(op_norm(&(la.adjoint() * lb - ta * tb.adjoint())));
            }
        }
        Ok(worst)
    }
}
