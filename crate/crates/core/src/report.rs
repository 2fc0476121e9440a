//! Verification reports: every identity evaluated as a residual against a
//! threshold, with the formula it checks and the subspace it is scoped to.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dilate::{
    defect_rank_check, dilate_isometric_schaffer, dilate_kernel, dilate_poisson, kernel_factorization_check,
    annihilation_residual, wold, KernelDilation,
};
use crate::error::{Error, Result};
use crate::fock::TruncatedFock;
use crate::linalg::{direct_sum, min_eigenvalue};
use crate::pieces::{maximal_piece, maximal_piece_oracle, preset_polysets, PolyPreset};
use crate::random::{random_coinvariant_compression, random_tuple, random_unitary, seeded};
use crate::tuples::{
    is_row_contraction, partial_isometry_checks, purity_profile, satisfies_a_relations, OperatorTuple, DEFAULT_TOL,
};
use crate::variety::point_in_m;
use crate::words::{count_admissible, TransitionMatrix};

/// Threshold for identities that hold exactly in the constructed models.
pub const EXACT_THRESHOLD: f64 = 1e-9;
/// Threshold for the smallest kernel eigenvalue (relative to the largest).
pub const PSD_THRESHOLD: f64 = 1e-8;
/// Poisson truncation is lowered until at most this many words are admissible.
pub const POISSON_WORD_BUDGET: u128 = 20_000;

/// Every check the suite knows, in emission order.
pub const CHECK_IDS: &[&str] = &[
    "contractivity",
    "a_relations",
    "kernel_psd",
    "kernel_factorization",
    "dilation_co_invariance",
    "dilation_compression",
    "dilation_minimality",
    "ck_relation",
    "word_orthogonality",
    "word_partial_isometry",
    "poisson_isometry",
    "annihilation",
    "defect_ranks",
    "wold_projections",
    "commutant",
    "variety_membership",
    "oracle_agreement",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    /// The identity being checked, as a formula.
    pub citation: String,
    pub residual: f64,
    pub threshold: f64,
    /// Where the identity is evaluated (truncation scoping).
    pub scope: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn new(id: &str, citation: &str, scope: impl Into<String>, residual: f64, threshold: f64) -> Self {
        CheckRecord {
            id: id.to_string(),
            citation: citation.to_string(),
            residual,
            threshold,
            scope: scope.into(),
            pass: residual <= threshold,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// A check whose construction failed; the residual is pinned to `f64::MAX`.
    pub fn failed(id: &str, citation: &str, scope: impl Into<String>, threshold: f64, err: &str) -> Self {
        CheckRecord::new(id, citation, scope, f64::MAX, threshold).with_detail(err)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<CheckRecord>,
    pub artifacts: BTreeMap<String, Value>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Pretty JSON; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Kernel level `m`.
    pub level: usize,
    /// Fock level for the isometric dilation and the commutant check.
    pub fock_level: usize,
    /// Largest Poisson truncation level.
    pub poisson_level: usize,
    pub tol: f64,
    /// Scaling used on the Poisson path when the tuple is not pure.
    pub r: f64,
    /// `None` runs everything.
    pub checks: Option<Vec<String>>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { level: 3, fock_level: 4, poisson_level: 12, tol: DEFAULT_TOL, r: 0.5, checks: None, seed: 0 }
    }
}

impl SuiteConfig {
    fn selected(&self) -> Result<Vec<&'static str>> {
        match &self.checks {
            None => Ok(CHECK_IDS.to_vec()),
            Some(list) => {
                if let Some(bad) = list.iter().find(|c| !CHECK_IDS.contains(&c.as_str())) {
                    return Err(Error::input(format!("unknown check `{bad}`")));
                }
                Ok(CHECK_IDS.iter().copied().filter(|id| list.iter().any(|c| c == id)).collect())
            }
        }
    }
}

struct Ctx<'a> {
    t: &'a OperatorTuple,
    a: &'a TransitionMatrix,
    cfg: &'a SuiteConfig,
    kernel: Option<std::result::Result<KernelDilation, String>>,
    artifacts: BTreeMap<String, Value>,
}

impl Ctx<'_> {
    fn kernel(&mut self) -> std::result::Result<&KernelDilation, String> {
        if self.kernel.is_none() {
            self.kernel = Some(dilate_kernel(self.t, self.a, self.cfg.level, self.cfg.tol).map_err(|e| e.to_string()));
        }
        self.kernel.as_ref().expect("just set").as_ref().map_err(Clone::clone)
    }
}

fn guarded(
    id: &str,
    citation: &str,
    scope: &str,
    threshold: f64,
    f: impl FnOnce() -> std::result::Result<(f64, Option<String>), String>,
) -> CheckRecord {
    match f() {
        Ok((residual, detail)) => {
            let rec = CheckRecord::new(id, citation, scope, residual, threshold);
            match detail {
                Some(d) => rec.with_detail(d),
                None => rec,
            }
        }
        Err(e) => CheckRecord::failed(id, citation, scope, threshold, &e),
    }
}

fn text(e: Error) -> String {
    e.to_string()
}

fn run_one(id: &str, ctx: &mut Ctx) -> Option<CheckRecord> {
    let (t, a, cfg) = (ctx.t, ctx.a, ctx.cfg);
    let m = cfg.level;
    let rec = match id {
        "contractivity" => {
            let rep = is_row_contraction(t, cfg.tol);
            CheckRecord::new(id, "Σ T_i T_i* ≤ I", "input tuple", (-rep.min_eigenvalue).max(0.0), cfg.tol)
                .with_detail(format!("unital: {}", rep.unital))
        }
        "a_relations" => guarded(id, "T_i T_j = a_ij T_i T_j", "input tuple", cfg.tol, || {
            let rep = satisfies_a_relations(t, a, cfg.tol).map_err(text)?;
            Ok((rep.max_violation, rep.worst_pair.map(|(i, j)| format!("worst pair ({i}, {j})"))))
        }),
        "kernel_psd" => guarded(id, "K^(m) ≥ 0", &format!("kernel matrix, words of length ≤ {m}"), PSD_THRESHOLD, || {
            let kd = ctx.kernel()?;
            let top = kd.eigenvalues.first().copied().unwrap_or(0.0).max(1.0);
            let bottom = min_eigenvalue(kd.gram.matrix());
            Ok(((-bottom / top).max(0.0), Some(format!("min eigenvalue {bottom:e}"))))
        }),
        "kernel_factorization" => guarded(
            id,
            "K^(m) = L_1 ⋯ L_m Q^(m) L_m* ⋯ L_1*",
            &format!("kernel matrix, words of length ≤ {m}; non-unital tuples augmented by Δ_T"),
            EXACT_THRESHOLD,
            || {
                let rep = kernel_factorization_check(t, a, m, cfg.tol).map_err(text)?;
                Ok((rep.residual, Some(format!("augmented: {}", rep.augmented))))
            },
        ),
        "dilation_co_invariance" => guarded(id, "T̃_i* V = V T_i*", "kernel dilation space H_m", EXACT_THRESHOLD, || {
            Ok((ctx.kernel()?.result.co_invariance_residual(t), None))
        }),
        "dilation_compression" => guarded(
            id,
            "V* T̃^α (T̃^β)* V = T^α (T^β)*",
            &format!("admissible |α|, |β| ≤ {}", m.saturating_sub(2)),
            EXACT_THRESHOLD,
            || {
                let kd = ctx.kernel()?;
                Ok((kd.result.compression_residual(t, a, m.saturating_sub(2)).map_err(text)?, None))
            },
        ),
        "dilation_minimality" => guarded(id, "span{T̃^α V u} = H̃", "kernel dilation space H_m", 0.0, || {
            let kd = ctx.kernel()?;
            let spanned = kd.minimality_rank().map_err(text)?;
            Ok(((kd.rank as f64 - spanned as f64).abs(), Some(format!("dimension {}, spanned {spanned}", kd.rank))))
        }),
        "ck_relation" | "word_orthogonality" | "word_partial_isometry" => {
            if m < 2 {
                return None;
            }
            let (citation, scope) = match id {
                "ck_relation" => ("T̃_i* T̃_i = I − Σ_j (1 − a_ij) T̃_j T̃_j*", format!("kernel dilation on H_{}", m - 2)),
                "word_orthogonality" => {
                    ("(T̃^α)* T̃^β = δ_αβ (I − Σ_j (1 − a_t(α)j) T̃_j T̃_j*)", format!("equal-length words |α| ≤ 2 on H_{}", m - 2))
                }
                _ => ("T̃^α (T̃^α)* T̃^α = T̃^α", format!("admissible |α| ≤ 2 on H_{}", m - 2)),
            };
            guarded(id, citation, &scope, EXACT_THRESHOLD, || {
                let kd = ctx.kernel()?;
                let dom = kd.level_frame(m - 2);
                let rep = partial_isometry_checks(&kd.result.tuple, a, 2, Some(&dom)).map_err(text)?;
                Ok((
                    match id {
                        "ck_relation" => rep.relation().max(rep.partial_isometry).max(rep.orthogonal_ranges),
                        "word_orthogonality" => rep.word_orthogonality,
                        _ => rep.word_partial_isometry,
                    },
                    None,
                ))
            })
        }
        "poisson_isometry" => {
            let mut level = cfg.poisson_level.max(1);
            while level > 1 && (0..=level).map(|k| count_admissible(a, k)).sum::<u128>() > POISSON_WORD_BUDGET {
                level -= 1;
            }
            let pure = purity_profile(t, a, level + 1).map(|p| p[level] <= cfg.tol).unwrap_or(false);
            let r = if pure { None } else { Some(cfg.r) };
            let scope = match r {
                None => format!("K on Γ_A truncated at level {level}"),
                Some(r) => format!("K_r with r = {r} on Γ_A truncated at level {level}"),
            };
            match dilate_poisson(t, a, level, r, cfg.tol) {
                Ok(pd) => {
                    ctx.artifacts.insert("poisson_level".into(), json!(level));
                    CheckRecord::new(id, "‖K*K − I‖ ≤ tail bound", scope, pd.isometry_defect(), pd.tail_bound())
                }
                Err(e) => CheckRecord::failed(id, "‖K*K − I‖ ≤ tail bound", scope, 0.0, &e.to_string()),
            }
        }
        "annihilation" => {
            let n_f = cfg.fock_level.max(2);
            guarded(
                id,
                "(L̂^α L̂_i L̂_j)* H̃ = 0 for a_ij = 0",
                &format!("isometric dilation of T̃ at Fock level {n_f}, |α| ≤ {}", n_f - 2),
                EXACT_THRESHOLD,
                || {
                    let kd = ctx.kernel()?;
                    let sd = dilate_isometric_schaffer(&kd.result.tuple, n_f, cfg.tol).map_err(text)?;
                    Ok((annihilation_residual(&sd, a, n_f - 2).map_err(text)?, None))
                },
            )
        }
        "defect_ranks" => guarded(
            id,
            "rank(I − Σ T̂_i T̂_i*) = rank(I − Σ T̃_i T̃_i*) = rank(I − Σ T_i T_i*)",
            "isometric dilation at Fock level 2, kernel dilation on H_m",
            0.0,
            || {
                let r = defect_rank_check(t, a, m, 2, cfg.tol).map_err(text)?;
                let spread = r.schaffer.abs_diff(r.tuple).max(r.kernel.abs_diff(r.tuple));
                Ok((spread as f64, Some(format!("ranks ({}, {}, {})", r.schaffer, r.kernel, r.tuple))))
            },
        ),
        "wold_projections" => {
            let ck = partial_isometry_checks(t, a, 1, None).map(|r| r.passes(EXACT_THRESHOLD)).unwrap_or(false);
            if !ck {
                return None;
            }
            guarded(id, "lim Σ_{|α|=k} T^α (T^α)* = P_{H_N}", "input tuple", EXACT_THRESHOLD, || {
                let w = wold(t, a, 200, cfg.tol, None).map_err(text)?;
                let rep = w.report(t);
                Ok((
                    rep.limit_projection.max(rep.reducing).max(rep.cuntz_unitality),
                    Some(format!("dim H_C {}, dim H_N {}", rep.shift_dim, rep.cuntz_dim)),
                ))
            })
        }
        "commutant" => {
            let n_f = cfg.fock_level.max(1);
            guarded(
                id,
                "S^α X^β e^γ = X^β S^α e^γ",
                &format!("Γ_A truncated at level {n_f}, |α| + |β| + |γ| ≤ {n_f}"),
                0.0,
                || {
                    let f = TruncatedFock::new(a, n_f).map_err(text)?;
                    Ok((f.commutant_check(n_f).map_err(text)?, None))
                },
            )
        }
        "variety_membership" => {
            if t.dim() != 1 {
                return None;
            }
            let z: Vec<_> = t.mats().iter().map(|m| m[(0, 0)]).collect();
            let norm = (z.iter().map(|x| x.norm_sqr()).sum::<f64>() - 1.0).abs();
            let mut cross: f64 = 0.0;
            for i in 1..=a.n() {
                for j in (1..=a.n()).filter(|&j| !a.allows(i, j)) {
                    cross = cross.max((z[i - 1] * z[j - 1]).norm());
                }
            }
            CheckRecord::new(id, "Σ|z_i|² = 1, z_i z_j = a_ij z_i z_j", "scalar tuple", norm.max(cross), cfg.tol)
                .with_detail(format!("in M: {}", point_in_m(a, &z, cfg.tol)))
        }
        "oracle_agreement" => guarded(
            id,
            "iterative maximal piece = brute-force maximal piece",
            format!("seeded instance (seed {}), A-relation polynomials", cfg.seed).as_str(),
            1e-8,
            || {
                let mut rng = seeded(cfg.seed);
                let good = random_coinvariant_compression(&mut rng, a, 2, 2, 4).map_err(text)?;
                let noise = random_tuple(&mut rng, a.n(), 2, 0.8);
                let sum = OperatorTuple::new(
                    good.mats().iter().zip(noise.mats()).map(|(x, y)| direct_sum(x, y)).collect(),
                )
                .map_err(text)?;
                let r = sum.conjugate(&random_unitary(&mut rng, sum.dim()));
                let polys = preset_polysets(a, &PolyPreset::ARelation).map_err(text)?;
                let fast = maximal_piece(&r, &polys, 1e-9).map_err(text)?;
                let slow = maximal_piece_oracle(&r, &polys, r.dim(), 1e-9).map_err(text)?;
                Ok((fast.angle_to(&slow), Some(format!("piece dimensions {} and {}", fast.dim(), slow.dim()))))
            },
        ),
        _ => unreachable!("ids are validated"),
    };
    Some(rec)
}

/// Runs the selected checks on `T` in the fixed order of [`CHECK_IDS`].
/// Checks that do not apply (e.g. the variety check for `d > 1`) are omitted.
pub fn run_suite(t: &OperatorTuple, a: &TransitionMatrix, cfg: &SuiteConfig) -> Result<Report> {
    if t.n() != a.n() {
        return Err(Error::input(format!("tuple has {} operators but A is {}×{}", t.n(), a.n(), a.n())));
    }
    let ids = cfg.selected()?;
    let mut ctx = Ctx { t, a, cfg, kernel: None, artifacts: BTreeMap::new() };
    let checks: Vec<CheckRecord> = ids.iter().filter_map(|id| run_one(id, &mut ctx)).collect();
    if let Some(Ok(kd)) = &ctx.kernel {
        ctx.artifacts.insert("kernel_rank".into(), json!(kd.rank));
    }
    Ok(Report { checks, artifacts: ctx.artifacts })
}
