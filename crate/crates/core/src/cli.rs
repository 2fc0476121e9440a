//! Command-line front end. Exit codes: 0 when every check passes, 1 when a
//! check fails or a mathematical precondition does not hold, 2 on bad input.

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dilate::{dilate_isometric_schaffer, dilate_kernel, dilate_poisson, DilationResult, Method};
use crate::error::{Error, Result};
use crate::fock::TruncatedFock;
use crate::io::{matrix_to_json, Bundle};
use crate::linalg::{op_norm, rank};
use crate::pieces::{compress, eval_poly, maximal_piece, preset_polysets, PolyPreset, PIECE_TOL};
use crate::report::{run_suite, CheckRecord, Report, SuiteConfig, EXACT_THRESHOLD};
use crate::tuples::{purity_profile, OperatorTuple, DEFAULT_TOL};
use crate::variety::{admissible_supports, symmetrize};
use crate::words::TransitionMatrix;

#[derive(Debug, Parser)]
#[command(name = "ck-dilation", version, about = "Cuntz-Krieger dilations of operator tuples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Input JSON file, or `-` for stdin.
    pub input: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Contractivity and A-relation checks (or the checks named by --checks).
    Check {
        #[command(flatten)]
        common: Common,
        /// Comma-separated check ids.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Construct a dilation and report its residuals.
    Dilate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "kernel")]
        method: String,
        /// Kernel level m, or Fock truncation level N.
        #[arg(long)]
        level: Option<usize>,
        /// Dilate rT instead of T (Poisson method).
        #[arg(long)]
        r: Option<f64>,
    },
    /// Maximal piece for a relation family.
    Piece {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        relations: Relations,
        /// q for q-commuting relations.
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Truncation level of the full Fock tuple.
        #[arg(long)]
        level: Option<usize>,
        /// Use the truncated full-Fock creation tuple instead of `T`.
        #[arg(long)]
        full_fock: bool,
    },
    /// Symmetrized graph and maximal supports of the variety M.
    Variety {
        #[command(flatten)]
        common: Common,
    },
    /// Every check in the suite.
    Suite {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        fock_level: Option<usize>,
        #[arg(long)]
        poisson_level: Option<usize>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Relations {
    A,
    C,
    Q,
    Fermionic,
    Union,
}

impl Relations {
    pub fn preset(self, n: usize, q: f64) -> PolyPreset {
        match self {
            Relations::A => PolyPreset::ARelation,
            Relations::C => PolyPreset::Commuting,
            Relations::Q => PolyPreset::QCommuting(vec![vec![q; n]; n]),
            Relations::Fermionic => PolyPreset::Fermionic,
            Relations::Union => PolyPreset::Union(vec![PolyPreset::ARelation, PolyPreset::Commuting]),
        }
    }
}

fn read_input(path: &PathBuf) -> Result<Bundle> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path)?;
    }
    Bundle::parse(&text)
}

fn dilation_bundle(a: &TransitionMatrix, res: &DilationResult) -> Value {
    Bundle::new(a.clone(), Some(res.tuple.clone())).to_value()
}

fn common_records(
    res: &DilationResult,
    t: &OperatorTuple,
    a: &TransitionMatrix,
    embed_threshold: f64,
    co_threshold: f64,
) -> Result<Vec<CheckRecord>> {
    let m = res.level;
    Ok(vec![
        CheckRecord::new("embedding_isometry", "V* V = I", "embedding", res.embedding_defect(), embed_threshold),
        CheckRecord::new("dilation_co_invariance", "T̃_i* V = V T_i*", "dilation space", res.co_invariance_residual(t), co_threshold),
        CheckRecord::new(
            "dilation_compression",
            "V* T̃^α (T̃^β)* V = T^α (T^β)*",
            format!("admissible |α|, |β| ≤ {}", m.saturating_sub(2)),
            res.compression_residual(t, a, m.saturating_sub(2))?,
            co_threshold.max(EXACT_THRESHOLD),
        ),
    ])
}

fn cmd_dilate(bundle: &Bundle, method: Method, level: usize, r: Option<f64>, tol: f64) -> Result<Report> {
    let t = bundle.require_tuple()?;
    let a = &bundle.a;
    let mut artifacts = std::collections::BTreeMap::new();
    let (res, checks) = match method {
        Method::Kernel => {
            let kd = dilate_kernel(t, a, level, tol)?;
            let mut checks = common_records(&kd.result, t, a, EXACT_THRESHOLD, EXACT_THRESHOLD)?;
            let spanned = kd.minimality_rank()?;
            checks.push(CheckRecord::new(
                "dilation_minimality",
                "span{T̃^α V u} = H̃",
                "kernel dilation space H_m",
                (kd.rank as f64 - spanned as f64).abs(),
                0.0,
            ));
            artifacts.insert("gram_rank".into(), json!(kd.rank));
            (kd.result, checks)
        }
        Method::Poisson => {
            let pd = dilate_poisson(t, a, level, r, tol)?;
            let dilated = pd.dilated_tuple().clone();
            let res = pd.to_dilation_result()?;
            let depth = 3.min(level.saturating_sub(1));
            let rep = pd.report(depth)?;
            let tail = pd.tail_bound_at(level - depth).max(EXACT_THRESHOLD);
            let mut checks = common_records(&res, &dilated, a, pd.tail_bound().max(EXACT_THRESHOLD), pd.tail_bound().sqrt().max(EXACT_THRESHOLD))?;
            checks.push(CheckRecord::new(
                "poisson_isometry",
                "‖K*K − I‖ ≤ tail bound",
                format!("Γ_A truncated at level {level}"),
                rep.isometry_defect,
                pd.tail_bound(),
            ));
            checks.push(CheckRecord::new(
                "poisson_compression",
                "K*(S^α ⊗ I)K = T^α",
                format!("admissible |α| ≤ {depth}"),
                rep.compression,
                tail,
            ));
            checks.push(CheckRecord::new(
                "vacuum_sandwich",
                "K*(S^α P_0 (S^β)* ⊗ I)K = T^α Δ² (T^β)*",
                format!("admissible |α|, |β| ≤ {depth}"),
                rep.vacuum_sandwich,
                EXACT_THRESHOLD,
            ));
            checks.push(CheckRecord::new(
                "cp_identity",
                "K*(S^α (S^β)* ⊗ I)K = T^α (T^β)*",
                format!("admissible |α|, |β| ≤ {depth}"),
                rep.cp_identity,
                tail,
            ));
            artifacts.insert("purity_profile".into(), json!(pd.purity_profile()));
            if let Some(r) = r {
                artifacts.insert("r".into(), json!(r));
            }
            (res, checks)
        }
        Method::Schaffer => {
            let sd = dilate_isometric_schaffer(t, level, tol)?;
            let mut checks = common_records(&sd.result, t, a, EXACT_THRESHOLD, EXACT_THRESHOLD)?;
            checks.push(CheckRecord::new(
                "interior_isometry",
                "L̂_i* L̂_j = δ_ij I",
                format!("levels ≤ {} of the Fock part", level - 1),
                sd.isometry_residual(),
                EXACT_THRESHOLD,
            ));
            let l = &sd.result.tuple;
            let dil = rank(&(crate::linalg::identity(l.dim()) - l.row_square()), 1e-9, 1e-9);
            let own = rank(&t.deficiency(), 1e-9, 1e-9);
            checks.push(
                CheckRecord::new(
                    "defect_ranks",
                    "rank(I − Σ L̂_i L̂_i*) = rank(I − Σ T_i T_i*)",
                    "whole dilation space",
                    dil.abs_diff(own) as f64,
                    0.0,
                )
                .with_detail(format!("ranks ({dil}, {own})")),
            );
            artifacts.insert("defect_root".into(), json!(matrix_to_json(&sd.defect_root)));
            (sd.result, checks)
        }
    };
    artifacts.insert("dilation".into(), dilation_bundle(a, &res));
    artifacts.insert("embedding".into(), json!(matrix_to_json(&res.embedding)));
    artifacts.insert("method".into(), json!(method.to_string()));
    artifacts.insert("level".into(), json!(res.level));
    artifacts.insert("dimension".into(), json!(res.tuple.dim()));
    Ok(Report { checks, artifacts })
}

fn cmd_piece(bundle: &Bundle, relations: Relations, q: f64, level: Option<usize>, full_fock: bool, tol: f64) -> Result<Report> {
    let a = &bundle.a;
    let r = if full_fock {
        let level = level.ok_or_else(|| Error::input("--full-fock needs --level"))?;
        TruncatedFock::full(a.n(), level)?.s_tuple()
    } else {
        bundle.require_tuple()?.clone()
    };
    let polys = preset_polysets(a, &relations.preset(a.n(), q))?;
    let piece = maximal_piece(&r, &polys, tol)?;
    let mut checks = vec![CheckRecord::new(
        "piece_co_invariance",
        "R_i* J ⊆ J",
        "maximal piece J",
        piece.co_invariance_residual(&r),
        EXACT_THRESHOLD,
    )];
    let mut artifacts = std::collections::BTreeMap::new();
    artifacts.insert("dimension".into(), json!(piece.dim()));
    artifacts.insert("frame".into(), json!(matrix_to_json(piece.frame())));
    if piece.dim() > 0 {
        let c = compress(&r, &piece)?;
        let worst = polys.iter().map(|p| eval_poly(p, &c).map(|m| op_norm(&m))).collect::<Result<Vec<_>>>()?;
        checks.push(CheckRecord::new(
            "piece_relations",
            "p_ξ(P_J R|_J) = 0",
            "compression to the maximal piece",
            worst.into_iter().fold(0.0, f64::max),
            EXACT_THRESHOLD,
        ));
        artifacts.insert("compressed".into(), Bundle::new(a.clone(), Some(c)).to_value());
    }
    Ok(Report { checks, artifacts })
}

fn cmd_variety(bundle: &Bundle, tol: f64) -> Result<Report> {
    let g = symmetrize(&bundle.a);
    let supports = admissible_supports(&g)?;
    let mut artifacts = std::collections::BTreeMap::new();
    artifacts.insert("A_sym".into(), json!(g.a_sym));
    artifacts.insert("zero_vertices".into(), json!(g.zero_vertices));
    artifacts.insert("edges".into(), json!(g.edges));
    artifacts.insert("supports".into(), json!(supports));
    let mut checks = Vec::new();
    if let Some(t) = &bundle.tuple {
        let cfg = SuiteConfig { checks: Some(vec!["variety_membership".into()]), tol, ..SuiteConfig::default() };
        checks = run_suite(t, &bundle.a, &cfg)?.checks;
    }
    Ok(Report { checks, artifacts })
}

fn error_json(e: &Error) -> Value {
    let (kind, diagnostics) = match e {
        Error::Input(_) => ("input", None),
        Error::Domain(_) => ("domain", None),
        Error::Construction { diagnostics, .. } => ("construction", Some(diagnostics.clone())),
        Error::Parse(_) => ("parse", None),
        Error::Io(_) => ("io", None),
    };
    let mut v = json!({"error": {"kind": kind, "message": e.to_string()}});
    if let Some(d) = diagnostics {
        v["error"]["diagnostics"] = json!(d);
    }
    v
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Construction { .. } => 1,
        Error::Input(_) | Error::Parse(_) | Error::Io(_) => 2,
    }
}

fn execute(cli: &Cli) -> Result<(Report, Option<PathBuf>)> {
    match &cli.command {
        Command::Check { common, checks, level } => {
            let b = read_input(&common.input)?;
            let t = b.require_tuple()?;
            let cfg = SuiteConfig {
                level: level.or(b.options.level).unwrap_or(3),
                tol: common.tol.or(b.options.tol).unwrap_or(DEFAULT_TOL),
                checks: Some(
                    checks
                        .clone()
                        .or_else(|| b.options.checks.clone())
                        .unwrap_or_else(|| vec!["contractivity".into(), "a_relations".into()]),
                ),
                ..SuiteConfig::default()
            };
            Ok((run_suite(t, &b.a, &cfg)?, common.out.clone()))
        }
        Command::Dilate { common, method, level, r } => {
            let b = read_input(&common.input)?;
            let method: Method = b.options.method.clone().unwrap_or_else(|| method.clone()).parse()?;
            let level = level.or(b.options.level).unwrap_or(4);
            if level == 0 {
                return Err(Error::input("--level must be at least 1"));
            }
            let tol = common.tol.or(b.options.tol).unwrap_or(DEFAULT_TOL);
            let r = r.or(b.options.r);
            if method == Method::Poisson && r.is_none() {
                let t = b.require_tuple()?;
                let profile = purity_profile(t, &b.a, level + 1)?;
                if profile[level] > tol {
                    return Err(Error::Construction {
                        message: format!("tuple is not pure at level {level}; pass --r"),
                        diagnostics: profile,
                    });
                }
            }
            Ok((cmd_dilate(&b, method, level, r, tol)?, common.out.clone()))
        }
        Command::Piece { common, relations, q, level, full_fock } => {
            let b = read_input(&common.input)?;
            let tol = common.tol.or(b.options.tol).unwrap_or(PIECE_TOL);
            Ok((cmd_piece(&b, *relations, *q, level.or(b.options.level), *full_fock, tol)?, common.out.clone()))
        }
        Command::Variety { common } => {
            let b = read_input(&common.input)?;
            let tol = common.tol.or(b.options.tol).unwrap_or(DEFAULT_TOL);
            Ok((cmd_variety(&b, tol)?, common.out.clone()))
        }
        Command::Suite { common, checks, level, fock_level, poisson_level, r, seed } => {
            let b = read_input(&common.input)?;
            let t = b.require_tuple()?;
            let d = SuiteConfig::default();
            let cfg = SuiteConfig {
                level: level.or(b.options.level).unwrap_or(d.level),
                fock_level: fock_level.unwrap_or(d.fock_level),
                poisson_level: poisson_level.unwrap_or(d.poisson_level),
                tol: common.tol.or(b.options.tol).unwrap_or(d.tol),
                r: r.or(b.options.r).unwrap_or(d.r),
                checks: checks.clone().or_else(|| b.options.checks.clone()),
                seed: *seed,
            };
            Ok((run_suite(t, &b.a, &cfg)?, common.out.clone()))
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok((report, out)) => {
            if let Err(e) = emit(&report.to_json(), out.as_ref()) {
                eprintln!("ck-dilation: {e}");
                return 2;
            }
            if report.all_pass() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("ck-dilation: {e}");
            println!("{}", serde_json::to_string_pretty(&error_json(&e)).expect("error serializes"));
            exit_code(&e)
        }
    }
}
