//! Command-line front end: existence/dimension queries, grid scans, explicit
//! constructions, state verification, gradient flow, and stabilizer ranks.
//!
//! JSON goes to stdout (pretty with `--pretty`), diagnostics to stderr.
//! Exit codes: 0 success, 2 domain or usage errors, 3 resource-cap errors.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use lme::classify::{classify, generic_stabilizer_trivial};
use lme::construct;
use lme::dimvec::{capital_r, expected_dim, g_max, DimVec};
use lme::flow::{flow_to_normal_form, FlowClass, FlowOptions};
use lme::repgroup::{lme_from_invariant, s3_two_dim, UtGroup};
use lme::sporadic::{compute_seed_set, enumerate_sporadic, scan_grid_row, GridRow};
use lme::stabilizer::{rank_one_trial, trial_seed, RankMethod, StabilizerReport, DEFAULT_DIM_CAP};
use lme::statefile;
use lme::tensor::{is_lme, m_uniform_deviation, StateTensor};

#[derive(Parser)]
#[command(
    name = "lme",
    version,
    about = "Locally maximally entangled states: existence, dimensions, constructions, flows"
)]
struct Cli {
    /// Base seed for randomized commands (fixed default, not time-based).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for scans and trials (falls back to LME_JOBS, then all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether LME states exist for a dimension vector.
    Exists { dims: String },
    /// Existence plus the dimension of the space of LME states.
    Dim { dims: String },
    /// Classify every (B, C) cell with A <= B <= bmax, B <= C <= A*B.
    Scan {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        bmax: u64,
        #[arg(long, value_enum, default_value_t = ScanFormat::Csv)]
        format: ScanFormat,
    },
    /// Enumerate the sporadic triples with smallest part A.
    Sporadic {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        max: u64,
    },
    /// Build an explicit LME state and write it to a state file.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
    /// Check a state file for local maximal entanglement.
    Verify {
        file: PathBuf,
        /// Also check maximal mixedness of all subsystems up to this size.
        #[arg(short, long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Flow a state to its normal form along the moment-map descent.
    Flow {
        file: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iters: u64,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        floor: f64,
        /// Write the full report (with the M trace) to this JSON file.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the endpoint state to this state file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Measure the generic stabilizer dimension by randomized rank.
    #[command(name = "stab-dim")]
    StabDim {
        dims: String,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Ff)]
        method: MethodArg,
    },
    /// Emit an LME state from a finite-group invariant vector.
    #[command(name = "group-state")]
    GroupState {
        #[arg(long)]
        family: String,
        #[arg(long)]
        p: Option<u64>,
        /// First label of the two-dimensional factor (ut3p family).
        #[arg(long, default_value_t = 1)]
        x: u64,
        /// Second label of the two-dimensional factor (ut3p family).
        #[arg(long, default_value_t = 1)]
        y: u64,
        /// Label of the p-dimensional factor (ut3p family).
        #[arg(long, default_value_t = 1)]
        yprime: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Conjugacy-class and irrep inventory of the order-2p^3 family.
    #[command(name = "group-info")]
    GroupInfo {
        #[arg(long)]
        p: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ff,
    Svd,
}

#[derive(Subcommand)]
enum ConstructKind {
    /// Maximally entangled pair on (d, d).
    Bell {
        #[arg(long)]
        d: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Uniform superposition of repeated basis labels on (d, ..., d).
    Ghz {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        parties: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// (2, B, B) state from B unit vectors summing to zero.
    Vec2bb {
        /// Regular polygon configuration with this many vectors.
        #[arg(long)]
        b: Option<usize>,
        /// Text file with one `x y z` unit vector per line, summing to zero.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The (2, NK, (N+1)K) ladder state.
    #[command(name = "2n-np1")]
    Ladder {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// (A, B, C) state from a symbol grid file.
    Sudoku {
        #[arg(long)]
        a: usize,
        /// Whitespace-separated integers, one grid row per line, 0 = empty.
        #[arg(long)]
        grid: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Coupling-coefficient state on (A, B, C).
    #[command(name = "3j")]
    ThreeJ {
        #[arg(long)]
        dims: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Joint +1 eigenvector of signed Pauli strings (one per line).
    Pauli {
        #[arg(long)]
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let jobs = cli.jobs.or_else(|| {
        std::env::var("LME_JOBS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
    });
    if let Some(jobs) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .ok();
    }

    match run(&cli) {
        Ok(Output::Json(v)) => {
            if cli.pretty {
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
            } else {
                println!("{}", serde_json::to_string(&v).unwrap());
            }
        }
        Ok(Output::Raw(text)) => {
            print!("{text}");
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_resource() { 3 } else { 2 });
        }
    }
}

enum Output {
    Json(Value),
    Raw(String),
}

fn run(cli: &Cli) -> lme::Result<Output> {
    match &cli.command {
        Command::Exists { dims } | Command::Dim { dims } => {
            let d = DimVec::from_str(dims)?;
            Ok(Output::Json(classification_json(&d)?))
        }
        Command::Scan { a, bmax, format } => {
            let rows = scan_parallel(*a, *bmax)?;
            match format {
                ScanFormat::Json => Ok(Output::Json(json!(rows))),
                ScanFormat::Csv => {
                    let mut out = String::from("A,B,C,status,dim_complex,R,Delta\n");
                    for r in rows {
                        let dim = r.dim_complex.map(|v| v.to_string()).unwrap_or_default();
                        out.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            r.a,
                            r.b,
                            r.c,
                            r.status.as_str(),
                            dim,
                            r.r,
                            r.delta
                        ));
                    }
                    Ok(Output::Raw(out))
                }
            }
        }
        Command::Sporadic { a, max } => {
            let triples: Vec<Vec<u64>> = enumerate_sporadic(*a, *max)?
                .into_iter()
                .map(|d| d.parts().to_vec())
                .collect();
            let seeds: Value = if *a >= 3 {
                json!(compute_seed_set(*a)?.into_iter().collect::<Vec<_>>())
            } else {
                json!("diagonal family (b, b), b >= 2")
            };
            Ok(Output::Json(json!({
                "a": a,
                "max_dim": max,
                "seed_set": seeds,
                "triples": triples,
            })))
        }
        Command::Construct { kind } => construct_cmd(kind),
        Command::Verify { file, m, tol } => {
            let s = statefile::load(file)?;
            let (ok, dev) = is_lme(&s, *tol)?;
            let mut v = json!({
                "file": file.display().to_string(),
                "dims": s.dims(),
                "norm2": s.norm2(),
                "is_lme": ok,
                "max_deviation": dev,
                "tol": tol,
            });
            if let Some(m) = m {
                let mdev = m_uniform_deviation(&s, *m)?;
                v["m_uniform"] = json!({
                    "m": m,
                    "uniform": mdev <= *tol,
                    "max_deviation": mdev,
                });
            }
            Ok(Output::Json(v))
        }
        Command::Flow {
            file,
            step,
            max_iters,
            tol,
            floor,
            report,
            output,
        } => {
            let s = statefile::load(file)?;
            let opts = FlowOptions {
                step: *step,
                max_iters: *max_iters,
                lme_tol: *tol,
                norm_floor: *floor,
                record_every: 100,
            };
            let r = flow_to_normal_form(&s, &opts)?;
            let class = match r.classification {
                FlowClass::Semistable => "Semistable",
                FlowClass::Unstable => "Unstable",
                FlowClass::MaxIterations => "MaxIterations",
            };
            let summary = json!({
                "file": file.display().to_string(),
                "dims": s.dims(),
                "classification": class,
                "steps": r.steps,
                "final_m": r.final_m,
                "final_norm": r.final_norm,
                "invariant_drift": r.invariant_drift,
                "max_m_increase": r.max_m_increase,
                "max_norm_increase": r.max_norm_increase,
            });
            if let Some(path) = report {
                let mut full = summary.clone();
                full["m_trace"] = json!(r.m_trace);
                std::fs::write(path, serde_json::to_string_pretty(&full).unwrap())?;
            }
            if let Some(path) = output {
                statefile::save(&r.endpoint, path)?;
            }
            Ok(Output::Json(summary))
        }
        Command::StabDim {
            dims,
            trials,
            method,
        } => {
            let d = DimVec::from_str(dims)?;
            let method = match method {
                MethodArg::Ff => RankMethod::FiniteField,
                MethodArg::Svd => RankMethod::NumericSvd,
            };
            let report = stab_dim_parallel(&d, *trials, cli.seed, method)?;
            Ok(Output::Json(json!(report)))
        }
        Command::GroupState {
            family,
            p,
            x,
            y,
            yprime,
            output,
        } => {
            let state = match family.as_str() {
                "ut3p" => {
                    let p = p.ok_or_else(|| {
                        lme::Error::InvalidParameter("ut3p needs --p".into())
                    })?;
                    UtGroup::new(p)?.lme_state_2pp(*x, *y, *yprime)?
                }
                "s3-ghz" => {
                    let (_, rep) = s3_two_dim();
                    lme_from_invariant(&[&rep, &rep, &rep])?
                }
                other => {
                    return Err(lme::Error::InvalidParameter(format!(
                        "unknown family `{other}`; available: ut3p (2,p,p), s3-ghz (2,2,2). \
                         No general group construction exists for arbitrary dimension \
                         vectors: a nonnegative existence invariant does not guarantee \
                         matching irreducible representations."
                    )))
                }
            };
            let (ok, dev) = is_lme(&state, 1e-9)?;
            let file = match output {
                Some(path) => {
                    statefile::save(&state, path)?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            Ok(Output::Json(json!({
                "family": family,
                "dims": state.dims(),
                "file": file,
                "is_lme": ok,
                "max_deviation": dev,
            })))
        }
        Command::GroupInfo { p } => {
            let ut = UtGroup::new(*p)?;
            let labeled = ut.all_irreps_labeled()?;
            let sum_sq: usize = labeled.iter().map(|(_, r)| r.dim() * r.dim()).sum();
            let irreps: Vec<Value> = labeled
                .iter()
                .map(|(label, r)| json!({"label": label, "dim": r.dim()}))
                .collect();
            Ok(Output::Json(json!({
                "p": p,
                "order": ut.order(),
                "num_classes": ut.group().conjugacy_classes().len(),
                "class_sizes": ut.group().class_size_inventory(),
                "irreps": irreps,
                "sum_squared_dims": sum_sq,
            })))
        }
    }
}

fn classification_json(d: &DimVec) -> lme::Result<Value> {
    let res = classify(d)?;
    let gmax = if d.n() >= 2 { Some(g_max(d)?) } else { None };
    Ok(json!({
        "dims": d.parts(),
        "R": capital_r(d)?,
        "Delta": expected_dim(d)?,
        "g_max": gmax,
        "exists": res.exists,
        "dim_complex": res.dim,
        "dim_real": res.dim.map(|v| 2 * v),
        "terminal_dims": res.terminal_dims.parts(),
        "case_trace": res.case_trace,
    }))
}

fn scan_parallel(a: u64, bmax: u64) -> lme::Result<Vec<GridRow>> {
    // fan out over B; output order is by grid position regardless of
    // scheduling
    let mut rows: Vec<GridRow> = (a..=bmax)
        .into_par_iter()
        .map(|b| scan_grid_row(a, b))
        .collect::<lme::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by_key(|r| (r.b, r.c));
    Ok(rows)
}

fn stab_dim_parallel(
    d: &DimVec,
    trials: usize,
    seed: u64,
    method: RankMethod,
) -> lme::Result<StabilizerReport> {
    if trials == 0 {
        return Err(lme::Error::InvalidParameter(
            "need at least one trial".into(),
        ));
    }
    let product = d.product()?;
    if product > DEFAULT_DIM_CAP {
        return Err(lme::Error::ResourceCap(format!(
            "state space dimension {product} exceeds the cap {DEFAULT_DIM_CAP}"
        )));
    }
    // independent trials, deterministic reduction by max
    let rank = (0..trials)
        .into_par_iter()
        .map(|t| rank_one_trial(d, trial_seed(seed, t), method))
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))?;
    let dim_g: usize = d.parts().iter().map(|&x| (x * x - 1) as usize).sum();
    let dim_ph = (product - 1) as usize;
    Ok(StabilizerReport {
        dims: d.clone(),
        rank,
        dim_g,
        dim_ph,
        dim_s: dim_g - rank,
        quotient_dim: dim_ph as i64 - rank as i64,
        trials,
        method,
        generic_stabilizer_trivial: generic_stabilizer_trivial(d)?,
    })
}

fn construct_cmd(kind: &ConstructKind) -> lme::Result<Output> {
    let (name, state, output): (&str, StateTensor, &Option<PathBuf>) = match kind {
        ConstructKind::Bell { d, output } => ("bell", construct::bell(*d)?, output),
        ConstructKind::Ghz { d, parties, output } => {
            ("ghz", construct::ghz(*d, *parties)?, output)
        }
        ConstructKind::Vec2bb { b, vectors, output } => {
            let cfg = match (b, vectors) {
                (Some(b), None) => construct::polygon_vectors(*b)?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path)?;
                    parse_vectors(&text)?
                }
                _ => {
                    return Err(lme::Error::InvalidParameter(
                        "vec2bb needs exactly one of --b or --vectors".into(),
                    ))
                }
            };
            ("vec2bb", construct::from_unit_vectors(&cfg)?, output)
        }
        ConstructKind::Ladder { n, k, output } => {
            ("2n-np1", construct::state_2_nk_np1k(*n, *k)?, output)
        }
        ConstructKind::Sudoku { a, grid, output } => {
            let text = std::fs::read_to_string(grid)?;
            let g = construct::SudokuGrid::parse(*a, &text)?;
            ("sudoku", construct::sudoku_state(&g)?, output)
        }
        ConstructKind::ThreeJ { dims, output } => {
            let d = DimVec::from_str(dims)?;
            if d.n() != 3 {
                return Err(lme::Error::InvalidParameter(
                    "3j needs exactly three dimensions".into(),
                ));
            }
            let p = d.parts();
            (
                "3j",
                construct::wigner3j_state(p[0] as usize, p[1] as usize, p[2] as usize)?,
                output,
            )
        }
        ConstructKind::Pauli { file, output } => {
            let text = std::fs::read_to_string(file)?;
            let set = construct::PauliStabilizerSet::parse(&text)?;
            ("pauli", construct::pauli_stabilizer_state(&set)?, output)
        }
    };
    let (ok, dev) = is_lme(&state, 1e-9)?;
    let file = match output {
        Some(path) => {
            statefile::save(&state, path)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    Ok(Output::Json(json!({
        "kind": name,
        "dims": state.dims(),
        "file": file,
        "is_lme": ok,
        "max_deviation": dev,
    })))
}

fn parse_vectors(text: &str) -> lme::Result<construct::UnitVectorConfig> {
    let mut vectors = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| lme::Error::Parse(format!("bad vector component `{tok}`")))
            })
            .collect::<lme::Result<_>>()?;
        if parts.len() != 3 {
            return Err(lme::Error::Parse(format!(
                "expected three components, got {} in `{line}`",
                parts.len()
            )));
        }
        vectors.push([parts[0], parts[1], parts[2]]);
    }
    construct::UnitVectorConfig::new(vectors)
}
