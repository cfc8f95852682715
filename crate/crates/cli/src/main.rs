//! Command-line front end: JSON in, JSON out, one subcommand per
//! operation. Inputs come from file arguments or standard input ("-");
//! every emitted JSON document is accepted verbatim by the next stage, so
//! the subcommands compose under shell pipes.
//!
//! Exit codes: 0 success, 2 validation/input error, 3 numerical failure.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ldoi_core::cones::{
    ppt_test, psd_test, quantum_state_test, realignment_test, tcp_necessary_battery,
};
use ldoi_core::detect::{
    separability_verdict, witness_catalog_validate, CatalogEntry, DetectConfig,
};
use ldoi_core::docmaps::{
    apply, compose, decomposable_sufficient, kraus_extract, map_properties,
    positivity_necessary, CovariantMap, MapClass,
};
use ldoi_core::gallery;
use ldoi_core::ldoi::{
    build, extract_triple, leg_permutation, project, rank_of, spectrum, BipartiteMatrix,
    InvariantClass, LegPermutation, MatrixTriple,
};
use ldoi_core::matcore::{ComplexMatrix, Tolerance};
use ldoi_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "ldoi",
    version,
    about = "Invariant bipartite matrices, covariant maps, and separability certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    #[value(name = "LDUI")]
    Ldui,
    #[value(name = "CLDUI")]
    Cldui,
    #[value(name = "LDOI")]
    Ldoi,
}

impl From<ClassArg> for InvariantClass {
    fn from(c: ClassArg) -> InvariantClass {
        match c {
            ClassArg::Ldui => InvariantClass::Ldui,
            ClassArg::Cldui => InvariantClass::Cldui,
            ClassArg::Ldoi => InvariantClass::Ldoi,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PermArg {
    Fxf,
    Transpose,
    DiagSwap,
    Realign,
    Gamma,
    GammaLeft,
    FLeft,
    FRight,
}

impl From<PermArg> for LegPermutation {
    fn from(p: PermArg) -> LegPermutation {
        match p {
            PermArg::Fxf => LegPermutation::Fxf,
            PermArg::Transpose => LegPermutation::Transpose,
            PermArg::DiagSwap => LegPermutation::DiagSwap,
            PermArg::Realign => LegPermutation::Realign,
            PermArg::Gamma => LegPermutation::Gamma,
            PermArg::GammaLeft => LegPermutation::GammaLeft,
            PermArg::FLeft => LegPermutation::FLeft,
            PermArg::FRight => LegPermutation::FRight,
        }
    }
}

#[derive(Args)]
struct CheckFlags {
    /// Triple-level PSD test.
    #[arg(long)]
    psd: bool,
    /// Triple-level PPT test.
    #[arg(long)]
    ppt: bool,
    /// Realignment criterion.
    #[arg(long)]
    realignment: bool,
    /// Quantum-state test (PSD + unit trace).
    #[arg(long)]
    state: bool,
    /// Channel/unital/CP properties of the covariant map.
    #[arg(long)]
    channel: bool,
    /// Positive-map screens (necessary and sufficient conditions).
    #[arg(long)]
    positivity: bool,
}

impl CheckFlags {
    fn none_selected(&self) -> bool {
        !(self.psd || self.ppt || self.realignment || self.state || self.channel || self.positivity)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the invariant d^2 x d^2 matrix from a triple.
    Build {
        #[arg(long, value_enum)]
        class: ClassArg,
        /// Triple JSON file ("-" for stdin).
        #[arg(long, default_value = "-")]
        triple: String,
    },
    /// Read the (A, B, C) triple off a bipartite matrix.
    Extract {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Orthogonally project a bipartite matrix onto an invariant subspace.
    Project {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(default_value = "-")]
        input: String,
    },
    /// Run positivity/PPT/realignment/state/channel/positive-map checks.
    Check {
        #[command(flatten)]
        flags: CheckFlags,
        #[arg(default_value = "-")]
        input: String,
    },
    /// Eigenvalues of the invariant matrix, from its block structure.
    Spectrum {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(default_value = "-")]
        input: String,
    },
    /// Rank of the invariant matrix, from its block structure.
    Rank {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(default_value = "-")]
        input: String,
    },
    /// Apply a tensor-leg permutation to a triple.
    Permute {
        #[arg(long, value_enum)]
        which: PermArg,
        #[arg(default_value = "-")]
        input: String,
    },
    /// Compose two covariant maps (the second is applied first).
    Compose { m1: String, m2: String },
    /// Apply a covariant map to a d x d matrix.
    Apply {
        #[arg(long)]
        map: String,
        /// Input matrix JSON ("-" for stdin).
        #[arg(long, default_value = "-")]
        z: String,
    },
    /// Minimal Kraus set of a covariant map (or of an invariant Choi matrix).
    Kraus {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Separability verdict for a self-adjoint PSD triple.
    Detect {
        #[arg(long, default_value = "-")]
        triple: String,
        /// Witness-catalog JSON (a list of {"id", "map"} objects); entries
        /// are screened for positivity before use.
        #[arg(long)]
        catalog: Option<String>,
        /// Falsifier sample budget for catalog screening.
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        /// RNG seed; required when a custom --catalog is screened.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the witness catalog.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Emit a named example family as JSON.
    Gallery {
        family: String,
        /// Family parameters as inline JSON.
        #[arg(long, default_value = "{}")]
        params: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
            ExitCode::SUCCESS
        }
        Err(err) => {
            let (code, msg) = match &err {
                AppError::Core(CoreError::Numerical(m)) => (3u8, m.clone()),
                AppError::Core(e) => (2, e.to_string()),
                AppError::Input(m) => (2, m.clone()),
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({ "error": msg })).expect("serializable")
            );
            ExitCode::from(code)
        }
    }
}

enum AppError {
    Core(CoreError),
    Input(String),
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Core(e)
    }
}

fn input_err(msg: impl Into<String>) -> AppError {
    AppError::Input(msg.into())
}

/// LDOI_TOL overrides the absolute tolerance (relative follows at 10x).
fn tolerance() -> Result<Tolerance, AppError> {
    match std::env::var("LDOI_TOL") {
        Ok(raw) => {
            let abs: f64 = raw
                .parse()
                .map_err(|_| input_err(format!("LDOI_TOL must be a number, got '{raw}'")))?;
            Tolerance::new(abs, 10.0 * abs).map_err(AppError::Core)
        }
        Err(_) => Ok(Tolerance::default()),
    }
}

fn read_source(path: &str) -> Result<String, AppError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| input_err(format!("failed to read stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| input_err(format!("failed to read '{path}': {e}")))
    }
}

fn read_json(path: &str) -> Result<Value, AppError> {
    let raw = read_source(path)?;
    serde_json::from_str(&raw).map_err(|e| input_err(format!("malformed JSON in '{path}': {e}")))
}

/// Accepts a bare triple, a gallery state/bundle wrapper, or a map object.
fn triple_from_value(value: &Value) -> Result<MatrixTriple, AppError> {
    let inner = if value.get("A").is_some() {
        value
    } else if let Some(kind) = value.get("kind").and_then(|k| k.as_str()) {
        match kind {
            "state" => value
                .get("triple")
                .ok_or_else(|| input_err("state object lacks a 'triple' field"))?,
            "bundle" => value
                .get("state")
                .ok_or_else(|| input_err("bundle object lacks a 'state' field"))?,
            "map" => value
                .get("map")
                .and_then(|m| m.get("triple"))
                .ok_or_else(|| input_err("map object lacks a 'triple' field"))?,
            other => {
                return Err(input_err(format!("cannot read a triple from kind '{other}'")))
            }
        }
    } else if value.get("class").is_some() && value.get("triple").is_some() {
        value.get("triple").expect("checked")
    } else {
        return Err(input_err(
            "expected a triple, state, bundle, or map JSON object",
        ));
    };
    serde_json::from_value(inner.clone()).map_err(|e| input_err(format!("malformed triple: {e}")))
}

fn map_from_value(value: &Value) -> Result<CovariantMap, AppError> {
    let inner = match value.get("kind").and_then(|k| k.as_str()) {
        Some("map") => value
            .get("map")
            .ok_or_else(|| input_err("map object lacks a 'map' field"))?,
        Some("bundle") => value
            .get("witness_map")
            .ok_or_else(|| input_err("bundle object lacks a 'witness_map' field"))?,
        _ => value,
    };
    serde_json::from_value(inner.clone()).map_err(|e| input_err(format!("malformed map: {e}")))
}

fn bipartite_from_value(value: &Value) -> Result<BipartiteMatrix, AppError> {
    serde_json::from_value(value.clone())
        .map_err(|e| input_err(format!("malformed bipartite matrix: {e}")))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run(command: Command) -> Result<Value, AppError> {
    let tol = tolerance()?;
    match command {
        Command::Build { class, triple } => {
            let t = triple_from_value(&read_json(&triple)?)?;
            Ok(to_value(&build(class.into(), &t)))
        }
        Command::Extract { input } => {
            let x = bipartite_from_value(&read_json(&input)?)?;
            Ok(to_value(&extract_triple(&x)))
        }
        Command::Project { class, input } => {
            let x = bipartite_from_value(&read_json(&input)?)?;
            Ok(to_value(&project(&x, class.into())))
        }
        Command::Check { flags, input } => {
            let value = read_json(&input)?;
            let declared_map = map_from_value(&value).ok().filter(|_| {
                value.get("class").is_some()
                    || value.get("kind").and_then(|k| k.as_str()) == Some("map")
                    || value.get("kind").and_then(|k| k.as_str()) == Some("bundle")
            });
            let triple = triple_from_value(&value)?;
            let all = flags.none_selected();
            let mut out = serde_json::Map::new();
            if flags.psd || all {
                out.insert("psd".into(), to_value(&psd_test(&triple, &tol)));
            }
            if flags.ppt || all {
                out.insert("ppt".into(), to_value(&ppt_test(&triple, &tol)));
            }
            if flags.realignment || all {
                out.insert(
                    "realignment".into(),
                    to_value(&realignment_test(&triple, &tol)),
                );
            }
            if all {
                out.insert(
                    "tcp_necessary".into(),
                    to_value(&tcp_necessary_battery(&triple, &tol)),
                );
            }
            if flags.state || all {
                out.insert("state".into(), json!(quantum_state_test(&triple, &tol)));
            }
            if flags.channel || flags.positivity || all {
                let m = declared_map
                    .unwrap_or_else(|| CovariantMap::new(MapClass::Doc, triple.clone()));
                if flags.channel || all {
                    out.insert("map_properties".into(), to_value(&map_properties(&m, &tol)));
                }
                if flags.positivity || all {
                    out.insert(
                        "positivity".into(),
                        json!({
                            "necessary": to_value(&positivity_necessary(m.triple(), &tol)),
                            "sufficient_decomposable":
                                to_value(&decomposable_sufficient(m.triple(), &tol)),
                        }),
                    );
                }
            }
            Ok(Value::Object(out))
        }
        Command::Spectrum { class, input } => {
            let t = triple_from_value(&read_json(&input)?)?;
            let eigs = spectrum(&t, class.into())?;
            let pairs: Vec<[f64; 2]> = eigs.iter().map(|z| [z.re, z.im]).collect();
            Ok(json!({ "spectrum": pairs }))
        }
        Command::Rank { class, input } => {
            let t = triple_from_value(&read_json(&input)?)?;
            Ok(json!({ "rank": rank_of(&t, class.into(), &tol) }))
        }
        Command::Permute { which, input } => {
            let t = triple_from_value(&read_json(&input)?)?;
            Ok(to_value(&leg_permutation(&t, which.into())))
        }
        Command::Compose { m1, m2 } => {
            let a = map_from_value(&read_json(&m1)?)?;
            let b = map_from_value(&read_json(&m2)?)?;
            Ok(to_value(&compose(&a, &b)?))
        }
        Command::Apply { map, z } => {
            let m = map_from_value(&read_json(&map)?)?;
            let zm: ComplexMatrix = serde_json::from_value(read_json(&z)?)
                .map_err(|e| input_err(format!("malformed matrix: {e}")))?;
            Ok(to_value(&apply(&m, &zm)?))
        }
        Command::Kraus { input } => {
            let value = read_json(&input)?;
            let m = match map_from_value(&value) {
                Ok(m) => m,
                // accept a bare invariant bipartite matrix too
                Err(_) => {
                    let x = bipartite_from_value(&value)?;
                    ldoi_core::docmaps::from_choi(&x, &tol)?
                }
            };
            Ok(to_value(&kraus_extract(&m, &tol)?))
        }
        Command::Detect {
            triple,
            catalog,
            budget,
            seed,
            jobs,
        } => {
            let t = triple_from_value(&read_json(&triple)?)?;
            let mut config = DetectConfig::for_dimension(t.dim());
            config.tol = tol;
            config.samples = budget;
            config.jobs = jobs.max(1);
            if let Some(path) = catalog {
                let seed = seed.ok_or_else(|| {
                    input_err("--seed is required when a custom --catalog is screened")
                })?;
                config.seed = seed;
                let entries: Vec<CatalogEntry> = serde_json::from_value(read_json(&path)?)
                    .map_err(|e| input_err(format!("malformed catalog: {e}")))?;
                let validation = witness_catalog_validate(&entries, &config.tol, budget, seed);
                if !validation.rejected.is_empty() {
                    return Err(input_err(format!(
                        "catalog entries rejected by the positivity screen: {}",
                        serde_json::to_string(&validation.rejected).expect("serializable")
                    )));
                }
                config.catalog = entries;
            } else if let Some(seed) = seed {
                config.seed = seed;
            }
            let verdict = separability_verdict(&t, &config)?;
            Ok(to_value(&verdict))
        }
        Command::Gallery { family, params } => {
            let params: Value = serde_json::from_str(&params)
                .map_err(|e| input_err(format!("malformed --params JSON: {e}")))?;
            Ok(to_value(&gallery::generate(&family, &params)?))
        }
    }
}
