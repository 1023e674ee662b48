//! Reproducible command-line front end for the simulation and verification
//! laboratory: every experiment in the core crate behind deterministic,
//! machine-readable artifacts.
//!
//! Exit status contract: `0` success, `1` configuration error, `2`
//! verification failure (the failed check is named on stderr), `3` resource
//! cap exceeded.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Errors carrying the exit status contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, or parameters a module rejects. Exit 1.
    Config(String),
    /// An experiment ran and its claim failed. Exit 2.
    Verification(String),
    /// A resource cap (population, edge budget, enumeration size). Exit 3.
    Resource(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(s) | CliError::Verification(s) | CliError::Resource(s) => s,
        }
    }
}

impl From<bayule_core::BaError> for CliError {
    fn from(e: bayule_core::BaError) -> Self {
        use bayule_core::BaError::*;
        match e {
            EdgeBudget { .. } | InstanceTooLarge { .. } => CliError::Resource(e.to_string()),
            InvalidConfig(_) | MidWindow { .. } => CliError::Config(e.to_string()),
        }
    }
}

impl From<bayule_core::PlantedError> for CliError {
    fn from(e: bayule_core::PlantedError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<bayule_core::YuleError> for CliError {
    fn from(e: bayule_core::YuleError) -> Self {
        use bayule_core::YuleError::*;
        match e {
            PopulationCap { .. } => CliError::Resource(e.to_string()),
            InvalidConfig(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<bayule_core::CouplingError> for CliError {
    fn from(e: bayule_core::CouplingError) -> Self {
        use bayule_core::CouplingError::*;
        match e {
            InvalidConfig(_) => CliError::Config(e.to_string()),
            StateInfeasible { .. }
            | NotCertified { .. }
            | CertificationFailed(_)
            | OrderingViolation { .. } => CliError::Verification(e.to_string()),
        }
    }
}

impl From<bayule_core::StatsError> for CliError {
    fn from(e: bayule_core::StatsError) -> Self {
        use bayule_core::StatsError::*;
        match e {
            InvalidInput(_) => CliError::Config(e.to_string()),
            Growth(inner) => inner.into(),
            Forest(inner) => inner.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o error: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "bayule",
    version,
    about = "Growth-process simulation and verification laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct CommonArgs {
    /// Flat key-value JSON file providing defaults; explicit flags override
    /// its entries.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory the artifacts are written into (created if missing).
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub output: PathBuf,
    /// Master seed; each replica derives its own stream from it.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads. Defaults to $BAYULE_WORKERS, then 1.
    #[arg(long, value_name = "N")]
    pub parallelism: Option<usize>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Grow one graph and export its degree histogram.
    SimulateBa(SimulateBaArgs),
    /// Replicated pure-birth draws compared with the closed-form law.
    SimulateYule(SimulateYuleArgs),
    /// Uniformly sampled genus sizes of the nested birth process.
    SimulateMyule(SimulateMyuleArgs),
    /// Coupled lower/exact/upper degree paths sharing one uniform per window.
    SimulateCoupled(SimulateCoupledArgs),
    /// Certify the bounding-kernel constants over a (vertex count, degree) region.
    Certify(CertifyArgs),
    /// Degree fractions of one large graph against the limiting law.
    VerifyLimitDegree(VerifyLimitDegreeArgs),
    /// Uniformity and sampling-equivalence invariants of the two-stage route.
    VerifyPlanted(VerifyPlantedArgs),
    /// Replicated coupled paths with the ordering asserted at every window.
    VerifyCoupling(VerifyCouplingArgs),
    /// Joint degree law of one vertex against the branching-process limit.
    VerifyFdd(VerifyFddArgs),
    /// Replicated max-deviation checks against the concentration bound.
    VerifyConcentration(VerifyConcentrationArgs),
    /// Exact degree-sequence law by exhaustive enumeration.
    Enumerate(EnumerateArgs),
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SimulateBaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Edges attached per arriving vertex.
    #[arg(long)]
    pub m: u32,
    /// Number of vertices to grow.
    #[arg(long)]
    pub n: u64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SimulateYuleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Per-individual birth rate.
    #[arg(long)]
    pub lambda: f64,
    /// Founding population.
    #[arg(long)]
    pub m0: u64,
    /// Observation horizon.
    #[arg(long = "T", value_name = "TIME")]
    pub horizon: f64,
    /// Independent draws.
    #[arg(long)]
    pub replicas: u64,
    /// Per-draw population cap (resource guard).
    #[arg(long, default_value_t = 10_000_000)]
    pub cap: u64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SimulateMyuleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Species birth rate within a genus.
    #[arg(long)]
    pub lambda: f64,
    /// Genus arrival rate.
    #[arg(long)]
    pub beta: f64,
    /// Founding species per genus.
    #[arg(long)]
    pub m0: u64,
    /// Observation horizon.
    #[arg(long = "T", value_name = "TIME")]
    pub horizon: f64,
    /// Independent realizations (one uniformly chosen genus each).
    #[arg(long)]
    pub replicas: u64,
    /// Population cap per draw (resource guard).
    #[arg(long, default_value_t = 10_000_000)]
    pub cap: u64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SimulateCoupledArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Edges attached per arriving vertex.
    #[arg(long)]
    pub m: u32,
    /// Vertex count at the start of the coupled windows.
    #[arg(long)]
    pub i: u64,
    /// Number of coupled windows to run.
    #[arg(long)]
    pub windows: u64,
    /// Independent coupled paths.
    #[arg(long)]
    pub replicas: u64,
    /// Certificate JSON to reuse (re-verified on load); certifies in place
    /// when absent.
    #[arg(long, value_name = "PATH")]
    pub constants: Option<PathBuf>,
    /// Degree cap requested when certifying in place.
    #[arg(long, default_value_t = 500)]
    pub k_max: u64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Edges attached per arriving vertex.
    #[arg(long)]
    pub m: u32,
    /// Smallest vertex count to certify.
    #[arg(long, default_value_t = 50)]
    pub n_min: u64,
    /// Largest vertex count to certify.
    #[arg(long)]
    pub n_cert: u64,
    /// Largest degree requested (may be clamped; the summary says so).
    #[arg(long, default_value_t = 500)]
    pub k_max: u64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct VerifyLimitDegreeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Edges attached per arriving vertex.
    #[arg(long)]
    pub m: u32,
    /// Number of vertices of the single grown graph.
    #[arg(long)]
    pub n: u64,
    /// Total-variation tolerance against the limit law.
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct VerifyPlantedArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Edges attached per arriving vertex (for the degree-equivalence part).
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Number of root lineages.
    #[arg(long)]
    pub i: u64,
    /// Vertices at sampling time.
    #[arg(long)]
    pub n: u64,
    /// Independent replicas.
    #[arg(long)]
    pub replicas: u64,
    /// Allowed deviation of each lineage frequency from 1/i.
    #[arg(long, default_value_t = 0.006)]
    pub lineage_tol: f64,
    /// Allowed deviation of each vertex frequency from 1/n.
    #[arg(long, default_value_t = 0.002)]
    pub vertex_tol: f64,
    /// Allowed standard errors between the mean lineage count and n/i.
    #[arg(long, default_value_t = 3.0)]
    pub se_factor: f64,
    /// Significance level for the degree two-sample test.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct VerifyCouplingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Edges attached per arriving vertex.
    #[arg(long)]
    pub m: u32,
    /// Vertex count at the start of the coupled windows.
    #[arg(long)]
    pub i: u64,
    /// Number of coupled windows per path.
    #[arg(long)]
    pub windows: u64,
    /// Independent coupled paths.
    #[arg(long)]
    pub replicas: u64,
    /// Certificate JSON to reuse (re-verified on load); certifies in place
    /// when absent.
    #[arg(long, value_name = "PATH")]
    pub constants: Option<PathBuf>,
    /// Degree cap requested when certifying in place.
    #[arg(long, default_value_t = 500)]
    pub k_max: u64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct VerifyFddArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Edges attached per arriving vertex.
    #[arg(long)]
    pub m: u32,
    /// Traced vertex; also the window count the checkpoints scale from.
    #[arg(long)]
    pub i: u64,
    /// Comma-separated window multipliers w; checkpoints sit at i + floor(i*w).
    #[arg(long = "w-list", value_name = "W1,W2,...")]
    pub w_list: String,
    /// Independent replicas.
    #[arg(long)]
    pub replicas: u64,
    /// Total-variation tolerance against the joint limit law.
    #[arg(long, default_value_t = 0.03)]
    pub tol: f64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct VerifyConcentrationArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Edges attached per arriving vertex.
    #[arg(long)]
    pub m: u32,
    /// Number of vertices per grown graph.
    #[arg(long)]
    pub n: u64,
    /// Bound constant; must exceed m * sqrt(8).
    #[arg(long = "C")]
    pub constant: f64,
    /// Independent replicas.
    #[arg(long)]
    pub replicas: u64,
    /// Largest tolerated fraction of replicas exceeding the bound.
    #[arg(long, default_value_t = 0.01)]
    pub max_fraction: f64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Edges attached per arriving vertex.
    #[arg(long)]
    pub m: u32,
    /// Number of vertices.
    #[arg(long)]
    pub n: u64,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let argv = match assemble_argv(std::env::args_os().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return e.code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            // configuration error contract: diagnostic on stderr, exit 1
            eprint!("{e}");
            return 1;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

/// Injects config-file entries as flags right after the subcommand so
/// explicitly passed flags (which come later) override them.
fn assemble_argv(raw: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    // First token that does not look like a flag is the subcommand.
    let sub_idx = match raw
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| !a.to_string_lossy().starts_with('-'))
    {
        Some((idx, _)) => idx,
        None => return Ok(raw),
    };
    let tail = &raw[sub_idx + 1..];

    // Last --config occurrence wins, matching flag override semantics.
    let mut config_path: Option<PathBuf> = None;
    let mut iter = tail.iter().peekable();
    while let Some(tok) = iter.next() {
        let tok = tok.to_string_lossy();
        if tok == "--config" {
            if let Some(v) = iter.peek() {
                config_path = Some(PathBuf::from(v.to_string_lossy().into_owned()));
            }
        } else if let Some(path) = tok.strip_prefix("--config=") {
            config_path = Some(PathBuf::from(path));
        }
    }
    let Some(path) = config_path else {
        return Ok(raw);
    };

    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
    let serde_json::Value::Object(map) = value else {
        return Err(CliError::Config(format!(
            "config file {}: expected a flat JSON object",
            path.display()
        )));
    };

    let mut injected: Vec<OsString> = Vec::new();
    for (key, val) in &map {
        if key == "config" {
            continue;
        }
        let rendered = render_config_value(key, val)?;
        match rendered {
            ConfigToken::Skip => {}
            ConfigToken::Flag => injected.push(format!("--{key}").into()),
            ConfigToken::Value(s) => {
                injected.push(format!("--{key}").into());
                injected.push(s.into());
            }
        }
    }

    let mut argv: Vec<OsString> = raw[..=sub_idx].to_vec();
    argv.extend(injected);
    argv.extend(tail.iter().cloned());
    Ok(argv)
}

enum ConfigToken {
    Skip,
    Flag,
    Value(String),
}

fn render_config_value(key: &str, val: &serde_json::Value) -> Result<ConfigToken, CliError> {
    use serde_json::Value::*;
    Ok(match val {
        Null => ConfigToken::Skip,
        Bool(true) => ConfigToken::Flag,
        Bool(false) => ConfigToken::Skip,
        Number(n) => ConfigToken::Value(n.to_string()),
        String(s) => ConfigToken::Value(s.clone()),
        Array(items) => {
            let mut parts = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    Number(n) => parts.push(n.to_string()),
                    String(s) => parts.push(s.clone()),
                    _ => {
                        return Err(CliError::Config(format!(
                            "config key {key}: arrays may hold only numbers or strings"
                        )))
                    }
                }
            }
            ConfigToken::Value(parts.join(","))
        }
        Object(_) => {
            return Err(CliError::Config(format!(
                "config key {key}: nested objects are not allowed in the flat config"
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(tokens: &[&str]) -> Vec<OsString> {
        tokens.iter().map(OsString::from).collect()
    }

    #[test]
    fn argv_without_config_is_untouched() {
        let raw = argv(&["bayule", "enumerate", "--m", "1", "--n", "2"]);
        assert_eq!(assemble_argv(raw.clone()).unwrap(), raw);
    }

    #[test]
    fn config_tokens_precede_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"m": 1, "n": 2}"#).unwrap();
        let raw = argv(&[
            "bayule",
            "enumerate",
            "--config",
            path.to_str().unwrap(),
            "--n",
            "3",
        ]);
        let got = assemble_argv(raw).unwrap();
        let got: Vec<String> = got
            .iter()
            .map(|s| s.to_string_lossy().into_owned())
            .collect();
        // injected --m 1 --n 2 first, then the explicit --n 3 so it wins
        assert_eq!(
            got,
            vec![
                "bayule",
                "enumerate",
                "--m",
                "1",
                "--n",
                "2",
                "--config",
                path.to_str().unwrap(),
                "--n",
                "3",
            ]
        );
    }

    #[test]
    fn config_arrays_join_with_commas() {
        let tok = render_config_value("w-list", &serde_json::json!([1, 3.5])).unwrap();
        match tok {
            ConfigToken::Value(s) => assert_eq!(s, "1,3.5"),
            _ => panic!("expected a value token"),
        }
    }

    #[test]
    fn nested_config_rejected() {
        assert!(render_config_value("x", &serde_json::json!({"a": 1})).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"[1, 2]"#).unwrap();
        let raw = argv(&["bayule", "enumerate", "--config", path.to_str().unwrap()]);
        assert!(assemble_argv(raw).is_err());
    }
}
