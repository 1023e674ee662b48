//! One handler per subcommand: run the experiment, write the artifacts,
//! and translate outcomes into the exit-status contract.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use bayule_core::ba::{enumerate_exact, grow_with_rng, BaConfig};
use bayule_core::coupling::{
    certify_constants, coupled_run, default_window_count, verify_certificate, Certificate,
    CoupledTriple, CouplingError,
};
use bayule_core::rng::{par_replica_map, replica_rng_channel};
use bayule_core::stats::{
    concentration_check, fixed_vertex_experiment, lineage_count_samples,
    planted_degree_equivalence_experiment, planted_equivalence_records, equivalence_report,
    sample_mean_se, tv_empirical_vs_pmf, tv_joint_vs_pmf, GofResult, Histogram,
};
use bayule_core::yule::{
    genus_size_limit_tv, limit_pmf, limit_pmf_tail, myule_uniform_genus_sample, yule_mean,
    yule_pmf, yule_sample, yule_tail, yule_fdd_pmf, YuleParams,
};

use crate::output::{artifact_path, write_csv, write_report, ResolvedConfig};
use crate::params;
use crate::{
    CliError, Command, CommonArgs, CertifyArgs, EnumerateArgs, SimulateBaArgs, SimulateCoupledArgs,
    SimulateMyuleArgs, SimulateYuleArgs, VerifyConcentrationArgs, VerifyCouplingArgs,
    VerifyFddArgs, VerifyLimitDegreeArgs, VerifyPlantedArgs,
};

/// Execution context shared by the handlers.
pub struct Context {
    out_dir: PathBuf,
    seed: u64,
    parallelism: usize,
}

impl Context {
    fn prepare(common: &CommonArgs) -> Result<Self, CliError> {
        let parallelism = match common.parallelism {
            Some(p) => p,
            None => match std::env::var("BAYULE_WORKERS") {
                Ok(v) => v.parse().map_err(|_| {
                    CliError::Config(format!("BAYULE_WORKERS must be a positive integer, got {v}"))
                })?,
                Err(_) => 1,
            },
        };
        if parallelism == 0 {
            return Err(CliError::Config("parallelism must be at least 1".into()));
        }
        // Global worker pool; replica streams make results independent of it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build_global();
        std::fs::create_dir_all(&common.output).map_err(|e| {
            CliError::Config(format!(
                "cannot create output directory {}: {e}",
                common.output.display()
            ))
        })?;
        Ok(Context {
            out_dir: common.output.clone(),
            seed: common.seed,
            parallelism,
        })
    }

    fn config(
        &self,
        command: &'static str,
        params: std::collections::BTreeMap<String, Value>,
    ) -> ResolvedConfig {
        ResolvedConfig {
            command,
            seed: self.seed,
            parallelism: self.parallelism,
            params,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        artifact_path(&self.out_dir, name)
    }
}

pub fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::SimulateBa(a) => simulate_ba(&a, &Context::prepare(&a.common)?),
        Command::SimulateYule(a) => simulate_yule(&a, &Context::prepare(&a.common)?),
        Command::SimulateMyule(a) => simulate_myule(&a, &Context::prepare(&a.common)?),
        Command::SimulateCoupled(a) => simulate_coupled(&a, &Context::prepare(&a.common)?),
        Command::Certify(a) => certify(&a, &Context::prepare(&a.common)?),
        Command::VerifyLimitDegree(a) => verify_limit_degree(&a, &Context::prepare(&a.common)?),
        Command::VerifyPlanted(a) => verify_planted(&a, &Context::prepare(&a.common)?),
        Command::VerifyCoupling(a) => verify_coupling(&a, &Context::prepare(&a.common)?),
        Command::VerifyFdd(a) => verify_fdd(&a, &Context::prepare(&a.common)?),
        Command::VerifyConcentration(a) => {
            verify_concentration(&a, &Context::prepare(&a.common)?)
        }
        Command::Enumerate(a) => enumerate(&a, &Context::prepare(&a.common)?),
    }
}

fn histogram_rows(hist: &Histogram) -> Vec<String> {
    let total = hist.total() as f64;
    hist.counts()
        .iter()
        .map(|(&k, &c)| format!("{k},{c},{}", c as f64 / total))
        .collect()
}

fn gof_value(g: &GofResult) -> Value {
    json!({
        "statistic": g.statistic,
        "dof": g.dof,
        "p_value": g.p_value,
        "bins": g.bins,
    })
}

// ---------------------------------------------------------------- simulate

fn simulate_ba(args: &SimulateBaArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config("simulate-ba", params! {"m": args.m, "n": args.n});
    let ba = BaConfig::new(args.m, args.n, ctx.seed);
    ba.validate()?;
    let mut rng = replica_rng_channel(ctx.seed, 0, 0);
    let state = grow_with_rng(&ba, &mut rng)?;
    let mut hist = Histogram::new();
    for &d in state.degrees() {
        hist.add(d);
    }
    write_csv(
        &ctx.path("ba_degree_histogram.csv"),
        &config,
        "degree,count,fraction",
        histogram_rows(&hist),
    )?;
    write_report(
        &ctx.path("ba_summary.json"),
        &config,
        json!({
            "time": state.time(),
            "vertices": state.num_vertices(),
            "edges": state.num_edges(),
            "max_degree": hist.max_key(),
        }),
        None,
    )?;
    println!(
        "grew {} vertices, max degree {}",
        state.num_vertices(),
        hist.max_key().unwrap_or(0)
    );
    Ok(())
}

fn simulate_yule(args: &SimulateYuleArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config(
        "simulate-yule",
        params! {"lambda": args.lambda, "m0": args.m0, "T": args.horizon,
                 "replicas": args.replicas, "cap": args.cap},
    );
    let yule = YuleParams::new(args.lambda, args.m0, args.horizon)?;
    let cap = args.cap;
    let draws = par_replica_map(ctx.seed, args.replicas, move |_r, rng| {
        yule_sample(&yule, cap, rng)
    });
    let mut hist = Histogram::new();
    for d in draws {
        hist.add(d?);
    }
    let tv = tv_empirical_vs_pmf(&hist, args.m0, |k| yule_pmf(&yule, k), |k| yule_tail(&yule, k))?;
    let total = hist.total() as f64;
    let sample_mean: f64 = hist
        .counts()
        .iter()
        .map(|(&k, &c)| k as f64 * c as f64)
        .sum::<f64>()
        / total;
    write_csv(
        &ctx.path("yule_histogram.csv"),
        &config,
        "population,count,fraction",
        histogram_rows(&hist),
    )?;
    write_report(
        &ctx.path("yule_report.json"),
        &config,
        json!({
            "tv_vs_pmf": tv,
            "sample_mean": sample_mean,
            "analytic_mean": yule_mean(&yule),
            "max_population": hist.max_key(),
        }),
        None,
    )?;
    println!("{} draws, TV vs closed form {tv:.6}", args.replicas);
    Ok(())
}

fn simulate_myule(args: &SimulateMyuleArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config(
        "simulate-myule",
        params! {"lambda": args.lambda, "beta": args.beta, "m0": args.m0,
                 "T": args.horizon, "replicas": args.replicas, "cap": args.cap},
    );
    let species = YuleParams::new(args.lambda, args.m0, args.horizon)?;
    let (beta, cap) = (args.beta, args.cap);
    let draws = par_replica_map(ctx.seed, args.replicas, move |_r, rng| {
        myule_uniform_genus_sample(beta, &species, cap, rng)
    });
    let mut hist = Histogram::new();
    let mut birth_sum = 0.0f64;
    for d in draws {
        let (tau, size) = d?;
        birth_sum += tau;
        hist.add(size);
    }
    let tv_limit =
        tv_empirical_vs_pmf(&hist, args.m0, |k| limit_pmf(args.m0, k), |k| limit_pmf_tail(args.m0, k))?;
    let tv_horizon = genus_size_limit_tv(args.m0, args.horizon)?;
    let total = hist.total() as f64;
    let mean_size: f64 = hist
        .counts()
        .iter()
        .map(|(&k, &c)| k as f64 * c as f64)
        .sum::<f64>()
        / total;
    write_csv(
        &ctx.path("myule_genus_sizes.csv"),
        &config,
        "size,count,fraction",
        histogram_rows(&hist),
    )?;
    write_report(
        &ctx.path("myule_report.json"),
        &config,
        json!({
            "tv_vs_limit": tv_limit,
            "analytic_tv_at_horizon": tv_horizon,
            "mean_genus_size": mean_size,
            "mean_birth_time": birth_sum / total,
        }),
        None,
    )?;
    println!(
        "{} genus draws, empirical TV vs limit {tv_limit:.6}, law-at-horizon TV {tv_horizon:.6}",
        args.replicas
    );
    Ok(())
}

fn simulate_coupled(args: &SimulateCoupledArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config(
        "simulate-coupled",
        params! {"m": args.m, "i": args.i, "windows": args.windows,
                 "replicas": args.replicas, "k-max": args.k_max,
                 "constants": args.constants.as_ref().map(|p| p.display().to_string())},
    );
    let cert = load_or_certify(
        args.constants.as_deref(),
        args.m,
        args.i,
        args.windows,
        args.k_max,
    )?;
    let constants = cert.constants.clone();
    let (i, windows) = (args.i, args.windows);
    let runs = par_replica_map(ctx.seed, args.replicas, move |_r, rng| {
        coupled_run(&constants, i, windows, rng)
    });
    let mut rows = Vec::new();
    for (r, run) in runs.into_iter().enumerate() {
        let t: CoupledTriple = run?;
        for (idx, ((&lo, &mid), &up)) in
            t.lower.iter().zip(&t.mid).zip(&t.upper).enumerate()
        {
            rows.push(format!("{r},{},{lo},{mid},{up}", t.i + idx as u64));
        }
    }
    write_csv(
        &ctx.path("coupled_paths.csv"),
        &config,
        "replica,n,lower,mid,upper",
        rows,
    )?;
    write_report(
        &ctx.path("coupled_report.json"),
        &config,
        json!({
            "replicas": args.replicas,
            "windows": args.windows,
            "ordering_violations": 0,
            "certificate": serde_json::to_value(&cert).expect("serializable"),
        }),
        None,
    )?;
    println!(
        "ran {} coupled paths over {} windows with no ordering violations",
        args.replicas, args.windows
    );
    Ok(())
}

// ----------------------------------------------------------------- certify

fn certify(args: &CertifyArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config(
        "certify",
        params! {"m": args.m, "n-min": args.n_min, "n-cert": args.n_cert, "k-max": args.k_max},
    );
    let cert = certify_constants(args.m, args.n_min, args.n_cert, args.k_max)?;
    write_report(
        &ctx.path("certificate.json"),
        &config,
        json!({"certificate": serde_json::to_value(&cert).expect("serializable")}),
        None,
    )?;
    let s = &cert.summary;
    println!(
        "certified m={} on n in [{}, {}], degrees up to {}{}; {} cells, min margin {:.3e}, margins monotone over the last decade: {}",
        cert.constants.m,
        cert.constants.n_min,
        cert.constants.n_cert,
        cert.constants.k_max,
        if s.k_max_clamped {
            format!(" (clamped from {})", cert.constants.requested_k_max)
        } else {
            String::new()
        },
        s.cells_checked,
        s.min_margin,
        s.margin_monotone_last_decade,
    );
    Ok(())
}

/// Loads a certificate (re-verifying it by an independent scan) or builds
/// one covering the run in place.
fn load_or_certify(
    path: Option<&Path>,
    m: u32,
    i: u64,
    windows: u64,
    k_max: u64,
) -> Result<Certificate, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("certificate {}: {e}", p.display())))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("certificate {}: {e}", p.display())))?;
            // accept either a bare certificate or a `certify` report
            let body = value
                .get("results")
                .and_then(|r| r.get("certificate"))
                .cloned()
                .unwrap_or(value);
            let cert: Certificate = serde_json::from_value(body)
                .map_err(|e| CliError::Config(format!("certificate {}: {e}", p.display())))?;
            if cert.constants.m != m {
                return Err(CliError::Config(format!(
                    "certificate {} was issued for m = {}, run asks for m = {m}",
                    p.display(),
                    cert.constants.m
                )));
            }
            let summary = verify_certificate(&cert.constants)?;
            if summary.violations > 0 {
                return Err(CliError::Verification(format!(
                    "certificate re-verification found {} violations over {} cells",
                    summary.violations, summary.cells_checked
                )));
            }
            Ok(Certificate {
                constants: cert.constants,
                summary,
            })
        }
        None => {
            let n_min = i.min(50).max(2);
            let n_cert = (i + windows).max(n_min + 1);
            Ok(certify_constants(m, n_min, n_cert, k_max)?)
        }
    }
}

// ------------------------------------------------------------------ verify

fn verify_limit_degree(args: &VerifyLimitDegreeArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config(
        "verify-limit-degree",
        params! {"m": args.m, "n": args.n, "tol": args.tol},
    );
    let ba = BaConfig::new(args.m, args.n, ctx.seed);
    ba.validate()?;
    let mut rng = replica_rng_channel(ctx.seed, 0, 0);
    let state = grow_with_rng(&ba, &mut rng)?;
    let mut hist = Histogram::new();
    for &d in state.degrees() {
        hist.add(d);
    }
    let m0 = args.m as u64;
    let tv = tv_empirical_vs_pmf(&hist, m0, |k| limit_pmf(m0, k), |k| limit_pmf_tail(m0, k))?;
    let pass = tv <= args.tol;
    let failures = if pass {
        vec![]
    } else {
        vec![format!(
            "limit-degree: TV {tv:.6} exceeds tolerance {} at m = {}, n = {}",
            args.tol, args.m, args.n
        )]
    };
    write_csv(
        &ctx.path("limit_degree_histogram.csv"),
        &config,
        "degree,count,fraction",
        histogram_rows(&hist),
    )?;
    write_report(
        &ctx.path("limit_degree_report.json"),
        &config,
        json!({"tv": tv, "tol": args.tol, "max_degree": hist.max_key()}),
        Some((pass, &failures)),
    )?;
    println!("TV vs limit law {tv:.6} (tolerance {})", args.tol);
    finish(pass, failures)
}

struct Invariant {
    name: &'static str,
    observed: f64,
    limit: f64,
    pass: bool,
}

impl Invariant {
    fn below(name: &'static str, observed: f64, limit: f64) -> Self {
        Invariant {
            name,
            observed,
            limit,
            pass: observed <= limit,
        }
    }

    fn at_least(name: &'static str, observed: f64, limit: f64) -> Self {
        Invariant {
            name,
            observed,
            limit,
            pass: observed >= limit,
        }
    }

    fn to_value(&self) -> Value {
        json!({
            "name": self.name,
            "observed": self.observed,
            "limit": self.limit,
            "pass": self.pass,
        })
    }
}

fn verify_planted(args: &VerifyPlantedArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config(
        "verify-planted",
        params! {"m": args.m, "i": args.i, "n": args.n, "replicas": args.replicas,
                 "lineage-tol": args.lineage_tol, "vertex-tol": args.vertex_tol,
                 "se-factor": args.se_factor, "alpha": args.alpha},
    );
    let records = planted_equivalence_records(args.i, args.n, args.replicas, ctx.seed)?;
    let report = equivalence_report(args.i, args.n, &records)?;
    let counts = lineage_count_samples(args.i, args.n, args.replicas, ctx.seed, 0, 1)?;
    let count_values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean_count, se) = sample_mean_se(&count_values)?;
    let degree = planted_degree_equivalence_experiment(
        args.m,
        args.i,
        args.n,
        args.replicas,
        ctx.seed,
    )?;

    let max_dev = |hist: &Histogram, hi: u64, target: f64| -> f64 {
        (1..=hi)
            .map(|k| (hist.fraction(k) - target).abs())
            .fold(0.0, f64::max)
    };
    let lineage_target = 1.0 / args.i as f64;
    let vertex_target = 1.0 / args.n as f64;
    let invariants = vec![
        Invariant::below(
            "uniform-route lineage frequency deviation",
            max_dev(&report.lineage_uniform, args.i, lineage_target),
            args.lineage_tol,
        ),
        Invariant::below(
            "two-stage lineage frequency deviation",
            max_dev(&report.lineage_two_stage, args.i, lineage_target),
            args.lineage_tol,
        ),
        Invariant::below(
            "uniform-route vertex frequency deviation",
            max_dev(&report.vertex_uniform, args.n, vertex_target),
            args.vertex_tol,
        ),
        Invariant::below(
            "two-stage vertex frequency deviation",
            max_dev(&report.vertex_two_stage, args.n, vertex_target),
            args.vertex_tol,
        ),
        Invariant::below(
            "lineage count mean deviation from n/i",
            (mean_count - args.n as f64 / args.i as f64).abs(),
            args.se_factor * se,
        ),
        Invariant::at_least(
            "degree two-sample p-value",
            degree.degree_gof.p_value,
            args.alpha,
        ),
    ];
    let pass = invariants.iter().all(|v| v.pass);
    let failures: Vec<String> = invariants
        .iter()
        .filter(|v| !v.pass)
        .map(|v| {
            format!(
                "planted: {} observed {:.6} vs limit {:.6}",
                v.name, v.observed, v.limit
            )
        })
        .collect();

    write_csv(
        &ctx.path("planted_records.csv"),
        &config,
        "replica,uniform_lineage,uniform_rank,uniform_vertex,two_stage_lineage,two_stage_rank,two_stage_vertex",
        records.iter().enumerate().map(|(r, (a, b))| {
            format!(
                "{r},{},{},{},{},{},{}",
                a.lineage_w, a.rank_z, a.vertex, b.lineage_w, b.rank_z, b.vertex
            )
        }),
    )?;
    write_report(
        &ctx.path("planted_report.json"),
        &config,
        json!({
            "invariants": invariants.iter().map(Invariant::to_value).collect::<Vec<_>>(),
            "lineage_gof": gof_value(&report.lineage_gof),
            "vertex_gof": gof_value(&report.vertex_gof),
            "rank_gof": gof_value(&report.rank_gof),
            "degree_gof": gof_value(&degree.degree_gof),
            "mean_lineage_count": mean_count,
            "mean_lineage_count_se": se,
            "max_lineage_freq_diff": report.max_lineage_freq_diff,
            "max_vertex_freq_diff": report.max_vertex_freq_diff,
        }),
        Some((pass, &failures)),
    )?;
    for v in &invariants {
        println!(
            "{} {}: {:.6} vs {:.6}",
            if v.pass { "ok  " } else { "FAIL" },
            v.name,
            v.observed,
            v.limit
        );
    }
    finish(pass, failures)
}

fn verify_coupling(args: &VerifyCouplingArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config(
        "verify-coupling",
        params! {"m": args.m, "i": args.i, "windows": args.windows,
                 "replicas": args.replicas, "k-max": args.k_max,
                 "constants": args.constants.as_ref().map(|p| p.display().to_string())},
    );
    let cert = load_or_certify(
        args.constants.as_deref(),
        args.m,
        args.i,
        args.windows,
        args.k_max,
    )?;
    let constants = cert.constants.clone();
    let (i, windows) = (args.i, args.windows);
    let runs = par_replica_map(ctx.seed, args.replicas, move |_r, rng| {
        coupled_run(&constants, i, windows, rng)
    });

    let mut rows = Vec::new();
    let mut ordering_violations = 0u64;
    let mut failed = 0u64;
    let mut first_error: Option<(u64, String)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        match run {
            Ok(t) => rows.push(format!(
                "{r},{},{},{},{}",
                t.start_degree,
                t.lower.last().unwrap(),
                t.mid.last().unwrap(),
                t.upper.last().unwrap()
            )),
            Err(e) => {
                failed += 1;
                if matches!(e, CouplingError::OrderingViolation { .. }) {
                    ordering_violations += 1;
                }
                if first_error.is_none() {
                    first_error = Some((r as u64, e.to_string()));
                }
            }
        }
    }
    let pass = failed == 0;
    let failures = match &first_error {
        None => vec![],
        Some((r, msg)) => vec![format!(
            "coupling: {failed} of {} paths failed ({ordering_violations} ordering violations); first at replica {r}: {msg}",
            args.replicas
        )],
    };
    write_csv(
        &ctx.path("coupling_final.csv"),
        &config,
        "replica,start,final_lower,final_mid,final_upper",
        rows,
    )?;
    write_report(
        &ctx.path("coupling_report.json"),
        &config,
        json!({
            "replicas": args.replicas,
            "windows": args.windows,
            "paths_completed": args.replicas - failed,
            "paths_failed": failed,
            "ordering_violations": ordering_violations,
            "certificate": serde_json::to_value(&cert).expect("serializable"),
        }),
        Some((pass, &failures)),
    )?;
    println!(
        "{} of {} coupled paths completed, {} ordering violations",
        args.replicas - failed,
        args.replicas,
        ordering_violations
    );
    finish(pass, failures)
}

fn verify_fdd(args: &VerifyFddArgs, ctx: &Context) -> Result<(), CliError> {
    let w_list = parse_w_list(&args.w_list)?;
    let config = ctx.config(
        "verify-fdd",
        params! {"m": args.m, "i": args.i, "w-list": w_list.clone(),
                 "replicas": args.replicas, "tol": args.tol},
    );
    let mut checkpoints = Vec::with_capacity(w_list.len());
    let mut times = Vec::with_capacity(w_list.len());
    for &w in &w_list {
        let x = default_window_count(args.i, w)?;
        checkpoints.push(args.i + x);
        times.push((1.0 + w).ln());
    }
    let fdd = fixed_vertex_experiment(args.m, args.i, &checkpoints, args.replicas, ctx.seed)?;
    let m0 = args.m as u64;
    let tv = tv_joint_vs_pmf(&fdd.joint, |key| {
        yule_fdd_pmf(0.5, m0, &times, key).unwrap_or(0.0)
    })?;
    let pass = tv <= args.tol;
    let failures = if pass {
        vec![]
    } else {
        vec![format!(
            "fdd: joint TV {tv:.6} exceeds tolerance {} at i = {}, w = {:?}",
            args.tol, args.i, w_list
        )]
    };

    let header = checkpoints
        .iter()
        .map(|n| format!("degree_at_n{n}"))
        .collect::<Vec<_>>()
        .join(",")
        + ",count,fraction";
    let total = fdd.joint.total() as f64;
    let rows: Vec<String> = fdd
        .joint
        .counts()
        .iter()
        .map(|(key, &c)| {
            let cells = key
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",");
            format!("{cells},{c},{}", c as f64 / total)
        })
        .collect();
    write_csv(&ctx.path("fdd_joint_histogram.csv"), &config, &header, rows)?;
    write_report(
        &ctx.path("fdd_report.json"),
        &config,
        json!({
            "checkpoints": checkpoints,
            "times": times,
            "tv": tv,
            "tol": args.tol,
        }),
        Some((pass, &failures)),
    )?;
    println!("joint TV vs branching limit {tv:.6} (tolerance {})", args.tol);
    finish(pass, failures)
}

fn parse_w_list(raw: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        let w: f64 = part
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("w-list entry {part:?} is not a number")))?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(CliError::Config(format!(
                "w-list entries must be positive and finite, got {w}"
            )));
        }
        if let Some(&prev) = out.last() {
            if w <= prev {
                return Err(CliError::Config(
                    "w-list entries must be strictly increasing".into(),
                ));
            }
        }
        out.push(w);
    }
    if out.is_empty() {
        return Err(CliError::Config("w-list must not be empty".into()));
    }
    Ok(out)
}

fn verify_concentration(args: &VerifyConcentrationArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config(
        "verify-concentration",
        params! {"m": args.m, "n": args.n, "C": args.constant,
                 "replicas": args.replicas, "max-fraction": args.max_fraction},
    );
    let report = concentration_check(args.m, args.n, args.replicas, ctx.seed, args.constant)?;
    let fraction = report.violations as f64 / args.replicas as f64;
    let mean_sup = report.sups.iter().sum::<f64>() / report.sups.len() as f64;
    let pass = fraction <= args.max_fraction;
    let failures = if pass {
        vec![]
    } else {
        vec![format!(
            "concentration: {:.4} of replicas exceeded the bound {:.6}, tolerated {:.4}",
            fraction, report.bound, args.max_fraction
        )]
    };
    write_csv(
        &ctx.path("concentration_sups.csv"),
        &config,
        "replica,sup_deviation",
        report
            .sups
            .iter()
            .enumerate()
            .map(|(r, s)| format!("{r},{s}")),
    )?;
    write_report(
        &ctx.path("concentration_report.json"),
        &config,
        json!({
            "bound": report.bound,
            "violations": report.violations,
            "violation_fraction": fraction,
            "max_fraction": args.max_fraction,
            "mean_sup_deviation": mean_sup,
            "max_sup_deviation": report.max_sup,
        }),
        Some((pass, &failures)),
    )?;
    println!(
        "{} of {} replicas above the bound {:.6} (mean sup deviation {:.6})",
        report.violations, args.replicas, report.bound, mean_sup
    );
    finish(pass, failures)
}

// --------------------------------------------------------------- enumerate

fn enumerate(args: &EnumerateArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ctx.config("enumerate", params! {"m": args.m, "n": args.n});
    let law = enumerate_exact(args.m, args.n)?;
    let rows: Vec<String> = law
        .numerators
        .iter()
        .map(|(seq, &num)| {
            let rendered = seq
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(";");
            format!(
                "{rendered},{num},{},{}",
                law.denominator,
                num as f64 / law.denominator as f64
            )
        })
        .collect();
    write_csv(
        &ctx.path("enumerate.csv"),
        &config,
        "sequence,numerator,denominator,probability",
        rows,
    )?;
    println!(
        "{} degree sequences, common denominator {}",
        law.numerators.len(),
        law.denominator
    );
    Ok(())
}

/// Shared verdict tail: verification commands exit 2 naming the failure.
fn finish(pass: bool, failures: Vec<String>) -> Result<(), CliError> {
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(failures.join("; ")))
    }
}
