use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use rayon::prelude::*;

use goalsem_core::config::RunConfig;
use goalsem_core::logic::QSentence;
use goalsem_core::metrics::{
    advantage_correlation, correlation_points, monotonicity_violations, run_episode, sweep,
    write_csv, write_trace_jsonl, MetricsRow, SweepRow,
};
use goalsem_core::oracle::{
    closed_form, content, enumerate, ClosedFormParams, HypothesisTerm, OracleHypothesis, Rational,
    ENUMERATION_MAX_T,
};
use goalsem_core::validation::{validate_key, KeyValidation};

#[derive(Parser)]
#[command(
    name = "goalsem",
    version,
    about = "Goal-oriented semantic evidence selection"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact c(e), c(phi|e) and objective term for small vocabularies.
    Oracle(OracleArgs),
    /// Per-seed H-DSR / A-DSR for every cell of a config.
    Run(RunArgs),
    /// Seed-averaged sweep table and baseline/advantage correlation.
    Sweep(RunArgs),
    /// Compare the selection key with the exact objective on random instances.
    ValidateKey(ValidateArgs),
}

#[derive(Args)]
struct OracleArgs {
    /// Number of slots.
    #[arg(long, default_value_t = 2)]
    t: u32,
    /// Distinct observed Q-sentences; comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    k: Vec<u32>,
    /// Fixed slots of the hypothesis; comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    z: Vec<u32>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, env = "GOALSEM_OUT", default_value = "out")]
    out: PathBuf,
    /// Seed override, e.g. `0,1,2` or `0..20`.
    #[arg(long)]
    seeds: Option<String>,
    /// Also write a per-step JSON-lines trace (run only).
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 4)]
    t: usize,
    /// Pool size.
    #[arg(long, default_value_t = 7)]
    n: usize,
    /// Budget.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 6)]
    max_hypotheses: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a
                .parse()
                .with_context(|| format!("bad seed range `{part}`"))?;
            let b: u64 = b
                .parse()
                .with_context(|| format!("bad seed range `{part}`"))?;
            out.extend(a..b);
        } else {
            out.push(part.parse().with_context(|| format!("bad seed `{part}`"))?);
        }
    }
    if out.is_empty() {
        bail!("no seeds in `{spec}`");
    }
    Ok(out)
}

fn load_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(s) = &args.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn fraction(r: &Rational) -> String {
    if r.denom() == &1.into() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Hypothesis fixing slots `0..z` to true, evidence the first `k` Q-sentences
/// that do not satisfy it (then satisfying ones, which makes it overlap).
fn oracle_row(t: u32, k: u32, z: u32) -> Result<String> {
    let q = 1u32 << t;
    if z == 0 || z > t || k > q {
        bail!("need 1 <= Z <= T and K <= 2^T, got T = {t}, K = {k}, Z = {z}");
    }
    let fixed: Vec<(usize, bool)> = (0..z as usize).map(|s| (s, true)).collect();
    let want = (1u64 << z) - 1;
    let (miss, hit): (Vec<u64>, Vec<u64>) = (0..u64::from(q)).partition(|b| b & want != want);
    let evidence: BTreeSet<QSentence> = miss
        .into_iter()
        .chain(hit)
        .take(k as usize)
        .map(|b| QSentence::from_bits(b, t as usize))
        .collect();
    let overlapping = evidence.iter().any(|s| s.bits() & want == want);
    let params = ClosedFormParams::new(t, k, vec![HypothesisTerm { z, overlapping }])?;
    let ce = closed_form::evidence_probability(&params)?;
    let conf = closed_form::confirmation(&params, 0)?;
    let f = closed_form::objective_term(&params, 0)?;
    let method = if t <= ENUMERATION_MAX_T {
        let h = OracleHypothesis::from_fixed(&fixed, t as usize);
        let ce_enum = enumerate::evidence_probability(&evidence, t)?;
        let conf_enum = enumerate::degree_of_confirmation(&h, &evidence, t)?;
        let f_enum = &ce_enum * &conf_enum * content(&conf_enum);
        if ce_enum != ce || conf_enum != conf || f_enum != f {
            bail!("enumeration and closed form disagree at T = {t}, K = {k}, Z = {z}");
        }
        "enumeration"
    } else {
        "closed-form"
    };
    // c(phi|e) over its natural denominator 2^alpha - 1, e.g. 252/255
    let conf_text = if overlapping {
        fraction(&conf)
    } else {
        let den: BigInt = (BigInt::from(1) << (1u64 << params.log2_alpha())) - 1;
        let num = &conf * Rational::from_integer(den.clone());
        format!("{}/{den}", num.to_integer())
    };
    Ok(format!(
        "{t},{k},{z},{overlapping},{},{conf_text},{},{method}",
        fraction(&ce),
        fraction(&f)
    ))
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "t,k,z,overlapping,c_e,c_phi_given_e,f,method")?;
    for &k in &args.k {
        for &z in &args.z {
            writeln!(out, "{}", oracle_row(args.t, k, z)?)?;
        }
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let (slots, plan) = cfg.plan()?;
    let cells = plan.cells();
    let jobs: Vec<(usize, usize, u64)> = (0..plan.scenarios.len())
        .flat_map(|s| {
            let seeds = &plan.seeds;
            (0..plan.rule_sets.len()).flat_map(move |r| seeds.iter().map(move |&x| (s, r, x)))
        })
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(s, r, seed)| {
            run_episode(
                &plan.scenarios[s],
                &plan.rule_sets[r],
                &slots,
                seed,
                &cells,
                plan.cap,
            )
        })
        .collect::<Result<_, _>>()?;

    let mut csv = create(&args.out, "runs.csv")?;
    writeln!(
        csv,
        "scenario,architecture,rule_set,strategy,k,seed,hdsr,adsr"
    )?;
    let mut trace = if args.trace {
        Some(create(&args.out, "trace.jsonl")?)
    } else {
        None
    };
    let mut count = 0;
    for (&(s, _, _), traces) in jobs.iter().zip(&results) {
        for t in traces {
            let row = MetricsRow::from_trace(&plan.scenarios[s].label, t)?;
            writeln!(
                csv,
                "{},{},{},{},{},{},{:.6},{:.6}",
                row.scenario,
                row.architecture,
                row.rule_set,
                row.strategy.name(),
                row.k,
                row.seed,
                row.hdsr,
                row.adsr
            )?;
            count += 1;
        }
        if let Some(w) = trace.as_mut() {
            write_trace_jsonl(w, traces)?;
        }
    }
    csv.flush()?;
    if let Some(mut w) = trace {
        w.flush()?;
    }
    println!(
        "{count} rows written to {}",
        args.out.join("runs.csv").display()
    );
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let (slots, plan) = cfg.plan()?;
    let result = sweep(&plan, &slots)?;

    let labels: Vec<&str> = plan.scenarios.iter().map(|s| s.label.as_str()).collect();
    for label in &labels {
        let rows: Vec<SweepRow> = result
            .rows
            .iter()
            .filter(|r| r.scenario == *label)
            .cloned()
            .collect();
        let name = if labels.len() == 1 {
            "sweep.csv".to_string()
        } else {
            format!("sweep-{label}.csv")
        };
        let mut w = create(&args.out, &name)?;
        write_csv(&mut w, &rows)?;
        w.flush()?;
        println!(
            "{} rows written to {}",
            rows.len(),
            args.out.join(&name).display()
        );
    }

    let k = cfg.correlation_k;
    let points = correlation_points(&result.rows, k);
    let (r, note) = match advantage_correlation(&result.rows, k) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let violations = monotonicity_violations(&result.per_seed);
    let summary = serde_json::json!({
        "correlation_k": k,
        "correlation": r,
        "correlation_note": note,
        "points": points,
        "monotonicity_violations": violations,
    });
    let mut w = create(&args.out, "summary.json")?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;
    match r {
        Some(r) => println!(
            "baseline/advantage correlation at k={k}: {r:.6} over {} configurations",
            points.len()
        ),
        None => println!("correlation undefined: {}", note.unwrap_or_default()),
    }
    println!("semantic A-DSR drops with growing k: {}", violations.len());
    Ok(())
}

fn cmd_validate_key(args: &ValidateArgs) -> Result<bool> {
    let report = validate_key(&KeyValidation {
        trials: args.trials,
        t: args.t..=args.t,
        n: args.n..=args.n,
        k: args.k..=args.k,
        max_hypotheses: args.max_hypotheses,
        seed: args.seed,
    })?;
    println!("{report}");
    Ok(report.disagreements == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let outcome = match &cli.command {
        Command::Oracle(a) => cmd_oracle(a).map(|_| true),
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::ValidateKey(a) => cmd_validate_key(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: selection key and exact objective disagree");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
