//! `cubeperc`: theory values, exhaustive oracles, single samples and Monte
//! Carlo experiments for bond percolation on Q^d.
//!
//! Machine-readable output goes to stdout, human summaries to stderr.
//! Exit codes: 0 success, 1 bad input or config, 2 capacity or I/O failure.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cubeperc::components::label_components;
use cubeperc::experiments::{run, to_csv, to_json, write_report, ExperimentConfig, ReportFormat};
use cubeperc::oracles::{count_subtrees, exact_percolation_distribution, harper_check, SmallGraph};
use cubeperc::sampler::{sample_edges, write_dump, SampleKey};
use cubeperc::theory::{tree_count_bound, TheoryValues};
use cubeperc::{CubeGraph, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "cubeperc", version, about = "Bond percolation on the binary hypercube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print theory values as JSON.
    Theory(TheoryArgs),
    /// Run an exhaustive oracle and print its verdict as JSON.
    Oracle {
        #[command(subcommand)]
        check: OracleCheck,
    },
    /// Sample one percolated cube and summarize its components.
    Sim(SimArgs),
    /// Run a Monte Carlo experiment from a config file and/or flags.
    Experiment(Box<ExperimentArgs>),
}

#[derive(Debug, Args)]
struct TheoryArgs {
    /// Mean-degree parameter, p = c/d.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<u32>,
    /// Subcritical gap, p = (1 - eps)/(d - 1).
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum OracleCheck {
    /// Edge-isoperimetric inequality over every subset of Q^d (d <= 4).
    Harper {
        #[arg(long)]
        d: u32,
    },
    /// Number of k-vertex subtrees of Q^d containing v.
    Subtrees {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 0)]
        v: usize,
    },
    /// Exact law of the largest component by enumerating all edge subsets.
    Exactdist {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        p: f64,
    },
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    p: f64,
    /// Integer seed, or `random` for an entropy-derived one.
    #[arg(long, default_value = "0")]
    seed: String,
    #[arg(long, default_value_t = 0)]
    trial: u32,
    #[arg(long, default_value_t = 0)]
    round: u8,
    /// Write the component size histogram as CSV.
    #[arg(long)]
    hist: Option<PathBuf>,
    /// Write the open edge set in the binary dump format.
    #[arg(long)]
    dump: Option<PathBuf>,
}

/// Every flag overrides the config file's value for the same key.
#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Integer seed, or `random`.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    w_threshold: Option<String>,
    #[arg(long)]
    p2_exponent: Option<String>,
    #[arg(long)]
    gap_lo: Option<String>,
    #[arg(long)]
    gap_hi: Option<String>,
    #[arg(long)]
    progeny_cap: Option<String>,
    /// Report path; the report goes to stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// `csv` or `json`.
    #[arg(long)]
    format: Option<String>,
}

fn parse_seed(raw: &str) -> Result<u64> {
    if raw == "random" {
        return Ok(rand::random());
    }
    raw.parse()
        .map_err(|e| Error::Input(format!("seed `{raw}`: {e}")))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e.into(),
        })?;
    writeln!(out).map_err(|e| Error::Io {
        path: "<stdout>".into(),
        source: e,
    })
}

fn cmd_theory(args: &TheoryArgs) -> Result<()> {
    if args.c.is_none() && !(args.d.is_some() && args.eps.is_some()) {
        return Err(Error::Input(
            "give --c (optionally with --d), or --d with --eps".into(),
        ));
    }
    let values = TheoryValues::compute(args.c, args.d, args.eps)?;
    print_json(&serde_json::to_value(values).expect("serializable"))
}

fn cmd_oracle(check: &OracleCheck) -> Result<()> {
    let value = match *check {
        OracleCheck::Harper { d } => {
            let report = harper_check(d)?;
            eprintln!(
                "harper d={d}: {} subsets checked, {} violations",
                report.subsets_checked,
                report.violations.len()
            );
            json!({
                "check": "harper",
                "instance": { "d": d },
                "subsets_checked": report.subsets_checked,
                "violations": report.violations.len(),
                "violating_subsets": report.violations,
            })
        }
        OracleCheck::Subtrees { d, k, v } => {
            let g = SmallGraph::from_cube(&CubeGraph::new(d)?)?;
            let count = count_subtrees(&g, v, k)?;
            let bound = tree_count_bound(d, k.max(1))?;
            json!({
                "check": "subtrees",
                "instance": { "d": d, "k": k, "v": v },
                "count": count,
                "bound": bound.loose(),
                "sharp_bound": bound.sharp(),
                "within_bound": count as f64 <= bound.loose(),
            })
        }
        OracleCheck::Exactdist { d, p } => {
            let g = SmallGraph::from_cube(&CubeGraph::new(d)?)?;
            let dist = exact_percolation_distribution(&g, p)?;
            json!({
                "check": "exactdist",
                "instance": { "d": d, "p": p },
                "expected_l1": dist.expected_l1,
                "l1": dist.l1,
                "joint": dist.joint,
                "total_probability": dist.total_probability,
            })
        }
    };
    print_json(&value)
}

fn cmd_sim(args: &SimArgs) -> Result<()> {
    let g = CubeGraph::new(args.d)?;
    let key = SampleKey::new(parse_seed(&args.seed)?, args.trial, args.round);
    let sample = sample_edges(&g, key, args.p)?;
    let lab = label_components(&g, &sample.open)?;
    if let Some(path) = &args.hist {
        let file = std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        lab.write_histogram_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
    }
    if let Some(path) = &args.dump {
        let file = std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        write_dump(&sample, std::io::BufWriter::new(file)).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    eprintln!(
        "d={} p={} seed={} trial={}: l1={} l2={} components={}",
        args.d,
        args.p,
        key.seed,
        key.trial,
        lab.l1(),
        lab.l2(),
        lab.component_count()
    );
    print_json(&json!({
        "d": args.d,
        "p": args.p,
        "seed": key.seed,
        "trial": key.trial,
        "round": key.round,
        "open_edges": sample.open.count(),
        "l1": lab.l1(),
        "l2": lab.l2(),
        "n_components": lab.component_count(),
    }))
}

fn experiment_pairs(args: &ExperimentArgs) -> Result<BTreeMap<String, String>> {
    let mut pairs = match &args.config {
        Some(path) => ExperimentConfig::read_pairs(path)?,
        None => BTreeMap::new(),
    };
    let overrides = [
        ("kind", &args.kind),
        ("d", &args.d),
        ("c", &args.c),
        ("eps", &args.eps),
        ("trials", &args.trials),
        ("seed", &args.seed),
        ("w_threshold", &args.w_threshold),
        ("p2_exponent", &args.p2_exponent),
        ("gap_lo", &args.gap_lo),
        ("gap_hi", &args.gap_hi),
        ("progeny_cap", &args.progeny_cap),
        ("out", &args.out),
        ("format", &args.format),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            pairs.insert(key.to_string(), v.clone());
        }
    }
    if pairs.get("seed").map(String::as_str) == Some("random") {
        pairs.insert("seed".into(), rand::random::<u64>().to_string());
    }
    Ok(pairs)
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let cfg = ExperimentConfig::from_pairs(&experiment_pairs(args)?)?;
    eprintln!(
        "running {} experiment: d={} trials={} seed={}",
        cfg.kind, cfg.d, cfg.trials, cfg.seed
    );
    let report = run(&cfg)?;
    match &cfg.out {
        Some(path) => {
            write_report(&report, path, cfg.format)?;
            eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
        }
        None => {
            let body = match cfg.format {
                ReportFormat::Json => to_json(&report),
                ReportFormat::Csv => to_csv(&report),
            };
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })?;
        }
    }
    for (key, value) in &report.summary {
        eprintln!("  {key} = {value}");
    }
    for (column, agg) in &report.aggregates {
        eprintln!(
            "  {column}: mean {} sd {} min {} max {}",
            agg.mean, agg.std_dev, agg.min, agg.max
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Theory(args) => cmd_theory(args),
        Command::Oracle { check } => cmd_oracle(check),
        Command::Sim(args) => cmd_sim(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
