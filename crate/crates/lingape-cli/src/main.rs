//! `lingape` — command-line front end for the benchmark harness.
//!
//! Subcommands: `run` a campaign from a config file, `reproduce` a packaged
//! figure/table preset, print `complexity` quantities for an instance,
//! generate `surrogate-data`, and `ingest` a feature/outcome table into an
//! instance file. Any aborted batch exits nonzero.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Context;
use clap::{Parser, Subcommand};

use lingape::allocation::allocation_cache;
use lingape::bench::{
    load_config, manifest_json, reproduce, run_batch, summarize, summary_csv, FigurePreset,
    ReproduceOptions, Scale, REAL_FIT_LAMBDA,
};
use lingape::complexity::{complexity_report, h_epsilon, theorem2_bound, BoundParams};
use lingape::model::{build_real_instance, surrogate_table, FeatureOutcomeTable, InstanceSpec, RngSeed};

#[derive(Parser)]
#[command(
    name = "lingape",
    version,
    about = "Benchmark harness for gap-based best-arm identification in linear bandits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign described by a flat key/value config file.
    Run {
        /// Path to the config file (see the README for the schema).
        config: PathBuf,
        /// Directory receiving summary.csv, manifest.json, and records.jsonl.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Re-run a packaged experiment preset and write its CSVs and manifest.
    Reproduce {
        /// Which preset to run.
        #[arg(value_parser = FigurePreset::from_str)]
        preset: FigurePreset,
        /// `ci` is a scaled-down sweep; `full` is the original protocol.
        #[arg(long, default_value = "ci", value_parser = Scale::from_str)]
        scale: Scale,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Feature/outcome table for fig3 (generate one with surrogate-data).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Print complexity quantities for an instance JSON file.
    Complexity {
        /// Path to an instance file (as written by `ingest`).
        instance: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Generate a synthetic feature/outcome table.
    SurrogateData {
        /// Number of rows.
        #[arg(long)]
        rows: usize,
        /// Feature dimension.
        #[arg(long, default_value_t = 36)]
        dim: usize,
        /// Where to write the table (CSV with an f1,…,fd,outcome header).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample a K-arm instance from a feature/outcome table and save it.
    Ingest {
        /// Path to the table (CSV with an f1,…,fd,outcome header).
        table: PathBuf,
        /// Number of arms to sample.
        #[arg(long)]
        k: usize,
        /// Smallest acceptable suboptimality gap in the sample.
        #[arg(long, default_value_t = 0.05)]
        min_gap: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the instance JSON.
        #[arg(long, default_value = "instance.json")]
        out: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { config, out } => cmd_run(&config, &out),
        Command::Reproduce { preset, scale, out, data } => {
            let options = ReproduceOptions { scale, out_dir: out, data };
            for path in reproduce(preset, &options)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Complexity { instance, epsilon, delta, lambda } => {
            cmd_complexity(&instance, epsilon, delta, lambda)
        }
        Command::SurrogateData { rows, dim, out, seed } => {
            let table = surrogate_table(rows, dim, RngSeed(seed))?;
            table.save(&out)?;
            println!("{} ({} rows × {} features)", out.display(), table.rows(), table.dim());
            Ok(())
        }
        Command::Ingest { table, k, min_gap, seed, out } => {
            let rows = FeatureOutcomeTable::load(&table)
                .with_context(|| format!("cannot load table {}", table.display()))?;
            let mut rng = RngSeed(seed).stream();
            let instance = build_real_instance(&rows, k, REAL_FIT_LAMBDA, min_gap, &mut rng)?;
            InstanceSpec::from_instance(&instance).save(&out)?;
            println!(
                "{} ({} arms, dimension {}, S = {})",
                out.display(),
                instance.k(),
                instance.dim(),
                instance.s()
            );
            Ok(())
        }
    }
}

fn cmd_run(config_path: &PathBuf, out: &PathBuf) -> anyhow::Result<()> {
    let config = load_config(config_path)?;
    let records = run_batch(&config)?;
    let rows = summarize(&records);

    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create {}", out.display()))?;
    let summary_path = out.join("summary.csv");
    std::fs::write(&summary_path, summary_csv(&rows))?;

    let manifest_path = out.join("manifest.json");
    let mut manifest = serde_json::to_string_pretty(&manifest_json(&config, None, None))?;
    manifest.push('\n');
    std::fs::write(&manifest_path, manifest)?;

    let records_path = out.join("records.jsonl");
    let mut lines = String::new();
    for record in &records {
        lines.push_str(&serde_json::to_string(record)?);
        lines.push('\n');
    }
    std::fs::write(&records_path, lines)?;

    for path in [summary_path, manifest_path, records_path] {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_complexity(instance: &PathBuf, epsilon: f64, delta: f64, lambda: f64) -> anyhow::Result<()> {
    let instance = InstanceSpec::load(instance)
        .with_context(|| format!("cannot load instance {}", instance.display()))?
        .build()?;
    let cache = allocation_cache(instance.arms())?;
    let report = complexity_report(&instance, epsilon, delta, lambda, &cache)?;
    let h = h_epsilon(&instance, epsilon, &cache)?;
    let (bound, _) = theorem2_bound(h, &BoundParams::for_instance(&instance, lambda, delta))?;

    let mut value = serde_json::to_value(&report)?;
    let obj = value.as_object_mut().expect("report serializes to an object");
    obj.insert("epsilon".into(), epsilon.into());
    obj.insert("delta".into(), delta.into());
    obj.insert("lambda".into(), lambda.into());
    obj.insert("theorem2_bound".into(), bound.into());
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}
