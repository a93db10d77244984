use std::path::PathBuf;
use std::process::ExitCode;

use actor_concepts::ReportFormat;
use actor_concepts_cli::commands::{self, ClusterRequest};
use actor_concepts_cli::InputPaths;
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

/// Clusters mentions of persons and groups into actor concepts.
#[derive(Parser)]
#[command(name = "actor-concepts", version)]
struct Cli {
    /// Worker threads for matrix construction; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// mentions.jsonl
    #[arg(long)]
    mentions: PathBuf,
    /// embeddings.tsv
    #[arg(long)]
    embeddings: PathBuf,
    /// ne_relations.jsonl
    #[arg(long)]
    relations: Option<PathBuf>,
    /// JSON config; missing keys take the defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// text or json
    #[arg(long, default_value = "text")]
    format: ReportFormat,
}

impl InputArgs {
    fn paths(&self) -> InputPaths {
        InputPaths {
            mentions: self.mentions.clone(),
            embeddings: self.embeddings.clone(),
            relations: self.relations.clone(),
            config: self.config.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the inputs without clustering.
    Validate {
        #[command(flatten)]
        inputs: InputArgs,
    },
    /// Run the staged pipeline and write report and manifest.
    Cluster {
        #[command(flatten)]
        inputs: InputArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Also write SH/SP/SPC as TSV into this directory
        #[arg(long)]
        dump_matrices: Option<PathBuf>,
    },
    /// Run the average-linkage baseline.
    Baseline {
        #[command(flatten)]
        inputs: InputArgs,
        /// Cosine distance threshold (defaults to the config value)
        #[arg(long)]
        distance_thr: Option<f64>,
        /// Write baseline.<ext> here instead of printing
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the pipeline with the baseline.
    Compare {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        distance_thr: Option<f64>,
        /// Write comparison.<ext> here instead of printing
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&PathBuf>, stem: &str, format: ReportFormat, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            let path = dir.join(format!("{stem}.{}", format.extension()));
            let mut batch = actor_concepts_cli::output::OutputBatch::new();
            batch
                .write(&path, text.as_bytes())
                .with_context(|| format!("cannot write {}", path.display()))?;
            batch.commit();
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot start the worker pool")?;
    }
    match cli.command {
        Command::Validate { inputs } => {
            let report = commands::validate(&inputs.paths());
            print!("{}", report.render(inputs.format));
            return Ok(if report.is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
        Command::Cluster {
            inputs,
            out,
            dump_matrices,
        } => {
            let done = commands::cluster(&ClusterRequest {
                inputs: inputs.paths(),
                out,
                format: inputs.format,
                dump_matrices,
            })?;
            let c = done.manifest.run.counts;
            eprintln!(
                "{} clusters over {} RPs, {} unclustered; digest {}",
                c.final_clusters, c.rps, c.unclustered_rps, done.manifest.reproducibility_digest
            );
        }
        Command::Baseline {
            inputs,
            distance_thr,
            out,
        } => {
            let report = commands::baseline(&inputs.paths(), distance_thr)?;
            emit(
                out.as_ref(),
                "baseline",
                inputs.format,
                &report.render(inputs.format),
            )?;
        }
        Command::Compare {
            inputs,
            distance_thr,
            out,
        } => {
            let report = commands::compare(&inputs.paths(), distance_thr)?;
            emit(
                out.as_ref(),
                "comparison",
                inputs.format,
                &report.render(inputs.format),
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ACTOR_CONCEPTS_LOG", "warn"))
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
