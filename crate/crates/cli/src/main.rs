use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand};

use impactrank::config::{source_entries, ConfigError, PipelineConfig};
use impactrank::{run_subcommand, Subcommand};

/// Citation impact pipeline.
///
/// Settings resolve in order: defaults, then the config file, then
/// IMPACTRANK_* environment variables, then flags.
#[derive(Debug, Parser)]
#[command(name = "impactrank", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key=value config file.
    #[arg(long, global = true, env = "IMPACTRANK_CONFIG")]
    config: Option<PathBuf>,
    /// Input source as NAME=METADATA,EDGES; repeatable. Replaces sources from the config file.
    #[arg(long, global = true, env = "IMPACTRANK_SOURCES", value_delimiter = ';')]
    sources: Vec<String>,
    #[arg(long, global = true, env = "IMPACTRANK_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Graph identifier embedded in dump names ([a-z0-9_]+).
    #[arg(long, global = true, env = "IMPACTRANK_GRAPH_ID")]
    graph_id: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "IMPACTRANK_WORKERS")]
    workers: Option<usize>,
    /// List length for top-k correlations.
    #[arg(long, global = true, env = "IMPACTRANK_K")]
    k: Option<usize>,
    #[arg(long, global = true, env = "IMPACTRANK_LISTEN")]
    listen: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_BATCH_CAP")]
    batch_cap: Option<usize>,
    /// Directory of dumps to serve (default: OUT_DIR/dumps).
    #[arg(long, global = true, env = "IMPACTRANK_DUMPS")]
    dumps: Option<PathBuf>,
    /// Write dumps as plain .tsv instead of .tsv.gz.
    #[arg(long, global = true, env = "IMPACTRANK_PLAIN")]
    plain: bool,

    #[arg(long, global = true, env = "IMPACTRANK_CURRENT_YEAR")]
    current_year: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_ICC_WINDOW")]
    icc_window: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_PR_ALPHA")]
    pr_alpha: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_PR_EPSILON")]
    pr_epsilon: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_RAM_GAMMA")]
    ram_gamma: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_ATT_ALPHA")]
    att_alpha: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_ATT_BETA")]
    att_beta: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_ATT_GAMMA")]
    att_gamma: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_ATT_RHO")]
    att_rho: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_ATT_WINDOW")]
    att_window: Option<String>,
    #[arg(long, global = true, env = "IMPACTRANK_MAX_ITERATIONS")]
    max_iterations: Option<String>,
}

#[derive(Debug, ClapSubcommand)]
enum Command {
    /// Merge sources into the unified DOI table and edge list.
    Ingest,
    /// Build the graph and compute the five measures.
    Compute,
    /// Write one dump per measure.
    Export,
    /// Top-k rank correlation matrix over the dumps.
    Correlate,
    /// Serve the dumps over HTTP.
    Serve,
    /// Ingest, compute, export and correlate in one run.
    Pipeline {
        /// Start the HTTP service once the pipeline finishes.
        #[arg(long)]
        then_serve: bool,
    },
}

impl Cli {
    fn overrides(&self) -> Result<Vec<(String, String)>, ConfigError> {
        let mut out = Vec::new();
        for spec in &self.sources {
            out.extend(source_entries(spec)?);
        }
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                out.push((key.to_string(), v));
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.to_string_lossy().into_owned());
        push("output.dir", path(&self.out_dir));
        push("output.graph_id", self.graph_id.clone());
        push("output.compress", self.plain.then(|| "false".to_string()));
        push("run.workers", self.workers.map(|w| w.to_string()));
        push("correlation.k", self.k.map(|k| k.to_string()));
        push("serve.listen", self.listen.clone());
        push("serve.batch_cap", self.batch_cap.map(|c| c.to_string()));
        push("serve.dumps", path(&self.dumps));
        for (key, value) in [
            ("current_year", &self.current_year),
            ("icc_window", &self.icc_window),
            ("pr_alpha", &self.pr_alpha),
            ("pr_epsilon", &self.pr_epsilon),
            ("ram_gamma", &self.ram_gamma),
            ("att_alpha", &self.att_alpha),
            ("att_beta", &self.att_beta),
            ("att_gamma", &self.att_gamma),
            ("att_rho", &self.att_rho),
            ("att_window", &self.att_window),
            ("max_iterations", &self.max_iterations),
        ] {
            push(&format!("measures.{key}"), value.clone());
        }
        Ok(out)
    }

    fn resolve(&self) -> Result<PipelineConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        if !self.sources.is_empty() {
            cfg.sources.clear();
        }
        cfg.apply(&self.overrides()?, std::path::Path::new(""))?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cmd = match cli.command {
        Command::Ingest => Subcommand::Ingest,
        Command::Compute => Subcommand::Compute,
        Command::Export => Subcommand::Export,
        Command::Correlate => Subcommand::Correlate,
        Command::Serve => Subcommand::Serve,
        Command::Pipeline { then_serve } => Subcommand::Pipeline { then_serve },
    };
    let result = cli
        .resolve()
        .map_err(Into::into)
        .and_then(|cfg| run_subcommand(cmd, &cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
