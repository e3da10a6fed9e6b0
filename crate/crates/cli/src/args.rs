//! Command-line arguments and their translation into a [`RunManifest`].
//!
//! Flag values override config-file values, which override the defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use h3_core::eval::SourcePrecision;
use h3_core::BaselineMethod;

use crate::config::{parse_seeds, read_config, Overrides};
use crate::error::Result;
use crate::manifest::{Command, MethodName, RunManifest};
use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "h3", version, about = "Weighted three-hop link prediction")]
pub struct Cli {
    /// Worker threads (defaults to all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Parse an edge list and summarize the resulting graph.
    Ingest(#[command(flatten)] IoArgs),
    /// Score every unconnected pair within two hops.
    Score {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Baseline columns to add, e.g. `CN,L3`.
        #[arg(long, value_delimiter = ',')]
        baselines: Vec<BaselineMethod>,
    },
    /// Run the within-period task, or the cross-period task with `--long`.
    Evaluate {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        task: TaskArgs,
        /// Methods to evaluate (default: H3 and every baseline).
        #[arg(long, value_delimiter = ',')]
        methods: Vec<MethodName>,
    },
    /// Run the 17-configuration sensitivity grid over one or more networks.
    Sweep {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        task: TaskArgs,
        /// Fraction of networks sampled from each degree regime.
        #[arg(long)]
        sample_fraction: Option<f64>,
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
    },
    /// Decompose pair scores into their three-hop paths.
    Explain {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// A pair of external ids, `a,b`. Repeatable.
        #[arg(long = "pair", value_parser = parse_pair, required = true)]
        pairs: Vec<(String, String)>,
    },
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Edge list (repeatable for `sweep`).
    #[arg(short, long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output file, or `-` for stdout.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Skip malformed rows instead of aborting.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub p_min: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct TaskArgs {
    /// Long-window edge lists, paired with the inputs in order.
    #[arg(long = "long")]
    pub long_inputs: Vec<PathBuf>,
    /// Seeds, e.g. `1-10` or `1,5,9`.
    #[arg(long, value_parser = parse_seed_list)]
    pub seeds: Option<SeedList>,
    #[arg(long)]
    pub split_ratio: Option<f64>,
    #[arg(long)]
    pub neg_ratio: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Make SP@k a precision (hits / k) instead of a per-source recall.
    #[arg(long)]
    pub precision_sp: bool,
}

/// Parsed `--seeds` value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

fn parse_seed_list(s: &str) -> std::result::Result<SeedList, String> {
    parse_seeds(s).map(SeedList)
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once(',') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
            Ok((a.trim().to_owned(), b.trim().to_owned()))
        }
        _ => Err(format!("expected a pair `a,b`, got {s:?}")),
    }
}

impl ParamArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            eta: self.eta,
            p_min: self.p_min,
            epsilon: self.epsilon,
            ..Overrides::default()
        }
    }
}

impl TaskArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            split_ratio: self.split_ratio,
            neg_ratio: self.neg_ratio,
            top_k: self.top_k,
            seeds: self.seeds.as_ref().map(|s| s.0.clone()),
            ..Overrides::default()
        }
    }
}

impl Cli {
    /// Builds the manifest, reading the config file if one is named.
    pub fn manifest(&self) -> Result<RunManifest> {
        let none = ParamArgs::default();
        let no_task = TaskArgs::default();
        let (command, io, params, task) = match &self.command {
            Sub::Ingest(io) => (Command::Ingest, io, &none, &no_task),
            Sub::Score { io, params, .. } => (Command::Score, io, params, &no_task),
            Sub::Evaluate { io, params, task, .. } => (Command::Evaluate, io, params, task),
            Sub::Sweep { io, task, .. } => (Command::Sweep, io, &none, task),
            Sub::Explain { io, params, .. } => (Command::Explain, io, params, &no_task),
        };
        let file = match &io.config {
            Some(path) => read_config(path)?,
            None => Overrides::default(),
        };
        let flags = params.overrides().layered(task.overrides());
        let mut m = RunManifest::new(command, io.inputs.clone(), io.output.clone());
        m.settings = file.layered(flags);
        m.format = io.format;
        m.lenient = io.lenient;
        m.long_inputs = task.long_inputs.clone();
        if task.precision_sp {
            m.source_precision = SourcePrecision::Precision;
        }
        match &self.command {
            Sub::Score { baselines, .. } => m.baselines = baselines.clone(),
            Sub::Evaluate { methods, .. } if !methods.is_empty() => m.methods = methods.clone(),
            Sub::Sweep {
                sample_fraction,
                sample_seed,
                ..
            } => {
                m.sample_fraction = *sample_fraction;
                m.sample_seed = *sample_seed;
            }
            Sub::Explain { pairs, .. } => m.pairs = pairs.clone(),
            _ => {}
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("h3").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn evaluate_flags_become_a_manifest() {
        let m = cli(&[
            "evaluate", "-i", "g.csv", "-o", "out.csv", "--seeds", "1-3", "--alpha", "1",
            "--methods", "h3,CN", "--format", "jsonl",
        ])
        .manifest()
        .unwrap();
        assert_eq!(m.command, Command::Evaluate);
        assert_eq!(m.seeds(), &[1, 2, 3]);
        assert_eq!(m.params().alpha, 1.0);
        assert_eq!(m.methods, vec![MethodName::H3, MethodName::Baseline(BaselineMethod::CommonNeighbors)]);
        assert_eq!(m.format, Format::JsonLines);
    }

    #[test]
    fn flags_beat_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("run.conf");
        std::fs::write(&conf, "alpha = 0.5\nbeta = 0.1\nseeds = 4\n").unwrap();
        let m = cli(&[
            "evaluate", "-i", "g.csv", "-o", "o.csv", "--config", conf.to_str().unwrap(),
            "--alpha", "2",
        ])
        .manifest()
        .unwrap();
        assert_eq!((m.params().alpha, m.params().beta), (2.0, 0.1));
        assert_eq!(m.seeds(), &[4]);
    }

    #[test]
    fn explain_pairs_and_bad_usage() {
        let m = cli(&["explain", "-i", "g.csv", "-o", "-", "--pair", "a,b", "--pair", "c, d"])
            .manifest()
            .unwrap();
        assert_eq!(m.pairs, vec![("a".into(), "b".into()), ("c".into(), "d".into())]);
        let parse = |a: &[&str]| Cli::try_parse_from(std::iter::once("h3").chain(a.iter().copied()));
        assert!(parse(&["explain", "-i", "g.csv", "-o", "-", "--pair", "a"]).is_err());
        assert!(parse(&["score", "-i", "g.csv", "-o", "-", "--baselines", "katz"]).is_err());
        assert!(parse(&["frobnicate"]).is_err());
    }
}
