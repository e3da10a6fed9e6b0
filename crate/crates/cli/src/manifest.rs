use std::path::PathBuf;

use h3_core::eval::{EvalOptions, SourcePrecision};
use h3_core::sweep::TaskSettings;
use h3_core::{BaselineMethod, H3Params, Method};

use crate::config::Overrides;
use crate::error::{CliError, Result};
use crate::report::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Ingest,
    Score,
    Evaluate,
    Sweep,
    Explain,
}

/// Everything a run needs. Identical manifests produce identical output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    /// Long-window snapshots paired with `inputs`; when present, evaluation
    /// uses the cross-period task.
    pub long_inputs: Vec<PathBuf>,
    /// Config file values with flag overrides already applied.
    pub settings: Overrides,
    pub output: PathBuf,
    pub format: Format,
    pub lenient: bool,
    /// Methods for `evaluate`; H3 entries take the manifest parameters.
    pub methods: Vec<MethodName>,
    /// Extra baseline columns for `score`.
    pub baselines: Vec<BaselineMethod>,
    /// External id pairs for `explain`.
    pub pairs: Vec<(String, String)>,
    pub source_precision: SourcePrecision,
    /// Per-regime sampling fraction of networks for `sweep`.
    pub sample_fraction: Option<f64>,
    pub sample_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodName {
    H3,
    Baseline(BaselineMethod),
}

impl std::str::FromStr for MethodName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("h3") {
            Ok(MethodName::H3)
        } else {
            s.parse().map(MethodName::Baseline)
        }
    }
}

impl MethodName {
    pub fn all() -> Vec<MethodName> {
        std::iter::once(MethodName::H3)
            .chain(BaselineMethod::ALL.into_iter().map(MethodName::Baseline))
            .collect()
    }
}

impl RunManifest {
    pub fn new(command: Command, inputs: Vec<PathBuf>, output: PathBuf) -> Self {
        RunManifest {
            command,
            inputs,
            long_inputs: Vec::new(),
            settings: Overrides::default(),
            output,
            format: Format::Csv,
            lenient: false,
            methods: MethodName::all(),
            baselines: Vec::new(),
            pairs: Vec::new(),
            source_precision: SourcePrecision::Recall,
            sample_fraction: None,
            sample_seed: 0,
        }
    }

    pub fn params(&self) -> H3Params {
        self.settings.params()
    }

    pub fn task_settings(&self) -> TaskSettings {
        let mut t = self.settings.task_settings();
        t.eval = EvalOptions {
            top_k: t.eval.top_k,
            source_precision: self.source_precision,
        };
        t
    }

    pub fn seeds(&self) -> &[u64] {
        self.settings.seeds.as_deref().unwrap_or(&[])
    }

    pub fn methods(&self) -> Vec<Method> {
        let p = self.params();
        self.methods
            .iter()
            .map(|m| match m {
                MethodName::H3 => Method::H3(p),
                MethodName::Baseline(b) => Method::Baseline(*b),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.inputs.is_empty() {
            return usage("no input edge list given".into());
        }
        if self.command != Command::Sweep && self.inputs.len() != 1 {
            return usage(format!("{:?} takes exactly one input", self.command));
        }
        if !self.long_inputs.is_empty() && self.long_inputs.len() != self.inputs.len() {
            return usage("each input needs exactly one long-window input".into());
        }
        for path in self.inputs.iter().chain(&self.long_inputs) {
            if !path.is_file() {
                return usage(format!("input {} does not exist", path.display()));
            }
        }
        match self.command {
            Command::Evaluate | Command::Sweep if self.seeds().is_empty() => {
                return usage("at least one seed is required".into())
            }
            Command::Evaluate if self.methods.is_empty() => {
                return usage("at least one method is required".into())
            }
            Command::Explain if self.pairs.is_empty() => {
                return usage("explain needs at least one --pair".into())
            }
            _ => {}
        }
        if let Some(f) = self.sample_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return usage(format!("sample fraction {f} must lie in (0, 1]"));
            }
        }
        self.params().validate()?;
        let t = self.task_settings();
        if !(t.split_ratio > 0.0 && t.split_ratio < 1.0) {
            return usage(format!("split_ratio {} must lie strictly between 0 and 1", t.split_ratio));
        }
        if t.neg_ratio == 0 || t.eval.top_k == 0 {
            return usage("neg_ratio and top_k must be positive".into());
        }
        Ok(())
    }
}
