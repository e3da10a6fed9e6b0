//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Recognized keys are
//! the scoring parameters `alpha`, `beta`, `gamma`, `eta`, `p_min`, `epsilon`
//! and the task settings `split_ratio`, `neg_ratio`, `top_k`, `seeds`.

use std::path::Path;

use h3_core::sweep::TaskSettings;
use h3_core::H3Params;

use crate::error::{CliError, Result};

/// Values read from a config file or given as flags. Unset fields keep the
/// value from the layer below.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub p_min: Option<f64>,
    pub epsilon: Option<f64>,
    pub split_ratio: Option<f64>,
    pub neg_ratio: Option<usize>,
    pub top_k: Option<usize>,
    pub seeds: Option<Vec<u64>>,
}

impl Overrides {
    /// Fields set in `top` win over fields set in `self`.
    pub fn layered(self, top: Overrides) -> Overrides {
        Overrides {
            alpha: top.alpha.or(self.alpha),
            beta: top.beta.or(self.beta),
            gamma: top.gamma.or(self.gamma),
            eta: top.eta.or(self.eta),
            p_min: top.p_min.or(self.p_min),
            epsilon: top.epsilon.or(self.epsilon),
            split_ratio: top.split_ratio.or(self.split_ratio),
            neg_ratio: top.neg_ratio.or(self.neg_ratio),
            top_k: top.top_k.or(self.top_k),
            seeds: top.seeds.or(self.seeds),
        }
    }

    pub fn params(&self) -> H3Params {
        let d = H3Params::default();
        H3Params {
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            gamma: self.gamma.unwrap_or(d.gamma),
            eta: self.eta.unwrap_or(d.eta),
            p_min: self.p_min.unwrap_or(d.p_min),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
        }
    }

    pub fn task_settings(&self) -> TaskSettings {
        let mut t = TaskSettings::default();
        if let Some(r) = self.split_ratio {
            t.split_ratio = r;
        }
        if let Some(r) = self.neg_ratio {
            t.neg_ratio = r;
        }
        if let Some(k) = self.top_k {
            t.eval.top_k = k;
        }
        t
    }
}

pub fn parse_config(text: &str) -> Result<Overrides> {
    let mut out = Overrides::default();
    for (at, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| CliError::Usage(format!("config line {}: {msg}", at + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let real = || value.parse::<f64>().map_err(|_| bad(format!("{key}: not a number: {value:?}")));
        let count = || value.parse::<usize>().map_err(|_| bad(format!("{key}: not a count: {value:?}")));
        match key {
            "alpha" => out.alpha = Some(real()?),
            "beta" => out.beta = Some(real()?),
            "gamma" => out.gamma = Some(real()?),
            "eta" => out.eta = Some(real()?),
            "p_min" => out.p_min = Some(real()?),
            "epsilon" => out.epsilon = Some(real()?),
            "split_ratio" => out.split_ratio = Some(real()?),
            "neg_ratio" => out.neg_ratio = Some(count()?),
            "top_k" => out.top_k = Some(count()?),
            "seeds" => out.seeds = Some(parse_seeds(value).map_err(bad)?),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text)
}

/// Comma-separated seeds and inclusive ranges, e.g. `1-10` or `1,4,7-9`.
pub fn parse_seeds(text: &str) -> std::result::Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad seed {s:?} in {text:?}"))
        };
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty seed range {part:?}"));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(num(part)?),
        }
    }
    if seeds.is_empty() {
        return Err(format!("no seeds in {text:?}"));
    }
    Ok(seeds)
}
