//! Output record types and their CSV column layouts.

use std::collections::BTreeMap;

use h3_core::sweep::{Regime, SweepRecord};
use h3_core::{MetricsReport, TaskKind};
use serde::{Deserialize, Serialize};

use crate::report::{columns, Cell, Record};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub input: String,
    pub nodes: usize,
    pub edges: usize,
    pub header: Option<String>,
    pub malformed_rows: usize,
    pub self_loops_dropped: usize,
    pub zero_weight_dropped: usize,
    pub duplicates_merged: usize,
    pub average_degree: f64,
    pub total_weight: f64,
    pub fingerprint: String,
}

impl IngestSummary {
    pub fn columns() -> Vec<String> {
        columns(&[
            "input",
            "nodes",
            "edges",
            "header",
            "malformed_rows",
            "self_loops_dropped",
            "zero_weight_dropped",
            "duplicates_merged",
            "average_degree",
            "total_weight",
            "fingerprint",
        ])
    }
}

impl Record for IngestSummary {
    fn cells(&self) -> Vec<Cell> {
        vec![
            self.input.as_str().into(),
            self.nodes.into(),
            self.edges.into(),
            self.header.clone().into(),
            self.malformed_rows.into(),
            self.self_loops_dropped.into(),
            self.zero_weight_dropped.into(),
            self.duplicates_merged.into(),
            self.average_degree.into(),
            self.total_weight.into(),
            self.fingerprint.as_str().into(),
        ]
    }
}

/// A scored candidate pair, in external ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub i: String,
    pub j: String,
    pub score: f64,
    pub forward: f64,
    pub reverse: f64,
    /// Baseline scores keyed by short name.
    #[serde(flatten)]
    pub baselines: BTreeMap<String, f64>,
}

impl ScoreRow {
    /// Baseline columns follow in name order.
    pub fn columns(baselines: &[&str]) -> Vec<String> {
        let mut names: Vec<&str> = baselines.to_vec();
        names.sort_unstable();
        let mut cols = columns(&["i", "j", "score", "forward", "reverse"]);
        cols.extend(names.into_iter().map(str::to_owned));
        cols
    }
}

impl Record for ScoreRow {
    fn cells(&self) -> Vec<Cell> {
        let mut cells = vec![
            self.i.as_str().into(),
            self.j.as_str().into(),
            self.score.into(),
            self.forward.into(),
            self.reverse.into(),
        ];
        cells.extend(self.baselines.values().map(|&v| Cell::Real(v)));
        cells
    }
}

pub fn task_name(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::WithinPeriod => "within_period",
        TaskKind::CrossPeriod => "cross_period",
    }
}

const METRIC_COLUMNS: [&str; 16] = [
    "method",
    "task",
    "seed",
    "k",
    "auroc",
    "auprc",
    "mrp",
    "source_mrr",
    "ndcg_at_k",
    "global_ndcg_at_k",
    "sp_at_k",
    "sl_at_k",
    "n_positives",
    "n_negatives",
    "n_sources",
    "negatives_truncated",
];

fn metric_cells(r: &MetricsReport) -> Vec<Cell> {
    vec![
        r.method.as_str().into(),
        task_name(r.task).into(),
        r.seed.into(),
        r.k.into(),
        r.auroc.into(),
        r.auprc.into(),
        r.mrp.into(),
        r.source_mrr.into(),
        r.ndcg_at_k.into(),
        r.global_ndcg_at_k.into(),
        r.sp_at_k.into(),
        r.sl_at_k.into(),
        r.n_positives.into(),
        r.n_negatives.into(),
        r.n_sources.into(),
        r.negatives_truncated.into(),
    ]
}

pub fn metrics_columns() -> Vec<String> {
    columns(&METRIC_COLUMNS)
}

impl Record for MetricsReport {
    fn cells(&self) -> Vec<Cell> {
        metric_cells(self)
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Low => "low",
        Regime::Mid => "mid",
        Regime::High => "high",
    }
}

pub fn sweep_columns() -> Vec<String> {
    let mut cols = columns(&["network", "group", "config", "regime", "expansion_ratio"]);
    cols.extend(METRIC_COLUMNS.iter().map(|s| s.to_string()));
    cols
}

impl Record for SweepRecord {
    fn cells(&self) -> Vec<Cell> {
        let mut cells = vec![
            self.network.as_str().into(),
            self.group.code().into(),
            self.config.as_str().into(),
            self.regime.map(regime_name).into(),
            self.expansion_ratio.into(),
        ];
        cells.extend(metric_cells(&self.report));
        cells
    }
}

/// One path of an explanation, flattened for CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainRow {
    pub i: String,
    pub j: String,
    /// `forward` for paths `i -> j`, `reverse` for `j -> i`.
    pub direction: String,
    #[serde(flatten)]
    pub path: PathRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub k: String,
    pub l: String,
    pub w_ik: f64,
    pub w_kl: f64,
    pub w_lj: f64,
    pub numerator: f64,
    pub n_k: f64,
    pub n_l: f64,
    pub n_j: f64,
    pub q: u32,
    pub penalty: f64,
    pub contribution: f64,
}

impl ExplainRow {
    pub fn columns() -> Vec<String> {
        columns(&[
            "i",
            "j",
            "direction",
            "k",
            "l",
            "w_ik",
            "w_kl",
            "w_lj",
            "numerator",
            "n_k",
            "n_l",
            "n_j",
            "q",
            "penalty",
            "contribution",
        ])
    }
}

impl Record for ExplainRow {
    fn cells(&self) -> Vec<Cell> {
        let p = &self.path;
        vec![
            self.i.as_str().into(),
            self.j.as_str().into(),
            self.direction.as_str().into(),
            p.k.as_str().into(),
            p.l.as_str().into(),
            p.w_ik.into(),
            p.w_kl.into(),
            p.w_lj.into(),
            p.numerator.into(),
            p.n_k.into(),
            p.n_l.into(),
            p.n_j.into(),
            p.q.into(),
            p.penalty.into(),
            p.contribution.into(),
        ]
    }
}

/// A full explanation of one pair, the JSON-lines form of `explain`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainRecord {
    pub i: String,
    pub j: String,
    pub score: f64,
    pub forward_score: f64,
    pub reverse_score: f64,
    pub forward: Vec<PathRow>,
    pub reverse: Vec<PathRow>,
}
