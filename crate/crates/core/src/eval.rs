//! Evaluation protocol: task construction, negative sampling, and ranking
//! metrics.
//!
//! Two task kinds are supported. A within-period task hides a random share
//! of a snapshot's edges and asks the scorer to recover them from the rest.
//! A cross-period task trains on a short observation window and treats the
//! links that only appear in a longer window as positives. In both cases
//! negatives are sampled uniformly from unconnected pairs within two hops of
//! each other in the training graph.
//!
//! Ties are handled with midranks (or the equivalent expectation over random
//! tie orders) wherever a metric is rank based, so every metric is invariant
//! to permutations of equally scored candidates.

use std::collections::HashSet;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::BaselineMethod;
use crate::error::{Error, Result};
use crate::graph::{
    candidate_pairs_from_counts, two_hop_connector_counts, NodeIndex, NodePair,
    TwoHopConnectorCounts, WeightedGraph,
};
use crate::h3::{H3Params, H3Scorer};

const SPLIT_STREAM: u64 = 1;
const NEGATIVE_STREAM: u64 = 2;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    WithinPeriod,
    CrossPeriod,
}

/// A training graph plus labeled candidate pairs in its index space.
#[derive(Debug, Clone)]
pub struct EvalTask {
    pub train: WeightedGraph,
    pub positives: Vec<NodePair>,
    pub negatives: Vec<NodePair>,
    pub kind: TaskKind,
    pub seed: u64,
    /// Set when the negative pool held fewer pairs than requested.
    pub negatives_truncated: bool,
}

impl EvalTask {
    /// Positives followed by negatives, with labels.
    pub fn labeled_pairs(&self) -> Vec<(NodePair, bool)> {
        self.positives
            .iter()
            .map(|p| (*p, true))
            .chain(self.negatives.iter().map(|p| (*p, false)))
            .collect()
    }
}

/// Randomly partitions the edges of `g`: `ceil(ratio * |E|)` edges stay in
/// the training graph with their weights, the rest become positives.
///
/// The training graph keeps the full node universe and indexing of `g`.
pub fn split_within_period(
    g: &WeightedGraph,
    ratio: f64,
    seed: u64,
) -> Result<(WeightedGraph, Vec<NodePair>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter {
            name: "split_ratio",
            value: ratio,
            reason: "must lie strictly between 0 and 1",
        });
    }
    let edges: Vec<(NodeIndex, NodeIndex, f64)> = g.edges().collect();
    if edges.len() < 2 {
        return Err(Error::TooFewEdges(edges.len()));
    }
    let keep = (ratio * edges.len() as f64).ceil() as usize;
    if keep >= edges.len() {
        return Err(Error::DegenerateTask(format!(
            "split ratio {ratio} keeps all {} edges for training",
            edges.len()
        )));
    }
    let mut in_train = vec![false; edges.len()];
    for at in index::sample(&mut rng(seed, SPLIT_STREAM), edges.len(), keep) {
        in_train[at] = true;
    }
    let mut train_edges = Vec::with_capacity(keep);
    let mut positives = Vec::with_capacity(edges.len() - keep);
    for (e, kept) in edges.iter().zip(&in_train) {
        if *kept {
            train_edges.push(*e);
        } else {
            positives.push(NodePair { u: e.0, v: e.1 });
        }
    }
    Ok((g.with_edges(&train_edges)?, positives))
}

/// Edges of `g_long`, expressed in `g_short` indices, whose endpoints both
/// exist in `g_short`.
pub fn map_edges_into(g_short: &WeightedGraph, g_long: &WeightedGraph) -> Vec<NodePair> {
    let mut out: Vec<NodePair> = g_long
        .edge_pairs()
        .filter_map(|p| {
            let a = g_short.index_of(g_long.node_id(p.u))?;
            let b = g_short.index_of(g_long.node_id(p.v))?;
            Some(NodePair::new(a, b))
        })
        .collect();
    out.sort_unstable();
    out
}

/// Links of the long window that are new relative to the short window,
/// restricted to nodes already present in the short window.
pub fn assemble_cross_period_task(
    g_short: &WeightedGraph,
    g_long: &WeightedGraph,
) -> Result<Vec<NodePair>> {
    let positives: Vec<NodePair> = map_edges_into(g_short, g_long)
        .into_iter()
        .filter(|p| !g_short.has_edge(p.u, p.v))
        .collect();
    if positives.is_empty() {
        return Err(Error::DegenerateTask(
            "the long window adds no links among nodes of the short window".into(),
        ));
    }
    Ok(positives)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeSample {
    /// Sorted sampled pairs.
    pub pairs: Vec<NodePair>,
    pub truncated: bool,
}

/// Draws `ratio * |positives|` negatives uniformly without replacement from
/// unconnected two-hop pairs of `train`, excluding positives and every edge
/// of the evaluation snapshot. Returns the whole pool when it is smaller.
pub fn sample_negatives(
    train: &WeightedGraph,
    counts: &TwoHopConnectorCounts,
    eval_edges: &[NodePair],
    positives: &[NodePair],
    ratio: usize,
    seed: u64,
) -> Result<NegativeSample> {
    if ratio < 1 {
        return Err(Error::InvalidParameter {
            name: "neg_ratio",
            value: ratio as f64,
            reason: "must be at least 1",
        });
    }
    let excluded: HashSet<NodePair> = eval_edges.iter().chain(positives).copied().collect();
    let pool: Vec<NodePair> = candidate_pairs_from_counts(train, counts)?
        .into_iter()
        .filter(|p| !excluded.contains(p))
        .collect();
    if pool.is_empty() {
        return Err(Error::DegenerateTask(
            "no unconnected two-hop pairs remain for negative sampling".into(),
        ));
    }
    let wanted = ratio.saturating_mul(positives.len());
    let take = wanted.min(pool.len());
    let mut pairs: Vec<NodePair> = index::sample(&mut rng(seed, NEGATIVE_STREAM), pool.len(), take)
        .into_iter()
        .map(|at| pool[at])
        .collect();
    pairs.sort_unstable();
    Ok(NegativeSample {
        pairs,
        truncated: take < wanted,
    })
}

/// Within-period task: split, then sample negatives against the full snapshot.
pub fn within_period_task(
    g: &WeightedGraph,
    split_ratio: f64,
    neg_ratio: usize,
    seed: u64,
) -> Result<EvalTask> {
    let (train, positives) = split_within_period(g, split_ratio, seed)?;
    let counts = two_hop_connector_counts(&train);
    // Train edges are never two-hop candidates, so only the held-out half
    // needs excluding.
    let negatives = sample_negatives(&train, &counts, &[], &positives, neg_ratio, seed)?;
    Ok(EvalTask {
        train,
        positives,
        negatives: negatives.pairs,
        kind: TaskKind::WithinPeriod,
        seed,
        negatives_truncated: negatives.truncated,
    })
}

/// Cross-period task: train on the short window unchanged.
pub fn cross_period_task(
    g_short: &WeightedGraph,
    g_long: &WeightedGraph,
    neg_ratio: usize,
    seed: u64,
) -> Result<EvalTask> {
    let positives = assemble_cross_period_task(g_short, g_long)?;
    let eval_edges = map_edges_into(g_short, g_long);
    let counts = two_hop_connector_counts(g_short);
    let negatives = sample_negatives(g_short, &counts, &eval_edges, &positives, neg_ratio, seed)?;
    Ok(EvalTask {
        train: g_short.clone(),
        positives,
        negatives: negatives.pairs,
        kind: TaskKind::CrossPeriod,
        seed,
        negatives_truncated: negatives.truncated,
    })
}

/// A candidate pair with its score and label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub pair: NodePair,
    pub score: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalMetrics {
    pub auroc: f64,
    pub auprc: f64,
    /// Mean rank percentile of positives; lower is better.
    pub mrp: f64,
}

fn class_counts(scored: &[ScoredCandidate]) -> Result<(usize, usize)> {
    let pos = scored.iter().filter(|c| c.positive).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// Runs of equal score over `order`, as `(start, end)` half-open ranges.
fn tie_groups<'a>(
    scored: &'a [ScoredCandidate],
    order: &'a [usize],
) -> impl Iterator<Item = (usize, usize)> + 'a {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= order.len() {
            return None;
        }
        let s = scored[order[start]].score;
        let mut end = start + 1;
        while end < order.len() && scored[order[end]].score == s {
            end += 1;
        }
        let group = (start, end);
        start = end;
        Some(group)
    })
}

/// AUROC via the rank-sum statistic, AUPRC as tie-aware average precision,
/// and the mean rank percentile of positives.
///
/// For a tie group the average precision uses its exact expectation over
/// uniformly random orders of the group.
pub fn compute_global_metrics(scored: &[ScoredCandidate]) -> Result<GlobalMetrics> {
    let (pos, neg) = class_counts(scored)?;
    let total = scored.len();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| scored[b].score.total_cmp(&scored[a].score));

    let mut above = 0usize; // items ranked strictly higher
    let mut pos_above = 0usize;
    let mut rank_sum_desc = 0.0; // sum of descending midranks of positives
    let mut ap_sum = 0.0;
    for (start, end) in tie_groups(scored, &order) {
        let m = end - start;
        let p = order[start..end].iter().filter(|&&i| scored[i].positive).count();
        let midrank = above as f64 + (m as f64 + 1.0) / 2.0;
        rank_sum_desc += p as f64 * midrank;
        if p > 0 {
            if m == 1 {
                ap_sum += (pos_above + 1) as f64 / (above + 1) as f64;
            } else {
                // Position r of the group holds a positive with probability
                // p/m; given that, (r-1)(p-1)/(m-1) other positives precede it.
                let share = p as f64 / m as f64;
                let spread = (p - 1) as f64 / (m - 1) as f64;
                for r in 1..=m {
                    let hits = pos_above as f64 + 1.0 + (r - 1) as f64 * spread;
                    ap_sum += share * hits / (above + r) as f64;
                }
            }
        }
        above += m;
        pos_above += p;
    }

    // Ascending rank of an item is total + 1 - its descending rank.
    let rank_sum_asc = pos as f64 * (total as f64 + 1.0) - rank_sum_desc;
    let u = rank_sum_asc - (pos * (pos + 1)) as f64 / 2.0;
    Ok(GlobalMetrics {
        auroc: u / (pos as f64 * neg as f64),
        auprc: ap_sum / pos as f64,
        mrp: rank_sum_desc / pos as f64 / total as f64,
    })
}

/// Denominator used for source precision at k.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourcePrecision {
    /// Hits in the top k over the source's positive count.
    #[default]
    Recall,
    /// Hits in the top k over `min(k, list length)`.
    Precision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceMetrics {
    pub source_mrr: f64,
    pub ndcg_at_k: f64,
    pub sp_at_k: f64,
    pub sl_at_k: f64,
    pub n_sources: usize,
}

/// Descending-score order with ties broken by pair index.
fn ranking_order(scored: &[ScoredCandidate], items: &mut [usize]) {
    items.sort_by(|&a, &b| {
        scored[b]
            .score
            .total_cmp(&scored[a].score)
            .then(scored[a].pair.cmp(&scored[b].pair))
    });
}

fn ideal_dcg(relevant: usize, k: usize) -> f64 {
    (1..=relevant.min(k)).map(|r| 1.0 / (1.0 + r as f64).log2()).sum()
}

/// Per-source retrieval metrics averaged over sources with at least one
/// positive. Every pair is ranked in the lists of both of its endpoints.
///
/// `baseline_precision` is the precision of a random ranking over the whole
/// candidate set, used as the lift denominator.
pub fn compute_source_metrics(
    scored: &[ScoredCandidate],
    k: usize,
    baseline_precision: f64,
    variant: SourcePrecision,
) -> Result<SourceMetrics> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "top_k",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    if !(baseline_precision > 0.0 && baseline_precision < 1.0) {
        return Err(Error::InvalidParameter {
            name: "baseline_precision",
            value: baseline_precision,
            reason: "must lie strictly between 0 and 1",
        });
    }
    let mut entries: Vec<(NodeIndex, usize)> = Vec::with_capacity(2 * scored.len());
    for (at, c) in scored.iter().enumerate() {
        entries.push((c.pair.u, at));
        entries.push((c.pair.v, at));
    }
    entries.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(scored[b.1].score.total_cmp(&scored[a.1].score))
            .then(scored[a.1].pair.cmp(&scored[b.1].pair))
    });

    let (mut mrr, mut ndcg, mut sp, mut sl) = (0.0, 0.0, 0.0, 0.0);
    let mut sources = 0usize;
    let mut labels = Vec::new();
    for list in entries.chunk_by(|a, b| a.0 == b.0) {
        labels.clear();
        labels.extend(list.iter().map(|(_, at)| scored[*at].positive));
        let Some(m) = source_list_metrics(&labels, k, baseline_precision, variant) else {
            continue;
        };
        sources += 1;
        mrr += m.reciprocal_rank;
        ndcg += m.ndcg_at_k;
        sp += m.sp_at_k;
        sl += m.sl_at_k;
    }
    if sources == 0 {
        return Err(Error::NoSourcesWithPositives);
    }
    let n = sources as f64;
    Ok(SourceMetrics {
        source_mrr: mrr / n,
        ndcg_at_k: ndcg / n,
        sp_at_k: sp / n,
        sl_at_k: sl / n,
        n_sources: sources,
    })
}

/// Metrics of one source's ranked list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceListMetrics {
    pub reciprocal_rank: f64,
    pub ndcg_at_k: f64,
    pub sp_at_k: f64,
    pub sl_at_k: f64,
}

/// Scores one source's candidate list, given its labels in ranked order.
/// Returns `None` when the list has no positive.
pub fn source_list_metrics(
    ranked: &[bool],
    k: usize,
    baseline_precision: f64,
    variant: SourcePrecision,
) -> Option<SourceListMetrics> {
    let positives = ranked.iter().filter(|p| **p).count();
    if positives == 0 {
        return None;
    }
    let cutoff = k.min(ranked.len());
    let mut first_hit = None;
    let mut dcg = 0.0;
    let mut hits = 0usize;
    for (r, _) in ranked.iter().enumerate().filter(|(_, p)| **p) {
        let rank = r + 1;
        first_hit.get_or_insert(rank);
        if rank <= k {
            hits += 1;
            dcg += 1.0 / (1.0 + rank as f64).log2();
        }
    }
    Some(SourceListMetrics {
        reciprocal_rank: 1.0 / first_hit? as f64,
        ndcg_at_k: dcg / ideal_dcg(positives, k),
        sp_at_k: match variant {
            SourcePrecision::Recall => hits as f64 / positives as f64,
            SourcePrecision::Precision => hits as f64 / cutoff as f64,
        },
        sl_at_k: hits as f64 / cutoff as f64 / baseline_precision,
    })
}

/// NDCG at k over the single global ranking of all candidates.
pub fn global_ndcg_at_k(scored: &[ScoredCandidate], k: usize) -> Result<f64> {
    let (pos, _) = class_counts(scored)?;
    let mut order: Vec<usize> = (0..scored.len()).collect();
    ranking_order(scored, &mut order);
    let dcg: f64 = order
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, at)| scored[**at].positive)
        .map(|(r, _)| 1.0 / (2.0 + r as f64).log2())
        .sum();
    Ok(dcg / ideal_dcg(pos, k))
}

/// A scoring method under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    H3(H3Params),
    Baseline(BaselineMethod),
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::H3(_) => "H3".to_owned(),
            Method::Baseline(b) => b.short_name().to_owned(),
        }
    }

    /// Defaults for H3 followed by every baseline.
    pub fn all_default() -> Vec<Method> {
        std::iter::once(Method::H3(H3Params::default()))
            .chain(BaselineMethod::ALL.into_iter().map(Method::Baseline))
            .collect()
    }

    /// Scores `pairs` on `g`, in input order.
    pub fn score_pairs(
        &self,
        g: &WeightedGraph,
        counts: &TwoHopConnectorCounts,
        pairs: &[NodePair],
    ) -> Result<Vec<f64>> {
        match self {
            Method::H3(params) => Ok(H3Scorer::new(g, counts, *params)?
                .score_pairs(pairs)?
                .into_iter()
                .map(|s| s.score)
                .collect()),
            Method::Baseline(b) => b.score_pairs(g, pairs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub top_k: usize,
    pub source_precision: SourcePrecision,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            top_k: 100,
            source_precision: SourcePrecision::Recall,
        }
    }
}

/// One method evaluated on one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub task: TaskKind,
    pub seed: u64,
    pub k: usize,
    pub auroc: f64,
    pub auprc: f64,
    pub mrp: f64,
    pub source_mrr: f64,
    pub ndcg_at_k: f64,
    pub global_ndcg_at_k: f64,
    pub sp_at_k: f64,
    pub sl_at_k: f64,
    pub n_positives: usize,
    pub n_negatives: usize,
    pub n_sources: usize,
    pub negatives_truncated: bool,
}

/// Labels scores produced for `task.labeled_pairs()` order.
pub fn label_scores(task: &EvalTask, scores: &[f64]) -> Vec<ScoredCandidate> {
    task.labeled_pairs()
        .into_iter()
        .zip(scores)
        .map(|((pair, positive), &score)| ScoredCandidate {
            pair,
            score,
            positive,
        })
        .collect()
}

/// All metrics for already scored candidates of `task`.
pub fn metrics_for(
    task: &EvalTask,
    method: &str,
    scored: &[ScoredCandidate],
    options: &EvalOptions,
) -> Result<MetricsReport> {
    let global = compute_global_metrics(scored)?;
    let (pos, neg) = class_counts(scored)?;
    let baseline = pos as f64 / (pos + neg) as f64;
    let source = compute_source_metrics(scored, options.top_k, baseline, options.source_precision)?;
    Ok(MetricsReport {
        method: method.to_owned(),
        task: task.kind,
        seed: task.seed,
        k: options.top_k,
        auroc: global.auroc,
        auprc: global.auprc,
        mrp: global.mrp,
        source_mrr: source.source_mrr,
        ndcg_at_k: source.ndcg_at_k,
        global_ndcg_at_k: global_ndcg_at_k(scored, options.top_k)?,
        sp_at_k: source.sp_at_k,
        sl_at_k: source.sl_at_k,
        n_positives: pos,
        n_negatives: neg,
        n_sources: source.n_sources,
        negatives_truncated: task.negatives_truncated,
    })
}

/// Scores the task's candidates with every method and reports metrics, in
/// method order.
pub fn evaluate(
    task: &EvalTask,
    methods: &[Method],
    options: &EvalOptions,
) -> Result<Vec<MetricsReport>> {
    let counts = two_hop_connector_counts(&task.train);
    let pairs: Vec<NodePair> = task.labeled_pairs().into_iter().map(|(p, _)| p).collect();
    methods
        .iter()
        .map(|m| {
            let scores = m.score_pairs(&task.train, &counts, &pairs)?;
            metrics_for(task, &m.name(), &label_scores(task, &scores), options)
        })
        .collect()
}
