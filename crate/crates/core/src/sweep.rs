//! Experiment orchestration: the sensitivity grid, connectivity regimes, the
//! link expansion ratio, and a runner over networks, configs, and seeds.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{
    cross_period_task, label_scores, metrics_for, within_period_task, EvalOptions, EvalTask,
    Method, MetricsReport,
};
use crate::graph::{two_hop_connector_counts, NodePair, WeightedGraph};
use crate::h3::H3Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SweepGroup {
    DegreeNormalization,
    PathWeight,
    Directionality,
    Penalty,
}

impl SweepGroup {
    pub fn code(self) -> &'static str {
        match self {
            SweepGroup::DegreeNormalization => "G1",
            SweepGroup::PathWeight => "G2",
            SweepGroup::Directionality => "G3",
            SweepGroup::Penalty => "G4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub group: SweepGroup,
    pub label: String,
    pub params: H3Params,
}

/// The 17 sensitivity configurations. Each changes the defaults along one
/// group's dimension only; single-valued degree-normalization entries set
/// `beta = gamma`.
pub fn sensitivity_grid() -> Vec<SweepConfig> {
    let base = H3Params::default();
    let mut grid = Vec::with_capacity(17);
    let mut push = |group, label: &str, params| {
        grid.push(SweepConfig {
            group,
            label: label.to_owned(),
            params,
        })
    };
    for (label, beta, gamma) in [
        ("No Norm", 0.0, 0.0),
        ("Weak", 0.2, 0.2),
        ("Sqrt", 0.5, 0.5),
        ("Default", 0.8, 0.2),
        ("Strong", 1.0, 1.0),
    ] {
        push(
            SweepGroup::DegreeNormalization,
            label,
            H3Params { beta, gamma, ..base },
        );
    }
    for (label, alpha) in [
        ("Unweighted", 0.0),
        ("Dampened", 0.3),
        ("Linear", 1.0),
        ("Amplified", 2.0),
    ] {
        push(SweepGroup::PathWeight, label, H3Params { alpha, ..base });
    }
    for (label, epsilon) in [
        ("Pure Reverse", 0.0),
        ("Reverse-biased", 0.2),
        ("Balanced", 0.5),
        ("Forward-biased", 0.8),
        ("Pure Forward", 1.0),
    ] {
        push(SweepGroup::Directionality, label, H3Params { epsilon, ..base });
    }
    for (label, eta) in [("Off", 0.0), ("Default", 0.5), ("Strong", 1.0)] {
        push(SweepGroup::Penalty, label, H3Params { eta, ..base });
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    Low,
    Mid,
    High,
}

/// Tertile membership plus the cut points shared by every network of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub regime: Regime,
    /// Midpoint between the highest Low value and the lowest Mid value.
    pub boundary_low: f64,
    /// Midpoint between the highest Mid value and the lowest High value.
    pub boundary_high: f64,
}

/// Group sizes for `n` items split into tertiles; remainders go to the lower
/// groups first.
pub fn tertile_sizes(n: usize) -> [usize; 3] {
    let (base, rem) = (n / 3, n % 3);
    [base + (rem > 0) as usize, base + (rem > 1) as usize, base]
}

fn stratify(mut values: Vec<(String, f64)>) -> Result<BTreeMap<String, RegimeLabel>> {
    if values.len() < 3 {
        return Err(Error::TooFewNetworks(values.len()));
    }
    values.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let [low, mid, _] = tertile_sizes(values.len());
    let boundary_low = (values[low - 1].1 + values[low].1) / 2.0;
    let boundary_high = (values[low + mid - 1].1 + values[low + mid].1) / 2.0;
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(rank, (name, _))| {
            let regime = if rank < low {
                Regime::Low
            } else if rank < low + mid {
                Regime::Mid
            } else {
                Regime::High
            };
            (
                name,
                RegimeLabel {
                    regime,
                    boundary_low,
                    boundary_high,
                },
            )
        })
        .collect())
}

/// Tertiles of average unweighted degree `2|E| / n`. Equal averages are
/// ordered by name.
pub fn stratify_by_average_degree(
    networks: &[(&str, &WeightedGraph)],
) -> Result<BTreeMap<String, RegimeLabel>> {
    stratify(
        networks
            .iter()
            .map(|(name, g)| (name.to_string(), g.average_degree()))
            .collect(),
    )
}

/// Tertiles of node count, used to pick a size-stratified subset of networks.
pub fn stratify_by_node_count(
    networks: &[(&str, &WeightedGraph)],
) -> Result<BTreeMap<String, RegimeLabel>> {
    stratify(
        networks
            .iter()
            .map(|(name, g)| (name.to_string(), g.node_count() as f64))
            .collect(),
    )
}

/// Picks `ceil(fraction * size)` names (at least one) from each regime,
/// uniformly at random. Output is sorted.
pub fn stratified_subsample(
    labels: &BTreeMap<String, RegimeLabel>,
    fraction: f64,
    seed: u64,
) -> Result<Vec<String>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "sample_fraction",
            value: fraction,
            reason: "must lie in (0, 1]",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::new();
    for regime in [Regime::Low, Regime::Mid, Regime::High] {
        let members: Vec<&String> = labels
            .iter()
            .filter(|(_, l)| l.regime == regime)
            .map(|(name, _)| name)
            .collect();
        if members.is_empty() {
            continue;
        }
        let take = ((fraction * members.len() as f64).ceil() as usize).clamp(1, members.len());
        picked.extend(
            index::sample(&mut rng, members.len(), take)
                .into_iter()
                .map(|at| members[at].clone()),
        );
    }
    picked.sort();
    Ok(picked)
}

/// `|E_long| / |E_short|`.
pub fn expansion_ratio(g_short: &WeightedGraph, g_long: &WeightedGraph) -> Result<f64> {
    if g_short.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(g_long.edge_count() as f64 / g_short.edge_count() as f64)
}

/// Quartile (1 to 4) of each ratio within its batch, from midranks.
pub fn expansion_quartiles(ratios: &[f64]) -> Vec<u8> {
    let n = ratios.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ratios[a].total_cmp(&ratios[b]));
    let mut quartile = vec![0u8; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && ratios[order[end]] == ratios[order[start]] {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        let q = (((midrank - 0.5) / n as f64 * 4.0).floor() as u8 + 1).min(4);
        for &at in &order[start..end] {
            quartile[at] = q;
        }
        start = end;
    }
    quartile
}

/// A network entering a sweep. With `long` set, runs use the cross-period
/// task; otherwise the within-period task.
#[derive(Debug, Clone)]
pub struct SweepNetwork {
    pub name: String,
    pub graph: WeightedGraph,
    pub long: Option<WeightedGraph>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSettings {
    pub split_ratio: f64,
    pub neg_ratio: usize,
    pub eval: EvalOptions,
}

impl Default for TaskSettings {
    fn default() -> Self {
        TaskSettings {
            split_ratio: 0.5,
            neg_ratio: 20,
            eval: EvalOptions::default(),
        }
    }
}

/// One (network, config, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub network: String,
    pub group: SweepGroup,
    pub config: String,
    pub regime: Option<Regime>,
    pub expansion_ratio: Option<f64>,
    pub report: MetricsReport,
}

/// Builds the evaluation task for a network and seed.
pub fn build_task(network: &SweepNetwork, settings: &TaskSettings, seed: u64) -> Result<EvalTask> {
    match &network.long {
        Some(long) => cross_period_task(&network.graph, long, settings.neg_ratio, seed),
        None => within_period_task(&network.graph, settings.split_ratio, settings.neg_ratio, seed),
    }
}

/// Runs every config on every (network, seed) task.
///
/// Tasks are independent and run in parallel; records come back sorted by
/// network, config position in `configs`, then seed.
pub fn run_sweep(
    networks: &[SweepNetwork],
    configs: &[SweepConfig],
    seeds: &[u64],
    settings: &TaskSettings,
) -> Result<Vec<SweepRecord>> {
    let regimes = if networks.len() >= 3 {
        let named: Vec<(&str, &WeightedGraph)> =
            networks.iter().map(|n| (n.name.as_str(), &n.graph)).collect();
        Some(stratify_by_average_degree(&named)?)
    } else {
        None
    };
    let jobs: Vec<(usize, u64)> = (0..networks.len())
        .flat_map(|n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    let per_job: Vec<Vec<(usize, SweepRecord)>> = jobs
        .par_iter()
        .map(|&(at, seed)| {
            let network = &networks[at];
            let task = build_task(network, settings, seed)?;
            let counts = two_hop_connector_counts(&task.train);
            let pairs: Vec<NodePair> = task.labeled_pairs().into_iter().map(|(p, _)| p).collect();
            let ratio = match &network.long {
                Some(long) => Some(expansion_ratio(&network.graph, long)?),
                None => None,
            };
            configs
                .iter()
                .enumerate()
                .map(|(c, config)| {
                    let scores = Method::H3(config.params).score_pairs(&task.train, &counts, &pairs)?;
                    let report =
                        metrics_for(&task, "H3", &label_scores(&task, &scores), &settings.eval)?;
                    Ok((
                        c,
                        SweepRecord {
                            network: network.name.clone(),
                            group: config.group,
                            config: config.label.clone(),
                            regime: regimes.as_ref().map(|r| r[&network.name].regime),
                            expansion_ratio: ratio,
                            report,
                        },
                    ))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<(usize, SweepRecord)> = per_job.into_iter().flatten().collect();
    records.sort_by(|(ca, a), (cb, b)| {
        a.network
            .cmp(&b.network)
            .then(ca.cmp(cb))
            .then(a.report.seed.cmp(&b.report.seed))
    });
    Ok(records.into_iter().map(|(_, r)| r).collect())
}
