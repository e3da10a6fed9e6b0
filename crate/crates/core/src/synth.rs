//! Seeded synthetic graph generators for tests, benchmarks, and demos.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Pareto, Poisson};
use serde::{Deserialize, Serialize};

use crate::graph::{NodeIndex, WeightedGraph};

fn numbered_ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// Uniform random graph with `round(n * avg_degree / 2)` distinct edges.
///
/// Weights are log-uniform on `[min_weight, max_weight]`; pass equal bounds
/// for a constant weight.
pub fn random_graph(
    n: usize,
    avg_degree: f64,
    min_weight: f64,
    max_weight: f64,
    seed: u64,
) -> WeightedGraph {
    assert!(n >= 2 && min_weight > 0.0 && max_weight >= min_weight);
    let max_edges = n * (n - 1) / 2;
    let m = ((n as f64 * avg_degree / 2.0).round() as usize).min(max_edges);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (min_weight.ln(), max_weight.ln());
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let a = rng.random_range(0..n as NodeIndex);
        let b = rng.random_range(0..n as NodeIndex);
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        let w = if hi > lo {
            rng.random_range(lo..=hi).exp()
        } else {
            min_weight
        };
        edges.push((a, b, w));
    }
    WeightedGraph::from_index_edges(numbered_ids("n", n), &edges)
        .expect("generated edges are valid")
        .0
}

/// Two-class referral-style network generator.
///
/// Nodes are primary-care providers (`p*`) or specialists (`s*`), each with
/// a community label and a heavy-tailed Pareto activity. Cross-class edges
/// link a primary chosen in proportion to activity with a specialist chosen
/// in proportion to activity, from the same community with probability
/// `locality` and from anywhere otherwise. Same-community links carry
/// `1 + Poisson(strong_mean)` shared patients, the rest
/// `1 + Poisson(weak_mean)`. A `specialist_fraction` share of the edges links
/// two specialists drawn across the whole population with weak weights.
/// Repeated draws of a pair accumulate weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferralNetworkConfig {
    pub primaries: usize,
    pub specialists: usize,
    pub communities: usize,
    pub edges: usize,
    pub primary_tail: f64,
    pub specialist_tail: f64,
    pub locality: f64,
    pub strong_mean: f64,
    pub weak_mean: f64,
    pub specialist_fraction: f64,
}

impl Default for ReferralNetworkConfig {
    fn default() -> Self {
        ReferralNetworkConfig {
            primaries: 1500,
            specialists: 500,
            communities: 20,
            edges: 6000,
            primary_tail: 2.5,
            specialist_tail: 1.5,
            locality: 0.7,
            strong_mean: 6.0,
            weak_mean: 0.5,
            specialist_fraction: 0.05,
        }
    }
}

impl ReferralNetworkConfig {
    pub fn generate(&self, seed: u64) -> WeightedGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (np, ns) = (self.primaries, self.specialists);
        let cap = 200.0;
        let primary_activity: Vec<f64> = Pareto::new(1.0, self.primary_tail)
            .expect("valid tail")
            .sample_iter(&mut rng)
            .take(np)
            .map(|a: f64| a.min(cap))
            .collect();
        let specialist_activity: Vec<f64> = Pareto::new(1.0, self.specialist_tail)
            .expect("valid tail")
            .sample_iter(&mut rng)
            .take(ns)
            .map(|a: f64| a.min(cap))
            .collect();
        let primary_community: Vec<usize> =
            (0..np).map(|_| rng.random_range(0..self.communities)).collect();
        let specialist_community: Vec<usize> =
            (0..ns).map(|_| rng.random_range(0..self.communities)).collect();

        let pick_primary = WeightedIndex::new(&primary_activity).expect("positive activity");
        let pick_specialist = WeightedIndex::new(&specialist_activity).expect("positive activity");
        let local: Vec<Option<(Vec<usize>, WeightedIndex<f64>)>> = (0..self.communities)
            .map(|c| {
                let members: Vec<usize> =
                    (0..ns).filter(|&s| specialist_community[s] == c).collect();
                let w: Vec<f64> = members.iter().map(|&s| specialist_activity[s]).collect();
                WeightedIndex::new(&w).ok().map(|idx| (members, idx))
            })
            .collect();
        let strong = Poisson::new(self.strong_mean).expect("positive mean");
        let weak = Poisson::new(self.weak_mean).expect("positive mean");

        let mut edges: Vec<(NodeIndex, NodeIndex, f64)> = Vec::with_capacity(self.edges);
        let specialist = |s: usize| (np + s) as NodeIndex;
        while edges.len() < self.edges {
            if rng.random_bool(self.specialist_fraction) {
                let a = pick_specialist.sample(&mut rng);
                let b = pick_specialist.sample(&mut rng);
                if a != b {
                    let w = 1.0 + weak.sample(&mut rng);
                    edges.push((specialist(a), specialist(b), w));
                }
                continue;
            }
            let p = pick_primary.sample(&mut rng);
            let c = primary_community[p];
            let s = match (&local[c], rng.random_bool(self.locality)) {
                (Some((members, idx)), true) => members[idx.sample(&mut rng)],
                _ => pick_specialist.sample(&mut rng),
            };
            let mean = if specialist_community[s] == c {
                &strong
            } else {
                &weak
            };
            let w = 1.0 + mean.sample(&mut rng);
            edges.push((p as NodeIndex, specialist(s), w));
        }

        let mut ids = numbered_ids("p", np);
        ids.extend(numbered_ids("s", ns));
        WeightedGraph::from_index_edges(ids, &edges)
            .expect("generated edges are valid")
            .0
    }
}
