//! The H3 weighted three-hop index.
//!
//! The directed score of `i -> j` sums, over every three-hop walk
//! `i -> k -> l -> j`,
//!
//! ```text
//! (w_ik * w_kl * w_lj)^alpha / (n_k * n_l * n_j * p_kj)
//! n_k = max(deg_w(k), 1)^beta      n_l = max(deg_w(l), 1)^beta
//! n_j = max(deg_w(j), 1)^gamma     p_kj = max(ln(1 + q_kj)^eta, p_min)
//! ```
//!
//! where `q_kj` is the number of distinct connectors between `k` and `j`.
//! [`h3_directed_score`] evaluates this sum path by path and is the reference
//! definition. [`H3Scorer`] computes the same quantity for many pairs with
//! sparse products, `S = W~ * ((D_b^-1 W~ D_b^-1 W~ D_g^-1) ./ P)`, where the
//! penalty divides the inner two-hop matrix entrywise so that it stays
//! attached to its intermediate `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeIndex, NodePair, TwoHopConnectorCounts, WeightedGraph};
use crate::rows::{map_row_blocks, SparseRows};

/// Scoring hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H3Params {
    /// Path-weight exponent.
    pub alpha: f64,
    /// Hub suppression exponent on both intermediates.
    pub beta: f64,
    /// Target normalization exponent.
    pub gamma: f64,
    /// Redundancy penalty exponent.
    pub eta: f64,
    /// Penalty floor.
    pub p_min: f64,
    /// Forward weight in the symmetrized score.
    pub epsilon: f64,
}

impl Default for H3Params {
    fn default() -> Self {
        H3Params {
            alpha: 0.3,
            beta: 0.8,
            gamma: 0.2,
            eta: 0.5,
            p_min: 1.0,
            epsilon: 0.8,
        }
    }
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

impl H3Params {
    /// Accepts `alpha` in `[0, 2]` so the path-weight sweep can run.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("p_min", self.p_min),
            ("epsilon", self.epsilon),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(invalid(name, value, "must be finite"));
            }
        }
        if !(0.0..=2.0).contains(&self.alpha) {
            return Err(invalid("alpha", self.alpha, "must lie in [0, 2]"));
        }
        for (name, value) in [("beta", self.beta), ("gamma", self.gamma), ("eta", self.eta)] {
            if value < 0.0 {
                return Err(invalid(name, value, "must be non-negative"));
            }
        }
        if !(self.p_min > 0.0 && self.p_min <= 1.0) {
            return Err(invalid("p_min", self.p_min, "must lie in (0, 1]"));
        }
        check_epsilon(self.epsilon)
    }

    /// Redundancy penalty for a connector count.
    #[inline]
    pub fn penalty(&self, q: u32) -> f64 {
        (q as f64).ln_1p().powf(self.eta).max(self.p_min)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(invalid("epsilon", epsilon, "must lie in [0, 1]"))
    }
}

/// Forward and reverse weights summing to exactly 1.
///
/// The smaller weight is always derived from the larger one, which makes
/// `mixing_weights(1 - e)` the swap of `mixing_weights(e)` in floating point.
#[inline]
fn mixing_weights(epsilon: f64) -> (f64, f64) {
    if epsilon >= 0.5 {
        (epsilon, 1.0 - epsilon)
    } else {
        let reverse = 1.0 - epsilon;
        (1.0 - reverse, reverse)
    }
}

/// Convex combination `epsilon * forward + (1 - epsilon) * reverse`.
pub fn h3_symmetrized_score(forward: f64, reverse: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(mix(forward, reverse, epsilon))
}

#[inline]
fn mix(forward: f64, reverse: f64, epsilon: f64) -> f64 {
    let (a, b) = mixing_weights(epsilon);
    a * forward + b * reverse
}

/// One three-hop walk `i -> k -> l -> j` and every factor of its contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEvidence {
    pub k: NodeIndex,
    pub l: NodeIndex,
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

/// Symmetrized score of an unordered pair with both directed components.
/// `forward` is `i -> j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub i: NodeIndex,
    pub j: NodeIndex,
    pub score: f64,
    pub forward: f64,
    pub reverse: f64,
}

/// Per-node degree normalizers.
struct Normalizers {
    hub: Vec<f64>,
    target: Vec<f64>,
}

impl Normalizers {
    fn new(g: &WeightedGraph, p: &H3Params) -> Self {
        let clamp = |d: &f64| d.max(1.0);
        Normalizers {
            hub: g.weighted_degrees().iter().map(|d| clamp(d).powf(p.beta)).collect(),
            target: g.weighted_degrees().iter().map(|d| clamp(d).powf(p.gamma)).collect(),
        }
    }
}

fn check_inputs(
    g: &WeightedGraph,
    counts: &TwoHopConnectorCounts,
    p: &H3Params,
    i: NodeIndex,
    j: NodeIndex,
) -> Result<()> {
    p.validate()?;
    if !counts.is_built_from(g) {
        return Err(Error::StaleConnectorCounts);
    }
    g.check_node(i)?;
    g.check_node(j)?;
    if i == j {
        return Err(Error::SelfPair(i as usize));
    }
    Ok(())
}

/// Walks every path `i -> k -> l -> j` in ascending `(k, l)` order.
fn visit_paths(
    g: &WeightedGraph,
    counts: &TwoHopConnectorCounts,
    p: &H3Params,
    norms: &Normalizers,
    i: NodeIndex,
    j: NodeIndex,
    mut visit: impl FnMut(PathEvidence),
) {
    let target_nbrs = g.neighbors(j);
    let target_weights = g.neighbor_weights(j);
    let n_j = norms.target[j as usize];
    for (&k, &w_ik) in g.neighbors(i).iter().zip(g.neighbor_weights(i)) {
        let Some(q) = counts.get(k, j) else {
            continue;
        };
        let penalty = p.penalty(q);
        let n_k = norms.hub[k as usize];
        let mid_nbrs = g.neighbors(k);
        let mid_weights = g.neighbor_weights(k);
        let (mut a, mut b) = (0, 0);
        while a < mid_nbrs.len() && b < target_nbrs.len() {
            match mid_nbrs[a].cmp(&target_nbrs[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    let l = mid_nbrs[a];
                    let (w_kl, w_lj) = (mid_weights[a], target_weights[b]);
                    let numerator = (w_ik * w_kl * w_lj).powf(p.alpha);
                    let n_l = norms.hub[l as usize];
                    let contribution = numerator / (n_k * n_l * n_j * penalty);
                    visit(PathEvidence {
                        k,
                        l,
                        w_ik,
                        w_kl,
                        w_lj,
                        numerator,
                        n_k,
                        n_l,
                        n_j,
                        q,
                        penalty,
                        contribution,
                    });
                    a += 1;
                    b += 1;
                }
            }
        }
    }
}

/// Reference directed score `S_{i -> j}`, evaluated path by path.
///
/// Returns 0 when no three-hop walk joins the pair.
pub fn h3_directed_score(
    g: &WeightedGraph,
    counts: &TwoHopConnectorCounts,
    p: &H3Params,
    i: NodeIndex,
    j: NodeIndex,
) -> Result<f64> {
    check_inputs(g, counts, p, i, j)?;
    let norms = Normalizers::new(g, p);
    Ok(directed_sum(g, counts, p, &norms, i, j))
}

fn directed_sum(
    g: &WeightedGraph,
    counts: &TwoHopConnectorCounts,
    p: &H3Params,
    norms: &Normalizers,
    i: NodeIndex,
    j: NodeIndex,
) -> f64 {
    let mut total = 0.0;
    visit_paths(g, counts, p, norms, i, j, |e| total += e.contribution);
    total
}

/// Full path decomposition of a pair in both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairExplanation {
    pub i: NodeIndex,
    pub j: NodeIndex,
    /// Paths `i -> j`, largest contribution first.
    pub forward: Vec<PathEvidence>,
    /// Paths `j -> i`, largest contribution first.
    pub reverse: Vec<PathEvidence>,
    pub forward_score: f64,
    pub reverse_score: f64,
    pub score: f64,
}

fn sort_evidence(paths: &mut [PathEvidence]) {
    paths.sort_by(|a, b| {
        b.contribution
            .total_cmp(&a.contribution)
            .then((a.k, a.l).cmp(&(b.k, b.l)))
    });
}

/// Enumerates every contributing path of `(i, j)` in both directions.
///
/// `forward_score` and `reverse_score` are accumulated in the same order as
/// [`h3_directed_score`] and match it exactly.
pub fn explain_pair(
    g: &WeightedGraph,
    counts: &TwoHopConnectorCounts,
    p: &H3Params,
    i: NodeIndex,
    j: NodeIndex,
) -> Result<PairExplanation> {
    check_inputs(g, counts, p, i, j)?;
    let norms = Normalizers::new(g, p);
    let non_edge = !g.has_edge(i, j);
    let collect = |from: NodeIndex, to: NodeIndex| {
        let mut paths = Vec::new();
        let mut total = 0.0;
        visit_paths(g, counts, p, &norms, from, to, |e| {
            if non_edge {
                // k = to or l = from would need the edge (i, j); k = l a self-loop.
                assert!(
                    e.k != to && e.l != from && e.k != e.l,
                    "path through an endpoint on a non-edge pair"
                );
            }
            total += e.contribution;
            paths.push(e);
        });
        sort_evidence(&mut paths);
        (paths, total)
    };
    let (forward, forward_score) = collect(i, j);
    let (reverse, reverse_score) = collect(j, i);
    Ok(PairExplanation {
        i,
        j,
        forward,
        reverse,
        forward_score,
        reverse_score,
        score: mix(forward_score, reverse_score, p.epsilon),
    })
}

/// Sparse-product evaluator for many pairs over one graph.
///
/// Construction precomputes the element-wise powered weights and the
/// penalized two-hop matrix `M = (D_b^-1 W~ D_b^-1 W~ D_g^-1) ./ P`, stored
/// on the support of the connector counts. Each directed score is then the
/// sparse row product `S_ij = sum_k W~_ik M_kj`.
pub struct H3Scorer<'a> {
    g: &'a WeightedGraph,
    params: H3Params,
    powered: Vec<f64>,
    inner_ptr: &'a [usize],
    inner_cols: &'a [NodeIndex],
    inner: Vec<f64>,
}

impl<'a> H3Scorer<'a> {
    pub fn new(
        g: &'a WeightedGraph,
        counts: &'a TwoHopConnectorCounts,
        params: H3Params,
    ) -> Result<Self> {
        params.validate()?;
        if !counts.is_built_from(g) {
            return Err(Error::StaleConnectorCounts);
        }
        let n = g.node_count();
        let norms = Normalizers::new(g, &params);
        let (row_ptr, _, weights) = g.csr();
        let powered: Vec<f64> = weights.iter().map(|w| w.powf(params.alpha)).collect();

        let max_q = (0..n as NodeIndex)
            .map(|v| g.degree_unchecked(v))
            .max()
            .unwrap_or(0);
        let penalty: Vec<f64> = (0..=max_q as u32).map(|q| params.penalty(q)).collect();

        let powered_ref = &powered;
        let blocks = map_row_blocks(
            n,
            || vec![0.0f64; n],
            |acc, rows| {
                let mut out = SparseRows::default();
                for k in rows {
                    let kk = k as NodeIndex;
                    for (at, &l) in (row_ptr[k]..row_ptr[k + 1]).zip(g.neighbors(kk)) {
                        let scaled = powered_ref[at] / norms.hub[l as usize];
                        let l = l as usize;
                        for (bt, &j) in (row_ptr[l]..row_ptr[l + 1]).zip(g.neighbors(l as NodeIndex)) {
                            acc[j as usize] += scaled * powered_ref[bt];
                        }
                    }
                    let n_k = norms.hub[k];
                    let (targets, qs) = counts.row(kk);
                    out.push_row(targets.iter().zip(qs).map(|(&j, &q)| {
                        let ju = j as usize;
                        let value = acc[ju] / (n_k * norms.target[ju]) / penalty[q as usize];
                        acc[ju] = 0.0;
                        (j, value)
                    }));
                }
                out
            },
        );
        let inner = SparseRows::concat(n, blocks).vals;
        Ok(H3Scorer {
            g,
            params,
            powered,
            inner_ptr: counts.row_ptr(),
            inner_cols: counts.cols(),
            inner,
        })
    }

    pub fn params(&self) -> &H3Params {
        &self.params
    }

    /// Directed scores `S_{u -> v}` for each `v` in `partners[u]`.
    ///
    /// `partners` is CSR-shaped: row `u` spans `partner_cols[partner_ptr[u]..partner_ptr[u + 1]]`.
    fn directed_rows(&self, partner_ptr: &[usize], partner_cols: &[NodeIndex]) -> Vec<f64> {
        let g = self.g;
        let n = g.node_count();
        let (row_ptr, _, _) = g.csr();
        let blocks = map_row_blocks(
            n,
            || vec![0.0f64; n],
            |acc, rows| {
                let mut out = Vec::new();
                for u in rows {
                    let wanted = &partner_cols[partner_ptr[u]..partner_ptr[u + 1]];
                    if wanted.is_empty() {
                        continue;
                    }
                    let first_hop = row_ptr[u]..row_ptr[u + 1];
                    for (at, &k) in first_hop.clone().zip(g.neighbors(u as NodeIndex)) {
                        let w = self.powered[at];
                        let span = self.inner_ptr[k as usize]..self.inner_ptr[k as usize + 1];
                        for (&j, &m) in self.inner_cols[span.clone()].iter().zip(&self.inner[span]) {
                            acc[j as usize] += w * m;
                        }
                    }
                    out.extend(wanted.iter().map(|&v| acc[v as usize]));
                    for &k in g.neighbors(u as NodeIndex) {
                        let span = self.inner_ptr[k as usize]..self.inner_ptr[k as usize + 1];
                        for &j in &self.inner_cols[span] {
                            acc[j as usize] = 0.0;
                        }
                    }
                }
                out
            },
        );
        blocks.concat()
    }

    /// Scores every pair, returned in input order with `i = pair.u`.
    pub fn score_pairs(&self, pairs: &[NodePair]) -> Result<Vec<ScoredPair>> {
        let n = self.g.node_count();
        for pair in pairs {
            self.g.check_node(pair.v)?;
            if pair.u == pair.v {
                return Err(Error::SelfPair(pair.u as usize));
            }
        }
        // Both orientations of every pair, grouped by source.
        let mut degree = vec![0usize; n];
        for pair in pairs {
            degree[pair.u as usize] += 1;
            degree[pair.v as usize] += 1;
        }
        let mut partner_ptr = Vec::with_capacity(n + 1);
        partner_ptr.push(0);
        for d in &degree {
            partner_ptr.push(partner_ptr.last().unwrap() + d);
        }
        let mut cursor = partner_ptr[..n].to_vec();
        let mut partner_cols = vec![0 as NodeIndex; *partner_ptr.last().unwrap()];
        let mut slots = Vec::with_capacity(pairs.len());
        for pair in pairs {
            let mut place = |a: NodeIndex, b: NodeIndex| {
                let at = cursor[a as usize];
                partner_cols[at] = b;
                cursor[a as usize] += 1;
                at
            };
            slots.push((place(pair.u, pair.v), place(pair.v, pair.u)));
        }
        drop(cursor);

        let directed = self.directed_rows(&partner_ptr, &partner_cols);
        Ok(pairs
            .iter()
            .zip(slots)
            .map(|(pair, (fwd, rev))| {
                let (forward, reverse) = (directed[fwd], directed[rev]);
                ScoredPair {
                    i: pair.u,
                    j: pair.v,
                    score: mix(forward, reverse, self.params.epsilon),
                    forward,
                    reverse,
                }
            })
            .collect())
    }
}

/// Scores a candidate set with the sparse pipeline and symmetrizes.
pub fn h3_score_all(
    g: &WeightedGraph,
    counts: &TwoHopConnectorCounts,
    p: &H3Params,
    candidates: &[NodePair],
) -> Result<Vec<ScoredPair>> {
    H3Scorer::new(g, counts, *p)?.score_pairs(candidates)
}
