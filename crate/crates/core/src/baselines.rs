//! Classical structural indices: seven two-hop heuristics and L3.
//!
//! All of them read only the binary adjacency structure; link weights are
//! ignored.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeIndex, NodePair, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaselineMethod {
    /// `|N(i) & N(j)|`
    CommonNeighbors,
    /// `sum 1 / d_k` over common neighbors
    ResourceAllocation,
    /// `d_i * d_j`
    PreferentialAttachment,
    /// `|N(i) & N(j)| / |N(i) | N(j)|`
    Jaccard,
    /// `sum 1 / ln(d_k)` over common neighbors
    AdamicAdar,
    /// `|N(i) & N(j)| / min(d_i, d_j)`
    HubPromoted,
    /// `|N(i) & N(j)| / (d_i * d_j)`
    LeichtHolmeNewman,
    /// `sum_{k in N(i), l in N(j)} A_kl / sqrt(d_k * d_l)`
    L3,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 8] = [
        BaselineMethod::CommonNeighbors,
        BaselineMethod::ResourceAllocation,
        BaselineMethod::PreferentialAttachment,
        BaselineMethod::Jaccard,
        BaselineMethod::AdamicAdar,
        BaselineMethod::HubPromoted,
        BaselineMethod::LeichtHolmeNewman,
        BaselineMethod::L3,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            BaselineMethod::CommonNeighbors => "CN",
            BaselineMethod::ResourceAllocation => "RA",
            BaselineMethod::PreferentialAttachment => "PA",
            BaselineMethod::Jaccard => "Jaccard",
            BaselineMethod::AdamicAdar => "AA",
            BaselineMethod::HubPromoted => "HP",
            BaselineMethod::LeichtHolmeNewman => "LHN",
            BaselineMethod::L3 => "L3",
        }
    }

    /// Scores one pair with whichever rule this method names.
    pub fn score(self, g: &WeightedGraph, i: NodeIndex, j: NodeIndex) -> Result<f64> {
        match self {
            BaselineMethod::L3 => l3_score(g, i, j),
            _ => two_hop_index(g, self, i, j),
        }
    }

    /// Scores a batch of pairs in parallel, in input order.
    pub fn score_pairs(self, g: &WeightedGraph, pairs: &[NodePair]) -> Result<Vec<f64>> {
        pairs
            .par_iter()
            .map(|p| self.score(g, p.u, p.v))
            .collect()
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for BaselineMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        BaselineMethod::ALL
            .into_iter()
            .find(|m| m.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown baseline method {s:?}"))
    }
}

fn check_pair(g: &WeightedGraph, i: NodeIndex, j: NodeIndex) -> Result<()> {
    g.check_node(i)?;
    g.check_node(j)?;
    if i == j {
        return Err(Error::SelfPair(i as usize));
    }
    Ok(())
}

/// Calls `f` for each common neighbor of two sorted neighbor lists.
#[inline]
fn for_each_common(a: &[NodeIndex], b: &[NodeIndex], mut f: impl FnMut(NodeIndex)) {
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                f(a[x]);
                x += 1;
                y += 1;
            }
        }
    }
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Two-hop similarity of `(i, j)` under an unweighted heuristic.
///
/// Rejects [`BaselineMethod::L3`], which is a three-hop index; use
/// [`l3_score`] or [`BaselineMethod::score`].
pub fn two_hop_index(
    g: &WeightedGraph,
    method: BaselineMethod,
    i: NodeIndex,
    j: NodeIndex,
) -> Result<f64> {
    check_pair(g, i, j)?;
    let (ni, nj) = (g.neighbors(i), g.neighbors(j));
    let (di, dj) = (ni.len() as f64, nj.len() as f64);
    let mut common = 0usize;
    let mut ra = 0.0;
    let mut aa = 0.0;
    for_each_common(ni, nj, |k| {
        common += 1;
        let dk = g.degree_unchecked(k);
        ra += 1.0 / dk as f64;
        // A shared neighbor always has degree >= 2, so ln(d_k) > 0.
        if dk > 1 {
            aa += 1.0 / (dk as f64).ln();
        }
    });
    let cn = common as f64;
    Ok(match method {
        BaselineMethod::CommonNeighbors => cn,
        BaselineMethod::ResourceAllocation => ra,
        BaselineMethod::PreferentialAttachment => di * dj,
        BaselineMethod::Jaccard => ratio_or_zero(cn, di + dj - cn),
        BaselineMethod::AdamicAdar => aa,
        BaselineMethod::HubPromoted => ratio_or_zero(cn, di.min(dj)),
        BaselineMethod::LeichtHolmeNewman => ratio_or_zero(cn, di * dj),
        BaselineMethod::L3 => {
            return Err(Error::InvalidParameter {
                name: "method",
                value: f64::NAN,
                reason: "L3 is not a two-hop index",
            })
        }
    })
}

/// Unweighted L3: three-hop paths normalized by the degrees of both
/// intermediates, with no penalty and no target normalization.
pub fn l3_score(g: &WeightedGraph, i: NodeIndex, j: NodeIndex) -> Result<f64> {
    check_pair(g, i, j)?;
    let nj = g.neighbors(j);
    let mut total = 0.0;
    for &k in g.neighbors(i) {
        let dk = g.degree_unchecked(k) as f64;
        for_each_common(g.neighbors(k), nj, |l| {
            total += 1.0 / (dk * g.degree_unchecked(l) as f64).sqrt();
        });
    }
    Ok(total)
}
