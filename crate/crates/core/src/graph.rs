//! Immutable undirected weighted graphs in compressed sparse row layout, plus
//! the two-hop structural precomputations shared by every scorer.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rows::{map_row_blocks, SparseRows};

/// Dense internal node index.
pub type NodeIndex = u32;

/// An unordered node pair, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodePair {
    pub u: NodeIndex,
    pub v: NodeIndex,
}

impl NodePair {
    /// Normalizes the endpoint order. Panics if `a == b`.
    pub fn new(a: NodeIndex, b: NodeIndex) -> Self {
        assert_ne!(a, b, "a node pair needs two distinct endpoints");
        if a < b {
            NodePair { u: a, v: b }
        } else {
            NodePair { u: b, v: a }
        }
    }

    /// Fallible constructor for pairs coming from user input.
    pub fn try_new(a: NodeIndex, b: NodeIndex) -> Result<Self> {
        if a == b {
            return Err(Error::SelfPair(a as usize));
        }
        Ok(NodePair::new(a, b))
    }
}

impl fmt::Display for NodePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// What construction silently dropped or merged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub self_loops_dropped: usize,
    pub zero_weight_dropped: usize,
    pub duplicates_merged: usize,
}

/// Undirected weighted graph without self-loops.
///
/// Every undirected edge is stored twice, once per endpoint row, with rows
/// sorted by neighbor index. The binary adjacency view is implicit: an entry
/// exists exactly when its weight is positive.
#[derive(Clone)]
pub struct WeightedGraph {
    node_ids: Vec<String>,
    id_to_index: HashMap<String, NodeIndex>,
    row_ptr: Vec<usize>,
    cols: Vec<NodeIndex>,
    weights: Vec<f64>,
    weighted_degree: Vec<f64>,
    fingerprint: u64,
}

impl fmt::Debug for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedGraph")
            .field("node_count", &self.node_count())
            .field("edge_count", &self.edge_count())
            .finish()
    }
}

impl PartialEq for WeightedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.node_ids == other.node_ids
            && self.row_ptr == other.row_ptr
            && self.cols == other.cols
            && self.weights == other.weights
    }
}

fn check_weight(source: &str, target: &str, weight: f64) -> Result<()> {
    if !weight.is_finite() {
        return Err(Error::NonFiniteWeight {
            source_id: source.to_owned(),
            target_id: target.to_owned(),
        });
    }
    if weight < 0.0 {
        return Err(Error::NegativeWeight {
            source_id: source.to_owned(),
            target_id: target.to_owned(),
            weight,
        });
    }
    Ok(())
}

impl WeightedGraph {
    /// Builds a graph from an edge list over opaque string ids.
    ///
    /// Node ids are interned in lexicographic order, so any permutation of
    /// the same edge list yields an identical graph. Duplicate undirected
    /// edges (in either direction) are merged by summing their weights.
    /// Self-loops and zero-weight edges are dropped, but their endpoints
    /// still become nodes.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S, f64)]) -> Result<(Self, BuildReport)> {
        for (s, t, w) in edges {
            check_weight(s.as_ref(), t.as_ref(), *w)?;
        }
        let ids: BTreeSet<&str> = edges
            .iter()
            .flat_map(|(s, t, _)| [s.as_ref(), t.as_ref()])
            .collect();
        let node_ids: Vec<String> = ids.iter().map(|s| (*s).to_owned()).collect();
        let index: HashMap<&str, NodeIndex> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i as NodeIndex))
            .collect();
        let indexed: Vec<(NodeIndex, NodeIndex, f64)> = edges
            .iter()
            .map(|(s, t, w)| (index[s.as_ref()], index[t.as_ref()], *w))
            .collect();
        Self::from_index_edges(node_ids, &indexed)
    }

    /// Builds a graph over an explicit node universe from index-based edges.
    ///
    /// Node `i` gets id `node_ids[i]`; nodes without edges are kept.
    pub fn from_index_edges(
        node_ids: Vec<String>,
        edges: &[(NodeIndex, NodeIndex, f64)],
    ) -> Result<(Self, BuildReport)> {
        let n = node_ids.len();
        let mut id_to_index = HashMap::with_capacity(n);
        for (i, id) in node_ids.iter().enumerate() {
            if id_to_index.insert(id.clone(), i as NodeIndex).is_some() {
                return Err(Error::DuplicateNodeId(id.clone()));
            }
        }

        let mut report = BuildReport::default();
        let mut kept: Vec<(NodeIndex, NodeIndex, f64)> = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            for x in [a, b] {
                if x as usize >= n {
                    return Err(Error::NodeOutOfRange {
                        index: x as usize,
                        node_count: n,
                    });
                }
            }
            check_weight(&node_ids[a as usize], &node_ids[b as usize], w)?;
            if a == b {
                report.self_loops_dropped += 1;
            } else if w == 0.0 {
                report.zero_weight_dropped += 1;
            } else {
                kept.push((a.min(b), a.max(b), w));
            }
        }
        // Sorting weights too makes duplicate merging order-independent.
        kept.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)).then(x.2.total_cmp(&y.2)));

        let mut merged: Vec<(NodeIndex, NodeIndex, f64)> = Vec::with_capacity(kept.len());
        for (u, v, w) in kept {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => {
                    last.2 += w;
                    report.duplicates_merged += 1;
                }
                _ => merged.push((u, v, w)),
            }
        }

        let mut degree = vec![0usize; n];
        for &(u, v, _) in &merged {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        for d in &degree {
            row_ptr.push(row_ptr.last().unwrap() + d);
        }
        let nnz = *row_ptr.last().unwrap();
        let mut cols = vec![0 as NodeIndex; nnz];
        let mut weights = vec![0.0; nnz];
        let mut cursor: Vec<usize> = row_ptr[..n].to_vec();
        // Edges are sorted by (u, v), so every row is filled in ascending
        // neighbor order: first the lower neighbors, then the higher ones.
        for &(u, v, w) in &merged {
            for (row, col) in [(u, v), (v, u)] {
                let at = cursor[row as usize];
                cols[at] = col;
                weights[at] = w;
                cursor[row as usize] += 1;
            }
        }

        let weighted_degree = (0..n)
            .map(|i| weights[row_ptr[i]..row_ptr[i + 1]].iter().sum())
            .collect();
        let fingerprint = fingerprint(&row_ptr, &cols, &weights);
        Ok((
            WeightedGraph {
                node_ids,
                id_to_index,
                row_ptr,
                cols,
                weights,
                weighted_degree,
                fingerprint,
            },
            report,
        ))
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.cols.len() / 2
    }

    pub fn node_id(&self, v: NodeIndex) -> &str {
        &self.node_ids[v as usize]
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn index_of(&self, id: &str) -> Option<NodeIndex> {
        self.id_to_index.get(id).copied()
    }

    /// Structural hash used to detect precomputations built from another graph.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn check_node(&self, v: NodeIndex) -> Result<()> {
        if (v as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                index: v as usize,
                node_count: self.node_count(),
            })
        }
    }

    /// Sorted neighbor indices of `v`.
    #[inline]
    pub fn neighbors(&self, v: NodeIndex) -> &[NodeIndex] {
        let v = v as usize;
        &self.cols[self.row_ptr[v]..self.row_ptr[v + 1]]
    }

    /// Edge weights aligned with [`neighbors`](Self::neighbors).
    #[inline]
    pub fn neighbor_weights(&self, v: NodeIndex) -> &[f64] {
        let v = v as usize;
        &self.weights[self.row_ptr[v]..self.row_ptr[v + 1]]
    }

    pub fn weight(&self, a: NodeIndex, b: NodeIndex) -> Option<f64> {
        let row = self.neighbors(a);
        row.binary_search(&b)
            .ok()
            .map(|at| self.neighbor_weights(a)[at])
    }

    pub fn has_edge(&self, a: NodeIndex, b: NodeIndex) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Sum of incident weights; 0 for an isolated node.
    pub fn weighted_degree(&self, v: NodeIndex) -> Result<f64> {
        self.check_node(v)?;
        Ok(self.weighted_degree[v as usize])
    }

    /// Number of incident edges.
    pub fn degree(&self, v: NodeIndex) -> Result<usize> {
        self.check_node(v)?;
        Ok(self.degree_unchecked(v))
    }

    #[inline]
    pub(crate) fn degree_unchecked(&self, v: NodeIndex) -> usize {
        self.row_ptr[v as usize + 1] - self.row_ptr[v as usize]
    }

    pub fn weighted_degrees(&self) -> &[f64] {
        &self.weighted_degree
    }

    /// Average unweighted degree `2|E| / n`; 0 for an empty node set.
    pub fn average_degree(&self) -> f64 {
        if self.node_count() == 0 {
            0.0
        } else {
            self.cols.len() as f64 / self.node_count() as f64
        }
    }

    /// Row pointer and column slices of the CSR layout.
    pub(crate) fn csr(&self) -> (&[usize], &[NodeIndex], &[f64]) {
        (&self.row_ptr, &self.cols, &self.weights)
    }

    /// Undirected edges as `(u, v, w)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeIndex, NodeIndex, f64)> + '_ {
        (0..self.node_count() as NodeIndex).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.neighbor_weights(u))
                .filter(move |(v, _)| **v > u)
                .map(move |(v, w)| (u, *v, *w))
        })
    }

    /// Undirected edges as pairs, in ascending order.
    pub fn edge_pairs(&self) -> impl Iterator<Item = NodePair> + '_ {
        self.edges().map(|(u, v, _)| NodePair { u, v })
    }

    /// Same node universe, a subset of edges with their original weights.
    pub fn with_edges(&self, edges: &[(NodeIndex, NodeIndex, f64)]) -> Result<Self> {
        Ok(Self::from_index_edges(self.node_ids.clone(), edges)?.0)
    }
}

fn fingerprint(row_ptr: &[usize], cols: &[NodeIndex], weights: &[f64]) -> u64 {
    // FNV-1a over the structure and the weight bits.
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    feed(row_ptr.len() as u64);
    for &p in row_ptr {
        feed(p as u64);
    }
    for &c in cols {
        feed(c as u64);
    }
    for &w in weights {
        feed(w.to_bits());
    }
    h
}

/// Sparse map `(k, j) -> q`, the number of distinct connectors `l` with
/// `(k, l)` and `(l, j)` both edges; the nonzero part of the squared binary
/// adjacency matrix. Diagonal entries hold `d_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoHopConnectorCounts {
    fingerprint: u64,
    row_ptr: Vec<usize>,
    cols: Vec<NodeIndex>,
    counts: Vec<u32>,
}

impl TwoHopConnectorCounts {
    /// Connector count for `(k, j)`, or `None` when no two-hop walk exists.
    pub fn get(&self, k: NodeIndex, j: NodeIndex) -> Option<u32> {
        let (cols, counts) = self.row(k);
        cols.binary_search(&j).ok().map(|at| counts[at])
    }

    /// Sorted targets of row `k` and their counts.
    #[inline]
    pub fn row(&self, k: NodeIndex) -> (&[NodeIndex], &[u32]) {
        let k = k as usize;
        let span = self.row_ptr[k]..self.row_ptr[k + 1];
        (&self.cols[span.clone()], &self.counts[span])
    }

    /// Number of stored entries, diagonal included.
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn is_built_from(&self, g: &WeightedGraph) -> bool {
        self.fingerprint == g.fingerprint() && self.node_count() == g.node_count()
    }

    pub(crate) fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub(crate) fn cols(&self) -> &[NodeIndex] {
        &self.cols
    }

    /// All entries `(k, j, q)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeIndex, NodeIndex, u32)> + '_ {
        (0..self.node_count() as NodeIndex).flat_map(move |k| {
            let (cols, counts) = self.row(k);
            cols.iter().zip(counts).map(move |(j, q)| (k, *j, *q))
        })
    }
}

/// Computes the sparse square of the binary adjacency matrix, one row at a
/// time with a dense marker array. Rows are processed in parallel blocks and
/// concatenated in order, so the result does not depend on thread count.
pub fn two_hop_connector_counts(g: &WeightedGraph) -> TwoHopConnectorCounts {
    let n = g.node_count();
    let blocks = map_row_blocks(
        n,
        || (vec![u32::MAX; n], vec![0u32; n], Vec::<NodeIndex>::new()),
        |(mark, count, touched), rows| {
            let mut out = SparseRows::default();
            for k in rows {
                let k = k as NodeIndex;
                touched.clear();
                for &l in g.neighbors(k) {
                    for &j in g.neighbors(l) {
                        let ju = j as usize;
                        if mark[ju] != k {
                            mark[ju] = k;
                            count[ju] = 0;
                            touched.push(j);
                        }
                        count[ju] += 1;
                    }
                }
                touched.sort_unstable();
                out.push_row(touched.iter().map(|&j| (j, count[j as usize])));
            }
            out
        },
    );
    let rows = SparseRows::concat(n, blocks);
    TwoHopConnectorCounts {
        fingerprint: g.fingerprint(),
        row_ptr: rows.row_ptr,
        cols: rows.cols,
        counts: rows.vals,
    }
}

/// All unordered non-adjacent pairs sharing at least one neighbor.
pub fn candidate_pairs_within_two_hops(g: &WeightedGraph) -> Vec<NodePair> {
    candidate_pairs_from_counts(g, &two_hop_connector_counts(g))
        .expect("counts built from the same graph")
}

/// Same as [`candidate_pairs_within_two_hops`], reusing precomputed counts.
/// Output is sorted.
pub fn candidate_pairs_from_counts(
    g: &WeightedGraph,
    counts: &TwoHopConnectorCounts,
) -> Result<Vec<NodePair>> {
    if !counts.is_built_from(g) {
        return Err(Error::StaleConnectorCounts);
    }
    let mut out = Vec::new();
    for k in 0..g.node_count() as NodeIndex {
        let (targets, _) = counts.row(k);
        let adjacent = g.neighbors(k);
        let mut a = 0;
        for &j in targets.iter().filter(|&&j| j > k) {
            while a < adjacent.len() && adjacent[a] < j {
                a += 1;
            }
            if a < adjacent.len() && adjacent[a] == j {
                continue;
            }
            out.push(NodePair { u: k, v: j });
        }
    }
    Ok(out)
}
