//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the library's scoring or metric code.

#![allow(dead_code)]

use h3_core::{H3Params, WeightedGraph};

/// Dense symmetric weight matrix rebuilt from the graph's edge list.
pub struct Dense {
    pub n: usize,
    pub w: Vec<Vec<f64>>,
    strength: Vec<f64>,
    q: Vec<Vec<u32>>,
}

impl Dense {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let n = g.node_count();
        let mut w = vec![vec![0.0; n]; n];
        for (u, v, x) in g.edges() {
            w[u as usize][v as usize] += x;
            w[v as usize][u as usize] += x;
        }
        let strength = w.iter().map(|row| row.iter().sum()).collect();
        let mut q = vec![vec![0u32; n]; n];
        for (k, row) in q.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..n).filter(|&l| w[k][l] > 0.0 && w[l][j] > 0.0).count() as u32;
            }
        }
        Dense { n, w, strength, q }
    }

    pub fn adj(&self, a: usize, b: usize) -> bool {
        self.w[a][b] > 0.0
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&x| self.adj(v, x)).count()
    }

    pub fn strength(&self, v: usize) -> f64 {
        self.strength[v]
    }

    /// `[A^2]_{kj}`, counted by enumerating every candidate connector.
    pub fn connectors(&self, k: usize, j: usize) -> u32 {
        self.q[k][j]
    }

    /// Directed H3 score by looping over every `(k, l)`.
    pub fn h3(&self, p: &H3Params, i: usize, j: usize) -> f64 {
        self.walk(p, i, j, true)
    }

    /// The same sum with no redundancy penalty at all.
    pub fn h3_unpenalized(&self, p: &H3Params, i: usize, j: usize) -> f64 {
        self.walk(p, i, j, false)
    }

    fn walk(&self, p: &H3Params, i: usize, j: usize, penalize: bool) -> f64 {
        let norm = |v: usize, e: f64| self.strength(v).max(1.0).powf(e);
        let mut total = 0.0;
        for k in 0..self.n {
            if !self.adj(i, k) {
                continue;
            }
            let q = self.connectors(k, j) as f64;
            let penalty = if penalize { q.ln_1p().powf(p.eta).max(p.p_min) } else { 1.0 };
            for l in 0..self.n {
                if !(self.adj(k, l) && self.adj(l, j)) {
                    continue;
                }
                let num = (self.w[i][k] * self.w[k][l] * self.w[l][j]).powf(p.alpha);
                total += num / (norm(k, p.beta) * norm(l, p.beta) * norm(j, p.gamma) * penalty);
            }
        }
        total
    }

    pub fn h3_symmetric(&self, p: &H3Params, i: usize, j: usize) -> f64 {
        p.epsilon * self.h3(p, i, j) + (1.0 - p.epsilon) * self.h3(p, j, i)
    }

    pub fn l3(&self, i: usize, j: usize) -> f64 {
        let mut total = 0.0;
        for k in 0..self.n {
            for l in 0..self.n {
                if self.adj(i, k) && self.adj(k, l) && self.adj(l, j) {
                    total += 1.0 / ((self.degree(k) * self.degree(l)) as f64).sqrt();
                }
            }
        }
        total
    }

    /// Unconnected pairs `i < j` with at least one common neighbor.
    pub fn two_hop_non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.adj(i, j) && self.connectors(i, j) > 0 {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Fraction of positive/negative pairs ordered correctly, ties counting half.
pub fn pairwise_auroc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut total) = (0.0, 0.0);
    for (a, &pa) in scores.iter().zip(labels) {
        if !pa {
            continue;
        }
        for (b, &pb) in scores.iter().zip(labels) {
            if pb {
                continue;
            }
            total += 1.0;
            if a > b {
                wins += 1.0;
            } else if a == b {
                wins += 0.5;
            }
        }
    }
    wins / total
}

/// Average precision for a ranking given as labels in rank order.
pub fn average_precision(ranked: &[bool]) -> f64 {
    let (mut hits, mut sum) = (0.0, 0.0);
    for (r, &pos) in ranked.iter().enumerate() {
        if pos {
            hits += 1.0;
            sum += hits / (r + 1) as f64;
        }
    }
    sum / hits
}

fn permutations(items: &mut Vec<usize>, at: usize, out: &mut Vec<Vec<usize>>) {
    if at == items.len() {
        out.push(items.clone());
        return;
    }
    for x in at..items.len() {
        items.swap(at, x);
        permutations(items, at + 1, out);
        items.swap(at, x);
    }
}

/// AP averaged over every ordering consistent with descending scores.
pub fn expected_ap_by_enumeration(scores: &[f64], labels: &[bool]) -> f64 {
    let mut all = Vec::new();
    permutations(&mut (0..scores.len()).collect(), 0, &mut all);
    let (mut sum, mut count) = (0.0, 0.0);
    for order in all {
        if order.windows(2).all(|w| scores[w[0]] >= scores[w[1]]) {
            let ranked: Vec<bool> = order.iter().map(|&x| labels[x]).collect();
            sum += average_precision(&ranked);
            count += 1.0;
        }
    }
    sum / count
}
