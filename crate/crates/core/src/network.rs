//! Scale-free social graphs grown by preferential attachment.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Simple undirected graph over nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { n, edges: BTreeSet::new(), adjacency: vec![Vec::new(); n] }
    }

    /// Build from an edge list; pairs are normalized to `(low, high)`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(invalid(format!("edge ({a}, {b}) references a node outside 0..{n}")));
            }
            if a == b {
                return Err(invalid(format!("self-loop on node {a}")));
            }
            if !g.add_edge(a, b) {
                return Err(invalid(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(g)
    }

    fn add_edge(&mut self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        if !self.edges.insert(key) {
            return false;
        }
        for (x, y) in [(a, b), (b, a)] {
            let adj = &mut self.adjacency[x];
            let pos = adj.binary_search(&y).unwrap_or_else(|p| p);
            adj.insert(pos, y);
        }
        true
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(low, high)` pairs in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Neighbors in ascending id order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    pub fn complete(n: usize) -> Self {
        let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Graph::from_edges(n, pairs).expect("complete graph is simple")
    }

    pub fn path(n: usize) -> Self {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path graph is simple")
    }
}

/// On-disk graph: `{"n", "m", "seed", "edges"}` with sorted pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph, m: usize, seed: u64) -> Self {
        GraphFile { n: g.n(), m, seed, edges: g.edges().map(|(a, b)| [a, b]).collect() }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        Graph::from_edges(self.n, self.edges.iter().map(|e| (e[0], e[1])))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::GraphFile(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::GraphFile(format!("{}: {e}", path.display())))
    }
}

/// Seed size used by [`generate_ba`] for attachment count `m`.
pub fn seed_size(m: usize) -> usize {
    m.max(2)
}

/// Barabási–Albert growth: a path over the first `max(m, 2)` nodes, then each new
/// node links to `m` distinct existing nodes drawn proportionally to degree.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 {
        return Err(invalid("m must be >= 1"));
    }
    let m0 = seed_size(m);
    if n < m0 {
        return Err(invalid(format!("nodes must be >= max(m, 2) = {m0}, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::path(m0);
    g.n = n;
    g.adjacency.resize(n, Vec::new());
    // each node appears once per incident edge end
    let mut ends: Vec<usize> = g.edges().flat_map(|(a, b)| [a, b]).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    for v in m0..n {
        chosen.clear();
        while chosen.len() < m {
            let t = ends[rng.gen_range(0..ends.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            g.add_edge(v, t);
            ends.push(v);
            ends.push(t);
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats<S: Scalar> {
    pub degrees: Vec<usize>,
    pub max: usize,
    pub mean: S,
    /// `(k, fraction of nodes with degree >= k)` for every distinct degree `k`, ascending.
    pub ccdf: Vec<(usize, S)>,
}

pub fn degree_stats<S: Scalar>(g: &Graph) -> DegreeStats<S> {
    let degrees: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let n = S::from_count(degrees.len().max(1));
    let mean = S::from_count(degrees.iter().sum::<usize>()) / n;
    let mut counts = vec![0usize; max + 1];
    for &d in &degrees {
        counts[d] += 1;
    }
    let mut ccdf = Vec::new();
    let mut at_least = degrees.len();
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            ccdf.push((k, S::from_count(at_least) / n));
        }
        at_least -= c;
    }
    DegreeStats { degrees, max, mean, ccdf }
}

/// Minimum number of distinct tail degrees required by [`ccdf_tail_slope`].
pub const MIN_TAIL_POINTS: usize = 10;

/// Least-squares slope of `log ccdf` against `log k` for `k >= k_min`.
pub fn ccdf_tail_slope<S: Scalar>(g: &Graph, k_min: usize) -> Result<S> {
    loglog_slope(&degree_stats::<S>(g).ccdf, k_min)
}

/// Slope fit over arbitrary `(k, ccdf)` points.
pub fn loglog_slope<S: Scalar>(points: &[(usize, S)], k_min: usize) -> Result<S> {
    let tail: Vec<(S, S)> = points
        .iter()
        .filter(|(k, p)| *k >= k_min.max(1) && *p > S::zero())
        .map(|&(k, p)| (S::from_count(k).ln(), p.ln()))
        .collect();
    if tail.len() < MIN_TAIL_POINTS {
        return Err(Error::InsufficientTail { got: tail.len(), need: MIN_TAIL_POINTS });
    }
    let n = S::from_count(tail.len());
    let mx = tail.iter().fold(S::zero(), |a, p| a + p.0) / n;
    let my = tail.iter().fold(S::zero(), |a, p| a + p.1) / n;
    let (sxy, sxx) = tail.iter().fold((S::zero(), S::zero()), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn edge_count_examples() {
        assert_eq!(generate_ba(2, 1, 0).unwrap().edge_count(), 1);
        assert_eq!(generate_ba(10, 2, 0).unwrap().edge_count(), 17);
        let g = generate_ba(5, 1, 3).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(g.is_connected());
    }

    #[test]
    fn too_few_nodes_is_an_error() {
        assert!(generate_ba(1, 1, 0).is_err());
        assert!(generate_ba(2, 3, 0).is_err());
        assert!(generate_ba(3, 3, 0).is_ok());
        assert!(generate_ba(5, 0, 0).is_err());
    }

    #[test]
    fn degree_stats_examples() {
        let s = degree_stats::<f64>(&Graph::path(3));
        assert_eq!(s.degrees, vec![1, 2, 1]);
        assert_eq!(s.max, 2);
        assert_eq!(s.ccdf, vec![(1, 1.0), (2, 1.0 / 3.0)]);
        let s = degree_stats::<f64>(&Graph::complete(4));
        assert_eq!(s.degrees, vec![3; 4]);
        assert_eq!(s.mean, 3.0);
    }

    #[test]
    fn hubs_emerge() {
        let s = degree_stats::<f64>(&generate_ba(2000, 2, 42).unwrap());
        assert!(s.max >= 40, "max degree {}", s.max);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(usize, f64)> = (1..=30).map(|k| (k, (k as f64).powf(-2.0))).collect();
        let slope: f64 = loglog_slope(&pts, 1).unwrap();
        assert!((slope + 2.0).abs() < 1e-9, "{slope}");
    }

    #[test]
    fn degenerate_tail_is_an_error() {
        assert!(matches!(ccdf_tail_slope::<f64>(&Graph::complete(6), 1), Err(Error::InsufficientTail { .. })));
    }

    #[test]
    fn ba_tail_slope_in_band() {
        let slope: f64 = ccdf_tail_slope(&generate_ba(10_000, 2, 1).unwrap(), 4).unwrap();
        assert!((-2.6..=-1.6).contains(&slope), "{slope}");
    }

    #[test]
    fn graph_file_round_trip() {
        let g = generate_ba(12, 2, 9).unwrap();
        let f = GraphFile::from_graph(&g, 2, 9);
        assert!(f.edges.windows(2).all(|w| w[0] < w[1]));
        assert!(f.edges.iter().all(|e| e[0] < e[1]));
        assert_eq!(f.to_graph().unwrap(), g);
    }

    #[test]
    fn from_edges_rejects_non_simple_input() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn early_hub_stays_rich() {
        // node with max degree at n/2 ends in the top decile at n
        let (n, trials) = (400, 40);
        let mut hits = 0;
        for seed in 0..trials {
            let half = generate_ba(n / 2, 2, seed).unwrap();
            let full = generate_ba(n, 2, seed).unwrap();
            let hub = (0..half.n()).max_by_key(|&v| (half.degree(v), std::cmp::Reverse(v))).unwrap();
            let mut degs: Vec<usize> = (0..n).map(|v| full.degree(v)).collect();
            degs.sort_unstable_by(|a, b| b.cmp(a));
            if full.degree(hub) >= degs[n / 10 - 1] {
                hits += 1;
            }
        }
        assert!(hits * 2 > trials, "{hits}/{trials}");
    }

    proptest! {
        #[test]
        fn ba_is_simple_connected_and_counted(n in 2usize..80, m in 1usize..5, seed in any::<u64>()) {
            let m0 = seed_size(m);
            prop_assume!(n >= m0);
            let g = generate_ba(n, m, seed).unwrap();
            prop_assert_eq!(g.edge_count(), (m0 - 1) + (n - m0) * m);
            prop_assert!(g.is_connected());
            prop_assert!(g.edges().all(|(a, b)| a < b && b < n));
            prop_assert_eq!(generate_ba(n, m, seed).unwrap(), g);
        }
    }
}
