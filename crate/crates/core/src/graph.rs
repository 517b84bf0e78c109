//! Planted Erdős–Rényi model, compressed adjacency storage, and cut metrics.
//!
//! Node ids follow a fixed convention: the planted community is `0..m` and
//! the seed set is `0..k`. The sampler draws every pair inside the community
//! with probability `q` and every other pair with probability `p`.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Parameters of a planted Erdős–Rényi graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedGraphConfig {
    /// Number of nodes.
    pub n: usize,
    /// Community size; the community is nodes `0..m`.
    pub m: usize,
    /// Seed count; the seeds are nodes `0..k`.
    pub k: usize,
    /// Background edge probability.
    pub p: f64,
    /// Edge probability inside the community.
    pub q: f64,
    /// RNG seed.
    pub seed: u64,
}

impl PlantedGraphConfig {
    pub fn new(n: usize, m: usize, k: usize, p: f64, q: f64, seed: u64) -> Result<Self> {
        let config = Self {
            n,
            m,
            k,
            p,
            q,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// The moderately sparse setting `p = 5 ln²(n) / n`, `q = 2p`.
    ///
    /// The logarithm is natural. With `n = 10⁴` the background degree is
    /// about 424.
    pub fn log_squared(n: usize, m: usize, k: usize, seed: u64) -> Result<Self> {
        let p = log_squared_p(n);
        Self::new(n, m, k, p, 2.0 * p, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.k && self.k <= self.m && self.m <= self.n) {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= k <= m <= n, got k={} m={} n={}",
                self.k, self.m, self.n
            )));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!(
                "n = {} does not fit in u32",
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.q) || self.p > self.q {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= p <= q <= 1, got p={} q={}",
                self.p, self.q
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn community(&self) -> NodeSet {
        NodeSet::range(0, self.m)
    }

    pub fn seed_set(&self) -> NodeSet {
        NodeSet::range(0, self.k)
    }

    /// Expected degree of a community node, `(m-1)q + (n-m)p`.
    pub fn expected_degree_inside(&self) -> f64 {
        (self.m as f64 - 1.0) * self.q + (self.n - self.m) as f64 * self.p
    }

    /// Expected degree of a node outside the community, `(n-1)p`.
    pub fn expected_degree_outside(&self) -> f64 {
        (self.n as f64 - 1.0) * self.p
    }

    /// Expected number of edges.
    pub fn expected_edges(&self) -> f64 {
        let pairs = |x: usize| (x as f64) * (x as f64 - 1.0) / 2.0;
        pairs(self.m) * self.q + (pairs(self.n) - pairs(self.m)) * self.p
    }
}

/// `5 ln²(n) / n`.
pub fn log_squared_p(n: usize) -> f64 {
    let ln = (n as f64).ln();
    5.0 * ln * ln / n as f64
}

/// A sorted set of distinct node ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NodeSet {
    ids: Vec<u32>,
}

impl NodeSet {
    /// Builds a set from arbitrary ids; sorts and rejects duplicates or ids `>= n`.
    pub fn new(mut ids: Vec<u32>, n: usize) -> Result<Self> {
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate node id in set".into()));
        }
        if let Some(&last) = ids.last() {
            if last as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "node {last} out of range for n={n}"
                )));
            }
        }
        Ok(Self { ids })
    }

    /// `lo..hi`.
    pub fn range(lo: usize, hi: usize) -> Self {
        Self {
            ids: (lo as u32..hi as u32).collect(),
        }
    }

    pub(crate) fn from_sorted(ids: Vec<u32>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Self { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.ids.iter().copied()
    }

    pub fn complement(&self, n: usize) -> Self {
        let mut out = Vec::with_capacity(n.saturating_sub(self.len()));
        let mut it = self.ids.iter().peekable();
        for v in 0..n as u32 {
            if it.peek() == Some(&&v) {
                it.next();
            } else {
                out.push(v);
            }
        }
        Self { ids: out }
    }

    /// Size of the intersection with `other`.
    pub fn intersection_len(&self, other: &NodeSet) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    fn membership(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.ids {
            mask[v as usize] = true;
        }
        mask
    }
}

/// Immutable undirected simple graph in compressed sparse row layout.
///
/// Every edge is stored in both endpoint lists. Neighbor lists are strictly
/// increasing and contain no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    degrees: Vec<u32>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are merged; self-loops and out-of-range ids are rejected.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at node {a}")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for n={n}"
                )));
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        canonical.dedup();
        Ok(Self::from_sorted_upper(n, &canonical))
    }

    /// `edges` must be lexicographically sorted with `i < j` and no duplicates.
    fn from_sorted_upper(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut degrees = vec![0u32; n];
        for &(i, j) in edges {
            degrees[i as usize] += 1;
            degrees[j as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0usize);
        for &d in &degrees {
            offsets.push(offsets.last().unwrap() + d as usize);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0u32; offsets[n]];
        // Rows are visited in increasing order, so each list fills sorted:
        // lower neighbors arrive as earlier rows, then the row's own upper ones.
        for &(i, j) in edges {
            targets[cursor[i as usize]] = j;
            cursor[i as usize] += 1;
            targets[cursor[j as usize]] = i;
            cursor[j as usize] += 1;
        }
        Self {
            offsets,
            targets,
            degrees,
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|i| (i + 1..n as u32).map(move |j| (i, j)))
            .collect();
        Self::from_sorted_upper(n, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.degrees[v as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn total_volume(&self) -> u64 {
        self.targets.len() as u64
    }

    /// Each undirected edge once, as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count() as u32).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Exhaustive structural check: sorted lists, no loops, symmetry, degrees.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.node_count();
        for v in 0..n as u32 {
            let adj = self.neighbors(v);
            if adj.len() != self.degree(v) as usize {
                return Err(Error::InvalidArgument(format!("degree mismatch at {v}")));
            }
            if adj.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "neighbor list of {v} not strictly increasing"
                )));
            }
            for &u in adj {
                if u == v {
                    return Err(Error::InvalidArgument(format!("self-loop at {v}")));
                }
                if u as usize >= n || !self.has_edge(u, v) {
                    return Err(Error::InvalidArgument(format!(
                        "asymmetric edge {v} -> {u}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes `# n=<n>` followed by one `i j` line per edge with `i < j`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# n={}", self.node_count())?;
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))??;
        let n: usize = header
            .trim()
            .strip_prefix("# n=")
            .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad node count: {e}")))?;
        let mut edges = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_ascii_whitespace();
            let mut next = || -> Result<u32> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {}: expected two ids", lineno + 2)))?
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            };
            let (i, j) = (next()?, next()?);
            if i >= j {
                return Err(Error::Parse(format!("line {}: need i < j", lineno + 2)));
            }
            edges.push((i, j));
        }
        Self::from_edges(n, &edges)
    }
}

/// Samples a planted Erdős–Rényi graph.
///
/// Row `i` draws its upper neighbors `j > i` by geometric skipping: the gap
/// to the next present pair in a segment of constant probability `r` is
/// `floor(ln U / ln(1-r))`. Community rows use two segments (`i < j < m` at
/// rate `q`, `j >= m` at rate `p`). Expected work is linear in the number of
/// edges plus `n`.
pub fn sample_planted_er(config: &PlantedGraphConfig) -> Result<Graph> {
    config.validate()?;
    let n = config.n;
    let m = config.m;
    let mut rng = rng_from_seed(config.seed);
    let mut edges = Vec::with_capacity(config.expected_edges().ceil() as usize + 16);
    for i in 0..n {
        if i < m {
            sample_segment(&mut rng, i as u32, i + 1, m, config.q, &mut edges);
            sample_segment(&mut rng, i as u32, m, n, config.p, &mut edges);
        } else {
            sample_segment(&mut rng, i as u32, i + 1, n, config.p, &mut edges);
        }
    }
    Ok(Graph::from_sorted_upper(n, &edges))
}

fn sample_segment<R: Rng>(
    rng: &mut R,
    row: u32,
    lo: usize,
    hi: usize,
    prob: f64,
    out: &mut Vec<(u32, u32)>,
) {
    if lo >= hi || prob <= 0.0 {
        return;
    }
    if prob >= 1.0 {
        out.extend((lo..hi).map(|j| (row, j as u32)));
        return;
    }
    let log_miss = (-prob).ln_1p();
    let mut j = lo;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_miss).floor();
        if skip >= (hi - j) as f64 {
            break;
        }
        j += skip as usize;
        out.push((row, j as u32));
        j += 1;
        if j >= hi {
            break;
        }
    }
}

/// Sum of degrees over `set`.
pub fn volume(graph: &Graph, set: &NodeSet) -> u64 {
    set.iter().map(|v| graph.degree(v) as u64).sum()
}

/// Number of edges with exactly one endpoint in `set`.
pub fn cut_size(graph: &Graph, set: &NodeSet) -> u64 {
    let inside = set.membership(graph.node_count());
    set.iter()
        .map(|v| {
            graph
                .neighbors(v)
                .iter()
                .filter(|&&u| !inside[u as usize])
                .count() as u64
        })
        .sum()
}

/// `cut(S) / min(vol(S), vol(V \ S))`.
pub fn conductance(graph: &Graph, set: &NodeSet) -> Result<f64> {
    let vol = volume(graph, set);
    let rest = graph.total_volume() - vol;
    if vol == 0 || rest == 0 {
        return Err(Error::ZeroVolume);
    }
    Ok(cut_size(graph, set) as f64 / vol.min(rest) as f64)
}
