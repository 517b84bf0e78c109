//! Approximate Personalized PageRank by local push, the sweep cut, and the
//! push-then-sweep clustering pipeline.
//!
//! The push keeps an approximation `p` and a residual `r`, starting from
//! `p = 0`, `r = ν`. While some node has `r(u) >= ε d(u)` it moves
//! `(1-α) r(u)` into `p(u)` and spreads the rest over the neighbors. At
//! termination every residual is below `ε d(u)`, and on an undirected graph
//! the exact scores satisfy `0 <= π(v) - p(v) <= ε d(v)`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::{conductance, Graph, NodeSet, PlantedGraphConfig};
use crate::ppr::{classification_error, RestartVector};
use crate::{Error, Result};

/// Default cap on push operations.
pub const DEFAULT_PUSH_BUDGET: u64 = 1_000_000_000;

/// Damping factor and push threshold from a target conductance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AclParameters {
    pub alpha: f64,
    pub eps: f64,
    /// `ceil(log2 |E|)`.
    pub levels: u32,
}

/// `α = 1 - φ² / (225 ln(100 √|E|))`, `ε = 2^-b / (48 B)` with `B = ceil(log2 |E|)`.
pub fn acl_parameters(target_phi: f64, edge_count: usize, b: u32) -> Result<AclParameters> {
    if !(target_phi > 0.0 && target_phi <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "target conductance {target_phi} not in (0, 1]"
        )));
    }
    if edge_count < 2 {
        return Err(Error::OutOfRange(format!(
            "edge count {edge_count} must be at least 2"
        )));
    }
    let levels = (edge_count - 1).ilog2() + 1;
    if b < 1 || b > levels {
        return Err(Error::OutOfRange(format!("b = {b} not in [1, {levels}]")));
    }
    let alpha = 1.0 - target_phi * target_phi / (225.0 * (100.0 * (edge_count as f64).sqrt()).ln());
    let eps = (-(b as f64)).exp2() / (48.0 * levels as f64);
    Ok(AclParameters { alpha, eps, levels })
}

/// Node-keyed values stored sparsely until the support passes `n / 4`.
#[derive(Debug, Clone)]
pub enum SparseScores {
    Sparse { n: usize, map: HashMap<u32, f64> },
    Dense { values: Vec<f64> },
}

impl SparseScores {
    pub fn new(n: usize) -> Self {
        SparseScores::Sparse {
            n,
            map: HashMap::new(),
        }
    }

    pub fn get(&self, v: u32) -> f64 {
        match self {
            SparseScores::Sparse { map, .. } => map.get(&v).copied().unwrap_or(0.0),
            SparseScores::Dense { values, .. } => values[v as usize],
        }
    }

    /// Adds `delta` and returns the new value.
    pub fn add(&mut self, v: u32, delta: f64) -> f64 {
        match self {
            SparseScores::Sparse { n, map } => {
                let slot = map.entry(v).or_insert(0.0);
                *slot += delta;
                let value = *slot;
                if map.len() > *n / 4 {
                    self.densify();
                }
                value
            }
            SparseScores::Dense { values } => {
                values[v as usize] += delta;
                values[v as usize]
            }
        }
    }

    /// Overwrites the value at `v`.
    pub fn set(&mut self, v: u32, value: f64) {
        match self {
            SparseScores::Sparse { map, .. } => {
                map.insert(v, value);
            }
            SparseScores::Dense { values, .. } => values[v as usize] = value,
        }
    }

    fn densify(&mut self) {
        if let SparseScores::Sparse { n, map } = self {
            let mut values = vec![0.0; *n];
            for (&k, &v) in map.iter() {
                values[k as usize] = v;
            }
            *self = SparseScores::Dense { values };
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, SparseScores::Dense { .. })
    }

    /// Number of nonzero entries.
    pub fn support_len(&self) -> usize {
        match self {
            SparseScores::Sparse { map, .. } => map.values().filter(|&&v| v != 0.0).count(),
            SparseScores::Dense { values } => values.iter().filter(|&&v| v != 0.0).count(),
        }
    }

    /// Nonzero entries sorted by node id.
    pub fn entries(&self) -> Vec<(u32, f64)> {
        let mut out: Vec<(u32, f64)> = match self {
            SparseScores::Sparse { map, .. } => map
                .iter()
                .filter(|e| *e.1 != 0.0)
                .map(|(&k, &v)| (k, v))
                .collect(),
            SparseScores::Dense { values, .. } => values
                .iter()
                .enumerate()
                .filter(|e| *e.1 != 0.0)
                .map(|(k, &v)| (k as u32, v))
                .collect(),
        };
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    pub fn sum(&self) -> f64 {
        self.entries().iter().map(|e| e.1).sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (k, v) in self.entries() {
            out[k as usize] = v;
        }
        out
    }
}

/// How residual mass moves on a push.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PushRule {
    /// `p += (1-α) r(u)`, each neighbor gets `α r(u) / d(u)`, `r(u) = 0`.
    #[default]
    NonLazy,
    /// `p += (1-α) r(u)`, each neighbor gets `α r(u) / (2 d(u))`, `r(u) = α r(u) / 2`.
    Lazy,
}

/// Output of [`appr_push`].
#[derive(Debug, Clone)]
pub struct ApprResult {
    pub p: SparseScores,
    pub r: SparseScores,
    pub alpha: f64,
    pub eps: f64,
    pub pushes: u64,
}

impl ApprResult {
    /// `max_v r(v) / d(v)` over nodes of positive degree.
    pub fn max_residual_ratio(&self, graph: &Graph) -> f64 {
        self.r
            .entries()
            .iter()
            .filter(|(v, _)| graph.degree(*v) > 0)
            .map(|&(v, r)| r / graph.degree(v) as f64)
            .fold(0.0, f64::max)
    }
}

/// Incremental push state; [`appr_push`] drives it to completion.
#[derive(Debug)]
pub struct PushState<'g> {
    graph: &'g Graph,
    alpha: f64,
    eps: f64,
    rule: PushRule,
    p: SparseScores,
    r: SparseScores,
    queue: VecDeque<u32>,
    pushes: u64,
}

impl<'g> PushState<'g> {
    pub fn new(
        graph: &'g Graph,
        seeds: &RestartVector,
        alpha: f64,
        eps: f64,
        rule: PushRule,
    ) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::OutOfRange(format!("eps = {eps} must be positive")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::OutOfRange(format!("alpha = {alpha} not in (0, 1)")));
        }
        let n = graph.node_count();
        let mut r = SparseScores::new(n);
        let mut queue = VecDeque::new();
        let w = seeds.weight();
        for s in seeds.seeds().iter() {
            let d = graph.degree(s);
            if d == 0 {
                return Err(Error::DanglingSeed(s));
            }
            r.add(s, w);
            if w >= eps * d as f64 {
                queue.push_back(s);
            }
        }
        Ok(Self {
            graph,
            alpha,
            eps,
            rule,
            p: SparseScores::new(n),
            r,
            queue,
            pushes: 0,
        })
    }

    /// Performs one push. Returns false once no node is above threshold.
    pub fn step(&mut self) -> bool {
        let Some(u) = self.queue.pop_front() else {
            return false;
        };
        let d = self.graph.degree(u) as f64;
        let ru = self.r.get(u);
        self.p.add(u, (1.0 - self.alpha) * ru);
        let (share, keep) = match self.rule {
            PushRule::NonLazy => (self.alpha * ru / d, 0.0),
            PushRule::Lazy => (self.alpha * ru / (2.0 * d), self.alpha * ru / 2.0),
        };
        self.r.set(u, keep);
        for &v in self.graph.neighbors(u) {
            let threshold = self.eps * self.graph.degree(v) as f64;
            let after = self.r.add(v, share);
            if after >= threshold && after - share < threshold {
                self.queue.push_back(v);
            }
        }
        if keep >= self.eps * d {
            self.queue.push_back(u);
        }
        self.pushes += 1;
        true
    }

    pub fn pushes(&self) -> u64 {
        self.pushes
    }

    /// `Σp + Σr`.
    pub fn mass(&self) -> f64 {
        self.p.sum() + self.r.sum()
    }

    pub fn finish(self) -> ApprResult {
        ApprResult {
            p: self.p,
            r: self.r,
            alpha: self.alpha,
            eps: self.eps,
            pushes: self.pushes,
        }
    }
}

/// Runs the push to termination with [`DEFAULT_PUSH_BUDGET`].
pub fn appr_push(
    graph: &Graph,
    seeds: &RestartVector,
    alpha: f64,
    eps: f64,
    rule: PushRule,
) -> Result<ApprResult> {
    appr_push_with_budget(graph, seeds, alpha, eps, rule, DEFAULT_PUSH_BUDGET)
}

pub fn appr_push_with_budget(
    graph: &Graph,
    seeds: &RestartVector,
    alpha: f64,
    eps: f64,
    rule: PushRule,
    budget: u64,
) -> Result<ApprResult> {
    let mut state = PushState::new(graph, seeds, alpha, eps, rule)?;
    while state.step() {
        if state.pushes >= budget && !state.queue.is_empty() {
            return Err(Error::BudgetExceeded { budget });
        }
    }
    Ok(state.finish())
}

/// Prefix conductances along a ranked node order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub order: Vec<u32>,
    /// Conductance of each prefix `order[..i+1]`; 1 where a side has zero volume.
    pub prefix_conductance: Vec<f64>,
    /// Length of the best prefix.
    pub best_prefix: usize,
    pub best_conductance: f64,
}

impl SweepResult {
    pub fn best_set(&self) -> NodeSet {
        self.prefix_set(self.best_prefix)
    }

    pub fn prefix_set(&self, len: usize) -> NodeSet {
        let mut ids = self.order[..len].to_vec();
        ids.sort_unstable();
        NodeSet::from_sorted(ids)
    }
}

/// Ranks the nonzero entries of `scores` and returns them in sweep order.
///
/// The key is `score / d(v)` with `degree_scaling` (degree-0 nodes use 1)
/// and the raw score otherwise; descending, ties by ascending id.
pub fn ranking_order(graph: &Graph, scores: &[(u32, f64)], degree_scaling: bool) -> Vec<u32> {
    let mut keyed: Vec<(f64, u32)> = scores
        .iter()
        .filter(|e| e.1 > 0.0)
        .map(|&(v, s)| {
            let key = if degree_scaling {
                s / graph.degree(v).max(1) as f64
            } else {
                s
            };
            (key, v)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|e| e.1).collect()
}

/// Sweep cut over the first `cap` ranked nodes (all of the support if `None`).
///
/// Cut and volume are updated incrementally in integer arithmetic: adding
/// `v` changes the cut by `d(v) - 2 |N(v) ∩ S|`.
pub fn sweep(
    graph: &Graph,
    scores: &[(u32, f64)],
    degree_scaling: bool,
    cap: Option<usize>,
) -> Result<SweepResult> {
    let mut order = ranking_order(graph, scores, degree_scaling);
    if order.is_empty() {
        return Err(Error::EmptySupport);
    }
    if let Some(cap) = cap {
        if cap == 0 {
            return Err(Error::OutOfRange("sweep cap must be at least 1".into()));
        }
        order.truncate(cap);
    }
    let total = graph.total_volume();
    let mut members: HashSet<u32> = HashSet::with_capacity(order.len());
    let mut vol = 0u64;
    let mut cut = 0i64;
    let mut prefix_conductance = Vec::with_capacity(order.len());
    let mut best = (0usize, f64::INFINITY);
    for (i, &v) in order.iter().enumerate() {
        let d = graph.degree(v);
        let inside = graph
            .neighbors(v)
            .iter()
            .filter(|u| members.contains(u))
            .count() as i64;
        members.insert(v);
        vol += d as u64;
        cut += d as i64 - 2 * inside;
        let denom = vol.min(total - vol);
        let phi = if denom == 0 {
            1.0
        } else {
            cut as f64 / denom as f64
        };
        prefix_conductance.push(phi);
        if phi < best.1 {
            best = (i + 1, phi);
        }
    }
    Ok(SweepResult {
        order,
        prefix_conductance,
        best_prefix: best.0,
        best_conductance: best.1,
    })
}

/// Outcome of the push-then-sweep pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterOutcome {
    pub cluster: NodeSet,
    pub pushes: u64,
    pub support: usize,
    pub best_conductance: f64,
    pub best_prefix: usize,
    /// True when the sweep set exceeded `m` nodes and was cut back to the top `m`.
    pub truncated: bool,
    /// Conductance of the returned cluster (after truncation).
    pub cluster_conductance: Option<f64>,
    /// Whether `best_conductance < target_phi`, when a target was supplied.
    pub meets_target: Option<bool>,
    pub error: f64,
}

/// Push, sweep, and keep at most the `m` best-ranked nodes of the sweep set.
pub fn appr_cluster(
    graph: &Graph,
    config: &PlantedGraphConfig,
    alpha: f64,
    eps: f64,
    degree_scaling: bool,
    target_phi: Option<f64>,
    rule: PushRule,
) -> Result<ClusterOutcome> {
    let seeds = RestartVector::from_config(config);
    let appr = appr_push(graph, &seeds, alpha, eps, rule)?;
    let entries = appr.p.entries();
    let sweep_result = sweep(graph, &entries, degree_scaling, None)?;
    let truncated = sweep_result.best_prefix > config.m;
    let cluster = if truncated {
        sweep_result.prefix_set(config.m)
    } else {
        sweep_result.best_set()
    };
    Ok(ClusterOutcome {
        error: classification_error(&cluster, config),
        cluster_conductance: conductance(graph, &cluster).ok(),
        pushes: appr.pushes,
        support: entries.len(),
        best_conductance: sweep_result.best_conductance,
        best_prefix: sweep_result.best_prefix,
        truncated,
        meets_target: target_phi.map(|phi| sweep_result.best_conductance < phi),
        cluster,
    })
}
