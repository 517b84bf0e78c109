//! Exact and truncated Personalized PageRank.
//!
//! Scores are row vectors: `π = (1-α) ν (I - αP)⁻¹` with `P = D⁻¹A`. A node
//! of degree 0 has no outgoing edges; its row of `P` is replaced by the
//! restart distribution `ν`, so the walk restarts from it.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, NodeSet, PlantedGraphConfig};
use crate::{Error, Result};

/// Default L1 tolerance for [`ppr_iterate`].
pub const DEFAULT_TOL: f64 = 1e-12;

/// Largest `n` accepted by [`ppr_dense_oracle`].
pub const DENSE_ORACLE_LIMIT: usize = 4000;

/// Uniform restart distribution over a seed set.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartVector {
    seeds: NodeSet,
}

impl RestartVector {
    pub fn new(seeds: NodeSet) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::InvalidArgument(
                "restart vector needs at least one seed".into(),
            ));
        }
        Ok(Self { seeds })
    }

    /// Mass `1/k` on each of the nodes `0..k`.
    pub fn from_config(config: &PlantedGraphConfig) -> Self {
        Self {
            seeds: config.seed_set(),
        }
    }

    pub fn seeds(&self) -> &NodeSet {
        &self.seeds
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.seeds.len() as f64
    }

    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        let w = self.weight();
        for s in self.seeds.iter() {
            v[s as usize] = w;
        }
        v
    }
}

/// What produced a [`ScoreVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreKind {
    Exact,
    Truncated(usize),
    MeanFieldExpanded,
    ApprDense,
}

/// Dense nonnegative scores, one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub values: Vec<f64>,
    pub alpha: f64,
    pub kind: ScoreKind,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Writes `node,score` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "score"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([i.to_string(), format!("{v:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Iteration cap `ceil(ln(tol/2) / ln α) + 10`.
///
/// The L1 change of step `j` is at most `2αʲ`, so the cap always suffices.
pub fn default_max_iter(alpha: f64, tol: f64) -> usize {
    if alpha <= 0.0 {
        return 10;
    }
    ((tol / 2.0).ln() / alpha.ln()).ceil().max(0.0) as usize + 10
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!("alpha = {alpha} not in [0, 1)")));
    }
    Ok(())
}

/// One step `y = x P` with the dangling rule. Returns nothing; writes into `y`.
fn propagate(graph: &Graph, nu: &RestartVector, x: &[f64], scaled: &mut [f64], y: &mut [f64]) {
    let mut dangling = 0.0;
    for (i, (&xi, s)) in x.iter().zip(scaled.iter_mut()).enumerate() {
        let d = graph.degree(i as u32);
        if d == 0 {
            dangling += xi;
            *s = 0.0;
        } else {
            *s = xi / d as f64;
        }
    }
    for (j, yj) in y.iter_mut().enumerate() {
        *yj = graph
            .neighbors(j as u32)
            .iter()
            .map(|&i| scaled[i as usize])
            .sum();
    }
    if dangling != 0.0 {
        let w = nu.weight() * dangling;
        for s in nu.seeds().iter() {
            y[s as usize] += w;
        }
    }
}

/// Fixed-point iteration `π ← (1-α)ν + α π P` from `π = ν`.
///
/// Stops when the L1 change of one step is at most `tol`.
pub fn ppr_iterate(
    graph: &Graph,
    nu: &RestartVector,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ScoreVector> {
    check_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(Error::OutOfRange(format!("tol = {tol} must be positive")));
    }
    let n = graph.node_count();
    let restart = nu.dense(n);
    let mut pi = restart.clone();
    let mut next = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        propagate(graph, nu, &pi, &mut scratch, &mut next);
        residual = 0.0;
        for ((nx, &r), &old) in next.iter_mut().zip(&restart).zip(&pi) {
            *nx = (1.0 - alpha) * r + alpha * *nx;
            residual += (*nx - old).abs();
        }
        std::mem::swap(&mut pi, &mut next);
        if residual <= tol {
            return Ok(ScoreVector {
                values: pi,
                alpha,
                kind: ScoreKind::Exact,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual,
    })
}

/// [`ppr_iterate`] with [`DEFAULT_TOL`] and the default iteration cap.
pub fn ppr(graph: &Graph, nu: &RestartVector, alpha: f64) -> Result<ScoreVector> {
    ppr_iterate(
        graph,
        nu,
        alpha,
        DEFAULT_TOL,
        default_max_iter(alpha, DEFAULT_TOL),
    )
}

/// Contribution of walks shorter than `t`: `(1-α) ν Σ_{l<t} αˡ Pˡ`.
///
/// The result sums to `1 - αᵗ`.
pub fn ppr_truncated(
    graph: &Graph,
    nu: &RestartVector,
    alpha: f64,
    t: usize,
) -> Result<ScoreVector> {
    check_alpha(alpha)?;
    if t == 0 {
        return Err(Error::OutOfRange(
            "truncation depth must be at least 1".into(),
        ));
    }
    let n = graph.node_count();
    let mut walk = nu.dense(n);
    let mut acc: Vec<f64> = walk.iter().map(|&v| (1.0 - alpha) * v).collect();
    let mut next = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut weight = 1.0 - alpha;
    for _ in 1..t {
        propagate(graph, nu, &walk, &mut scratch, &mut next);
        std::mem::swap(&mut walk, &mut next);
        weight *= alpha;
        for (a, &w) in acc.iter_mut().zip(&walk) {
            *a += weight * w;
        }
    }
    Ok(ScoreVector {
        values: acc,
        alpha,
        kind: ScoreKind::Truncated(t),
    })
}

/// Solves `π (I - αP) = (1-α) ν` by dense LU factorization.
pub fn ppr_dense_oracle(graph: &Graph, nu: &RestartVector, alpha: f64) -> Result<ScoreVector> {
    check_alpha(alpha)?;
    let n = graph.node_count();
    if n > DENSE_ORACLE_LIMIT {
        return Err(Error::SizeGuard {
            n,
            limit: DENSE_ORACLE_LIMIT,
        });
    }
    let restart = nu.dense(n);
    // Transposed system: (I - αPᵀ) πᵀ = (1-α) νᵀ, column i of Pᵀ is row i of P.
    let mut system = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        let d = graph.degree(i as u32);
        if d == 0 {
            for (j, &r) in restart.iter().enumerate() {
                system[(j, i)] -= alpha * r;
            }
        } else {
            for &j in graph.neighbors(i as u32) {
                system[(j as usize, i)] -= alpha / d as f64;
            }
        }
    }
    let rhs = DVector::from_iterator(n, restart.iter().map(|&r| (1.0 - alpha) * r));
    let solution = system.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    Ok(ScoreVector {
        values: solution.iter().map(|&v| v.max(0.0)).collect(),
        alpha,
        kind: ScoreKind::Exact,
    })
}

/// The `count` highest-scoring nodes; ties go to the smaller id.
pub fn rank_top(scores: &[f64], count: usize) -> Result<NodeSet> {
    let n = scores.len();
    if count == 0 || count > n {
        return Err(Error::OutOfRange(format!(
            "count = {count} not in [1, {n}]"
        )));
    }
    let mut ids: Vec<u32> = (0..n as u32).collect();
    let order = |a: &u32, b: &u32| {
        scores[*b as usize]
            .total_cmp(&scores[*a as usize])
            .then(a.cmp(b))
    };
    if count < n {
        ids.select_nth_unstable_by(count - 1, order);
        ids.truncate(count);
    }
    ids.sort_unstable();
    Ok(NodeSet::from_sorted(ids))
}

/// Fraction of the community size taken up by predicted nodes outside the community.
pub fn classification_error(predicted: &NodeSet, config: &PlantedGraphConfig) -> f64 {
    let outside = predicted.len() - predicted.intersection_len(&config.community());
    outside as f64 / config.m as f64
}
