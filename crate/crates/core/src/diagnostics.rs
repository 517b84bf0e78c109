//! Concentration and non-concentration diagnostics.
//!
//! The bounds here carry an unspecified constant `C`; it is a caller-supplied
//! parameter and every bound value is "up to that constant". Monte Carlo
//! reports carry standard errors so that callers test trends rather than
//! absolute levels.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{sample_planted_er, Graph, PlantedGraphConfig};
use crate::mean_field::mean_field_ppr;
use crate::ppr::{ppr, RestartVector};
use crate::rng::{rng_from_seed, stream_seed};
use crate::stats::{jackknife, mean, mean_estimate, sample_variance, Estimate};
use crate::{Error, Result};

/// `‖π - π̄‖₂ / ‖π̄‖₂`.
pub fn relative_l2(pi: &[f64], pibar: &[f64]) -> Result<f64> {
    if pi.len() != pibar.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            pi.len(),
            pibar.len()
        )));
    }
    let norm: f64 = pibar.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let diff: f64 = pi
        .iter()
        .zip(pibar)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm)
}

/// A bound that is only meaningful when its denominator is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub valid: bool,
}

/// `αC / ((1-α) √(np / ln n) - αC)`, the relative L2 error bound.
pub fn l2_error_bound(
    config: &PlantedGraphConfig,
    alpha: f64,
    constant: f64,
) -> Result<BoundValue> {
    if !(constant > 0.0) {
        return Err(Error::OutOfRange(format!(
            "constant C = {constant} must be positive"
        )));
    }
    let n = config.n as f64;
    let den = (1.0 - alpha) * (n * config.p / n.ln()).sqrt() - alpha * constant;
    if den > 0.0 {
        Ok(BoundValue {
            value: alpha * constant / den,
            valid: true,
        })
    } else {
        Ok(BoundValue {
            value: f64::INFINITY,
            valid: false,
        })
    }
}

/// Observed relative L2 error next to its bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub rel_l2: f64,
    /// Present only when the bound is valid.
    pub bound_rhs: Option<f64>,
    pub bound_valid: bool,
    pub constant: f64,
    pub alpha: f64,
    pub config: PlantedGraphConfig,
}

pub fn concentration_report(
    graph: &Graph,
    config: &PlantedGraphConfig,
    alpha: f64,
    constant: f64,
) -> Result<ConcentrationReport> {
    let pi = ppr(graph, &RestartVector::from_config(config), alpha)?;
    let pibar = mean_field_ppr(config, alpha)?.expand();
    let bound = l2_error_bound(config, alpha, constant)?;
    Ok(ConcentrationReport {
        rel_l2: relative_l2(&pi.values, &pibar.values)?,
        bound_rhs: bound.valid.then_some(bound.value),
        bound_valid: bound.valid,
        constant,
        alpha,
        config: *config,
    })
}

/// Largest `n` accepted by [`spectral_deviation`].
pub const SPECTRAL_LIMIT: usize = 5000;

/// `P - P̄` as a matrix-free operator. `P̄ = D̄⁻¹ E[A]` where `E[A]` has zero
/// diagonal, `q` inside the community block and `p` elsewhere.
struct Deviation<'g> {
    graph: &'g Graph,
    m: usize,
    p: f64,
    q: f64,
    deg_in: f64,
    deg_out: f64,
}

impl<'g> Deviation<'g> {
    fn new(graph: &'g Graph, config: &PlantedGraphConfig) -> Self {
        let (n, m) = (config.n as f64, config.m as f64);
        Self {
            graph,
            m: config.m,
            p: config.p,
            q: config.q,
            deg_in: (m - 1.0) * config.q + (n - m) * config.p,
            deg_out: (n - 1.0) * config.p,
        }
    }

    /// `y = (P - P̄) x`.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let s_in: f64 = x[..self.m].iter().sum();
        let s_out: f64 = x[self.m..].iter().sum();
        for (i, yi) in y.iter_mut().enumerate() {
            let adj = self.graph.neighbors(i as u32);
            let walk = adj.iter().map(|&j| x[j as usize]).sum::<f64>() / adj.len() as f64;
            let expected = if i < self.m {
                (self.q * (s_in - x[i]) + self.p * s_out) / self.deg_in
            } else {
                self.p * (s_in + s_out - x[i]) / self.deg_out
            };
            *yi = walk - expected;
        }
    }

    /// `x = (P - P̄)ᵀ y`.
    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        let t_in: f64 = y[..self.m].iter().sum::<f64>() / self.deg_in;
        let t_out: f64 = y[self.m..].iter().sum::<f64>() / self.deg_out;
        for (j, xj) in x.iter_mut().enumerate() {
            let walk: f64 = self
                .graph
                .neighbors(j as u32)
                .iter()
                .map(|&i| y[i as usize] / self.graph.degree(i) as f64)
                .sum();
            let expected = if j < self.m {
                self.q * (t_in - y[j] / self.deg_in) + self.p * t_out
            } else {
                self.p * (t_in + t_out - y[j] / self.deg_out)
            };
            *xj = walk - expected;
        }
    }
}

/// `‖P - P̄‖₂`, the largest singular value of the deviation of the walk
/// matrix from its expectation.
///
/// Computed as the square root of the top eigenvalue of the Gram operator
/// `(P - P̄)ᵀ(P - P̄)` with a fully reorthogonalized Lanczos iteration from a
/// fixed start vector, stopped when the top Ritz value is stable to 10⁻¹²
/// relative.
pub fn spectral_deviation(graph: &Graph, config: &PlantedGraphConfig) -> Result<f64> {
    let n = graph.node_count();
    if n != config.n {
        return Err(Error::InvalidArgument(format!(
            "graph has {n} nodes, config says {}",
            config.n
        )));
    }
    if n > SPECTRAL_LIMIT {
        return Err(Error::SizeGuard {
            n,
            limit: SPECTRAL_LIMIT,
        });
    }
    if let Some(v) = (0..n as u32).find(|&v| graph.degree(v) == 0) {
        return Err(Error::DanglingNode(v));
    }
    if !(config.p > 0.0) {
        return Err(Error::InvalidArgument("p must be positive".into()));
    }
    let op = Deviation::new(graph, config);
    let mut tmp = vec![0.0; n];
    let gram = |x: &[f64], out: &mut [f64], tmp: &mut [f64]| {
        op.apply(x, tmp);
        op.apply_transpose(tmp, out);
    };
    Ok(lanczos_top_eigenvalue(n, gram, &mut tmp).max(0.0).sqrt())
}

fn lanczos_top_eigenvalue<F>(n: usize, op: F, tmp: &mut [f64]) -> f64
where
    F: Fn(&[f64], &mut [f64], &mut [f64]),
{
    const CHECK_EVERY: usize = 5;
    let max_steps = n.min(400);
    let mut rng = rng_from_seed(0x5EED_1A2C);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut v);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut diag: Vec<f64> = Vec::new();
    let mut off: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut last = f64::NAN;
    loop {
        op(&v, &mut w, tmp);
        let a = dot(&w, &v);
        diag.push(a);
        basis.push(v.clone());
        // Full reorthogonalization, twice for stability.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
        }
        let beta = dot(&w, &w).sqrt();
        let steps = diag.len();
        let done = beta <= 1e-14 * a.abs().max(1e-300) || steps >= max_steps;
        if done || steps % CHECK_EVERY == 0 {
            let top = top_ritz_value(&diag, &off);
            if done || (top - last).abs() <= 1e-12 * top.abs() {
                return top;
            }
            last = top;
        }
        off.push(beta);
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / beta);
    }
}

/// Largest eigenvalue of the symmetric tridiagonal matrix by Sturm-count bisection.
fn top_ritz_value(diag: &[f64], off: &[f64]) -> f64 {
    let k = diag.len();
    let radius = |i: usize| {
        (if i > 0 { off[i - 1].abs() } else { 0.0 }) + (if i + 1 < k { off[i].abs() } else { 0.0 })
    };
    let mut lo = (0..k).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..k).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    // Number of eigenvalues strictly below x, from the signs of the LDLᵀ pivots.
    let below = |x: f64| {
        let mut count = 0;
        let mut pivot = 1.0;
        for i in 0..k {
            let coupling = if i > 0 { off[i - 1] * off[i - 1] / pivot } else { 0.0 };
            pivot = diag[i] - x - coupling;
            if pivot == 0.0 {
                pivot = -f64::EPSILON * (x.abs() + 1.0);
            }
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    };
    while hi - lo > 2.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += c * xi);
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Frequency, over independent `(graph, U)` draws with `U` uniform, of
/// `|π_U - π̄_{block(U)}| >= eps_scale / n`.
pub fn concentration_probe(
    config: &PlantedGraphConfig,
    alpha: f64,
    eps_scale: f64,
    replicates: usize,
) -> Result<f64> {
    concentration_probe_with(config, alpha, eps_scale, replicates, |graph, cfg| {
        Ok(ppr(graph, &RestartVector::from_config(cfg), alpha)?.values)
    })
}

/// [`concentration_probe`] with a caller-supplied score function.
pub fn concentration_probe_with<F>(
    config: &PlantedGraphConfig,
    alpha: f64,
    eps_scale: f64,
    replicates: usize,
    scores: F,
) -> Result<f64>
where
    F: Fn(&Graph, &PlantedGraphConfig) -> Result<Vec<f64>> + Sync,
{
    if replicates == 0 || !(eps_scale > 0.0) {
        return Err(Error::InvalidArgument(
            "need replicates >= 1 and eps_scale > 0".into(),
        ));
    }
    let mf = mean_field_ppr(config, alpha)?;
    let threshold = eps_scale / config.n as f64;
    let hits: Vec<bool> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<bool> {
            let mut rng = rng_from_seed(stream_seed(config.seed, r));
            let cfg = config.with_seed(rng.random());
            let u = rng.random_range(0..config.n);
            let graph = sample_planted_er(&cfg)?;
            let pi = scores(&graph, &cfg)?;
            Ok((pi[u] - mf.value_at(u)).abs() >= threshold)
        })
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / replicates as f64)
}

/// Which block a probed node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    /// Community member that is not a seed; probed at node `m - 1`.
    InCNotS,
    /// Outside the community; probed at node `n - 1`.
    OutsideC,
}

impl NodeClass {
    pub fn node(self, config: &PlantedGraphConfig) -> usize {
        match self {
            NodeClass::InCNotS => config.m - 1,
            NodeClass::OutsideC => config.n - 1,
        }
    }
}

/// Coefficient-of-variation estimate of one node's score across graphs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovReport {
    pub node_class: NodeClass,
    pub node: usize,
    pub replicates: usize,
    pub mean: Estimate,
    pub variance: Estimate,
    /// `Var(π_i) / E²(π_i)`.
    pub cov2: Estimate,
}

/// Summarizes samples of one node's score with jackknife standard errors.
pub fn cov_from_samples(node_class: NodeClass, node: usize, samples: &[f64]) -> Result<CovReport> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two replicates".into(),
        ));
    }
    let ratio = |xs: &[f64]| {
        let mu = mean(xs);
        if mu == 0.0 {
            0.0
        } else {
            sample_variance(xs) / (mu * mu)
        }
    };
    Ok(CovReport {
        node_class,
        node,
        replicates: samples.len(),
        mean: jackknife(samples, mean),
        variance: jackknife(samples, sample_variance),
        cov2: jackknife(samples, ratio),
    })
}

/// Scores of the given nodes in `replicates` independently sampled graphs.
///
/// Replicate `r` uses the graph seed `stream_seed(config.seed, r)`.
pub fn replicate_node_scores(
    config: &PlantedGraphConfig,
    alpha: f64,
    nodes: &[usize],
    replicates: usize,
) -> Result<Vec<Vec<f64>>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let cfg = config.with_seed(stream_seed(config.seed, r));
            let graph = sample_planted_er(&cfg)?;
            let pi = ppr(&graph, &RestartVector::from_config(&cfg), alpha)?;
            Ok(nodes.iter().map(|&i| pi.values[i]).collect())
        })
        .collect()
}

/// Estimates `Var(π_i) / E²(π_i)` for one representative node of a class.
pub fn cov_estimate(
    config: &PlantedGraphConfig,
    alpha: f64,
    class: NodeClass,
    replicates: usize,
) -> Result<CovReport> {
    if replicates < 30 {
        return Err(Error::InvalidArgument(format!(
            "need at least 30 replicates, got {replicates}"
        )));
    }
    if class == NodeClass::InCNotS && config.k == config.m {
        return Err(Error::InvalidArgument(
            "community has no non-seed node".into(),
        ));
    }
    if class == NodeClass::OutsideC && config.m == config.n {
        return Err(Error::InvalidArgument(
            "no node outside the community".into(),
        ));
    }
    let node = class.node(config);
    let samples: Vec<f64> = replicate_node_scores(config, alpha, &[node], replicates)?
        .into_iter()
        .map(|v| v[0])
        .collect();
    cov_from_samples(class, node, &samples)
}

/// Sample mean of one node's score against `1/(m-k)` or `1/(n-m)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassBoundCheck {
    pub node: usize,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `mean <= bound + 4 stderr`.
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub replicates: usize,
    /// `None` when every community node is a seed.
    pub in_community: Option<ClassBoundCheck>,
    /// `None` when the community is the whole graph.
    pub outside: Option<ClassBoundCheck>,
}

impl ExpectationReport {
    pub fn passed(&self) -> bool {
        self.in_community.as_ref().is_none_or(|c| c.pass)
            && self.outside.as_ref().is_none_or(|c| c.pass)
    }
}

/// Checks `E π_i <= 1/(m-k)` for `i` in the community but not a seed and
/// `E π_i <= 1/(n-m)` outside, at nodes `m-1` and `n-1`.
pub fn expectation_bound_check(
    config: &PlantedGraphConfig,
    alpha: f64,
    replicates: usize,
) -> Result<ExpectationReport> {
    if replicates < 30 {
        return Err(Error::InvalidArgument(format!(
            "need at least 30 replicates, got {replicates}"
        )));
    }
    let mut nodes = Vec::new();
    let mut bounds = Vec::new();
    if config.k < config.m {
        nodes.push(config.m - 1);
        bounds.push(1.0 / (config.m - config.k) as f64);
    }
    if config.m < config.n {
        nodes.push(config.n - 1);
        bounds.push(1.0 / (config.n - config.m) as f64);
    }
    let samples = replicate_node_scores(config, alpha, &nodes, replicates)?;
    let mut checks = nodes
        .iter()
        .zip(&bounds)
        .enumerate()
        .map(|(col, (&node, &bound))| {
            let column: Vec<f64> = samples.iter().map(|row| row[col]).collect();
            let est = mean_estimate(&column);
            ClassBoundCheck {
                node,
                mean: est.value,
                stderr: est.stderr,
                bound,
                pass: est.value <= bound + 4.0 * est.stderr,
            }
        });
    let in_community = if config.k < config.m {
        checks.next()
    } else {
        None
    };
    let outside = if config.m < config.n {
        checks.next()
    } else {
        None
    };
    Ok(ExpectationReport {
        replicates,
        in_community,
        outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_l2_basics() {
        let a = [0.2, 0.3, 0.5];
        assert_eq!(relative_l2(&a, &a).unwrap(), 0.0);
        let r = relative_l2(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(relative_l2(&[1.0], &[0.0]), Err(Error::ZeroNorm)));
        assert!(relative_l2(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn relative_l2_is_scale_invariant() {
        let a = [0.1, 0.5, 0.4];
        let b = [0.2, 0.3, 0.5];
        let scaled_a: Vec<f64> = a.iter().map(|x| x * 7.5).collect();
        let scaled_b: Vec<f64> = b.iter().map(|x| x * 7.5).collect();
        let (x, y) = (
            relative_l2(&a, &b).unwrap(),
            relative_l2(&scaled_a, &scaled_b).unwrap(),
        );
        assert!((x - y).abs() < 1e-14);
    }

    #[test]
    fn bound_trivial_cases() {
        let cfg = PlantedGraphConfig::log_squared(10_000, 2000, 200, 0).unwrap();
        assert_eq!(
            l2_error_bound(&cfg, 0.0, 1.0).unwrap(),
            BoundValue {
                value: 0.0,
                valid: true
            }
        );
        let vacuous = l2_error_bound(&cfg, 0.99, 5.0).unwrap();
        assert!(!vacuous.valid);
        assert!(l2_error_bound(&cfg, 0.5, 0.0).is_err());
    }

    #[test]
    fn spectral_deviation_of_complete_graph_is_zero() {
        let cfg = PlantedGraphConfig::new(60, 20, 2, 1.0, 1.0, 0).unwrap();
        let g = sample_planted_er(&cfg).unwrap();
        assert!(spectral_deviation(&g, &cfg).unwrap() < 1e-8);
    }

    #[test]
    fn spectral_deviation_guards() {
        let cfg = PlantedGraphConfig::new(10, 5, 1, 0.0, 0.5, 0).unwrap();
        let g = sample_planted_er(&cfg).unwrap();
        assert!(matches!(
            spectral_deviation(&g, &cfg),
            Err(Error::DanglingNode(_))
        ));
        let big = PlantedGraphConfig::new(SPECTRAL_LIMIT + 1, 5, 1, 0.0, 0.0, 0).unwrap();
        let g = Graph::from_edges(SPECTRAL_LIMIT + 1, &[]).unwrap();
        assert!(matches!(
            spectral_deviation(&g, &big),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn probe_is_zero_when_scores_equal_mean_field() {
        let cfg = PlantedGraphConfig::new(300, 60, 6, 0.05, 0.1, 11).unwrap();
        let freq = concentration_probe_with(&cfg, 0.8, 1.0, 20, |_, c| {
            Ok(mean_field_ppr(c, 0.8)?.expand().values)
        })
        .unwrap();
        assert_eq!(freq, 0.0);
    }

    #[test]
    fn deterministic_graph_has_zero_variance() {
        let cfg = PlantedGraphConfig::new(40, 10, 2, 1.0, 1.0, 5).unwrap();
        let report = cov_estimate(&cfg, 0.8, NodeClass::InCNotS, 30).unwrap();
        // Replicates are identical up to rounding of the mean.
        assert!(report.variance.value < 1e-30);
        assert!(report.cov2.value < 1e-25);
        assert!(cov_estimate(&cfg, 0.8, NodeClass::OutsideC, 29).is_err());
    }

    #[test]
    fn expectation_check_skips_empty_classes() {
        let cfg = PlantedGraphConfig::new(200, 20, 20, 0.05, 0.2, 1).unwrap();
        let report = expectation_bound_check(&cfg, 0.8, 30).unwrap();
        assert!(report.in_community.is_none());
        assert!(report.outside.as_ref().unwrap().pass);
        let at_zero = expectation_bound_check(&cfg.with_seed(2), 0.0, 30).unwrap();
        assert_eq!(at_zero.outside.unwrap().mean, 0.0);
    }
}
