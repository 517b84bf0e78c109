//! Mean-field Personalized PageRank on the expected planted graph.
//!
//! On the expected adjacency matrix every seed shares one score `π̄0`, every
//! other community node shares `π̄1`, and every outside node shares `π̄2`.
//! The three values solve a 3×3 linear system with an explicit solution:
//!
//! ```text
//! den = (mq + (n-m)p)(1 - α(n-m)/n) - αm(q - α(n-m)/n · (q-p))
//! π̄2  = (1-α) α p / den
//! π̄1  = (1-α) α (q - α(n-m)/n · (q-p)) / den
//! π̄0  = (1-α)/k + π̄1
//! ```
//!
//! With `ρ = q/p` and `β = (n-m)/n` the gap `π̄1 - π̄2` depends only on
//! `(ρ, β, m, α)`, and the damping factor that maximizes it has a closed form.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::graph::PlantedGraphConfig;
use crate::ppr::{ScoreKind, ScoreVector};
use crate::{Error, Result};

/// The three block values of the mean-field score vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldPpr {
    pub pi0: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub alpha: f64,
    pub config: PlantedGraphConfig,
}

impl MeanFieldPpr {
    /// `k π̄0 + (m-k) π̄1 + (n-m) π̄2`, which is 1 for a valid solution.
    pub fn total_mass(&self) -> f64 {
        let c = &self.config;
        c.k as f64 * self.pi0 + (c.m - c.k) as f64 * self.pi1 + (c.n - c.m) as f64 * self.pi2
    }

    /// Block value of node `i`.
    pub fn value_at(&self, i: usize) -> f64 {
        if i < self.config.k {
            self.pi0
        } else if i < self.config.m {
            self.pi1
        } else {
            self.pi2
        }
    }

    /// Dense length-`n` vector `[π̄0 ×k, π̄1 ×(m-k), π̄2 ×(n-m)]`.
    pub fn expand(&self) -> ScoreVector {
        let c = &self.config;
        let mut values = Vec::with_capacity(c.n);
        values.resize(c.k, self.pi0);
        values.resize(c.m, self.pi1);
        values.resize(c.n, self.pi2);
        ScoreVector {
            values,
            alpha: self.alpha,
            kind: ScoreKind::MeanFieldExpanded,
        }
    }
}

fn check_inputs(config: &PlantedGraphConfig, alpha: f64) -> Result<()> {
    config.validate()?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!("alpha = {alpha} not in [0, 1)")));
    }
    if !(config.p > 0.0) {
        return Err(Error::DegenerateModel(
            "background probability p must be positive".into(),
        ));
    }
    Ok(())
}

/// Explicit solution of the mean-field system.
pub fn mean_field_ppr(config: &PlantedGraphConfig, alpha: f64) -> Result<MeanFieldPpr> {
    check_inputs(config, alpha)?;
    let (n, m, k) = (config.n as f64, config.m as f64, config.k as f64);
    let (p, q) = (config.p, config.q);
    let community_degree = m * q + (n - m) * p;
    if community_degree == 0.0 {
        return Err(Error::DegenerateModel("mq + (n-m)p = 0".into()));
    }
    let outside_share = alpha * (n - m) / n;
    let inner = q - outside_share * (q - p);
    let den = community_degree * (1.0 - outside_share) - alpha * m * inner;
    if den == 0.0 {
        return Err(Error::DegenerateModel("vanishing denominator".into()));
    }
    let scale = (1.0 - alpha) * alpha / den;
    let pi2 = scale * p;
    let pi1 = scale * inner;
    let pi0 = (1.0 - alpha) / k + pi1;
    Ok(MeanFieldPpr {
        pi0,
        pi1,
        pi2,
        alpha,
        config: *config,
    })
}

/// Coefficient matrix and right-hand side of the mean-field system.
pub fn mean_field_system(config: &PlantedGraphConfig, alpha: f64) -> (Matrix3<f64>, Vector3<f64>) {
    let (n, m, k) = (config.n as f64, config.m as f64, config.k as f64);
    let (p, q) = (config.p, config.q);
    let deg = m * q + (n - m) * p;
    let seed_q = alpha * k * q / deg;
    let rest_q = alpha * (m - k) * q / deg;
    let seed_p = alpha * k * p / deg;
    let rest_p = alpha * (m - k) * p / deg;
    let out = alpha * (n - m) / n;
    #[rustfmt::skip]
    let a = Matrix3::new(
        1.0 - seed_q, -rest_q,       -out,
        -seed_q,      1.0 - rest_q,  -out,
        -seed_p,      -rest_p,       1.0 - out,
    );
    (a, Vector3::new((1.0 - alpha) / k, 0.0, 0.0))
}

/// Direct LU solve of the mean-field system.
pub fn mean_field_solve_3x3(config: &PlantedGraphConfig, alpha: f64) -> Result<MeanFieldPpr> {
    check_inputs(config, alpha)?;
    let (a, b) = mean_field_system(config, alpha);
    let lu = a.lu();
    let scale = a.abs().max();
    if lu.determinant().abs() <= 1e-14 * scale * scale * scale {
        return Err(Error::SingularSystem);
    }
    let x = lu.solve(&b).ok_or(Error::SingularSystem)?;
    Ok(MeanFieldPpr {
        pi0: x[0],
        pi1: x[1],
        pi2: x[2],
        alpha,
        config: *config,
    })
}

/// `ρ = q/p` and `β = (n-m)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelShape {
    pub rho: f64,
    pub beta: f64,
}

impl ModelShape {
    pub fn new(rho: f64, beta: f64) -> Result<Self> {
        if !(rho > 0.0) || !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidShape(format!(
                "need rho > 0 and 0 < beta < 1, got rho={rho} beta={beta}"
            )));
        }
        Ok(Self { rho, beta })
    }

    pub fn from_config(config: &PlantedGraphConfig) -> Result<Self> {
        if !(config.p > 0.0) {
            return Err(Error::InvalidShape("p must be positive".into()));
        }
        Self::new(
            config.q / config.p,
            (config.n - config.m) as f64 / config.n as f64,
        )
    }

    /// `x = (1-β)ρ + β`.
    pub fn x(&self) -> f64 {
        (1.0 - self.beta) * self.rho + self.beta
    }
}

/// `π̄1(α) - π̄2(α)` as a function of the model shape.
///
/// The quadratic in the denominator vanishes at `α = 1` and factors as
/// `(1-α)(ρ + β/(1-β) - αβ(ρ-1))`; the common `(1-α)` is cancelled, so the
/// value is finite up to and including `α = 1`, where it equals the
/// stationary gap.
pub fn mf_gap(shape: ModelShape, m: usize, alpha: f64) -> f64 {
    let ModelShape { rho, beta } = shape;
    let c0 = rho + beta / (1.0 - beta);
    alpha * (rho - 1.0) * (1.0 - alpha * beta) / (m as f64 * (c0 - alpha * beta * (rho - 1.0)))
}

/// The gap written with the uncancelled quadratic denominator.
pub fn mf_gap_expanded(shape: ModelShape, m: usize, alpha: f64) -> f64 {
    let ModelShape { rho, beta } = shape;
    let r = beta / (1.0 - beta);
    let den = alpha * alpha * beta * (rho - 1.0) - alpha * (rho * beta + rho + beta * r) + rho + r;
    alpha * (1.0 - alpha) * (rho - 1.0) * (1.0 - alpha * beta) / (m as f64 * den)
}

/// Maximizer of the mean-field gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalAlpha {
    pub alpha: f64,
    /// True when the unconstrained root exceeds 1 and the result was clamped.
    pub clamped: bool,
}

/// `min(1, (x - √x) / (β(1-β)(ρ-1)))` with `x = ρ - β(ρ-1)`.
pub fn optimal_alpha(shape: ModelShape) -> Result<OptimalAlpha> {
    if !(shape.rho > 1.0) {
        return Err(Error::InvalidShape(format!(
            "rho = {} must exceed 1",
            shape.rho
        )));
    }
    ModelShape::new(shape.rho, shape.beta)?;
    let ModelShape { rho, beta } = shape;
    let x = rho - beta * (rho - 1.0);
    let root = (x - x.sqrt()) / (beta * (1.0 - beta) * (rho - 1.0));
    let alt = optimal_alpha_sqrt_form(shape);
    // x - √x cancels as x → 1; widen by that condition number.
    let conditioning = x / (x - x.sqrt());
    debug_assert!(
        (root - alt).abs() <= 1e-12 * alt.max(1.0) * conditioning,
        "closed forms disagree: {root} vs {alt}"
    );
    Ok(OptimalAlpha {
        alpha: root.min(1.0),
        clamped: root > 1.0,
    })
}

/// The equivalent unclamped form `√x / (β(1 + √x))`.
pub fn optimal_alpha_sqrt_form(shape: ModelShape) -> f64 {
    let sx = shape.x().sqrt();
    sx / (shape.beta * (1.0 + sx))
}

/// Expected conductance of the community, with `κ = m/n` and `ρ = q/p`:
/// `κ(1-κ) / (min(κ²ρ, (1-κ)²) + κ(1-κ))`.
pub fn mean_conductance_community(kappa: f64, rho: f64) -> f64 {
    let cross = kappa * (1.0 - kappa);
    cross / ((kappa * kappa * rho).min((1.0 - kappa) * (1.0 - kappa)) + cross)
}

/// Expected conductance of a set holding a fraction `gamma` of the nodes and
/// containing a community of fraction `kappa` whose density is `(1+c)p`.
pub fn mean_conductance_superset(gamma: f64, kappa: f64, c: f64) -> f64 {
    let cross = gamma * (1.0 - gamma);
    cross / ((gamma * gamma + kappa * kappa * c).min((1.0 - gamma) * (1.0 - gamma)) + cross)
}

/// Grid step of [`min_conductance_gamma`].
pub const GAMMA_GRID_STEP: f64 = 1e-4;

/// Minimizes [`mean_conductance_superset`] over the grid `γ = i·10⁻⁴ ∈ (κ, 1)`.
///
/// Returns `(γ*, value)`; the smallest `γ` wins ties. Only supersets of the
/// community are scanned.
pub fn min_conductance_gamma(kappa: f64, c: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&kappa) || !(c >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "need 0 <= kappa < 1 and c >= 0, got kappa={kappa} c={c}"
        )));
    }
    let steps = (1.0 / GAMMA_GRID_STEP).round() as usize;
    let mut best: Option<(f64, f64)> = None;
    for i in 1..steps {
        let gamma = i as f64 * GAMMA_GRID_STEP;
        if gamma <= kappa {
            continue;
        }
        let value = mean_conductance_superset(gamma, kappa, c);
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((gamma, value));
        }
    }
    best.ok_or_else(|| Error::OutOfRange(format!("no grid point in ({kappa}, 1)")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, m: usize, k: usize, p: f64, q: f64) -> PlantedGraphConfig {
        PlantedGraphConfig::new(n, m, k, p, q, 0).unwrap()
    }

    #[test]
    fn alpha_zero_puts_all_mass_on_seeds() {
        let c = cfg(100, 20, 4, 0.1, 0.3);
        for mf in [
            mean_field_ppr(&c, 0.0).unwrap(),
            mean_field_solve_3x3(&c, 0.0).unwrap(),
        ] {
            assert_eq!((mf.pi0, mf.pi1, mf.pi2), (0.25, 0.0, 0.0));
        }
    }

    #[test]
    fn equal_densities_give_equal_blocks() {
        let mf = mean_field_ppr(&cfg(100, 20, 4, 0.2, 0.2), 0.6).unwrap();
        assert!((mf.pi1 - mf.pi2).abs() < 1e-15);
    }

    #[test]
    fn invariants_hold() {
        let c = cfg(1000, 200, 10, 0.05, 0.1);
        let mf = mean_field_ppr(&c, 0.85).unwrap();
        assert!((mf.total_mass() - 1.0).abs() < 1e-12);
        assert!((mf.pi0 - mf.pi1 - 0.15 / 10.0).abs() < 1e-12);
        assert!(mf.pi1 > mf.pi2);
        let direct = mean_field_solve_3x3(&c, 0.85).unwrap();
        let (a, b) = mean_field_system(&c, 0.85);
        let residual = a * Vector3::new(direct.pi0, direct.pi1, direct.pi2) - b;
        assert!(residual.amax() < 1e-12);
    }

    #[test]
    fn whole_graph_as_community_is_uniform() {
        let mf = mean_field_ppr(&cfg(50, 50, 50, 0.3, 0.3), 0.7).unwrap();
        let v = mf.expand();
        assert!(v.values.iter().all(|&x| (x - 1.0 / 50.0).abs() < 1e-15));
    }

    #[test]
    fn expand_block_layout() {
        let mf = mean_field_ppr(&cfg(10, 4, 2, 0.2, 0.5), 0.5).unwrap();
        let v = mf.expand();
        assert_eq!(v.len(), 10);
        for i in 0..10 {
            assert_eq!(v.values[i], mf.value_at(i));
        }
        assert_eq!(v.values[1], mf.pi0);
        assert_eq!(v.values[2], mf.pi1);
        assert_eq!(v.values[3], mf.pi1);
        assert_eq!(v.values[4], mf.pi2);
        assert!((v.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            mean_field_ppr(&cfg(10, 4, 2, 0.0, 0.5), 0.5),
            Err(Error::DegenerateModel(_))
        ));
        assert!(mean_field_ppr(&cfg(10, 4, 2, 0.1, 0.5), 1.0).is_err());
        assert!(ModelShape::new(0.0, 0.5).is_err());
        assert!(ModelShape::new(2.0, 1.0).is_err());
        assert!(matches!(
            optimal_alpha(ModelShape::new(1.0, 0.5).unwrap()),
            Err(Error::InvalidShape(_))
        ));
        assert!(min_conductance_gamma(1.0, 0.5).is_err());
        assert!(min_conductance_gamma(0.2, -1.0).is_err());
    }

    #[test]
    fn gap_trivial_cases() {
        let s = ModelShape::new(3.0, 0.7).unwrap();
        assert_eq!(mf_gap(s, 100, 0.0), 0.0);
        let flat = ModelShape::new(1.0, 0.7).unwrap();
        for a in [0.1, 0.5, 0.9, 0.999] {
            assert_eq!(mf_gap(flat, 100, a), 0.0);
        }
        for a in [0.05, 0.3, 0.6, 0.95] {
            let (x, y) = (mf_gap(s, 100, a), mf_gap_expanded(s, 100, a));
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn optimal_alpha_grows_with_rho() {
        let a2 = optimal_alpha(ModelShape::new(2.0, 0.7).unwrap()).unwrap();
        let a4 = optimal_alpha(ModelShape::new(4.0, 0.7).unwrap()).unwrap();
        assert!(a4.alpha > a2.alpha);
    }

    #[test]
    fn optimal_alpha_clamps_for_large_communities() {
        let r = optimal_alpha(ModelShape::new(5.0, 0.1).unwrap()).unwrap();
        assert!(r.clamped);
        assert_eq!(r.alpha, 1.0);
    }

    #[test]
    fn community_conductance_values() {
        assert!((mean_conductance_community(0.2, 2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((mean_conductance_community(0.5, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn min_conductance_set_without_community_is_half() {
        let (gamma, value) = min_conductance_gamma(0.2, 0.0).unwrap();
        assert!((gamma - 0.5).abs() < 1e-12);
        assert!((value - 0.5).abs() < 1e-12);
        let (gamma, _) = min_conductance_gamma(0.2, 0.5).unwrap();
        assert!(gamma < 0.5);
    }
}
