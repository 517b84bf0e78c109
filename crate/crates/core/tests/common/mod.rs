#![allow(dead_code)]

use pprlab::graph::{sample_planted_er, Graph, PlantedGraphConfig};
use pprlab::rng::{rng_from_seed, stream_seed};
use rand::Rng;

/// A random small planted graph whose seeds all have at least one neighbor.
pub fn random_instance(master: u64, index: u64, n_lo: usize, n_hi: usize) -> (PlantedGraphConfig, Graph) {
    let mut rng = rng_from_seed(stream_seed(master, index));
    loop {
        let n = rng.random_range(n_lo..=n_hi);
        let m = rng.random_range(2..=n / 2);
        let k = rng.random_range(1..=m.min(10));
        let p: f64 = rng.random_range(0.02..0.3);
        let q = rng.random_range(p..=(3.0 * p).min(1.0));
        let config = PlantedGraphConfig::new(n, m, k, p, q, rng.random()).unwrap();
        let graph = sample_planted_er(&config).unwrap();
        if (0..k as u32).all(|s| graph.degree(s) > 0) {
            return (config, graph);
        }
    }
}

/// The fixed set of 50 instances with `n ∈ [20, 200]` shared by the oracle and push checks.
pub fn oracle_graph_set() -> Vec<(PlantedGraphConfig, Graph)> {
    (0..50).map(|i| random_instance(0x0AC1E, i, 20, 200)).collect()
}

pub const ORACLE_ALPHAS: [f64; 4] = [0.1, 0.5, 0.85, 0.99];

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
