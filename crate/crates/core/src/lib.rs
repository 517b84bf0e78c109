//! Personalized PageRank on planted Erdős–Rényi graphs.
//!
//! The crate samples graphs with a planted dense community, computes exact,
//! truncated and mean-field Personalized PageRank, runs approximate push
//! clustering with a sweep cut, and measures how well the realized scores
//! concentrate around their mean-field values.
//!
//! ```
//! use pprlab::{graph::{sample_planted_er, PlantedGraphConfig}, ppr, mean_field};
//!
//! let config = PlantedGraphConfig::new(400, 80, 8, 0.05, 0.2, 7)?;
//! let graph = sample_planted_er(&config)?;
//! let nu = ppr::RestartVector::from_config(&config);
//! let scores = ppr::ppr(&graph, &nu, 0.8)?;
//! let top = ppr::rank_top(&scores.values, config.m)?;
//! let error = ppr::classification_error(&top, &config);
//! let mf = mean_field::mean_field_ppr(&config, 0.8)?;
//! assert!(mf.pi1 > mf.pi2);
//! assert!(error < 0.5);
//! # Ok::<(), pprlab::Error>(())
//! ```

pub mod appr;
pub mod diagnostics;
mod error;
pub mod experiment;
pub mod graph;
pub mod mean_field;
pub mod plot;
pub mod ppr;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/planted-graphs.md")]
    mod planted_graphs {}
    #[doc = include_str!("../../../book/src/ppr.md")]
    mod ppr {}
    #[doc = include_str!("../../../book/src/mean-field.md")]
    mod mean_field {}
    #[doc = include_str!("../../../book/src/push-clustering.md")]
    mod push_clustering {}
    #[doc = include_str!("../../../book/src/concentration.md")]
    mod concentration {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
