//! Sum-capacity bounds for random dense Gaussian interference networks.
//!
//! A network of `K` transmitter--receiver pairs is dropped at random into a
//! spatial region. Every cross-gain `INR_ij` follows from the geometry via a
//! path-loss law (optionally with multiplicative fading). This crate computes
//!
//! * an interference-alignment achievable **lower bound** on the sum capacity,
//!   `Σ_i ½·log₂(1 + 2·SNR_i)`,
//! * a geometric **upper bound** that partitions the joint TX--RX domain into
//!   grid boxes and matches links in paired boxes into two-user bottleneck
//!   channels ([`box_matching`]),
//! * a constructive **upper bound** that sorts links by SNR, builds bipartite
//!   graphs between adjacent SNR categories and runs maximum matching
//!   ([`snr_matching`]),
//!
//! plus the combinatorial and probabilistic machinery needed to check the
//! supporting concentration results empirically ([`matching_theory`],
//! [`experiments`]).
//!
//! See the `book/` directory for a guided tour; the `sumcap` binary exposes
//! every experiment as a CLI subcommand.

pub mod box_matching;
pub mod capacity_bounds;
pub mod cli;
pub mod experiments;
pub mod matching_theory;
pub mod net_model;
mod seeding;
pub mod snr_matching;

pub use seeding::derive_seed;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad quantile functions, non-positive counts, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Operation is not defined for this domain kind.
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    /// The two-user bottleneck bound was requested with INR_ji < SNR_j.
    /// Returning a number here would silently corrupt upper bounds.
    #[error("bottleneck hypothesis not met: INR_ji = {inr_ji} < SNR_j = {snr_j}")]
    HypothesisNotMet { snr_j: f64, inr_ji: f64 },

    /// Numeric argument outside the function's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

// Keep the book's code snippets compiling: every fenced Rust block in these
// chapters runs as a doctest.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(network_model, "../../../book/src/network-model.md");
    chapter!(rate_bounds, "../../../book/src/rate-bounds.md");
    chapter!(box_bound, "../../../book/src/box-bound.md");
    chapter!(snr_matching, "../../../book/src/snr-matching.md");
    chapter!(matching_theory, "../../../book/src/matching-theory.md");
    chapter!(experiments, "../../../book/src/experiments.md");
}
