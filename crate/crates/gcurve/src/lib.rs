//! Numerical laboratory for a cutoff mean-curvature front equation with a
//! non-negative source: a monotone explicit solver on the flat torus, a
//! first-order Godunov solver for the radially symmetric reduction, the
//! optimal-control value function realized by semi-Lagrangian dynamic
//! programming with a brute-force oracle, and verification tooling for the
//! large-time and regularity properties of the solutions.
//!
//! Start from the runnable examples (`cargo run --example ...`) or the CLI
//! (`gcurve <mode> --config <file>`).

// `!(x > 0.0)` is the NaN-rejecting positivity guard used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod control;
pub mod error;
pub mod expr;
pub mod model;
pub mod output;
pub mod periodic;
pub mod radial;
pub mod runner;

pub use error::{Error, Result};

/// Cap the data-parallel worker count from the GCURVE_THREADS environment
/// variable. Results are identical for any value; this only bounds the
/// thread pool. Silently keeps the default pool when unset or invalid, or
/// when a pool was already built.
pub fn init_thread_pool_from_env() {
    if let Ok(v) = std::env::var("GCURVE_THREADS") {
        if let Ok(k) = v.trim().parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}
