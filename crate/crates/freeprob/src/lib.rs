//! Computational free probability.
//!
//! The crate is organized around the combinatorial and analytic sides of the
//! subject and the bridge between them:
//!
//! - [`partitions`]: the lattice of noncrossing partitions NC(n) — enumeration,
//!   refinement order, meet/join, Möbius function, Kreweras complement, and the
//!   permutation-orbit counts behind genus expansions.
//! - [`cumulants`]: free cumulants ↔ moments via NC-partition sums, free
//!   additive convolution and dilation on cumulant sequences, mixed moments of
//!   free pairs, and R-diagonal element calculus. Generic over the scalar, so
//!   the same code runs in `f64` and in exact big-rational arithmetic.
//! - [`measures`]: compactly supported spectral measures (atoms + gridded
//!   density), a zoo of standard laws (semicircle, free Poisson /
//!   Marchenko–Pastur, arcsine, Bernoulli, quarter-circular, truncated Cauchy),
//!   their moments, quantiles, histograms, and (de)serialization.
//! - [`transforms`]: Cauchy/Stieltjes transforms and their inversion,
//!   R-transform coefficients, analytic subordination, free additive
//!   convolution of measures, and continuous convolution powers.
//! - [`rmt`]: random-matrix experiments — GUE/Wigner sampling, Haar unitaries,
//!   genus expansions for GUE moments (exact and Monte-Carlo), randomly rotated
//!   sums, and eigenvalue statistics against their deterministic limits.
//!
//! Everything deterministic is exactly reproducible; everything random is
//! seeded and scheduler-independent.

pub mod cumulants;
mod error;
pub mod measures;
pub mod partitions;
pub mod rmt;
pub mod transforms;

pub use error::{Error, Result};
pub use measures::{Histogram, Measure};
pub use partitions::Partition;

/// Complex scalar used throughout the analytic modules.
pub type Complex64 = num_complex::Complex<f64>;

/// Configure the global thread pool from an explicit request or the
/// `FREEPROB_THREADS` environment variable (explicit wins; absent/zero means
/// "let the runtime decide"). Safe to call more than once: later calls are
/// no-ops once a pool exists.
pub fn configure_threads(requested: Option<usize>) {
    let from_env = std::env::var("FREEPROB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let n = requested.or(from_env).unwrap_or(0);
    if n > 0 {
        // Ignore the error: the pool can only be initialized once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
