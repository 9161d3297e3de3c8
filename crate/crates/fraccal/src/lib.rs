//! fraccal — fractional-calculus approximation toolbox.
//!
//! The crate builds finite-difference approximations of the Caputo
//! derivative D^α y (0 < α < 1) as explicit weight vectors, applies them to
//! sampled functions, solves scalar and 2×2 linear fractional differential
//! equations with them, and reproduces convergence tables (maximum error and
//! empirical order under step halving).
//!
//! Module map:
//! - [`specfun`]: Γ, ψ, ζ, Mittag-Leffler, real binomials.
//! - [`weights`]: every approximation scheme as a coefficient vector,
//!   including truncated (asymptotic-tail) and endpoint-corrected variants.
//! - [`approx`]: scheme application, exact/quadrature Caputo oracles,
//!   fractional integral, empirical order estimation.
//! - [`solver`]: one-step history recursions for y^(α) + L·y = f and the
//!   2×2 system analogue, with the order-2 starting step.
//! - [`cli`]: experiment specification, convergence-table driver, CSV and
//!   Markdown emission.
//!
//! The `parallel` feature (on by default) runs independent convergence cells
//! on a rayon pool; disabling it yields a dependency-free sequential build
//! with identical output.

// Frozen oracle values and published coefficient tables keep their full
// printed precision even where trailing digits exceed f64 resolution.
#![allow(clippy::excessive_precision)]
// Guards like `!(alpha > 0.0 && alpha < 1.0)` are deliberate: unlike the
// un-negated `alpha <= 0.0 || …` form they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index-based loops are kept where the index arithmetic mirrors the
// recurrence being implemented.
#![allow(clippy::needless_range_loop)]

pub mod approx;
pub mod cli;
pub mod error;
pub mod solver;
pub mod specfun;
pub mod weights;

pub use error::{Error, Result};
