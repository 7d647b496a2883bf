//! Exact engine for the multispecies TASEP on a ring.
//!
//! The crate computes stationary distributions of the multispecies TASEP two
//! independent ways — multiline-queue enumeration and an exact rational
//! null-space solve of the Markov generator — and checks closed-form
//! correlation identities against them with exact rational arithmetic. It
//! also runs the associated n-core growth process and measures grown shapes
//! against their piecewise-linear limit curve.
//!
//! Module layout:
//!
//! - [`combinatorics`]: exact integers/rationals, binomials, Narayana numbers
//! - [`ssyt`]: constrained semistandard-tableau counting plus a brute-force
//!   generator used as the counting oracle
//! - [`mlq`]: multiline queues, the bully-path projection and exact
//!   stationary laws by queue counting
//! - [`tasep`]: the Markov chain itself — generator, exact solve, and
//!   continuous-time Monte Carlo
//! - [`correlations`]: closed-form correlation formulas, the projection
//!   principle, and the verification/conjecture harness
//! - [`limits`]: the walk direction vector, n-core growth and the
//!   limit-shape distance

pub mod combinatorics;
pub mod correlations;
pub mod limits;
pub mod mlq;
pub mod ssyt;
pub mod tasep;

pub use combinatorics::{binom, narayana, BigInt, Rational};
pub use mlq::{ExactDist, MultilineQueue, Sector, Word};
