//! Subharmonic coexistence states of the piecewise-forced periodic
//! predator-prey system
//!
//! ```text
//! u' = alpha(t) u (1 - v),    v' = beta(t) v (-1 + u),
//! ```
//!
//! where `alpha` vanishes on the second half-period and `beta` on the first.
//! With equal forcing integrals the nT-periodic states are zeros of a family
//! of nested-exponential maps whose linearizations along the trivial state
//! form an integer polynomial chain. This crate computes that chain exactly,
//! isolates and certifies its positive roots (the bifurcation set), evaluates
//! the Poincare maps and fixed-point functions under adaptive-precision
//! interval arithmetic, and traces the global solution branches into a
//! bifurcation atlas.
//!
//! Modules follow the pipeline:
//!
//! - [`polychain`]: exact integer polynomial chain, two independent builders,
//!   structural verification.
//! - [`roots`]: Sturm-certified isolation, refinement, and interlacing of the
//!   positive roots.
//! - [`interval`]: directed-rounding arbitrary-precision interval scalar.
//! - [`poincare`]: nested exponentials, Poincare maps, fixed-point functions,
//!   and the closed-form trajectory oracle.
//! - [`twoperiodic`]: the general two-parameter (A, B) analysis of
//!   period-doubled states: exact multiplicity, pitchfork data, global curve.
//! - [`continuation`]: local expansion coefficients, pseudo-arclength branch
//!   tracing, the atlas, and order-existence queries.
//! - [`svg`]: self-contained SVG renderings of the standard diagrams.
//! - [`suite`]: the randomized property suite behind `check`.

pub mod continuation;
pub mod interval;
pub mod poincare;
pub mod polychain;
pub mod prng;
pub mod roots;
pub mod suite;
pub mod svg;
pub mod twoperiodic;

pub use interval::{Interval, IntervalError, IvCtx, PrecisionPolicy};
pub use polychain::{Chain, IntPolynomial};

