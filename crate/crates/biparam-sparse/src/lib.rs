//! Bi-parameter dyadic harmonic analysis on the unit square, built around
//! constructive sparse domination.
//!
//! The crate provides, bottom to top:
//!
//! - [`dyadic`] / [`cells`] / [`gridfn`]: shifted dyadic grids on the torus,
//!   exact cell-count measures, and piecewise-constant functions;
//! - [`haar`] / [`oneparam`]: tensor and one-dimensional Haar transforms;
//! - [`operators`]: martingale transforms, cancellative dyadic shifts, plain
//!   and shifted square functions, strong maximal functions;
//! - [`weights`]: A_p and A_∞ characteristics and weighted norms;
//! - [`sparse`]: the level-set decomposition, Córdoba–Fefferman selection,
//!   sparse forms, and both sparsity verifiers;
//! - [`stopping`] / [`covering`]: the one-parameter stopping-time sparse
//!   bound and the rectangle covering algorithm with its slice diagnostics.
//!
//! Everything that feeds a sparsity check is exact: measures are integer
//! cell counts, and float thresholds such as β are compared through
//! [`exact::cmp_frac_vs_f64`] without rounding. All randomness flows through
//! the seeded generator in [`rng`], so every experiment is replayable.

pub mod cells;
pub mod covering;
pub mod dyadic;
pub mod error;
pub mod exact;
pub mod gridfn;
pub mod haar;
pub mod oneparam;
pub mod operators;
pub mod rng;
pub mod sparse;
pub mod stopping;
pub mod weights;

pub use cells::CellSet;
pub use dyadic::{AxisGrid, DyadicInterval, DyadicRectangle, ProductGrid};
pub use error::{Error, Result};
pub use gridfn::GridFunction;
pub use haar::HaarCoefficients;
pub use weights::Weight;
