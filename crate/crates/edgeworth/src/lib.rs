//! Edgeworth-type density expansions with fractional moment orders.
//!
//! The crate builds the constructive machinery around Edgeworth expansions of
//! densities of normalized i.i.d. sums: moment/cumulant conversions, the
//! expansion polynomials and density correction terms, Fourier-side
//! approximants, Liouville fractional integrals/derivatives on the half-axis,
//! the binomial smoothing decomposition for unbounded densities, and
//! grid-convolution / Fourier-inversion oracles used to measure convergence
//! rates empirically.

pub mod combinatorics;
pub mod config;
pub mod cumulants;
pub mod charfun;
pub mod error;
pub mod expansion;
pub mod fractional;
pub mod grid;
pub mod poly;
pub mod quad;
pub mod series;
pub mod smoothing;

pub use error::{Error, Result};
