//! Certified construction and analysis of singular self-similar measures for
//! the asymmetric two-map system `T1 x = b1 x`, `T2 x = b2 x + 1`.
//!
//! - [`ifs`]: parameters, words and their composed affine maps
//! - [`partition`]: level-`m` map-equality partitions and their entropy
//! - [`construction`]: the block recursion producing words `s != t` with
//!   `T_s = T_t`, and certified root isolation for the coincidence equation
//! - [`dimension`]: Lyapunov exponent, dimension bounds, singularity regimes
//! - [`sampler`]: Monte Carlo simulation of the self-similar measure
//!
//! Everything that feeds a singularity verdict is computed with
//! outward-rounded interval arithmetic ([`interval`]).

pub mod construction;
pub mod dimension;
pub mod error;
pub mod ifs;
pub mod interval;
pub mod partition;
pub mod sampler;
pub mod word;

pub use error::{Error, Result};
pub use ifs::{compose, pi_truncated, step_map, AffineContraction, Params};
pub use interval::Interval;
pub use word::{Symbol, SymbolWord};
