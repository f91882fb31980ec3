//! Shift spaces over free groups and free semigroups.
//!
//! The crate covers:
//!
//! * reduced words, word-metric balls and their geodesic trees ([`freegroup`]);
//! * finite patterns and window partitions of `K^G` ([`patterns`]);
//! * Bernoulli and tree-indexed Markov measures with exact marginals ([`measures`]);
//! * the ball coding `φ`, the reconstruction map `ψ`, Markovization, finite-ball checks
//!   that the Markov support lies in the image of `φ`, and support-gap search for general
//!   sliding-block codes ([`coding`]);
//! * exact partition entropy, conditional entropy, the free-group `F` quantity and the
//!   `P_n` counterexample table ([`entropy`]).
//!
//! Probabilities are generic over [`Scalar`]; the aliases below fix the exact rational
//! instantiation used by the command-line tool.

pub mod budget;
pub mod coding;
pub mod entropy;
pub mod error;
pub mod freegroup;
pub mod logform;
pub mod measures;
pub mod patterns;
pub mod scalar;

pub use budget::{Budget, DEFAULT_BUDGET};
pub use error::{Error, Result};
pub use freegroup::{GroupSpec, Letter, Mode, SiteSet, Word};
pub use patterns::{Alphabet, Pattern, WindowPartition};
pub use entropy::{EntropyValue, Unit};
pub use scalar::Scalar;

pub use num_rational::BigRational;

/// Exact probabilities.
pub type Rational = BigRational;
pub type ExactMeasure = measures::MeasureSpec<Rational>;
pub type ExactTransitionSystem = measures::TransitionSystem<Rational>;
pub type FloatMeasure = measures::MeasureSpec<f64>;
pub type FloatTransitionSystem = measures::TransitionSystem<f64>;
