//! Online learning with pairwise losses over a finite buffer.
//!
//! The learner ([`learners::olp_run`]) sees a stream of labeled points once, keeps a
//! capacity-bounded [`sampling::Buffer`] of past points, and takes one projected
//! subgradient step per point against the buffered pairs. The crate also carries the
//! evaluation side: penalties and regret ([`losses`], [`eval`]), Rademacher bound
//! calculators ([`bounds`]), and Monte-Carlo checks of the buffer laws
//! ([`sampling::dist`]).

pub mod bounds;
pub mod data;
pub mod error;
pub mod eval;
pub mod learners;
pub mod linalg;
pub mod losses;
pub mod rng;
pub mod sampling;
pub mod types;

pub use error::{Error, Result};
pub use learners::{EnsembleTrace, LearnerConfig};
pub use losses::{LossKind, PairwiseLoss};
pub use rng::RandomSource;
pub use sampling::{AuxTrace, Buffer, Policy};
pub use types::{make_stream, Dataset, Hypothesis, LabeledPoint, TaskKind};
