//! Differentially private learning of large-margin halfspaces.
//!
//! Both learners reduce the dimension with a random `±1/sqrt(m)` matrix and
//! then learn in the projected space:
//!
//! * [`learners::learn_approx_dp`] is `(epsilon, delta)`-private and runs noisy
//!   projected subgradient descent on a scaled hinge loss, boosted by repeating
//!   it and privately choosing the best run.
//! * [`learners::learn_pure_dp`] is `(epsilon, 0)`-private and runs the
//!   exponential mechanism over a grid net of the projected unit ball.
//!
//! The [`packing`] module turns the matching lower-bound construction into
//! measurements. The crate is `no_std` and needs only `alloc`; all randomness
//! flows from explicit 64-bit seeds (see [`rng`]).

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod learners;
pub mod linalg;
pub mod loss;
pub mod netmech;
pub mod noisegd;
pub mod packing;
pub mod projection;
pub mod rng;

pub use data::{Dataset, ExampleSource, Hypothesis, Label, LabeledExample, MarginDistribution, Space};
pub use error::{Error, Result};
pub use learners::{learn_approx_dp, learn_pure_dp, LearnerConfig, LearnerMetadata, LearnerOutput};
pub use loss::SurrogateLoss;
pub use noisegd::PrivacyBudget;
pub use projection::ProjectionMatrix;
