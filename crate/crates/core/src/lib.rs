//! Heavy-tailed mean-field spin glass toolkit.
//!
//! Couplings follow a symmetric law with exact power-law tail
//! `P(|J| >= t) = c0 * t^(-alpha)` for `t > 1`, `alpha` in `(1, 2)`.
//! The crate provides
//!
//! * [`dist`]: the coupling law, its conditioned variants and closed-form moments,
//! * [`model`]: the full, truncated, fixed-edge, multi-edge and interpolated
//!   disorder instances together with the resampling moves that couple them,
//! * [`exact`]: exact partition functions and Gibbs averages by Gray-code
//!   enumeration, replica classes and the interpolation-step certificate,
//! * [`experiments`]: reproducible Monte Carlo audits producing
//!   [`experiments::ExperimentReport`]s.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod model;
pub mod stats;

pub use dist::{ConditionedSpec, TailLaw};
pub use error::{Error, Result};
pub use exact::{ExactSummary, ReplicaClasses, SpinConfig};
pub use model::{Edge, InterpolationState, ModelInstance, SplitInstance};
