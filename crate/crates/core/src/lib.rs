//! Learning dynamics for smooth monotone games.
//!
//! The crate implements the accelerated optimistic gradient (AOG) learner,
//! its step-size-adaptive variant, and the usual baselines (GD, OG, EG, EAG),
//! together with everything needed to measure them: exact Euclidean
//! projections and normal-cone residuals, game oracles, regret and
//! equilibrium-gap metrics, potential-function certificates, and an
//! experiment harness that writes CSV traces.
//!
//! Modules:
//! - [`geometry`]: feasible sets, projection, tangent residual, linearized gap.
//! - [`games`]: gradient oracles and the built-in instances.
//! - [`learners`]: the online learners behind one propose/update interface.
//! - [`metrics`]: per-round measurement, potential witnesses, rate certificates.
//! - [`verify`]: numeric checks of the descent identity, the sequence bound
//!   and the linear-regret construction for EAG.
//! - [`harness`]: self-play and adversarial runners, config files, CSV traces
//!   and log-log slope fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod games;
pub mod geometry;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod verify;

pub use error::{Error, Result};

/// Dense real vector used for actions, gradients and profiles.
pub type Vector = nalgebra::DVector<f64>;
