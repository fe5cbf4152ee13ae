//! Agnostic ReLU regression.
//!
//! Two learners are provided. [`surrogate`] runs (projected) gradient descent on the
//! convex surrogate loss `E[σ̃(⟨w,x⟩) − y⟨w,x⟩]`, whose gradient is the gap between
//! model and label Chow parameters; it reaches `O(opt) + ε` square loss. [`ptas`]
//! refines that solution by splitting space into three slabs around the learned
//! direction and fitting zero, a multivariate polynomial, and a linear function on them.
//! [`poly_approx`] holds the univariate approximation theory behind the middle slab,
//! [`data`] the synthetic workloads and [`harness`] the config-driven runner behind the
//! `relu-regress` binary.

pub mod data;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod poly_approx;
pub mod ptas;
pub mod surrogate;

pub use error::{Error, Result};
