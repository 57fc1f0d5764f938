//! Radial shooting solver for the p-Laplace equation
//! `div(|grad u|^(p-2) grad u) + f(u) = 0` on R^N with a superlinear,
//! subcritical nonlinearity.
//!
//! Radial solutions satisfy the singular initial value problem
//! `(r^(N-1) phi_p(u'))' + r^(N-1) f(u) = 0`, `u(0) = lambda`, `u'(0) = 0`.
//! This crate integrates that problem, tracks trajectories in generalized
//! polar coordinates to count sign changes, and runs the bisection search
//! that locates initial amplitudes `lambda_k` whose solutions have exactly
//! `k` nodes and compact support. It also certifies the qualitative
//! machinery behind the search numerically: monotone energy decay, the
//! angular-velocity lower bound, the barrier comparison that forces compact
//! support, and closed-form brackets for the support size.
//!
//! The `examples/` directory contains one runnable program per capability;
//! the `plshoot` binary exposes the same operations as subcommands that
//! emit CSV/JSON artifacts.

// Validations are written as negated comparisons so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod ivp;
pub mod model;
pub mod num;
pub mod polar;
pub mod ptrig;
pub mod shoot;

pub use error::{Error, Result};
pub use ivp::{Event, EventKind, PhaseState, ProblemParams, StopReason, Tolerances, Trajectory};
pub use model::{Landmarks, Nonlinearity, RotationCertificate};
pub use ptrig::{half_period, PExponent, PTrig, PolarState};
