//! Optimal control with a Mittag-Leffler (fractional) discount rate.
//!
//! The running cost of an infinite-horizon problem is weighted by
//! `E_α(λ(τ−t)^α)` instead of `e^{λ(τ−t)}`. This crate provides
//!
//! - [`specfun`]: Gamma and the one- and two-parameter Mittag-Leffler
//!   functions, and the discount kernel built from them;
//! - [`defect`]: quadrature of the semigroup defect `ΔE_α(t, s)` that
//!   replaces the exponential's `e^{λ(t+s)} = e^{λt} e^{λs}`;
//! - [`fracderiv`]: the L1 fractional derivative, the first-order composite
//!   expansion and the amplitude `A(α)` of the fractional HJB term;
//! - [`hjb`]: grid solvers for the classical and fractional
//!   Hamilton-Jacobi-Bellman equations, forward cost evaluation and the
//!   discounted scalar LQR reference solution.
//!
//! With `α = 1` everything reduces to ordinary exponential discounting.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod defect;
pub mod error;
pub mod fracderiv;
pub mod hjb;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use specfun::DiscountSpec;
