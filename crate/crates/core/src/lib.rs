//! Spectral toolkit for probability distributions on flat tori: real
//! Laplace–Beltrami eigenbasis enumeration, symmetry-group projections,
//! coefficient estimators, Sobolev/MMD divergences with certified tails, and
//! a reproducible convergence-study harness.

pub mod dist;
pub mod divergence;
pub mod error;
pub mod estimators;
pub mod groups;
pub mod harness;
pub mod seeds;
pub mod spectral_sums;
pub mod spectrum;

pub use error::{Error, Result};
