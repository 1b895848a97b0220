//! Numerical toolkit for the curvature equation `Δu + eᵘ = 8π(δ₀ + δ_{ω_k/2})` on flat tori.

pub mod atlas;
pub mod classify;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod hecke;
pub mod modular;
pub mod ode;
pub mod spectral;

pub use config::Config;
pub use elliptic::{theta1, theta1_derivatives_at_zero, ComplexPoint, LatticeContext, Quarter, Tau, WpValues};
pub use error::{Error, Result};
pub use hecke::{hecke_z, KIndex};
pub use modular::GammaMatrix;
pub use num_complex::Complex64;
