//! Numerical laboratory for norm inflation of the 3D incompressible
//! Navier-Stokes equations in the critical Besov space `B^{-1,inf}_inf`.
//!
//! The crate is organised bottom-up:
//!
//! * [`construction`] builds the lacunary frequency family and the initial datum.
//! * [`calculus`] is an exact calculus on trigonometric vector fields with
//!   exponential time profiles (heat flow, advection, Leray projection,
//!   Duhamel integration) and computes the first Picard iterate.
//! * [`norms`] estimates the Besov, Koch-Tataru `X_T` and `BMO^{-1}` norms.
//! * [`solver`] is a periodic pseudospectral Navier-Stokes solver.
//! * [`experiments`] orchestrates sweeps, scaling fits and the inflation run.
//!
//! Everything lives on the 2π-periodic torus with integer wavevectors.

pub mod calculus;
pub mod construction;
pub mod error;
pub mod experiments;
pub mod norms;
pub mod solver;
pub mod vec3;

pub use error::{Error, Result};
