//! Spectral toolkit for origin-symmetric convex bodies near the Euclidean ball.

pub mod body;
pub mod error;
pub mod experiments;
pub mod harmonics;
pub mod io;
pub mod jet;
pub mod ma_solver;
pub mod operators;
pub mod sphere;

pub use error::{Error, Result};
pub use harmonics::{analyze, synthesize, HarmonicCoeffs, Parity};
pub use sphere::{great_circle, GreatCircle, Point, SphericalGrid};
