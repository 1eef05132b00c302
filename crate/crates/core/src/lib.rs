//! Reflector optics on the unit circle and sphere: the reflection map of a
//! radial reflector, its intensity form and principal intensities, closed-form
//! test shapes, a Monte Carlo ray tracer, and a homotopy solver for the
//! prescribed mean intensity equation.

mod error;
pub mod kummer;
pub mod raytrace;
pub mod shapes;
pub mod solver;
pub mod sphere;

pub use error::{Error, Result};
