//! Numerical laboratory for secular functions of Dirac operators and the
//! stochastic zeta function of the Sine_β process.

pub mod circular;
pub mod dirac;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod moments;
pub mod ode;
pub mod oracles;
pub mod quad;
pub mod run;
pub mod sde;
pub mod secular;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
