//! Stiff integration of ODEs, DAEs and DDEs with distributed-delay terms.
//!
//! Convolution kernels built from power laws (gamma and Pareto densities)
//! are replaced by sums of exponentials, which turns the integral term into
//! a chain of linear auxiliary ODEs. The augmented system is integrated by
//! a three-stage Radau IIA method whose Newton systems are solved with a
//! structure-exploiting elimination of the auxiliary blocks.

pub mod driver;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod radau;
pub mod specfun;

pub use error::{Error, Result};
