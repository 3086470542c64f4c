//! Bond percolation on the binary hypercube Q^d.
//!
//! - [`hypercube`]: vertex and edge indexing of Q^d.
//! - [`sampler`]: keyed, reproducible edge sampling and two-round
//!   (sprinkled) exposure.
//! - [`components`]: union-find labeling, capped exploration, and the
//!   component statistics (giant fraction, size gap, W-set coverage).
//! - [`theory`]: the fixed-point law `y = 1 - exp(-c y)`, component-size
//!   bounds, binomial tails, Galton-Watson extinction.
//! - [`oracles`]: exhaustive checks for tiny instances.
//! - [`experiments`]: Monte Carlo studies with CSV/JSON reports.

pub mod components;
pub mod error;
pub mod experiments;
pub mod hypercube;
pub mod oracles;
pub mod sampler;
pub mod theory;

pub use error::{Error, Result};
pub use hypercube::{CubeGraph, EdgeRef, Vertex};
pub use sampler::{EdgeSample, OpenEdges, SampleKey};
