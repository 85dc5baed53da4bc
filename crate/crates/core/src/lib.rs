//! Quantum-annealing encodings of the travelling salesman problem, with exact
//! oracles, classical and path-integral annealers, the iterative subtour
//! elimination loop, a statevector emulator of digital annealing and the
//! experiment harness that ties them together.

pub mod digital;
pub mod encoding;
pub mod error;
pub mod experiments;
pub mod instances;
pub mod oracles;
pub mod rng;
pub mod solvers;
pub mod subtour_loop;

pub use error::{Error, Result};
pub use instances::{generate_instance, City, Tour, TspInstance};

/// Crate version, reported by the CLI and stamped into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
