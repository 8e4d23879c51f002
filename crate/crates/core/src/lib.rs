//! Analysis of delayed mass-action reaction networks: structure, complex
//! balanced equilibria, linear-conjugate realizations, delay-differential
//! simulation and Lyapunov diagnostics.

pub mod conjugacy;
pub mod diagnostics;
pub mod dsl;
pub mod equilibrium;
pub mod error;
pub mod field;
pub mod functional;
pub mod history;
pub mod lcdcb1;
pub mod linalg;
pub mod network;
pub mod rational;
pub mod segment;
pub mod simulate;
pub mod structure;

pub use error::{Error, Result};
pub use network::{Complex, Network, Reaction};
