//! Numerical laboratory for the soliton of the one-dimensional nonlinear
//! Klein–Gordon equation `u_tt − u_xx + u − |u|^{p−1}u = 0`, `5/3 < p ≤ 2`,
//! restricted to even solutions.

pub mod banded;
pub mod config;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod linalg;
pub mod multiplier;
pub mod norms;
pub mod params;
pub mod profile;
pub mod run;
pub mod scattering;
pub mod shooting;
pub mod spectrum;
pub mod virial;
pub mod weights;

pub use error::{NlkgError, Result};
pub use grid::{inner, omega, ComplexPair, Field, Grid, Parity, StatePair};
pub use params::ModelParams;
