pub mod ac;
pub mod bifurcation;
pub mod cache;
pub mod cli;
pub mod contour;
pub mod dispersion;
pub mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod params;
pub mod quadrature;
pub mod waves;

pub use error::{Error, Result};
pub use params::ModelParams;
