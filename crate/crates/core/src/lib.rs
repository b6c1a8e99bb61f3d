pub mod colouring;
pub mod coset;
pub mod covering;
pub mod decomposer;
pub mod error;
pub mod group;
pub mod lattice;
pub mod product;
pub mod render;
pub mod trace;
pub mod verifier;

pub use error::{Error, Result};
pub use group::{GeneratorSet, GroupElement, GroupSpec};
