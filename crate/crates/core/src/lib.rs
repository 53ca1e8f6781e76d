//! Finite completely normal distributive lattices and their representation
//! as lattices of open polyhedral cones.

pub mod arrangement;
pub mod builder;
pub mod defect;
pub mod diff;
pub mod error;
pub mod extension;
pub mod exact;
pub mod fixtures;
pub mod json;
pub mod lattice;

pub use error::{Error, Result};
