//! Recurrence times of finite-dimensional quantum states: exact evolution in
//! the energy eigenbasis, fidelity and distance measures, theoretical bounds,
//! relevant-level truncation, torus and sphere geometry, and grid searches.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod search;
pub mod states;
pub mod truncation;
pub mod verify;

pub use error::{Error, Result};
