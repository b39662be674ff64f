//! Symbol calculus and harmonic-oscillator models for the Calderon projector
//! of the spin-C Dirac operator on a strictly pseudoconvex boundary.

pub mod audit;
pub mod dirac;
pub mod dump;
pub mod error;
pub mod exterior;
pub mod fock;
pub mod model;
pub mod pipeline;
pub mod residue;
pub mod scalar;
pub mod symbol;

pub use error::{CoreError, Result};
