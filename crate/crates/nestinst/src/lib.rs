//! Satisfiability of quantified clause sets over hierarchic theory
//! combinations by mechanically combined instantiation schemes: the target
//! scheme instantiates the upper theory, the base scheme's finite pool
//! grounds the rest, and the resulting equisatisfiable ground set goes to a
//! bounded model finder or an external SMT solver.

pub mod backend;
pub mod combine;
pub mod core;
pub mod error;
pub mod frame;
pub mod inst;
pub mod pipeline;
pub mod problem;

pub use error::{Error, Result};
