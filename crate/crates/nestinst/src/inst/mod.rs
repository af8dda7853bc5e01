//! Instantiation procedures: the base-complete schemes and the target-side
//! contract.

pub mod automata;
pub mod membership;
pub mod presburger;
pub mod target;

pub use automata::{emptiness_witness, intersect, TreeAutomaton};
pub use presburger::{chi_axioms, compute_pool, theta_z, validate_fragment, GroundPool, PresburgerFragment};
pub use target::{
    hyperlink_round, HyperLinking, Identity, InstantiationOutcome, Provenance, TargetProcedure,
    TerminationClass,
};
