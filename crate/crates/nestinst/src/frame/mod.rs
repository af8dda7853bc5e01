//! Executable theory specifications and the clause-set preprocessing passes.

pub mod copy;
pub mod linear;
pub mod passes;
pub mod shift;
pub mod spec;

pub use copy::copy_sorts;
pub use linear::{canon_literal, normalize_linear, LinearForm};
pub use passes::{eliminate_store, eval_ground_literal, normalize_literals, unprime};
pub use shift::{shift, shiftability_check, Lambda};
pub use spec::{
    atom_level, classify_literal, decompose, diamond_ground_clause, le_literal, lt_literal,
    validate_omega_b, validate_omega_n, validate_problem, BaseLevel, BaseScheme, DecomposedClause,
    LeafScheme, LitClass, Problem, TheoryStack,
};
