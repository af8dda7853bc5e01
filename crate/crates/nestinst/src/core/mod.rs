//! Multi-sorted term, literal and clause vocabulary shared by every stage.

pub mod signature;
pub mod subst;
pub mod term;
pub mod unify;

pub use signature::{FuncDecl, FuncId, FuncKind, Signature, SortDecl, SortId, SortKind};
pub use subst::{b_ground_instance, decompose_ground_subst, BMapping, Substitution};
pub use term::{Clause, Literal, Term, Var};
pub use unify::{match_clause, match_term, mgu};
