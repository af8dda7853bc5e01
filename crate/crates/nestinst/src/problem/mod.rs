//! Problem-file surface syntax: reader, resolver and printer.

pub mod parse;
pub mod print;
pub mod sexpr;

pub use parse::parse_problem;
pub use print::{print_clause, print_literal, print_problem, print_term};
