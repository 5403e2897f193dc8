//! Static analysis of the parallel complexity (span) of pi-calculus
//! processes, following a sized-types-with-usages discipline, together with
//! an exhaustive-exploration span oracle that validates typed bounds on
//! closed processes.

pub mod deriv;
pub mod harness;
pub mod index;
pub mod lexer;
pub mod process;
pub mod registry;
pub mod semantics;
pub mod types;
pub mod usage;
