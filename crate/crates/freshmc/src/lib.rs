//! Model checking for a recursive Hennessy-Milner logic with fresh-name
//! quantification, interpreted over the configuration graphs of
//! fresh-register automata.
//!
//! The pipeline: parse a model and a closed formula, eliminate negation,
//! build the history-bounded parity game quotiented by renaming of names,
//! and solve it with a Zielonka-style recursion. A finite-pool denotational
//! evaluator ([`oracle`]) cross-checks verdicts on small instances.

pub mod fra;
pub mod frontend;
pub mod game;
pub mod logic;
pub mod nominal;
pub mod oracle;
pub mod solver;
