//! A small Prolog engine: terms and substitutions, unification without an
//! occurs check, SLD resolution with rule traces, and an interactive proof
//! engine, plus the file-backed workspace store and HTTP service built on
//! top of them.

pub mod api;
pub mod corpus;
pub mod parser;
pub mod proof;
pub mod repl;
pub mod service;
pub mod solver;
pub mod store;
pub mod term;
pub mod unify;

pub use parser::{parse_program, parse_query, parse_rule, parse_term, ParseError, SourcePosition};
pub use proof::{NodeStatus, ProofError, ProofNode, ProofState};
pub use solver::{
    build_tree, solve, Budget, SearchTree, Solution, SolveOptions, SolveOutcome, SolveRun, Strategy, Trace, TraceStep,
};
pub use term::{Env, Program, Rule, SubstError, Term};
pub use unify::unify;
