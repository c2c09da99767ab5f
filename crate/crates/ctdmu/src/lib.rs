//! A workbench for the countdown mu-calculus: the modal mu-calculus extended
//! with ordinal-bounded fixpoint operators `mu^a` / `nu^a` that denote the
//! a-th approximant of the corresponding fixpoint chain.
//!
//! The crate provides:
//!
//! - [`ordinal`]: Cantor-normal-form arithmetic below `w^w` and the extended
//!   order with `inf`;
//! - [`syntax`]: the vectorial formula AST, parser, printer, and structural
//!   transformations (dual, hat, successor elimination, guarding inputs);
//! - [`model`]: finite labeled transition systems, valuations, and the model
//!   generators used throughout the test suites;
//! - [`semantics`]: the inductive evaluator over finite models together with
//!   approximant chains, model checking, and a bounded satisfiability search;
//! - [`automata`]: countdown automata and the translations between formulas
//!   and automata, guardedness analysis, and the guarding transformation;
//! - [`games`]: countdown games, their configuration dynamics, and a solver
//!   for finite models based on counter truncation and attractor
//!   decomposition, with strategy extraction;
//! - [`ordeval`]: a symbolic evaluator over ordinal linear models using
//!   interval sets, plus the stabilization-bound recursion;
//! - [`regress`]: the regression suites wired into both `cargo test` and the
//!   `ctdmu regress` subcommand.

pub mod automata;
pub mod games;
pub mod model;
pub mod ordeval;
pub mod ordinal;
pub mod regress;
pub mod rng;
pub mod semantics;
pub mod syntax;

pub use automata::CountdownAutomaton;
pub use games::{Configuration, CountdownGame, SolveResult};
pub use model::{Lts, Valuation};
pub use ordinal::{CountdownBound, Ordinal};
pub use syntax::Formula;
