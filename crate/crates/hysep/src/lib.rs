//! Workbench for separator and Craig-interpolant existence and construction in
//! hybrid modal logics: plain hybrid logic with nominals (`H`), with the
//! `@`-operator (`H@`), with the universal modality (`H@U`), and the graded
//! variants of all three (`G`, `G@`, `G@U`).
//!
//! The crate is organised around one pipeline:
//!
//! * [`syntax`] — hash-consed formula DAGs, parsing/printing, signatures,
//!   closures, and the interpolant↔separator reduction;
//! * [`semantics`] — finite Kripke models, model checking, σ-bisimulations,
//!   and brute-force oracles used to validate everything else;
//! * [`types`] + [`sat`] — Hintikka types over a closure and the
//!   type-elimination satisfiability/entailment engine;
//! * [`warmup`] — the singleton-mosaic separator procedure for the case where
//!   all nominals are shared, plus first-order separator export;
//! * [`hyper`] — hypermosaic elimination (reference and search engines) and
//!   the separator-existence decision;
//! * [`graded`] — counting functions, the feasibility checks behind graded
//!   witnesses, and graded star-types;
//! * [`hypersep`] — hyperseparators: round-based construction and compilation
//!   of actual separator formulas;
//! * [`bench`] — generators for the formula families used as corpus inputs.
//!
//! Every engine that searches under a budget reports three outcomes (yes /
//! no / unknown); `unknown` is never conflated with `no`.

pub mod error;
pub mod sat;
pub mod semantics;
pub mod simplify;
pub mod syntax;
pub mod types;
pub mod warmup;

pub use error::{EngineError, ParseError};
pub use syntax::{Base, FormulaId, FormulaStore, LogicId, Signature, SymId};
