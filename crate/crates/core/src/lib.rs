//! Idempotent aggregation functions on finite lattices.
//!
//! * [`lattice`]: finite bounded lattices with precomputed operation tables.
//! * [`functable`]: `n`-ary functions as value tables, predicates and enumeration.
//! * [`generators`]: the χ, ι, μ and ⊕ families, majorants and decompositions.
//! * [`terms`]: term trees over generators, evaluation and s-expression I/O.
//! * [`clone`]: bounded composition closure and generation checks.

pub mod clone;
pub mod functable;
pub mod generators;
pub mod lattice;
pub mod terms;

pub use clone::{closure, closure_with, verify_generation, CloneError, ClosureOptions, ClosureReport, VerifyReport};
pub use functable::{compose, enumerate_class, for_each_in_class, EnumBudget, FnClass, FnKey, FnTable, TableError};
pub use generators::{decompose_id, decompose_id_reduced, GenError, GeneratorSpec, MajorantIndex};
pub use lattice::{Elem, Lattice, LatticeError};
pub use terms::{Expr, Term, TermError};
