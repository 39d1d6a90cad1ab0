//! Finite-scale calculus of symmetric systems.
//!
//! A symmetric system is a forcing poset together with a group of automorphisms and a
//! normal filter of subgroups. Everything here is finite: posets have at most
//! [`order::MAX_CONDITIONS`] conditions, groups are enumerated outright, and names are
//! bounded in rank. Over a finite poset the generic filters are the cones above minimal
//! conditions, which makes forcing decidable by inspecting each generic in turn.

pub mod bits;
pub mod completion;
pub mod equivalence;
pub mod error;
pub mod fixtures;
pub mod forcing;
pub mod formula;
pub mod guard;
pub mod hset;
pub mod iteration;
pub mod name;
pub mod order;
pub mod quotient;
pub mod perm;
pub mod symmetric;
pub mod suites;
pub mod system;

pub use error::{Error, Result};
pub use formula::{parse as parse_formula, Formula, Rel};
pub use guard::Guards;
pub use hset::HSet;
pub use name::PName;
pub use order::{BooleanAlgebra, Cond, CondSet, Poset};
pub use perm::{NormalFilter, Perm, PermGroup, Subgroup};
pub use system::{Profile, SymSystem};
