//! Finite universal algebra toolkit: tolerances, congruences, the centralizer
//! relation `C(S,T;δ)`, term-condition commutators, congruence lattices with
//! labelled pentagons, and subpower-based term searches.

pub mod algebra;
pub mod bounds;
pub mod centrality;
pub mod closure;
pub mod conlat;
pub mod corpus;
pub mod error;
pub mod fixtures;
pub mod hunt;
pub mod notation;
pub mod relations;
pub mod report;
pub mod suite;
pub mod termsearch;

pub use algebra::{eval_term, FiniteAlgebra, Term};
pub use bounds::Bounds;
pub use error::{Error, Result};
pub use relations::{BinaryRelation, Congruence, Tolerance};
