//! Hochschild complexes of `D(A)`: bar cochains and chains, derivations,
//! noncommutative one-forms and brackets from a BV operator.

mod bv;
mod chain;
mod cochain;
mod derivation;
mod ncforms;

pub use bv::{bracket_from_bv, ClassAlgebra, ClassExpr};
pub use chain::{connes_b, cyclic_operator, delta_chain, norm_operator, prepend_unit, Chain};
pub use cochain::{cup, delta_cochain, Cochain};
pub use derivation::{generators, is_inner, solve_derivations, Derivation, DerivationSolve};
pub use ncforms::{corepresent_derivation, universal_derivation, NcOneForm};
