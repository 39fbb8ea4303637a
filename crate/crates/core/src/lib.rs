//! Binary encodings of finite valued constraint languages.
//!
//! A language of cost functions of arbitrary arity is reduced to binary ones
//! in two ways: the dual language on the feasible tuples of a single combined
//! function, and an extended dual given by a balanced digraph with unary
//! costs. Reductions come with reverse maps, algebraic checks relating the
//! polymorphisms of a language and its encodings, and exact solvers.

pub mod algebra;
pub mod io;
pub mod catalog;
pub mod cli;
pub mod combine;
pub mod digraph;
pub mod dual;
pub mod error;
pub mod extdual;
pub mod hom;
pub mod lp;
pub mod model;
pub mod random;
pub mod solve;
pub mod value;

pub use error::{Error, Result};
pub use model::{Assignment, Constraint, CostFunction, Domain, Instance, Language};
pub use value::ExtValue;
