//! Probabilistic I/O programs over a signature of output operations.

pub mod acceptance;
pub mod cli;
pub mod coeff;
pub mod corpus;
pub mod equivalence;
pub mod error;
pub mod games;
pub mod normalforms;
pub mod play;
pub mod random;
pub mod rational;
pub mod semantics;
pub mod signature;
pub mod syntax;
pub mod template;
pub mod term;

pub use coeff::{CoeffFamily, PolyGeo};
pub use error::CoreError;
pub use play::Play;
pub use rational::Rational;
pub use signature::{Arity, Signature, Symbol};
pub use syntax::{parse_program, parse_term};
pub use term::{validate_term, Children, Generator, Term};
