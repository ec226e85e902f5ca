//! Computation in the matrix function algebras of the directed `n`-cycle.
//!
//! Elements are `n x n` matrices with `(i,j)` entry `z^l(i,j) f_ij(z^n)`,
//! `l(i,j) = (j - i) mod n`, with polynomial `f_ij`. The crate provides
//! element arithmetic, the evaluation representations, point derivations and
//! an inner-ness decision procedure, and reconstruction of a global commutator
//! witness from boundary data.

pub mod algebra;
pub mod cli;
pub mod derivations;
pub mod error;
pub mod poly;
pub mod reconstruction;
pub mod representations;
pub mod sample;

pub use algebra::{CycleElement, Generator, MatC};
pub use error::{Error, Result};
pub use poly::Poly;
pub use representations::RepPoint;
