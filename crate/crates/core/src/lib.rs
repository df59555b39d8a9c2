//! Generalized operator radii of finite-dimensional complex matrices.
//!
//! The f-operator radius of a tuple `(T_1, ..., T_n)` is
//! `sup_{|x|=1} f^{-1}(sum_j f(|<T_j x, x>|))` for a continuous increasing
//! `f` with `f(0) = 0`. It specializes to the numerical radius (`n = 1`),
//! the Euclidean operator radius (`f = t^2`), the q-radius (`f = t^q`), and,
//! on the pair `(T, T*T)`, the Davis-Wielandt radius.
//!
//! Modules:
//! - [`linalg`]: matrices, Hermitian eigensolver, polar/Aluthge/Cartesian decompositions
//! - [`scalarmap`]: the maps `f` with declared and certifiable properties
//! - [`radius`]: radius estimation with certified witness vectors
//! - [`bounds`]: executable catalog of inequalities relating these radii
//! - [`harness`]: random ensembles and the verification suite

pub mod bounds;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod radius;
pub mod scalarmap;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use radius::{OperatorTuple, RadiusEstimate};
pub use scalarmap::ScalarMap;
