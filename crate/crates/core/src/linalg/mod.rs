//! Dense complex matrices, the Hermitian eigensolver, and the operator
//! decompositions built on it.

mod decomp;
mod eig;
mod matrix;

pub use decomp::{
    abs_op, aluthge, aluthge_from_polar, apply_map_hermitian, apply_real_map, cartesian,
    decompose_all, hermitian_abs, hermitian_norm, operator_norm, polar_decompose, psd_power,
    singular_triplets, try_apply_map_hermitian, CartesianParts, Decompositions, PolarParts, SingularTriplets, CLAMP_TOL,
    DOMAIN_TOL,
};
pub use eig::{hermitian_eig, hermitian_eigenvalues, EigenDecomposition, HERMITIAN_TOL, MAX_SWEEPS, OFF_DIAGONAL_TOL};
pub(crate) use eig::MaxEigWorkspace;
pub use matrix::{arithmetic, inner, normalized, vec_norm, ArithKind, CMatrix, Operand, C64};
