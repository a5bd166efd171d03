//! Dense complex linear algebra kernels.

mod eigen;
mod jacobi;
mod lu;
mod matrix;
mod ops;

pub use eigen::{eig_general, eigenvalues, schur, EigenPair, Schur};
pub use jacobi::{eigh, hermitian_function, pinv, singular_values, svd, Svd};
pub use lu::{inverse, Lu};
pub use matrix::{dominant_index, fix_phase, vdot, vkron, vnorm, vscale, CMatrix, CVector};
pub use ops::{
    expm, kron, partial_trace, pauli, pauli_digits, pauli_string, relative_residual, reshuffle, spin_along, sqrt_pd,
    unitarity_residual, unitary_propagator, Factor,
};
