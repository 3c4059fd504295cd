//! Two-mode boson dynamics with a learnable ancilla.
//!
//! The library simulates a two-mode ("double-well") boson system in the
//! Jordan-Schwinger angular-momentum representation, couples it to a second
//! two-mode ancilla, and optimizes the ancilla Hamiltonian, the coupling, the
//! evolution time, and the ancilla initial state so that the system tunnels
//! from the all-left to the all-right number state with maximal probability.
//!
//! Modules follow the pipeline:
//!
//! * [`fock`] — number basis, J operators, tensor embeddings, partial trace
//! * [`model`] — system/ancilla/interaction/joint Hamiltonians
//! * [`eig`] / [`dynamics`] — exact unitary evolution and probability search
//! * [`lindblad`] — GKSL dephasing dynamics integrated with RK4
//! * [`closedform`] — analytical oracles for the solvable limits
//! * [`learn`] — ADAM-driven maximization of the tunneling probability
//!
//! All numerical kernels are generic over the real scalar type through
//! [`scalar::Scalar`], so every computation can also be instantiated with
//! [`dual::Dual`] to obtain forward-mode derivatives.

pub mod closedform;
pub mod dual;
pub mod dynamics;
pub mod eig;
pub mod error;
pub mod fock;
pub mod learn;
pub mod lindblad;
pub mod matrix;
pub mod model;
pub mod scalar;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use scalar::Scalar;

/// Complex scalar at default (double) precision.
pub type C64 = num_complex::Complex<f64>;
/// Complex scalar at single precision.
pub type C32 = num_complex::Complex<f32>;
/// Dense complex matrix at default (double) precision.
pub type Matrix64 = ComplexMatrix<f64>;
/// Dense complex matrix at single precision.
pub type Matrix32 = ComplexMatrix<f32>;
/// Dual scalar carrying one derivative over `f64`.
pub type Dual64 = dual::Dual<f64>;
/// Dense complex matrix over dual scalars, for forward-mode differentiation.
pub type MatrixDual64 = ComplexMatrix<Dual64>;
