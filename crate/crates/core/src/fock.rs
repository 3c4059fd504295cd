//! Two-mode Fock basis and Jordan-Schwinger operators.
//!
//! Basis convention: index `k` counts bosons in the LEFT well, so `|N⟩` is
//! the all-left state and `|0⟩` the all-right state, and J_z is diagonal with
//! entries (N-2k)/2. Tensor products are always system ⊗ ancilla with the
//! system as slow index.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::Scalar;

/// (N+1)-dimensional two-mode number basis with cached J_x, J_y, J_z.
#[derive(Clone, Debug)]
pub struct FockSpace<T: Scalar> {
    n_particles: usize,
    jx: ComplexMatrix<T>,
    jy: ComplexMatrix<T>,
    jz: ComplexMatrix<T>,
}

impl<T: Scalar> FockSpace<T> {
    /// Builds the basis and operators for `n` bosons. A single mode pair with
    /// zero particles is one-dimensional and supports no tunneling, so n = 0
    /// is rejected.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "particle count must be at least 1".into(),
            ));
        }
        let dim = n + 1;
        let half = T::real(0.5);
        let mut jx = ComplexMatrix::zeros(dim);
        let mut jy = ComplexMatrix::zeros(dim);
        let mut jz = ComplexMatrix::zeros(dim);
        for k in 0..dim {
            jz[(k, k)] = Complex::new(T::real((n as f64 - 2.0 * k as f64) / 2.0), T::zero());
            if k + 1 < dim {
                // ladder coefficient <k+1| a†b |k> = sqrt((k+1)(N-k))
                let c = T::real(((k + 1) as f64 * (n - k) as f64).sqrt()) * half;
                jx[(k + 1, k)] = Complex::new(c, T::zero());
                jx[(k, k + 1)] = Complex::new(c, T::zero());
                jy[(k + 1, k)] = Complex::new(T::zero(), c);
                jy[(k, k + 1)] = Complex::new(T::zero(), -c);
            }
        }
        Ok(FockSpace { n_particles: n, jx, jy, jz })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.n_particles + 1
    }

    pub fn jx(&self) -> &ComplexMatrix<T> {
        &self.jx
    }

    pub fn jy(&self) -> &ComplexMatrix<T> {
        &self.jy
    }

    pub fn jz(&self) -> &ComplexMatrix<T> {
        &self.jz
    }

    /// Projector |k⟩⟨k| onto the state with `k` bosons in the left well.
    pub fn localized_state(&self, k: usize) -> Result<ComplexMatrix<T>> {
        if k > self.n_particles {
            return Err(Error::InvalidArgument(format!(
                "left-well count {} exceeds particle number {}",
                k, self.n_particles
            )));
        }
        let mut rho = ComplexMatrix::zeros(self.dim());
        rho[(k, k)] = Complex::new(T::one(), T::zero());
        Ok(rho)
    }

    /// All-left state |N⟩⟨N|, the canonical initial condition.
    pub fn all_left(&self) -> ComplexMatrix<T> {
        self.localized_state(self.n_particles).expect("N is in range")
    }

    /// All-right state |0⟩⟨0|, the transfer target.
    pub fn all_right(&self) -> ComplexMatrix<T> {
        self.localized_state(0).expect("0 is in range")
    }
}

/// Kronecker product with the first factor as the slow (system) index.
pub fn kron<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.kron(b)
}

/// Trace over the second (ancilla) tensor factor.
pub fn partial_trace_ancilla<T: Scalar>(
    rho_sa: &ComplexMatrix<T>,
    dim_s: usize,
    dim_a: usize,
) -> Result<ComplexMatrix<T>> {
    if rho_sa.dim() != dim_s * dim_a {
        return Err(Error::DimensionMismatch(format!(
            "joint dimension {} != {} x {}",
            rho_sa.dim(),
            dim_s,
            dim_a
        )));
    }
    let mut out = ComplexMatrix::zeros(dim_s);
    for i in 0..dim_s {
        for j in 0..dim_s {
            let mut acc = Complex::new(T::zero(), T::zero());
            for a in 0..dim_a {
                acc = acc + rho_sa[(i * dim_a + a, j * dim_a + a)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::commutator;
    use crate::C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_boson_reduces_to_half_paulis() {
        let s = FockSpace::<f64>::new(1).unwrap();
        assert_eq!(s.jx()[(0, 1)], c(0.5, 0.0));
        assert_eq!(s.jx()[(1, 0)], c(0.5, 0.0));
        assert_eq!(s.jz()[(0, 0)], c(0.5, 0.0));
        assert_eq!(s.jz()[(1, 1)], c(-0.5, 0.0));
        assert_eq!(s.jy()[(1, 0)], c(0.0, 0.5));
    }

    #[test]
    fn two_boson_matrix_elements() {
        // direct evaluation of the ladder formulas for N = 2
        let s = FockSpace::<f64>::new(2).unwrap();
        let r2h = 2.0f64.sqrt() / 2.0;
        assert!((s.jx()[(1, 0)].re - r2h).abs() < 1e-15);
        assert!((s.jx()[(2, 1)].re - r2h).abs() < 1e-15);
        assert_eq!(s.jz()[(0, 0)], c(1.0, 0.0));
        assert_eq!(s.jz()[(1, 1)], c(0.0, 0.0));
        assert_eq!(s.jz()[(2, 2)], c(-1.0, 0.0));
    }

    #[test]
    fn su2_commutation_relations_hold_up_to_n8() {
        for n in 1..=8 {
            let s = FockSpace::<f64>::new(n).unwrap();
            let i = c(0.0, 1.0);
            let errs = [
                (&commutator(s.jx(), s.jy()) - &s.jz().scale(i)).max_abs(),
                (&commutator(s.jy(), s.jz()) - &s.jx().scale(i)).max_abs(),
                (&commutator(s.jz(), s.jx()) - &s.jy().scale(i)).max_abs(),
            ];
            for e in errs {
                assert!(e < 1e-12, "commutator defect {e} at n = {n}");
            }
        }
    }

    #[test]
    fn ladder_coefficients_match_closed_form() {
        let n = 6;
        let s = FockSpace::<f64>::new(n).unwrap();
        for k in 0..n {
            let expect = (((k + 1) * (n - k)) as f64).sqrt() / 2.0;
            assert!((s.jx()[(k + 1, k)].re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn j_matrices_are_tridiagonal_or_diagonal() {
        // number conservation: nothing couples |k> to |k'| with |k-k'| > 1
        let s = FockSpace::<f64>::new(5).unwrap();
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                if i.abs_diff(j) > 1 {
                    assert_eq!(s.jx()[(i, j)], c(0.0, 0.0));
                    assert_eq!(s.jy()[(i, j)], c(0.0, 0.0));
                }
                if i != j {
                    assert_eq!(s.jz()[(i, j)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn zero_particles_rejected() {
        assert!(FockSpace::<f64>::new(0).is_err());
    }

    #[test]
    fn localized_states_are_basis_projectors() {
        let s = FockSpace::<f64>::new(1).unwrap();
        let rho = s.localized_state(1).unwrap();
        assert_eq!(rho[(0, 0)], c(0.0, 0.0));
        assert_eq!(rho[(1, 1)], c(1.0, 0.0));

        let s4 = FockSpace::<f64>::new(4).unwrap();
        let rho4 = s4.localized_state(4).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if (i, j) == (4, 4) { 1.0 } else { 0.0 };
                assert_eq!(rho4[(i, j)], c(expect, 0.0));
            }
        }

        let s3 = FockSpace::<f64>::new(3).unwrap();
        assert_eq!(s3.localized_state(0).unwrap(), s3.all_right());
        assert!(s3.localized_state(4).is_err());
    }

    #[test]
    fn kron_identity_factor_gives_block_diagonal() {
        let id = ComplexMatrix::<f64>::identity(2);
        let x = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        let k = kron(&id, &x);
        assert_eq!(k.dim(), 4);
        for (i, j, v) in [(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)] {
            assert_eq!(k[(i, j)], c(v, 0.0));
        }
        assert_eq!(k[(0, 2)], c(0.0, 0.0));
        assert_eq!(k[(1, 3)], c(0.0, 0.0));
    }

    #[test]
    fn kron_of_diagonals() {
        let d = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let k = kron(&d, &d);
        let expect = [1.0, -1.0, -1.0, 1.0];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(k[(i, i)], c(*e, 0.0));
        }
    }

    #[test]
    fn kron_trace_is_product_of_traces() {
        // property against direct summation on pseudo-random 3x3 inputs
        let mut seed = 1u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let a = ComplexMatrix::from_fn(3, |_, _| c(next(), next()));
        let b = ComplexMatrix::from_fn(3, |_, _| c(next(), next()));
        let k = kron(&a, &b);
        let direct: C64 = (0..9).map(|i| k[(i, i)]).sum();
        let prod = a.trace() * b.trace();
        assert!((direct - prod).norm() < 1e-12);
        assert!((k.trace() - prod).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let s = FockSpace::<f64>::new(2).unwrap();
        let rho_s = s.localized_state(1).unwrap();
        // non-normalized ancilla factor: partial trace scales by its trace
        let rho_a = ComplexMatrix::from_diag(&[c(0.3, 0.0), c(0.5, 0.0)]);
        let joint = kron(&rho_s, &rho_a);
        let red = partial_trace_ancilla(&joint, 3, 2).unwrap();
        assert!(red.approx_eq(&rho_s.scale_re(0.8), 1e-14));
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        // |Φ> = (|00> + |11>)/sqrt(2) on a 2x2 joint space
        let mut rho = ComplexMatrix::<f64>::zeros(4);
        for &i in &[0usize, 3] {
            for &j in &[0usize, 3] {
                rho[(i, j)] = c(0.5, 0.0);
            }
        }
        let red = partial_trace_ancilla(&rho, 2, 2).unwrap();
        assert!(red.approx_eq(&ComplexMatrix::identity(2).scale_re(0.5), 1e-15));
    }

    #[test]
    fn partial_trace_preserves_trace_on_random_hermitian() {
        let mut seed = 7u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let raw = ComplexMatrix::from_fn(6, |_, _| c(next(), next()));
        let herm = raw.hermitized();
        let red = partial_trace_ancilla(&herm, 2, 3).unwrap();
        assert!((red.trace() - herm.trace()).norm() < 1e-12);
        assert!(red.is_hermitian(1e-14));
        // direct index summation oracle
        for i in 0..2 {
            for j in 0..2 {
                let direct: C64 = (0..3).map(|a| herm[(i * 3 + a, j * 3 + a)]).sum();
                assert!((red[(i, j)] - direct).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::<f64>::identity(6);
        assert!(partial_trace_ancilla(&m, 2, 2).is_err());
    }

    #[test]
    fn round_trip_kron_then_reduce_is_identity() {
        let s = FockSpace::<f64>::new(3).unwrap();
        let a = FockSpace::<f64>::new(2).unwrap();
        let rho_s = s.localized_state(2).unwrap();
        let rho_a = a.all_left();
        let red = partial_trace_ancilla(&kron(&rho_s, &rho_a), 4, 3).unwrap();
        assert!(red.approx_eq(&rho_s, 1e-14));
    }
}
