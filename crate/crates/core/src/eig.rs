//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.
//!
//! Dimensions in this crate stay below 100, where Jacobi is accurate,
//! simple, and — unlike LAPACK bindings — works for any [`Scalar`], so the
//! same kernel also serves `f32` runs and dual-number instantiations.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::Scalar;

/// Eigenvalues in ascending order with matching unitary eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenSystem<T: Scalar> {
    pub eigenvalues: Vec<T>,
    /// Column j is the eigenvector of `eigenvalues[j]`, phase-fixed so its
    /// largest-magnitude component is real positive.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Scalar> EigenSystem<T> {
    /// V diag(λ) V†.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj().scale(self.eigenvalues[k]))
                .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
        })
    }

    /// V diag(f(λ)) V† for a complex-valued spectral function.
    pub fn apply(&self, f: impl Fn(T) -> Complex<T>) -> ComplexMatrix<T> {
        let n = self.eigenvalues.len();
        let fs: Vec<Complex<T>> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * fs[k] * v[(j, k)].conj())
                .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
        })
    }
}

const MAX_SWEEPS: usize = 60;

fn hermiticity_tolerance<T: Scalar>(scale: T) -> T {
    // ~1.7e-10 at f64, loosening appropriately at lower precision
    scale.max(T::one()) * T::epsilon().powf(T::real(0.625))
}

/// Diagonalizes a Hermitian matrix. Rejects inputs whose Hermitian defect
/// exceeds the precision-scaled tolerance (~1e-10 absolute at f64 scale 1).
pub fn hermitian_eig<T: Scalar>(h: &ComplexMatrix<T>) -> Result<EigenSystem<T>> {
    let n = h.dim();
    let scale = h.max_abs();
    let tol = hermiticity_tolerance(scale);
    let defect = h.hermitian_defect();
    if defect > tol {
        return Err(Error::NotHermitian {
            asymmetry: defect.value(),
            tolerance: tol.value(),
        });
    }

    // work on the symmetrized copy so the sub-tolerance defect cannot skew
    // the rotations
    let mut a = h.hermitized();
    let mut v = ComplexMatrix::identity(n);

    let off_tol = T::epsilon() * scale.max(T::min_positive_value()) * T::real(n as f64);
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= off_tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, off_tol);
            }
        }
    }
    if !converged {
        // re-check: quadratic convergence usually lands mid-sweep
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() > off_tol * T::real(100.0) {
            return Err(Error::EigDidNotConverge(MAX_SWEEPS));
        }
    }

    // sort ascending; stable in the original index for deterministic ties
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(diag[src]);
        // phase fix: largest-magnitude component (first on ties) real positive
        let mut best = 0usize;
        let mut best_mag = T::zero();
        for i in 0..n {
            let m = v[(i, src)].norm_sqr();
            if m > best_mag {
                best_mag = m;
                best = i;
            }
        }
        let pivot = v[(best, src)];
        let mag = pivot.norm();
        let phase = if mag > T::zero() {
            pivot.conj().unscale(mag)
        } else {
            Complex::new(T::one(), T::zero())
        };
        for i in 0..n {
            eigenvectors[(i, col)] = v[(i, src)] * phase;
        }
    }

    Ok(EigenSystem { eigenvalues, eigenvectors })
}

/// One complex Jacobi rotation zeroing a[(p, q)].
fn rotate<T: Scalar>(
    a: &mut ComplexMatrix<T>,
    v: &mut ComplexMatrix<T>,
    p: usize,
    q: usize,
    skip_tol: T,
) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= skip_tol * T::real(1e-3) {
        return;
    }
    let phase = apq.unscale(mag); // e^{i φ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let tau = (app - aqq) / (mag + mag);
    let t = if tau.is_zero() {
        T::one()
    } else {
        tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let c = (T::one() + t * t).sqrt().recip();
    let s = t * c;

    // R differs from the identity only on the (p, q) plane:
    //   R[p][p] = c, R[p][q] = -s e^{iφ}, R[q][p] = s e^{-iφ}, R[q][q] = c
    let n = a.dim();
    let s_ph = phase.scale(s); //  s e^{iφ}
    let s_ph_c = phase.conj().scale(s); //  s e^{-iφ}

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = akp.scale(c) + akq * s_ph_c;
        let new_kq = akq.scale(c) - akp * s_ph;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp.conj();
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq.conj();
    }
    let two_cs_mag = (c * s) * (mag + mag);
    let app_new = app * c * c + two_cs_mag + aqq * s * s;
    let aqq_new = app * s * s - two_cs_mag + aqq * c * c;
    a[(p, p)] = Complex::new(app_new, T::zero());
    a[(q, q)] = Complex::new(aqq_new, T::zero());
    a[(p, q)] = Complex::new(T::zero(), T::zero());
    a[(q, p)] = Complex::new(T::zero(), T::zero());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp.scale(c) + vkq * s_ph_c;
        v[(k, q)] = vkq.scale(c) - vkp * s_ph;
    }
}
