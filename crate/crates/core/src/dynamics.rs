//! Noiseless evolution and transfer-probability search.
//!
//! Closed-system propagation goes through one Hermitian eigendecomposition;
//! a [`Propagator`] then evaluates ρ(t) at any time with two matrix products,
//! which makes dense time grids cheap. `expm` provides the same propagation
//! through a scaling-and-squaring Taylor series — useful where an entire
//! function of the input is required, e.g. under dual scalars.

use num_complex::Complex;

use crate::eig::{hermitian_eig, EigenSystem};
use crate::error::{Error, Result};
use crate::fock::{kron, partial_trace_ancilla};
use crate::matrix::ComplexMatrix;
use crate::scalar::Scalar;

/// Precomputed eigenbasis of a Hamiltonian together with the initial state
/// rotated into it. `at(t)` applies the phases e^{-i(λ_j-λ_k)t} and rotates
/// back.
pub struct Propagator<T: Scalar> {
    eig: EigenSystem<T>,
    rho0_eigenbasis: ComplexMatrix<T>,
}

impl<T: Scalar> Propagator<T> {
    /// Validates `rho0` as a density matrix (Hermitian, unit trace, PSD to
    /// -1e-10 at f64 scale) and diagonalizes `h`.
    pub fn new(rho0: &ComplexMatrix<T>, h: &ComplexMatrix<T>) -> Result<Self> {
        if rho0.dim() != h.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} != Hamiltonian dimension {}",
                rho0.dim(),
                h.dim()
            )));
        }
        let tol = T::real(1e-10).max(T::epsilon().powf(T::real(2.0 / 3.0)));
        rho0.check_density_shape(tol)?;
        let spectrum = hermitian_eig(&rho0.hermitized())?;
        let min_eig = spectrum.eigenvalues[0];
        if min_eig < -tol {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {:.3e}",
                min_eig.value()
            )));
        }
        let eig = hermitian_eig(h)?;
        let v_dag = eig.eigenvectors.adjoint();
        let rho0_eigenbasis = v_dag.matmul(rho0).matmul(&eig.eigenvectors);
        Ok(Propagator { eig, rho0_eigenbasis })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eig.eigenvalues
    }

    /// ρ(t) = V (ρ̃ ∘ e^{-i(λ_j-λ_k)t}) V†.
    pub fn at(&self, t: T) -> ComplexMatrix<T> {
        let n = self.rho0_eigenbasis.dim();
        let phases: Vec<Complex<T>> = self
            .eig
            .eigenvalues
            .iter()
            .map(|&l| Complex::from_polar(T::one(), -l * t))
            .collect();
        let mut rotated = ComplexMatrix::zeros(n);
        for j in 0..n {
            for k in 0..n {
                rotated[(j, k)] = self.rho0_eigenbasis[(j, k)] * phases[j] * phases[k].conj();
            }
        }
        let v = &self.eig.eigenvectors;
        v.matmul(&rotated).matmul(&v.adjoint())
    }
}

/// One-shot ρ(t) = e^{-iHt} ρ0 e^{+iHt}. Negative t runs the inverse
/// evolution.
pub fn propagate<T: Scalar>(
    rho0: &ComplexMatrix<T>,
    h: &ComplexMatrix<T>,
    t: T,
) -> Result<ComplexMatrix<T>> {
    Ok(Propagator::new(rho0, h)?.at(t))
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// Exact up to machine precision for the dimensions in scope, and composed
/// purely of products and sums, so dual instantiations differentiate it.
pub fn expm<T: Scalar>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let n = a.dim();
    let norm = a.one_norm().value();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as usize
    } else {
        0
    };
    let scaled = a.scale_re(T::real(0.5f64.powi(squarings as i32)));

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    let eps = T::epsilon().value();
    for k in 1..=30 {
        term = term.matmul(&scaled).scale_re(T::real(1.0 / k as f64));
        result = &result + &term;
        if term.one_norm().value() < eps {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// ρ(t) via `expm`; same contract as [`propagate`] minus input validation.
pub fn propagate_expm<T: Scalar>(
    rho0: &ComplexMatrix<T>,
    h: &ComplexMatrix<T>,
    t: T,
) -> ComplexMatrix<T> {
    let minus_i_t = Complex::new(T::zero(), -t);
    let u = expm(&h.scale(minus_i_t));
    u.matmul(rho0).matmul(&u.adjoint())
}

/// ρ_S(t) = Tr_A[ e^{-iHt} (ρ_S ⊗ ρ_A) e^{+iHt} ].
pub fn reduced_system_state<T: Scalar>(
    rho_s0: &ComplexMatrix<T>,
    rho_a0: &ComplexMatrix<T>,
    h_sa: &ComplexMatrix<T>,
    t: T,
    dim_s: usize,
    dim_a: usize,
) -> Result<ComplexMatrix<T>> {
    if rho_s0.dim() != dim_s || rho_a0.dim() != dim_a || h_sa.dim() != dim_s * dim_a {
        return Err(Error::DimensionMismatch(format!(
            "reduced dynamics dims: state {}x{}, joint {}",
            rho_s0.dim(),
            rho_a0.dim(),
            h_sa.dim()
        )));
    }
    let joint0 = kron(rho_s0, rho_a0);
    let joint_t = propagate(&joint0, h_sa, t)?;
    partial_trace_ancilla(&joint_t, dim_s, dim_a)
}

/// ⟨k|ρ_S|k⟩ clamped into [0, 1]; negativity beyond -1e-12 (f64 scale) means
/// a broken state upstream and is an error rather than silently clipped.
pub fn transfer_probability<T: Scalar>(rho_s: &ComplexMatrix<T>, k_target: usize) -> Result<T> {
    if k_target >= rho_s.dim() {
        return Err(Error::InvalidArgument(format!(
            "target index {} outside dimension {}",
            k_target,
            rho_s.dim()
        )));
    }
    let p = rho_s[(k_target, k_target)].re;
    let tol = T::real(1e-12).max(T::epsilon() * T::real(64.0));
    if p < -tol || p > T::one() + tol {
        return Err(Error::InvalidDensity(format!(
            "population {:.6e} outside [0, 1]",
            p.value()
        )));
    }
    Ok(p.max(T::zero()).min(T::one()))
}

/// Dense grid scan over [0, window] followed by golden-section refinement.
/// Returns the earliest maximizer among grid maxima within 1e-9 of the
/// global maximum, as (t*, p*). Each near-top local grid maximum is refined
/// in time order so that equal periodic peaks resolve to the first one.
pub fn find_max_probability<T: Scalar>(
    evolver: impl Fn(T) -> T,
    window: T,
    grid_points: usize,
) -> (T, T) {
    assert!(window > T::zero(), "window must be positive");
    assert!(grid_points >= 100, "need at least 100 grid points");
    let step = window / T::real((grid_points - 1) as f64);
    let t_of = |i: usize| step * T::real(i as f64);
    let values: Vec<T> = (0..grid_points).map(|i| evolver(t_of(i))).collect();
    let global = values
        .iter()
        .fold(T::neg_infinity(), |a, &b| if b > a { b } else { a });

    // a peak hiding between grid points can top its best sample by at most
    // the discretization error; the coarse band keeps every such candidate
    let coarse_band = T::real(1e-6).max((global.abs() + T::one()) * T::real(1e-7));
    let tie_tol = T::real(1e-9);
    let refine = |i: usize| {
        let lo = if i == 0 { T::zero() } else { t_of(i - 1) };
        let hi = if i + 1 == grid_points { window } else { t_of(i + 1) };
        let (t_ref, p_ref) = golden_section_max(&evolver, lo, hi, T::real(1e-6));
        // ties resolve to the grid point, keeping flat stretches at their
        // earliest sample
        if p_ref > values[i] {
            (t_ref, p_ref)
        } else {
            (t_of(i), values[i])
        }
    };

    let is_local_max = |i: usize| {
        let left_ok = i == 0 || values[i] >= values[i - 1];
        let right_ok = i + 1 == grid_points || values[i] >= values[i + 1];
        left_ok && right_ok
    };

    // the refined global fixes the bar every earlier candidate must reach
    let global_idx = values
        .iter()
        .position(|&v| v == global)
        .expect("max exists");
    let (mut t_star, mut p_star) = refine(global_idx);
    let bar = p_star - tie_tol;

    for i in 0..grid_points {
        if i == global_idx {
            break;
        }
        if values[i] < global - coarse_band || !is_local_max(i) {
            continue;
        }
        let (t_cand, p_cand) = refine(i);
        if p_cand >= bar {
            t_star = t_cand;
            p_star = p_cand;
            break;
        }
    }
    (t_star, p_star)
}

fn golden_section_max<T: Scalar>(
    f: &impl Fn(T) -> T,
    mut lo: T,
    mut hi: T,
    tol: T,
) -> (T, T) {
    let inv_phi = T::real(0.618_033_988_749_894_9);
    let mut x1 = hi - (hi - lo) * inv_phi;
    let mut x2 = lo + (hi - lo) * inv_phi;
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * inv_phi;
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * inv_phi;
            f2 = f(x2);
        }
    }
    let mid = (lo + hi) * T::real(0.5);
    (mid, f(mid))
}
