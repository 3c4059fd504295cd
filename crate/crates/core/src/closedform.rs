//! Analytical oracles in the Pauli-form convention.
//!
//! These formulas describe a single tunneling boson, optionally coupled to a
//! non-interacting, non-tunneling ancilla. Parameters here are σ-convention;
//! the simulator's angular-momentum parameters relate by γ = γ_J/2,
//! Δ = Δ_J/2, α = α_J/2.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parameters of the solvable coupled model: one boson with tunneling γ and
/// asymmetry Δ, coupled with strength α to N non-tunneling ancilla bosons in
/// the pure state Σ_k amplitudes[k] |k⟩.
#[derive(Clone, Debug)]
pub struct SimpleLimitParams<T> {
    pub gamma: T,
    pub delta: T,
    pub alpha: T,
    pub n_ancilla: usize,
    pub amplitudes: Vec<Complex<T>>,
}

impl<T: Scalar> SimpleLimitParams<T> {
    pub fn new(
        gamma: T,
        delta: T,
        alpha: T,
        n_ancilla: usize,
        amplitudes: Vec<Complex<T>>,
    ) -> Result<Self> {
        if amplitudes.len() != n_ancilla + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for an {}-boson ancilla",
                amplitudes.len(),
                n_ancilla
            )));
        }
        let norm: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - T::one()).abs() > T::real(1e-10) {
            return Err(Error::InvalidArgument(format!(
                "amplitudes are not normalized: Σ|a_k|² = {}",
                norm.value()
            )));
        }
        Ok(SimpleLimitParams { gamma, delta, alpha, n_ancilla, amplitudes })
    }

    /// ω_k = sqrt((Δ - α (N - 2k)/2)² + γ²).
    pub fn omega(&self, k: usize) -> T {
        let m_k = T::real((self.n_ancilla as f64 - 2.0 * k as f64) / 2.0);
        let detuning = self.delta - self.alpha * m_k;
        (detuning * detuning + self.gamma * self.gamma).sqrt()
    }
}

/// P(t) = (γ²/ω²) sin²(ωt) with ω = sqrt(Δ² + γ²).
pub fn single_particle_prob<T: Scalar>(gamma: T, delta: T, t: T) -> Result<T> {
    let omega_sq = gamma * gamma + delta * delta;
    if omega_sq.is_zero() {
        return Err(Error::InvalidArgument(
            "gamma and delta cannot both vanish".into(),
        ));
    }
    let omega = omega_sq.sqrt();
    Ok(gamma * gamma / omega_sq * (omega * t).sin().powi(2))
}

/// P(t) = Σ_k |⟨k|ψ_A⟩|² (γ²/ω_k²) sin²(ω_k t).
pub fn coupled_prob<T: Scalar>(p: &SimpleLimitParams<T>, t: T) -> T {
    (0..=p.n_ancilla)
        .map(|k| {
            let w = p.amplitudes[k].norm_sqr();
            if w.is_zero() {
                return T::zero();
            }
            let omega = p.omega(k);
            w * p.gamma * p.gamma / (omega * omega) * (omega * t).sin().powi(2)
        })
        .sum()
}

/// The unique ancilla occupation k* = N/2 - Δ/α at which the detuning
/// cancels, when it is an integer in [0, N] (within 1e-9); `None` otherwise.
pub fn optimal_k_star<T: Scalar>(delta: T, alpha: T, n: usize) -> Result<Option<usize>> {
    if alpha.is_zero() {
        return Err(Error::InvalidArgument(
            "k* is undefined for zero coupling".into(),
        ));
    }
    let k = T::real(n as f64 / 2.0) - delta / alpha;
    let rounded = k.round();
    if (k - rounded).abs() > T::real(1e-9) {
        return Ok(None);
    }
    let r = rounded.value();
    if r < 0.0 || r > n as f64 {
        return Ok(None);
    }
    Ok(Some(r as usize))
}

/// ℓ-th time at which the k*-concentrated probability reaches 1:
/// t*_ℓ = π/(2γ) + ℓπ/γ, since ω_{k*} = γ.
pub fn optimal_time<T: Scalar>(gamma: T, ell: usize) -> Result<T> {
    if gamma <= T::zero() {
        return Err(Error::InvalidArgument(
            "maximizing time requires gamma > 0".into(),
        ));
    }
    let pi = T::PI();
    Ok(pi / (gamma + gamma) + T::real(ell as f64) * pi / gamma)
}
