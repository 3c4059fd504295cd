//! GKSL dephasing dynamics integrated with fourth-order Runge-Kutta.
//!
//! The dissipators are J_z ⊗ I on the system and I ⊗ J_z on the ancilla;
//! the system-only master equation is the special case of a trivial
//! (one-dimensional) ancilla factor. State updates can be gated by a
//! learnable cutoff time: a hard Heaviside factor reproduces the reported
//! dynamics, a logistic factor is substituted during training so the cutoff
//! keeps a usable gradient.

use num_complex::Complex;

use crate::eig::hermitian_eig;
use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::matrix::ComplexMatrix;
use crate::scalar::Scalar;

/// Dephasing strengths for the system and ancilla channels.
#[derive(Clone, Copy, Debug)]
pub struct NoiseParams<T> {
    pub lambda_s: T,
    pub lambda_a: T,
}

impl<T: Scalar> NoiseParams<T> {
    pub fn new(lambda_s: T, lambda_a: T) -> Result<Self> {
        if lambda_s < T::zero() || lambda_a < T::zero() {
            return Err(Error::InvalidArgument("noise rates must be >= 0".into()));
        }
        Ok(NoiseParams { lambda_s, lambda_a })
    }

    pub fn none() -> Self {
        NoiseParams { lambda_s: T::zero(), lambda_a: T::zero() }
    }
}

/// Multiplicative factor applied to each RK4 update, freezing the state
/// after the learnable time t̂.
#[derive(Clone, Copy, Debug)]
pub enum TimeGate<T> {
    /// Heaviside(t̂ - t): update in full up to and including t̂, nothing after.
    Hard { t_hat: T },
    /// Logistic σ((t̂ - t)/temperature); converges pointwise to the hard gate
    /// as temperature → 0 except at t = t̂.
    Smooth { t_hat: T, temperature: T },
    /// No gating; evolve over the whole horizon.
    Open,
}

impl<T: Scalar> TimeGate<T> {
    pub fn factor(&self, t: T) -> T {
        match *self {
            TimeGate::Hard { t_hat } => {
                if t <= t_hat {
                    T::one()
                } else {
                    T::zero()
                }
            }
            TimeGate::Smooth { t_hat, temperature } => {
                let x = (t_hat - t) / temperature;
                // stable logistic
                if x >= T::zero() {
                    (T::one() + (-x).exp()).recip()
                } else {
                    let e = x.exp();
                    e / (T::one() + e)
                }
            }
            TimeGate::Open => T::one(),
        }
    }
}

/// Precomputed generator of the joint (or system-only) GKSL equation.
///
/// Both dissipation channels act through diagonal J_z factors, so the
/// dissipator L ρ L − ½{L², ρ} reduces entrywise to
/// −½ (l_i − l_j)² ρ_ij and costs O(dim²); only the commutator needs
/// matrix products.
pub struct GkslGenerator<T: Scalar> {
    h: ComplexMatrix<T>,
    noise: NoiseParams<T>,
    /// Diagonal of J_z ⊗ I (plain J_z in the system-only case).
    deph_s: Vec<T>,
    /// Diagonal of I ⊗ J_z; `None` in the system-only case.
    deph_a: Option<Vec<T>>,
    dim: usize,
}

impl<T: Scalar> GkslGenerator<T> {
    /// `ancilla = None` selects the system-only equation with L = J_z.
    pub fn new(
        h: ComplexMatrix<T>,
        noise: NoiseParams<T>,
        system: &FockSpace<T>,
        ancilla: Option<&FockSpace<T>>,
    ) -> Result<Self> {
        let dim_a = ancilla.map_or(1, |a| a.dim());
        let dim = system.dim() * dim_a;
        if h.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian dimension {} != joint dimension {}",
                h.dim(),
                dim
            )));
        }
        let jz_s: Vec<T> = (0..system.dim()).map(|k| system.jz()[(k, k)].re).collect();
        let (deph_s, deph_a) = match ancilla {
            Some(a) => {
                let jz_a: Vec<T> = (0..a.dim()).map(|k| a.jz()[(k, k)].re).collect();
                let mut ls = Vec::with_capacity(dim);
                let mut la = Vec::with_capacity(dim);
                for &s in &jz_s {
                    for &aa in &jz_a {
                        ls.push(s);
                        la.push(aa);
                    }
                }
                (ls, Some(la))
            }
            None => (jz_s, None),
        };
        Ok(GkslGenerator { h, noise, deph_s, deph_a, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix<T> {
        &self.h
    }

    /// -i[H, ρ] + Σ λ (L ρ L - ½{L², ρ}) with L the Hermitian J_z factors.
    pub fn rhs(&self, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let minus_i = Complex::new(T::zero(), -T::one());
        let h_rho = self.h.matmul(rho);
        let rho_h = rho.matmul(&self.h);
        let mut out = (&h_rho - &rho_h).scale(minus_i);

        let half = T::real(0.5);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut rate = T::zero();
                if !self.noise.lambda_s.is_zero() {
                    let d = self.deph_s[i] - self.deph_s[j];
                    rate += self.noise.lambda_s * d * d;
                }
                if let Some(la) = &self.deph_a {
                    if !self.noise.lambda_a.is_zero() {
                        let d = la[i] - la[j];
                        rate += self.noise.lambda_a * d * d;
                    }
                }
                if !rate.is_zero() {
                    out[(i, j)] = out[(i, j)] - rho[(i, j)].scale(half * rate);
                }
            }
        }
        out
    }

    /// Integrates the equation and samples the trajectory. Gated updates use
    /// the post-step time j·dt.
    pub fn evolve(
        &self,
        rho0: &ComplexMatrix<T>,
        gate: &TimeGate<T>,
        horizon: T,
        dt: T,
        sample_every: usize,
    ) -> Result<Trajectory<T>> {
        if dt <= T::zero() {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        if rho0.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} != generator dimension {}",
                rho0.dim(),
                self.dim
            )));
        }
        let sample_every = sample_every.max(1);
        let steps = (horizon.value() / dt.value()).round() as usize;
        let mut rho = rho0.clone();
        let mut points = Vec::with_capacity(steps / sample_every + 2);
        points.push(sample_point(T::zero(), &rho)?);

        let drift_limit = T::real(1e-4);
        for j in 1..=steps {
            let t_post = dt * T::real(j as f64);
            let g = gate.factor(t_post);
            rho = rk4_step(&rho, dt, |r| self.rhs(r)).apply_gate(&rho, g);

            let drift = (rho.trace().re - T::one()).abs();
            // negated comparison so NaN from a blown-up step also aborts
            if !(drift <= drift_limit) {
                return Err(Error::IntegratorInstability {
                    t: t_post.value(),
                    drift: drift.value(),
                });
            }
            if j % sample_every == 0 || j == steps {
                points.push(sample_point(t_post, &rho)?);
            }
        }
        Ok(points)
    }
}

/// One-shot right-hand side, building the J_z operators on the fly;
/// `dim_a = 1` selects the system-only equation.
pub fn gksl_rhs<T: Scalar>(
    rho: &ComplexMatrix<T>,
    h: &ComplexMatrix<T>,
    noise: NoiseParams<T>,
    dim_s: usize,
    dim_a: usize,
) -> Result<ComplexMatrix<T>> {
    if dim_s < 2 {
        return Err(Error::InvalidArgument("system dimension must be >= 2".into()));
    }
    let system = FockSpace::new(dim_s - 1)?;
    let generator = if dim_a <= 1 {
        GkslGenerator::new(h.clone(), noise, &system, None)?
    } else {
        let ancilla = FockSpace::new(dim_a - 1)?;
        GkslGenerator::new(h.clone(), noise, &system, Some(&ancilla))?
    };
    if rho.dim() != generator.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} != {}",
            rho.dim(),
            generator.dim()
        )));
    }
    Ok(generator.rhs(rho))
}

/// Classic RK4 update ρ + (dt/6)(k₁ + 2k₂ + 2k₃ + k₄).
pub fn rk4_step<T: Scalar>(
    rho: &ComplexMatrix<T>,
    dt: T,
    rhs: impl Fn(&ComplexMatrix<T>) -> ComplexMatrix<T>,
) -> ComplexMatrix<T> {
    let half = T::real(0.5);
    let k1 = rhs(rho);
    let k2 = rhs(&(rho + &k1.scale_re(dt * half)));
    let k3 = rhs(&(rho + &k2.scale_re(dt * half)));
    let k4 = rhs(&(rho + &k3.scale_re(dt)));
    let two = T::real(2.0);
    let sum = &(&k1 + &k2.scale_re(two)) + &(&k3.scale_re(two) + &k4);
    rho + &sum.scale_re(dt / T::real(6.0))
}

/// Completely mixed state I/(n+1), the unique stationary state of the
/// dephasing equation whenever tunneling is present.
pub fn stationary_mix<T: Scalar>(n: usize) -> Result<ComplexMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("particle count must be at least 1".into()));
    }
    Ok(ComplexMatrix::identity(n + 1).scale_re(T::real(1.0 / (n + 1) as f64)))
}

/// Sampled trajectory point with the cheap health indicators used by the
/// trajectory CSV format.
#[derive(Clone, Debug)]
pub struct TrajectoryPoint<T: Scalar> {
    pub t: T,
    pub rho: ComplexMatrix<T>,
    pub trace: T,
    pub min_eigenvalue: T,
}

pub type Trajectory<T> = Vec<TrajectoryPoint<T>>;

fn sample_point<T: Scalar>(t: T, rho: &ComplexMatrix<T>) -> Result<TrajectoryPoint<T>> {
    let spectrum = hermitian_eig(&rho.hermitized())?;
    let min_eigenvalue = spectrum.eigenvalues[0];
    let positivity_floor = T::real(-1e-6);
    if min_eigenvalue < positivity_floor {
        return Err(Error::PositivityLoss {
            t: t.value(),
            min_eigenvalue: min_eigenvalue.value(),
        });
    }
    Ok(TrajectoryPoint {
        t,
        rho: rho.clone(),
        trace: rho.trace().re,
        min_eigenvalue,
    })
}

trait GateApply<T: Scalar> {
    fn apply_gate(self, previous: &ComplexMatrix<T>, factor: T) -> ComplexMatrix<T>;
}

impl<T: Scalar> GateApply<T> for ComplexMatrix<T> {
    /// previous + factor * (updated - previous); the update itself is scaled,
    /// not the state.
    fn apply_gate(self, previous: &ComplexMatrix<T>, factor: T) -> ComplexMatrix<T> {
        if factor == T::one() {
            self
        } else if factor.is_zero() {
            previous.clone()
        } else {
            previous + &(&self - previous).scale_re(factor)
        }
    }
}
