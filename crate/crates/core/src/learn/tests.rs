use super::*;
use crate::eig::hermitian_eig;
use crate::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// One tunneling boson at γ = 0.5, Δ = 1 (Pauli normalization).
fn fig1_system() -> WellParams<f64> {
    WellParams::new(0.0, 0.5, 1.0, 1)
}

fn perfect_transfer_vector() -> LearnVector<f64> {
    // detuning cancellation with the ancilla all-left: alpha = -Δ, t = π/(2γ)
    LearnVector {
        eta_a: 0.0,
        gamma_a: 0.0,
        delta_a: 1.0,
        coupling: Coupling::Scalar(-1.0),
        t_hat_raw: softplus_inv(std::f64::consts::PI),
        ancilla: AncillaParam::Diagonal(vec![0.0, 1.0]),
    }
}

#[test]
fn softplus_inverse_roundtrip() {
    for &y in &[1e-3f64, 0.5, 1.0, 7.3, 40.0] {
        let x = softplus_inv(y);
        assert!((softplus(x) - y).abs() < 1e-12 * y.max(1.0), "roundtrip at {y}");
    }
    assert!(softplus(-50.0) > 0.0, "softplus stays positive");
}

#[test]
fn realize_identity_factor_is_maximally_mixed() {
    let v = LearnVector {
        eta_a: 0.0,
        gamma_a: 0.0,
        delta_a: 0.0,
        coupling: Coupling::Scalar(0.0),
        t_hat_raw: 0.0,
        ancilla: AncillaParam::Factor(ComplexMatrix::identity(2)),
    };
    let rho = v.realize_ancilla().unwrap();
    assert!(rho.approx_eq(&ComplexMatrix::identity(2).scale_re(0.5), 1e-15));
}

#[test]
fn realize_unit_weight_is_all_left_projector() {
    let v = LearnVector {
        eta_a: 0.0,
        gamma_a: 0.0,
        delta_a: 0.0,
        coupling: Coupling::Scalar(0.0),
        t_hat_raw: 0.0,
        ancilla: AncillaParam::Diagonal(vec![0.0, 0.0, 0.0, 1.0]),
    };
    let rho = v.realize_ancilla().unwrap();
    for i in 0..4 {
        let expect = if i == 3 { 1.0 } else { 0.0 };
        assert_eq!(rho[(i, i)], c(expect, 0.0));
    }
}

#[test]
fn realized_ancilla_is_valid_over_many_seeds() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let d = rng.gen_range(2..=5);
        let b = ComplexMatrix::from_fn(d, |_, _| {
            c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        });
        let v = LearnVector {
            eta_a: 0.0,
            gamma_a: 0.0,
            delta_a: 0.0,
            coupling: Coupling::Scalar(0.0),
            t_hat_raw: 0.0,
            ancilla: AncillaParam::Factor(b),
        };
        let rho = v.realize_ancilla().unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let eigs = hermitian_eig(&rho.hermitized()).unwrap().eigenvalues;
        assert!(eigs[0] > -1e-12, "negative eigenvalue {}", eigs[0]);
    }
}

#[test]
fn degenerate_factor_rejected() {
    let v = LearnVector {
        eta_a: 0.0,
        gamma_a: 0.0,
        delta_a: 0.0,
        coupling: Coupling::Scalar(0.0),
        t_hat_raw: 0.0,
        ancilla: AncillaParam::Factor(ComplexMatrix::zeros(3)),
    };
    assert!(matches!(v.realize_ancilla(), Err(Error::DegenerateAncilla)));
}

#[test]
fn flatten_unflatten_roundtrip() {
    let v = perfect_transfer_vector();
    let layout = v.layout();
    let flat = v.flatten();
    assert_eq!(flat.len(), layout.len());
    let back = LearnVector::unflatten(layout, &flat);
    assert_eq!(back.flatten(), flat);

    let vm = LearnVector {
        eta_a: 0.1,
        gamma_a: 0.2,
        delta_a: 0.3,
        coupling: Coupling::Matrix([[0.0, 0.1, 0.2], [0.3, 0.4, 0.5], [0.6, 0.7, 0.8]]),
        t_hat_raw: 1.0,
        ancilla: AncillaParam::Factor(ComplexMatrix::identity(3)),
    };
    let layout_m = vm.layout();
    assert_eq!(layout_m.coupling_len, 9);
    let flat_m = vm.flatten();
    assert_eq!(LearnVector::unflatten(layout_m, &flat_m).flatten(), flat_m);
}

#[test]
fn perfect_transfer_configuration_has_negligible_loss() {
    let cfg = LossConfig {
        system: fig1_system(),
        n_ancilla: 1,
        target_k: 0,
        mode: EvolutionMode::Noiseless,
    };
    let l = loss(&perfect_transfer_vector(), &cfg).unwrap();
    assert!(l < 1e-6, "loss {l} at the analytic optimum");
}

#[test]
fn uncoupled_loss_equals_single_particle_bound() {
    // alpha frozen at 0, t at the single-particle optimum: P = 0.2
    let cfg = LossConfig {
        system: fig1_system(),
        n_ancilla: 1,
        target_k: 0,
        mode: EvolutionMode::Noiseless,
    };
    let omega = (0.25f64 + 1.0).sqrt();
    let v = LearnVector {
        eta_a: 0.0,
        gamma_a: 0.0,
        delta_a: 1.0,
        coupling: Coupling::Scalar(0.0),
        t_hat_raw: softplus_inv(std::f64::consts::FRAC_PI_2 / omega),
        ancilla: AncillaParam::Diagonal(vec![0.0, 1.0]),
    };
    let l = loss(&v, &cfg).unwrap();
    assert!((l - 0.8).abs() < 1e-10, "loss {l}");
}

#[test]
fn vanishing_time_gives_unit_loss() {
    let cfg = LossConfig {
        system: fig1_system(),
        n_ancilla: 1,
        target_k: 0,
        mode: EvolutionMode::Noiseless,
    };
    let mut v = perfect_transfer_vector();
    v.t_hat_raw = -45.0; // t̂ ≈ e^-45
    let l = loss(&v, &cfg).unwrap();
    assert!((l - 1.0).abs() < 1e-12);
}

#[test]
fn gradient_of_fully_frozen_vector_is_zero() {
    let cfg = LossConfig {
        system: fig1_system(),
        n_ancilla: 1,
        target_k: 0,
        mode: EvolutionMode::Noiseless,
    };
    let frozen = FrozenMask {
        eta_a: true,
        gamma_a: true,
        delta_a: true,
        coupling: true,
        t_hat: true,
        ancilla: true,
    };
    let g = gradient(&perfect_transfer_vector(), &cfg, &frozen, GradientEngine::FiniteDiff).unwrap();
    assert!(g.iter().all(|&x| x == 0.0));
}

#[test]
fn finite_diff_and_forward_dual_agree() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let cfg = LossConfig {
        system: fig1_system(),
        n_ancilla: 1,
        target_k: 0,
        mode: EvolutionMode::Noiseless,
    };
    for _ in 0..5 {
        let b = ComplexMatrix::from_fn(2, |_, _| {
            c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        });
        let v = LearnVector {
            eta_a: rng.gen::<f64>() * 2.0 - 1.0,
            gamma_a: rng.gen::<f64>() * 2.0 - 1.0,
            delta_a: rng.gen::<f64>() * 2.0 - 1.0,
            coupling: Coupling::Scalar(rng.gen::<f64>() * 4.0 - 2.0),
            t_hat_raw: rng.gen::<f64>() * 2.0,
            ancilla: AncillaParam::Factor(b),
        };
        let frozen = FrozenMask::none();
        let fd = gradient(&v, &cfg, &frozen, GradientEngine::FiniteDiff).unwrap();
        let dual = gradient(&v, &cfg, &frozen, GradientEngine::ForwardDual).unwrap();
        let scale = dual.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for (i, (a, b)) in fd.iter().zip(&dual).enumerate() {
            // floor absorbs finite-difference roundoff on components whose
            // exact derivative vanishes (identity-shift directions)
            let denom = b.abs().max(1e-3 * scale).max(1e-9);
            assert!(
                ((a - b) / denom).abs() < 1e-5,
                "component {i}: fd {a} vs dual {b}"
            );
        }
    }
}

#[test]
fn time_gradient_changes_sign_across_first_peak() {
    let cfg = LossConfig {
        system: fig1_system(),
        n_ancilla: 1,
        target_k: 0,
        mode: EvolutionMode::Noiseless,
    };
    let frozen = FrozenMask {
        eta_a: true,
        gamma_a: true,
        delta_a: true,
        coupling: true,
        t_hat: false,
        ancilla: true,
    };
    let t_index = 3 + 1; // eta, gamma, delta, alpha, then t
    let grad_at = |t: f64| {
        let mut v = perfect_transfer_vector();
        v.t_hat_raw = softplus_inv(t);
        gradient(&v, &cfg, &frozen, GradientEngine::ForwardDual).unwrap()[t_index]
    };
    // first peak of the perfect-transfer configuration sits at t = π
    let before = grad_at(std::f64::consts::PI - 0.4);
    let after = grad_at(std::f64::consts::PI + 0.4);
    assert!(before < 0.0, "loss should decrease towards the peak: {before}");
    assert!(after > 0.0, "loss should increase past the peak: {after}");
}

#[test]
fn normalize_hamiltonian_examples() {
    let h = ComplexMatrix::<f64>::identity(4).scale_re(2.0);
    let v1 = LearnVector {
        eta_a: 1.0,
        gamma_a: -0.5,
        delta_a: 0.25,
        coupling: Coupling::Scalar(0.5),
        t_hat_raw: 0.0,
        ancilla: AncillaParam::Diagonal(vec![1.0, 0.0]),
    };
    // max magnitude 1: unchanged
    assert!(normalize_hamiltonian(&h, &v1).unwrap().approx_eq(&h, 1e-15));

    let v2 = LearnVector {
        eta_a: 0.3,
        gamma_a: -0.2,
        delta_a: 0.5,
        coupling: Coupling::Scalar(-2.0),
        t_hat_raw: 0.0,
        ancilla: AncillaParam::Diagonal(vec![1.0, 0.0]),
    };
    let h2 = normalize_hamiltonian(&h, &v2).unwrap();
    assert!(h2.approx_eq(&h.scale_re(0.5), 1e-15), "divisor should be 2");

    let v3 = LearnVector {
        eta_a: 0.0,
        gamma_a: 0.0,
        delta_a: 0.0,
        coupling: Coupling::Scalar(0.0),
        t_hat_raw: 0.0,
        ancilla: AncillaParam::Diagonal(vec![1.0, 0.0]),
    };
    assert!(normalize_hamiltonian(&h, &v3).is_err());
}

#[test]
fn fully_frozen_training_reproduces_baseline_every_iteration() {
    let mut cfg = TrainConfig::new(fig1_system(), 1);
    cfg.eta_a = ParamSpec::frozen(0.0);
    cfg.gamma_a = ParamSpec::frozen(0.0);
    cfg.delta_a = ParamSpec::frozen(1.0);
    cfg.coupling = ParamSpec::frozen(0.0);
    cfg.t_frozen = true;
    cfg.ancilla_frozen = true;
    cfg.ancilla_mode = AncillaMode::Diagonal;
    cfg.ancilla_init = AncillaInit::AllLeft;
    cfg.max_iters = 120;
    let report = train(&cfg).unwrap();
    let baseline = report.trace[0].loss;
    for row in &report.trace {
        assert_eq!(row.loss, baseline, "iteration {} deviated", row.iter);
    }
    assert!(report.converged);
}

#[test]
fn training_is_bitwise_deterministic() {
    let mut cfg = TrainConfig::new(fig1_system(), 1);
    cfg.max_iters = 25;
    cfg.seed = 7;
    let a = train(&cfg).unwrap();
    let b = train(&cfg).unwrap();
    assert_eq!(a.trace.len(), b.trace.len());
    for (ra, rb) in a.trace.iter().zip(&b.trace) {
        assert_eq!(ra.loss.to_bits(), rb.loss.to_bits());
        assert_eq!(ra.alpha.to_bits(), rb.alpha.to_bits());
        assert_eq!(ra.t_hat.to_bits(), rb.t_hat.to_bits());
    }
}

#[test]
fn frozen_ancilla_training_recovers_uncoupled_optimum() {
    // learning t alone recovers the analytic single-particle maximum
    let mut cfg = TrainConfig::new(fig1_system(), 1);
    cfg.eta_a = ParamSpec::frozen(0.0);
    cfg.gamma_a = ParamSpec::frozen(0.0);
    cfg.delta_a = ParamSpec::frozen(1.0);
    cfg.coupling = ParamSpec::frozen(0.0);
    cfg.ancilla_frozen = true;
    cfg.ancilla_mode = AncillaMode::Diagonal;
    cfg.ancilla_init = AncillaInit::AllLeft;
    cfg.t_init = 1.0;
    cfg.max_iters = 1500;
    cfg.engine = GradientEngine::ForwardDual;
    let report = train(&cfg).unwrap();
    let best_loss = report.trace.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min);
    // uncoupled bound: P* = γ²/ω² = 0.2
    assert!(
        (best_loss - 0.8).abs() < 1e-6,
        "best loss {best_loss} vs analytic 0.8"
    );
    let omega = 1.25f64.sqrt();
    let t_expected = std::f64::consts::FRAC_PI_2 / omega;
    assert!(
        (report.t_hat - t_expected).abs() < 1e-2,
        "t̂ = {} vs analytic {}",
        report.t_hat,
        t_expected
    );
}

#[test]
fn noisy_loss_runs_and_is_bounded() {
    let cfg = LossConfig {
        system: WellParams::new(0.0, 0.5, 1.0, 1),
        n_ancilla: 1,
        target_k: 0,
        mode: EvolutionMode::Noisy {
            lambda_s: 0.01,
            lambda_a: 0.01,
            horizon: 5.0,
            dt: 0.05,
            gate_temperature: 0.05,
        },
    };
    let l = loss(&perfect_transfer_vector(), &cfg).unwrap();
    assert!((0.0..=1.0).contains(&l), "noisy loss {l}");
    // dephasing must cost probability relative to the noiseless optimum
    assert!(l > 1e-4, "noise should degrade the perfect-transfer loss: {l}");
}

#[test]
fn unstable_noisy_probe_scores_as_total_failure() {
    // interaction strength far outside the RK4 stability region at this dt
    let cfg = LossConfig {
        system: WellParams::new(40.0, 0.5, 1.0, 4),
        n_ancilla: 4,
        target_k: 0,
        mode: EvolutionMode::Noisy {
            lambda_s: 0.01,
            lambda_a: 0.01,
            horizon: 10.0,
            dt: 0.05,
            gate_temperature: 0.05,
        },
    };
    let v = LearnVector {
        eta_a: 40.0,
        gamma_a: 1.0,
        delta_a: 1.0,
        coupling: Coupling::Scalar(1.0),
        t_hat_raw: softplus_inv(1.0),
        ancilla: AncillaParam::Diagonal(vec![0.0, 0.0, 0.0, 0.0, 1.0]),
    };
    assert_eq!(loss(&v, &cfg).unwrap(), 1.0);
}

#[test]
fn loss_invariant_under_factor_phase_and_weight_signs() {
    let cfg = LossConfig {
        system: fig1_system(),
        n_ancilla: 2,
        target_k: 0,
        mode: EvolutionMode::Noiseless,
    };
    let base = LearnVector {
        eta_a: 0.4,
        gamma_a: 0.7,
        delta_a: 1.1,
        coupling: Coupling::Scalar(-0.6),
        t_hat_raw: softplus_inv(1.7),
        ancilla: AncillaParam::Factor(ComplexMatrix::from_fn(3, |i, j| {
            c(0.3 * (i as f64 + 1.0), 0.2 * (j as f64 - 1.0))
        })),
    };
    let reference = loss(&base, &cfg).unwrap();

    // global phase on the factor
    let mut phased = base.clone();
    if let AncillaParam::Factor(b) = &base.ancilla {
        let z = C64::from_polar(1.0, 1.234);
        phased.ancilla = AncillaParam::Factor(b.scale(z));
    }
    assert!((loss(&phased, &cfg).unwrap() - reference).abs() < 1e-14);

    // sign flips of diagonal weights
    let diag = LearnVector {
        ancilla: AncillaParam::Diagonal(vec![0.4, -0.6, 0.2]),
        ..base.clone()
    };
    let flipped = LearnVector {
        ancilla: AncillaParam::Diagonal(vec![-0.4, 0.6, 0.2]),
        ..base.clone()
    };
    assert!((loss(&diag, &cfg).unwrap() - loss(&flipped, &cfg).unwrap()).abs() < 1e-14);
}

#[test]
fn dual_engine_handles_the_noisy_objective() {
    // forward-mode duals thread through RK4 and the logistic time gate too
    let cfg = LossConfig {
        system: fig1_system(),
        n_ancilla: 1,
        target_k: 0,
        mode: EvolutionMode::Noisy {
            lambda_s: 0.02,
            lambda_a: 0.01,
            horizon: 3.0,
            dt: 0.05,
            gate_temperature: 0.05,
        },
    };
    let v = LearnVector {
        eta_a: 0.3,
        gamma_a: 0.4,
        delta_a: 0.9,
        coupling: Coupling::Scalar(-0.8),
        t_hat_raw: softplus_inv(1.5),
        ancilla: AncillaParam::Diagonal(vec![0.6, 0.8]),
    };
    let frozen = FrozenMask::none();
    let fd = gradient(&v, &cfg, &frozen, GradientEngine::FiniteDiff).unwrap();
    let dual = gradient(&v, &cfg, &frozen, GradientEngine::ForwardDual).unwrap();
    let scale = dual.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    for (i, (a, b)) in fd.iter().zip(&dual).enumerate() {
        let denom = b.abs().max(1e-2 * scale).max(1e-9);
        assert!(
            ((a - b) / denom).abs() < 1e-4,
            "noisy component {i}: fd {a} vs dual {b}"
        );
    }
}
