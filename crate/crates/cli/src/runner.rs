//! Experiment orchestration: one function per CLI subcommand.
//!
//! Configuration well and coupling parameters are in the Pauli
//! normalization; the angular-momentum builders receive them through
//! `model::well_params_from_pauli` / `model::coupling_from_pauli`.

use std::fs;
use std::path::Path;

use log::info;
use rayon::prelude::*;

use tunnelcat::closedform::{coupled_prob, SimpleLimitParams};
use tunnelcat::dynamics::{transfer_probability, Propagator};
use tunnelcat::eig::hermitian_eig;
use tunnelcat::fock::{kron, partial_trace_ancilla, FockSpace};
use tunnelcat::learn::{
    self, AdamConfig, AncillaInit, AncillaMode, EvolutionMode, GradientEngine, ParamSpec,
    ScalarInit, TrainConfig, TrainReport,
};
use tunnelcat::lindblad::{GkslGenerator, NoiseParams, TimeGate};
use tunnelcat::matrix::ComplexMatrix;
use tunnelcat::model::{
    build_interaction, build_joint_h, build_well_h, coupling_from_pauli, well_params_from_pauli,
    Coupling,
};
use tunnelcat::{C64, Matrix64};

use crate::config::{ExperimentConfig, Mode, WellSection};
use crate::error::{CliError, Result};
use crate::svg::{emit_svg, Axes, Series};

pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output.dir)?;
    write_manifest(cfg)?;
    match cfg.mode {
        Mode::Simulate => simulate(cfg),
        Mode::Train => train_mode(cfg),
        Mode::Sweep => sweep(cfg),
        Mode::OracleCheck => oracle_check(cfg),
    }
}

fn write_manifest(cfg: &ExperimentConfig) -> Result<()> {
    let manifest = format!(
        "config_hash = \"{}\"\nseed = {}\nversion = \"{}\"\nmode = \"{:?}\"\n",
        cfg.semantic_hash(),
        cfg.optimizer.seed,
        env!("CARGO_PKG_VERSION"),
        cfg.mode,
    );
    fs::write(cfg.output.dir.join("manifest.toml"), manifest)?;
    Ok(())
}

fn well_to_j(section: &WellSection) -> tunnelcat::model::WellParams<f64> {
    well_params_from_pauli(section.eta, section.gamma, section.delta, section.n as usize)
}

/// Initial density matrix named by a config `state` string.
fn named_state(space: &FockSpace<f64>, name: &str, seed: u64) -> Result<Matrix64> {
    use rand::{Rng, SeedableRng};
    let dim = space.dim();
    Ok(match name {
        "all_left" => space.all_left(),
        "all_right" => space.all_right(),
        "plus" => {
            // coherent 50/50 superposition of all-left and all-right
            let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let mut rho = Matrix64::zeros(dim);
            for &i in &[0, dim - 1] {
                for &j in &[0, dim - 1] {
                    rho[(i, j)] = a * a.conj();
                }
            }
            rho
        }
        "mixed" => Matrix64::identity(dim).scale_re(1.0 / dim as f64),
        "random" => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let b = Matrix64::from_fn(dim, |_, _| {
                C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
            });
            let bbt = b.matmul(&b.adjoint());
            let tr = bbt.trace().re;
            bbt.scale_re(1.0 / tr)
        }
        other => return Err(CliError::Config(format!("unknown state {other:?}"))),
    })
}

struct TrajectoryRow {
    t: f64,
    p_target: f64,
    trace: f64,
    min_eig: f64,
    rho: Option<Matrix64>,
}

fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow], dim: usize) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec![
        "t".to_string(),
        "P_target".to_string(),
        "trace".to_string(),
        "min_eig".to_string(),
    ];
    if rows.iter().any(|r| r.rho.is_some()) {
        for i in 0..dim {
            for j in 0..dim {
                header.push(format!("rho_re_{i}_{j}"));
                header.push(format!("rho_im_{i}_{j}"));
            }
        }
    }
    writer.write_record(&header)?;
    for row in rows {
        let mut record = vec![
            format!("{:.12e}", row.t),
            format!("{:.12e}", row.p_target),
            format!("{:.12e}", row.trace),
            format!("{:.12e}", row.min_eig),
        ];
        if let Some(rho) = &row.rho {
            for i in 0..dim {
                for j in 0..dim {
                    record.push(format!("{:.12e}", rho[(i, j)].re));
                    record.push(format!("{:.12e}", rho[(i, j)].im));
                }
            }
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Samples P(t) for a noiseless joint (or bare) evolution on a uniform grid.
fn noiseless_rows(
    rho0: &Matrix64,
    h: &Matrix64,
    dims: Option<(usize, usize)>,
    horizon: f64,
    n_samples: usize,
    write_rho: bool,
) -> Result<Vec<TrajectoryRow>> {
    let propagator = Propagator::new(rho0, h).map_err(CliError::numerical("propagator setup"))?;
    let mut rows = Vec::with_capacity(n_samples + 1);
    for i in 0..=n_samples {
        let t = horizon * i as f64 / n_samples as f64;
        let joint = propagator.at(t);
        let rho_s = match dims {
            Some((ds, da)) => partial_trace_ancilla(&joint, ds, da)
                .map_err(CliError::numerical("partial trace"))?,
            None => joint,
        };
        let p = transfer_probability(&rho_s, 0).map_err(CliError::numerical("probability"))?;
        let spectrum = hermitian_eig(&rho_s.hermitized())
            .map_err(CliError::numerical("state spectrum"))?;
        rows.push(TrajectoryRow {
            t,
            p_target: p,
            trace: rho_s.trace().re,
            min_eig: spectrum.eigenvalues[0],
            rho: write_rho.then(|| rho_s.clone()),
        });
    }
    Ok(rows)
}

fn simulate(cfg: &ExperimentConfig) -> Result<()> {
    let out = &cfg.output.dir;
    let system = FockSpace::new(cfg.system.n as usize)
        .map_err(CliError::numerical("system space"))?;
    let h_s = build_well_h(&well_to_j(&cfg.system), &system)
        .map_err(CliError::numerical("system Hamiltonian"))?;
    let rho_s0 = named_state(
        &system,
        cfg.system.state.as_deref().unwrap_or("all_left"),
        cfg.optimizer.seed,
    )?;
    let horizon = cfg.integrator.horizon_t;
    let noisy = cfg.is_noisy();
    let n_samples =
        ((horizon / cfg.integrator.dt) as usize / cfg.integrator.sample_every).max(2);

    // bare system reference
    let bare_rows = if noisy {
        let generator = GkslGenerator::new(
            h_s.clone(),
            NoiseParams::new(cfg.noise.lambda_s, 0.0)
                .map_err(CliError::numerical("noise parameters"))?,
            &system,
            None,
        )
        .map_err(CliError::numerical("bare generator"))?;
        gksl_rows(&generator, &rho_s0, None, horizon, cfg, system.dim())?
    } else {
        noiseless_rows(&rho_s0, &h_s, None, horizon, n_samples, cfg.output.write_rho)?
    };
    write_trajectory_csv(&out.join("bare.csv"), &bare_rows, system.dim())?;
    info!(
        "bare curve: peak P = {:.6}",
        bare_rows.iter().map(|r| r.p_target).fold(0.0, f64::max)
    );

    let mut series = vec![Series {
        label: "no coupling".into(),
        points: bare_rows.iter().map(|r| (r.t, r.p_target)).collect(),
        color: Some("#d62728".into()),
    }];

    if let Some(anc) = &cfg.ancilla {
        let ancilla =
            FockSpace::new(anc.n as usize).map_err(CliError::numerical("ancilla space"))?;
        let h_a = build_well_h(&well_to_j(anc), &ancilla)
            .map_err(CliError::numerical("ancilla Hamiltonian"))?;
        let coupling = cfg.coupling.clone().unwrap_or_default();
        let base = if coupling.matrix {
            Coupling::Matrix([[coupling.alpha; 3]; 3])
        } else {
            Coupling::Scalar(coupling.alpha)
        };
        let h_int = build_interaction(&coupling_from_pauli(&base), &system, &ancilla);
        let h = build_joint_h(&h_s, &h_a, &h_int)
            .map_err(CliError::numerical("joint Hamiltonian"))?;
        let rho_a0 = named_state(
            &ancilla,
            anc.state.as_deref().unwrap_or("all_left"),
            cfg.optimizer.seed,
        )?;
        let rho0 = kron(&rho_s0, &rho_a0);
        let coupled_rows = if noisy {
            let generator = GkslGenerator::new(
                h,
                NoiseParams::new(cfg.noise.lambda_s, cfg.noise.lambda_a)
                    .map_err(CliError::numerical("noise parameters"))?,
                &system,
                Some(&ancilla),
            )
            .map_err(CliError::numerical("joint generator"))?;
            gksl_rows(
                &generator,
                &rho0,
                Some((system.dim(), ancilla.dim())),
                horizon,
                cfg,
                system.dim(),
            )?
        } else {
            noiseless_rows(
                &rho0,
                &h,
                Some((system.dim(), ancilla.dim())),
                horizon,
                n_samples,
                cfg.output.write_rho,
            )?
        };
        info!(
            "coupled curve: peak P = {:.6}",
            coupled_rows.iter().map(|r| r.p_target).fold(0.0, f64::max)
        );
        write_trajectory_csv(&out.join("coupled.csv"), &coupled_rows, system.dim())?;
        series.push(Series {
            label: format!("ancilla n = {}", anc.n),
            points: coupled_rows.iter().map(|r| (r.t, r.p_target)).collect(),
            color: None,
        });
    }

    if cfg.output.plot {
        emit_svg(
            &series,
            &Axes {
                title: "Transfer probability".into(),
                x_label: "t".into(),
                y_label: "P".into(),
            },
            &out.join("probability.svg"),
        )?;
    }
    Ok(())
}

/// GKSL trajectory sampled into CSV rows; trace/min_eig describe the evolving
/// joint state, P the reduced system.
fn gksl_rows(
    generator: &GkslGenerator<f64>,
    rho0: &Matrix64,
    dims: Option<(usize, usize)>,
    horizon: f64,
    cfg: &ExperimentConfig,
    system_dim: usize,
) -> Result<Vec<TrajectoryRow>> {
    let trajectory = generator
        .evolve(
            rho0,
            &TimeGate::Open,
            horizon,
            cfg.integrator.dt,
            cfg.integrator.sample_every,
        )
        .map_err(CliError::numerical("GKSL integration"))?;
    let mut rows = Vec::with_capacity(trajectory.len());
    for point in trajectory {
        let rho_s = match dims {
            Some((ds, da)) => partial_trace_ancilla(&point.rho, ds, da)
                .map_err(CliError::numerical("partial trace"))?,
            None => point.rho.clone(),
        };
        debug_assert_eq!(rho_s.dim(), system_dim);
        let p = transfer_probability(&rho_s, 0).map_err(CliError::numerical("probability"))?;
        rows.push(TrajectoryRow {
            t: point.t,
            p_target: p,
            trace: point.trace,
            min_eig: point.min_eigenvalue,
            rho: cfg.output.write_rho.then_some(point.rho),
        });
    }
    Ok(rows)
}

fn build_train_config(cfg: &ExperimentConfig, n_s: usize, n_a: usize, seed: u64) -> TrainConfig {
    let anc = cfg.ancilla.as_ref().expect("validated: train needs ancilla");
    let frozen = |name: &str| anc.frozen.iter().any(|f| f == name);
    let coupling = cfg.coupling.clone().unwrap_or_default();
    let mut tc = TrainConfig::new(
        tunnelcat::model::WellParams::new(
            cfg.system.eta,
            cfg.system.gamma,
            cfg.system.delta,
            n_s,
        ),
        n_a,
    );
    tc.eta_a = ParamSpec { init: anc.eta, frozen: frozen("eta") };
    tc.gamma_a = ParamSpec { init: anc.gamma, frozen: frozen("gamma") };
    tc.delta_a = ParamSpec { init: anc.delta, frozen: frozen("delta") };
    tc.coupling = ParamSpec { init: coupling.alpha, frozen: coupling.frozen };
    tc.matrix_coupling = coupling.matrix;
    tc.t_init = cfg.optimizer.t_init;
    tc.t_frozen = cfg.optimizer.t_frozen;
    tc.ancilla_mode = match cfg.resolved_ancilla_mode() {
        "diagonal" => AncillaMode::Diagonal,
        _ => AncillaMode::Factor,
    };
    tc.ancilla_init = match anc.state.as_deref() {
        Some("all_left") => AncillaInit::AllLeft,
        Some("plus") => AncillaInit::Plus,
        _ => AncillaInit::Random,
    };
    tc.ancilla_frozen = anc.frozen_state;
    tc.scalar_init = match cfg.optimizer.init.as_str() {
        "random" => ScalarInit::RandomUniform,
        _ => ScalarInit::FromSpec,
    };
    tc.mode = if cfg.is_noisy() {
        EvolutionMode::Noisy {
            lambda_s: cfg.noise.lambda_s,
            lambda_a: cfg.noise.lambda_a,
            horizon: cfg.optimizer.train_horizon,
            dt: cfg.optimizer.train_dt,
            gate_temperature: cfg.optimizer.train_dt,
        }
    } else {
        EvolutionMode::Noiseless
    };
    tc.optimizer = AdamConfig { lr: cfg.optimizer.lr, ..AdamConfig::default() };
    tc.max_iters = cfg.optimizer.max_iters;
    tc.seed = seed;
    tc.engine = match cfg.optimizer.engine.as_str() {
        "forward_dual" => GradientEngine::ForwardDual,
        _ => GradientEngine::FiniteDiff,
    };
    tc
}

fn write_training_trace(path: &Path, report: &TrainReport) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "iter",
        "loss",
        "eta_a",
        "gamma_a",
        "delta_a",
        "alpha",
        "t_hat",
        "trace_rho_a",
    ])?;
    for row in &report.trace {
        writer.write_record(&[
            row.iter.to_string(),
            format!("{:.12e}", row.loss),
            format!("{:.12e}", row.eta_a),
            format!("{:.12e}", row.gamma_a),
            format!("{:.12e}", row.delta_a),
            format!("{:.12e}", row.alpha),
            format!("{:.12e}", row.t_hat),
            format!("{:.12e}", row.trace_rho_a),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Post-training probability curve under the normalized Hamiltonian.
fn evaluation_rows(
    cfg: &ExperimentConfig,
    report: &TrainReport,
    n_s: usize,
    n_a: usize,
) -> Result<Vec<TrajectoryRow>> {
    let system = FockSpace::new(n_s).map_err(CliError::numerical("system space"))?;
    let ancilla = FockSpace::new(n_a).map_err(CliError::numerical("ancilla space"))?;
    let v = &report.final_vector;
    let h_s = build_well_h(
        &well_params_from_pauli(cfg.system.eta, cfg.system.gamma, cfg.system.delta, n_s),
        &system,
    )
    .map_err(CliError::numerical("system Hamiltonian"))?;
    let h_a = build_well_h(
        &well_params_from_pauli(v.eta_a, v.gamma_a, v.delta_a, n_a),
        &ancilla,
    )
    .map_err(CliError::numerical("ancilla Hamiltonian"))?;
    let h_int = build_interaction(&coupling_from_pauli(&v.coupling), &system, &ancilla);
    let h = build_joint_h(&h_s, &h_a, &h_int).map_err(CliError::numerical("joint Hamiltonian"))?;
    let h_norm =
        learn::normalize_hamiltonian(&h, v).map_err(CliError::numerical("normalization"))?;
    let rho0 = kron(&system.all_left(), &report.realized_ancilla);
    let window = (1.5 * report.t_star).max(cfg.integrator.horizon_t);
    if cfg.is_noisy() {
        let generator = GkslGenerator::new(
            h_norm,
            NoiseParams::new(cfg.noise.lambda_s, cfg.noise.lambda_a)
                .map_err(CliError::numerical("noise parameters"))?,
            &system,
            Some(&ancilla),
        )
        .map_err(CliError::numerical("generator"))?;
        gksl_rows(
            &generator,
            &rho0,
            Some((system.dim(), ancilla.dim())),
            window,
            cfg,
            system.dim(),
        )
    } else {
        noiseless_rows(
            &rho0,
            &h_norm,
            Some((system.dim(), ancilla.dim())),
            window,
            400,
            cfg.output.write_rho,
        )
    }
}

fn train_mode(cfg: &ExperimentConfig) -> Result<()> {
    let out = &cfg.output.dir;
    let n_s = cfg.system.n as usize;
    let n_a = cfg.ancilla.as_ref().expect("validated").n as usize;
    let tc = build_train_config(cfg, n_s, n_a, cfg.optimizer.seed);
    let report = learn::train(&tc).map_err(CliError::numerical("training"))?;
    info!(
        "training finished: {} iterations, converged = {}, P(t̂) = {:.6}, curve peak P* = {:.6} at t* = {:.4}",
        report.iterations, report.converged, report.p_at_t_hat, report.p_star, report.t_star
    );
    write_training_trace(&out.join("training_trace.csv"), &report)?;
    let rows = evaluation_rows(cfg, &report, n_s, n_a)?;
    write_trajectory_csv(&out.join("evaluation.csv"), &rows, n_s + 1)?;
    write_report_summary(&out.join("report.toml"), &report)?;

    if cfg.output.plot {
        let loss_series = Series {
            label: "loss".into(),
            points: report.trace.iter().map(|r| (r.iter as f64, r.loss)).collect(),
            color: None,
        };
        emit_svg(
            &[loss_series],
            &Axes {
                title: "Training loss".into(),
                x_label: "iteration".into(),
                y_label: "1 - P".into(),
            },
            &out.join("training_loss.svg"),
        )?;
        emit_svg(
            &[Series {
                label: "after learning".into(),
                points: rows.iter().map(|r| (r.t, r.p_target)).collect(),
                color: None,
            }],
            &Axes {
                title: "Transfer probability after learning".into(),
                x_label: "t (normalized H)".into(),
                y_label: "P".into(),
            },
            &out.join("evaluation.svg"),
        )?;
    }
    Ok(())
}

fn write_report_summary(path: &Path, report: &TrainReport) -> Result<()> {
    let v = &report.final_vector;
    let summary = format!(
        "iterations = {}\nconverged = {}\nt_hat = {:.12e}\np_at_t_hat = {:.12e}\nt_star = {:.12e}\np_star = {:.12e}\neta_a = {:.12e}\ngamma_a = {:.12e}\ndelta_a = {:.12e}\nalpha = {:.12e}\nwall_clock_s = {:.3}\n",
        report.iterations,
        report.converged,
        report.t_hat,
        report.p_at_t_hat,
        report.t_star,
        report.p_star,
        v.eta_a,
        v.gamma_a,
        v.delta_a,
        v.alpha_zz(),
        report.wall_clock.as_secs_f64(),
    );
    fs::write(path, summary)?;
    Ok(())
}

fn sweep(cfg: &ExperimentConfig) -> Result<()> {
    let out = &cfg.output.dir;
    let sweep = cfg.sweep.as_ref().expect("validated");
    let mut cells = Vec::new();
    for &n_s in &sweep.n_s {
        for &n_a in &sweep.n_a {
            for &seed in &sweep.seeds {
                cells.push((n_s as usize, n_a as usize, seed));
            }
        }
    }
    info!("sweep over {} cells", cells.len());

    let results: Vec<Result<(usize, usize, u64, TrainReport)>> = cells
        .par_iter()
        .map(|&(n_s, n_a, seed)| {
            let tc = build_train_config(cfg, n_s, n_a, seed);
            let report = learn::train(&tc).map_err(CliError::numerical(format!(
                "training cell (n_s={n_s}, n_a={n_a}, seed={seed})"
            )))?;
            Ok((n_s, n_a, seed, report))
        })
        .collect();

    let mut rows = Vec::new();
    for r in results {
        rows.push(r?);
    }
    rows.sort_by_key(|(n_s, n_a, seed, _)| (*n_s, *n_a, *seed));

    let mut writer = csv::Writer::from_path(out.join("sweep.csv"))?;
    writer.write_record([
        "n_s", "n_a", "p_star", "t_star", "eta_a", "gamma_a", "delta_a", "alpha", "iterations",
        "seed",
    ])?;
    for (n_s, n_a, seed, report) in &rows {
        let v = &report.final_vector;
        writer.write_record(&[
            n_s.to_string(),
            n_a.to_string(),
            format!("{:.12e}", report.p_star),
            format!("{:.12e}", report.t_star),
            format!("{:.12e}", v.eta_a),
            format!("{:.12e}", v.gamma_a),
            format!("{:.12e}", v.delta_a),
            format!("{:.12e}", v.alpha_zz()),
            report.iterations.to_string(),
            seed.to_string(),
        ])?;
    }
    writer.flush()?;

    if cfg.output.plot {
        plot_sweep(cfg, &rows)?;
    }
    Ok(())
}

/// One panel per system size: after-learning curves for each ancilla size
/// against the uncoupled baseline in red.
fn plot_sweep(cfg: &ExperimentConfig, rows: &[(usize, usize, u64, TrainReport)]) -> Result<()> {
    let out = &cfg.output.dir;
    let mut system_sizes: Vec<usize> = rows.iter().map(|r| r.0).collect();
    system_sizes.sort_unstable();
    system_sizes.dedup();
    for n_s in system_sizes {
        let mut series = Vec::new();
        let system = FockSpace::new(n_s).map_err(CliError::numerical("system space"))?;
        let h_s = build_well_h(
            &well_params_from_pauli(cfg.system.eta, cfg.system.gamma, cfg.system.delta, n_s),
            &system,
        )
        .map_err(CliError::numerical("system Hamiltonian"))?;
        let bare = noiseless_rows(
            &system.all_left(),
            &h_s,
            None,
            cfg.integrator.horizon_t,
            400,
            false,
        )?;
        series.push(Series {
            label: "no coupling".into(),
            points: bare.iter().map(|r| (r.t, r.p_target)).collect(),
            color: Some("#d62728".into()),
        });
        for (ns, n_a, seed, report) in rows.iter().filter(|r| r.0 == n_s) {
            if *seed != rows.iter().find(|r| r.0 == *ns && r.1 == *n_a).unwrap().2 {
                continue; // one representative seed per curve
            }
            let eval = evaluation_rows(cfg, report, *ns, *n_a)?;
            series.push(Series {
                label: format!("n_a = {n_a}"),
                points: eval.iter().map(|r| (r.t, r.p_target)).collect(),
                color: None,
            });
        }
        emit_svg(
            &series,
            &Axes {
                title: format!("Transfer probability, n_s = {n_s}"),
                x_label: "t (normalized H)".into(),
                y_label: "P".into(),
            },
            &out.join(format!("sweep_ns{n_s}.svg")),
        )?;
    }
    Ok(())
}

/// Cross-validates the reduced dynamics against the solvable-limit formula on
/// random couplings and random pure ancilla states.
fn oracle_check(cfg: &ExperimentConfig) -> Result<()> {
    use rand::{Rng, SeedableRng};
    let out = &cfg.output.dir;
    let n_a = cfg.ancilla.as_ref().map(|a| a.n as usize).unwrap_or(3);
    let (gamma, delta) = (cfg.system.gamma, cfg.system.delta);
    let n_seeds = 10;
    let n_times = 50;
    let tolerance = 1e-8;

    let mut writer = csv::Writer::from_path(out.join("oracle_check.csv"))?;
    writer.write_record(["n_a", "seed", "alpha", "max_abs_err"])?;
    let mut worst: f64 = 0.0;
    for seed in 0..n_seeds {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.optimizer.seed + seed);
        let alpha_sigma: f64 = rng.gen::<f64>() * 4.0 - 2.0;
        let mut amplitudes: Vec<C64> = (0..=n_a)
            .map(|_| C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
            .collect();
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amplitudes {
            *a /= C64::new(norm, 0.0);
        }

        let params = SimpleLimitParams::new(gamma, delta, alpha_sigma, n_a, amplitudes.clone())
            .map_err(CliError::numerical("oracle parameters"))?;

        // simulator side via the convention bridge
        let system = FockSpace::new(1).map_err(CliError::numerical("system space"))?;
        let ancilla = FockSpace::new(n_a).map_err(CliError::numerical("ancilla space"))?;
        let h_s = build_well_h(&well_params_from_pauli(0.0, gamma, delta, 1), &system)
            .map_err(CliError::numerical("system Hamiltonian"))?;
        let h_a = build_well_h(&well_params_from_pauli(0.0, 0.0, delta, n_a), &ancilla)
            .map_err(CliError::numerical("ancilla Hamiltonian"))?;
        // sigma-J interaction alpha maps to half the Pauli-pair coupling
        let h_int = build_interaction(
            &coupling_from_pauli(&Coupling::Scalar(alpha_sigma / 2.0)),
            &system,
            &ancilla,
        );
        let h = build_joint_h(&h_s, &h_a, &h_int)
            .map_err(CliError::numerical("joint Hamiltonian"))?;
        let rho_a = ComplexMatrix::from_fn(n_a + 1, |i, j| amplitudes[i] * amplitudes[j].conj());
        let rho0 = kron(&system.all_left(), &rho_a);
        let propagator =
            Propagator::new(&rho0, &h).map_err(CliError::numerical("propagator"))?;

        let mut max_err: f64 = 0.0;
        for _ in 0..n_times {
            let t = rng.gen::<f64>() * cfg.integrator.horizon_t;
            let reduced = partial_trace_ancilla(&propagator.at(t), 2, n_a + 1)
                .map_err(CliError::numerical("partial trace"))?;
            let simulated =
                transfer_probability(&reduced, 0).map_err(CliError::numerical("probability"))?;
            let closed = coupled_prob(&params, t);
            max_err = max_err.max((simulated - closed).abs());
        }
        writer.write_record(&[
            n_a.to_string(),
            (cfg.optimizer.seed + seed).to_string(),
            format!("{alpha_sigma:.12e}"),
            format!("{max_err:.12e}"),
        ])?;
        worst = worst.max(max_err);
    }
    writer.flush()?;
    info!("oracle check: max |simulated - closed form| = {worst:.3e}");
    if worst >= tolerance {
        return Err(CliError::Numerical {
            context: format!("oracle check failed: max error {worst:.3e} >= {tolerance:.1e}"),
            source: tunnelcat::Error::InvalidArgument("oracle deviation".into()),
        });
    }
    Ok(())
}
