use qfocus_core::congruence::{
    detect_collapse, evolve_classical_raychaudhuri, potential_from_background,
    raychaudhuri_potential, solve_linear_phi,
};
use qfocus_core::green::refinement_study;
use qfocus_core::qstat::kernels::FACTORIAL_7;
use qfocus_core::qstat::{first_order_field_kernel, mean_phi, variance_adiabatic, Profile};
use qfocus_core::stochastic::simulate_poisson_collapse;
use qfocus_core::{GaussianModel, GreenOperator, Potential, Trajectory};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::record::{
    ClassicalSummary, DiagnosticsSummary, MomentsSummary, Results, RunKind, RunRecord,
};

/// A finished run: the record and, where one exists, its trajectory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub trajectory: Option<Trajectory>,
}

pub fn run(kind: RunKind, config: RunConfig) -> Result<RunOutput, CliError> {
    match kind {
        RunKind::Classical => run_classical(config),
        RunKind::Moments => run_moments(config),
        RunKind::Mc => run_mc(config),
        RunKind::Diagnostics => run_diagnostics(config),
    }
}

pub fn run_classical(config: RunConfig) -> Result<RunOutput, CliError> {
    let settings = config.require_classical()?;
    let grid = config.grid;
    let bg = config.background.resolve(&grid);
    bg.validate(&grid)?;
    let evolution =
        evolve_classical_raychaudhuri(settings.theta0, &bg, &grid, settings.blowup_threshold)?;

    let potential = raychaudhuri_potential(&bg, &grid)?;
    let phi = solve_linear_phi(1.0, settings.theta0 / 3.0, &potential, None)?;
    let phi_collapse_time = detect_collapse(&phi, settings.zero_tol);

    let summary = ClassicalSummary {
        theta0: settings.theta0,
        diverged: evolution.diverged(),
        divergence_time: evolution.divergence_time,
        phi_collapse_time,
        samples: evolution.theta.len(),
        step: grid.step(),
    };
    let results = Results {
        classical: Some(summary),
        ..Default::default()
    };
    Ok(RunOutput {
        record: RunRecord::new(RunKind::Classical, config, results),
        trajectory: Some(evolution.theta),
    })
}

pub fn run_moments(config: RunConfig) -> Result<RunOutput, CliError> {
    if !config.background.is_flat() {
        return Err(CliError::Config {
            field: "background".into(),
            message: "moments are defined on the flat background only".into(),
        });
    }
    let f = config.require_smearing()?.clone();
    f.validate()?;
    let phi0 = config.phi0;
    if !phi0.is_finite() {
        return Err(CliError::Config {
            field: "phi0".into(),
            message: "must be finite".into(),
        });
    }
    config.coupling.check_resolved(&config.grid)?;

    let green = GreenOperator::new(Potential::zero(config.grid));
    let mean = mean_phi(
        &f,
        &config.coupling,
        &config.renorm,
        phi0,
        &green,
        &config.conventions,
    )?;
    let variance = variance_adiabatic(&f, phi0)?;

    let variance_quoted = match f.profile {
        Profile::Gaussian => {
            Some(2.0 * (phi0 * f.normalization).powi(2) / (FACTORIAL_7 * f.tau.powi(4)))
        }
        Profile::Sampled { .. } => None,
    };
    let variance_ratio = variance_quoted
        .filter(|_| variance > 0.0)
        .map(|q| q / variance);
    let variance_constant_mismatch = variance_ratio.is_some_and(|r| (r - 1.0).abs() > 1e-12);

    let gaussian_model = (variance > 0.0)
        .then(|| GaussianModel::new(mean.total, variance.sqrt()))
        .transpose()?;
    let collapse = match gaussian_model {
        Some(m) => m.collapse_probability()?,
        // Degenerate width: the limit of Φ(-mean/σ) as σ → 0.
        None if mean.total > 0.0 => 0.0,
        None if mean.total < 0.0 => 1.0,
        None => 0.5,
    };
    let tau_equivalent = gaussian_model.and_then(|m| m.tau());

    let weight = first_order_field_kernel(&f, &config.coupling, phi0, &green)?;
    let summary = MomentsSummary {
        mean,
        variance,
        variance_quoted,
        variance_ratio,
        variance_constant_mismatch,
        gaussian_model,
        collapse_probability: collapse,
        tau_equivalent,
    };
    let results = Results {
        moments: Some(summary),
        ..Default::default()
    };
    Ok(RunOutput {
        record: RunRecord::new(RunKind::Moments, config, results),
        trajectory: Some(weight),
    })
}

pub fn run_mc(config: RunConfig) -> Result<RunOutput, CliError> {
    let settings = config.require_mc()?;
    let report = simulate_poisson_collapse(&settings)?;
    let results = Results {
        mc: Some(report),
        ..Default::default()
    };
    Ok(RunOutput {
        record: RunRecord::new(RunKind::Mc, config, results),
        trajectory: None,
    })
}

pub fn run_diagnostics(config: RunConfig) -> Result<RunOutput, CliError> {
    let f = config.require_smearing()?.clone();
    f.validate()?;
    let d = config.diagnostics;
    if d.refinement_levels < 2 {
        return Err(CliError::Config {
            field: "diagnostics.refinement_levels".into(),
            message: "need at least 2 levels to fit an order".into(),
        });
    }
    let grid = config.grid;
    let (potential, label) = match d.constant_potential {
        Some(k) => {
            if !k.is_finite() {
                return Err(CliError::Config {
                    field: "diagnostics.constant_potential".into(),
                    message: "must be finite".into(),
                });
            }
            (Potential::constant(grid, k), format!("constant {k}"))
        }
        None => {
            let bg = config.background.resolve(&grid);
            let label = if config.background.is_flat() {
                "flat"
            } else {
                "background"
            };
            (potential_from_background(&bg, &grid)?, label.to_string())
        }
    };

    let green = GreenOperator::new(potential.clone());
    let green_residual = green.verify_green(&f)?;
    let residual_bound = green.residual_bound(&f);

    let n = grid.len();
    let picks = 48.min(n);
    let indices: Vec<usize> = (0..picks)
        .map(|k| k * (n - 1) / (picks - 1).max(1))
        .collect();
    let antisymmetry_defect = green.antisymmetry_defect(&indices);
    let slope_defect = green.slope_defect(&indices);

    let closed_form_error = d.constant_potential.map(|k| {
        let exact = |u: f64| {
            if k > 0.0 {
                (k.sqrt() * u).sin() / k.sqrt()
            } else if k < 0.0 {
                ((-k).sqrt() * u).sinh() / (-k).sqrt()
            } else {
                u
            }
        };
        let mut worst: f64 = 0.0;
        for &i in &indices {
            for &j in &indices {
                let u = grid.time(i) - grid.time(j);
                worst = worst.max((green.bisolution_entry(i, j) - exact(u)).abs());
            }
        }
        worst
    });

    let coarse = qfocus_core::ProperTimeGrid::new(grid.t_start(), grid.t_end(), d.coarse_points)
        .map_err(|e| CliError::Config {
            field: "diagnostics.coarse_points".into(),
            message: e.to_string(),
        })?;
    let refinement = refinement_study(coarse, d.refinement_levels, |t| potential.at(t), &f)?;
    let order_in_range = (1.8..=2.2).contains(&refinement.order);

    let summary = DiagnosticsSummary {
        potential: label,
        green_residual,
        residual_bound,
        residual_within_bound: green_residual <= residual_bound,
        antisymmetry_defect,
        slope_defect,
        closed_form_error,
        refinement,
        order_in_range,
    };
    let results = Results {
        diagnostics: Some(summary),
        ..Default::default()
    };
    Ok(RunOutput {
        record: RunRecord::new(RunKind::Diagnostics, config, results),
        trajectory: None,
    })
}
