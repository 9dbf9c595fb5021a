//! Experiment orchestration: build the objects a config describes, run them,
//! and leave CSV/dump/summary artifacts in the output directory.

use std::path::Path;
use std::time::Instant;

use serde_json::json;

use crate::cli::config::{ExperimentKind, RunConfig};
use crate::error::{Error, Result};
use crate::evolution::{
    check_sin_sinh_substitution, evaluate_rhs, evolve_with, stability_bound, EvolutionConfig,
    Method,
};
use crate::grid::make_grid;
use crate::hamiltonian::Hamiltonian;
use crate::io::{
    snapshot_file_name, write_ensemble_csv, write_state_dump, ComparisonWriter, ObservablesWriter,
    TrajectoryManifest,
};
use crate::measurement::{debroglie_run, CellOutcome};
use crate::schrodinger::{gaussian_packet, wigner_transform};
use crate::smearing::{make_distribution, sample, smeared_density};
use crate::state::{gaussian_wigner, random_band_limited, WignerState};

/// Process exit status: 0 success, 1 validation error, 2 numerical
/// divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ValidationError = 1,
    Divergence = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

fn classify(err: &Error) -> ExitStatus {
    match err {
        Error::Divergence { .. } | Error::WaveDivergence { .. } => ExitStatus::Divergence,
        _ => ExitStatus::ValidationError,
    }
}

struct SummarySink<'a> {
    path: std::path::PathBuf,
    config: &'a RunConfig,
    started: Instant,
}

impl<'a> SummarySink<'a> {
    fn new(output_dir: &Path, config: &'a RunConfig) -> Self {
        Self {
            path: output_dir.join("summary.json"),
            config,
            started: Instant::now(),
        }
    }

    fn write(&self, incomplete: bool, diagnostics: serde_json::Value, warnings: &[String]) -> Result<()> {
        let summary = json!({
            "experiment": self.config.experiment.to_string(),
            "config": self.config,
            "wall_time_seconds": self.started.elapsed().as_secs_f64(),
            "incomplete": incomplete,
            "diagnostics": diagnostics,
            "warnings": warnings,
        });
        std::fs::write(&self.path, format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
        Ok(())
    }
}

/// Run a validated config; artifacts land in `output_dir`. Returns the exit
/// status the process should report.
pub fn run(config: &RunConfig, output_dir: &Path) -> ExitStatus {
    if let Err(e) = std::fs::create_dir_all(output_dir) {
        eprintln!("error: cannot create output directory {}: {e}", output_dir.display());
        return ExitStatus::ValidationError;
    }
    let summary = SummarySink::new(output_dir, config);
    let result = match config.experiment {
        ExperimentKind::Evolve => run_evolve(config, output_dir, &summary),
        ExperimentKind::Compare => run_compare(config, output_dir, &summary),
        ExperimentKind::Transform => run_transform(config, output_dir, &summary),
        ExperimentKind::Smear => run_smear(config, output_dir, &summary),
        ExperimentKind::Measure => run_measure(config, output_dir, &summary),
        ExperimentKind::IdentityChecks => {
            let seed = config.seed.unwrap_or(0);
            let ok = run_identity_checks(seed);
            let _ = summary.write(false, json!({"all_passed": ok}), &[]);
            return if ok { ExitStatus::Success } else { ExitStatus::ValidationError };
        }
    };
    match result {
        Ok(()) => ExitStatus::Success,
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    }
}

fn build_initial_state(config: &RunConfig, hbar: f64) -> Result<(WignerState, Vec<String>)> {
    let grid = config.grid.as_ref().expect("validated").build()?;
    let s = config.initial_state.as_ref().expect("validated");
    let (state, warnings) = gaussian_wigner(&grid, s.x0, s.p0, s.sigma_x, s.sigma_p, hbar)?;
    Ok((state, warnings.iter().map(|w| w.to_string()).collect()))
}

fn run_evolve(config: &RunConfig, output_dir: &Path, summary: &SummarySink) -> Result<()> {
    let h = config.hamiltonian.as_ref().expect("validated").build()?;
    let (w0, warnings) = build_initial_state(config, h.hbar())?;
    let spec = config.evolution.as_ref().expect("validated");
    let method = spec.method_spec().build("evolution")?;
    let cfg = EvolutionConfig::new(spec.dt, spec.steps, method, spec.record_every.expect("resolved"))?;
    let bound = stability_bound(&h, w0.grid())?;

    TrajectoryManifest::new(cfg.dt, cfg.steps, &cfg.method, cfg.record_every, h.hbar())
        .write(&output_dir.join("manifest.json"))?;
    let mut observables = ObservablesWriter::create(&output_dir.join("observables.csv"))?;
    let mut final_state: Option<WignerState> = None;
    let initial = w0.clone();
    let run_result = evolve_with(&w0, &h, &cfg, |step_idx, snap| {
        write_state_dump(snap, &output_dir.join(snapshot_file_name(step_idx)))?;
        observables.record(snap, h.hbar())?;
        final_state = Some(snap.clone());
        Ok(())
    });
    observables.finish()?;
    match run_result {
        Ok(max_rhs_imbalance) => {
            let final_state = final_state.expect("at least the initial snapshot");
            let diagnostics = json!({
                "final_time": final_state.time(),
                "stability_bound": bound,
                "dt": cfg.dt,
                "max_rhs_imbalance": max_rhs_imbalance,
                "normalization_drift": (final_state.total_mass() - initial.total_mass()).abs(),
                "linf_vs_initial": final_state.linf_distance(&initial)?,
                "purity": final_state.purity(h.hbar()),
            });
            summary.write(false, diagnostics, &warnings)?;
            Ok(())
        }
        Err(e) => {
            let diagnostics = match &e {
                Error::Divergence { step, last_snapshot } => json!({
                    "divergence_step": step,
                    "last_good_snapshot_step": last_snapshot,
                    "stability_bound": bound,
                    "dt": cfg.dt,
                }),
                _ => json!({}),
            };
            summary.write(true, diagnostics, &warnings)?;
            Err(e)
        }
    }
}

fn run_compare(config: &RunConfig, output_dir: &Path, summary: &SummarySink) -> Result<()> {
    let h = config.hamiltonian.as_ref().expect("validated").build()?;
    let (w0, warnings) = build_initial_state(config, h.hbar())?;
    let spec = config.comparison.as_ref().expect("validated");
    let record_every = spec.record_every.expect("resolved");
    let methods: Vec<Method> = spec
        .methods
        .iter()
        .enumerate()
        .map(|(i, m)| m.build(&format!("comparison.methods[{i}]")))
        .collect::<Result<_>>()?;

    let mut trajectories = Vec::new();
    for (idx, method) in methods.iter().enumerate() {
        let cfg = EvolutionConfig::new(spec.dt, spec.steps, *method, record_every)?;
        let mut snaps = Vec::new();
        let result = evolve_with(&w0, &h, &cfg, |step_idx, snap| {
            snaps.push((step_idx, snap.clone()));
            Ok(())
        });
        if let Err(e) = result {
            summary.write(
                true,
                json!({"failed_method": method.to_string(), "method_index": idx, "error": e.to_string()}),
                &warnings,
            )?;
            return Err(e);
        }
        trajectories.push(snaps);
    }

    let mut writer = ComparisonWriter::create(&output_dir.join("comparison.csv"))?;
    let mut last_distance = 0.0;
    for ((_, a), (_, b)) in trajectories[0].iter().zip(&trajectories[1]) {
        let d = a.l2_distance(b)?;
        writer.record(a.time(), d)?;
        last_distance = d;
    }
    writer.finish()?;
    let final_a = &trajectories[0].last().expect("snapshots").1;
    let relative = last_distance / final_a.l2_norm();
    summary.write(
        false,
        json!({
            "methods": [methods[0].to_string(), methods[1].to_string()],
            "final_l2_distance": last_distance,
            "final_relative_l2_distance": relative,
            "snapshots": trajectories[0].len(),
        }),
        &warnings,
    )?;
    Ok(())
}

fn run_transform(config: &RunConfig, output_dir: &Path, summary: &SummarySink) -> Result<()> {
    let w = config.wavefunction.as_ref().expect("validated");
    let m = config.momentum.as_ref().expect("validated");
    let hbar = w.hbar.expect("resolved");
    let psi = gaussian_packet(w.nx, (w.x_min, w.x_max), w.x0, w.p0, w.sigma, hbar)?;
    let (p_min, p_max) = (m.p_min.expect("resolved"), m.p_max.expect("resolved"));
    let (state, diag) = wigner_transform(&psi, m.np, (p_min, p_max), hbar)?;
    write_state_dump(&state, &output_dir.join("wigner.wig"))?;
    let warnings: Vec<String> = diag.warnings.iter().map(|w| w.to_string()).collect();
    summary.write(
        false,
        json!({
            "raw_mass": diag.raw_mass,
            "max_imag_residue": diag.max_imag_residue,
            "purity": state.purity(hbar),
            "mean_x": state.mean_x(),
            "mean_p": state.mean_p(),
        }),
        &warnings,
    )?;
    Ok(())
}

fn run_smear(config: &RunConfig, output_dir: &Path, summary: &SummarySink) -> Result<()> {
    let grid = config.grid.as_ref().expect("validated").build()?;
    let spec = config.smearing.as_ref().expect("validated");
    let seed = config.seed.expect("validated");
    let dist = make_distribution(spec.sigma_xi, spec.hbar.expect("resolved"))?;
    let ensemble = sample(&dist, spec.n, seed)?;
    write_ensemble_csv(&ensemble, &output_dir.join("ensemble.csv"))?;
    let density = smeared_density(spec.x0, spec.p0, &ensemble, &grid)?;
    write_state_dump(&density, &output_dir.join("density.wig"))?;
    let (reference, _) = gaussian_wigner(
        &grid,
        spec.x0,
        spec.p0,
        dist.sigma_xi(),
        dist.sigma_eta(),
        dist.hbar(),
    )?;
    let l1: f64 = density
        .values()
        .iter()
        .zip(reference.values().iter())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * grid.cell_area();
    summary.write(
        false,
        json!({
            "n": ensemble.len(),
            "mean_xi": ensemble.mean_xi(),
            "mean_eta": ensemble.mean_eta(),
            "variance_product": ensemble.var_xi() * ensemble.var_eta(),
            "dispersion_target": dist.hbar() * dist.hbar() / 4.0,
            "l1_vs_analytic": l1,
        }),
        &[],
    )?;
    Ok(())
}

fn run_measure(config: &RunConfig, output_dir: &Path, summary: &SummarySink) -> Result<()> {
    let spec = config.measurement.as_ref().expect("validated");
    let seed = config.seed.expect("validated");
    let n_atoms = spec.n_atoms.round() as u128;
    let report = debroglie_run(spec.separation, n_atoms, spec.tau_micro, seed)?;
    std::fs::write(
        output_dir.join("report.json"),
        format!("{}\n", serde_json::to_string_pretty(&report)?),
    )?;
    let trials = spec.trials.expect("resolved");
    let mut left_count = 0usize;
    if trials > 1 {
        let mut out = std::io::BufWriter::new(std::fs::File::create(output_dir.join("trials.csv"))?);
        use std::io::Write;
        writeln!(out, "trial,seed,outcome")?;
        for trial in 0..trials {
            let trial_seed = seed.wrapping_add(trial as u64);
            let r = debroglie_run(spec.separation, n_atoms, spec.tau_micro, trial_seed)?;
            if r.outcome == CellOutcome::Left {
                left_count += 1;
            }
            writeln!(out, "{trial},{trial_seed},{}", r.outcome)?;
        }
        out.flush()?;
    }
    let mut diagnostics = json!({
        "tau_macro": report.tau_macro,
        "tau_ratio": report.tau_macro / spec.tau_micro,
        "outcome": report.outcome.to_string(),
        "pre": report.pre,
        "post": report.post,
    });
    if trials > 1 {
        diagnostics["trials"] = json!(trials);
        diagnostics["left_frequency"] = json!(left_count as f64 / trials as f64);
    }
    summary.write(false, diagnostics, &[])?;
    Ok(())
}

/// The operator-identity suites: the sin↔sinh substitution over seeded random
/// fields, and the collapse of all four laws onto the classical flow for a
/// quadratic Hamiltonian. Prints one PASS/FAIL line per suite.
pub fn run_identity_checks(seed: u64) -> bool {
    let mut all_ok = true;

    // Substitution identity over 20 seeded band-limited fields and 4 shifts.
    let grid = make_grid(128, 16, (-8.0, 8.0), (-1.0, 1.0)).expect("static grid");
    let mut worst: f64 = 0.0;
    for field_idx in 0..20u64 {
        let w = random_band_limited(&grid, 8, 2, 1.0, seed.wrapping_add(field_idx))
            .expect("band-limited field");
        for xi in [0.1, 0.25, 0.5, 1.0] {
            let report = check_sin_sinh_substitution(&grid, w.values(), xi)
                .expect("substitution check");
            worst = worst.max(report.max_abs_difference);
        }
    }
    let sub_ok = worst <= 1e-10;
    all_ok &= sub_ok;
    println!(
        "{} sin-sinh substitution identity: max deviation {worst:.3e} (tolerance 1.0e-10)",
        if sub_ok { "PASS" } else { "FAIL" }
    );

    // Quadratic collapse: all four laws agree pairwise on random states.
    let grid = make_grid(128, 128, (-8.0, 8.0), (-8.0, 8.0)).expect("static grid");
    let h = Hamiltonian::harmonic(1.0, 1.0, 1.0).expect("harmonic");
    let methods = [
        Method::Liouville,
        Method::MoyalSpectral,
        Method::MoyalTruncated { k_max: 2 },
        Method::SinhTruncated { k_max: 2 },
    ];
    let mut worst_pairwise: f64 = 0.0;
    for state_idx in 0..5u64 {
        let w = random_band_limited(&grid, 6, 6, 0.5, seed.wrapping_add(100 + state_idx))
            .expect("band-limited state");
        let fields: Vec<_> = methods
            .iter()
            .map(|m| evaluate_rhs(*m, &h, &w).expect("rhs"))
            .collect();
        for a in 0..fields.len() {
            for b in (a + 1)..fields.len() {
                let d = fields[a].linf_distance(&fields[b]).expect("same grid");
                worst_pairwise = worst_pairwise.max(d);
            }
        }
    }
    let collapse_ok = worst_pairwise <= 1e-8;
    all_ok &= collapse_ok;
    println!(
        "{} quadratic-collapse: max pairwise L-inf {worst_pairwise:.3e} (tolerance 1.0e-8)",
        if collapse_ok { "PASS" } else { "FAIL" }
    );

    all_ok
}
