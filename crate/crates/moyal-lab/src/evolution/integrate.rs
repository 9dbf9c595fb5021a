//! Classical fourth-order Runge–Kutta time stepping.
//!
//! No renormalization is applied during evolution: conservation of the total
//! mass is a measured diagnostic of the discretization, not an enforced
//! constraint.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::fourier;
use crate::hamiltonian::{Hamiltonian, Potential};
use crate::state::WignerState;

use super::rhs::rhs_raw;
use super::EvolutionConfig;

/// Advective CFL-style bound `dt ≤ C·min(dx·m/|p|_max, dp/|V′|_max)`, C = ½.
///
/// The bound is advisory: callers may integrate with a larger dt and rely on
/// the divergence detection instead.
pub fn stability_bound(h: &Hamiltonian, grid: &crate::grid::PhaseSpaceGrid) -> Result<f64> {
    const CFL: f64 = 0.5;
    let mut bound = f64::INFINITY;
    let p_max = grid.p_abs_max();
    if p_max > 0.0 {
        bound = bound.min(grid.dx() * h.mass() / p_max);
    }
    let vprime_max = match h.potential() {
        Potential::Polynomial { .. } => h
            .potential_derivative_on_grid(grid)?
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs())),
        Potential::Tabulated { .. } => {
            let table = h.potential_on_grid(grid)?;
            fourier::derivative_1d(&table, grid.x_length(), 1)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        }
    };
    if vprime_max > 0.0 {
        bound = bound.min(grid.dp() / vprime_max);
    }
    Ok(CFL * bound)
}

fn rk4_step(
    h: &Hamiltonian,
    cfg: &EvolutionConfig,
    grid: &crate::grid::PhaseSpaceGrid,
    values: &Array2<f64>,
    imbalance: &mut f64,
) -> Result<Array2<f64>> {
    let dt = cfg.dt;
    let area = grid.cell_area();
    let mut track = |k: &Array2<f64>| {
        let mass = k.iter().sum::<f64>() * area;
        *imbalance = imbalance.max(mass.abs());
    };

    let k1 = rhs_raw(cfg.method, h, grid, values)?;
    track(&k1);
    let y2 = values + &(&k1 * (0.5 * dt));
    let k2 = rhs_raw(cfg.method, h, grid, &y2)?;
    track(&k2);
    let y3 = values + &(&k2 * (0.5 * dt));
    let k3 = rhs_raw(cfg.method, h, grid, &y3)?;
    track(&k3);
    let y4 = values + &(&k3 * dt);
    let k4 = rhs_raw(cfg.method, h, grid, &y4)?;
    track(&k4);

    let mut out = values.clone();
    out.zip_mut_with(&k1, |o, k| *o += dt / 6.0 * k);
    out.zip_mut_with(&k2, |o, k| *o += dt / 3.0 * k);
    out.zip_mut_with(&k3, |o, k| *o += dt / 3.0 * k);
    out.zip_mut_with(&k4, |o, k| *o += dt / 6.0 * k);
    Ok(out)
}

/// One RK4 step; the result is not renormalized.
pub fn step(w: &WignerState, h: &Hamiltonian, cfg: &EvolutionConfig) -> Result<WignerState> {
    let mut imbalance = 0.0;
    let values = rk4_step(h, cfg, w.grid(), w.values(), &mut imbalance)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            step: 1,
            last_snapshot: 0,
        });
    }
    Ok(WignerState::unchecked(
        w.grid().clone(),
        values,
        w.time() + cfg.dt,
    ))
}

/// Recorded snapshots plus integration diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<WignerState>,
    pub snapshot_steps: Vec<usize>,
    /// Largest |Σ rhs·dx·dp| seen over every stage evaluation.
    pub max_rhs_imbalance: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &WignerState {
        &self.snapshots[0]
    }

    pub fn final_state(&self) -> &WignerState {
        self.snapshots.last().expect("trajectory holds at least the initial state")
    }
}

/// Integrate and hand every recorded snapshot to `sink` as it is produced
/// (snapshots at step 0, every `record_every` steps, and the final step).
pub fn evolve_with(
    w0: &WignerState,
    h: &Hamiltonian,
    cfg: &EvolutionConfig,
    mut sink: impl FnMut(usize, &WignerState) -> Result<()>,
) -> Result<f64> {
    let grid = w0.grid().clone();
    let t0 = w0.time();
    let mut values = w0.values().clone();
    let mut imbalance = 0.0f64;
    let mut last_snapshot = 0usize;
    sink(0, w0)?;
    for step_idx in 1..=cfg.steps {
        values = rk4_step(h, cfg, &grid, &values, &mut imbalance)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: step_idx,
                last_snapshot,
            });
        }
        if step_idx % cfg.record_every == 0 || step_idx == cfg.steps {
            let t = t0 + step_idx as f64 * cfg.dt;
            let snapshot = WignerState::unchecked(grid.clone(), values.clone(), t);
            sink(step_idx, &snapshot)?;
            last_snapshot = step_idx;
        }
    }
    Ok(imbalance)
}

/// Integrate and collect the snapshot sequence.
pub fn evolve(w0: &WignerState, h: &Hamiltonian, cfg: &EvolutionConfig) -> Result<Trajectory> {
    let mut snapshots = Vec::new();
    let mut snapshot_steps = Vec::new();
    let imbalance = evolve_with(w0, h, cfg, |step_idx, snap| {
        snapshots.push(snap.clone());
        snapshot_steps.push(step_idx);
        Ok(())
    })?;
    Ok(Trajectory {
        snapshots,
        snapshot_steps,
        max_rhs_imbalance: imbalance,
    })
}
