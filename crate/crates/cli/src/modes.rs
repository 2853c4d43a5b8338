//! One runner per subcommand, each returning flat serializable rows.

use std::path::Path;

use serde::Serialize;
use vqed_core::dark::{dark_energies, dark_rabi};
use vqed_core::lindblad::{
    build_v_atom_model, evolve, ground_state_density, observables, steady_state_or_relax,
};
use vqed_core::mps::{load_checkpoint, resume, run, save_checkpoint};
use vqed_core::operators::{ket_s, ket_t};
use vqed_core::linalg::fidelity_with_pure;
use vqed_core::suite::{run_all, SuiteOptions};
use vqed_core::{cavity, Error, SystemParams};

use crate::config::{with_field, AxisConfig, RunConfig};
use crate::output::{finite, write_rows, Format};
use crate::AppError;

// ---------------------------------------------------------------------------
// Row types (field order fixes the CSV column order)
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SteadyRow {
    omega: f64,
    gamma_prime: f64,
    delta1: f64,
    delta2: f64,
    dphi: f64,
    eta: f64,
    purity: f64,
    pop_g: f64,
    pop_s: f64,
    pop_t: f64,
    emission_rate: f64,
    energy: f64,
    /// `kernel` when the null-space solve succeeded, `relaxed` when the
    /// state was obtained by long-time integration instead.
    method: &'static str,
}

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    pop_g: f64,
    pop_e1: f64,
    pop_e2: f64,
    pop_s: f64,
    pop_t: f64,
    purity: f64,
    emission_rate: f64,
}

#[derive(Serialize)]
struct CavityRow {
    g: f64,
    kappa: f64,
    kappa_prime: f64,
    n_max: usize,
    gamma_eff_formula: f64,
    gamma_eff_fit: f64,
    rate_rel_err: f64,
    trace_distance: f64,
    cutoff_occupation: f64,
}

#[derive(Serialize)]
struct DarkCurveRow {
    dphi: f64,
    /// Drive strength that makes the point dark; empty where no real drive
    /// satisfies the condition.
    omega_dark: Option<f64>,
    e_plus: f64,
    e_minus: f64,
    splitting: f64,
}

#[derive(Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub gamma_prime: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub dphi: f64,
    pub phi_prime: f64,
    pub tau: f64,
    pub eta: f64,
    pub purity: Option<f64>,
    pub pop_g: Option<f64>,
    pub pop_s: Option<f64>,
    pub pop_t: Option<f64>,
    pub emission_rate: Option<f64>,
    /// `ok`, `relaxed` (kernel solve degenerate, used time integration),
    /// `evolved` (time-bin run hit the horizon before the steady detector
    /// fired) or `no-converge`.
    pub status: &'static str,
}

#[derive(Serialize)]
struct ValidateRow {
    id: usize,
    name: &'static str,
    pass: bool,
    details: String,
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

pub fn steady(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), AppError> {
    let p = cfg.params;
    let model = build_v_atom_model(&p)?;
    let (rho, relaxed) = steady_state_or_relax(&model, None)?;
    let obs = observables(&rho, &model)?;
    let row = SteadyRow {
        omega: p.omega,
        gamma_prime: p.gamma_prime,
        delta1: p.delta1,
        delta2: p.delta2,
        dphi: p.dphi,
        eta: p.eta,
        purity: obs.purity,
        pop_g: obs.pop_g,
        pop_s: obs.pop_s,
        pop_t: obs.pop_t,
        emission_rate: obs.emission_rate,
        energy: obs.h_expectation,
        method: if relaxed { "relaxed" } else { "kernel" },
    };
    write_rows(&[row], out, format)
}

pub fn evolve_mode(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), AppError> {
    let p = cfg.params;
    let model = build_v_atom_model(&p)?;
    let rho0 = ground_state_density(3);
    let traj = evolve(&model, &rho0, cfg.evolve.t_final, cfg.evolve.dt, cfg.evolve.stride)?;
    let mut rows = Vec::with_capacity(traj.times.len());
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let obs = observables(rho, &model)?;
        rows.push(EvolveRow {
            t: *t,
            pop_g: obs.pop_g,
            pop_e1: rho[(1, 1)].re,
            pop_e2: rho[(2, 2)].re,
            pop_s: obs.pop_s,
            pop_t: obs.pop_t,
            purity: obs.purity,
            emission_rate: obs.emission_rate,
        });
    }
    write_rows(&rows, out, format)
}

pub fn mps_mode(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), AppError> {
    let result = if let Some(from) = &cfg.checkpoint.resume {
        let mut state = load_checkpoint(from)?;
        // The checkpoint is authoritative for the discretization; the config
        // file only moves the horizon and the sampling controls.
        state.config.t_final = cfg.mps.t_final;
        state.config.stop_at_steady = cfg.mps.stop_at_steady;
        state.config.sample_stride = cfg.mps.sample_stride;
        state.config.steady_tol = cfg.mps.steady_tol;
        state.config.steady_window = cfg.mps.steady_window;
        let run = resume(&mut state)?;
        if let Some(to) = &cfg.checkpoint.save {
            save_checkpoint(&state, to)?;
        }
        run
    } else {
        let p = cfg.params;
        if cfg.checkpoint.save.is_some() {
            // Re-run through the stateful interface so the final state is
            // available for saving.
            let mut state = vqed_core::TensorTrainState::new(&p, &cfg.mps)?;
            let run = resume(&mut state)?;
            save_checkpoint(&state, cfg.checkpoint.save.as_ref().unwrap())?;
            run
        } else {
            run(&p, &cfg.mps)?
        }
    };
    log::info!(
        "time-bin run: steady = {}, emitted_total = {:.6}, max_bond = {}",
        result.reached_steady,
        result.emitted_total,
        result.max_bond
    );
    write_rows(&result.rows, out, format)
}

pub fn cavity_mode(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), AppError> {
    let report = cavity::verify_adiabatic_limit(&cfg.params, &cfg.cavity)?;
    let formula = report.gamma_eff_formula;
    let row = CavityRow {
        g: cfg.cavity.g,
        kappa: cfg.cavity.kappa,
        kappa_prime: cfg.cavity.kappa_prime,
        n_max: cfg.cavity.n_max,
        gamma_eff_formula: formula,
        gamma_eff_fit: report.gamma_eff_fit,
        rate_rel_err: (report.gamma_eff_fit - formula).abs() / formula,
        trace_distance: report.trace_distance,
        cutoff_occupation: report.cutoff_occupation,
    };
    write_rows(&[row], out, format)
}

pub fn dark_curve(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), AppError> {
    let p = cfg.params;
    if (p.delta1 - p.delta2).abs() > 1e-12 {
        return Err(AppError::Config(
            "dark-curve needs equal detunings (delta1 == delta2): the phase-tunable \
             dark state only exists on that line"
                .into(),
        ));
    }
    let delta = p.delta1;
    let grid: Vec<f64> = match cfg.sweep.axis.as_slice() {
        [] => default_axis("dphi", -std::f64::consts::PI, std::f64::consts::PI, 81).values(),
        [ax] if ax.name == "dphi" => ax.values(),
        _ => {
            return Err(AppError::Config(
                "dark-curve accepts at most one sweep axis, and it must be dphi".into(),
            ))
        }
    };
    let mut rows = Vec::with_capacity(grid.len());
    for dphi in grid {
        let omega_dark = match dark_rabi(p.gamma, delta, dphi) {
            Ok(opt) => opt,
            // At dphi = 0 every drive is dark (commensurate regime): report
            // no single required drive rather than failing the whole curve.
            Err(Error::UndefinedRegime(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let (e_plus, e_minus) = dark_energies(p.gamma, delta, dphi);
        rows.push(DarkCurveRow {
            dphi,
            omega_dark,
            e_plus,
            e_minus,
            splitting: e_plus - e_minus,
        });
    }
    write_rows(&rows, out, format)
}

pub fn default_axis(name: &str, start: f64, stop: f64, points: usize) -> AxisConfig {
    AxisConfig {
        name: name.into(),
        start,
        stop,
        points,
    }
}

/// Evaluate one parameter point to a sweep row. Non-converging points are
/// reported with empty readouts rather than aborting the whole grid.
pub fn sweep_cell(p: &SystemParams, mps_cfg: &vqed_core::TimeBinConfig) -> Result<SweepRow, AppError> {
    let base = |status: &'static str| SweepRow {
        omega: p.omega,
        gamma_prime: p.gamma_prime,
        delta1: p.delta1,
        delta2: p.delta2,
        dphi: p.dphi,
        phi_prime: p.phi_prime,
        tau: p.tau,
        eta: p.eta,
        purity: None,
        pop_g: None,
        pop_s: None,
        pop_t: None,
        emission_rate: None,
        status,
    };
    if p.tau == 0.0 {
        let model = build_v_atom_model(p)?;
        match steady_state_or_relax(&model, None) {
            Ok((rho, relaxed)) => {
                let obs = observables(&rho, &model)?;
                let mut row = base(if relaxed { "relaxed" } else { "ok" });
                row.purity = finite(obs.purity);
                row.pop_g = finite(obs.pop_g);
                row.pop_s = finite(obs.pop_s);
                row.pop_t = finite(obs.pop_t);
                row.emission_rate = finite(obs.emission_rate);
                Ok(row)
            }
            Err(Error::Numerical(_)) | Err(Error::DegenerateSteadyState { .. }) => {
                Ok(base("no-converge"))
            }
            Err(e) => Err(e.into()),
        }
    } else {
        let mut cell_cfg = mps_cfg.clone();
        cell_cfg.stop_at_steady = true;
        cell_cfg.sample_stride = usize::MAX;
        let result = run(p, &cell_cfg)?;
        let rho = &result.final_atom;
        let last = result.rows.last().expect("time-bin run yields rows");
        let mut row = base(if result.reached_steady { "ok" } else { "evolved" });
        row.purity = finite(vqed_core::linalg::purity(rho));
        row.pop_g = finite(rho[(0, 0)].re);
        row.pop_s = finite(fidelity_with_pure(rho, &ket_s(p.dphi)));
        row.pop_t = finite(fidelity_with_pure(rho, &ket_t(p.dphi)));
        row.emission_rate = finite(last.flux_emitted);
        Ok(row)
    }
}

pub fn sweep(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), AppError> {
    if cfg.sweep.axis.is_empty() || cfg.sweep.axis.len() > 2 {
        return Err(AppError::Config(format!(
            "[sweep] needs 1 or 2 axes, got {}",
            cfg.sweep.axis.len()
        )));
    }
    let mut points: Vec<SystemParams> = Vec::new();
    match cfg.sweep.axis.as_slice() {
        [a] => {
            for v in a.values() {
                points.push(apply_axis(&cfg.params, a, v)?);
            }
        }
        [a, b] => {
            // First axis is the slow (outer) one.
            for va in a.values() {
                let pa = apply_axis(&cfg.params, a, va)?;
                for vb in b.values() {
                    points.push(apply_axis(&pa, b, vb)?);
                }
            }
        }
        _ => unreachable!(),
    }
    for p in &points {
        p.validate()
            .map_err(|e| AppError::Config(format!("[sweep] grid point invalid: {e}")))?;
    }
    let rows = run_grid(&points, &cfg.mps)?;
    write_rows(&rows, out, format)
}

pub fn run_grid(
    points: &[SystemParams],
    mps_cfg: &vqed_core::TimeBinConfig,
) -> Result<Vec<SweepRow>, AppError> {
    use rayon::prelude::*;
    points
        .par_iter()
        .map(|p| sweep_cell(p, mps_cfg))
        .collect::<Result<Vec<_>, _>>()
}

fn apply_axis(p: &SystemParams, ax: &AxisConfig, value: f64) -> Result<SystemParams, AppError> {
    with_field(p, &ax.name, value)
        .ok_or_else(|| AppError::Config(format!("[sweep] unknown axis \"{}\"", ax.name)))
}

pub fn validate(
    criteria: &[usize],
    inject_gamma_prime: Option<f64>,
    out: Option<&Path>,
    format: Format,
) -> Result<bool, AppError> {
    let opts = SuiteOptions {
        only: criteria.to_vec(),
        gamma_prime_override: inject_gamma_prime,
    };
    let results = run_all(&opts)?;
    let mut all_pass = true;
    let mut rows = Vec::with_capacity(results.len());
    for r in &results {
        println!(
            "criterion {}: {} ... {}",
            r.id,
            r.name,
            if r.pass { "PASS" } else { "FAIL" }
        );
        if !r.pass {
            all_pass = false;
            eprintln!("criterion {} details: {}", r.id, r.details);
        }
        rows.push(ValidateRow {
            id: r.id,
            name: r.name,
            pass: r.pass,
            details: r.details.clone(),
        });
    }
    if out.is_some() {
        write_rows(&rows, out, format)?;
    }
    Ok(all_pass)
}
