//! Canned parameter sets reproducing the reference figures.
//!
//! Each preset writes the same schema-stable rows as the corresponding
//! mode, with every knob pinned. Markov maps finish in seconds; the
//! time-bin presets (`fig5`, `fig6`) take a few minutes on one core.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;
use vqed_core::dark::{dark_phase_for_drive, dark_rabi};
use vqed_core::lindblad::{build_v_atom_model, observables, steady_state_or_relax};
use vqed_core::mps::{phase_delay_purity_scan, run};
use vqed_core::{SystemParams, TimeBinConfig};

use crate::config::AxisConfig;
use crate::modes::{run_grid, SweepRow};
use crate::output::{finite, write_rows, Format};
use crate::AppError;

pub const PRESETS: [(&str, &str); 7] = [
    (
        "fig4a",
        "steady purity map over drive and feedback phase, resonant atom",
    ),
    (
        "fig4-delta1",
        "steady purity map over drive and feedback phase, both detunings at 1",
    ),
    (
        "fig5",
        "time-bin population dynamics across one long round trip (tau = 10)",
    ),
    (
        "fig6",
        "steady purity versus feedback phase for delays 0, 0.25 and 0.5",
    ),
    (
        "fig7a",
        "steady purity map with 5% free-space loss",
    ),
    (
        "fig7c",
        "purity at the protected phase versus loss rate, against the unprotected point",
    ),
    (
        "fig8",
        "dark-state purity versus directionality for both detuning regimes",
    ),
];

pub fn list() {
    for (name, blurb) in PRESETS {
        println!("{name}\t{blurb}");
    }
}

#[derive(Serialize)]
struct LossCurveRow {
    gamma_prime: f64,
    purity_zero_phase: f64,
    purity_dark_phase: f64,
}

#[derive(Serialize)]
struct DirectionalityRow {
    eta: f64,
    /// Opposite detunings (`delta1 = -delta2 = 0.3`), commensurate loop.
    purity_opposite: Option<f64>,
    status_opposite: &'static str,
    /// Equal detunings at the magic drive, quarter-turn feedback phase.
    purity_magic: Option<f64>,
    status_magic: &'static str,
}

#[derive(Serialize)]
struct PhaseDelayRow {
    dphi: f64,
    tau: f64,
    purity: f64,
    flux_in_loop: Option<f64>,
    flux_emitted: f64,
    steady: bool,
}

fn grid_axes(p: &SystemParams, outer: &AxisConfig, inner: &AxisConfig) -> Vec<SystemParams> {
    let mut points = Vec::with_capacity(outer.points * inner.points);
    for va in outer.values() {
        let pa = crate::config::with_field(p, &outer.name, va).expect("preset axis");
        for vb in inner.values() {
            points.push(crate::config::with_field(&pa, &inner.name, vb).expect("preset axis"));
        }
    }
    points
}

fn axis(name: &str, start: f64, stop: f64, points: usize) -> AxisConfig {
    AxisConfig {
        name: name.into(),
        start,
        stop,
        points,
    }
}

fn purity_at(p: &SystemParams) -> Result<f64, AppError> {
    let model = build_v_atom_model(p)?;
    let (rho, _) = steady_state_or_relax(&model, None)?;
    Ok(observables(&rho, &model)?.purity)
}

pub fn run_preset(name: &str, out: Option<&Path>, format: Format) -> Result<(), AppError> {
    match name {
        "fig4a" | "fig4-delta1" | "fig7a" => {
            let mut p = SystemParams::default();
            if name == "fig4-delta1" {
                p.delta1 = 1.0;
                p.delta2 = 1.0;
            }
            if name == "fig7a" {
                p.gamma_prime = 0.05;
            }
            let points = grid_axes(
                &p,
                &axis("omega", 0.0, 4.0, 81),
                &axis("dphi", -PI, PI, 81),
            );
            let rows: Vec<SweepRow> = run_grid(&points, &TimeBinConfig::default())?;
            write_rows(&rows, out, format)
        }
        "fig5" => {
            let p = SystemParams {
                omega: 1.0,
                tau: 10.0,
                ..SystemParams::default()
            };
            let cfg = TimeBinConfig {
                dt: 0.02,
                t_final: 13.0,
                sample_stride: 2,
                ..TimeBinConfig::default()
            };
            let result = run(&p, &cfg)?;
            write_rows(&result.rows, out, format)
        }
        "fig6" => {
            let p = SystemParams {
                omega: 2.0,
                ..SystemParams::default()
            };
            let dphis: Vec<f64> = (0..61).map(|i| -PI + 2.0 * PI * i as f64 / 60.0).collect();
            let taus = [0.0, 0.25, 0.5];
            let cfg = TimeBinConfig {
                dt: 0.025,
                t_final: 250.0,
                stop_at_steady: true,
                ..TimeBinConfig::default()
            };
            let samples = phase_delay_purity_scan(&p, &dphis, &taus, &cfg)?;
            let rows: Vec<PhaseDelayRow> = samples
                .iter()
                .map(|s| PhaseDelayRow {
                    dphi: s.dphi,
                    tau: s.tau,
                    purity: s.purity,
                    flux_in_loop: finite(s.flux_in_loop),
                    flux_emitted: s.flux_emitted,
                    steady: s.steady,
                })
                .collect();
            write_rows(&rows, out, format)
        }
        "fig7c" => {
            let omega = 2.0;
            let phi_d = dark_phase_for_drive(1.0, omega).ok_or_else(|| {
                AppError::Runtime("no protected phase at this drive".into())
            })?;
            let mut rows = Vec::with_capacity(41);
            for i in 0..41 {
                let gamma_prime = 0.1 * i as f64 / 40.0;
                let at = |dphi: f64| -> Result<f64, AppError> {
                    purity_at(&SystemParams {
                        omega,
                        gamma_prime,
                        dphi,
                        ..SystemParams::default()
                    })
                };
                rows.push(LossCurveRow {
                    gamma_prime,
                    purity_zero_phase: at(0.0)?,
                    purity_dark_phase: at(phi_d)?,
                });
            }
            write_rows(&rows, out, format)
        }
        "fig8" => {
            let omega_magic = dark_rabi(1.0, 0.0, PI / 2.0)?
                .ok_or_else(|| AppError::Runtime("magic drive undefined".into()))?;
            let mut rows = Vec::with_capacity(26);
            for i in 0..26 {
                let eta = 0.5 + 0.5 * i as f64 / 25.0;
                let opposite = SystemParams {
                    omega: 1.0,
                    delta1: 0.3,
                    delta2: -0.3,
                    eta,
                    ..SystemParams::default()
                };
                let magic = SystemParams {
                    omega: omega_magic,
                    dphi: PI / 2.0,
                    eta,
                    ..SystemParams::default()
                };
                let cell = |p: &SystemParams| -> Result<(Option<f64>, &'static str), AppError> {
                    let model = build_v_atom_model(p)?;
                    match steady_state_or_relax(&model, None) {
                        Ok((rho, relaxed)) => Ok((
                            finite(observables(&rho, &model)?.purity),
                            if relaxed { "relaxed" } else { "ok" },
                        )),
                        Err(vqed_core::Error::Numerical(_))
                        | Err(vqed_core::Error::DegenerateSteadyState { .. }) => {
                            Ok((None, "no-converge"))
                        }
                        Err(e) => Err(e.into()),
                    }
                };
                let (purity_opposite, status_opposite) = cell(&opposite)?;
                let (purity_magic, status_magic) = cell(&magic)?;
                rows.push(DirectionalityRow {
                    eta,
                    purity_opposite,
                    status_opposite,
                    purity_magic,
                    status_magic,
                });
            }
            write_rows(&rows, out, format)
        }
        other => {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Err(AppError::Config(format!(
                "unknown preset \"{other}\"; available: {}",
                names.join(", ")
            )))
        }
    }
}
