//! Cross-solver validation suite.
//!
//! Each check exercises a quantitative prediction through at least two
//! independent code paths (closed-form analytics, the Markov solver, the
//! cavity model, the time-bin solver) and reports a pass/fail verdict with
//! the measured numbers. The checks are used both by the integration tests
//! and by `sim validate`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::cavity::{
    cavity_correlation, cavity_correlation_numeric, verify_adiabatic_limit, CavityConfig,
    CollectiveMode,
};
use crate::dark::{
    alpha_commensurate, dark_energies, dark_phase_for_drive, dark_rabi, predict,
    predicted_phase_line, wrap_angle,
};
use crate::error::Result;
use crate::lindblad::{
    build_dimer_model, build_two_channel_model, build_v_atom_model, evolve, ground_state_density,
    observables, steady_state_of, steady_state_or_relax,
};
use crate::linalg::{fidelity_with_pure, purity, trace_distance};
use crate::mps::{run as mps_run, steady_atom_state, TimeBinConfig};
use crate::params::SystemParams;

/// Outcome of one validation check.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    /// Measured numbers backing the verdict.
    pub details: String,
}

/// Options for the suite driver.
#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    /// Run only these criterion ids (all when empty).
    pub only: Vec<usize>,
    /// Replace the free-space loss used by the quantitative decoherence
    /// check. Intended as a negative control: a wrong value must make the
    /// check fail.
    pub gamma_prime_override: Option<f64>,
}

/// Number of criteria in the suite.
pub const CRITERIA: usize = 9;

/// Run one criterion by id (1-based).
pub fn run_criterion(id: usize, opts: &SuiteOptions) -> Result<CriterionResult> {
    match id {
        1 => commensurate_dark_state(),
        2 => incommensurate_dark_curve(),
        3 => dimer_equivalence(),
        4 => cavity_reduction(),
        5 => delayed_markov_limit(),
        6 => long_delay_time_series(),
        7 => delay_shifted_purity_ridges(),
        8 => decoherence_quantitative_point(opts.gamma_prime_override),
        9 => directionality(),
        _ => Err(crate::error::Error::InvalidParam(format!(
            "criterion id must be 1..={CRITERIA}, got {id}"
        ))),
    }
}

/// Run the requested criteria (all of them when `opts.only` is empty).
pub fn run_all(opts: &SuiteOptions) -> Result<Vec<CriterionResult>> {
    let ids: Vec<usize> = if opts.only.is_empty() {
        (1..=CRITERIA).collect()
    } else {
        opts.only.clone()
    };
    ids.into_iter().map(|id| run_criterion(id, opts)).collect()
}

fn verdict(
    id: usize,
    name: &'static str,
    pass: bool,
    details: String,
) -> Result<CriterionResult> {
    Ok(CriterionResult {
        id,
        name,
        pass,
        details,
    })
}

/// 1: at zero feedback phase and opposite detunings the steady state is
/// the predicted pure dark state, for every drive strength.
fn commensurate_dark_state() -> Result<CriterionResult> {
    let mut pass = true;
    let mut details = String::new();
    for omega in [0.5, 1.0, 2.0] {
        for delta in [0.0, 0.5] {
            let p = SystemParams {
                omega,
                delta1: delta,
                delta2: -delta,
                ..SystemParams::default()
            };
            let rho = steady_state_of(&build_v_atom_model(&p)?)?;
            let pur = purity(&rho);
            let pred = predict(&p)?;
            let ket = pred.state.ok_or_else(|| {
                crate::error::Error::UndefinedRegime("expected a dark state".into())
            })?;
            let fid = fidelity_with_pure(&rho, &ket);
            let ok = pur >= 1.0 - 1e-8 && fid >= 1.0 - 1e-8;
            pass &= ok;
            details.push_str(&format!(
                "omega={omega} delta={delta}: purity={pur:.12} fidelity={fid:.12}{}\n",
                if ok { "" } else { "  <- FAIL" }
            ));
        }
    }
    verdict(1, "commensurate dark state", pass, details)
}

/// 2: on the magic-drive curve at nonzero feedback phase the steady state
/// is pure with half its weight in the protected superposition and energy
/// on the upper branch; below the critical drive no nonzero phase is dark.
fn incommensurate_dark_curve() -> Result<CriterionResult> {
    let mut pass = true;
    let mut details = String::new();
    for sign in [1.0, -1.0] {
        for base in [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4] {
            let dphi = sign * base;
            let omega = dark_rabi(1.0, 0.0, dphi)?
                .ok_or_else(|| crate::error::Error::UndefinedRegime("no magic drive".into()))?;
            let p = SystemParams {
                omega,
                dphi,
                ..SystemParams::default()
            };
            let model = build_v_atom_model(&p)?;
            let rho = steady_state_of(&model)?;
            let obs = observables(&rho, &model)?;
            let (e_plus, _) = dark_energies(1.0, 0.0, dphi);
            let ok = obs.purity >= 1.0 - 1e-8
                && (obs.pop_s - 0.5).abs() <= 1e-8
                && (obs.h_expectation - e_plus).abs() <= 1e-8;
            pass &= ok;
            details.push_str(&format!(
                "dphi={dphi:+.4} omega={omega:.6}: purity={:.12} pop_s={:.10} E={:+.10} (want {e_plus:+.10}){}\n",
                obs.purity,
                obs.pop_s,
                obs.h_expectation,
                if ok { "" } else { "  <- FAIL" }
            ));
        }
    }

    // Below the critical drive, a phase scan finds purity 1 only at zero.
    let n = 32;
    let mut sub_ok = true;
    let mut worst = 1.0f64;
    for k in -(n as i64)..=(n as i64) {
        let dphi = k as f64 * PI / n as f64;
        let p = SystemParams {
            omega: 0.5,
            dphi,
            ..SystemParams::default()
        };
        let (rho, _) = steady_state_or_relax(&build_v_atom_model(&p)?, None)?;
        let pur = purity(&rho);
        if k == 0 {
            sub_ok &= pur >= 1.0 - 1e-8;
        } else {
            sub_ok &= pur < 1.0 - 1e-4;
            worst = worst.min(1.0 - pur);
        }
    }
    pass &= sub_ok;
    details.push_str(&format!(
        "subcritical scan (omega=0.5): off-zero purity deficit >= {worst:.3e}{}\n",
        if sub_ok { "" } else { "  <- FAIL" }
    ));
    verdict(2, "incommensurate dark curve", pass, details)
}

/// 3: the cascaded two-atom chain relaxes to the entangled pure state with
/// the same amplitude as the single-atom commensurate dark state.
fn dimer_equivalence() -> Result<CriterionResult> {
    let mut pass = true;
    let mut details = String::new();
    for (omega, delta) in [(0.8, 0.35), (1.5, 0.0), (0.4, -0.6)] {
        let p = SystemParams {
            omega,
            delta1: delta,
            delta2: -delta,
            ..SystemParams::default()
        };
        let rho = steady_state_of(&build_dimer_model(&p)?)?;
        let ket = crate::dark::dimer_dark_state(&p)?;
        let fid = fidelity_with_pure(&rho, &ket);

        // amplitude read off the steady state: sqrt(2) c_eg / c_gg
        let alpha_ss = (rho[(1, 0)] / rho[(0, 0)]) * std::f64::consts::SQRT_2;
        let alpha_ref = alpha_commensurate(omega, delta, 1.0, 1.0);
        let da = (alpha_ss - alpha_ref).norm();
        let ok = fid >= 1.0 - 1e-8 && da <= 1e-6;
        pass &= ok;
        details.push_str(&format!(
            "omega={omega} delta={delta}: fidelity={fid:.12} |alpha - ref|={da:.2e}{}\n",
            if ok { "" } else { "  <- FAIL" }
        ));
    }
    verdict(3, "dimer equivalence", pass, details)
}

/// 4: the two-mode cavity at weak coupling reduces to the waveguide model
/// with the closed-form effective rate, and the collective-mode vacuum
/// correlations match the analytic forms.
fn cavity_reduction() -> Result<CriterionResult> {
    let c = CavityConfig {
        g: 1.0,
        kappa: 20.0,
        kappa_prime: 0.0,
        n_max: 2,
    };
    let gamma_eff = crate::cavity::gamma_effective(&c); // 0.2
    let dphi = FRAC_PI_2;
    let omega = dark_rabi(gamma_eff, 0.0, dphi)?
        .ok_or_else(|| crate::error::Error::UndefinedRegime("no magic drive".into()))?;
    let p = SystemParams {
        omega,
        gamma: gamma_eff,
        dphi,
        ..SystemParams::default()
    };
    let report = verify_adiabatic_limit(&p, &c)?;
    let rate_err = (report.gamma_eff_fit - gamma_eff).abs() / gamma_eff;
    let mut pass = report.trace_distance <= 1e-2 && rate_err <= 0.05;
    let mut details = format!(
        "g/kappa=0.05: trace_distance={:.3e} fitted_rate={:.5} (formula {:.5}, rel err {:.2e}) cutoff_occ={:.1e}\n",
        report.trace_distance, report.gamma_eff_fit, gamma_eff, rate_err, report.cutoff_occupation
    );

    // analytic vs regression correlations, all pairs, several times
    let (kappa, kappa_prime) = (1.0, 0.0);
    let chi = p.dphi - PI;
    let mut corr_ok = true;
    let mut worst = 0.0f64;
    for t in [0.0, 0.1, 0.5, 1.0, 2.0] {
        for i in [CollectiveMode::T, CollectiveMode::S] {
            for k in [CollectiveMode::T, CollectiveMode::S] {
                let a = cavity_correlation(i, k, t, kappa, kappa_prime)?;
                let n = cavity_correlation_numeric(i, k, t, chi, kappa, kappa_prime, 1)?;
                let d = (a - n).norm();
                worst = worst.max(d);
                corr_ok &= d <= 1e-6;
            }
        }
    }
    // the quoted cross element at kappa t = 2
    let ts = cavity_correlation(CollectiveMode::T, CollectiveMode::S, 2.0, 1.0, 0.0)?;
    let want = -(-1.0f64).exp();
    corr_ok &= (ts.re - want).abs() <= 1e-12 && ts.im.abs() <= 1e-12;
    pass &= corr_ok;
    details.push_str(&format!(
        "correlations: worst |analytic - regression| = {worst:.2e}; <T S†>(kt=2) = {:.6} (want {want:.6})\n",
        ts.re
    ));
    verdict(4, "cavity reduction", pass, details)
}

/// 5: at a tiny delay the time-bin solver lands on the Markov steady
/// state.
fn delayed_markov_limit() -> Result<CriterionResult> {
    let p = SystemParams {
        omega: 1.0,
        tau: 0.01,
        ..SystemParams::default()
    };
    let cfg = TimeBinConfig {
        dt: 0.01,
        t_final: 400.0,
        stop_at_steady: true,
        sample_stride: 50,
        ..TimeBinConfig::default()
    };
    let (rho_mps, fired) = steady_atom_state(&p, &cfg)?;
    let p0 = SystemParams { tau: 0.0, ..p };
    let rho_markov = steady_state_of(&build_v_atom_model(&p0)?)?;
    let d = trace_distance(&rho_mps, &rho_markov)?;
    let pass = fired && d <= 1e-2;
    verdict(
        5,
        "time-bin Markov limit",
        pass,
        format!("gamma*tau=0.01, m=1: detector fired={fired}, trace distance={d:.3e}\n"),
    )
}

/// 6: long delay: before the first return the dynamics is the mirrorless
/// two-channel one, oscillating at sqrt(2) omega; at t = tau the ground
/// population has a kink.
fn long_delay_time_series() -> Result<CriterionResult> {
    let p = SystemParams {
        omega: 1.0,
        tau: 10.0,
        ..SystemParams::default()
    };
    let dt = 0.01;
    // Stop shortly after the first return: the kink test needs a quarter
    // unit of post-return signal, and every extra step costs ~2m tensor
    // swaps once the loop is full.
    let cfg = TimeBinConfig {
        dt,
        t_final: 10.4,
        sample_stride: 1,
        ..TimeBinConfig::default()
    };
    let result = mps_run(&p, &cfg)?;

    // (a) populations vs the mirrorless oracle for t < tau
    let oracle_model = build_two_channel_model(&p)?;
    let oracle = evolve(
        &oracle_model,
        &ground_state_density(3),
        p.tau,
        0.001,
        (dt / 0.001).round() as usize,
    )?;
    let mut worst = 0.0f64;
    for row in result.rows.iter().filter(|r| r.t < p.tau - 1e-9) {
        let idx = (row.t / dt).round() as usize;
        let rho = &oracle.states[idx.min(oracle.states.len() - 1)];
        worst = worst
            .max((row.pop_g - rho[(0, 0)].re).abs())
            .max((row.pop_e1 - rho[(1, 1)].re).abs())
            .max((row.pop_e2 - rho[(2, 2)].re).abs());
    }
    let pops_ok = worst <= 1e-3;

    // (b) Rabi frequency from the spacing of the first two pop_g minima
    let pre: Vec<(f64, f64)> = result
        .rows
        .iter()
        .filter(|r| r.t < p.tau - 1e-9)
        .map(|r| (r.t, r.pop_g))
        .collect();
    let minima = local_extrema(&pre, false);
    let (rabi_ok, rabi_detail) = if minima.len() >= 2 {
        let spacing = minima[1] - minima[0];
        let freq = 2.0 * PI / spacing;
        let want = std::f64::consts::SQRT_2 * p.omega;
        let rel = (freq - want).abs() / want;
        (
            rel <= 0.05,
            format!("minima at t={:.3}, {:.3}: freq={freq:.4} vs sqrt(2)*omega={want:.4} (rel {rel:.2e})", minima[0], minima[1]),
        )
    } else {
        (false, format!("found only {} pop_g minima", minima.len()))
    };

    // (c) slope of pop_g changes discontinuously at t = tau
    let slope = |lo: f64, hi: f64| -> f64 {
        let pts: Vec<(f64, f64)> = result
            .rows
            .iter()
            .filter(|r| r.t >= lo - 1e-12 && r.t <= hi + 1e-12)
            .map(|r| (r.t, r.pop_g))
            .collect();
        linear_slope(&pts)
    };
    let s_ll = slope(p.tau - 0.50, p.tau - 0.25);
    let s_l = slope(p.tau - 0.25, p.tau - dt / 2.0);
    let s_r = slope(p.tau + dt / 2.0, p.tau + 0.25);
    let drift = (s_l - s_ll).abs();
    let jump = (s_r - s_l).abs();
    let kink_ok = jump > 3.0 * drift.max(1e-4);

    let pass = pops_ok && rabi_ok && kink_ok;
    let details = format!(
        "pre-return populations: worst dev = {worst:.2e} (tol 1e-3){}\n\
         {rabi_detail}{}\n\
         slope of pop_g: {s_l:+.4} -> {s_r:+.4} across t=tau (drift {drift:.1e}, jump {jump:.3}){}\n",
        if pops_ok { "" } else { "  <- FAIL" },
        if rabi_ok { "" } else { "  <- FAIL" },
        if kink_ok { "" } else { "  <- FAIL" },
    );
    verdict(6, "long-delay time series", pass, details)
}

/// 7: with delay, the purity ridges move to the wrapped positions
/// `phi_D + (E+ - E-) tau`, and the zero-phase ridge does not move.
fn delay_shifted_purity_ridges() -> Result<CriterionResult> {
    let omega = 2.0;
    let phi_d = dark_phase_for_drive(1.0, omega)
        .ok_or_else(|| crate::error::Error::UndefinedRegime("drive below critical".into()))?;
    let h = PI / 64.0;
    let dt = 0.025;
    let t_final = 500.0;

    let mut pass = true;
    let mut details = String::new();
    for tau in [0.25, 0.5] {
        // The longer delay doubles the bins in flight and fattens the bond,
        // so its cells cost an order of magnitude more; keep their window
        // at the minimum that still separates an interior maximum from a
        // monotone slope.
        let half: i64 = if tau < 0.3 { 3 } else { 2 };
        for center_phi in [0.0, phi_d, -phi_d] {
            let predicted = if center_phi == 0.0 {
                0.0
            } else {
                predicted_phase_line(center_phi, 0.0, 1.0, tau)
            };
            let offsets: Vec<i64> = (-half..=half).collect();
            // Per cell: evolve from the ground state well past the slowest
            // transient, then read the purity as a trailing time average so
            // the residual breathing of the loop photons cancels out. The
            // two consecutive window means double as a settledness check.
            let cells: Vec<(i64, f64, f64, f64)> = offsets
                .par_iter()
                .map(|&k| -> Result<(i64, f64, f64, f64)> {
                    let dphi = wrap_angle(predicted + k as f64 * h);
                    let p = SystemParams {
                        omega,
                        dphi,
                        tau,
                        ..SystemParams::default()
                    };
                    let cfg = TimeBinConfig {
                        dt,
                        t_final,
                        stop_at_steady: false,
                        sample_stride: (2.5 / dt).round() as usize,
                        ..TimeBinConfig::default()
                    };
                    let result = mps_run(&p, &cfg)?;
                    let mean = |lo: f64, hi: f64, f: &dyn Fn(&crate::mps::StepRow) -> f64| {
                        let vals: Vec<f64> = result
                            .rows
                            .iter()
                            .filter(|r| r.t > lo && r.t <= hi)
                            .map(f)
                            .collect();
                        vals.iter().sum::<f64>() / vals.len() as f64
                    };
                    let p_now = mean(t_final - 100.0, t_final, &|r| r.purity);
                    let p_prev = mean(t_final - 200.0, t_final - 100.0, &|r| r.purity);
                    let flux = mean(t_final - 100.0, t_final, &|r| r.flux_emitted);
                    Ok((k, p_now, (p_now - p_prev).abs(), flux))
                })
                .collect::<Result<Vec<_>>>()?;
            let &(k_max, p_max, _, _) = cells
                .iter()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty window");
            let &(k_flux, ..) = cells
                .iter()
                .min_by(|a, b| a.3.total_cmp(&b.3))
                .expect("non-empty window");
            let settle = cells.iter().map(|c| c.2).fold(0.0, f64::max);
            let interior = k_max.abs() < half;
            let ok = interior && k_max.abs() <= 1 && settle < 1e-3;
            pass &= ok;
            details.push_str(&format!(
                "tau={tau} line through {center_phi:+.4}: predicted {predicted:+.4}, max purity {p_max:.5} at {k_max:+} grid steps (emission min at {k_flux:+}, settle {settle:.1e}){}\n",
                if ok { "" } else { "  <- FAIL" }
            ));
        }
    }
    verdict(7, "delay-shifted purity ridges", pass, details)
}

/// 8: free-space loss degrades the zero-phase dark state to a known purity,
/// and the finite-phase dark point resists it better.
fn decoherence_quantitative_point(gamma_prime_override: Option<f64>) -> Result<CriterionResult> {
    let gamma_prime = gamma_prime_override.unwrap_or(0.02);
    let p = SystemParams {
        omega: 2.0,
        gamma_prime,
        ..SystemParams::default()
    };
    let rho = steady_state_of(&build_v_atom_model(&p)?)?;
    let pur = purity(&rho);
    let point_ok = (pur - 0.75).abs() <= 0.05;

    // at 5% loss the finite-phase dark point is the more robust one
    let phi_d = dark_phase_for_drive(1.0, 2.0)
        .ok_or_else(|| crate::error::Error::UndefinedRegime("drive below critical".into()))?;
    let p_zero = SystemParams {
        omega: 2.0,
        gamma_prime: 0.05,
        ..SystemParams::default()
    };
    let p_phi = SystemParams {
        dphi: phi_d,
        ..p_zero
    };
    let pur_zero = purity(&steady_state_of(&build_v_atom_model(&p_zero)?)?);
    let pur_phi = purity(&steady_state_of(&build_v_atom_model(&p_phi)?)?);
    let order_ok = pur_phi > pur_zero;

    let pass = point_ok && order_ok;
    let details = format!(
        "gamma'/gamma={gamma_prime}: purity={pur:.4} (want 0.75 +- 0.05){}\n\
         gamma'/gamma=0.05: purity(dphi={phi_d:.4})={pur_phi:.4} vs purity(dphi=0)={pur_zero:.4}{}\n",
        if point_ok { "" } else { "  <- FAIL" },
        if order_ok { "" } else { "  <- FAIL" },
    );
    verdict(8, "decoherence quantitative point", pass, details)
}

/// 9: imperfect directionality leaves the zero-phase dark state intact but
/// kills the finite-phase one.
fn directionality() -> Result<CriterionResult> {
    let mut pass = true;
    let mut details = String::new();

    for eta in [0.6, 0.75, 0.9, 1.0] {
        let p = SystemParams {
            omega: 1.0,
            delta1: 0.3,
            delta2: -0.3,
            eta,
            ..SystemParams::default()
        };
        let (rho, _) = steady_state_or_relax(&build_v_atom_model(&p)?, None)?;
        let pur = purity(&rho);
        let ok = pur >= 1.0 - 1e-6;
        pass &= ok;
        details.push_str(&format!(
            "zero phase, eta={eta}: purity={pur:.10}{}\n",
            if ok { "" } else { "  <- FAIL" }
        ));
    }

    // At exactly eta = 0.5 both superpositions couple identically, the
    // Liouvillian kernel degenerates and "the" steady state is ill-defined,
    // so the monotone chain is sampled on the unique side (eta > 0.5) and
    // the endpoint itself is required to be degenerate.
    let dphi = FRAC_PI_2;
    let omega = dark_rabi(1.0, 0.0, dphi)?
        .ok_or_else(|| crate::error::Error::UndefinedRegime("no magic drive".into()))?;
    let mut last = f64::INFINITY;
    let mut final_purity = 1.0;
    for eta in [1.0, 0.9, 0.75, 0.6, 0.51] {
        let p = SystemParams {
            omega,
            dphi,
            eta,
            ..SystemParams::default()
        };
        let (rho, _) = steady_state_or_relax(&build_v_atom_model(&p)?, None)?;
        let pur = purity(&rho);
        let ok = pur <= last + 1e-6;
        pass &= ok;
        details.push_str(&format!(
            "finite phase, eta={eta}: purity={pur:.6}{}\n",
            if ok { "" } else { "  <- FAIL (not monotone)" }
        ));
        last = pur;
        final_purity = pur;
    }
    let drop_ok = final_purity < 0.99;
    pass &= drop_ok;
    details.push_str(&format!(
        "finite phase approaching eta=0.5: purity={final_purity:.6} (must be < 0.99){}\n",
        if drop_ok { "" } else { "  <- FAIL" }
    ));
    let degenerate = matches!(
        steady_state_of(&build_v_atom_model(&SystemParams {
            omega,
            dphi,
            eta: 0.5,
            ..SystemParams::default()
        })?),
        Err(crate::error::Error::DegenerateSteadyState { .. })
    );
    pass &= degenerate;
    details.push_str(&format!(
        "finite phase at eta=0.5: kernel degenerate (dark state gone) = {degenerate}{}\n",
        if degenerate { "" } else { "  <- FAIL" }
    ));
    verdict(9, "directionality", pass, details)
}

/// Times of local extrema (maxima when `maxima`, else minima) of a sampled
/// signal, refined by a parabolic fit through the three bracketing points.
fn local_extrema(pts: &[(f64, f64)], maxima: bool) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..pts.len().saturating_sub(1) {
        let (tm, ym) = pts[i - 1];
        let (t0, y0) = pts[i];
        let (tp, yp) = pts[i + 1];
        let is_ext = if maxima {
            y0 >= ym && y0 > yp
        } else {
            y0 <= ym && y0 < yp
        };
        if !is_ext {
            continue;
        }
        // parabola through three (roughly) equidistant samples
        let denom = ym - 2.0 * y0 + yp;
        let t_star = if denom.abs() > 1e-300 {
            let dt = 0.5 * (tp - tm);
            t0 + dt * 0.5 * (ym - yp) / denom
        } else {
            t0
        };
        out.push(t_star);
    }
    out
}

/// Least-squares slope of `y(t)`.
fn linear_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let st: f64 = pts.iter().map(|(t, _)| t).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let stt: f64 = pts.iter().map(|(t, _)| t * t).sum();
    let sty: f64 = pts.iter().map(|(t, y)| t * y).sum();
    (n * sty - st * sy) / (n * stt - st * st)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrema_and_slope_helpers() {
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.05;
                (t, (2.0 * t).cos())
            })
            .collect();
        let minima = local_extrema(&pts, false);
        assert!(!minima.is_empty());
        assert!((minima[0] - PI / 2.0).abs() < 1e-2);
        let maxima = local_extrema(&pts, true);
        assert!((maxima[0] - PI).abs() < 1e-2);

        let line: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 0.7 * i as f64)).collect();
        assert!((linear_slope(&line) + 0.7).abs() < 1e-12);
    }

    #[test]
    fn criterion_ids_are_exhaustive() {
        let opts = SuiteOptions::default();
        assert!(run_criterion(0, &opts).is_err());
        assert!(run_criterion(CRITERIA + 1, &opts).is_err());
    }

    /// The cheap analytic criteria double as unit tests here; the heavy
    /// solver-against-solver ones run in the integration suite.
    #[test]
    fn fast_criteria_pass() {
        for id in [1, 3] {
            let r = run_criterion(id, &SuiteOptions::default()).unwrap();
            assert!(r.pass, "criterion {id}:\n{}", r.details);
        }
    }

    #[test]
    fn negative_control_fails_the_decoherence_point() {
        let opts = SuiteOptions {
            gamma_prime_override: Some(0.2),
            ..SuiteOptions::default()
        };
        let r = run_criterion(8, &opts).unwrap();
        assert!(!r.pass, "an injected wrong loss must fail:\n{}", r.details);
    }
}
