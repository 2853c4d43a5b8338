//! Time-bin matrix-product-state solver for finite feedback delay.
//!
//! The waveguide field is discretized into bins of length `dt`. At step `k`
//! the atom interacts simultaneously with the freshly arriving bin `k`
//! (through `sigma_L`) and with bin `k - m` (through `e^{i dphi} sigma_R`),
//! which it wrote `m = tau/dt` steps earlier and which has since bounced
//! off the mirror:
//!
//! ```text
//! U_k = exp[ -i H_a dt + sqrt(gamma dt) (b_f† sigma_L - b_f sigma_L†)
//!          + sqrt(gamma dt) (e^{i dphi} b_p† sigma_R - e^{-i dphi} b_p sigma_R†) ]
//! ```
//!
//! Expanding two consecutive steps that share a bin reproduces, for
//! `tau -> 0`, exactly the collective jump `sigma_T = sigma_L + e^{i dphi}
//! sigma_R` and the exchange Hamiltonian of the Markov solver, so the two
//! engines agree in their common regime (this is tested, not assumed).
//!
//! The joint state of atom plus the `m` in-flight bins is kept as a tensor
//! train `[atom, bin_{k-1}, ..., bin_{k-m}, tail]`. Bins that have passed
//! the atom for the second time never interact again; they are compressed
//! into the `tail` site, whose dangling physical index purifies the
//! already-emitted field. Its dimension stays bounded by the bond
//! dimension, so memory does not grow with simulation time.

mod checkpoint;
mod evolve;
mod state;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use evolve::{
    phase_delay_purity_scan, purity_maxima_along_phase, resume, run, steady_atom_state,
    PuritySample, StepRow, TimeBinRun,
};
pub use state::{build_step_unitary, StepMetrics, TensorTrainState};

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Discretization and truncation controls for the time-bin solver.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeBinConfig {
    /// Bin length; `tau` must be an integer multiple of it.
    pub dt: f64,
    /// Photons kept per bin (`None`: 1, or 2 when `omega > 2 gamma`).
    pub fock_cutoff: Option<usize>,
    /// Relative discarded weight allowed per singular-value truncation.
    pub svd_tol: f64,
    /// Hard cap on the bond dimension.
    pub max_bond: usize,
    /// Evolution horizon.
    pub t_final: f64,
    /// Steady-state detector: largest allowed change of any atomic
    /// density-matrix element across `steady_window`.
    pub steady_tol: f64,
    /// Length of the steadiness comparison window.
    pub steady_window: f64,
    /// Stop as soon as the detector fires (instead of running to
    /// `t_final`).
    pub stop_at_steady: bool,
    /// Keep every `sample_stride`-th step in the output (first and last
    /// are always kept).
    pub sample_stride: usize,
}

impl Default for TimeBinConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            fock_cutoff: None,
            svd_tol: 1e-8,
            max_bond: 64,
            t_final: 100.0,
            steady_tol: 1e-5,
            steady_window: 5.0,
            stop_at_steady: false,
            sample_stride: 1,
        }
    }
}

/// Derived discretization facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedTimeBin {
    /// Bins in flight: `tau / dt`.
    pub m: usize,
    /// Physical dimension of one bin (`fock_cutoff + 1`).
    pub dim_bin: usize,
}

impl TimeBinConfig {
    /// Validate against the physical parameters and resolve the derived
    /// quantities.
    pub fn validate(&self, p: &SystemParams) -> Result<ResolvedTimeBin> {
        p.validate()?;
        if p.gamma_prime > 0.0 {
            return Err(Error::InvalidParam(
                "the time-bin solver tracks only the guided field; free-space loss \
                 (gamma_prime > 0) is not representable — use the master-equation solver"
                    .into(),
            ));
        }
        if p.tau == 0.0 {
            return Err(Error::InvalidParam(
                "tau = 0 has no retardation; use the Markov master-equation solver".into(),
            ));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidParam(format!("dt must be > 0, got {}", self.dt)));
        }
        if !self.t_final.is_finite() || self.t_final < self.dt {
            return Err(Error::InvalidParam(format!(
                "t_final must allow at least one step of dt = {}, got {}",
                self.dt, self.t_final
            )));
        }
        if !(self.svd_tol > 0.0 && self.svd_tol <= 1e-2) {
            return Err(Error::InvalidParam(format!(
                "svd_tol must lie in (0, 1e-2], got {}",
                self.svd_tol
            )));
        }
        if self.max_bond < 2 {
            return Err(Error::InvalidParam("max_bond must be at least 2".into()));
        }
        if !(self.steady_tol > 0.0) || !(self.steady_window > 0.0) {
            return Err(Error::InvalidParam(
                "steady_tol and steady_window must be positive".into(),
            ));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParam("sample_stride must be at least 1".into()));
        }

        let rate = fastest_rate(p);
        if self.dt * rate > 0.05 * (1.0 + 1e-9) {
            return Err(Error::InvalidParam(format!(
                "dt = {} is too coarse: dt * max(gamma, omega, |delta|) = {:.3} exceeds 0.05",
                self.dt,
                self.dt * rate
            )));
        }

        let ratio = p.tau / self.dt;
        let m = ratio.round() as usize;
        if m < 1 || (m as f64 * self.dt - p.tau).abs() > 1e-9 * p.tau.max(self.dt) {
            return Err(Error::InvalidParam(format!(
                "tau = {} is not an integer multiple of dt = {} (tau/dt = {:.6}); \
                 adjust dt, e.g. with commensurate_dt",
                p.tau, self.dt, ratio
            )));
        }

        let cutoff = match self.fock_cutoff {
            Some(0) => {
                return Err(Error::InvalidParam(
                    "fock_cutoff must be at least 1".into(),
                ))
            }
            Some(c) => c,
            None => {
                if p.omega > 2.0 * p.gamma * (1.0 + 1e-12) {
                    2
                } else {
                    1
                }
            }
        };
        Ok(ResolvedTimeBin {
            m,
            dim_bin: cutoff + 1,
        })
    }
}

fn fastest_rate(p: &SystemParams) -> f64 {
    p.gamma
        .max(p.omega)
        .max(p.delta1.abs())
        .max(p.delta2.abs())
}

/// Largest bin length `dt <= dt_target` that divides `tau` exactly and
/// satisfies the resolution bound `dt * max rate <= 0.05`. Scans over
/// `tau` use this so that every grid point is commensurate.
pub fn commensurate_dt(p: &SystemParams, dt_target: f64) -> Result<f64> {
    if p.tau <= 0.0 {
        return Err(Error::InvalidParam(
            "commensurate_dt needs tau > 0".into(),
        ));
    }
    if !dt_target.is_finite() || dt_target <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "dt_target must be > 0, got {dt_target}"
        )));
    }
    let mut m = (p.tau / dt_target).ceil().max(1.0) as usize;
    let rate = fastest_rate(p);
    if rate > 0.0 {
        let m_res = (p.tau * rate / 0.05).ceil() as usize;
        m = m.max(m_res.max(1));
    }
    Ok(p.tau / m as f64)
}
