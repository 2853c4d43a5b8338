//! Physical parameters of the atom + feedback loop.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parameters of the driven V atom and its waveguide feedback loop.
///
/// All rates are in units of the guided decay rate into one propagation
/// direction (`gamma`), times in units of `1/gamma`, angles in radians.
/// Frames rotate at the drive frequency, so `delta1`/`delta2` are the
/// detunings of the two optical transitions from the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Rabi frequency of the classical drive (applied symmetrically to both
    /// transitions).
    pub omega: f64,
    /// Guided (waveguide) decay rate per transition. The crate's reference
    /// unit; keep at 1 unless deliberately rescaling.
    pub gamma: f64,
    /// Non-guided (free-space) decay rate per transition.
    pub gamma_prime: f64,
    /// Detuning of transition 1 from the drive.
    pub delta1: f64,
    /// Detuning of transition 2 from the drive.
    pub delta2: f64,
    /// Round-trip feedback phase, wrapped to `[-pi, pi]`.
    pub dphi: f64,
    /// Relative drive phase between the two transitions. Only meaningful
    /// for `eta < 1`; it must be 0 there, and for `eta = 1` it can be (and
    /// is) absorbed into `dphi`.
    pub phi_prime: f64,
    /// Feedback round-trip delay, in units of `1/gamma`. Only the time-bin
    /// solver resolves it; the Markov solvers assume `tau -> 0`.
    pub tau: f64,
    /// Directionality of the two transitions: fraction of transition 1's
    /// guided emission that goes toward the mirror. `1` is perfectly
    /// chiral; `1/2` is bidirectional.
    pub eta: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega: 0.0,
            gamma: 1.0,
            gamma_prime: 0.0,
            delta1: 0.0,
            delta2: 0.0,
            dphi: 0.0,
            phi_prime: 0.0,
            tau: 0.0,
            eta: 1.0,
        }
    }
}

impl SystemParams {
    /// Check every field against its documented domain.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if !self.omega.is_finite() || self.omega < 0.0 {
            return bad(format!("omega must be finite and >= 0, got {}", self.omega));
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return bad(format!("gamma must be finite and > 0, got {}", self.gamma));
        }
        if !self.gamma_prime.is_finite() || self.gamma_prime < 0.0 {
            return bad(format!(
                "gamma_prime must be finite and >= 0, got {}",
                self.gamma_prime
            ));
        }
        if !self.delta1.is_finite() || !self.delta2.is_finite() {
            return bad("detunings must be finite".into());
        }
        if !self.dphi.is_finite() || self.dphi < -PI - 1e-12 || self.dphi > PI + 1e-12 {
            return bad(format!("dphi must lie in [-pi, pi], got {}", self.dphi));
        }
        if !self.tau.is_finite() || self.tau < 0.0 {
            return bad(format!("tau must be finite and >= 0, got {}", self.tau));
        }
        if !self.eta.is_finite() || self.eta < 0.5 || self.eta > 1.0 {
            return bad(format!("eta must lie in [0.5, 1], got {}", self.eta));
        }
        if !self.phi_prime.is_finite() {
            return bad("phi_prime must be finite".into());
        }
        if self.eta < 1.0 && self.phi_prime != 0.0 {
            return bad(format!(
                "phi_prime must be 0 for eta < 1 (got phi_prime = {}); \
                 for eta = 1 it is gauged into dphi and ignored",
                self.phi_prime
            ));
        }
        Ok(())
    }

    /// `gamma tau`, the delay in units of the guided lifetime.
    pub fn gamma_tau(&self) -> f64 {
        self.gamma * self.tau
    }
}
