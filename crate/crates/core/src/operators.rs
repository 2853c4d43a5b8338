//! Operators on the three-level V atom and on bosonic modes.
//!
//! Atomic basis ordering is `(|g>, |e1>, |e2>)`. Transition `i` couples
//! `|g> <-> |ei>`; the lowering operator is `sigma_i^- = |g><ei|`.
//!
//! The waveguide supports two propagation directions. With directionality
//! `eta`, the combinations seen by the toward-mirror (`L`) and away (`R`)
//! directions are
//!
//! ```text
//! sigma_L^- = sqrt(eta)     sigma_1^- + sqrt(1 - eta) sigma_2^-
//! sigma_R^- = sqrt(1 - eta) sigma_1^- + sqrt(eta)     sigma_2^-
//! ```
//!
//! and after the mirror folds `L` back onto `R` with round-trip phase
//! `dphi`, the bright/dark superpositions are the (unnormalized)
//!
//! ```text
//! sigma_T^- = sigma_L^- + e^{i dphi} sigma_R^-      (decays, rate gamma)
//! sigma_S^- = sigma_L^- - e^{i dphi} sigma_R^-      (feedback-protected)
//! ```
//!
//! Keeping `sigma_T/S` unnormalized with jump rate `gamma` reproduces, at
//! `eta = 1`, a normalized bright mode decaying at `2 gamma`.

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::linalg::{CMat, CVec, ONE};
use crate::params::SystemParams;

/// Atomic Hilbert-space dimension.
pub const DIM_ATOM: usize = 3;

/// Basis kets.
pub fn ket_g() -> CVec {
    basis_ket(0)
}
pub fn ket_e1() -> CVec {
    basis_ket(1)
}
pub fn ket_e2() -> CVec {
    basis_ket(2)
}

fn basis_ket(i: usize) -> CVec {
    let mut v = CVec::zeros(DIM_ATOM);
    v[i] = ONE;
    v
}

/// `|g><e1|`.
pub fn sigma1_minus() -> CMat {
    let mut m = CMat::zeros((DIM_ATOM, DIM_ATOM));
    m[(0, 1)] = ONE;
    m
}

/// `|g><e2|`.
pub fn sigma2_minus() -> CMat {
    let mut m = CMat::zeros((DIM_ATOM, DIM_ATOM));
    m[(0, 2)] = ONE;
    m
}

/// Normalized superposition kets of the two excited states at feedback
/// phase `dphi`:
///
/// ```text
/// |T> = (|e1> + e^{-i dphi} |e2>)/sqrt(2)
/// |S> = (|e1> - e^{-i dphi} |e2>)/sqrt(2)
/// ```
pub fn ket_t(dphi: f64) -> CVec {
    let mut v = CVec::zeros(DIM_ATOM);
    let r = 0.5f64.sqrt();
    v[1] = C64::new(r, 0.0);
    v[2] = C64::from_polar(r, -dphi);
    v
}

pub fn ket_s(dphi: f64) -> CVec {
    let mut v = CVec::zeros(DIM_ATOM);
    let r = 0.5f64.sqrt();
    v[1] = C64::new(r, 0.0);
    v[2] = -C64::from_polar(r, -dphi);
    v
}

/// The full set of single-atom lowering operators for given directionality
/// and feedback phase.
#[derive(Debug, Clone)]
pub struct ChiralOps {
    pub sigma1: CMat,
    pub sigma2: CMat,
    pub sigma_l: CMat,
    pub sigma_r: CMat,
    /// Unnormalized bright combination `sigma_L + e^{i dphi} sigma_R`.
    pub sigma_t: CMat,
    /// Unnormalized protected combination `sigma_L - e^{i dphi} sigma_R`.
    pub sigma_s: CMat,
}

/// Build the lowering-operator set for directionality `eta`, feedback phase
/// `dphi` and drive phase `phi_prime` (validated: 0 unless `eta = 1`).
pub fn atomic_operators(eta: f64, dphi: f64, phi_prime: f64) -> Result<ChiralOps> {
    let p = SystemParams {
        eta,
        dphi,
        phi_prime,
        ..SystemParams::default()
    };
    p.validate()?;

    let s1 = sigma1_minus();
    let s2 = sigma2_minus();
    let (cl, cr) = (eta.sqrt(), (1.0 - eta).sqrt());
    let sigma_l = s1.mapv(|z| z * cl) + s2.mapv(|z| z * cr);
    let sigma_r = s1.mapv(|z| z * cr) + s2.mapv(|z| z * cl);
    let phase = C64::from_polar(1.0, dphi);
    let sigma_t = &sigma_l + &sigma_r.mapv(|z| z * phase);
    let sigma_s = &sigma_l - &sigma_r.mapv(|z| z * phase);
    Ok(ChiralOps {
        sigma1: s1,
        sigma2: s2,
        sigma_l,
        sigma_r,
        sigma_t,
        sigma_s,
    })
}

/// Bosonic annihilation operator truncated to `dim` Fock states
/// (`a |n> = sqrt(n) |n-1>`, `n < dim`).
pub fn boson_annihilator(dim: usize) -> CMat {
    let mut a = CMat::zeros((dim, dim));
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}
