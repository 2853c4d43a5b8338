//! Closed-form predictions for the driven dark states of the feedback
//! system.
//!
//! The collective jump operator annihilates every superposition of the
//! ground state and the protected state `|S>`, so a pure stationary state
//! of the form
//!
//! ```text
//! |D> = N (|g> + alpha |S>)
//! ```
//!
//! exists whenever `|D>` is additionally an eigenstate of the Hamiltonian.
//! Working out that eigencondition gives the amplitudes and existence
//! regimes below:
//!
//! * commensurate loop (`dphi = 0`) with opposite detunings
//!   `delta2 = -delta1`: dark at every drive strength,
//! * incommensurate loop (`dphi != 0`) with a common detuning
//!   `delta1 = delta2 = delta`: dark only at one magic drive strength
//!   ([`dark_rabi`]).
//!
//! The module also exposes the single-excitation energies whose splitting
//! sets the phase drift per loop round-trip, the tight-binding hopping
//! amplitude between neighbouring dark resonances, and the dressed-state
//! amplitudes used for phase-scan predictions.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::operators::{ket_g, ket_s, DIM_ATOM};
use crate::params::SystemParams;

const SQRT2: f64 = std::f64::consts::SQRT_2;
/// Parameter-matching tolerance used when classifying regimes.
const REGIME_TOL: f64 = 1e-9;

/// Dark amplitude for the commensurate loop (`dphi = 0`) with opposite
/// detunings `delta1 = delta = -delta2`:
///
/// ```text
/// alpha = -sqrt(2) omega / (2 delta + i gamma (2 eta - 1))
/// ```
///
/// The coupling asymmetry `eta` only rescales the imaginary part; at
/// `eta = 1` this is `-sqrt(2) omega / (2 delta + i gamma)` and at
/// `eta = 1/2` the amplitude becomes purely real.
pub fn alpha_commensurate(omega: f64, delta: f64, gamma: f64, eta: f64) -> C64 {
    let denom = C64::new(2.0 * delta, gamma * (2.0 * eta - 1.0));
    -C64::new(SQRT2 * omega, 0.0) / denom
}

/// Amplitude that cancels the bright component `|T>` of the Hamiltonian
/// acting on `|g> + alpha |S>` for arbitrary phase and detunings
/// (`eta = 1`):
///
/// ```text
/// alpha = -(omega/sqrt(2)) (1 + e^{i dphi}) / (i gamma + delta1 - delta2)
/// ```
///
/// This is a necessary condition for darkness; whether the state is truly
/// stationary additionally depends on the `|g>`/`|S>` closure (see
/// [`predict`]).
pub fn alpha_general(omega: f64, delta1: f64, delta2: f64, gamma: f64, dphi: f64) -> C64 {
    let num = C64::new(omega / SQRT2, 0.0) * (C64::new(1.0, 0.0) + C64::from_polar(1.0, dphi));
    -num / C64::new(delta1 - delta2, gamma)
}

/// Magic drive strength at which the incommensurate loop (`dphi != 0`) with
/// common detuning `delta` supports a pure dark state:
///
/// ```text
/// omega = gamma sqrt( 1/(1 + cos dphi) - (2 delta / gamma) / sin dphi )
/// ```
///
/// Returns `Ok(None)` when no real drive satisfies the condition (radicand
/// non-positive, or `dphi = ±pi` where the expression diverges) and an
/// [`Error::UndefinedRegime`] at `dphi = 0`, where the commensurate
/// analysis applies instead and every drive strength works on resonance.
pub fn dark_rabi(gamma: f64, delta: f64, dphi: f64) -> Result<Option<f64>> {
    if dphi.abs() < REGIME_TOL {
        return Err(Error::UndefinedRegime(
            "dark drive strength is undefined at dphi = 0; the commensurate dark state \
             exists at every drive strength"
                .into(),
        ));
    }
    let c = dphi.cos();
    let s = dphi.sin();
    if (1.0 + c).abs() < REGIME_TOL || s.abs() < REGIME_TOL {
        return Ok(None);
    }
    let radicand = 1.0 / (1.0 + c) - (2.0 * delta / gamma) / s;
    if radicand <= 0.0 {
        return Ok(None);
    }
    Ok(Some(gamma * radicand.sqrt()))
}

/// Single-excitation energies of the loop written in half-angle form so
/// that both are analytic through `dphi = 0`:
///
/// ```text
/// E_plus  = -delta + (gamma/2) tan(dphi/2)
/// E_minus =        - (gamma/2) tan(dphi/2)
/// ```
///
/// `E_plus` is the energy of the driven dark state at the magic drive
/// strength; the splitting `E_plus - E_minus` fixes the phase accumulated
/// per round trip ([`predicted_phase_line`]). Both diverge at
/// `dphi = ±pi`.
pub fn dark_energies(gamma: f64, delta: f64, dphi: f64) -> (f64, f64) {
    let t = (0.5 * dphi).tan();
    (-delta + 0.5 * gamma * t, -0.5 * gamma * t)
}

/// Hopping amplitude of the effective tight-binding chain formed by the
/// dark resonances of neighbouring loop windings:
///
/// ```text
/// J = i (gamma/2) sqrt(2 + delta / E_minus)
/// ```
///
/// with the convention `delta / E_minus := 0` when `delta = 0` (both vanish
/// on resonance at `dphi = 0`).
pub fn tight_binding_hopping(gamma: f64, delta: f64, dphi: f64) -> C64 {
    let (_, e_minus) = dark_energies(gamma, delta, dphi);
    let ratio = if delta == 0.0 { 0.0 } else { delta / e_minus };
    C64::new(0.0, 0.5 * gamma) * C64::new(2.0 + ratio, 0.0).sqrt()
}

/// Dressed amplitudes of the driven `{|g>, |S>}` manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedAlphas {
    pub plus: C64,
    pub minus: C64,
    /// Set when the `g`–`S` coupling vanishes (`dphi = 0` or `omega = 0`)
    /// and the two dressed branches are not separated; the amplitudes are
    /// then reported as 0 and the commensurate analysis applies instead.
    pub degenerate: bool,
}

/// Dressed-state amplitudes of the driven `{|g>, |S>}` manifold when the
/// bright state has been eliminated:
///
/// ```text
/// w        = omega (1 - e^{i dphi}) / sqrt(2)
/// alpha_pm = -w / (delta ± sgn(dphi) sqrt(delta^2 + |w|^2))
/// ```
///
/// At the magic drive strength of [`dark_rabi`] the `+` branch coincides
/// with [`alpha_general`] (checked numerically in the tests; the `-`
/// branch is the unstable root).
pub fn dressed_alphas(omega: f64, delta: f64, dphi: f64) -> DressedAlphas {
    let w = C64::new(omega / SQRT2, 0.0) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, dphi));
    if dphi.abs() < REGIME_TOL || w.norm() < REGIME_TOL * (1.0 + omega.abs()) {
        return DressedAlphas {
            plus: C64::new(0.0, 0.0),
            minus: C64::new(0.0, 0.0),
            degenerate: true,
        };
    }
    let root = (delta * delta + w.norm_sqr()).sqrt();
    let sign = dphi.signum();
    DressedAlphas {
        plus: -w / C64::new(delta + sign * root, 0.0),
        minus: -w / C64::new(delta - sign * root, 0.0),
        degenerate: false,
    }
}

/// Wrap an angle to `(-pi, pi]`-ish: `x - 2 pi round(x / 2 pi)`.
///
/// `round` ties away from zero, so the branch points map as `+pi -> -pi`
/// and `-pi -> +pi`; callers comparing wrapped angles near `±pi` should
/// compare modulo `2 pi`.
pub fn wrap_angle(x: f64) -> f64 {
    x - std::f64::consts::TAU * (x / std::f64::consts::TAU).round()
}

/// Predicted location of the purity ridge in the `(dphi, tau)` plane: the
/// loop phase at which the delayed feedback interferes as it did at
/// `(phi_d, tau = 0)`, shifted by the single-excitation splitting
/// evaluated at `phi_d`,
///
/// ```text
/// dphi(tau) = wrap( phi_d + (E_plus(phi_d) - E_minus(phi_d)) tau )
/// ```
///
/// At `phi_d = 0` the splitting reduces to `-delta`, so on resonance the
/// ridge through the origin does not move with the delay.
pub fn predicted_phase_line(phi_d: f64, delta: f64, gamma: f64, tau: f64) -> f64 {
    let (e_plus, e_minus) = dark_energies(gamma, delta, phi_d);
    wrap_angle(phi_d + (e_plus - e_minus) * tau)
}

/// Markovian dark phase at a given drive strength on resonance: the
/// positive root of `omega = dark_rabi(gamma, 0, phi)`,
///
/// ```text
/// phi_D = acos( gamma^2 / omega^2 - 1 )
/// ```
///
/// defined for `omega >= gamma/sqrt(2)` (the critical drive, where the
/// root collapses onto `phi = 0`); `None` below it.
pub fn dark_phase_for_drive(gamma: f64, omega: f64) -> Option<f64> {
    let c = gamma * gamma / (omega * omega) - 1.0;
    // tolerate rounding right at the critical drive, where c = 1 exactly
    let tol = 1e-9;
    if !(-1.0 - tol..=1.0 + tol).contains(&c) {
        return None;
    }
    Some(c.clamp(-1.0, 1.0).acos())
}

/// Drive strength above which the commensurate-loop steady state stops
/// being dominated by the dark state: `omega_c = gamma / sqrt(2)`.
pub fn critical_drive(gamma: f64) -> f64 {
    gamma / SQRT2
}

/// Rate at which the system settles into a dark state of amplitude
/// `alpha`: `2 gamma / (1 + |alpha|^2)`. Large dark amplitudes (strong
/// drives) slow the approach down.
pub fn relaxation_rate(gamma: f64, alpha: C64) -> f64 {
    2.0 * gamma / (1.0 + alpha.norm_sqr())
}

/// Normalized three-level dark state `N (|g> + alpha |S(dphi)>)`.
pub fn dark_state_vector(alpha: C64, dphi: f64) -> CVec {
    let mut v = ket_g();
    let s = ket_s(dphi);
    for i in 0..DIM_ATOM {
        v[i] += alpha * s[i];
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / C64::new(norm, 0.0))
}

/// Normalized dark state of the two-atom chain, `N (|gg> + alpha |S_12>)`
/// with `|S_12> = (|eg> - |ge>)/sqrt(2)` in the `(|gg>, |eg>, |ge>, |ee>)`
/// basis. Exact only for the commensurate loop with opposite detunings;
/// other parameter combinations return [`Error::UndefinedRegime`].
pub fn dimer_dark_state(p: &SystemParams) -> Result<CVec> {
    p.validate()?;
    if p.dphi.abs() > REGIME_TOL || (p.delta1 + p.delta2).abs() > REGIME_TOL || p.eta != 1.0 {
        return Err(Error::UndefinedRegime(
            "the two-atom dark state is exact only for dphi = 0, delta2 = -delta1, eta = 1"
                .into(),
        ));
    }
    let alpha = alpha_commensurate(p.omega, p.delta1, p.gamma, 1.0);
    let inv_sqrt2 = C64::new(1.0 / SQRT2, 0.0);
    let mut v = CVec::zeros(4);
    v[0] = C64::new(1.0, 0.0);
    v[1] = alpha * inv_sqrt2;
    v[2] = -alpha * inv_sqrt2;
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(v.mapv(|z| z / C64::new(norm, 0.0)))
}

/// Everything the analytics can say about dark states at one parameter
/// point.
#[derive(Debug, Clone)]
pub struct DarkStatePrediction {
    /// Whether a pure stationary dark state exists at these parameters.
    pub exists: bool,
    /// Bright-state cancellation amplitude (the dark amplitude when
    /// `exists` is true).
    pub alpha: C64,
    /// The normalized dark state, when it exists.
    pub state: Option<CVec>,
    /// Single-excitation energies at the mean detuning.
    pub e_plus: f64,
    pub e_minus: f64,
    /// Tight-binding hopping between adjacent loop resonances.
    pub j_tb: C64,
    /// Drive strength required for darkness at this phase (`None` in the
    /// commensurate regime, where every drive works, and when no real
    /// drive satisfies the condition).
    pub omega_required: Option<f64>,
}

/// Classify the parameter point and assemble the full prediction.
pub fn predict(p: &SystemParams) -> Result<DarkStatePrediction> {
    p.validate()?;
    let mean_delta = 0.5 * (p.delta1 + p.delta2);
    let (e_plus, e_minus) = dark_energies(p.gamma, mean_delta, p.dphi);
    let j_tb = tight_binding_hopping(p.gamma, mean_delta, p.dphi);

    if p.dphi.abs() < REGIME_TOL {
        // Commensurate loop: dark iff the detunings are opposite.
        let exists = (p.delta1 + p.delta2).abs() < REGIME_TOL;
        let alpha = alpha_commensurate(p.omega, p.delta1, p.gamma, p.eta);
        let state = exists.then(|| dark_state_vector(alpha, p.dphi));
        return Ok(DarkStatePrediction {
            exists,
            alpha,
            state,
            e_plus,
            e_minus,
            j_tb,
            omega_required: None,
        });
    }

    // Incommensurate loop: needs full chirality, a common detuning and the
    // magic drive strength.
    let alpha = alpha_general(p.omega, p.delta1, p.delta2, p.gamma, p.dphi);
    let omega_required = match dark_rabi(p.gamma, p.delta1, p.dphi) {
        Ok(v) => v,
        Err(Error::UndefinedRegime(_)) => None,
        Err(e) => return Err(e),
    };
    let regime_ok = (p.eta - 1.0).abs() < REGIME_TOL && (p.delta1 - p.delta2).abs() < REGIME_TOL;
    let exists = regime_ok
        && omega_required
            .map(|w| (p.omega - w).abs() <= 1e-9 * (1.0 + w.abs()))
            .unwrap_or(false);
    let state = exists.then(|| dark_state_vector(alpha, p.dphi));
    Ok(DarkStatePrediction {
        exists,
        alpha,
        state,
        e_plus,
        e_minus,
        j_tb,
        omega_required,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_dimer_model, build_v_atom_model};
    use crate::linalg::CMat;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn apply(h: &CMat, v: &CVec) -> CVec {
        h.dot(v)
    }

    /// `(1 - |D><D|) H |D|` must vanish for an eigenstate.
    fn eigen_defect(h: &CMat, d: &CVec) -> f64 {
        let hd = apply(h, d);
        let overlap: C64 = d.iter().zip(hd.iter()).map(|(a, b)| a.conj() * b).sum();
        let residual = &hd - &d.mapv(|z| z * overlap);
        residual.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn jump_defect(op: &CMat, d: &CVec) -> f64 {
        op.dot(d).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn frozen_amplitudes() {
        // Resonance, full chirality: alpha = -sqrt(2)/(i) = i sqrt(2).
        let a = alpha_commensurate(1.0, 0.0, 1.0, 1.0);
        assert!((a - C64::new(0.0, SQRT2)).norm() < 1e-15);
        // alpha_general reduces to the commensurate value at dphi = 0,
        // opposite detunings.
        let b = alpha_general(0.7, 0.4, -0.4, 1.0, 0.0);
        let c = alpha_commensurate(0.7, 0.4, 1.0, 1.0);
        assert!((b - c).norm() < 1e-15);
        // Reduced chirality rotates the amplitude into the real axis.
        let d = alpha_commensurate(0.3, 0.1, 1.0, 0.5);
        assert!((d - C64::new(-SQRT2 * 0.3 / 0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn frozen_energies_and_hopping() {
        let (ep, em) = dark_energies(1.0, 0.0, FRAC_PI_2);
        assert!((ep - 0.5).abs() < 1e-15);
        assert!((em + 0.5).abs() < 1e-15);
        let (ep, em) = dark_energies(1.0, 0.3, 0.0);
        assert!((ep + 0.3).abs() < 1e-15);
        assert!(em.abs() < 1e-15);
        // Resonant hopping has the delta-independent value i gamma/sqrt(2).
        let j = tight_binding_hopping(1.0, 0.0, 1.3);
        assert!((j - C64::new(0.0, 0.5 * SQRT2)).norm() < 1e-15);
    }

    #[test]
    fn dark_rabi_frozen_values() {
        // Resonance at dphi = pi/2: omega = gamma.
        let w = dark_rabi(1.0, 0.0, FRAC_PI_2).unwrap().unwrap();
        assert!((w - 1.0).abs() < 1e-15);
        // Finite detuning shifts it: radicand 1 - 0.4 = 0.6.
        let w = dark_rabi(1.0, 0.2, FRAC_PI_2).unwrap().unwrap();
        assert!((w - 0.6f64.sqrt()).abs() < 1e-15);
        // Large detuning kills the dark state.
        assert!(dark_rabi(1.0, 0.6, FRAC_PI_2).unwrap().is_none());
        // dphi -> pi has no finite magic drive.
        assert!(dark_rabi(1.0, 0.0, PI).unwrap().is_none());
        // dphi = 0 is the wrong regime.
        assert!(matches!(
            dark_rabi(1.0, 0.0, 0.0),
            Err(Error::UndefinedRegime(_))
        ));
        // Negative phase flips the sign of the detuning correction.
        let w = dark_rabi(1.0, -0.2, -FRAC_PI_2).unwrap().unwrap();
        assert!((w - 0.6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn commensurate_dark_state_is_an_eigenstate_annihilated_by_the_jump() {
        for eta in [1.0, 0.8] {
            let p = SystemParams {
                omega: 0.6,
                delta1: 0.25,
                delta2: -0.25,
                eta,
                ..SystemParams::default()
            };
            let m = build_v_atom_model(&p).unwrap();
            let pred = predict(&p).unwrap();
            assert!(pred.exists, "expected dark state at eta = {eta}");
            let d = pred.state.unwrap();
            assert!(eigen_defect(&m.h, &d) < 1e-10, "eta = {eta}");
            assert!(jump_defect(&m.jumps[0].op, &d) < 1e-12, "eta = {eta}");
        }
    }

    #[test]
    fn magic_drive_dark_state_is_an_eigenstate_annihilated_by_the_jump() {
        for (delta, dphi) in [(0.0, FRAC_PI_2), (0.1, 1.0), (-0.15, -2.2)] {
            let omega = dark_rabi(1.0, delta, dphi).unwrap().unwrap();
            let p = SystemParams {
                omega,
                delta1: delta,
                delta2: delta,
                dphi,
                ..SystemParams::default()
            };
            let m = build_v_atom_model(&p).unwrap();
            let pred = predict(&p).unwrap();
            assert!(pred.exists, "delta = {delta}, dphi = {dphi}");
            let d = pred.state.unwrap();
            assert!(
                eigen_defect(&m.h, &d) < 1e-10,
                "delta = {delta}, dphi = {dphi}: defect {}",
                eigen_defect(&m.h, &d)
            );
            assert!(jump_defect(&m.jumps[0].op, &d) < 1e-12);
            // Its energy is E_plus at the common detuning.
            let hd = m.h.dot(&d);
            let e: C64 = d.iter().zip(hd.iter()).map(|(a, b)| a.conj() * b).sum();
            assert!((e.im).abs() < 1e-12);
            assert!((e.re - pred.e_plus).abs() < 1e-10);
        }
    }

    #[test]
    fn off_magic_drive_is_not_dark() {
        let p = SystemParams {
            omega: 1.7,
            dphi: FRAC_PI_2,
            ..SystemParams::default()
        };
        let pred = predict(&p).unwrap();
        assert!(!pred.exists);
        assert!((pred.omega_required.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimer_dark_state_is_stationary() {
        let p = SystemParams {
            omega: 0.9,
            delta1: 0.3,
            delta2: -0.3,
            ..SystemParams::default()
        };
        let m = build_dimer_model(&p).unwrap();
        let d = dimer_dark_state(&p).unwrap();
        assert!(eigen_defect(&m.h, &d) < 1e-12);
        assert!(jump_defect(&m.jumps[0].op, &d) < 1e-12);
        // Mismatched parameters are rejected.
        assert!(dimer_dark_state(&SystemParams {
            omega: 0.9,
            delta1: 0.3,
            delta2: 0.3,
            ..SystemParams::default()
        })
        .is_err());
    }

    #[test]
    fn dressed_plus_branch_equals_the_dark_amplitude_at_the_magic_drive() {
        // Cross-check of the two independent amplitude formulas: at the
        // magic drive the "+" dressed state is the dark state.
        for (delta, dphi) in [(0.0, FRAC_PI_2), (0.1, 1.0), (-0.15, -2.2), (0.05, 2.7)] {
            let omega = dark_rabi(1.0, delta, dphi).unwrap().unwrap();
            let a = alpha_general(omega, delta, delta, 1.0, dphi);
            let d = dressed_alphas(omega, delta, dphi);
            assert!(!d.degenerate);
            assert!(
                (d.plus - a).norm() < 1e-12,
                "delta = {delta}, dphi = {dphi}: {} vs {}",
                d.plus,
                a
            );
        }
        // On resonance both branches sit on the unit circle.
        let omega = dark_rabi(1.0, 0.0, 1.2).unwrap().unwrap();
        let d = dressed_alphas(omega, 0.0, 1.2);
        assert!((d.plus.norm() - 1.0).abs() < 1e-12);
        assert!((d.minus.norm() - 1.0).abs() < 1e-12);
        // Vanishing coupling flags the degenerate regime.
        assert!(dressed_alphas(0.7, 0.2, 0.0).degenerate);
        assert!(dressed_alphas(0.0, 0.2, 1.0).degenerate);
    }

    #[test]
    fn wrap_angle_branches() {
        assert!((wrap_angle(PI) + PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) + PI).abs() < 1e-12);
        assert!((wrap_angle(-3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.3) - 0.3).abs() < 1e-15);
        assert!((wrap_angle(2.0 * PI + 0.3) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn phase_line_drifts_with_delay() {
        // tau = 0: no drift.
        assert!((predicted_phase_line(0.7, 0.0, 1.0, 0.0) - 0.7).abs() < 1e-15);
        // Resonant line through the origin never moves.
        assert!(predicted_phase_line(0.0, 0.0, 1.0, 0.8).abs() < 1e-15);
        // phi_D = pi/2 on resonance: splitting is gamma, so the shift is
        // exactly gamma tau = 0.5 rad.
        let phi = predicted_phase_line(FRAC_PI_2, 0.0, 1.0, 0.5);
        assert!((phi - (FRAC_PI_2 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn dark_phase_inverts_the_drive_condition() {
        // omega = 2 gamma: cos(phi_D) = -3/4.
        let phi = dark_phase_for_drive(1.0, 2.0).unwrap();
        assert!((phi.cos() + 0.75).abs() < 1e-12);
        // Round trip through dark_rabi.
        let w = dark_rabi(1.0, 0.0, phi).unwrap().unwrap();
        assert!((w - 2.0).abs() < 1e-10);
        // At the critical drive the root sits at the origin; below it there
        // is none.
        let phi_c = dark_phase_for_drive(1.0, critical_drive(1.0)).unwrap();
        assert!(phi_c.abs() < 1e-6);
        assert!(dark_phase_for_drive(1.0, 0.5).is_none());
    }

    #[test]
    fn relaxation_rate_limits() {
        assert!((relaxation_rate(1.0, C64::new(0.0, 0.0)) - 2.0).abs() < 1e-15);
        let a = alpha_commensurate(10.0, 0.0, 1.0, 1.0);
        // Strong drive: rate collapses as 2 gamma / |alpha|^2.
        assert!(relaxation_rate(1.0, a) < 0.01);
        assert!((critical_drive(2.0) - SQRT2).abs() < 1e-15);
    }

    #[test]
    fn predict_rejects_invalid_params() {
        let p = SystemParams {
            gamma: -1.0,
            ..SystemParams::default()
        };
        assert!(predict(&p).is_err());
    }
}
