//! Atom–cavity model and its adiabatic reduction.
//!
//! Instead of coupling directly to the waveguide, each transition of the
//! atom can couple with strength `g` to its own cavity mode; the two modes
//! hybridize through the feedback loop into a fast collectively-decaying
//! combination `a_T` (rate `2 kappa`) and a long-lived one `a_S`,
//!
//! ```text
//! a_T = (a_1 + e^{i chi} a_2)/sqrt(2),   a_S = (a_1 - e^{i chi} a_2)/sqrt(2),
//! ```
//!
//! plus a coherent exchange `i (kappa/2)(a_S† a_T - a_T† a_S)`. When
//! `g << kappa` the modes follow the atom adiabatically and the dynamics
//! reduces to the waveguide model with an effective guided rate
//!
//! ```text
//! gamma_eff = (2 g)^2 kappa / (kappa + kappa')^2 .
//! ```
//!
//! Eliminating the fast mode flips which atomic superposition is
//! protected, which is equivalent to a `pi` offset of the loop phase. We
//! keep `SystemParams::dphi` as the *effective* phase seen by the reduced
//! dynamics and the dark-state analytics, and build the cavity internals
//! at the shifted phase `chi = dphi - pi`; every module therefore agrees
//! on what `dphi` means.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lindblad::{
    bare_atom_hamiltonian, steady_state_of, vectorize, Jump, LindbladModel, Liouvillian,
};
use crate::linalg::{dagger, eye, kron, partial_trace, trace, trace_distance, CMat};
use crate::operators::{atomic_operators, boson_annihilator, sigma1_minus, sigma2_minus, DIM_ATOM};
use crate::params::SystemParams;

/// Cavity parameters; rates share the unit system of [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityConfig {
    /// Atom–cavity coupling.
    pub g: f64,
    /// Cavity–waveguide rate (collective mode decays at `2 kappa`).
    pub kappa: f64,
    /// Intra-cavity loss per mode.
    pub kappa_prime: f64,
    /// Fock cutoff per cavity mode (each mode keeps `n_max + 1` levels).
    pub n_max: usize,
}

impl Default for CavityConfig {
    fn default() -> Self {
        Self {
            g: 1.0,
            kappa: 20.0,
            kappa_prime: 0.0,
            n_max: 3,
        }
    }
}

impl CavityConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.g.is_finite() || self.g < 0.0 {
            return Err(Error::InvalidParam(format!(
                "cavity coupling g must be finite and >= 0, got {}",
                self.g
            )));
        }
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "kappa must be finite and > 0, got {}",
                self.kappa
            )));
        }
        if !self.kappa_prime.is_finite() || self.kappa_prime < 0.0 {
            return Err(Error::InvalidParam(format!(
                "kappa_prime must be finite and >= 0, got {}",
                self.kappa_prime
            )));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParam(
                "n_max must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Hilbert-space dimension of the joint atom + two-mode model.
    pub fn dim(&self) -> usize {
        DIM_ATOM * (self.n_max + 1) * (self.n_max + 1)
    }

    /// Subsystem dimensions in Kronecker order (atom slowest).
    pub fn dims(&self) -> [usize; 3] {
        [DIM_ATOM, self.n_max + 1, self.n_max + 1]
    }
}

/// Effective guided rate after adiabatic elimination of the cavity:
/// `(2g)^2 kappa / (kappa + kappa')^2`.
pub fn gamma_effective(c: &CavityConfig) -> f64 {
    let s = c.kappa + c.kappa_prime;
    (2.0 * c.g) * (2.0 * c.g) * c.kappa / (s * s)
}

/// The two collective cavity modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectiveMode {
    /// Fast mode, decays at `2 kappa`.
    T,
    /// Slow mode, fed by `T` through the coherent exchange.
    S,
}

struct CavityOps {
    s1: CMat,
    s2: CMat,
    a1: CMat,
    a2: CMat,
}

fn cavity_ops(n_max: usize) -> CavityOps {
    let n = n_max + 1;
    let a = boson_annihilator(n);
    let id_n = eye(n);
    let id_nn = eye(n * n);
    let id_atom = eye(DIM_ATOM);
    CavityOps {
        s1: kron(&sigma1_minus(), &id_nn),
        s2: kron(&sigma2_minus(), &id_nn),
        a1: kron(&id_atom, &kron(&a, &id_n)),
        a2: kron(&id_atom, &kron(&id_n, &a)),
    }
}

/// Collective annihilation operator `(a_1 ± e^{i chi} a_2)/sqrt(2)` on the
/// two-mode space (no atom factor).
fn collective_mode(mode: CollectiveMode, chi: f64, n_max: usize) -> CMat {
    let n = n_max + 1;
    let a = boson_annihilator(n);
    let a1 = kron(&a, &eye(n));
    let a2 = kron(&eye(n), &a);
    let sign = match mode {
        CollectiveMode::T => 1.0,
        CollectiveMode::S => -1.0,
    };
    let phase = C64::from_polar(sign / std::f64::consts::SQRT_2, chi);
    a1.mapv(|z| z * C64::new(1.0 / std::f64::consts::SQRT_2, 0.0)) + a2.mapv(|z| z * phase)
}

/// Full atom + two-mode model on the `3 (n_max+1)^2`-dimensional space
/// (atom ⊗ mode 1 ⊗ mode 2, atom slowest).
///
/// ```text
/// H = H_a + g (sigma_1† a_1 + sigma_2† a_2 + h.c.)
///         + i (kappa/2)(e^{i chi} a_1† a_2 - e^{-i chi} a_2† a_1)
/// ```
///
/// with jumps `(a_T(chi), 2 kappa)` guided, `(a_1, kappa')`,
/// `(a_2, kappa')` and `(sigma_1, gamma')`, `(sigma_2, gamma')`
/// non-guided. The pairing `g(sigma_1† a_1 + sigma_2† a_2)` equals
/// `g(sigma_T† a_T + sigma_S† a_S)` for any common phase in the collective
/// definitions. `chi = dphi - pi` (see module docs); requires `eta = 1`.
pub fn build_cavity_model(p: &SystemParams, c: &CavityConfig) -> Result<LindbladModel> {
    p.validate()?;
    c.validate()?;
    if p.eta != 1.0 {
        return Err(Error::InvalidParam(
            "the cavity model couples each transition to one mode; it requires eta = 1".into(),
        ));
    }
    let chi = p.dphi - std::f64::consts::PI;
    let ops = cavity_ops(c.n_max);
    let id_nn = eye((c.n_max + 1) * (c.n_max + 1));

    let mut h = kron(&bare_atom_hamiltonian(p), &id_nn);
    let int = (dagger(&ops.s1).dot(&ops.a1) + dagger(&ops.s2).dot(&ops.a2))
        .mapv(|z| z * C64::new(c.g, 0.0));
    h = h + &int + dagger(&int);
    let cross = dagger(&ops.a1)
        .dot(&ops.a2)
        .mapv(|z| z * C64::from_polar(1.0, chi));
    h = h + (&cross - &dagger(&cross)).mapv(|z| C64::new(0.0, 0.5 * c.kappa) * z);

    let id_atom = eye(DIM_ATOM);
    let a_t = kron(&id_atom, &collective_mode(CollectiveMode::T, chi, c.n_max));
    let mut jumps = vec![Jump {
        op: a_t,
        rate: 2.0 * c.kappa,
        guided: true,
    }];
    if c.kappa_prime > 0.0 {
        jumps.push(Jump {
            op: ops.a1.clone(),
            rate: c.kappa_prime,
            guided: false,
        });
        jumps.push(Jump {
            op: ops.a2.clone(),
            rate: c.kappa_prime,
            guided: false,
        });
    }
    if p.gamma_prime > 0.0 {
        jumps.push(Jump {
            op: ops.s1.clone(),
            rate: p.gamma_prime,
            guided: false,
        });
        jumps.push(Jump {
            op: ops.s2.clone(),
            rate: p.gamma_prime,
            guided: false,
        });
    }
    LindbladModel::new(h, jumps, None)
}

/// Two-mode field-only model (no atom): the coherent `T`–`S` exchange, the
/// collective decay and the local losses. Used to check the analytic
/// correlation functions by quantum regression.
pub fn build_field_model(
    chi: f64,
    kappa: f64,
    kappa_prime: f64,
    n_max: usize,
) -> Result<LindbladModel> {
    if !(kappa > 0.0) || kappa_prime < 0.0 || n_max < 1 {
        return Err(Error::InvalidParam(
            "field model needs kappa > 0, kappa_prime >= 0, n_max >= 1".into(),
        ));
    }
    let n = n_max + 1;
    let a = boson_annihilator(n);
    let a1 = kron(&a, &eye(n));
    let a2 = kron(&eye(n), &a);
    let cross = dagger(&a1)
        .dot(&a2)
        .mapv(|z| z * C64::from_polar(1.0, chi));
    let h = (&cross - &dagger(&cross)).mapv(|z| C64::new(0.0, 0.5 * kappa) * z);
    let mut jumps = vec![Jump {
        op: collective_mode(CollectiveMode::T, chi, n_max),
        rate: 2.0 * kappa,
        guided: true,
    }];
    if kappa_prime > 0.0 {
        jumps.push(Jump {
            op: a1,
            rate: kappa_prime,
            guided: false,
        });
        jumps.push(Jump {
            op: a2,
            rate: kappa_prime,
            guided: false,
        });
    }
    LindbladModel::new(h, jumps, None)
}

/// Reduced three-level model after adiabatic elimination of the cavity:
/// the bare atom, a guided collective jump `(sigma_T/sqrt(2), 2 gamma_eff)`,
/// the coherent exchange
/// `i (gamma_eff/2)(sigma_S† sigma_T - sigma_T† sigma_S)/2` written with
/// normalized collective operators, and non-guided decay at
/// `gamma' + gamma_eff kappa'/kappa` on each transition.
///
/// With `gamma' = kappa' = 0` this equals [`build_v_atom_model`] at the
/// same `dphi` and `gamma = gamma_eff` — the equality of the two
/// constructions (they use differently scaled operator bases) is asserted
/// as a test, not assumed.
///
/// [`build_v_atom_model`]: crate::lindblad::build_v_atom_model
pub fn adiabatic_model(p: &SystemParams, c: &CavityConfig) -> Result<LindbladModel> {
    p.validate()?;
    c.validate()?;
    if p.eta != 1.0 {
        return Err(Error::InvalidParam(
            "the adiabatic reduction is derived for eta = 1".into(),
        ));
    }
    if c.g / c.kappa > 0.2 {
        log::warn!(
            "adiabatic model requested at g/kappa = {:.3}; the elimination assumes g << kappa",
            c.g / c.kappa
        );
    }
    let gamma_eff = gamma_effective(c);
    let ops = atomic_operators(1.0, p.dphi, p.phi_prime)?;
    let inv_sqrt2 = C64::new(1.0 / std::f64::consts::SQRT_2, 0.0);
    let st_norm = ops.sigma_t.mapv(|z| z * inv_sqrt2);
    let ss_norm = ops.sigma_s.mapv(|z| z * inv_sqrt2);

    let exch = dagger(&ss_norm).dot(&st_norm) - dagger(&st_norm).dot(&ss_norm);
    let h = bare_atom_hamiltonian(p) + exch.mapv(|z| C64::new(0.0, 0.5 * gamma_eff) * z);

    let mut jumps = vec![Jump {
        op: st_norm,
        rate: 2.0 * gamma_eff,
        guided: true,
    }];
    let extra = p.gamma_prime + gamma_eff * c.kappa_prime / c.kappa;
    if extra > 0.0 {
        jumps.push(Jump {
            op: ops.sigma1.clone(),
            rate: extra,
            guided: false,
        });
        jumps.push(Jump {
            op: ops.sigma2.clone(),
            rate: extra,
            guided: false,
        });
    }
    LindbladModel::new(h, jumps, Some(p.dphi))
}

/// Analytic two-time vacuum correlation `<a_i(t) a_k†(0)>` of the
/// collective modes:
///
/// ```text
/// E        = exp(-(kappa + kappa') t / 2)
/// <T T†>   = E (1 - kappa t / 2)        <T S†> = -(kappa t/2) E
/// <S S†>   = E (1 + kappa t / 2)        <S T†> = +(kappa t/2) E
/// ```
pub fn cavity_correlation(
    i: CollectiveMode,
    k: CollectiveMode,
    t: f64,
    kappa: f64,
    kappa_prime: f64,
) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "correlation time must be >= 0, got {t}"
        )));
    }
    let e = (-(kappa + kappa_prime) * t / 2.0).exp();
    let half_kt = 0.5 * kappa * t;
    let val = match (i, k) {
        (CollectiveMode::T, CollectiveMode::T) => e * (1.0 - half_kt),
        (CollectiveMode::S, CollectiveMode::S) => e * (1.0 + half_kt),
        (CollectiveMode::T, CollectiveMode::S) => -half_kt * e,
        (CollectiveMode::S, CollectiveMode::T) => half_kt * e,
    };
    Ok(C64::new(val, 0.0))
}

/// Same correlation evaluated numerically by quantum regression on the
/// vectorized field model: `tr[a_i e^{L t}(a_k† |0><0|)]`.
pub fn cavity_correlation_numeric(
    i: CollectiveMode,
    k: CollectiveMode,
    t: f64,
    chi: f64,
    kappa: f64,
    kappa_prime: f64,
    n_max: usize,
) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "correlation time must be >= 0, got {t}"
        )));
    }
    let model = build_field_model(chi, kappa, kappa_prime, n_max)?;
    let liouv = vectorize(&model);
    let d = model.dim();
    let mut vac = CMat::zeros((d, d));
    vac[(0, 0)] = C64::new(1.0, 0.0);
    let a_i = collective_mode(i, chi, n_max);
    let a_k = collective_mode(k, chi, n_max);
    let seeded = dagger(&a_k).dot(&vac);
    let propagated = liouv.propagate(&seeded, t)?;
    Ok(trace(&a_i.dot(&propagated)))
}

/// Report of [`verify_adiabatic_limit`].
#[derive(Debug, Clone, Copy)]
pub struct AdiabaticReport {
    /// Trace distance between the atomic reduced steady state of the full
    /// model and the steady state of the reduced model.
    pub trace_distance: f64,
    /// `gamma_eff` from the closed formula.
    pub gamma_eff_formula: f64,
    /// Decay rate fitted from the full-model dynamics of an initially
    /// excited upstream transition (no drive).
    pub gamma_eff_fit: f64,
    /// Steady-state population of the top Fock layer of either mode; a
    /// value above `1e-6` means `n_max` is too small and is logged as a
    /// warning.
    pub cutoff_occupation: f64,
}

/// Least-squares exponential decay rate: fits `ln y = a - r t` and returns
/// `r`. All samples must be positive.
pub fn fit_decay_rate(ts: &[f64], ys: &[f64]) -> Result<f64> {
    if ts.len() != ys.len() || ts.len() < 2 {
        return Err(Error::InvalidParam(
            "decay fit needs at least two (t, y) samples".into(),
        ));
    }
    if ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::Numerical(
            "decay fit requires strictly positive samples".into(),
        ));
    }
    let n = ts.len() as f64;
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let st: f64 = ts.iter().sum();
    let sl: f64 = logs.iter().sum();
    let stt: f64 = ts.iter().map(|t| t * t).sum();
    let stl: f64 = ts.iter().zip(&logs).map(|(t, l)| t * l).sum();
    let denom = n * stt - st * st;
    if denom.abs() < 1e-300 {
        return Err(Error::Numerical("degenerate time grid in decay fit".into()));
    }
    Ok(-(n * stl - st * sl) / denom)
}

/// Quantitative check of the adiabatic elimination: compares steady
/// states, fits the effective decay rate from full-model dynamics, and
/// reports the Fock-cutoff occupation.
pub fn verify_adiabatic_limit(p: &SystemParams, c: &CavityConfig) -> Result<AdiabaticReport> {
    let full = build_cavity_model(p, c)?;
    let rho_full = steady_state_of(&full)?;
    let dims = c.dims();
    let rho_atom = partial_trace(&rho_full, &dims, &[0])?;

    let reduced = adiabatic_model(p, c)?;
    let rho_red = steady_state_of(&reduced)?;
    let td = trace_distance(&rho_atom, &rho_red)?;

    let gamma_eff_formula = gamma_effective(c);
    let gamma_eff_fit = fit_effective_decay(p, c)?;

    let cutoff_occupation = top_layer_occupation(&rho_full, c);
    if cutoff_occupation > 1e-6 {
        log::warn!(
            "cavity Fock cutoff n_max = {} may be too small: top-layer occupation {:.3e}",
            c.n_max,
            cutoff_occupation
        );
    }

    Ok(AdiabaticReport {
        trace_distance: td,
        gamma_eff_formula,
        gamma_eff_fit,
        cutoff_occupation,
    })
}

/// Steady-state weight in states where either mode sits at the cutoff.
pub fn top_layer_occupation(rho_full: &CMat, c: &CavityConfig) -> f64 {
    let n = c.n_max + 1;
    let mut occ = 0.0;
    for idx in 0..rho_full.nrows() {
        let n2 = idx % n;
        let n1 = (idx / n) % n;
        if n1 == c.n_max || n2 == c.n_max {
            occ += rho_full[(idx, idx)].re;
        }
    }
    occ
}

/// Fit the decay rate of an initially excited upstream transition in the
/// undriven full model. Uses a single-photon cutoff (exact for this
/// initial condition without a drive) and samples the excited population
/// over `t in [0.5, 1.5]/gamma_eff`, past the cavity transient.
fn fit_effective_decay(p: &SystemParams, c: &CavityConfig) -> Result<f64> {
    let p0 = SystemParams { omega: 0.0, ..*p };
    let c1 = CavityConfig { n_max: 1, ..*c };
    let model = build_cavity_model(&p0, &c1)?;
    let liouv = vectorize(&model);
    let d = model.dim();
    // |e1> ⊗ |00>: atom index 1, both modes in vacuum.
    let start = (c1.n_max + 1) * (c1.n_max + 1);
    let mut rho = CMat::zeros((d, d));
    rho[(start, start)] = C64::new(1.0, 0.0);

    let g_eff = gamma_effective(&c1);
    let t0 = 0.5 / g_eff;
    let n_samples = 16;
    let dt = (1.0 / g_eff) / (n_samples as f64 - 1.0);
    let prop = propagator(&liouv, dt)?;
    // Jump to the window start, then sample uniformly.
    let mut state = liouv.propagate(&rho, t0)?;
    let dims = c1.dims();
    let mut ts = Vec::with_capacity(n_samples);
    let mut ys = Vec::with_capacity(n_samples);
    for j in 0..n_samples {
        let atom = partial_trace(&state, &dims, &[0])?;
        ts.push(t0 + j as f64 * dt);
        ys.push(atom[(1, 1)].re.max(1e-300));
        if j + 1 < n_samples {
            state = apply_propagator(&prop, &state, d)?;
        }
    }
    fit_decay_rate(&ts, &ys)
}

fn propagator(liouv: &Liouvillian, dt: f64) -> Result<CMat> {
    crate::linalg::expm(&liouv.mat.mapv(|z| z * C64::new(dt, 0.0)))
}

fn apply_propagator(prop: &CMat, rho: &CMat, dim: usize) -> Result<CMat> {
    let v = crate::lindblad::vec_density(rho);
    crate::lindblad::unvec_density(&prop.dot(&v), dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::build_v_atom_model;
    use crate::linalg::{fidelity_with_pure, max_abs_diff, CVec};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn gamma_effective_frozen_values() {
        let c = CavityConfig {
            g: 1.0,
            kappa: 20.0,
            kappa_prime: 0.0,
            n_max: 1,
        };
        assert!((gamma_effective(&c) - 0.2).abs() < 1e-15);
        let lossy = CavityConfig {
            kappa_prime: 20.0,
            ..c
        };
        // (2g)^2 kappa / (2 kappa)^2 = g^2/kappa.
        assert!((gamma_effective(&lossy) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn undriven_steady_state_is_ground_vacuum() {
        let p = SystemParams {
            dphi: 0.9,
            ..SystemParams::default()
        };
        let c = CavityConfig {
            g: 1.0,
            kappa: 10.0,
            kappa_prime: 0.0,
            n_max: 1,
        };
        let m = build_cavity_model(&p, &c).unwrap();
        let rho = steady_state_of(&m).unwrap();
        let mut gv = CVec::zeros(m.dim());
        gv[0] = C64::new(1.0, 0.0);
        assert!(fidelity_with_pure(&rho, &gv) > 1.0 - 1e-10);
    }

    #[test]
    fn decoupled_cavity_empties_while_the_lossy_atom_saturates() {
        let p = SystemParams {
            omega: 0.4,
            gamma_prime: 0.15,
            dphi: 0.3,
            ..SystemParams::default()
        };
        let c = CavityConfig {
            g: 0.0,
            kappa: 5.0,
            kappa_prime: 0.0,
            n_max: 1,
        };
        let m = build_cavity_model(&p, &c).unwrap();
        let rho = steady_state_of(&m).unwrap();
        let dims = c.dims();
        let rho_cav = partial_trace(&rho, &dims, &[1, 2]).unwrap();
        let mut vac = CMat::zeros((4, 4));
        vac[(0, 0)] = C64::new(1.0, 0.0);
        assert!(max_abs_diff(&rho_cav, &vac) < 1e-9);

        // Atom alone: bare Hamiltonian with only the free-space channels.
        let reference = LindbladModel::new(
            bare_atom_hamiltonian(&p),
            vec![
                Jump {
                    op: sigma1_minus(),
                    rate: p.gamma_prime,
                    guided: false,
                },
                Jump {
                    op: sigma2_minus(),
                    rate: p.gamma_prime,
                    guided: false,
                },
            ],
            Some(p.dphi),
        )
        .unwrap();
        let rho_ref = steady_state_of(&reference).unwrap();
        let rho_atom = partial_trace(&rho, &dims, &[0]).unwrap();
        assert!(trace_distance(&rho_atom, &rho_ref).unwrap() < 1e-8);
    }

    #[test]
    fn adiabatic_model_equals_waveguide_model_at_effective_rates() {
        for kappa_prime in [0.0, 6.0] {
            let p = SystemParams {
                omega: 0.7,
                delta1: 0.2,
                delta2: -0.1,
                dphi: 1.3,
                gamma_prime: 0.03,
                ..SystemParams::default()
            };
            let c = CavityConfig {
                g: 1.0,
                kappa: 20.0,
                kappa_prime,
                n_max: 1,
            };
            let g_eff = gamma_effective(&c);
            let reduced = adiabatic_model(&p, &c).unwrap();
            let reference = build_v_atom_model(&SystemParams {
                gamma: g_eff,
                gamma_prime: p.gamma_prime + g_eff * c.kappa_prime / c.kappa,
                ..p
            })
            .unwrap();
            assert!(max_abs_diff(&reduced.h, &reference.h) < 1e-14);
            // The jump lists differ in scaling (normalized vs bare
            // collective operator); the generated dynamics must not.
            let l1 = vectorize(&reduced);
            let l2 = vectorize(&reference);
            assert!(max_abs_diff(&l1.mat, &l2.mat) < 1e-13);
        }
    }

    #[test]
    fn correlation_frozen_values() {
        // Vacuum commutators at t = 0.
        for (i, k, want) in [
            (CollectiveMode::T, CollectiveMode::T, 1.0),
            (CollectiveMode::S, CollectiveMode::S, 1.0),
            (CollectiveMode::T, CollectiveMode::S, 0.0),
            (CollectiveMode::S, CollectiveMode::T, 0.0),
        ] {
            let c = cavity_correlation(i, k, 0.0, 1.0, 0.0).unwrap();
            assert!((c - C64::new(want, 0.0)).norm() < 1e-15);
        }
        // kappa t = 2, no loss: cross correlation -e^{-1}.
        let c = cavity_correlation(CollectiveMode::T, CollectiveMode::S, 2.0, 1.0, 0.0).unwrap();
        assert!((c.re + (-1.0f64).exp()).abs() < 1e-15);
        assert!(cavity_correlation(CollectiveMode::T, CollectiveMode::T, -0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn correlations_match_quantum_regression() {
        let chi = 0.7 - PI;
        let kappa = 1.0;
        let kappa_prime = 0.3;
        for t in [0.0, 0.1, 0.5, 1.0, 2.0] {
            for i in [CollectiveMode::T, CollectiveMode::S] {
                for k in [CollectiveMode::T, CollectiveMode::S] {
                    let analytic = cavity_correlation(i, k, t, kappa, kappa_prime).unwrap();
                    let numeric =
                        cavity_correlation_numeric(i, k, t, chi, kappa, kappa_prime, 1).unwrap();
                    assert!(
                        (analytic - numeric).norm() < 1e-6,
                        "({i:?},{k:?}) at t = {t}: analytic {analytic}, numeric {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn correlations_satisfy_the_mode_odes() {
        // d<T>/dt = -(kappa + kappa'/2)<T> - (kappa/2)<S>
        // d<S>/dt = +(kappa/2)<T> - (kappa'/2)<S>
        let kappa = 1.0;
        let kappa_prime = 0.4;
        let h = 1e-5;
        for seed in [CollectiveMode::T, CollectiveMode::S] {
            for t in [0.2, 0.7, 1.9] {
                let c = |mode, tt| {
                    cavity_correlation(mode, seed, tt, kappa, kappa_prime)
                        .unwrap()
                        .re
                };
                let dt_t = (c(CollectiveMode::T, t + h) - c(CollectiveMode::T, t - h)) / (2.0 * h);
                let dt_s = (c(CollectiveMode::S, t + h) - c(CollectiveMode::S, t - h)) / (2.0 * h);
                let rhs_t = -(kappa + kappa_prime / 2.0) * c(CollectiveMode::T, t)
                    - kappa / 2.0 * c(CollectiveMode::S, t);
                let rhs_s =
                    kappa / 2.0 * c(CollectiveMode::T, t) - kappa_prime / 2.0 * c(CollectiveMode::S, t);
                assert!((dt_t - rhs_t).abs() < 1e-8, "T' residual at t = {t}");
                assert!((dt_s - rhs_s).abs() < 1e-8, "S' residual at t = {t}");
            }
        }
    }

    #[test]
    fn fitted_decay_rate_matches_the_effective_coupling() {
        let c = CavityConfig {
            g: 1.0,
            kappa: 20.0,
            kappa_prime: 0.0,
            n_max: 1,
        };
        let p = SystemParams {
            dphi: FRAC_PI_2,
            ..SystemParams::default()
        };
        let rate = fit_effective_decay(&p, &c).unwrap();
        let want = gamma_effective(&c);
        assert!(
            (rate - want).abs() / want < 0.05,
            "fitted {rate}, formula {want}"
        );
    }

    #[test]
    fn reduction_error_shrinks_with_the_coupling() {
        // Trace distance between full and reduced atomic steady states is
        // non-increasing as g/kappa decreases, and small at g/kappa = 0.05.
        let kappa = 20.0;
        let mut last = f64::INFINITY;
        for ratio in [0.2, 0.1, 0.05] {
            let c = CavityConfig {
                g: ratio * kappa,
                kappa,
                kappa_prime: 0.0,
                n_max: 2,
            };
            let g_eff = gamma_effective(&c);
            let p = SystemParams {
                omega: g_eff, // dark point at dphi = pi/2
                dphi: FRAC_PI_2,
                ..SystemParams::default()
            };
            let report = verify_adiabatic_limit(&p, &c).unwrap();
            assert!(
                report.trace_distance <= last + 1e-3,
                "g/kappa = {ratio}: distance {} after {}",
                report.trace_distance,
                last
            );
            last = report.trace_distance;
            if ratio == 0.05 {
                assert!(last <= 1e-2, "g/kappa = 0.05 distance {last}");
                assert!(
                    (report.gamma_eff_fit - g_eff).abs() / g_eff < 0.05,
                    "fit {} vs formula {g_eff}",
                    report.gamma_eff_fit
                );
            }
        }
    }

    #[test]
    fn weak_drive_observables_converge_in_the_cutoff() {
        let kappa = 20.0;
        let c1 = CavityConfig {
            g: 1.0,
            kappa,
            kappa_prime: 0.0,
            n_max: 1,
        };
        let c2 = CavityConfig { n_max: 2, ..c1 };
        let g_eff = gamma_effective(&c1);
        let p = SystemParams {
            omega: 0.1 * g_eff,
            dphi: FRAC_PI_2,
            ..SystemParams::default()
        };
        let atom = |c: &CavityConfig| {
            let m = build_cavity_model(&p, c).unwrap();
            let rho = steady_state_of(&m).unwrap();
            partial_trace(&rho, &c.dims(), &[0]).unwrap()
        };
        let d = trace_distance(&atom(&c1), &atom(&c2)).unwrap();
        assert!(d < 1e-5, "cutoff sensitivity {d}");
    }

    #[test]
    fn decay_fit_recovers_a_known_rate() {
        let ts: Vec<f64> = (0..20).map(|j| 0.1 * j as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        let r = fit_decay_rate(&ts, &ys).unwrap();
        assert!((r - 0.7).abs() < 1e-12);
        assert!(fit_decay_rate(&[0.0], &[1.0]).is_err());
        assert!(fit_decay_rate(&[0.0, 1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(CavityConfig::default().validate().is_ok());
        assert!(CavityConfig {
            kappa: 0.0,
            ..CavityConfig::default()
        }
        .validate()
        .is_err());
        assert!(CavityConfig {
            n_max: 0,
            ..CavityConfig::default()
        }
        .validate()
        .is_err());
        assert!(CavityConfig {
            g: -1.0,
            ..CavityConfig::default()
        }
        .validate()
        .is_err());
        // Reduced chirality is not part of the cavity model.
        let p = SystemParams {
            eta: 0.8,
            ..SystemParams::default()
        };
        assert!(build_cavity_model(&p, &CavityConfig::default()).is_err());
    }
}
