//! Lindblad master-equation engine.
//!
//! Models are `drho/dt = -i[H, rho] + sum_k r_k D[J_k] rho` with
//! `D[J] rho = J rho J† - 1/2 {J†J, rho}`. The engine supplies dense
//! propagation (RK4 on the density matrix), a vectorized Liouvillian
//! superoperator, and an algebraic steady-state solve via the smallest
//! singular vector of the Liouvillian.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, check_density_matrix, dagger, eye, fidelity_with_pure, hermitize, is_hermitian, kron,
    purity, trace, CMat, CVec, ONE,
};
use crate::operators::{atomic_operators, ket_s, ket_t, DIM_ATOM};
use crate::params::SystemParams;

/// One dissipative channel: jump operator, rate, and whether the emission
/// goes into the guided (waveguide) field. Only guided channels count
/// toward the reported emission rate.
#[derive(Debug, Clone)]
pub struct Jump {
    pub op: CMat,
    pub rate: f64,
    pub guided: bool,
}

/// A concrete master-equation model.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    /// Hamiltonian (Hermitian, checked at construction).
    pub h: CMat,
    pub jumps: Vec<Jump>,
    /// Feedback phase defining the `|S>/|T>` superpositions that
    /// [`observables`] reports populations for. `None` for models whose
    /// Hilbert space is not the bare three-level atom.
    pub st_phase: Option<f64>,
}

impl LindbladModel {
    pub fn new(h: CMat, jumps: Vec<Jump>, st_phase: Option<f64>) -> Result<Self> {
        let d = h.nrows();
        if h.ncols() != d {
            return Err(Error::DimMismatch("Hamiltonian must be square".into()));
        }
        if !is_hermitian(&h, 1e-12) {
            return Err(Error::Numerical("Hamiltonian is not Hermitian".into()));
        }
        for (k, j) in jumps.iter().enumerate() {
            if j.op.nrows() != d || j.op.ncols() != d {
                return Err(Error::DimMismatch(format!(
                    "jump operator {k} is {}x{}, expected {d}x{d}",
                    j.op.nrows(),
                    j.op.ncols()
                )));
            }
            if !j.rate.is_finite() || j.rate < 0.0 {
                return Err(Error::InvalidParam(format!(
                    "jump rate {k} must be finite and >= 0, got {}",
                    j.rate
                )));
            }
        }
        Ok(Self { h, jumps, st_phase })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// Right-hand side of the master equation, evaluated term by term on
    /// the density matrix (no superoperator involved).
    pub fn rhs(&self, rho: &CMat) -> CMat {
        let mi = C64::new(0.0, -1.0);
        let mut out = (self.h.dot(rho) - rho.dot(&self.h)).mapv(|z| mi * z);
        for j in &self.jumps {
            if j.rate == 0.0 {
                continue;
            }
            let jd = dagger(&j.op);
            let jdj = jd.dot(&j.op);
            let sandwich = j.op.dot(rho).dot(&jd);
            let anti = jdj.dot(rho) + rho.dot(&jdj);
            out = out + (sandwich - anti.mapv(|z| 0.5 * z)).mapv(|z| z * j.rate);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Model builders
// ---------------------------------------------------------------------------

/// Atomic Hamiltonian in the drive frame:
/// `-delta1 |e1><e1| - delta2 |e2><e2| - omega/2 (sigma_1 + sigma_2 + h.c.)`.
pub fn bare_atom_hamiltonian(p: &SystemParams) -> CMat {
    let mut h = CMat::zeros((DIM_ATOM, DIM_ATOM));
    h[(1, 1)] = C64::new(-p.delta1, 0.0);
    h[(2, 2)] = C64::new(-p.delta2, 0.0);
    let half = C64::new(-0.5 * p.omega, 0.0);
    h[(0, 1)] = half;
    h[(1, 0)] = half;
    h[(0, 2)] = half;
    h[(2, 0)] = half;
    h
}

/// Feedback-induced coherent exchange between the two transitions,
/// `i gamma/4 (sigma_S† sigma_T - sigma_T† sigma_S)` with the unnormalized
/// chiral combinations; at `eta = 1` this reduces to
/// `i gamma/2 (e^{i dphi} sigma_1† sigma_2 - h.c.)`.
fn exchange_hamiltonian(p: &SystemParams) -> Result<CMat> {
    let ops = atomic_operators(p.eta, p.dphi, p.phi_prime)?;
    let st = dagger(&ops.sigma_s).dot(&ops.sigma_t);
    let ts = dagger(&ops.sigma_t).dot(&ops.sigma_s);
    let coef = C64::new(0.0, 0.25 * p.gamma);
    Ok((st - ts).mapv(|z| coef * z))
}

/// Markov (`tau -> 0`) model of the V atom behind the mirror: bare atom +
/// exchange Hamiltonian, one guided collective jump
/// `(sigma_L + e^{i dphi} sigma_R, gamma)` and, when `gamma_prime > 0`,
/// independent non-guided decay on each transition.
pub fn build_v_atom_model(p: &SystemParams) -> Result<LindbladModel> {
    p.validate()?;
    let ops = atomic_operators(p.eta, p.dphi, p.phi_prime)?;
    let h = bare_atom_hamiltonian(p) + exchange_hamiltonian(p)?;
    let mut jumps = vec![Jump {
        op: ops.sigma_t.clone(),
        rate: p.gamma,
        guided: true,
    }];
    if p.gamma_prime > 0.0 {
        jumps.push(Jump {
            op: ops.sigma1.clone(),
            rate: p.gamma_prime,
            guided: false,
        });
        jumps.push(Jump {
            op: ops.sigma2.clone(),
            rate: p.gamma_prime,
            guided: false,
        });
    }
    LindbladModel::new(h, jumps, Some(p.dphi))
}

/// The same atom with the mirror removed: two independent guided channels
/// `(sigma_L, gamma)` and `(sigma_R, gamma)` and no exchange term. This is
/// the exact reduced dynamics of the feedback system for `t < tau`, and the
/// reference the time-bin solver is checked against there.
pub fn build_two_channel_model(p: &SystemParams) -> Result<LindbladModel> {
    p.validate()?;
    let ops = atomic_operators(p.eta, p.dphi, p.phi_prime)?;
    let h = bare_atom_hamiltonian(p);
    let mut jumps = vec![
        Jump {
            op: ops.sigma_l.clone(),
            rate: p.gamma,
            guided: true,
        },
        Jump {
            op: ops.sigma_r.clone(),
            rate: p.gamma,
            guided: true,
        },
    ];
    if p.gamma_prime > 0.0 {
        jumps.push(Jump {
            op: ops.sigma1.clone(),
            rate: p.gamma_prime,
            guided: false,
        });
        jumps.push(Jump {
            op: ops.sigma2.clone(),
            rate: p.gamma_prime,
            guided: false,
        });
    }
    LindbladModel::new(h, jumps, Some(p.dphi))
}

/// Two two-level atoms coupled through the same chiral waveguide (the
/// "folded" equivalent of the single V atom). Basis ordering is
/// `(|gg>, |eg>, |ge>, |ee>)` with atom 1 as the fast index; atom 1 is the
/// upstream emitter.
///
/// Hamiltonian: detunings and symmetric drive on both atoms plus the
/// cascaded exchange `i gamma/2 (e^{i dphi} sigma_1† sigma_2 - h.c.)`;
/// single guided jump `(sigma_1 + e^{i dphi} sigma_2, gamma)`.
pub fn build_dimer_model(p: &SystemParams) -> Result<LindbladModel> {
    p.validate()?;
    if p.eta != 1.0 {
        return Err(Error::InvalidParam(
            "the dimer model is defined for eta = 1 only".into(),
        ));
    }
    let sm = {
        let mut m = CMat::zeros((2, 2));
        m[(0, 1)] = ONE;
        m
    };
    let id2 = eye(2);
    // (|gg>, |eg>, |ge>, |ee>): atom 1 is the fast (rightmost) Kronecker
    // factor, so |eg> = |g>_2 ⊗ |e>_1 sits at index 1.
    let s1 = kron(&id2, &sm);
    let s2 = kron(&sm, &id2);
    let n1 = dagger(&s1).dot(&s1);
    let n2 = dagger(&s2).dot(&s2);

    let mut h = n1.mapv(|z| z * C64::new(-p.delta1, 0.0)) + n2.mapv(|z| z * C64::new(-p.delta2, 0.0));
    let drive = (&s1 + &s2).mapv(|z| z * C64::new(-0.5 * p.omega, 0.0));
    h = h + &drive + dagger(&drive);
    let phase = C64::from_polar(1.0, p.dphi);
    let cross = dagger(&s1).dot(&s2).mapv(|z| z * phase);
    let exch = (&cross - &dagger(&cross)).mapv(|z| C64::new(0.0, 0.5 * p.gamma) * z);
    h = h + exch;

    let jop = &s1 + &s2.mapv(|z| z * phase);
    LindbladModel::new(
        h,
        vec![Jump {
            op: jop,
            rate: p.gamma,
            guided: true,
        }],
        None,
    )
}

// ---------------------------------------------------------------------------
// Vectorization
// ---------------------------------------------------------------------------

/// Vectorized Liouvillian: a `d^2 x d^2` matrix acting on column-stacked
/// density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub mat: CMat,
    pub dim: usize,
    pub jump_count: usize,
}

/// Column-major stacking: `vec(rho)[i + d j] = rho[i, j]`.
pub fn vec_density(rho: &CMat) -> CVec {
    let d = rho.nrows();
    let mut v = CVec::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v[i + d * j] = rho[(i, j)];
        }
    }
    v
}

/// Inverse of [`vec_density`].
pub fn unvec_density(v: &CVec, d: usize) -> Result<CMat> {
    if v.len() != d * d {
        return Err(Error::DimMismatch(format!(
            "unvec: vector length {} is not {d}^2",
            v.len()
        )));
    }
    let mut rho = CMat::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            rho[(i, j)] = v[i + d * j];
        }
    }
    Ok(rho)
}

/// Build the superoperator for `model` under column-major stacking:
///
/// ```text
/// L = -i (I ⊗ H - H^T ⊗ I)
///     + sum_k r_k [ conj(J_k) ⊗ J_k
///                   - 1/2 I ⊗ (J_k†J_k) - 1/2 (J_k†J_k)^T ⊗ I ]
/// ```
pub fn vectorize(model: &LindbladModel) -> Liouvillian {
    let d = model.dim();
    let id = eye(d);
    let mi = C64::new(0.0, -1.0);
    let ht = model.h.t().to_owned();
    let mut l = (kron(&id, &model.h) - kron(&ht, &id)).mapv(|z| mi * z);
    for j in &model.jumps {
        if j.rate == 0.0 {
            continue;
        }
        let jd = dagger(&j.op);
        let jdj = jd.dot(&j.op);
        let jconj = j.op.mapv(|z| z.conj());
        let term = kron(&jconj, &j.op)
            - kron(&id, &jdj).mapv(|z| 0.5 * z)
            - kron(&jdj.t().to_owned(), &id).mapv(|z| 0.5 * z);
        l = l + term.mapv(|z| z * j.rate);
    }
    Liouvillian {
        mat: l,
        dim: d,
        jump_count: model.jumps.len(),
    }
}

impl Liouvillian {
    /// Apply to a density matrix: `unvec(L vec(rho))`.
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        let v = vec_density(rho);
        let w = self.mat.dot(&v);
        unvec_density(&w, self.dim)
    }

    /// Exact propagator over `dt`: `unvec(exp(L dt) vec(rho))` applied to
    /// the given state. Cost grows as `d^6`; intended for small models and
    /// for cross-checking the RK4 path.
    pub fn propagate(&self, rho: &CMat, t: f64) -> Result<CMat> {
        let p = linalg::expm(&self.mat.mapv(|z| z * C64::new(t, 0.0)))?;
        let v = p.dot(&vec_density(rho));
        unvec_density(&v, self.dim)
    }
}

// ---------------------------------------------------------------------------
// Steady state
// ---------------------------------------------------------------------------

/// Relative singular-value threshold below which a direction counts as part
/// of the Liouvillian kernel.
pub const KERNEL_TOL: f64 = 1e-8;
/// Maximum allowed `||L vec(rho_ss)||_2` for an accepted steady state.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Steady state as the right singular vector of the smallest singular value
/// of `L`. Errors if the kernel is not one-dimensional (degenerate steady
/// state) or the residual exceeds [`RESIDUAL_TOL`]. The result is
/// Hermitized, trace-normalized and validated positive semidefinite within
/// `1e-10`.
pub fn steady_state(liouv: &Liouvillian) -> Result<CMat> {
    let linalg::Svd { s, vh, .. } = linalg::svd(&liouv.mat)?;
    let smax = s.iter().cloned().fold(0.0, f64::max).max(1.0);
    let kernel_dim = s.iter().filter(|&&x| x <= KERNEL_TOL * smax).count();
    if kernel_dim == 0 {
        return Err(Error::Numerical(format!(
            "no steady state: smallest singular value {:.3e} exceeds {:.1e} of scale {:.3e}",
            s[s.len() - 1],
            KERNEL_TOL,
            smax
        )));
    }
    if kernel_dim > 1 {
        return Err(Error::DegenerateSteadyState { dim: kernel_dim });
    }
    // Singular values come ordered descending; the kernel vector is the
    // last row of V^H, conjugated.
    let v: CVec = vh.row(vh.nrows() - 1).mapv(|z| z.conj());
    let rho_raw = unvec_density(&v, liouv.dim)?;
    let rho_h = hermitize(&rho_raw);
    let tr = trace(&rho_h);
    if tr.norm() < 1e-12 {
        return Err(Error::Numerical(
            "steady-state candidate has (numerically) zero trace".into(),
        ));
    }
    let rho = rho_h.mapv(|z| z / tr);

    check_density_matrix(&rho, 1e-10)?;
    let residual = liouv
        .mat
        .dot(&vec_density(&rho))
        .iter()
        .map(|w| w.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > RESIDUAL_TOL * smax {
        return Err(Error::Numerical(format!(
            "steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL:.1e} (scale {smax:.3e})"
        )));
    }
    Ok(rho)
}

/// Convenience: build the Liouvillian and solve in one call.
pub fn steady_state_of(model: &LindbladModel) -> Result<CMat> {
    steady_state(&vectorize(model))
}

// ---------------------------------------------------------------------------
// Time evolution
// ---------------------------------------------------------------------------

/// A sampled density-matrix trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
}

/// Propagate `rho0` to `t_final` with classic fixed-step RK4 on the master
/// equation, sampling every `stride` steps (the initial and final states
/// are always included). The step count is `ceil(t_final/dt)`; the last
/// step is shortened to land exactly on `t_final`.
pub fn evolve(
    model: &LindbladModel,
    rho0: &CMat,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !t_final.is_finite() || t_final < 0.0 {
        return Err(Error::InvalidParam(format!(
            "evolve needs dt > 0 and t_final >= 0, got dt = {dt}, t_final = {t_final}"
        )));
    }
    check_density_matrix(rho0, 1e-8)?;
    let stride = stride.max(1);
    let n_steps = (t_final / dt).ceil() as usize;
    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut out = Trajectory {
        times: vec![0.0],
        states: vec![rho.clone()],
    };
    for step in 0..n_steps {
        let h = dt.min(t_final - t);
        let k1 = model.rhs(&rho);
        let k2 = model.rhs(&(&rho + &k1.mapv(|z| z * C64::new(0.5 * h, 0.0))));
        let k3 = model.rhs(&(&rho + &k2.mapv(|z| z * C64::new(0.5 * h, 0.0))));
        let k4 = model.rhs(&(&rho + &k3.mapv(|z| z * C64::new(h, 0.0))));
        let incr = k1 + k2.mapv(|z| 2.0 * z) + k3.mapv(|z| 2.0 * z) + k4;
        rho = &rho + &incr.mapv(|z| z * C64::new(h / 6.0, 0.0));
        t += h;
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            out.times.push(t);
            out.states.push(rho.clone());
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// Scalar observables of a three-level atomic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub purity: f64,
    pub pop_g: f64,
    /// Population of the protected superposition `|S>` at the model's
    /// feedback phase.
    pub pop_s: f64,
    /// Population of the bright superposition `|T>`.
    pub pop_t: f64,
    /// Guided emission rate `sum_guided r <J†J>`.
    pub emission_rate: f64,
    /// `tr(H rho)`.
    pub h_expectation: f64,
}

/// Evaluate the standard observable set on a three-level state.
pub fn observables(rho: &CMat, model: &LindbladModel) -> Result<Observables> {
    if model.dim() != DIM_ATOM || rho.nrows() != DIM_ATOM {
        return Err(Error::DimMismatch(
            "observables are defined for the three-level atomic models".into(),
        ));
    }
    let dphi = model.st_phase.ok_or_else(|| {
        Error::InvalidParam("model does not define an S/T phase for observables".into())
    })?;
    let mut emission = 0.0;
    for j in &model.jumps {
        if j.guided {
            let jdj = dagger(&j.op).dot(&j.op);
            emission += j.rate * trace(&jdj.dot(rho)).re;
        }
    }
    Ok(Observables {
        purity: purity(rho),
        pop_g: rho[(0, 0)].re,
        pop_s: fidelity_with_pure(rho, &ket_s(dphi)),
        pop_t: fidelity_with_pure(rho, &ket_t(dphi)),
        emission_rate: emission,
        h_expectation: trace(&model.h.dot(rho)).re,
    })
}

/// Steady state with a relaxation fallback: if the algebraic solve reports
/// a degenerate kernel, evolve `|g><g|` (or the provided start) until the
/// state stops moving and return that physically-reachable fixed point.
/// The second element reports whether the fallback was taken.
pub fn steady_state_or_relax(model: &LindbladModel, rho0: Option<&CMat>) -> Result<(CMat, bool)> {
    match steady_state_of(model) {
        Ok(rho) => Ok((rho, false)),
        Err(Error::DegenerateSteadyState { .. }) => {
            let d = model.dim();
            let mut rho = match rho0 {
                Some(r) => r.clone(),
                None => {
                    let mut r = CMat::zeros((d, d));
                    r[(0, 0)] = ONE;
                    r
                }
            };
            // March in chunks, checking movement over a trailing window.
            let dt = 0.005;
            let chunk = 5.0;
            let mut t = 0.0;
            while t < 2000.0 {
                let next = evolve(model, &rho, chunk, dt, usize::MAX)?;
                let new = next.states.last().unwrap().clone();
                let moved = linalg::max_abs_diff(&new, &rho);
                rho = new;
                t += chunk;
                if moved < 1e-9 {
                    return Ok((rho, true));
                }
            }
            Err(Error::Numerical(
                "relaxation fallback did not converge within t = 2000/gamma \
                 (dynamics may be non-dissipative)"
                    .into(),
            ))
        }
        Err(e) => Err(e),
    }
}

/// Sum of `rate * <J†J>` over all channels — total scattering rate; used by
/// tests and diagnostics.
pub fn total_emission(rho: &CMat, model: &LindbladModel) -> f64 {
    let mut out = 0.0;
    for j in &model.jumps {
        let jdj = dagger(&j.op).dot(&j.op);
        out += j.rate * trace(&jdj.dot(rho)).re;
    }
    out
}

pub fn ground_state_density(d: usize) -> CMat {
    let mut r = CMat::zeros((d, d));
    r[(0, 0)] = ONE;
    r
}
