//! Tensor-train state and the per-step update of the time-bin solver.
//!
//! Site order is `[atom, bin_{k-1}, ..., bin_{k-m}, tail]` (newest bin next
//! to the atom). One step brings the oldest bin next to the atom by
//! nearest-neighbour swaps, applies the three-body gate to (fresh bin,
//! atom, returning bin), splits the result back into sites, carries the
//! used bin to the right end and compresses it into the tail. The
//! orthogonality center always travels with whichever site is being moved,
//! so every swap touches an otherwise canonical chain and all per-step
//! observables can be read off the gated three-site tensor directly.

use ndarray::{Array1, Array3, Axis};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lindblad::bare_atom_hamiltonian;
use crate::linalg::{dagger, expm, kron, svd, CMat, CVec};
use crate::operators::{atomic_operators, boson_annihilator, ket_g, DIM_ATOM};
use crate::params::SystemParams;

use super::{ResolvedTimeBin, TimeBinConfig};

pub(super) type Site = Array3<C64>;

/// Per-step readout, all taken from the post-gate three-site tensor.
#[derive(Debug, Clone)]
pub struct StepMetrics {
    /// Time after the step.
    pub t: f64,
    /// Reduced atomic density matrix.
    pub rho_a: CMat,
    /// Photon flux written into the loop this step (occupation of the
    /// fresh bin divided by `dt`).
    pub flux_in_loop: f64,
    /// Photon flux leaving the system this step (occupation of the
    /// returning bin after its second pass, divided by `dt`).
    pub flux_emitted: f64,
    /// Squared state norm at the end of the step, before renormalization;
    /// drops below 1 only by the truncated weight.
    pub norm: f64,
    /// Largest bond dimension in the chain right now.
    pub bond_max: usize,
    /// Cumulative relative weight discarded by truncations so far.
    pub discarded: f64,
}

/// Matrix-product state of atom + in-flight bins + emitted-field tail.
#[derive(Debug, Clone)]
pub struct TensorTrainState {
    pub params: SystemParams,
    pub config: TimeBinConfig,
    pub(super) sites: Vec<Site>,
    pub(super) center: usize,
    /// Steps taken so far.
    pub(super) step: u64,
    pub(super) m: usize,
    pub(super) dim_bin: usize,
    pub(super) cum_discarded: f64,
    pub(super) emitted_total: f64,
    pub(super) max_bond_seen: usize,
    unitary: CMat,
}

enum Ride {
    /// Center stays on the left output of the swap (site moving left).
    Left,
    /// Center stays on the right output of the swap (site moving right).
    Right,
}

impl TensorTrainState {
    /// Fresh state: atom in `|g>`, loop and waveguide in vacuum.
    pub fn new(p: &SystemParams, cfg: &TimeBinConfig) -> Result<Self> {
        Self::with_atom(p, cfg, &ket_g())
    }

    /// Fresh state with an arbitrary normalized pure atomic state.
    pub fn with_atom(p: &SystemParams, cfg: &TimeBinConfig, atom: &CVec) -> Result<Self> {
        let ResolvedTimeBin { m, dim_bin } = cfg.validate(p)?;
        if atom.len() != DIM_ATOM {
            return Err(Error::DimMismatch(format!(
                "atomic state must have dimension {DIM_ATOM}, got {}",
                atom.len()
            )));
        }
        let nrm: f64 = atom.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParam(format!(
                "initial atomic state must be normalized, |psi| = {nrm}"
            )));
        }
        let mut atom_site = Site::zeros((1, DIM_ATOM, 1));
        for i in 0..DIM_ATOM {
            atom_site[(0, i, 0)] = atom[i];
        }
        let mut tail = Site::zeros((1, 1, 1));
        tail[(0, 0, 0)] = C64::new(1.0, 0.0);
        let unitary = build_step_unitary(p, cfg.dt, dim_bin)?;
        Ok(Self {
            params: *p,
            config: cfg.clone(),
            sites: vec![atom_site, tail],
            center: 1,
            step: 0,
            m,
            dim_bin,
            cum_discarded: 0.0,
            emitted_total: 0.0,
            max_bond_seen: 1,
            unitary,
        })
    }

    /// Rebuild a state from raw pieces (used when loading a checkpoint).
    pub(super) fn from_raw(
        p: SystemParams,
        cfg: TimeBinConfig,
        sites: Vec<Site>,
        center: usize,
        step: u64,
        cum_discarded: f64,
        emitted_total: f64,
        max_bond_seen: usize,
    ) -> Result<Self> {
        let ResolvedTimeBin { m, dim_bin } = cfg.validate(&p)?;
        if sites.len() < 2 || center >= sites.len() {
            return Err(Error::BadCheckpoint(format!(
                "inconsistent chain: {} sites, center {center}",
                sites.len()
            )));
        }
        let unitary = build_step_unitary(&p, cfg.dt, dim_bin)?;
        Ok(Self {
            params: p,
            config: cfg,
            sites,
            center,
            step,
            m,
            dim_bin,
            cum_discarded,
            emitted_total,
            max_bond_seen,
            unitary,
        })
    }

    /// Simulated time so far.
    pub fn t(&self) -> f64 {
        self.step as f64 * self.config.dt
    }

    /// Steps taken so far.
    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Bins currently in flight (grows to `tau/dt` and stays there).
    pub fn bins_in_flight(&self) -> usize {
        self.sites.len() - 2
    }

    /// Largest bond dimension anywhere in the chain right now.
    pub fn bond_max(&self) -> usize {
        self.sites
            .iter()
            .map(|s| s.dim().0.max(s.dim().2))
            .max()
            .unwrap_or(1)
    }

    /// Largest bond dimension ever reached.
    pub fn max_bond_seen(&self) -> usize {
        self.max_bond_seen
    }

    /// Cumulative relative weight removed by truncations.
    pub fn discarded_weight(&self) -> f64 {
        self.cum_discarded
    }

    /// Photons emitted past the atom so far (time-integrated flux).
    pub fn emitted_total(&self) -> f64 {
        self.emitted_total
    }

    /// Reduced atomic density matrix of the current state, contracted from
    /// scratch. Sites right of the orthogonality center contribute the
    /// identity environment, so only positions `1..=center` are summed.
    pub fn reduced_atom(&self) -> Result<CMat> {
        let mut env: Option<CMat> = None; // right environment on the bond
        for (pos, site) in self.sites.iter().enumerate().skip(1).rev() {
            if pos > self.center && env.is_none() {
                continue; // right-canonical: identity environment
            }
            let (l, p, _) = site.dim();
            // E_pos = sum_q T_q E_next T_q† over the physical index
            let mut acc = CMat::zeros((l, l));
            for q in 0..p {
                let t_q = site.index_axis(Axis(1), q).to_owned();
                let term = match &env {
                    None => t_q.dot(&dagger(&t_q)),
                    Some(e) => t_q.dot(e).dot(&dagger(&t_q)),
                };
                acc = acc + term;
            }
            env = Some(acc);
        }
        let a = to_mat_right(&self.sites[0]); // (3, r) since the left bond is 1
        let rho = match env {
            Some(e) => a.dot(&e).dot(&dagger(&a)),
            None => a.dot(&dagger(&a)),
        };
        let tr = crate::linalg::trace(&rho).re;
        if tr <= 0.0 {
            return Err(Error::Numerical("zero-trace reduced state".into()));
        }
        Ok(rho.mapv(|z| z / tr))
    }

    /// Advance by one bin. Returns the per-step observables.
    pub fn step(&mut self) -> Result<StepMetrics> {
        let k = self.step as usize + 1;
        let transient = k <= self.m;
        let tol = self.config.svd_tol;
        let cap = self.config.max_bond;

        if transient {
            // The returning field is still the initial vacuum of the loop:
            // park the center on the atom and synthesize a vacuum partner.
            self.move_center_to(0)?;
            let chi = self.sites[0].dim().2;
            let mut vac = Site::zeros((chi, self.dim_bin, chi));
            for b in 0..chi {
                vac[(b, 0, b)] = C64::new(1.0, 0.0);
            }
            self.sites.insert(1, vac);
            // center stays at 0 (atom)
        } else {
            // Bring the center onto the returning bin, then bubble it up
            // until it sits right of the atom.
            let partner = self.sites.len() - 2;
            self.move_center_to(partner)?;
            while self.center > 1 {
                self.swap_sites(self.center - 1, Ride::Left, tol, cap)?;
            }
        }

        // Fresh vacuum bin at the left edge.
        let mut fresh = Site::zeros((1, self.dim_bin, 1));
        fresh[(0, 0, 0)] = C64::new(1.0, 0.0);
        self.sites.insert(0, fresh);
        self.center += 1;

        // --- gate ---------------------------------------------------------
        let d = self.dim_bin;
        let (_, _, ra) = self.sites[1].dim();
        let (_, _, rp) = self.sites[2].dim();
        let x = to_mat_right(&self.sites[0]) // (1*d, 1)
            .dot(&to_mat_left(&self.sites[1])) // -> (d, 3*ra)
            .into_shape_with_order((d * DIM_ATOM, ra))
            .expect("triple reshape");
        let t_mat = x
            .dot(&to_mat_left(&self.sites[2])) // (d*3, d*rp)
            .into_shape_with_order((d * DIM_ATOM * d, rp))
            .expect("triple reshape");
        let mut gated = self.unitary.dot(&t_mat);

        // The pre-gate swaps truncate between tail renormalizations, so the
        // block arrives with the weight they discarded missing from its norm
        // (that debt is already tracked in `cum_discarded`). Only a gross
        // deviation signals a real loss of canonical form.
        let norm_gate: f64 = gated.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_gate.is_finite()) || (norm_gate - 1.0).abs() > 1e-3 {
            return Err(Error::Numerical(format!(
                "state norm drifted to {norm_gate} at step {k}; the chain lost canonical form"
            )));
        }

        // --- measurement on the gated tensor ------------------------------
        let mut occ_fresh = 0.0;
        let mut occ_partner = 0.0;
        for (row, r) in gated.rows().into_iter().enumerate() {
            let w: f64 = r.iter().map(|z| z.norm_sqr()).sum();
            let n_f = row / (DIM_ATOM * d);
            let n_p = row % d;
            occ_fresh += n_f as f64 * w;
            occ_partner += n_p as f64 * w;
        }
        let dt = self.config.dt;
        let flux_in_loop = occ_fresh / norm_gate / dt;
        let flux_emitted = occ_partner / norm_gate / dt;
        let rescale = C64::new(1.0 / norm_gate.sqrt(), 0.0);
        gated.mapv_inplace(|z| z * rescale);

        // --- split back into [atom, fresh, used] ---------------------------
        let t4 = gated
            .into_shape_with_order((d, DIM_ATOM, d, rp))
            .expect("gate reshape");
        let perm = t4.permuted_axes([1, 0, 2, 3]); // (atom, fresh, partner, R)
        let perm = perm.as_standard_layout().into_owned();
        let m1 = perm
            .into_shape_with_order((DIM_ATOM, d * d * rp))
            .expect("atom split reshape");
        let s1 = truncated_svd(&m1, tol, cap)?;
        let k1 = s1.s.len();
        let s_sq = s1.s.mapv(|x| x * x);
        let kept: f64 = s_sq.sum();
        let rho_a = scale_cols(&s1.left, &s_sq)
            .dot(&dagger(&s1.left))
            .mapv(|z| z / kept);
        let atom_site = s1
            .left
            .into_shape_with_order((1, DIM_ATOM, k1))
            .expect("atom site reshape");

        let rem = scale_rows(&s1.s, &s1.right)
            .into_shape_with_order((k1 * d, d * rp))
            .expect("fresh split reshape");
        let s2 = truncated_svd(&rem, tol, cap)?;
        let k2 = s2.s.len();
        let fresh_site = s2
            .left
            .into_shape_with_order((k1, d, k2))
            .expect("fresh site reshape");
        let used_site = scale_rows(&s2.s, &s2.right)
            .into_shape_with_order((k2, d, rp))
            .expect("used site reshape");
        // positions 0,1,2 were [fresh, atom, partner]; now [atom, fresh, used]
        self.sites[0] = atom_site;
        self.sites[1] = fresh_site;
        self.sites[2] = used_site;
        self.center = 2;
        self.cum_discarded += s1.discarded + s2.discarded;
        self.note_bond(k1.max(k2));

        // --- carry the used bin to the tail and retire it ------------------
        while self.center < self.sites.len() - 2 {
            self.swap_sites(self.center, Ride::Right, tol, cap)?;
        }
        self.retire_used(tol, cap)?;

        // --- renormalize the center (tail) ---------------------------------
        // No renormalization happened since the gate, so the tail norm is
        // the state norm: 1 minus whatever the truncations removed.
        let nrm2: f64 = self.sites[self.center].iter().map(|z| z.norm_sqr()).sum();
        let norm_end = nrm2;
        if !(nrm2 > 0.0) {
            return Err(Error::Numerical("state norm vanished after truncation".into()));
        }
        let scale = C64::new(1.0 / nrm2.sqrt(), 0.0);
        self.sites[self.center].mapv_inplace(|z| z * scale);

        self.step += 1;
        self.emitted_total += flux_emitted * dt;
        Ok(StepMetrics {
            t: self.t(),
            rho_a,
            flux_in_loop,
            flux_emitted,
            norm: norm_end,
            bond_max: self.bond_max(),
            discarded: self.cum_discarded,
        })
    }

    fn note_bond(&mut self, b: usize) {
        if b > self.max_bond_seen {
            self.max_bond_seen = b;
        }
    }

    /// Move the orthogonality center to `to` by exact (untruncated) splits.
    fn move_center_to(&mut self, to: usize) -> Result<()> {
        while self.center > to {
            let c = self.center;
            let (_, p, r) = self.sites[c].dim();
            let m = to_mat_left(&self.sites[c]); // (l, p*r)
            let f = svd(&m)?;
            let kk = f.s.len();
            self.sites[c] = f
                .vh
                .into_shape_with_order((kk, p, r))
                .expect("center move reshape");
            let carry = scale_cols(&f.u, &f.s); // (l, kk)
            let (l2, p2, _) = self.sites[c - 1].dim();
            let left = to_mat_right(&self.sites[c - 1]).dot(&carry);
            self.sites[c - 1] = left
                .into_shape_with_order((l2, p2, kk))
                .expect("center move reshape");
            self.center -= 1;
        }
        while self.center < to {
            let c = self.center;
            let (l, p, _r) = self.sites[c].dim();
            let m = to_mat_right(&self.sites[c]); // (l*p, r)
            let f = svd(&m)?;
            let kk = f.s.len();
            self.sites[c] = f
                .u
                .into_shape_with_order((l, p, kk))
                .expect("center move reshape");
            let carry = scale_rows(&f.s, &f.vh); // (kk, r)
            let (_, p2, r2) = self.sites[c + 1].dim();
            let right = carry.dot(&to_mat_left(&self.sites[c + 1]));
            self.sites[c + 1] = right
                .into_shape_with_order((kk, p2, r2))
                .expect("center move reshape");
            self.center += 1;
        }
        Ok(())
    }

    /// Swap the physical contents of sites `i` and `i + 1`.
    fn swap_sites(&mut self, i: usize, ride: Ride, tol: f64, cap: usize) -> Result<()> {
        let (la, d1, _) = self.sites[i].dim();
        let (_, d2, rb) = self.sites[i + 1].dim();
        let theta = to_mat_right(&self.sites[i]).dot(&to_mat_left(&self.sites[i + 1]));
        let theta = theta
            .into_shape_with_order((la, d1, d2, rb))
            .expect("swap reshape");
        let perm = theta.permuted_axes([0, 2, 1, 3]);
        let perm = perm.as_standard_layout().into_owned();
        let m = perm
            .into_shape_with_order((la * d2, d1 * rb))
            .expect("swap reshape");
        let f = truncated_svd(&m, tol, cap)?;
        let kk = f.s.len();
        match ride {
            Ride::Left => {
                self.sites[i] = scale_cols(&f.left, &f.s)
                    .into_shape_with_order((la, d2, kk))
                    .expect("swap reshape");
                self.sites[i + 1] = f
                    .right
                    .into_shape_with_order((kk, d1, rb))
                    .expect("swap reshape");
                self.center = i;
            }
            Ride::Right => {
                self.sites[i] = f
                    .left
                    .into_shape_with_order((la, d2, kk))
                    .expect("swap reshape");
                self.sites[i + 1] = scale_rows(&f.s, &f.right)
                    .into_shape_with_order((kk, d1, rb))
                    .expect("swap reshape");
                self.center = i + 1;
            }
        }
        self.cum_discarded += f.discarded;
        self.note_bond(kk);
        Ok(())
    }

    /// Compress the used bin (next to the tail, holding the center) into
    /// the tail. The unitary acting on the combined dangling index of the
    /// emitted field is dropped — it is never observed again, so only the
    /// Schmidt weights toward the live chain matter.
    fn retire_used(&mut self, tol: f64, cap: usize) -> Result<()> {
        let used_pos = self.sites.len() - 2;
        debug_assert_eq!(self.center, used_pos);
        let (l, p, _) = self.sites[used_pos].dim();
        let (_, pt, _) = self.sites[used_pos + 1].dim();
        let w = to_mat_right(&self.sites[used_pos]) // (l*p, r)
            .dot(&to_mat_left(&self.sites[used_pos + 1])) // (r, pt*1)
            .into_shape_with_order((l, p * pt))
            .expect("retire reshape");
        let f = truncated_svd(&w, tol, cap)?;
        let kk = f.s.len();
        let new_tail = scale_cols(&f.left, &f.s)
            .into_shape_with_order((l, kk, 1))
            .expect("retire reshape");
        self.sites.truncate(used_pos);
        self.sites.push(new_tail);
        self.center = self.sites.len() - 1;
        self.cum_discarded += f.discarded;
        Ok(())
    }
}

/// `(l, p, r) -> (l, p*r)` for a standard-layout site.
fn to_mat_left(t: &Site) -> CMat {
    let (l, p, r) = t.dim();
    t.as_standard_layout()
        .to_owned()
        .into_shape_with_order((l, p * r))
        .expect("site reshape")
}

/// `(l, p, r) -> (l*p, r)` for a standard-layout site.
fn to_mat_right(t: &Site) -> CMat {
    let (l, p, r) = t.dim();
    t.as_standard_layout()
        .to_owned()
        .into_shape_with_order((l * p, r))
        .expect("site reshape")
}

/// Scale column `j` of `m` by `s[j]`.
fn scale_cols(m: &CMat, s: &Array1<f64>) -> CMat {
    let mut out = m.clone();
    for (j, &v) in s.iter().enumerate() {
        out.column_mut(j).mapv_inplace(|z| z * v);
    }
    out
}

/// Scale row `i` of `m` by `s[i]`.
fn scale_rows(s: &Array1<f64>, m: &CMat) -> CMat {
    let mut out = m.clone();
    for (i, &v) in s.iter().enumerate() {
        out.row_mut(i).mapv_inplace(|z| z * v);
    }
    out
}

struct TruncatedSvd {
    left: CMat,
    s: Array1<f64>,
    right: CMat,
    discarded: f64,
}

/// Economy SVD keeping the smallest rank whose relative discarded weight
/// stays below `tol`, additionally capped at `max_bond`.
fn truncated_svd(m: &CMat, tol: f64, max_bond: usize) -> Result<TruncatedSvd> {
    let f = svd(m)?;
    let total: f64 = f.s.iter().map(|x| x * x).sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("zero-norm tensor in truncation".into()));
    }
    let mut keep = f.s.len();
    let mut dropped = 0.0;
    while keep > 1 {
        let c = f.s[keep - 1] * f.s[keep - 1];
        if dropped + c > tol * total {
            break;
        }
        dropped += c;
        keep -= 1;
    }
    let keep = keep.min(max_bond);
    let discarded: f64 = f.s.iter().skip(keep).map(|x| x * x).sum::<f64>() / total;
    Ok(TruncatedSvd {
        left: f.u.slice(ndarray::s![.., ..keep]).to_owned(),
        s: f.s.slice(ndarray::s![..keep]).to_owned(),
        right: f.vh.slice(ndarray::s![..keep, ..]).to_owned(),
        discarded,
    })
}

/// Single-step propagator on (fresh bin) ⊗ (atom) ⊗ (returning bin), fresh
/// index slowest:
///
/// ```text
/// U = exp[ -i H_a dt + sqrt(gamma dt) (b_f† sigma_L - b_f sigma_L†)
///        + sqrt(gamma dt) (e^{i dphi} b_p† sigma_R - e^{-i dphi} b_p sigma_R†) ]
/// ```
///
/// The generator is anti-Hermitian, so `U` is unitary to the accuracy of
/// the matrix exponential.
pub fn build_step_unitary(p: &SystemParams, dt: f64, dim_bin: usize) -> Result<CMat> {
    let ops = atomic_operators(p.eta, p.dphi, p.phi_prime)?;
    let b = boson_annihilator(dim_bin);
    let bd = dagger(&b);
    let id_b = crate::linalg::eye(dim_bin);

    let h = bare_atom_hamiltonian(p);
    let mut g = kron(&id_b, &kron(&h.mapv(|z| z * C64::new(0.0, -dt)), &id_b));

    let amp = (p.gamma * dt).sqrt();
    let fresh_term = kron(&bd, &kron(&ops.sigma_l, &id_b))
        - kron(&b, &kron(&dagger(&ops.sigma_l), &id_b));
    g = g + fresh_term.mapv(|z| z * amp);

    let phase = C64::from_polar(amp, p.dphi);
    let partner_up = kron(&id_b, &kron(&ops.sigma_r, &bd));
    let partner_dn = kron(&id_b, &kron(&dagger(&ops.sigma_r), &b));
    g = g + partner_up.mapv(|z| z * phase) - partner_dn.mapv(|z| z * phase.conj());

    expm(&g)
}
