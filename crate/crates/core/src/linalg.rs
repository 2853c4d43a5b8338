//! Dense complex linear algebra shared by all solvers.
//!
//! Matrices are row-major [`ndarray`] arrays of `Complex64`. Density
//! matrices are ordinary [`CMat`]s; [`check_density_matrix`] enforces the
//! Hermiticity / unit-trace / positivity contract where a routine requires
//! it rather than baking the invariant into a wrapper type.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eigh, Factorize, JobSvd, Solve, SVD, SVDDC, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMat = Array2<C64>;
/// Dense complex vector.
pub type CVec = Array1<C64>;

pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `n x n` identity.
pub fn eye(n: usize) -> CMat {
    Array2::eye(n).mapv(|x: f64| C64::new(x, 0.0))
}

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

/// Kronecker product, `(a ⊗ b)[ip + k, jq + l] = a[i, j] b[k, l]` for
/// `b` of shape `(p, q)`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    ndarray::linalg::kron(a, b)
}

/// `tr(a)`.
pub fn trace(a: &CMat) -> C64 {
    a.diag().sum()
}

/// Frobenius norm.
pub fn fro_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry-wise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `(a + a†)/2`.
pub fn hermitize(a: &CMat) -> CMat {
    let ad = dagger(a);
    (a + &ad).mapv(|z| 0.5 * z)
}

/// True when `max |a - a†| <= tol`.
pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    max_abs_diff(a, &dagger(a)) <= tol
}

/// Purity `tr(rho^2)`, real part. Lies in `[1/d, 1]` for a valid density
/// matrix.
pub fn purity(rho: &CMat) -> f64 {
    // tr(rho^2) = sum_ij rho_ij rho_ji = sum_ij rho_ij conj(rho_ij) for
    // Hermitian rho; evaluate the general bilinear form so the tiny
    // anti-Hermitian numerical residue is kept visible, then take Re.
    let mut acc = ZERO;
    let n = rho.nrows();
    for i in 0..n {
        for j in 0..n {
            acc += rho[(i, j)] * rho[(j, i)];
        }
    }
    acc.re
}

/// Fidelity `<psi| rho |psi>` of a density matrix with a pure state.
pub fn fidelity_with_pure(rho: &CMat, psi: &CVec) -> f64 {
    let mut acc = ZERO;
    for i in 0..psi.len() {
        for j in 0..psi.len() {
            acc += psi[i].conj() * rho[(i, j)] * psi[j];
        }
    }
    acc.re
}

/// Trace distance `1/2 tr |a - b|` between two Hermitian matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> Result<f64> {
    let diff = hermitize(&(a - b));
    let (vals, _) = diff.eigh(UPLO::Lower)?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Validate the density-matrix contract: finite entries, Hermitian, unit
/// trace and positive semidefinite, all within `tol`.
pub fn check_density_matrix(rho: &CMat, tol: f64) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::DimMismatch(format!(
            "density matrix must be square, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("density matrix has non-finite entries".into()));
    }
    if !is_hermitian(rho, tol) {
        return Err(Error::Numerical(format!(
            "density matrix not Hermitian within {tol:e}"
        )));
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > tol {
        return Err(Error::Numerical(format!(
            "density matrix trace {} is not 1 within {tol:e}",
            tr
        )));
    }
    let (vals, _) = hermitize(rho).eigh(UPLO::Lower)?;
    if let Some(min) = vals.iter().cloned().reduce(f64::min) {
        if min < -tol {
            return Err(Error::Numerical(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
    }
    Ok(())
}

/// Economy singular value decomposition `a = u diag(s) vh`.
pub struct Svd {
    pub u: CMat,
    pub s: Array1<f64>,
    pub vh: CMat,
}

/// Economy SVD; `u` is `(m, k)`, `vh` is `(k, n)` with `k = min(m, n)`.
///
/// Tries the fast divide-and-conquer driver first. That driver sporadically
/// fails to converge on badly scaled inputs (LAPACK info > 0), so on
/// failure this falls back to the QR-based driver, then to the QR-based
/// driver on a max-normalized copy, and finally to decomposing the adjoint
/// (`a = u s vh  <=>  a† = vh† s u†`) — each fallback is exact, only the
/// iteration path differs.
pub fn svd(a: &CMat) -> Result<Svd> {
    if let Ok(out) = raw_svd(a, true) {
        return Ok(out);
    }
    if let Ok(out) = raw_svd(a, false) {
        return Ok(out);
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale > 0.0 && scale.is_finite() {
        let b = a.mapv(|z| z / scale);
        if let Ok(mut out) = raw_svd(&b, false) {
            out.s.mapv_inplace(|s| s * scale);
            return Ok(out);
        }
        if let Ok(out) = raw_svd(&dagger(&b), false) {
            return Ok(Svd {
                u: dagger(&out.vh),
                s: out.s.mapv(|s| s * scale),
                vh: dagger(&out.u),
            });
        }
    }
    // Surface the original error path.
    raw_svd(a, true)
}

fn raw_svd(a: &CMat, divide_and_conquer: bool) -> Result<Svd> {
    let (u, s, vh) = if divide_and_conquer {
        a.svddc(JobSvd::Some)?
    } else {
        a.svd(true, true)?
    };
    let u = u.ok_or_else(|| Error::Numerical("svd did not return u".into()))?;
    let vh = vh.ok_or_else(|| Error::Numerical("svd did not return v^H".into()))?;
    Ok(Svd { u, s, vh })
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

// [13/13] Padé coefficients for the matrix exponential.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which the [13/13] approximant is accurate to double
// precision without scaling.
const THETA13: f64 = 5.371920351148152;

/// 1-norm (maximum absolute column sum).
fn one_norm(a: &CMat) -> f64 {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling-and-squaring with a [13/13] Padé
/// approximant. Relative accuracy is ~1e-13 for `||a|| <= 50`, which covers
/// every propagator built in this crate.
pub fn expm(a: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimMismatch(format!(
            "expm needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(CMat::zeros((0, 0)));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::Numerical("expm argument has non-finite norm".into()));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scale = C64::new((0.5f64).powi(squarings as i32), 0.0);
    let a1 = a.mapv(|z| z * scale);

    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let id = eye(n);

    // u = a (a6 (b13 a6 + b11 a4 + b9 a2) + b7 a6 + b5 a4 + b3 a2 + b1 I)
    let mut w = a6.mapv(|z| z * PADE13[13]);
    w = w + a4.mapv(|z| z * PADE13[11]) + a2.mapv(|z| z * PADE13[9]);
    let mut u = a6.dot(&w);
    u = u
        + a6.mapv(|z| z * PADE13[7])
        + a4.mapv(|z| z * PADE13[5])
        + a2.mapv(|z| z * PADE13[3])
        + id.mapv(|z| z * PADE13[1]);
    let u = a1.dot(&u);

    // v = a6 (b12 a6 + b10 a4 + b8 a2) + b6 a6 + b4 a4 + b2 a2 + b0 I
    let mut w = a6.mapv(|z| z * PADE13[12]);
    w = w + a4.mapv(|z| z * PADE13[10]) + a2.mapv(|z| z * PADE13[8]);
    let mut v = a6.dot(&w);
    v = v
        + a6.mapv(|z| z * PADE13[6])
        + a4.mapv(|z| z * PADE13[4])
        + a2.mapv(|z| z * PADE13[2])
        + id.mapv(|z| z * PADE13[0]);

    // Solve (v - u) f = (v + u) column by column.
    let lhs = &v - &u;
    let rhs = &v + &u;
    let fact = lhs.factorize()?;
    let mut f = CMat::zeros((n, n));
    for (j, col) in rhs.axis_iter(Axis(1)).enumerate() {
        let x = fact.solve(&col.to_owned())?;
        f.column_mut(j).assign(&x);
    }

    for _ in 0..squarings {
        f = f.dot(&f);
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Partial trace
// ---------------------------------------------------------------------------

/// Partial trace of `rho` over every subsystem not listed in `keep`.
///
/// `dims` are the subsystem dimensions in tensor-product (Kronecker) order,
/// so the fastest-varying index is the last entry. `keep` lists the
/// subsystem positions to retain, in strictly increasing order; the output
/// is indexed by those subsystems in the same order.
pub fn partial_trace(rho: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let n: usize = dims.iter().product();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimMismatch(format!(
            "partial_trace: matrix is {}x{} but dims {:?} give {}",
            rho.nrows(),
            rho.ncols(),
            dims,
            n
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidParam(format!(
            "partial_trace: keep {:?} must be strictly increasing positions into dims {:?}",
            keep, dims
        )));
    }

    // Strides of each subsystem within the flattened product index.
    let mut strides = vec![1usize; dims.len()];
    for s in (0..dims.len().saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * dims[s + 1];
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
    let d_keep: usize = keep.iter().map(|&s| dims[s]).product();

    // Enumerate flat offsets contributed by the kept / traced subsystems.
    let offsets = |subs: &[usize]| -> Vec<usize> {
        let mut out = vec![0usize];
        for &s in subs {
            let mut next = Vec::with_capacity(out.len() * dims[s]);
            for &base in &out {
                for i in 0..dims[s] {
                    next.push(base + i * strides[s]);
                }
            }
            out = next;
        }
        out
    };
    let keep_off = offsets(keep);
    let trace_off = offsets(&traced);
    debug_assert_eq!(keep_off.len(), d_keep);

    let mut out = CMat::zeros((d_keep, d_keep));
    for (r, &ro) in keep_off.iter().enumerate() {
        for (c, &co) in keep_off.iter().enumerate() {
            let mut acc = ZERO;
            for &to in &trace_off {
                acc += rho[(ro + to, co + to)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray_linalg::QR;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_cmat(n: usize, m: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, m), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    // -- kron ---------------------------------------------------------------

    /// Index-formula oracle: (a ⊗ b)[ip+k, jq+l] = a[i,j] b[k,l].
    fn kron_oracle(a: &CMat, b: &CMat) -> CMat {
        let (m, n) = (a.nrows(), a.ncols());
        let (p, q) = (b.nrows(), b.ncols());
        let mut out = CMat::zeros((m * p, n * q));
        for i in 0..m {
            for j in 0..n {
                for k in 0..p {
                    for l in 0..q {
                        out[(i * p + k, j * q + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&eye(2), &eye(2)), eye(4));
        let d = Array2::from_diag(&ndarray::arr1(&[ONE, 2.0 * ONE]));
        let expect = Array2::from_diag(&ndarray::arr1(&[ONE, ONE, 2.0 * ONE, 2.0 * ONE]));
        assert_eq!(kron(&d, &eye(2)), expect);
    }

    #[test]
    fn kron_matches_index_oracle() {
        let a = rand_cmat(3, 2, 11);
        let b = rand_cmat(2, 4, 12);
        assert!(max_abs_diff(&kron(&a, &b), &kron_oracle(&a, &b)) == 0.0);
    }

    #[test]
    fn kron_mixed_product_property() {
        // (A ⊗ B)(C ⊗ D) = AC ⊗ BD
        let a = rand_cmat(3, 3, 1);
        let b = rand_cmat(2, 2, 2);
        let c = rand_cmat(3, 3, 3);
        let d = rand_cmat(2, 2, 4);
        let lhs = kron(&a, &b).dot(&kron(&c, &d));
        let rhs = kron(&a.dot(&c), &b.dot(&d));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    // -- expm ---------------------------------------------------------------

    /// Taylor-series oracle, valid for small norm arguments.
    fn expm_taylor(a: &CMat) -> CMat {
        let n = a.nrows();
        let mut sum = eye(n);
        let mut term = eye(n);
        for k in 1..60 {
            term = term.dot(a).mapv(|z| z / C64::new(k as f64, 0.0));
            sum = sum + &term;
            if fro_norm(&term) < 1e-30 {
                break;
            }
        }
        sum
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = CMat::zeros((4, 4));
        assert!(max_abs_diff(&expm(&z).unwrap(), &eye(4)) < 1e-15);
    }

    #[test]
    fn expm_diagonal() {
        // exp(diag(i pi, 0)) = diag(-1, 1)
        let mut a = CMat::zeros((2, 2));
        a[(0, 0)] = I * std::f64::consts::PI;
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] + ONE).norm() < 1e-13);
        assert!((e[(1, 1)] - ONE).norm() < 1e-13);
        assert!(e[(0, 1)].norm() < 1e-15 && e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn expm_matches_taylor_oracle() {
        for seed in 0..4u64 {
            let a = rand_cmat(6, 6, 100 + seed); // ||a||_1 ~ a few
            let got = expm(&a).unwrap();
            let want = expm_taylor(&a);
            let rel = max_abs_diff(&got, &want) / fro_norm(&want);
            assert!(rel < 1e-13, "seed {seed}: relative error {rel:e}");
        }
    }

    #[test]
    fn expm_normal_matrix_oracle_large_norm() {
        // For normal A = V diag(lam) V^H, exp(A) = V diag(exp lam) V^H.
        // Build V unitary by QR, with eigenvalue magnitudes up to 50.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (v, _r) = rand_cmat(8, 8, 77).qr().unwrap();
        let lam: Vec<C64> = (0..8)
            .map(|_| C64::new(rng.gen_range(-50.0..0.0), rng.gen_range(-50.0..50.0)))
            .collect();
        let d = Array2::from_diag(&ndarray::arr1(&lam));
        let a = v.dot(&d).dot(&dagger(&v));
        let want = v
            .dot(&Array2::from_diag(&ndarray::arr1(
                &lam.iter().map(|z| z.exp()).collect::<Vec<_>>(),
            )))
            .dot(&dagger(&v));
        let got = expm(&a).unwrap();
        let rel = max_abs_diff(&got, &want) / fro_norm(&want);
        assert!(rel < 1e-12, "relative error {rel:e}");
    }

    #[test]
    fn expm_antihermitian_gives_unitary() {
        let a = rand_cmat(6, 6, 5);
        let g = &a - &dagger(&a); // anti-Hermitian, ||g|| ~ few
        let u = expm(&g).unwrap();
        let should_be_id = dagger(&u).dot(&u);
        assert!(max_abs_diff(&should_be_id, &eye(6)) < 1e-12);
    }

    #[test]
    fn expm_inverse_property() {
        let a = rand_cmat(5, 5, 9).mapv(|z| z * C64::new(3.0, 0.0));
        let e = expm(&a).unwrap();
        let einv = expm(&a.mapv(|z| -z)).unwrap();
        assert!(max_abs_diff(&e.dot(&einv), &eye(5)) < 1e-10);
    }

    // -- partial trace -------------------------------------------------------

    /// Two-subsystem oracle by explicit block sums.
    fn ptrace_pair_oracle(rho: &CMat, d0: usize, d1: usize, keep_first: bool) -> CMat {
        if keep_first {
            let mut out = CMat::zeros((d0, d0));
            for i in 0..d0 {
                for j in 0..d0 {
                    for k in 0..d1 {
                        out[(i, j)] += rho[(i * d1 + k, j * d1 + k)];
                    }
                }
            }
            out
        } else {
            let mut out = CMat::zeros((d1, d1));
            for k in 0..d1 {
                for l in 0..d1 {
                    for i in 0..d0 {
                        out[(k, l)] += rho[(i * d1 + k, i * d1 + l)];
                    }
                }
            }
            out
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let rho_a = {
            let v = ndarray::arr1(&[C64::new(0.6f64.sqrt(), 0.0), C64::new(0.0, 0.4f64.sqrt())]);
            let mut m = CMat::zeros((2, 2));
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] = v[i] * v[j].conj();
                }
            }
            m
        };
        let rho_b = {
            let mut m = CMat::zeros((3, 3));
            m[(0, 0)] = 0.5 * ONE;
            m[(2, 2)] = 0.5 * ONE;
            m
        };
        let rho = kron(&rho_a, &rho_b);
        let got_a = partial_trace(&rho, &[2, 3], &[0]).unwrap();
        let got_b = partial_trace(&rho, &[2, 3], &[1]).unwrap();
        assert!(max_abs_diff(&got_a, &rho_a) < 1e-14);
        assert!(max_abs_diff(&got_b, &rho_b) < 1e-14);
    }

    #[test]
    fn partial_trace_bell_pair_is_maximally_mixed() {
        let mut psi = CVec::zeros(4);
        psi[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut rho = CMat::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                rho[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        let red = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(max_abs_diff(&red, &eye(2).mapv(|z| 0.5 * z)) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_block_oracle() {
        let a = rand_cmat(6, 6, 42);
        let rho = hermitize(&a);
        for (keep, keep_first) in [(vec![0usize], true), (vec![1usize], false)] {
            let got = partial_trace(&rho, &[2, 3], &keep).unwrap();
            let want = ptrace_pair_oracle(&rho, 2, 3, keep_first);
            assert!(max_abs_diff(&got, &want) < 1e-14);
        }
    }

    #[test]
    fn partial_trace_three_subsystems() {
        // Keep the middle factor of a triple product state.
        let up = ndarray::arr1(&[ONE, ZERO]);
        let plus = ndarray::arr1(&[
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let proj = |v: &CVec| -> CMat {
            let mut m = CMat::zeros((v.len(), v.len()));
            for i in 0..v.len() {
                for j in 0..v.len() {
                    m[(i, j)] = v[i] * v[j].conj();
                }
            }
            m
        };
        let rho = kron(&kron(&proj(&up.to_owned()), &proj(&plus.to_owned())), &proj(&up.to_owned()));
        let got = partial_trace(&rho, &[2, 2, 2], &[1]).unwrap();
        assert!(max_abs_diff(&got, &proj(&plus.to_owned())) < 1e-14);
        // Trace is preserved regardless of which factors are kept.
        let got02 = partial_trace(&rho, &[2, 2, 2], &[0, 2]).unwrap();
        assert!((trace(&got02) - ONE).norm() < 1e-14);
    }

    // -- misc ----------------------------------------------------------------

    #[test]
    fn purity_known_cases() {
        let pure = {
            let mut m = CMat::zeros((3, 3));
            m[(0, 0)] = ONE;
            m
        };
        assert!((purity(&pure) - 1.0).abs() < 1e-15);
        let mixed = eye(4).mapv(|z| 0.25 * z);
        assert!((purity(&mixed) - 0.25).abs() < 1e-15);
        let half = {
            let mut m = CMat::zeros((2, 2));
            m[(0, 0)] = 0.5 * ONE;
            m[(1, 1)] = 0.5 * ONE;
            m
        };
        assert!((purity(&half) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn svd_reconstructs() {
        let a = rand_cmat(5, 3, 33);
        let Svd { u, s, vh } = svd(&a).unwrap();
        let smat = Array2::from_diag(&s.mapv(|x| C64::new(x, 0.0)));
        let back = u.dot(&smat).dot(&vh);
        assert!(max_abs_diff(&a, &back) < 1e-13);
    }

    #[test]
    fn density_check_catches_bad_matrices() {
        let good = eye(2).mapv(|z| 0.5 * z);
        assert!(check_density_matrix(&good, 1e-10).is_ok());
        let mut not_norm = eye(2);
        not_norm[(1, 1)] = 2.0 * ONE;
        assert!(check_density_matrix(&not_norm, 1e-10).is_err());
        let mut neg = CMat::zeros((2, 2));
        neg[(0, 0)] = 1.5 * ONE;
        neg[(1, 1)] = -0.5 * ONE;
        assert!(check_density_matrix(&neg, 1e-10).is_err());
    }
}
