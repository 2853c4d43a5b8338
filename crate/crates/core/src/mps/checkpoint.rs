//! Binary checkpoints for the time-bin solver.
//!
//! The format is a fixed little-endian layout (magic, physical
//! parameters, solver configuration, counters, then every site tensor
//! with its dimensions). All floating-point values are written as raw IEEE
//! bits, so a save/load/save cycle is byte-identical and a resumed run
//! continues on exactly the state that was saved.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

use super::state::{Site, TensorTrainState};
use super::TimeBinConfig;

const MAGIC: &[u8; 8] = b"VQTB0001";
const FOOTER: &[u8; 8] = b"VQTBEND\0";

/// Serialize the full solver state to `path`.
pub fn save_checkpoint(state: &TensorTrainState, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;

    let p = &state.params;
    for v in [
        p.omega,
        p.gamma,
        p.gamma_prime,
        p.delta1,
        p.delta2,
        p.dphi,
        p.phi_prime,
        p.tau,
        p.eta,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }

    let c = &state.config;
    w.write_all(&c.dt.to_le_bytes())?;
    let cutoff = c.fock_cutoff.map(|v| v as u64 + 1).unwrap_or(0); // 0 = auto
    w.write_all(&cutoff.to_le_bytes())?;
    w.write_all(&c.svd_tol.to_le_bytes())?;
    w.write_all(&(c.max_bond as u64).to_le_bytes())?;
    w.write_all(&c.t_final.to_le_bytes())?;
    w.write_all(&c.steady_tol.to_le_bytes())?;
    w.write_all(&c.steady_window.to_le_bytes())?;
    w.write_all(&[u8::from(c.stop_at_steady)])?;
    w.write_all(&(c.sample_stride as u64).to_le_bytes())?;

    w.write_all(&state.step.to_le_bytes())?;
    w.write_all(&(state.center as u64).to_le_bytes())?;
    w.write_all(&state.cum_discarded.to_le_bytes())?;
    w.write_all(&state.emitted_total.to_le_bytes())?;
    w.write_all(&(state.max_bond_seen as u64).to_le_bytes())?;

    w.write_all(&(state.sites.len() as u64).to_le_bytes())?;
    for site in &state.sites {
        let (l, pd, rt) = site.dim();
        for d in [l, pd, rt] {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        let std = site.as_standard_layout();
        for z in std.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.write_all(FOOTER)?;
    w.flush()?;
    Ok(())
}

/// Load a state saved by [`save_checkpoint`]. The embedded parameters and
/// configuration are re-validated, and the step unitary is rebuilt from
/// them.
pub fn load_checkpoint(path: &Path) -> Result<TensorTrainState> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 8];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadCheckpoint(format!(
            "bad magic {:02x?}; not a time-bin checkpoint",
            magic
        )));
    }

    let p = SystemParams {
        omega: read_f64(&mut r)?,
        gamma: read_f64(&mut r)?,
        gamma_prime: read_f64(&mut r)?,
        delta1: read_f64(&mut r)?,
        delta2: read_f64(&mut r)?,
        dphi: read_f64(&mut r)?,
        phi_prime: read_f64(&mut r)?,
        tau: read_f64(&mut r)?,
        eta: read_f64(&mut r)?,
    };

    let dt = read_f64(&mut r)?;
    let cutoff_raw = read_u64(&mut r)?;
    let fock_cutoff = if cutoff_raw == 0 {
        None
    } else {
        Some((cutoff_raw - 1) as usize)
    };
    let cfg = TimeBinConfig {
        dt,
        fock_cutoff,
        svd_tol: read_f64(&mut r)?,
        max_bond: read_u64(&mut r)? as usize,
        t_final: read_f64(&mut r)?,
        steady_tol: read_f64(&mut r)?,
        steady_window: read_f64(&mut r)?,
        stop_at_steady: {
            let mut b = [0u8; 1];
            read_exact(&mut r, &mut b)?;
            b[0] != 0
        },
        sample_stride: read_u64(&mut r)? as usize,
    };

    let step = read_u64(&mut r)?;
    let center = read_u64(&mut r)? as usize;
    let cum_discarded = read_f64(&mut r)?;
    let emitted_total = read_f64(&mut r)?;
    let max_bond_seen = read_u64(&mut r)? as usize;

    let n_sites = read_u64(&mut r)? as usize;
    if n_sites < 2 || n_sites > 1_000_000 {
        return Err(Error::BadCheckpoint(format!(
            "implausible site count {n_sites}"
        )));
    }
    let mut sites = Vec::with_capacity(n_sites);
    for _ in 0..n_sites {
        let l = read_u64(&mut r)? as usize;
        let p_dim = read_u64(&mut r)? as usize;
        let rt = read_u64(&mut r)? as usize;
        let n = l
            .checked_mul(p_dim)
            .and_then(|v| v.checked_mul(rt))
            .filter(|&v| v > 0 && v <= 100_000_000)
            .ok_or_else(|| {
                Error::BadCheckpoint(format!("implausible site shape {l}x{p_dim}x{rt}"))
            })?;
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            data.push(C64::new(re, im));
        }
        let site = Site::from_shape_vec((l, p_dim, rt), data)
            .map_err(|e| Error::BadCheckpoint(format!("site shape: {e}")))?;
        sites.push(site);
    }

    let mut footer = [0u8; 8];
    read_exact(&mut r, &mut footer)?;
    if &footer != FOOTER {
        return Err(Error::BadCheckpoint("missing end marker".into()));
    }

    TensorTrainState::from_raw(
        p,
        cfg,
        sites,
        center,
        step,
        cum_discarded,
        emitted_total,
        max_bond_seen,
    )
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::BadCheckpoint(format!("truncated checkpoint: {e}")))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
