//! CSV, JSON and binary-cache output. All writers are deterministic: fixed
//! column orders, shortest-roundtrip float formatting, no timestamps.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::lattice::ModelSpec;
use crate::observables::CorrelationTensor;
use crate::spectral::{SpectralResult, StateClass};
use crate::wannier::WannierSet;

/// Content hash of a model at one phase, used as the cache key.
pub fn spec_hash(spec: &ModelSpec, phi: f64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_string(spec).expect("spec serializes").as_bytes());
    hasher.update(phi.to_le_bytes());
    let digest = hasher.finalize();
    digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
}

pub fn write_spectral_csv(path: &Path, result: &SpectralResult) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index,energy,class,interaction,g2")?;
    for k in 0..result.len() {
        let class = result
            .classification
            .get(k)
            .copied()
            .unwrap_or(StateClass::Unclassified);
        let d = result.interaction.get(k).copied().unwrap_or(f64::NAN);
        let g2 = result.g2.get(k).copied().unwrap_or(f64::NAN);
        writeln!(
            w,
            "{},{},{},{},{}",
            k,
            result.energies[k],
            class.label(),
            d,
            g2
        )?;
    }
    Ok(())
}

/// Long-format density time series: t, site (1-based), value.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,site,density")?;
    for (t, rho) in traj.times.iter().zip(&traj.densities) {
        for (j, v) in rho.iter().enumerate() {
            writeln!(w, "{},{},{}", t, j + 1, v)?;
        }
    }
    Ok(())
}

/// Per-sample scalar series of a trajectory.
pub fn write_trajectory_series_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,com_raw,com_transport,current_sum,norm,pair_site")?;
    for i in 0..traj.times.len() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            traj.times[i],
            traj.com_raw[i],
            traj.com_transport[i],
            traj.current_sum[i],
            traj.norms[i],
            traj.pair_sites[i]
        )?;
    }
    Ok(())
}

/// Bond currents over time: t, bond (1-based), value.
pub fn write_currents_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,bond,current")?;
    for (t, q) in traj.times.iter().zip(&traj.currents) {
        for (j, v) in q.iter().enumerate() {
            writeln!(w, "{},{},{}", t, j + 1, v)?;
        }
    }
    Ok(())
}

pub fn write_profile_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "site,value")?;
    for (j, v) in values.iter().enumerate() {
        writeln!(w, "{},{}", j + 1, v)?;
    }
    Ok(())
}

/// Generic table with a header row.
pub fn write_table_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_correlation_csv(path: &Path, tensor: &CorrelationTensor) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let m = tensor.m;
    if tensor.order == 2 {
        writeln!(w, "i,j,value")?;
        for i in 0..m {
            for j in 0..m {
                writeln!(w, "{},{},{}", i + 1, j + 1, tensor.get2(i, j))?;
            }
        }
    } else {
        writeln!(w, "i,j,k,value")?;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    writeln!(w, "{},{},{},{}", i + 1, j + 1, k + 1, tensor.get3(i, j, k))?;
                }
            }
        }
    }
    Ok(())
}

/// Wannier states as (basis index, re, im) rows plus a JSON sidecar with
/// the centers.
pub fn write_wannier(csv_path: &Path, json_path: &Path, set: &WannierSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(csv_path)?);
    writeln!(w, "state,basis_index,re,im")?;
    for (s, v) in set.states.iter().enumerate() {
        for (i, amp) in v.iter().enumerate() {
            if amp.norm_sqr() > 1e-24 {
                writeln!(w, "{},{},{},{}", s, i, amp.re, amp.im)?;
            }
        }
    }
    let sidecar = serde_json::json!({
        "centers": set.centers,
        "near_degenerate": set.near_degenerate,
        "count": set.len(),
    });
    let mut jw = BufWriter::new(File::create(json_path)?);
    writeln!(jw, "{}", serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

const CACHE_MAGIC: &[u8; 8] = b"BICSPEC1";

/// Compact binary cache of a spectral result, keyed by [`spec_hash`].
pub fn save_spectral_cache(path: &Path, key: &str, result: &SpectralResult) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    let key_bytes = key.as_bytes();
    w.write_all(&(key_bytes.len() as u64).to_le_bytes())?;
    w.write_all(key_bytes)?;
    let n = result.len() as u64;
    let dim = result.eigenvectors.nrows() as u64;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&dim.to_le_bytes())?;
    for e in &result.energies {
        w.write_all(&e.to_le_bytes())?;
    }
    for c in 0..result.len() {
        for r in 0..result.eigenvectors.nrows() {
            let z = result.eigenvectors[(r, c)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Load a cached spectral result; fails when the stored key differs.
pub fn load_spectral_cache(path: &Path, key: &str) -> Result<Option<SpectralResult>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(_) => return Ok(None),
    };
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Ok(None);
    }
    let mut len8 = [0u8; 8];
    r.read_exact(&mut len8)?;
    let key_len = u64::from_le_bytes(len8) as usize;
    let mut key_bytes = vec![0u8; key_len];
    r.read_exact(&mut key_bytes)?;
    if key_bytes != key.as_bytes() {
        return Ok(None);
    }
    r.read_exact(&mut len8)?;
    let n = u64::from_le_bytes(len8) as usize;
    r.read_exact(&mut len8)?;
    let dim = u64::from_le_bytes(len8) as usize;
    let mut energies = vec![0.0; n];
    let mut f8 = [0u8; 8];
    for e in &mut energies {
        r.read_exact(&mut f8)?;
        *e = f64::from_le_bytes(f8);
    }
    let mut vectors = ndarray::Array2::default((dim, n));
    for c in 0..n {
        for row in 0..dim {
            r.read_exact(&mut f8)?;
            let re = f64::from_le_bytes(f8);
            r.read_exact(&mut f8)?;
            let im = f64::from_le_bytes(f8);
            vectors[(row, c)] = Complex64::new(re, im);
        }
    }
    Ok(Some(SpectralResult {
        energies,
        eigenvectors: vectors,
        classification: Vec::new(),
        interaction: Vec::new(),
        g2: Vec::new(),
        residual_sample: 0.0,
    }))
}
