//! Chern numbers of multiparticle bands over the (kappa, phi) torus.
//!
//! The Berry curvature is discretized with lattice field strengths: on
//! every plaquette of the momentum-phase grid the link variables combine
//! into F = Im ln(U1 U2 U3* U4*), and C = sum F / 2 pi is an exact integer
//! whenever the tracked states stay gapped. Momentum-direction links use
//! the periodic Bloch factors (sector-block coefficients over orbit
//! representatives; eigenvectors of different sectors are orthogonal in the
//! full space, so the full-space overlap would vanish). Multi-band clusters
//! use the determinant of the overlap matrix.
//!
//! The loop orientation is fixed so that the predicted displacement per
//! pump cycle is C q sites along the positive chain direction, matching the
//! flow of the band's Wannier centers; the test suite pins this down.

use ndarray::Array2;
use num_complex::Complex64;

use crate::bloch::{
    bloch_factor_overlap, sector_spectra, select_band, BandSelection, MomentumSector,
    SectorSpectrum,
};
use crate::error::{Error, Result};
use crate::lattice::{FockBasis, ModelSpec};
use crate::spectral::StateClass;

/// What to integrate over the torus: one tracked band, or the non-Abelian
/// total of a whole bound-cluster class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackedBands {
    Single(BandSelection),
    Cluster(StateClass),
}

#[derive(Debug, Clone)]
pub struct ChernResult {
    pub chern: i64,
    /// Plaquette field strengths, indexed [kappa][phi].
    pub curvature: Array2<f64>,
    /// Smallest energy gap between the tracked states and the rest, over
    /// the whole grid.
    pub min_gap: f64,
    /// Integral before rounding; its distance to `chern` measures grid
    /// admissibility.
    pub raw_sum: f64,
}

/// Indices of the tracked states in one sector spectrum, plus the gap to
/// the complement.
fn tracked_indices(sp: &SectorSpectrum, tracked: TrackedBands) -> Result<(Vec<usize>, f64)> {
    match tracked {
        TrackedBands::Single(sel) => {
            let (idx, gap) = select_band(sp, sel)?;
            Ok((vec![idx], gap))
        }
        TrackedBands::Cluster(class) => {
            let idx: Vec<usize> = (0..sp.energies.len())
                .filter(|&i| sp.classification[i] == class)
                .collect();
            if idx.is_empty() {
                return Err(Error::EmptyBandSelection);
            }
            let mut gap = f64::INFINITY;
            for &i in &idx {
                let e = sp.energies[i];
                for (jdx, &ej) in sp.energies.iter().enumerate() {
                    if !idx.contains(&jdx) {
                        gap = gap.min((ej - e).abs());
                    }
                }
            }
            Ok((idx, gap))
        }
    }
}

/// Overlap link between tracked subspaces at two grid points: det of the
/// Bloch-factor overlap matrix (a scalar product for single bands).
fn link(
    a: &SectorSpectrum,
    idx_a: &[usize],
    b: &SectorSpectrum,
    idx_b: &[usize],
) -> Result<Complex64> {
    if idx_a.len() != idx_b.len() {
        return Err(Error::InvalidModel(format!(
            "tracked cluster has {} states at kappa index {} but {} at {}; \
             cluster Chern needs equal counts on every grid point",
            idx_a.len(),
            a.l,
            idx_b.len(),
            b.l
        )));
    }
    let k = idx_a.len();
    if k == 1 {
        return Ok(bloch_factor_overlap(a, idx_a[0], b, idx_b[0]));
    }
    let mut overlap = faer::Mat::<Complex64>::zeros(k, k);
    for (r, &ia) in idx_a.iter().enumerate() {
        for (c, &ib) in idx_b.iter().enumerate() {
            overlap[(r, c)] = bloch_factor_overlap(a, ia, b, ib);
        }
    }
    Ok(overlap.as_ref().determinant())
}

struct TrackedColumn {
    spectra: Vec<SectorSpectrum>,
    indices: Vec<Vec<usize>>,
    min_gap: f64,
}

fn tracked_column(
    spec: &ModelSpec,
    basis: &FockBasis,
    sectors: &[MomentumSector],
    phi: f64,
    tracked: TrackedBands,
) -> Result<TrackedColumn> {
    let spectra = sector_spectra(spec, basis, sectors, phi)?;
    let mut indices = Vec::with_capacity(spectra.len());
    let mut min_gap = f64::INFINITY;
    for sp in &spectra {
        let (idx, gap) = tracked_indices(sp, tracked)?;
        min_gap = min_gap.min(gap);
        indices.push(idx);
    }
    Ok(TrackedColumn {
        spectra,
        indices,
        min_gap,
    })
}

/// Lattice field-strength Chern number of the tracked band(s) on an
/// n_phi-point phase grid (all L momenta are always used). Refuses when the
/// tracked states touch a neighboring band anywhere on the grid.
pub fn chern_number(
    spec: &ModelSpec,
    basis: &FockBasis,
    sectors: &[MomentumSector],
    tracked: TrackedBands,
    n_phi: usize,
    gap_tol: f64,
) -> Result<ChernResult> {
    assert!(n_phi >= 4, "need a usable phase grid");
    let cells = sectors.len();
    let phis: Vec<f64> = (0..n_phi)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / n_phi as f64)
        .collect();

    let kappa_links = |col: &TrackedColumn| -> Result<Vec<Complex64>> {
        (0..cells)
            .map(|k| {
                let kc = (k + 1) % cells;
                link(
                    &col.spectra[k],
                    &col.indices[k],
                    &col.spectra[kc],
                    &col.indices[kc],
                )
            })
            .collect()
    };
    let phi_links = |a: &TrackedColumn, b: &TrackedColumn| -> Result<Vec<Complex64>> {
        (0..cells)
            .map(|k| link(&a.spectra[k], &a.indices[k], &b.spectra[k], &b.indices[k]))
            .collect()
    };

    let first = tracked_column(spec, basis, sectors, phis[0], tracked)?;
    let mut min_gap = first.min_gap;
    let mut gap_phi_index = 0usize;
    let mut u_kappa: Vec<Vec<Complex64>> = Vec::with_capacity(n_phi);
    let mut u_phi: Vec<Vec<Complex64>> = Vec::with_capacity(n_phi);
    let mut previous = first;
    for (pi, &phi) in phis.iter().enumerate().skip(1) {
        let current = tracked_column(spec, basis, sectors, phi, tracked)?;
        if current.min_gap < min_gap {
            min_gap = current.min_gap;
            gap_phi_index = pi;
        }
        u_kappa.push(kappa_links(&previous)?);
        u_phi.push(phi_links(&previous, &current)?);
        previous = current;
    }
    // close the torus in phi: H(phi + 2 pi) = H(phi)
    let first = tracked_column(spec, basis, sectors, phis[0], tracked)?;
    u_kappa.push(kappa_links(&previous)?);
    u_phi.push(phi_links(&previous, &first)?);

    if min_gap < gap_tol {
        return Err(Error::GaplessBand {
            min_gap,
            kappa_index: 0,
            phi_index: gap_phi_index,
        });
    }

    let mut curvature = Array2::zeros((cells, n_phi));
    let mut total = 0.0;
    for pi in 0..n_phi {
        let pj = (pi + 1) % n_phi;
        for k in 0..cells {
            let kc = (k + 1) % cells;
            let w = u_kappa[pi][k] * u_phi[pi][kc] * u_kappa[pj][k].conj() * u_phi[pi][k].conj();
            if w.norm() < 1e-14 {
                return Err(Error::GaplessBand {
                    min_gap: 0.0,
                    kappa_index: k,
                    phi_index: pi,
                });
            }
            // loop orientation chosen so that C q equals the Wannier-center
            // drift per cycle in sites (positive = toward larger site index)
            let f = -w.arg();
            curvature[(k, pi)] = f;
            total += f;
        }
    }
    let raw_sum = total / (2.0 * std::f64::consts::PI);
    let chern = raw_sum.round() as i64;
    if (raw_sum - chern as f64).abs() > 1e-6 {
        return Err(Error::WindowNotConverged(format!(
            "field strength sum {raw_sum} is not an integer; refine the grid"
        )));
    }
    Ok(ChernResult {
        chern,
        curvature,
        min_gap,
        raw_sum,
    })
}

/// Quantized displacement per pump cycle, in sites.
pub fn predicted_displacement(chern: i64, q: usize) -> f64 {
    (chern * q as i64) as f64
}
