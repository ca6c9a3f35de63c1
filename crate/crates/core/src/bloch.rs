//! Co-translational momentum sectors and multiparticle Bloch bands.
//!
//! Under periodic boundary conditions with a q-site unit cell, the
//! Hamiltonian commutes with the translation T_q that shifts every particle
//! by one cell, so the spectrum splits into L = M/q sectors labeled by the
//! center-of-mass momentum kappa = 2 pi l / L. Sector bases are built from
//! translation orbits of Fock states,
//!
//! ```text
//! |rep, kappa> = d^{-1/2} sum_{r=0}^{d-1} e^{-i kappa r} T_q^r |rep>
//! ```
//!
//! where d | L is the orbit period and kappa d = 0 mod 2 pi selects the
//! compatible sectors. Each sector carries its explicit isometry into the
//! full Fock space, which keeps the construction exactly unitary and makes
//! lifting sector eigenvectors trivial.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{FockBasis, HamiltonianMatrix, ModelSpec, StateSpace};
use crate::spectral::{classify_interaction, eigh, interaction_expectation, StateClass};

/// One momentum sector: orbit representatives and the isometry columns.
#[derive(Debug, Clone)]
pub struct MomentumSector {
    /// Sector index l, with kappa = 2 pi l / L.
    pub l: usize,
    /// Crystal momentum of the unit-cell translation.
    pub kappa: f64,
    /// Orbit representative (lexicographic minimum of its orbit) per basis
    /// vector, as indices into the full basis.
    pub representatives: Vec<usize>,
    /// Orbit period of each representative.
    pub periods: Vec<usize>,
    /// Isometry B into the full Fock space, dim_full x dim_sector; columns
    /// are orthonormal.
    pub isometry: Array2<Complex64>,
}

impl MomentumSector {
    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    /// Lift a sector vector into the full Fock basis.
    pub fn lift(&self, v: &[Complex64]) -> Vec<Complex64> {
        let full = self.isometry.nrows();
        let mut out = vec![Complex64::default(); full];
        for (c, amp) in v.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            for r in 0..full {
                let b = self.isometry[(r, c)];
                if b.norm_sqr() != 0.0 {
                    out[r] += b * amp;
                }
            }
        }
        out
    }
}

/// Orbits of the unit-cell translation over the full basis. Returns, per
/// orbit, the representative index and the orbit period.
fn translation_orbits(basis: &FockBasis, q: usize) -> Vec<(usize, usize)> {
    let dim = basis.dim();
    let mut seen = vec![false; dim];
    let mut orbits = Vec::new();
    for k in 0..dim {
        if seen[k] {
            continue;
        }
        let mut orbit = vec![k];
        seen[k] = true;
        let mut current = basis.state(k).translated(q);
        loop {
            let idx = basis.index_of(&current).expect("translation left the basis");
            if idx == k {
                break;
            }
            seen[idx] = true;
            orbit.push(idx);
            current = current.translated(q);
        }
        // representative: the lexicographically smallest member, which for
        // the descending basis order is the largest index
        let rep = *orbit.iter().max().unwrap();
        orbits.push((rep, orbit.len()));
    }
    orbits
}

/// Build all L momentum sectors of the translation T_q.
pub fn build_sectors(spec: &ModelSpec, basis: &FockBasis) -> Result<Vec<MomentumSector>> {
    if spec.boundary != crate::lattice::Boundary::Periodic {
        return Err(Error::RequiresPeriodic);
    }
    let q = spec.cell_size();
    let cells = spec.unit_cells()?;
    let orbits = translation_orbits(basis, q);
    let dim = basis.dim();
    let mut sectors = Vec::with_capacity(cells);
    for l in 0..cells {
        let kappa = 2.0 * std::f64::consts::PI * l as f64 / cells as f64;
        let mut representatives = Vec::new();
        let mut periods = Vec::new();
        // orbit of period d joins sectors with l d = 0 mod L
        for &(rep, d) in &orbits {
            if (l * d) % cells == 0 {
                representatives.push(rep);
                periods.push(d);
            }
        }
        let mut isometry = Array2::default((dim, representatives.len()));
        for (c, (&rep, &d)) in representatives.iter().zip(&periods).enumerate() {
            let norm = 1.0 / (d as f64).sqrt();
            let mut state = basis.state(rep).clone();
            for r in 0..d {
                let idx = basis.index_of(&state).unwrap();
                let phase = Complex64::from_polar(norm, -kappa * r as f64);
                isometry[(idx, c)] = phase;
                state = state.translated(q);
            }
        }
        sectors.push(MomentumSector {
            l,
            kappa,
            representatives,
            periods,
            isometry,
        });
    }
    Ok(sectors)
}

/// Sector block of the Hamiltonian, B+ H B.
pub fn block_hamiltonian(
    h: &HamiltonianMatrix,
    sector: &MomentumSector,
) -> Result<Array2<Complex64>> {
    if h.spec.has_disorder() {
        return Err(Error::RequiresCleanLattice);
    }
    let dim = h.dim();
    let k = sector.dim();
    // H B (sparse x dense), then B+ (H B)
    let mut hb = Array2::<Complex64>::default((dim, k));
    let cols: Vec<Vec<Complex64>> = (0..k)
        .into_par_iter()
        .map(|c| {
            let col: Vec<Complex64> = (0..dim).map(|r| sector.isometry[(r, c)]).collect();
            let mut out = vec![Complex64::default(); dim];
            h.matrix.matvec(&col, &mut out);
            out
        })
        .collect();
    for (c, col) in cols.iter().enumerate() {
        for r in 0..dim {
            hb[(r, c)] = col[r];
        }
    }
    let mut block = Array2::<Complex64>::default((k, k));
    for a in 0..k {
        for b in 0..k {
            let mut acc = Complex64::default();
            for r in 0..dim {
                acc += sector.isometry[(r, a)].conj() * hb[(r, b)];
            }
            block[(a, b)] = acc;
        }
    }
    Ok(block)
}

/// Eigen-decomposed sector at one modulation phase.
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub l: usize,
    pub kappa: f64,
    /// Ascending sector eigenvalues.
    pub energies: Vec<f64>,
    /// Eigenvectors lifted to the full Fock basis, one column per state.
    pub vectors: Array2<Complex64>,
    /// Raw sector-block eigenvectors (coefficients over the orbit
    /// representatives); these are the periodic Bloch factors used for
    /// momentum-direction overlaps.
    pub block_vectors: Array2<Complex64>,
    /// Orbit representative (full-basis index) per block row.
    pub representatives: Vec<usize>,
    /// Interaction expectation D per state.
    pub interaction: Vec<f64>,
    /// Bound-cluster class per state.
    pub classification: Vec<StateClass>,
}

/// Diagonalize every sector at the given phase; states come back lifted to
/// the full basis and classified.
pub fn sector_spectra(
    spec: &ModelSpec,
    basis: &FockBasis,
    sectors: &[MomentumSector],
    phi: f64,
) -> Result<Vec<SectorSpectrum>> {
    let h = crate::lattice::build_hamiltonian(spec, basis, phi)?;
    let n_particles = spec.n;
    sectors
        .par_iter()
        .map(|sector| {
            let block = block_hamiltonian(&h, sector)?;
            let (energies, vecs) = eigh(block.view())?;
            let dim = basis.dim();
            let k = sector.dim();
            let mut lifted = Array2::default((dim, k));
            for c in 0..k {
                let col: Vec<Complex64> = (0..k).map(|r| vecs[(r, c)]).collect();
                let full = sector.lift(&col);
                for r in 0..dim {
                    lifted[(r, c)] = full[r];
                }
            }
            let interaction: Vec<f64> = (0..k)
                .map(|c| {
                    let v: Vec<Complex64> = lifted.column(c).to_vec();
                    interaction_expectation(&v, basis)
                })
                .collect();
            let classification = interaction
                .iter()
                .map(|&d| classify_interaction(d, n_particles))
                .collect();
            Ok(SectorSpectrum {
                l: sector.l,
                kappa: sector.kappa,
                energies,
                vectors: lifted,
                block_vectors: vecs,
                representatives: sector.representatives.clone(),
                interaction,
                classification,
            })
        })
        .collect()
}

/// Overlap of periodic Bloch factors between two sector states, possibly
/// from different momentum sectors: the sum of conj(a) b over the orbit
/// representatives the two sectors share. Within one sector this is the
/// plain block inner product.
pub fn bloch_factor_overlap(
    a: &SectorSpectrum,
    col_a: usize,
    b: &SectorSpectrum,
    col_b: usize,
) -> Complex64 {
    if a.l == b.l {
        let mut acc = Complex64::default();
        for r in 0..a.representatives.len() {
            acc += a.block_vectors[(r, col_a)].conj() * b.block_vectors[(r, col_b)];
        }
        return acc;
    }
    let lookup: std::collections::HashMap<usize, usize> = b
        .representatives
        .iter()
        .enumerate()
        .map(|(pos, &rep)| (rep, pos))
        .collect();
    let mut acc = Complex64::default();
    for (ra, &rep) in a.representatives.iter().enumerate() {
        if let Some(&rb) = lookup.get(&rep) {
            acc += a.block_vectors[(ra, col_a)].conj() * b.block_vectors[(rb, col_b)];
        }
    }
    acc
}

/// Which band of which class a caller wants tracked across the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandSelection {
    /// k-th band from the top of the given class (0 = highest band).
    FromTopOfClass(StateClass, usize),
    /// k-th band from the bottom of the given class.
    FromBottomOfClass(StateClass, usize),
    /// k-th band of the whole sector spectrum, from the top.
    FromTop(usize),
}

/// Index of the selected state inside one sector spectrum, together with
/// its gap to the neighboring states.
pub fn select_band(spectrum: &SectorSpectrum, selection: BandSelection) -> Result<(usize, f64)> {
    let k = spectrum.energies.len();
    let members: Vec<usize> = match selection {
        BandSelection::FromTop(_) => (0..k).collect(),
        BandSelection::FromTopOfClass(class, _) | BandSelection::FromBottomOfClass(class, _) => {
            (0..k)
                .filter(|&i| spectrum.classification[i] == class)
                .collect()
        }
    };
    if members.is_empty() {
        return Err(Error::EmptyBandSelection);
    }
    let idx = match selection {
        BandSelection::FromTop(o) | BandSelection::FromTopOfClass(_, o) => {
            if o >= members.len() {
                return Err(Error::EmptyBandSelection);
            }
            members[members.len() - 1 - o]
        }
        BandSelection::FromBottomOfClass(_, o) => {
            if o >= members.len() {
                return Err(Error::EmptyBandSelection);
            }
            members[o]
        }
    };
    let e = spectrum.energies[idx];
    let mut gap = f64::INFINITY;
    if idx > 0 {
        gap = gap.min(e - spectrum.energies[idx - 1]);
    }
    if idx + 1 < k {
        gap = gap.min(spectrum.energies[idx + 1] - e);
    }
    Ok((idx, gap))
}

/// One tracked band over the full (kappa, phi) grid: energies, the
/// gauge-aligned full-space eigenvectors, and the minimum gap seen.
#[derive(Debug, Clone)]
pub struct BlochBand {
    pub selection_energy: Vec<Vec<f64>>, // [phi][kappa]
    pub vectors: Vec<Vec<Vec<Complex64>>>, // [phi][kappa][component]
    pub kappas: Vec<f64>,
    pub phis: Vec<f64>,
    pub min_gap: f64,
    pub min_gap_at: (usize, usize), // (kappa index, phi index)
}

impl BlochBand {
    pub fn is_gapped(&self, tol: f64) -> bool {
        self.min_gap > tol
    }
}

/// Track one band over a phi grid, with eigenvector phases aligned to the
/// previous grid point by maximal overlap (the gauge only matters for
/// downstream Wannier assembly; Chern links are gauge invariant).
pub fn bands_over_grid(
    spec: &ModelSpec,
    basis: &FockBasis,
    sectors: &[MomentumSector],
    phis: &[f64],
    selection: BandSelection,
) -> Result<BlochBand> {
    let mut energies = Vec::with_capacity(phis.len());
    let mut vectors: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(phis.len());
    let kappas: Vec<f64> = sectors.iter().map(|s| s.kappa).collect();
    let mut min_gap = f64::INFINITY;
    let mut min_gap_at = (0, 0);
    for (pi, &phi) in phis.iter().enumerate() {
        let spectra = sector_spectra(spec, basis, sectors, phi)?;
        let mut row_e = Vec::with_capacity(spectra.len());
        let mut row_v = Vec::with_capacity(spectra.len());
        for (ki, sp) in spectra.iter().enumerate() {
            let (idx, gap) = select_band(sp, selection)?;
            if gap < min_gap {
                min_gap = gap;
                min_gap_at = (ki, pi);
            }
            let mut v: Vec<Complex64> = sp.vectors.column(idx).to_vec();
            if pi > 0 {
                align_phase(&mut v, &vectors[pi - 1][ki]);
            }
            row_e.push(sp.energies[idx]);
            row_v.push(v);
        }
        energies.push(row_e);
        vectors.push(row_v);
    }
    Ok(BlochBand {
        selection_energy: energies,
        vectors,
        kappas,
        phis: phis.to_vec(),
        min_gap,
        min_gap_at,
    })
}

/// Rotate the global phase of v so that <reference|v> is real positive.
pub fn align_phase(v: &mut [Complex64], reference: &[Complex64]) {
    let overlap: Complex64 = reference.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    if overlap.norm() > 1e-14 {
        let phase = overlap / overlap.norm();
        for x in v.iter_mut() {
            *x /= phase;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_basis, build_hamiltonian, Beta, Boundary, ModelSpec};
    use approx::assert_abs_diff_eq;

    fn periodic_spec(m: usize, n: usize) -> ModelSpec {
        ModelSpec::new(m, n, 1.0, 20.0, 6.0, Beta { p: 1, q: 3 }, 0.3, Boundary::Periodic)
    }

    #[test]
    fn single_particle_small_cells() {
        // M = 3, q = 3: a single sector holding all 3 states
        let spec = periodic_spec(3, 1);
        let basis = build_basis(3, 1).unwrap();
        let sectors = build_sectors(&spec, &basis).unwrap();
        assert_eq!(sectors.len(), 1);
        assert_eq!(sectors[0].dim(), 3);

        // M = 6, q = 3: two sectors of dimension 3 (orbits enumerated by hand:
        // each single-particle state pairs with its 3-site translate)
        let spec = periodic_spec(6, 1);
        let basis = build_basis(6, 1).unwrap();
        let sectors = build_sectors(&spec, &basis).unwrap();
        assert_eq!(sectors.len(), 2);
        assert_eq!(sectors[0].dim(), 3);
        assert_eq!(sectors[1].dim(), 3);
    }

    #[test]
    fn sector_dimensions_sum_to_full() {
        let spec = periodic_spec(12, 3);
        let basis = build_basis(12, 3).unwrap();
        let sectors = build_sectors(&spec, &basis).unwrap();
        let total: usize = sectors.iter().map(|s| s.dim()).sum();
        assert_eq!(total, basis.dim());
    }

    #[test]
    fn isometry_columns_orthonormal() {
        let spec = periodic_spec(6, 2);
        let basis = build_basis(6, 2).unwrap();
        let sectors = build_sectors(&spec, &basis).unwrap();
        for s in &sectors {
            let b = &s.isometry;
            for a in 0..s.dim() {
                for c in 0..s.dim() {
                    let mut g = Complex64::default();
                    for r in 0..basis.dim() {
                        g += b[(r, a)].conj() * b[(r, c)];
                    }
                    let expect = if a == c { 1.0 } else { 0.0 };
                    assert!((g - expect).norm() < 1e-10, "gram defect at ({a},{c})");
                }
            }
        }
    }

    #[test]
    fn orbit_closure() {
        let spec = periodic_spec(12, 2);
        let basis = build_basis(12, 2).unwrap();
        let cells = spec.unit_cells().unwrap();
        let sectors = build_sectors(&spec, &basis).unwrap();
        for s in &sectors {
            for (&rep, &d) in s.representatives.iter().zip(&s.periods) {
                assert_eq!(cells % d, 0, "period must divide L");
                let mut state = basis.state(rep).clone();
                for _ in 0..cells {
                    state = state.translated(spec.cell_size());
                }
                assert_eq!(&state, basis.state(rep), "T_q^L must close the orbit");
            }
        }
    }

    #[test]
    fn open_boundary_rejected() {
        let mut spec = periodic_spec(6, 2);
        spec.boundary = Boundary::Open;
        let basis = build_basis(6, 2).unwrap();
        assert!(matches!(
            build_sectors(&spec, &basis),
            Err(Error::RequiresPeriodic)
        ));
    }

    #[test]
    fn merged_block_spectra_equal_full_spectrum() {
        let spec = periodic_spec(9, 3);
        let basis = build_basis(9, 3).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.3).unwrap();
        let full = crate::spectral::diagonalize(&h).unwrap();
        let sectors = build_sectors(&spec, &basis).unwrap();
        let mut merged: Vec<f64> = Vec::new();
        for s in &sectors {
            let block = block_hamiltonian(&h, s).unwrap();
            let (e, _) = eigh(block.view()).unwrap();
            merged.extend(e);
        }
        merged.sort_by(f64::total_cmp);
        assert_eq!(merged.len(), full.energies.len());
        for (a, b) in merged.iter().zip(&full.energies) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-8);
        }
    }

    #[test]
    fn single_particle_dispersion() {
        // free particle: block eigenvalue at kappa folds -2J cos(k) onto the
        // reduced zone; check the full set matches the plane-wave energies
        let mut spec = periodic_spec(12, 1);
        spec.u0 = 0.0;
        spec.delta = 0.0;
        let basis = build_basis(12, 1).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.0).unwrap();
        let sectors = build_sectors(&spec, &basis).unwrap();
        let mut merged: Vec<f64> = Vec::new();
        for s in &sectors {
            let block = block_hamiltonian(&h, s).unwrap();
            let (e, _) = eigh(block.view()).unwrap();
            merged.extend(e);
        }
        merged.sort_by(f64::total_cmp);
        let mut expect: Vec<f64> = (0..12)
            .map(|k| -2.0 * (2.0 * std::f64::consts::PI * k as f64 / 12.0).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in merged.iter().zip(&expect) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
    }

    #[test]
    fn disorder_blocks_sector_use() {
        let mut spec = periodic_spec(6, 2);
        spec.disorder_strength = 1.0;
        spec.disorder_profile = crate::lattice::seeded_disorder_profile(6, 5);
        let basis = build_basis(6, 2).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.3).unwrap();
        let clean = {
            let mut s = spec.clone();
            s.disorder_strength = 0.0;
            s.disorder_profile.clear();
            s
        };
        let sectors = build_sectors(&clean, &basis).unwrap();
        assert!(matches!(
            block_hamiltonian(&h, &sectors[0]),
            Err(Error::RequiresCleanLattice)
        ));
    }
}
