//! Maximally localized multiparticle Wannier states.
//!
//! For a selected set of Bloch bands the projected position operator
//! P x P is assembled in the Bloch-state basis, with x = N^-1 sum_j j n_j
//! (linear 1-based site coordinate, kept linear also on the ring). Its
//! eigenstates are the maximally localized Wannier states of the manifold:
//! the off-diagonal part Omega_V of the spread functional vanishes in this
//! basis, and the remaining Omega_I is invariant under gauge remixes of the
//! same manifold.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::lattice::StateSpace;
use crate::spectral::eigh;

/// Diagonal of the position operator x = N^-1 sum_j j n_j per basis state.
pub fn position_diagonal<S: StateSpace>(space: &S) -> Vec<f64> {
    let n = space.states()[0].particles() as f64;
    space
        .states()
        .iter()
        .map(|s| {
            s.0.iter()
                .enumerate()
                .map(|(j, &occ)| (j as f64 + 1.0) * occ as f64)
                .sum::<f64>()
                / n
        })
        .collect()
}

/// Matrix elements <v_a| x |v_b> of the position operator over a set of
/// full-space vectors (typically the Bloch states of the selected bands).
pub fn projected_position<S: StateSpace>(
    manifold: &[Vec<Complex64>],
    space: &S,
) -> Result<Array2<Complex64>> {
    if manifold.is_empty() {
        return Err(Error::EmptyBandSelection);
    }
    let x = position_diagonal(space);
    let k = manifold.len();
    let mut out = Array2::default((k, k));
    for a in 0..k {
        for b in a..k {
            let mut acc = Complex64::default();
            for i in 0..space.dim() {
                acc += manifold[a][i].conj() * x[i] * manifold[b][i];
            }
            out[(a, b)] = acc;
            out[(b, a)] = acc.conj();
        }
    }
    Ok(out)
}

/// A Wannier set over one or more bands: orthonormal states in the full
/// basis with their position-operator centers.
#[derive(Debug, Clone)]
pub struct WannierSet {
    pub states: Vec<Vec<Complex64>>,
    /// Ascending eigenvalues of the projected position operator, in sites.
    pub centers: Vec<f64>,
    /// Set when two centers are closer than the degeneracy threshold; the
    /// tie is then broken deterministically by energy expectation.
    pub near_degenerate: bool,
}

impl WannierSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

const CENTER_DEGENERACY: f64 = 1e-6;

/// Maximally localized Wannier states of the manifold: eigenstates of the
/// projected position operator lifted back to the Fock basis.
///
/// `energy_of` supplies the tie-break expectation for near-degenerate
/// centers (pass the Hamiltonian expectation; any deterministic functional
/// works).
pub fn mlws<S: StateSpace>(
    manifold: &[Vec<Complex64>],
    space: &S,
    energy_of: impl Fn(&[Complex64]) -> f64,
) -> Result<WannierSet> {
    let x = projected_position(manifold, space)?;
    let (centers, coeffs) = eigh(x.view())?;
    let k = manifold.len();
    let dim = space.dim();
    let mut states: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for c in 0..k {
        let mut v = vec![Complex64::default(); dim];
        for (a, blochs) in manifold.iter().enumerate() {
            let w = coeffs[(a, c)];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for i in 0..dim {
                v[i] += w * blochs[i];
            }
        }
        // fix the global phase: largest component real positive
        let lead = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let phase = v[lead] / v[lead].norm();
        v.iter_mut().for_each(|z| *z /= phase);
        states.push(v);
    }
    let mut centers = centers;
    let mut near_degenerate = false;
    // deterministic tie-break inside near-degenerate center groups
    let mut i = 0;
    while i < k {
        let mut j = i + 1;
        while j < k && (centers[j] - centers[i]).abs() < CENTER_DEGENERACY {
            j += 1;
        }
        if j - i > 1 {
            near_degenerate = true;
            let mut group: Vec<(f64, Vec<Complex64>, f64)> = (i..j)
                .map(|c| (centers[c], states[c].clone(), energy_of(&states[c])))
                .collect();
            group.sort_by(|a, b| a.2.total_cmp(&b.2));
            for (offset, (ctr, st, _)) in group.into_iter().enumerate() {
                centers[i + offset] = ctr;
                states[i + offset] = st;
            }
        }
        i = j;
    }
    Ok(WannierSet {
        states,
        centers,
        near_degenerate,
    })
}

/// Spread functional of a state set within its own manifold:
/// Omega = sum_m (<x^2>_m - <x>_m^2), Omega_V the off-diagonal position
/// weight, Omega_I = Omega - Omega_V (gauge invariant).
pub fn spread_functional<S: StateSpace>(
    states: &[Vec<Complex64>],
    space: &S,
) -> Result<(f64, f64, f64)> {
    if states.is_empty() {
        return Err(Error::EmptyBandSelection);
    }
    let x = position_diagonal(space);
    let k = states.len();
    let mut omega = 0.0;
    for v in states {
        let mut x1 = 0.0;
        let mut x2 = 0.0;
        for (i, c) in v.iter().enumerate() {
            let w = c.norm_sqr();
            x1 += w * x[i];
            x2 += w * x[i] * x[i];
        }
        omega += x2 - x1 * x1;
    }
    let xm = projected_position(states, space)?;
    let mut omega_v = 0.0;
    for a in 0..k {
        for b in 0..k {
            if a != b {
                omega_v += xm[(a, b)].norm_sqr();
            }
        }
    }
    Ok((omega, omega - omega_v, omega_v))
}

/// Residual of each state outside the span of the manifold (orthonormal
/// manifold assumed); used to check that Wannier states stay inside their
/// band subspace.
pub fn span_residual(states: &[Vec<Complex64>], manifold: &[Vec<Complex64>]) -> f64 {
    let mut worst = 0.0f64;
    for v in states {
        let mut residual = v.clone();
        for b in manifold {
            let overlap: Complex64 = b.iter().zip(v).map(|(p, q)| p.conj() * q).sum();
            for (r, x) in residual.iter_mut().zip(b) {
                *r -= overlap * x;
            }
        }
        let norm: f64 = residual.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(norm);
    }
    worst
}

/// Deterministic Haar-like unitary from a seeded Gaussian matrix (QR sign
/// fixed); used for gauge-invariance checks.
pub fn random_unitary(k: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<Complex64>> = (0..k)
        .map(|_| {
            (0..k)
                .map(|_| {
                    // Box-Muller pairs
                    let u1: f64 = rng.gen_range(1e-12..1.0);
                    let u2: f64 = rng.gen_range(0.0..1.0);
                    let r = (-2.0 * u1.ln()).sqrt();
                    Complex64::from_polar(r, 2.0 * std::f64::consts::PI * u2)
                })
                .collect()
        })
        .collect();
    // modified Gram-Schmidt
    for c in 0..k {
        for _ in 0..2 {
            for p in 0..c {
                let col_p = cols[p].clone();
                let overlap: Complex64 = col_p
                    .iter()
                    .zip(&cols[c])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for (x, u) in cols[c].iter_mut().zip(&col_p) {
                    *x -= overlap * u;
                }
            }
        }
        let norm: f64 = cols[c].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        cols[c].iter_mut().for_each(|x| *x /= norm);
    }
    let mut u = Array2::default((k, k));
    for c in 0..k {
        for r in 0..k {
            u[(r, c)] = cols[c][r];
        }
    }
    u
}

/// Apply a unitary gauge remix to a state set.
pub fn remix(states: &[Vec<Complex64>], u: &Array2<Complex64>) -> Vec<Vec<Complex64>> {
    let k = states.len();
    let dim = states[0].len();
    (0..k)
        .map(|c| {
            let mut v = vec![Complex64::default(); dim];
            for r in 0..k {
                let w = u[(r, c)];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                for i in 0..dim {
                    v[i] += w * states[r][i];
                }
            }
            v
        })
        .collect()
}
