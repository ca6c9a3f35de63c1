//! Exact application of exp(-i H dt) to a state vector.
//!
//! Each step freezes the Hamiltonian (at the midpoint phase for driven
//! runs) and applies its exponential through a Chebyshev expansion
//!
//! ```text
//! exp(-i dt (c + w X)) = e^{-i c dt} [ J_0(w dt) + 2 sum_k (-i)^k J_k(w dt) T_k(X) ]
//! ```
//!
//! with X = (H - c)/w scaled into [-1, 1] by Gershgorin bounds. The series
//! is truncated once the Bessel coefficients fall below 1e-16, so the step
//! is exact to machine precision for the frozen H and exactly reproduces a
//! dense eigendecomposition exponential at a fraction of the cost. The
//! scheme is second order in the drive and unitary up to the truncation
//! tolerance.

use num_complex::Complex64;

use crate::lattice::{interaction_profile, HamiltonianMatrix, ModelSpec, StateSpace};
use crate::sparse::CsrMatrix;

const COEFF_TOL: f64 = 1e-16;

/// Bessel functions J_0..J_kmax at x, by Miller's downward recurrence with
/// the J_0 + 2(J_2 + J_4 + ...) = 1 normalization.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    assert!(x >= 0.0);
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = kmax + 16 + (1.3 * x) as usize;
    let mut jp = 0.0f64; // J_{k+2}
    let mut j = 1e-280f64; // J_{k+1} seed
    let mut even_sum = 0.0f64;
    for k in (0..start).rev() {
        let jm = (2.0 * (k as f64 + 1.0) / x) * j - jp;
        jp = j;
        j = jm; // J_k
        if k >= 2 && k % 2 == 0 {
            even_sum += j;
        }
        if k <= kmax {
            out[k] = j;
        }
        if j.abs() > 1e250 {
            let scale = 1e-250;
            j *= scale;
            jp *= scale;
            even_sum *= scale;
            out.iter_mut().for_each(|v| *v *= scale);
        }
    }
    let norm = j + 2.0 * even_sum; // j holds J_0
    for v in &mut out {
        *v /= norm;
    }
    out
}

/// Chebyshev coefficients of exp(-i dt lambda) over lambda in [lo, hi]:
/// returns (center, half_width, coefficients c_k) such that
/// exp(-i dt lambda) = sum_k c_k T_k((lambda - center)/half_width).
fn exp_coefficients(lo: f64, hi: f64, dt: f64) -> (f64, f64, Vec<Complex64>) {
    let center = 0.5 * (lo + hi);
    let half = (0.5 * (hi - lo)).max(1e-12) * 1.0001 + 1e-12;
    let x = (half * dt.abs()).max(1e-12);
    let kmax = (x + 40.0 + 8.0 * x.powf(1.0 / 3.0)) as usize;
    let bessel = bessel_j_sequence(x, kmax);
    let phase = Complex64::from_polar(1.0, -center * dt);
    let sign = if dt >= 0.0 { 1.0 } else { -1.0 };
    let mut coeffs = Vec::with_capacity(kmax + 1);
    let mut top = 0usize;
    for (k, &jk) in bessel.iter().enumerate() {
        // (-i)^k for dt > 0, (+i)^k for dt < 0 (J_k(|x|) with odd-k sign flip)
        let ik = match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -sign),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, sign),
        };
        let factor = if k == 0 { 1.0 } else { 2.0 };
        coeffs.push(phase * ik * factor * jk);
        if jk.abs() > COEFF_TOL {
            top = k;
        }
    }
    coeffs.truncate(top + 2);
    (center, half, coeffs)
}

/// Apply sum_k coeffs[k] T_k(X) to x, where X v = (op(v) - center v)/half.
pub fn chebyshev_apply<F>(
    op: &F,
    center: f64,
    half: f64,
    coeffs: &[Complex64],
    x: &[Complex64],
) -> Vec<Complex64>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let dim = x.len();
    let mut t_prev = x.to_vec(); // T_0 x
    let mut y: Vec<Complex64> = t_prev.iter().map(|v| coeffs[0] * v).collect();
    if coeffs.len() == 1 {
        return y;
    }
    let mut scratch = vec![Complex64::default(); dim];
    // T_1 x
    op(&t_prev, &mut scratch);
    let mut t_cur: Vec<Complex64> = scratch
        .iter()
        .zip(&t_prev)
        .map(|(hv, v)| (hv - center * v) / half)
        .collect();
    for (yi, ti) in y.iter_mut().zip(&t_cur) {
        *yi += coeffs[1] * ti;
    }
    for ck in coeffs.iter().skip(2) {
        op(&t_cur, &mut scratch);
        for i in 0..dim {
            let next = 2.0 * (scratch[i] - center * t_cur[i]) / half - t_prev[i];
            t_prev[i] = t_cur[i];
            t_cur[i] = next;
        }
        for (yi, ti) in y.iter_mut().zip(&t_cur) {
            *yi += ck * ti;
        }
    }
    y
}

/// Propagator for a fixed Hamiltonian.
pub struct StaticPropagator {
    matrix: CsrMatrix,
    bounds: (f64, f64),
}

impl StaticPropagator {
    pub fn new(h: &HamiltonianMatrix) -> Self {
        let bounds = h.matrix.gershgorin_bounds(None);
        StaticPropagator {
            matrix: h.matrix.clone(),
            bounds,
        }
    }

    /// psi <- exp(-i H dt) psi
    pub fn advance(&self, psi: &mut Vec<Complex64>, dt: f64) {
        let (center, half, coeffs) = exp_coefficients(self.bounds.0, self.bounds.1, dt);
        let out = chebyshev_apply(
            &|x: &[Complex64], y: &mut [Complex64]| self.matrix.matvec(x, y),
            center,
            half,
            &coeffs,
            psi,
        );
        *psi = out;
    }
}

/// Propagator for the driven Hamiltonian H(phi): the hopping and disorder
/// parts are static, only the interaction diagonal follows phi, so each
/// step rebuilds an O(dim) diagonal and reuses fixed Chebyshev
/// coefficients valid for every phase.
pub struct DrivenPropagator {
    hop: CsrMatrix,
    static_diag: Vec<f64>,
    pair_terms: Vec<Vec<(u32, f64)>>,
    spec: ModelSpec,
    bounds: (f64, f64),
}

impl DrivenPropagator {
    pub fn new<S: StateSpace>(spec: &ModelSpec, space: &S) -> crate::error::Result<Self> {
        spec.validate()?;
        // hopping-only Hamiltonian: strip interaction and disorder
        let mut hop_spec = spec.clone();
        hop_spec.u0 = 0.0;
        hop_spec.delta = 0.0;
        hop_spec.disorder_strength = 0.0;
        let hop = crate::lattice::build_hamiltonian_in(&hop_spec, space, 0.0)?.matrix;
        let field = spec.disorder_energies();
        let mut static_diag = Vec::with_capacity(space.dim());
        let mut pair_terms: Vec<Vec<(u32, f64)>> = Vec::with_capacity(space.dim());
        for s in space.states() {
            let dis: f64 = s
                .0
                .iter()
                .enumerate()
                .map(|(j, &n)| field[j] * n as f64)
                .sum();
            static_diag.push(dis);
            pair_terms.push(s.pair_counts().map(|(j, pc)| (j as u32, pc)).collect());
        }
        // phase-independent spectral bounds: pair energies extremized over phi
        let (hop_lo, hop_hi) = hop.gershgorin_bounds(None);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let u_min = spec.u0 - spec.delta.abs();
        let u_max = spec.u0 + spec.delta.abs();
        for (dis, pairs) in static_diag.iter().zip(&pair_terms) {
            let total: f64 = pairs.iter().map(|(_, pc)| pc).sum();
            let a = dis + total * u_min.min(u_max);
            let b = dis + total * u_min.max(u_max);
            lo = lo.min(a.min(b));
            hi = hi.max(a.max(b));
        }
        if !lo.is_finite() {
            lo = 0.0;
            hi = 0.0;
        }
        Ok(DrivenPropagator {
            hop,
            static_diag,
            pair_terms,
            spec: spec.clone(),
            bounds: (hop_lo + lo, hop_hi + hi),
        })
    }

    pub fn dim(&self) -> usize {
        self.hop.dim()
    }

    /// Interaction + disorder diagonal at the given phase.
    pub fn diagonal_at(&self, phi: f64) -> Vec<f64> {
        let u = interaction_profile(&self.spec, phi);
        self.static_diag
            .iter()
            .zip(&self.pair_terms)
            .map(|(dis, pairs)| {
                dis + pairs
                    .iter()
                    .map(|&(j, pc)| u[j as usize] * pc)
                    .sum::<f64>()
            })
            .collect()
    }

    /// Full H(phi) as a CSR matrix (used by spectra along the drive).
    pub fn matrix_at(&self, phi: f64) -> CsrMatrix {
        let diag = self.diagonal_at(phi);
        let mut triplets = Vec::with_capacity(self.hop.nnz() + self.dim());
        for r in 0..self.dim() {
            let (cols, vals) = self.hop.row(r);
            for (c, v) in cols.iter().zip(vals) {
                triplets.push((r, *c as usize, *v));
            }
            triplets.push((r, r, Complex64::new(diag[r], 0.0)));
        }
        CsrMatrix::from_triplets(self.dim(), &triplets)
    }

    /// psi <- exp(-i H(phi_mid) dt) psi
    pub fn step(&self, psi: &mut Vec<Complex64>, phi_mid: f64, dt: f64) {
        let diag = self.diagonal_at(phi_mid);
        let (center, half, coeffs) = exp_coefficients(self.bounds.0, self.bounds.1, dt);
        let out = chebyshev_apply(
            &|x: &[Complex64], y: &mut [Complex64]| self.hop.matvec_plus_diag(&diag, x, y),
            center,
            half,
            &coeffs,
            psi,
        );
        *psi = out;
    }

    /// Expectation <psi| H(phi) |psi>.
    pub fn energy(&self, psi: &[Complex64], phi: f64) -> f64 {
        let diag = self.diagonal_at(phi);
        let mut hv = vec![Complex64::default(); psi.len()];
        self.hop.matvec_plus_diag(&diag, psi, &mut hv);
        psi.iter()
            .zip(&hv)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}
