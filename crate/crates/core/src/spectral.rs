//! Eigensolvers, eigenstate classification and localization measures.
//!
//! Spectra come from a dense Hermitian eigendecomposition below a
//! configurable dimension cap, or from a Gaussian-filtered subspace
//! iteration when only a spectral window is needed. Eigenstates are
//! classified by their interaction expectation D = <sum_j n_j(n_j-1)/2>,
//! which counts bound clusters: D ~ 0 for independent bosons, ~1 for a
//! bound pair plus a free boson, ~3 for three bound bosons, and in general
//! sits near k(k-1)/2 for the largest bound cluster of k bosons.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{HamiltonianMatrix, ModelSpec, StateSpace};
use crate::observables::density;
use crate::sparse::CsrMatrix;

/// Default cap for dense eigendecompositions.
pub const DEFAULT_DENSE_CAP: usize = 6000;

/// Distance on the D ladder beyond which a state is left unclassified.
pub const CLASS_TOLERANCE: f64 = 0.4;

/// Bound-cluster class of an eigenstate: `Cluster(k)` means the largest
/// bound cluster holds k bosons (k = 1 is fully independent bosons; for
/// three particles k = 1, 2, 3 are the type-(i), -(ii), -(iii) states).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateClass {
    Cluster(u8),
    Unclassified,
}

impl StateClass {
    pub fn is_type1(&self) -> bool {
        *self == StateClass::Cluster(1)
    }

    pub fn is_type2(&self) -> bool {
        *self == StateClass::Cluster(2)
    }

    pub fn is_type3(&self) -> bool {
        *self == StateClass::Cluster(3)
    }

    pub fn label(&self) -> String {
        match self {
            StateClass::Cluster(k) => format!("type{k}"),
            StateClass::Unclassified => "unclassified".to_string(),
        }
    }
}

/// Eigenvalues, eigenvectors and per-state diagnostics of one Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// Ascending eigenvalues.
    pub energies: Vec<f64>,
    /// Column k is the eigenvector of `energies[k]` in the basis ordering.
    pub eigenvectors: Array2<Complex64>,
    /// Per-state class; empty until `classify_states` runs.
    pub classification: Vec<StateClass>,
    /// Interaction expectation D per state; empty until classification.
    pub interaction: Vec<f64>,
    /// Generalized inverse participation ratio per state; empty until
    /// classification.
    pub g2: Vec<f64>,
    /// Max residual ||H v - E v|| over a deterministic sample of pairs.
    pub residual_sample: f64,
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn state(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k).to_vec()
    }

    /// Index of the eigenvalue closest to `target`.
    pub fn nearest(&self, target: f64) -> usize {
        self.energies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
            .map(|(k, _)| k)
            .expect("empty spectrum")
    }

    /// Gram-matrix deviation from the identity, max |V+V - I|.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = &self.eigenvectors;
        let n = v.ncols();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let mut g = Complex64::default();
                for i in 0..v.nrows() {
                    g += v[(i, a)].conj() * v[(i, b)];
                }
                if a == b {
                    g -= 1.0;
                }
                worst = worst.max(g.norm());
            }
        }
        worst
    }
}

/// Dense Hermitian eigendecomposition; eigenvalues ascending and
/// eigenvectors orthonormal columns.
pub fn eigh(a: ArrayView2<'_, Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return Ok((Vec::new(), Array2::default((0, 0))));
    }
    let mut m = faer::Mat::<Complex64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = a[(i, j)];
        }
    }
    let e = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::EigenFailed)?;
    let vals: Vec<f64> = (0..n).map(|i| e.S()[i].re).collect();
    let u = e.U();
    let mut vecs = Array2::default((n, n));
    for j in 0..n {
        for i in 0..n {
            vecs[(i, j)] = u[(i, j)];
        }
    }
    Ok((vals, vecs))
}

pub fn diagonalize(h: &HamiltonianMatrix) -> Result<SpectralResult> {
    diagonalize_with_cap(h, DEFAULT_DENSE_CAP)
}

/// Full dense eigendecomposition of the Hamiltonian. Errors when the
/// dimension exceeds `cap`; callers should then reduce the problem with a
/// momentum sector, the type-(ii) subspace or `window_eigenpairs`.
pub fn diagonalize_with_cap(h: &HamiltonianMatrix, cap: usize) -> Result<SpectralResult> {
    let dim = h.dim();
    if dim > cap {
        return Err(Error::DenseDimensionOverCap { dim, cap });
    }
    let (energies, eigenvectors) = eigh(h.to_dense().view())?;
    let residual_sample = sample_residual(&h.matrix, &energies, &eigenvectors);
    Ok(SpectralResult {
        energies,
        eigenvectors,
        classification: Vec::new(),
        interaction: Vec::new(),
        g2: Vec::new(),
        residual_sample,
    })
}

/// Residual ||H v - E v|| over an evenly spaced sample of eigenpairs.
fn sample_residual(h: &CsrMatrix, energies: &[f64], vectors: &Array2<Complex64>) -> f64 {
    let n = energies.len();
    if n == 0 {
        return 0.0;
    }
    let stride = (n / 32).max(1);
    let mut worst = 0.0f64;
    let mut hv = vec![Complex64::default(); n];
    for k in (0..n).step_by(stride) {
        let v: Vec<Complex64> = vectors.column(k).to_vec();
        h.matvec(&v, &mut hv);
        let res: f64 = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - energies[k] * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(res);
    }
    worst
}

/// Max residual over every eigenpair (test-grade verification).
pub fn max_residual(h: &HamiltonianMatrix, result: &SpectralResult) -> f64 {
    let n = result.len();
    (0..n)
        .into_par_iter()
        .map(|k| {
            let v: Vec<Complex64> = result.eigenvectors.column(k).to_vec();
            let mut hv = vec![Complex64::default(); v.len()];
            h.matrix.matvec(&v, &mut hv);
            hv.iter()
                .zip(&v)
                .map(|(a, b)| (a - result.energies[k] * b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// Interaction expectation D = <sum_j n_j (n_j - 1) / 2> of a state.
pub fn interaction_expectation<S: StateSpace>(state: &[Complex64], space: &S) -> f64 {
    let mut d = 0.0;
    for (s, c) in space.states().iter().zip(state) {
        let w = c.norm_sqr();
        if w == 0.0 {
            continue;
        }
        d += w * s.pair_counts().map(|(_, pc)| pc).sum::<f64>();
    }
    d
}

/// Class of a single state from its interaction expectation, for N bosons.
pub fn classify_interaction(d: f64, n: usize) -> StateClass {
    let mut best = (f64::INFINITY, 0u8);
    for k in 1..=n {
        let ladder = (k * (k - 1)) as f64 / 2.0;
        let dist = (d - ladder).abs();
        if dist < best.0 {
            best = (dist, k as u8);
        }
    }
    if best.0 <= CLASS_TOLERANCE {
        StateClass::Cluster(best.1)
    } else {
        StateClass::Unclassified
    }
}

/// Generalized inverse participation ratio
/// G2 = sum_j <n_j>^2 / (sum_j <n_j>)^2, in [1/M, 1].
pub fn generalized_ipr<S: StateSpace>(state: &[Complex64], space: &S) -> Result<f64> {
    let rho = density(state, space)?;
    let total: f64 = rho.iter().sum();
    Ok(rho.iter().map(|x| x * x).sum::<f64>() / (total * total))
}

/// Fill classification, D and G2 for every eigenstate.
pub fn classify_states<S: StateSpace + Sync>(result: &mut SpectralResult, space: &S) {
    let n_particles = space.states()[0].particles();
    let rows: Vec<(f64, f64)> = (0..result.len())
        .into_par_iter()
        .map(|k| {
            let v: Vec<Complex64> = result.eigenvectors.column(k).to_vec();
            let d = interaction_expectation(&v, space);
            let g2 = generalized_ipr(&v, space).unwrap_or(0.0);
            (d, g2)
        })
        .collect();
    result.interaction = rows.iter().map(|r| r.0).collect();
    result.g2 = rows.iter().map(|r| r.1).collect();
    result.classification = result
        .interaction
        .iter()
        .map(|&d| classify_interaction(d, n_particles))
        .collect();
}

/// Mean G2 over the type-(ii) states with the 3 beta M (M-1) normalization
/// (a plain mean at beta = 1/3, where the factor counts the type-(ii)
/// states exactly).
pub fn average_g2_type2(result: &SpectralResult, spec: &ModelSpec) -> Result<f64> {
    assert!(
        !result.classification.is_empty(),
        "classify_states must run first"
    );
    let sum: f64 = result
        .classification
        .iter()
        .zip(&result.g2)
        .filter(|(c, _)| c.is_type2())
        .map(|(_, g)| g)
        .sum();
    let count = result
        .classification
        .iter()
        .filter(|c| c.is_type2())
        .count();
    if count == 0 {
        return Err(Error::NoType2States);
    }
    let norm = 3.0 * spec.beta.value() * (spec.m * (spec.m - 1)) as f64;
    Ok(sum / norm)
}

/// Options for the Gaussian-filtered subspace iteration.
#[derive(Debug, Clone)]
pub struct WindowOptions {
    /// Number of iteration vectors; should comfortably exceed the expected
    /// state count in the window.
    pub block: usize,
    pub max_iterations: usize,
    /// Residual tolerance relative to the spectral scale.
    pub tol: f64,
    pub seed: u64,
    /// Chebyshev degree of the filter polynomial.
    pub degree: usize,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            block: 64,
            max_iterations: 25,
            tol: 1e-11,
            seed: 1,
            degree: 0, // 0: choose from the spectral range
        }
    }
}

/// All eigenpairs with eigenvalue in [lo, hi], computed iteratively with a
/// Chebyshev approximation of a Gaussian spectral filter centered on the
/// window. Intended for dimensions past the dense cap when only an energy
/// window is of interest.
pub fn window_eigenpairs(
    h: &HamiltonianMatrix,
    lo: f64,
    hi: f64,
    opts: &WindowOptions,
) -> Result<(Vec<f64>, Array2<Complex64>)> {
    assert!(hi > lo, "empty window");
    let dim = h.dim();
    let (a, b) = h.matrix.gershgorin_bounds(None);
    let (a, b) = (a - 1.0, b + 1.0);
    let scale = b.max(-a).max(1.0);
    let center = 0.5 * (lo + hi);
    let sigma = 0.25 * (hi - lo);
    let degree = if opts.degree > 0 {
        opts.degree
    } else {
        ((2.0 * (b - a) / sigma) as usize).clamp(40, 3000)
    };
    let coeffs = gaussian_filter_coefficients(a, b, center, sigma, degree);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let block = opts.block.min(dim);
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<Complex64>> = (0..block)
        .map(|_| {
            (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();

    for iteration in 0..opts.max_iterations {
        // filter the block
        x = x
            .par_iter()
            .map(|v| {
                crate::propagator::chebyshev_apply(
                    &|p: &[Complex64], q: &mut [Complex64]| h.matrix.matvec(p, q),
                    mid,
                    half,
                    &coeffs,
                    v,
                )
            })
            .collect();
        orthonormalize(&mut x);
        // Rayleigh-Ritz on the filtered block
        let hx: Vec<Vec<Complex64>> = x
            .par_iter()
            .map(|v| {
                let mut hv = vec![Complex64::default(); dim];
                h.matrix.matvec(v, &mut hv);
                hv
            })
            .collect();
        let k = x.len();
        let mut small = Array2::<Complex64>::default((k, k));
        for r in 0..k {
            for c in 0..k {
                let mut acc = Complex64::default();
                for i in 0..dim {
                    acc += x[r][i].conj() * hx[c][i];
                }
                small[(r, c)] = acc;
            }
        }
        let (theta, w) = eigh(small.view())?;
        // rotate the block to Ritz vectors
        let rotated: Vec<Vec<Complex64>> = (0..k)
            .into_par_iter()
            .map(|col| {
                let mut v = vec![Complex64::default(); dim];
                for r in 0..k {
                    let coeff = w[(r, col)];
                    if coeff.norm_sqr() == 0.0 {
                        continue;
                    }
                    for i in 0..dim {
                        v[i] += coeff * x[r][i];
                    }
                }
                v
            })
            .collect();
        x = rotated;

        // residuals of the Ritz pairs inside the window
        let mut interior: Vec<usize> = Vec::new();
        let mut converged = true;
        for (idx, &t) in theta.iter().enumerate() {
            if t < lo || t > hi {
                continue;
            }
            interior.push(idx);
            let mut hv = vec![Complex64::default(); dim];
            h.matrix.matvec(&x[idx], &mut hv);
            let res: f64 = hv
                .iter()
                .zip(&x[idx])
                .map(|(p, q)| (p - t * q).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if res > opts.tol * scale {
                converged = false;
            }
        }
        if converged && !interior.is_empty() && iteration >= 1 {
            let mut vals: Vec<f64> = interior.iter().map(|&i| theta[i]).collect();
            let mut vecs = Array2::default((dim, interior.len()));
            for (c, &i) in interior.iter().enumerate() {
                for r in 0..dim {
                    vecs[(r, c)] = x[i][r];
                }
            }
            // ascending by construction of eigh, but enforce it
            let mut order: Vec<usize> = (0..vals.len()).collect();
            order.sort_by(|&p, &q| vals[p].total_cmp(&vals[q]));
            let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
            let mut sorted_vecs = Array2::default((dim, vals.len()));
            for (c, &i) in order.iter().enumerate() {
                for r in 0..dim {
                    sorted_vecs[(r, c)] = vecs[(r, i)];
                }
            }
            vals = sorted_vals;
            return Ok((vals, sorted_vecs));
        }
    }
    Err(Error::WindowNotConverged(format!(
        "window [{lo}, {hi}] after {} iterations with block {}",
        opts.max_iterations, opts.block
    )))
}

/// Chebyshev coefficients of exp(-(lambda - center)^2 / (2 sigma^2)) over
/// [a, b], by Chebyshev-Gauss quadrature.
fn gaussian_filter_coefficients(
    a: f64,
    b: f64,
    center: f64,
    sigma: f64,
    degree: usize,
) -> Vec<Complex64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let quad = (2 * degree + 32).max(256);
    let f: Vec<f64> = (0..quad)
        .map(|i| {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / quad as f64;
            let lambda = mid + half * theta.cos();
            (-((lambda - center) / sigma).powi(2) / 2.0).exp()
        })
        .collect();
    (0..=degree)
        .map(|k| {
            let mut acc = 0.0;
            for (i, fv) in f.iter().enumerate() {
                let theta = std::f64::consts::PI * (i as f64 + 0.5) / quad as f64;
                acc += fv * (k as f64 * theta).cos();
            }
            let c = acc * 2.0 / quad as f64;
            Complex64::new(if k == 0 { 0.5 * c } else { c }, 0.0)
        })
        .collect()
}

/// Modified Gram-Schmidt with a reorthogonalization pass; drops vectors
/// that lose all norm.
fn orthonormalize(block: &mut Vec<Vec<Complex64>>) {
    let mut kept: Vec<Vec<Complex64>> = Vec::with_capacity(block.len());
    for mut v in block.drain(..) {
        for _ in 0..2 {
            for u in &kept {
                let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= overlap * ui;
                }
            }
        }
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.iter_mut().for_each(|c| *c /= norm);
            kept.push(v);
        }
    }
    *block = kept;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{
        build_basis, build_hamiltonian, Beta, Boundary, FockState, ModelSpec,
    };
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two_spectrum() {
        let spec = ModelSpec::new(
            2,
            1,
            1.0,
            0.0,
            0.0,
            Beta { p: 0, q: 1 },
            0.0,
            Boundary::Open,
        );
        let basis = build_basis(2, 1).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.0).unwrap();
        let r = diagonalize(&h).unwrap();
        assert_abs_diff_eq!(r.energies[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.energies[1], 1.0, epsilon = 1e-12);
        assert!(r.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn two_site_two_particle_derived_spectrum() {
        // basis {|20>, |11>, |02>}, U = 25: eigenvalues
        // {25, (25 +- sqrt(625 + 16))/2}
        let spec = ModelSpec::new(
            2,
            2,
            1.0,
            25.0,
            0.0,
            Beta { p: 0, q: 1 },
            0.0,
            Boundary::Open,
        );
        let basis = build_basis(2, 2).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.0).unwrap();
        let r = diagonalize(&h).unwrap();
        let disc = (625.0f64 + 16.0).sqrt();
        let expect = [(25.0 - disc) / 2.0, 25.0, (25.0 + disc) / 2.0];
        for (e, x) in r.energies.iter().zip(expect) {
            assert_abs_diff_eq!(*e, x, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(r.energies[2], 25.158988901172143, epsilon = 1e-8);
        assert_abs_diff_eq!(r.energies[0], -0.158988901172143, epsilon = 1e-8);
    }

    #[test]
    fn trace_identity() {
        let spec = ModelSpec::new(
            6,
            3,
            1.0,
            18.0,
            6.0,
            Beta { p: 1, q: 3 },
            0.4,
            Boundary::Periodic,
        );
        let basis = build_basis(6, 3).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.4).unwrap();
        let r = diagonalize(&h).unwrap();
        let sum: f64 = r.energies.iter().sum();
        assert_abs_diff_eq!(sum, h.trace(), epsilon = 1e-8 * h.trace().abs().max(1.0));
    }

    #[test]
    fn classify_fock_states() {
        let basis = build_basis(3, 3).unwrap();
        let idx = |occ: &[u8]| basis.index_of(&FockState(occ.to_vec())).unwrap();
        let mut v = vec![Complex64::default(); basis.dim()];
        v[idx(&[1, 1, 1])] = Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(interaction_expectation(&v, &basis), 0.0, epsilon = 1e-14);
        assert_eq!(classify_interaction(0.0, 3), StateClass::Cluster(1));

        let mut v = vec![Complex64::default(); basis.dim()];
        v[idx(&[2, 1, 0])] = Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(interaction_expectation(&v, &basis), 1.0, epsilon = 1e-14);
        assert_eq!(classify_interaction(1.0, 3), StateClass::Cluster(2));

        let mut v = vec![Complex64::default(); basis.dim()];
        v[idx(&[0, 3, 0])] = Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(interaction_expectation(&v, &basis), 3.0, epsilon = 1e-14);
        assert_eq!(classify_interaction(3.0, 3), StateClass::Cluster(3));

        assert_eq!(classify_interaction(1.9, 3), StateClass::Unclassified);
    }

    #[test]
    fn g2_limits() {
        let basis = build_basis(5, 3).unwrap();
        // all three bosons on one site: G2 = 1
        let mut v = vec![Complex64::default(); basis.dim()];
        let k = basis
            .index_of(&FockState(vec![0, 0, 3, 0, 0]))
            .unwrap();
        v[k] = Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(generalized_ipr(&v, &basis).unwrap(), 1.0, epsilon = 1e-12);
        // uniform density: G2 = 1/M; an equal-weight superposition of
        // translated Fock states has a flat profile
        let m = 5;
        let mut v = vec![Complex64::default(); basis.dim()];
        let base = FockState(vec![3, 0, 0, 0, 0]);
        for shift in 0..m {
            let k = basis.index_of(&base.translated(shift)).unwrap();
            v[k] = Complex64::new(1.0 / (m as f64).sqrt(), 0.0);
        }
        assert_abs_diff_eq!(
            generalized_ipr(&v, &basis).unwrap(),
            1.0 / m as f64,
            epsilon = 1e-12
        );
    }

    #[test]
    fn strong_coupling_type2_count() {
        // small analogue of the production count M(M-1)
        let spec = ModelSpec::new(
            6,
            3,
            1.0,
            40.0,
            8.0,
            Beta { p: 1, q: 3 },
            0.5,
            Boundary::Open,
        );
        let basis = build_basis(6, 3).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.5).unwrap();
        let mut r = diagonalize(&h).unwrap();
        classify_states(&mut r, &basis);
        let count = r.classification.iter().filter(|c| c.is_type2()).count();
        assert_eq!(count, 6 * 5);
        let avg = average_g2_type2(&r, &spec).unwrap();
        assert!(avg > 0.0 && avg <= 1.0);
    }

    #[test]
    fn window_solver_matches_dense() {
        let spec = ModelSpec::new(
            9,
            3,
            1.0,
            30.0,
            10.0,
            Beta { p: 1, q: 3 },
            0.9,
            Boundary::Periodic,
        );
        let basis = build_basis(9, 3).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.9).unwrap();
        let dense = diagonalize(&h).unwrap();
        let (lo, hi) = (25.0, 45.0);
        let expected: Vec<f64> = dense
            .energies
            .iter()
            .copied()
            .filter(|&e| e >= lo && e <= hi)
            .collect();
        assert!(!expected.is_empty());
        let opts = WindowOptions {
            block: expected.len() + 16,
            ..WindowOptions::default()
        };
        let (vals, vecs) = window_eigenpairs(&h, lo, hi, &opts).unwrap();
        assert_eq!(vals.len(), expected.len(), "missing or spurious window states");
        for (a, b) in vals.iter().zip(&expected) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-8);
        }
        // residual check
        for c in 0..vals.len() {
            let v: Vec<Complex64> = vecs.column(c).to_vec();
            let mut hv = vec![Complex64::default(); v.len()];
            h.matrix.matvec(&v, &mut hv);
            let res: f64 = hv
                .iter()
                .zip(&v)
                .map(|(p, q)| (p - vals[c] * q).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-8, "residual {res}");
        }
    }
}
