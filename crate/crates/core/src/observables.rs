//! Measured quantities: densities, second/third-order correlators, center
//! of mass, bond currents and decay ratios.
//!
//! All operators here are diagonal or single-bond in the Fock basis, so
//! every expectation is a single pass over the state vector. Site indices
//! in returned arrays are 0-based; the center of mass uses the 1-based site
//! coordinate to stay consistent with the interaction profile convention.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{FockState, HamiltonianMatrix, ModelSpec, StateSpace};
use crate::propagator::StaticPropagator;

pub type DensityProfile = Vec<f64>;

/// Dense correlation tensor of order 2 (M x M) or 3 (M x M x M).
#[derive(Debug, Clone)]
pub struct CorrelationTensor {
    pub order: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl CorrelationTensor {
    pub fn get2(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.order, 2);
        self.data[i * self.m + j]
    }

    pub fn get3(&self, i: usize, j: usize, k: usize) -> f64 {
        debug_assert_eq!(self.order, 3);
        self.data[(i * self.m + j) * self.m + k]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

fn norm_sqr(state: &[Complex64]) -> f64 {
    state.iter().map(|c| c.norm_sqr()).sum()
}

fn check_normalized(state: &[Complex64]) -> Result<()> {
    let n = norm_sqr(state);
    if n < 1e-12 {
        return Err(Error::ZeroNorm(n.sqrt()));
    }
    Ok(())
}

/// Per-site density <n_j>.
pub fn density<S: StateSpace>(state: &[Complex64], space: &S) -> Result<DensityProfile> {
    check_normalized(state)?;
    let m = space.states()[0].sites();
    let mut out = vec![0.0; m];
    for (s, c) in space.states().iter().zip(state) {
        let w = c.norm_sqr();
        if w == 0.0 {
            continue;
        }
        for (j, &n) in s.0.iter().enumerate() {
            out[j] += w * n as f64;
        }
    }
    Ok(out)
}

/// Correlation function of the given order:
/// order 2 gives <a+_i a+_j a_j a_i>, order 3 gives <a+_i a+_j a+_k a_k a_j a_i>.
pub fn correlation<S: StateSpace + Sync>(
    state: &[Complex64],
    space: &S,
    order: usize,
) -> Result<CorrelationTensor> {
    check_normalized(state)?;
    let n_particles = space.states()[0].particles();
    if !(order == 2 || order == 3) {
        return Err(Error::InvalidModel(format!("correlation order {order} not supported")));
    }
    if order > n_particles {
        return Err(Error::OrderExceedsParticles {
            order,
            n: n_particles,
        });
    }
    let m = space.states()[0].sites();
    let weights: Vec<(usize, f64)> = state
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(k, c)| (k, c.norm_sqr()))
        .collect();
    let data = if order == 2 {
        let mut data = vec![0.0; m * m];
        for &(k, w) in &weights {
            let occ = &space.states()[k].0;
            for i in 0..m {
                let ni = occ[i] as f64;
                if ni == 0.0 {
                    continue;
                }
                for j in 0..m {
                    let nj = occ[j] as f64 - if i == j { 1.0 } else { 0.0 };
                    if nj > 0.0 {
                        data[i * m + j] += w * ni * nj;
                    }
                }
            }
        }
        data
    } else {
        let mut data = vec![0.0; m * m * m];
        let chunks: Vec<Vec<f64>> = weights
            .par_chunks(64.max(weights.len() / 16))
            .map(|chunk| {
                let mut local = vec![0.0; m * m * m];
                for &(k, w) in chunk {
                    let occ = &space.states()[k].0;
                    for i in 0..m {
                        let fi = occ[i] as f64;
                        if fi == 0.0 {
                            continue;
                        }
                        for j in 0..m {
                            let fj = occ[j] as f64 - if i == j { 1.0 } else { 0.0 };
                            if fj <= 0.0 {
                                continue;
                            }
                            for l in 0..m {
                                let fl = occ[l] as f64
                                    - if i == l { 1.0 } else { 0.0 }
                                    - if j == l { 1.0 } else { 0.0 };
                                if fl > 0.0 {
                                    local[(i * m + j) * m + l] += w * fi * fj * fl;
                                }
                            }
                        }
                    }
                }
                local
            })
            .collect();
        for local in chunks {
            for (d, l) in data.iter_mut().zip(local) {
                *d += l;
            }
        }
        data
    };
    Ok(CorrelationTensor { order, m, data })
}

/// Center of mass <x> with x = N^-1 sum_j j n_j and 1-based site index j.
pub fn center_of_mass<S: StateSpace>(state: &[Complex64], space: &S) -> Result<f64> {
    let rho = density(state, space)?;
    let n = space.states()[0].particles() as f64;
    Ok(rho
        .iter()
        .enumerate()
        .map(|(j, d)| (j as f64 + 1.0) * d)
        .sum::<f64>()
        / n)
}

/// Ring polarization phase z = <exp(i 2 pi X / M)> with X = sum_j j n_j.
/// The continuously tracked argument of z measures center-of-mass
/// transport on the ring without seam artifacts; |z| indicates how
/// localized the state is (the angle is meaningless as |z| -> 0).
pub fn ring_position_phase<S: StateSpace>(state: &[Complex64], space: &S) -> Complex64 {
    let m = space.states()[0].sites() as f64;
    let mut z = Complex64::default();
    for (s, c) in space.states().iter().zip(state) {
        let w = c.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let x_total: f64 = s
            .0
            .iter()
            .enumerate()
            .map(|(j, &n)| (j as f64 + 1.0) * n as f64)
            .sum();
        z += w * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x_total / m);
    }
    z
}

/// Site (1-based) where the bound pair sits: argmax of the diagonal
/// second-order correlation <n_j (n_j - 1)>.
pub fn pair_site<S: StateSpace>(state: &[Complex64], space: &S) -> Result<usize> {
    check_normalized(state)?;
    let m = space.states()[0].sites();
    let mut diag = vec![0.0; m];
    for (s, c) in space.states().iter().zip(state) {
        let w = c.norm_sqr();
        if w == 0.0 {
            continue;
        }
        for (j, pc) in s.pair_counts() {
            diag[j] += w * 2.0 * pc;
        }
    }
    let best = diag
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j + 1)
        .unwrap_or(1);
    Ok(best)
}

/// Expectation of the bond current operator J_j = i J (a+_j a_{j+1} - h.c.)
/// on every bond j = 1..=M; the M-th entry is the wrap-around bond, zero
/// under open boundary conditions. The sign convention follows the
/// continuity equation dn_j/dt = <J_j> - <J_{j-1}> for the -J hopping model,
/// so positive current transports density toward smaller site index.
pub fn local_current<S: StateSpace>(
    state: &[Complex64],
    spec: &ModelSpec,
    space: &S,
) -> Result<Vec<f64>> {
    check_normalized(state)?;
    let m = spec.m;
    let periodic = spec.boundary == crate::lattice::Boundary::Periodic;
    let mut out = vec![0.0; m];
    for (k, c) in state.iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let s = &space.states()[k].0;
        for bond in 0..m {
            let (a, b) = (bond, (bond + 1) % m);
            if bond == m - 1 && !periodic {
                continue;
            }
            // i J a+_a a_b moves one boson b -> a
            if s[b] > 0 {
                let mut occ = s.to_vec();
                occ[b] -= 1;
                occ[a] += 1;
                let amp = ((s[b] as f64) * (occ[a] as f64)).sqrt();
                if let Some(target) = space.index_of(&FockState(occ)) {
                    let term = Complex64::new(0.0, spec.j * amp) * c * state[target].conj();
                    out[bond] += term.re;
                }
            }
        }
    }
    // <psi| iJ (a+_a a_b - a+_b a_a) |psi> = 2 Re <psi| iJ a+_a a_b |psi>
    for q in &mut out {
        *q *= 2.0;
    }
    Ok(out)
}

/// Ratio r(t) = <n_{j_pair}>(t) / <n_{j_pair}>(0) under evolution with the
/// static Hamiltonian. `times` must be ascending; `j_pair` is 1-based.
pub fn decay_ratio<S: StateSpace + Sync>(
    initial: &[Complex64],
    h_static: &HamiltonianMatrix,
    space: &S,
    j_pair: usize,
    times: &[f64],
) -> Result<Vec<f64>> {
    check_normalized(initial)?;
    assert!(
        times.windows(2).all(|w| w[1] >= w[0]),
        "times must be ascending"
    );
    let prop = StaticPropagator::new(h_static);
    let rho0 = density(initial, space)?;
    let base = rho0[j_pair - 1];
    if base <= 0.0 {
        return Err(Error::InvalidModel(format!(
            "initial density vanishes at the pair site {j_pair}"
        )));
    }
    let mut psi = initial.to_vec();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            prop.advance(&mut psi, dt);
            now = t;
        }
        let rho = density(&psi, space)?;
        out.push(rho[j_pair - 1] / base);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_basis, build_hamiltonian, Beta, Boundary, ModelSpec};
    use approx::assert_abs_diff_eq;

    fn fock_amp(basis: &crate::lattice::FockBasis, occ: &[u8]) -> Vec<Complex64> {
        let mut v = vec![Complex64::default(); basis.dim()];
        let k = basis.index_of(&FockState(occ.to_vec())).unwrap();
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn density_of_fock_state() {
        let basis = build_basis(12, 3).unwrap();
        let mut occ = vec![0u8; 12];
        occ[5] = 2; // site 6
        occ[2] = 1; // site 3
        let v = fock_amp(&basis, &occ);
        let rho = density(&v, &basis).unwrap();
        assert_abs_diff_eq!(rho[5], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[2], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.iter().sum::<f64>(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn com_of_fock_state() {
        let basis = build_basis(12, 3).unwrap();
        let mut occ = vec![0u8; 12];
        occ[5] = 2;
        occ[11] = 1;
        let v = fock_amp(&basis, &occ);
        assert_abs_diff_eq!(center_of_mass(&v, &basis).unwrap(), 8.0, epsilon = 1e-13);
        // translating by q = 3 adds exactly 3 (support away from the seam)
        let mut occ2 = vec![0u8; 12];
        occ2[2] = 2;
        occ2[8] = 1;
        let v2 = fock_amp(&basis, &occ2);
        let mut occ3 = vec![0u8; 12];
        occ3[5] = 2;
        occ3[11] = 1;
        let _ = occ3;
        let c2 = center_of_mass(&v2, &basis).unwrap();
        let shifted = fock_amp(&basis, &{
            let mut o = vec![0u8; 12];
            o[5] = 2;
            o[11] = 1;
            o
        });
        let c3 = center_of_mass(&shifted, &basis).unwrap();
        assert_abs_diff_eq!(c3 - c2, 3.0, epsilon = 1e-13);
    }

    #[test]
    fn correlation_two_particles_same_site() {
        let basis = build_basis(5, 2).unwrap();
        let mut occ = vec![0u8; 5];
        occ[3] = 2;
        let v = fock_amp(&basis, &occ);
        let c2 = correlation(&v, &basis, 2).unwrap();
        assert_abs_diff_eq!(c2.get2(3, 3), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c2.sum(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn correlation_sum_rules_random_state() {
        let basis = build_basis(6, 3).unwrap();
        let dim = basis.dim();
        let mut v: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let norm = norm_sqr(&v).sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
        let n = 3.0;
        let c2 = correlation(&v, &basis, 2).unwrap();
        assert_abs_diff_eq!(c2.sum(), n * (n - 1.0), epsilon = 1e-9);
        let c3 = correlation(&v, &basis, 3).unwrap();
        assert_abs_diff_eq!(c3.sum(), n * (n - 1.0) * (n - 2.0), epsilon = 1e-9);
        // partial trace: sum_k C3_{ijk} = (N - 2) C2_{ij}
        for i in 0..6 {
            for j in 0..6 {
                let traced: f64 = (0..6).map(|k| c3.get3(i, j, k)).sum();
                assert_abs_diff_eq!(traced, (n - 2.0) * c2.get2(i, j), epsilon = 1e-9);
            }
        }
        // full permutation symmetry of C3
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    let x = c3.get3(i, j, k);
                    for p in [(i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                        assert_abs_diff_eq!(x, c3.get3(p.0, p.1, p.2), epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn order_exceeding_particles_rejected() {
        let basis = build_basis(4, 2).unwrap();
        let mut occ = vec![0u8; 4];
        occ[0] = 2;
        let v = fock_amp(&basis, &occ);
        assert!(matches!(
            correlation(&v, &basis, 3),
            Err(Error::OrderExceedsParticles { .. })
        ));
    }

    #[test]
    fn current_vanishes_for_real_states() {
        let spec = ModelSpec::new(6, 2, 1.0, 10.0, 3.0, Beta { p: 1, q: 3 }, 0.3, Boundary::Periodic);
        let basis = build_basis(6, 2).unwrap();
        let dim = basis.dim();
        let mut v: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::new((k as f64 * 0.29).cos(), 0.0))
            .collect();
        let norm = norm_sqr(&v).sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
        let q = local_current(&v, &spec, &basis).unwrap();
        assert!(q.iter().all(|x| x.abs() < 1e-13), "{q:?}");
        // complex conjugation negates the current
        let mut vi: Vec<Complex64> = v
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::new((k as f64 * 0.1).cos(), (k as f64 * 0.07).sin()))
            .collect();
        let norm = norm_sqr(&vi).sqrt();
        vi.iter_mut().for_each(|c| *c /= norm);
        let qf = local_current(&vi, &spec, &basis).unwrap();
        let conj: Vec<Complex64> = vi.iter().map(|c| c.conj()).collect();
        let qb = local_current(&conj, &spec, &basis).unwrap();
        for (a, b) in qf.iter().zip(&qb) {
            assert_abs_diff_eq!(*a, -b, epsilon = 1e-12);
        }
    }

    #[test]
    fn current_satisfies_continuity() {
        // dn_j/dt from an explicit commutator expectation must equal
        // <J_j> - <J_{j-1}> in this sign convention.
        let spec = ModelSpec::new(6, 2, 1.3, 7.0, 2.0, Beta { p: 1, q: 3 }, 0.9, Boundary::Periodic);
        let basis = build_basis(6, 2).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.9).unwrap();
        let dim = basis.dim();
        let mut v: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::new((k as f64 * 0.23).sin() + 0.2, (k as f64 * 0.41).cos()))
            .collect();
        let norm = norm_sqr(&v).sqrt();
        v.iter_mut().for_each(|c| *c /= norm);

        // dn_j/dt = 2 Im <psi| n_j H |psi>  (from i[H, n_j])
        let mut hv = vec![Complex64::default(); dim];
        h.matrix.matvec(&v, &mut hv);
        let q = local_current(&v, &spec, &basis).unwrap();
        for j in 0..6 {
            let mut expect = Complex64::default();
            for k in 0..dim {
                let nj = basis.state(k).0[j] as f64;
                expect += v[k].conj() * nj * hv[k];
            }
            let dn_dt = 2.0 * expect.im;
            let prev = if j == 0 { 5 } else { j - 1 };
            assert_abs_diff_eq!(dn_dt, q[j] - q[prev], epsilon = 1e-10);
        }
    }

    #[test]
    fn stationary_eigenstate_has_uniform_ring_current() {
        let spec = ModelSpec::new(6, 2, 1.0, 8.0, 2.0, Beta { p: 1, q: 3 }, 0.4, Boundary::Periodic);
        let basis = build_basis(6, 2).unwrap();
        let h = build_hamiltonian(&spec, &basis, 0.4).unwrap();
        let eig = crate::spectral::diagonalize(&h).unwrap();
        for k in [0, 3, basis.dim() - 1] {
            let v: Vec<Complex64> = eig.eigenvectors.column(k).to_vec();
            let q = local_current(&v, &spec, &basis).unwrap();
            let mean = q.iter().sum::<f64>() / q.len() as f64;
            for x in &q {
                assert_abs_diff_eq!(*x, mean, epsilon = 1e-9);
            }
        }
    }
}
