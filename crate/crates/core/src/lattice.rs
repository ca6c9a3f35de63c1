//! Model definition, Fock basis and Hamiltonian assembly.
//!
//! The model is a one-dimensional Bose-Hubbard chain with a cosine-modulated
//! onsite interaction,
//!
//! ```text
//! H = -J sum_j (a+_{j+1} a_j + h.c.)
//!     + 1/2 sum_j U_j(phi) n_j (n_j - 1)
//!     + sum_j F V_j n_j
//! U_j(phi) = U0 + delta * cos(2 pi beta j + phi),   j = 1..=M
//! ```
//!
//! with `beta = p/q` rational. Site indices in the cosine are 1-based. The
//! basis is the full N-boson Fock space with deterministic ordering
//! (lexicographically descending occupation vectors), so basis indices and
//! every exported file are reproducible.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use num_integer::{binomial, gcd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Default cap on the Fock-space dimension.
pub const DEFAULT_BASIS_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Rational spatial frequency `beta = p/q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Beta {
    pub p: u32,
    pub q: u32,
}

impl Beta {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidModel(format!("beta = {p}/{q} needs q >= 1")));
        }
        if p != 0 && gcd(p, q) != 1 {
            return Err(Error::InvalidModel(format!("beta = {p}/{q} is not in lowest terms")));
        }
        Ok(Beta { p, q })
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// All parameters of one Hamiltonian family. The modulation phase `phi`
/// stored here is the reference phase used by presets; builders take the
/// phase explicitly so sweeps and drives can vary it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "U0")]
    pub u0: f64,
    pub delta: f64,
    pub beta: Beta,
    pub phi: f64,
    pub boundary: Boundary,
    pub disorder_strength: f64,
    pub disorder_profile: Vec<f64>,
}

impl ModelSpec {
    /// Clean chain with no disorder.
    pub fn new(
        m: usize,
        n: usize,
        j: f64,
        u0: f64,
        delta: f64,
        beta: Beta,
        phi: f64,
        boundary: Boundary,
    ) -> Self {
        ModelSpec {
            m,
            n,
            j,
            u0,
            delta,
            beta,
            phi,
            boundary,
            disorder_strength: 0.0,
            disorder_profile: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidModel(format!("M = {} must be >= 2", self.m)));
        }
        if self.n < 1 {
            return Err(Error::InvalidModel(format!("N = {} must be >= 1", self.n)));
        }
        if !(self.j > 0.0) {
            return Err(Error::InvalidModel(format!("J = {} must be > 0", self.j)));
        }
        Beta::new(self.beta.p, self.beta.q)?;
        if !self.disorder_profile.is_empty() {
            if self.disorder_profile.len() != self.m {
                return Err(Error::InvalidModel(format!(
                    "disorder profile has {} entries, expected 0 or {}",
                    self.disorder_profile.len(),
                    self.m
                )));
            }
            if self.disorder_profile.iter().any(|v| !(0.0..1.0).contains(v)) {
                return Err(Error::InvalidModel(
                    "disorder profile entries must lie in [0, 1)".into(),
                ));
            }
        }
        if self.boundary == Boundary::Periodic && self.m % self.beta.q as usize != 0 {
            return Err(Error::IncommensurateCell {
                q: self.beta.q as usize,
                m: self.m,
            });
        }
        Ok(())
    }

    /// Sites per unit cell.
    pub fn cell_size(&self) -> usize {
        self.beta.q as usize
    }

    /// Number of unit cells under periodic boundary.
    pub fn unit_cells(&self) -> Result<usize> {
        if self.m % self.cell_size() != 0 {
            return Err(Error::IncommensurateCell {
                q: self.cell_size(),
                m: self.m,
            });
        }
        Ok(self.m / self.cell_size())
    }

    /// Onsite disorder energies F * V_j (zeros when disorder is off).
    pub fn disorder_energies(&self) -> Vec<f64> {
        if self.disorder_strength == 0.0 || self.disorder_profile.is_empty() {
            vec![0.0; self.m]
        } else {
            self.disorder_profile
                .iter()
                .map(|v| self.disorder_strength * v)
                .collect()
        }
    }

    pub fn has_disorder(&self) -> bool {
        self.disorder_strength != 0.0 && !self.disorder_profile.is_empty()
    }
}

/// Uniform disorder profile in [0, 1) from a fixed seed.
pub fn seeded_disorder_profile(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..m).map(|_| rng.gen_range(0.0..1.0)).collect()
}

/// Interaction profile U_j(phi) with the 1-based site convention.
pub fn interaction_profile(spec: &ModelSpec, phi: f64) -> Vec<f64> {
    let beta = spec.beta.value();
    (1..=spec.m)
        .map(|j| spec.u0 + spec.delta * (2.0 * std::f64::consts::PI * beta * j as f64 + phi).cos())
        .collect()
}

/// Occupation-number configuration of N bosons on M sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState(pub Vec<u8>);

impl FockState {
    pub fn sites(&self) -> usize {
        self.0.len()
    }

    pub fn particles(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    /// State with all particles translated by `shift` sites (periodic wrap).
    pub fn translated(&self, shift: usize) -> FockState {
        let m = self.0.len();
        let mut out = vec![0u8; m];
        for (j, &n) in self.0.iter().enumerate() {
            out[(j + shift) % m] = n;
        }
        FockState(out)
    }

    /// Per-site pair count n_j (n_j - 1) / 2.
    pub fn pair_counts(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n >= 2)
            .map(|(j, &n)| (j, (n as f64) * (n as f64 - 1.0) / 2.0))
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// Enumerable state space with a reverse index; implemented by the full
/// Fock basis and by restricted subspaces.
pub trait StateSpace {
    fn states(&self) -> &[FockState];
    fn index_of(&self, state: &FockState) -> Option<usize>;
    fn dim(&self) -> usize {
        self.states().len()
    }
}

/// Full N-boson Fock basis with deterministic ordering and constant-time
/// reverse lookup.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub m: usize,
    pub n: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl StateSpace for FockBasis {
    fn states(&self) -> &[FockState] {
        &self.states
    }

    fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }
}

impl FockBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, k: usize) -> &FockState {
        &self.states[k]
    }
}

/// Fock-space dimension C(M + N - 1, N).
pub fn basis_dimension(m: usize, n: usize) -> usize {
    binomial(m + n - 1, n)
}

pub fn build_basis(m: usize, n: usize) -> Result<FockBasis> {
    build_basis_with_cap(m, n, DEFAULT_BASIS_CAP)
}

/// Enumerate all occupation vectors in lexicographically descending order,
/// starting from |N 0 ... 0>.
pub fn build_basis_with_cap(m: usize, n: usize, cap: usize) -> Result<FockBasis> {
    assert!(m >= 1, "need at least one site");
    let dim = basis_dimension(m, n);
    if dim > cap {
        return Err(Error::BasisTooLarge { dim, cap });
    }
    let mut states = Vec::with_capacity(dim);
    let mut occ = vec![0u8; m];
    occ[0] = n as u8;
    loop {
        states.push(FockState(occ.clone()));
        // find rightmost site (excluding the last) that can donate a particle
        let Some(i) = (0..m - 1).rev().find(|&i| occ[i] > 0) else {
            break;
        };
        occ[i] -= 1;
        let moved: u16 = occ[i + 1..].iter().map(|&x| x as u16).sum::<u16>() + 1;
        occ[i + 1..].iter_mut().for_each(|x| *x = 0);
        occ[i + 1] = moved as u8;
    }
    debug_assert_eq!(states.len(), dim);
    let index = states
        .iter()
        .enumerate()
        .map(|(k, s)| (s.clone(), k))
        .collect();
    Ok(FockBasis {
        m,
        n,
        states,
        index,
    })
}

/// Restricted basis spanned by a subset of Fock states, with an injection
/// map back into the full basis ordering.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub m: usize,
    pub n: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl StateSpace for SubspaceBasis {
    fn states(&self) -> &[FockState] {
        &self.states
    }

    fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }
}

impl SubspaceBasis {
    pub fn from_states(m: usize, n: usize, mut states: Vec<FockState>) -> Self {
        states.sort_by(|a, b| b.cmp(a)); // descending, matching FockBasis order
        states.dedup();
        let index = states
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), k))
            .collect();
        SubspaceBasis {
            m,
            n,
            states,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Position of each subspace state inside a full basis.
    pub fn injection_into(&self, basis: &FockBasis) -> Vec<usize> {
        self.states
            .iter()
            .map(|s| {
                basis
                    .index_of(s)
                    .expect("subspace state missing from the full basis")
            })
            .collect()
    }

    /// Lift a subspace vector into the full basis.
    pub fn lift(&self, basis: &FockBasis, v: &[Complex64]) -> Vec<Complex64> {
        let inj = self.injection_into(basis);
        let mut out = vec![Complex64::default(); basis.dim()];
        for (k, &parent) in inj.iter().enumerate() {
            out[parent] = v[k];
        }
        out
    }

    /// Project a full-space vector onto the subspace; returns the component
    /// vector and the norm of what was left behind.
    pub fn project(&self, basis: &FockBasis, v: &[Complex64]) -> (Vec<Complex64>, f64) {
        let inj = self.injection_into(basis);
        let mut sub = vec![Complex64::default(); self.dim()];
        let mut captured = 0.0;
        for (k, &parent) in inj.iter().enumerate() {
            sub[k] = v[parent];
            captured += v[parent].norm_sqr();
        }
        let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        (sub, (total - captured).max(0.0).sqrt())
    }
}

/// Basis of states with one doubly occupied site and one singly occupied
/// site, {|..., n_i = 2, ..., n_j = 1, ...>} with i != j. Dimension M(M-1).
pub fn type2_subspace_basis(m: usize) -> SubspaceBasis {
    let mut states = Vec::with_capacity(m * (m - 1));
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let mut occ = vec![0u8; m];
            occ[i] = 2;
            occ[j] = 1;
            states.push(FockState(occ));
        }
    }
    SubspaceBasis::from_states(m, 3, states)
}

/// Sparse Hermitian Hamiltonian over one particle-number block, together
/// with the parameters it was built from.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub matrix: CsrMatrix,
    pub spec: ModelSpec,
    pub phi: f64,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn to_dense(&self) -> ndarray::Array2<Complex64> {
        self.matrix.to_dense()
    }

    pub fn trace(&self) -> f64 {
        let mut t = 0.0;
        for r in 0..self.dim() {
            let (cols, vals) = self.matrix.row(r);
            for (c, v) in cols.iter().zip(vals) {
                if *c as usize == r {
                    t += v.re;
                }
            }
        }
        t
    }
}

/// Hopping bonds (j, j+1) for the given boundary; the wrap-around bond is
/// present only under periodic boundary conditions.
fn bonds(m: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut b: Vec<(usize, usize)> = (0..m - 1).map(|j| (j, j + 1)).collect();
    if boundary == Boundary::Periodic {
        b.push((m - 1, 0));
    }
    b
}

/// Assemble H over an arbitrary state space. Hopping processes that leave
/// the space are dropped, so for a restricted `SubspaceBasis` this is the
/// projected Hamiltonian P H P.
pub fn build_hamiltonian_in<S: StateSpace>(
    spec: &ModelSpec,
    space: &S,
    phi: f64,
) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    let u = interaction_profile(spec, phi);
    let field = spec.disorder_energies();
    let dim = space.dim();
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(dim * (2 * 2 + 1));
    for (col, s) in space.states().iter().enumerate() {
        // diagonal: interaction + onsite disorder
        let mut diag = 0.0;
        for (j, &nj) in s.0.iter().enumerate() {
            let n = nj as f64;
            diag += 0.5 * u[j] * n * (n - 1.0) + field[j] * n;
        }
        triplets.push((col, col, Complex64::new(diag, 0.0)));
        // hopping, both directions of every bond
        for &(a, b) in &bonds(spec.m, spec.boundary) {
            for (src, dst) in [(a, b), (b, a)] {
                if s.0[src] == 0 {
                    continue;
                }
                let mut occ = s.0.clone();
                occ[src] -= 1;
                occ[dst] += 1;
                let amp = -spec.j * ((s.0[src] as f64) * (occ[dst] as f64)).sqrt();
                if let Some(row) = space.index_of(&FockState(occ)) {
                    triplets.push((row, col, Complex64::new(amp, 0.0)));
                }
            }
        }
    }
    Ok(HamiltonianMatrix {
        matrix: CsrMatrix::from_triplets(dim, &triplets),
        spec: spec.clone(),
        phi,
    })
}

pub fn build_hamiltonian(spec: &ModelSpec, basis: &FockBasis, phi: f64) -> Result<HamiltonianMatrix> {
    assert_eq!((basis.m, basis.n), (spec.m, spec.n), "basis built for different (M, N)");
    build_hamiltonian_in(spec, basis, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(m: usize, n: usize, boundary: Boundary) -> ModelSpec {
        ModelSpec::new(m, n, 1.0, 25.0, 10.0, Beta { p: 1, q: 3 }, 0.0, boundary)
    }

    #[test]
    fn interaction_profile_modulation_off() {
        let mut s = spec(7, 1, Boundary::Open);
        s.delta = 0.0;
        s.phi = 1.3;
        let u = interaction_profile(&s, 1.3);
        assert!(u.iter().all(|&x| (x - 25.0).abs() < 1e-14));
    }

    #[test]
    fn interaction_profile_site_three() {
        // U_3 = U0 + delta since cos(2 pi) = 1
        let s = spec(6, 1, Boundary::Open);
        let u = interaction_profile(&s, 0.0);
        assert_abs_diff_eq!(u[2], 35.0, epsilon = 1e-12);
        // period 3
        assert_abs_diff_eq!(u[5], u[2], epsilon = 1e-12);
    }

    #[test]
    fn interaction_profile_sublattice_order() {
        // (3j)th sites carry the largest interaction energy at phi in
        // (-pi/3, pi/3); here phi = pi/5.
        let s = spec(30, 3, Boundary::Open);
        let u = interaction_profile(&s, std::f64::consts::PI / 5.0);
        let avg = |offset: usize| -> f64 {
            (0..10).map(|c| u[3 * c + offset]).sum::<f64>() / 10.0
        };
        let (u1, u2, u3) = (avg(0), avg(1), avg(2)); // sites 1, 2, 3 mod 3
        assert!(u3 > u2 && u2 > u1, "expected U(3j) > U(3j+2) > U(3j+1), got {u1} {u2} {u3}");
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(build_basis(5, 1).unwrap().dim(), 5);
        let b = build_basis(12, 3).unwrap();
        assert_eq!(b.dim(), 364);
        assert_eq!(b.dim(), (12 + 2) * (12 + 1) * 12 / 6);
    }

    #[test]
    fn basis_is_descending_and_indexed() {
        let b = build_basis(4, 2).unwrap();
        assert_eq!(b.dim(), 10);
        assert_eq!(b.state(0).0, vec![2, 0, 0, 0]);
        assert_eq!(b.state(b.dim() - 1).0, vec![0, 0, 0, 2]);
        for k in 1..b.dim() {
            assert!(b.state(k - 1) > b.state(k), "ordering must be strictly descending");
        }
        for k in 0..b.dim() {
            assert_eq!(b.index_of(b.state(k)), Some(k));
        }
    }

    #[test]
    fn basis_cap_guard() {
        match build_basis_with_cap(30, 3, 100) {
            Err(Error::BasisTooLarge { dim, cap }) => {
                assert_eq!(dim, 4960);
                assert_eq!(cap, 100);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn m30_n3_enumeration_matches_binomial() {
        // explicit enumeration oracle for C(32, 3)
        let mut count = 0usize;
        for a in 0..30 {
            for b in a..30 {
                for c in b..30 {
                    let _ = (a, b, c);
                    count += 1;
                }
            }
        }
        assert_eq!(count, 4960);
        assert_eq!(basis_dimension(30, 3), count);
    }

    #[test]
    fn two_site_single_particle_matrix() {
        let mut s = spec(2, 1, Boundary::Open);
        s.beta = Beta { p: 0, q: 1 };
        s.delta = 0.0;
        let b = build_basis(2, 1).unwrap();
        let h = build_hamiltonian(&s, &b, 0.0).unwrap();
        let d = h.to_dense();
        assert_abs_diff_eq!(d[(0, 0)].re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d[(0, 1)].re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d[(1, 0)].re, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_site_two_particle_block() {
        // basis {|20>, |11>, |02>}: diagonal (U, 0, U), off-diagonals -sqrt(2) J
        let mut s = spec(2, 2, Boundary::Open);
        s.beta = Beta { p: 0, q: 1 };
        s.delta = 0.0;
        let b = build_basis(2, 2).unwrap();
        let h = build_hamiltonian(&s, &b, 0.0).unwrap();
        let d = h.to_dense();
        let r2 = 2.0f64.sqrt();
        assert_abs_diff_eq!(d[(0, 0)].re, 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[(1, 1)].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[(2, 2)].re, 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[(0, 1)].re, -r2, epsilon = 1e-12);
        assert_abs_diff_eq!(d[(1, 2)].re, -r2, epsilon = 1e-12);
        assert_abs_diff_eq!(d[(0, 2)].re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn periodic_requires_commensurate_cell() {
        let s = spec(10, 2, Boundary::Periodic); // q = 3 does not divide 10
        let b = build_basis(10, 2).unwrap();
        assert!(matches!(
            build_hamiltonian(&s, &b, 0.0),
            Err(Error::IncommensurateCell { .. })
        ));
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let s = spec(6, 3, Boundary::Periodic);
        let b = build_basis(6, 3).unwrap();
        let h = build_hamiltonian(&s, &b, 0.7).unwrap();
        assert!(h.matrix.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn type2_subspace_counts() {
        let sub = type2_subspace_basis(12);
        assert_eq!(sub.dim(), 132);
        let small = type2_subspace_basis(3);
        assert_eq!(small.dim(), 6);
        for s in small.states() {
            let mut occ: Vec<u8> = s.0.iter().copied().filter(|&x| x > 0).collect();
            occ.sort_unstable();
            assert_eq!(occ, vec![1, 2]);
        }
    }

    #[test]
    fn type2_injection_roundtrip() {
        let basis = build_basis(5, 3).unwrap();
        let sub = type2_subspace_basis(5);
        let inj = sub.injection_into(&basis);
        for (k, &parent) in inj.iter().enumerate() {
            assert_eq!(basis.state(parent), &sub.states()[k]);
        }
    }

    #[test]
    fn translation_commutes_under_pbc() {
        let s = spec(12, 3, Boundary::Periodic);
        let b = build_basis(12, 3).unwrap();
        let h = build_hamiltonian(&s, &b, 0.4).unwrap();
        // permutation matrix of T_q in the basis
        let q = s.cell_size();
        let dim = b.dim();
        let perm: Vec<usize> = (0..dim)
            .map(|k| b.index_of(&b.state(k).translated(q)).unwrap())
            .collect();
        let d = h.to_dense();
        let mut worst: f64 = 0.0;
        for a in 0..dim {
            for c in 0..dim {
                // (T H)_{a c} = H_{perm^-1(a), c} vs (H T)_{a c} = H_{a, perm(c)}
                let lhs = d[(perm[a], perm[c])];
                let rhs = d[(a, c)];
                worst = worst.max((lhs - rhs).norm());
            }
        }
        assert!(worst < 1e-12, "translation commutator defect {worst}");
    }

    #[test]
    fn spec_json_field_names() {
        let s = spec(6, 3, Boundary::Periodic);
        let v = serde_json::to_value(&s).unwrap();
        for key in [
            "M",
            "N",
            "J",
            "U0",
            "delta",
            "beta",
            "phi",
            "boundary",
            "disorder_strength",
            "disorder_profile",
        ] {
            assert!(v.get(key).is_some(), "missing field {key}");
        }
        let back: ModelSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn seeded_disorder_is_deterministic_and_bounded() {
        let a = seeded_disorder_profile(12, 7);
        let b = seeded_disorder_profile(12, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (0.0..1.0).contains(v)));
        assert_ne!(a, seeded_disorder_profile(12, 8));
    }
}
