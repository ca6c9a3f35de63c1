//! Minimal complex CSR matrix used for Hamiltonians and propagators.
//!
//! Rows are assembled from coordinate triplets and compressed once; the
//! matrix is immutable afterwards. Only the operations the solvers need are
//! provided: matvec, scaled matvec with a diagonal shift, dense export and
//! a Gershgorin bound on the spectrum.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    /// Build from coordinate triplets; duplicate entries are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, Complex64)]) -> Self {
        let mut counts = vec![0usize; dim + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let mut col_idx = vec![0u32; triplets.len()];
        let mut values = vec![Complex64::default(); triplets.len()];
        let mut fill = counts.clone();
        for &(r, c, v) in triplets {
            let k = fill[r];
            col_idx[k] = c as u32;
            values[k] = v;
            fill[r] += 1;
        }
        // sort each row by column and merge duplicates
        let mut out = CsrMatrix {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::with_capacity(triplets.len()),
            values: Vec::with_capacity(triplets.len()),
        };
        let mut scratch: Vec<(u32, Complex64)> = Vec::new();
        for r in 0..dim {
            scratch.clear();
            for k in counts[r]..counts[r + 1] {
                scratch.push((col_idx[k], values[k]));
            }
            scratch.sort_unstable_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < scratch.len() {
                let (c, mut v) = scratch[i];
                let mut j = i + 1;
                while j < scratch.len() && scratch[j].0 == c {
                    v += scratch[j].1;
                    j += 1;
                }
                out.col_idx.push(c);
                out.values.push(v);
                i = j;
            }
            out.row_ptr[r + 1] = out.col_idx.len();
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[Complex64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    /// y = A x
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        if self.dim >= 2048 {
            y.par_iter_mut().enumerate().for_each(|(r, out)| {
                let mut acc = Complex64::default();
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.values[k] * x[self.col_idx[k] as usize];
                }
                *out = acc;
            });
        } else {
            for r in 0..self.dim {
                let mut acc = Complex64::default();
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.values[k] * x[self.col_idx[k] as usize];
                }
                y[r] = acc;
            }
        }
    }

    /// y = (A + diag(d)) x
    pub fn matvec_plus_diag(&self, d: &[f64], x: &[Complex64], y: &mut [Complex64]) {
        self.matvec(x, y);
        for r in 0..self.dim {
            y[r] += d[r] * x[r];
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut a = Array2::default((self.dim, self.dim));
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                a[(r, self.col_idx[k] as usize)] += self.values[k];
            }
        }
        a
    }

    /// Max deviation from Hermiticity, max_{ij} |A_ij - conj(A_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut map = std::collections::HashMap::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                map.insert((r, self.col_idx[k] as usize), self.values[k]);
            }
        }
        let mut worst = 0.0f64;
        for (&(r, c), &v) in &map {
            let vt = map.get(&(c, r)).copied().unwrap_or_default();
            worst = worst.max((v - vt.conj()).norm());
        }
        worst
    }

    /// Gershgorin interval [lo, hi] containing the spectrum, assuming the
    /// matrix is Hermitian. `extra_diag` is added per row when the stored
    /// matrix omits a real diagonal part.
    pub fn gershgorin_bounds(&self, extra_diag: Option<&[f64]>) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dim {
            let mut center = extra_diag.map_or(0.0, |d| d[r]);
            let mut radius = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] as usize == r {
                    center += self.values[k].re;
                } else {
                    radius += self.values[k].norm();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        if self.dim == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_and_sort() {
        let t = vec![
            (0, 1, Complex64::new(1.0, 0.0)),
            (0, 1, Complex64::new(2.0, 0.0)),
            (1, 0, Complex64::new(3.0, -1.0)),
            (0, 0, Complex64::new(0.5, 0.0)),
        ];
        let a = CsrMatrix::from_triplets(2, &t);
        assert_eq!(a.nnz(), 3);
        let d = a.to_dense();
        assert_eq!(d[(0, 1)], Complex64::new(3.0, 0.0));
        assert_eq!(d[(1, 0)], Complex64::new(3.0, -1.0));
        assert_eq!(d[(0, 0)], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn matvec_matches_dense() {
        let t = vec![
            (0, 1, Complex64::new(0.0, -1.0)),
            (1, 0, Complex64::new(0.0, 1.0)),
            (1, 1, Complex64::new(2.0, 0.0)),
        ];
        let a = CsrMatrix::from_triplets(2, &t);
        let x = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let mut y = [Complex64::default(); 2];
        a.matvec(&x, &mut y);
        assert_eq!(y[0], Complex64::new(1.0, 0.0));
        assert_eq!(y[1], Complex64::new(0.0, 3.0));
    }

    #[test]
    fn gershgorin_contains_spectrum() {
        let t = vec![
            (0, 0, Complex64::new(1.0, 0.0)),
            (0, 1, Complex64::new(-1.0, 0.0)),
            (1, 0, Complex64::new(-1.0, 0.0)),
            (1, 1, Complex64::new(-1.0, 0.0)),
        ];
        let a = CsrMatrix::from_triplets(2, &t);
        let (lo, hi) = a.gershgorin_bounds(None);
        // eigenvalues are +-sqrt(2) shifted by 0: handled loosely
        assert!(lo <= -1.5 && hi >= 1.5);
    }
}
