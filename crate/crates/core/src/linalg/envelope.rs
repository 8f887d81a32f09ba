//! Envelope (skyline) `LDLᵀ` factorization of complex-symmetric matrices.
//!
//! No pivoting is performed. The admittance matrices assembled by
//! [`crate::network`] have a positive-definite real part whenever the links
//! are resistive, and then every leading principal minor is nonzero so the
//! factorization exists. Fill stays inside the row envelope, which for the
//! raster site ordering is bounded by the short lattice extent.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// `A = L D Lᵀ` with unit lower-triangular `L` stored row by row over its
/// envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeLdlt {
    first: Vec<usize>,
    ptr: Vec<usize>,
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
}

#[inline]
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut re0, mut im0, mut re1, mut im1) = (0.0, 0.0, 0.0, 0.0);
    let mut ca = a.chunks_exact(2);
    let mut cb = b.chunks_exact(2);
    for (x, y) in (&mut ca).zip(&mut cb) {
        re0 += x[0].re * y[0].re - x[0].im * y[0].im;
        im0 += x[0].re * y[0].im + x[0].im * y[0].re;
        re1 += x[1].re * y[1].re - x[1].im * y[1].im;
        im1 += x[1].re * y[1].im + x[1].im * y[1].re;
    }
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        re0 += x.re * y.re - x.im * y.im;
        im0 += x.re * y.im + x.im * y.re;
    }
    Complex64::new(re0 + re1, im0 + im1)
}

/// Number of stored off-diagonal entries the factor of `a` would need.
pub fn envelope_size(a: &CsrMatrix<Complex64>) -> usize {
    (0..a.dim()).map(|i| i - first_in_row(a, i)).sum()
}

fn first_in_row(a: &CsrMatrix<Complex64>, i: usize) -> usize {
    let (cols, _) = a.row(i);
    cols.first().map_or(i, |&c| c.min(i))
}

impl EnvelopeLdlt {
    /// Factors the symmetric matrix `a` (only its lower triangle is read).
    ///
    /// A pivot with modulus at most `min_pivot` is reported as
    /// [`Error::Singular`].
    pub fn factor(a: &CsrMatrix<Complex64>, min_pivot: f64) -> Result<Self> {
        let n = a.dim();
        let first: Vec<usize> = (0..n).map(|i| first_in_row(a, i)).collect();
        let mut ptr = vec![0usize; n + 1];
        for i in 0..n {
            ptr[i + 1] = ptr[i] + (i - first[i]);
        }
        let mut lower = vec![Complex64::zero(); ptr[n]];
        let mut diag = vec![Complex64::zero(); n];

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = lower.split_at_mut(ptr[i]);
            let row = &mut rest[..i - fi];
            let mut a_ii = Complex64::zero();
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if c < i {
                    row[c - fi] = v;
                } else if c == i {
                    a_ii = v;
                }
            }
            for j in fi..i {
                let fj = first[j];
                let f = fi.max(fj);
                let lj = &done[ptr[j]..ptr[j + 1]];
                let s = dot(&row[f - fi..j - fi], &lj[f - fj..j - fj]);
                row[j - fi] -= s;
            }
            // row now holds u_ik = l_ik d_k
            let mut d = a_ii;
            for (k, u) in row.iter_mut().enumerate() {
                let l = *u / diag[fi + k];
                d -= *u * l;
                *u = l;
            }
            if !(d.norm() > min_pivot) {
                return Err(Error::Singular {
                    row: i,
                    pivot: d.norm(),
                });
            }
            diag[i] = d;
        }
        Ok(Self {
            first,
            ptr,
            lower,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn pivots(&self) -> &[Complex64] {
        &self.diag
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.ptr[i]..self.ptr[i + 1]];
            let s = dot(row, &x[fi..i]);
            x[i] -= s;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= *d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.ptr[i]..self.ptr[i + 1]];
            for (xk, l) in x[fi..i].iter_mut().zip(row) {
                *xk -= *l * xi;
            }
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
