//! Dense real symmetric eigensolver: Householder tridiagonalization, implicit
//! QL for the full spectrum, inverse iteration plus back-transformation for
//! only the eigenvectors that are asked for.

use alloc::vec;
use alloc::vec::Vec;

use super::tridiag::{inverse_iteration, ql_implicit};
use crate::Result;

/// Row-major dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    /// Sets both `(r, c)` and `(c, r)`.
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
        self.data[c * self.n + r] = v;
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] += v;
        if r != c {
            self.data[c * self.n + r] += v;
        }
    }
}

/// Orthogonal reduction `A = Q T Qᵀ` with `Q` kept as Householder
/// reflectors.
pub struct Tridiagonalization {
    n: usize,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    // reflector k acts on rows k+1.. and is stored in row k of `store`
    store: Vec<f64>,
    betas: Vec<f64>,
}

impl Tridiagonalization {
    pub fn new(a: SymmetricMatrix) -> Self {
        let n = a.n;
        let mut m = a.data;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut betas = vec![0.0; n.saturating_sub(1)];
        let mut p = vec![0.0; n];

        for k in 0..n.saturating_sub(2) {
            diag[k] = m[k * n + k];
            let lo = k + 1;
            let len = n - lo;
            let x0 = m[k * n + lo];
            let tail: f64 = m[k * n + lo + 1..k * n + n].iter().map(|v| v * v).sum();
            if tail == 0.0 {
                off[k] = x0;
                betas[k] = 0.0;
                continue;
            }
            let xnorm = (x0 * x0 + tail).sqrt();
            let alpha = if x0 >= 0.0 { -xnorm } else { xnorm };
            // v = x - alpha e1, stored over row k
            m[k * n + lo] = x0 - alpha;
            let v: Vec<f64> = m[k * n + lo..k * n + n].to_vec();
            let vtv: f64 = v.iter().map(|t| t * t).sum();
            let beta = 2.0 / vtv;
            betas[k] = beta;
            off[k] = alpha;

            // p = beta S v over the trailing block
            for r in 0..len {
                let row = &m[(lo + r) * n + lo..(lo + r) * n + n];
                p[r] = beta * row.iter().zip(&v).map(|(s, t)| s * t).sum::<f64>();
            }
            let kk = 0.5 * beta * p[..len].iter().zip(&v).map(|(s, t)| s * t).sum::<f64>();
            for r in 0..len {
                p[r] -= kk * v[r];
            }
            // S -= v wᵀ + w vᵀ
            for r in 0..len {
                let (vr, wr) = (v[r], p[r]);
                let row = &mut m[(lo + r) * n + lo..(lo + r) * n + n];
                for ((s, &vc), &wc) in row.iter_mut().zip(&v).zip(&p[..len]) {
                    *s -= vr * wc + wr * vc;
                }
            }
        }
        if n >= 2 {
            diag[n - 2] = m[(n - 2) * n + n - 2];
            off[n - 2] = m[(n - 2) * n + n - 1];
        }
        if n >= 1 {
            diag[n - 1] = m[(n - 1) * n + n - 1];
        }
        Self {
            n,
            diag,
            off,
            store: m,
            betas,
        }
    }

    /// Maps an eigenvector of `T` to the corresponding eigenvector of `A`.
    pub fn back_transform(&self, y: &mut [f64]) {
        let n = self.n;
        for k in (0..n.saturating_sub(2)).rev() {
            let beta = self.betas[k];
            if beta == 0.0 {
                continue;
            }
            let v = &self.store[k * n + k + 1..k * n + n];
            let tail = &mut y[k + 1..];
            let s = beta * v.iter().zip(tail.iter()).map(|(a, b)| a * b).sum::<f64>();
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }
}

/// Eigen-decomposition of a dense symmetric matrix.
pub struct SymmetricEigen {
    /// All eigenvalues, ascending.
    pub values: Vec<f64>,
    tri: Tridiagonalization,
}

impl SymmetricEigen {
    pub fn new(a: SymmetricMatrix) -> Result<Self> {
        let tri = Tridiagonalization::new(a);
        let mut values = tri.diag.clone();
        ql_implicit(&mut values, &tri.off, None)?;
        Ok(Self { values, tri })
    }

    /// Unit eigenvectors for the eigenvalues at `indices` (into `values`,
    /// ascending order expected for cluster detection).
    pub fn vectors(&self, indices: &[usize]) -> Vec<Vec<f64>> {
        let lambdas: Vec<f64> = indices.iter().map(|&i| self.values[i]).collect();
        let mut vecs = inverse_iteration(&self.tri.diag, &self.tri.off, &lambdas);
        for v in &mut vecs {
            self.tri.back_transform(v);
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= nrm);
        }
        vecs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> SymmetricMatrix {
        let mut a = SymmetricMatrix::zeros(n);
        for r in 0..n {
            for c in 0..=r {
                let v = ((r * 7 + c * 3) as f64 * 0.37).sin() + if r == c { 2.0 } else { 0.0 };
                a.set(r, c, v);
            }
        }
        a
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        let n = 17;
        let a = test_matrix(n);
        let eig = SymmetricEigen::new(a.clone()).unwrap();
        let idx: Vec<usize> = (0..n).collect();
        let vecs = eig.vectors(&idx);
        for (v, &lam) in vecs.iter().zip(&eig.values) {
            for r in 0..n {
                let av: f64 = (0..n).map(|c| a.get(r, c) * v[c]).sum();
                assert!((av - lam * v[r]).abs() < 1e-11, "residual {}", av - lam * v[r]);
            }
        }
        // trace check
        let tr: f64 = (0..n).map(|i| a.get(i, i)).sum();
        let s: f64 = eig.values.iter().sum();
        assert!((tr - s).abs() < 1e-11);
    }

    #[test]
    fn tiny_sizes() {
        let mut a = SymmetricMatrix::zeros(1);
        a.set(0, 0, 3.0);
        let e = SymmetricEigen::new(a).unwrap();
        assert_eq!(e.values, vec![3.0]);
        assert_eq!(e.vectors(&[0]), vec![vec![1.0]]);

        let mut a = SymmetricMatrix::zeros(2);
        a.set(0, 0, 2.0);
        a.set(1, 1, 2.0);
        a.set(0, 1, -1.0);
        let e = SymmetricEigen::new(a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] - 3.0).abs() < 1e-15);
    }
}
