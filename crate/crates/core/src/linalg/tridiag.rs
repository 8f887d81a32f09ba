//! Symmetric tridiagonal eigenproblems: implicit QL for eigenvalues
//! (optionally accumulating rotations) and inverse iteration for selected
//! eigenvectors.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Implicit QL on the tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples rows `i` and `i + 1`).
///
/// On return `d` holds the eigenvalues in ascending order. When `z` is given
/// it must hold an `n × n` row-major matrix; the rotations are accumulated
/// into it and its columns are permuted with the eigenvalues, so passing the
/// identity yields the eigenvectors as columns.
pub fn ql_implicit(d: &mut [f64], e: &[f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    assert_eq!(e.len() + 1, n.max(1));
    if let Some(z) = z.as_deref() {
        assert_eq!(z.len(), n * n);
    }
    let mut e: Vec<f64> = e.iter().copied().chain(core::iter::once(0.0)).collect();

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::NotConverged {
                    what: "tridiagonal QL",
                    iterations: sweeps,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let row = &mut z[k * n..(k + 1) * n];
                        let zf = row[i + 1];
                        row[i + 1] = s * row[i] + c * zf;
                        row[i] = c * row[i] - s * zf;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let sorted: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    d.copy_from_slice(&sorted);
    if let Some(z) = z {
        let old = z.to_vec();
        for row in 0..n {
            for (new_col, &old_col) in order.iter().enumerate() {
                z[row * n + new_col] = old[row * n + old_col];
            }
        }
    }
    Ok(())
}

/// Eigenvectors of the tridiagonal matrix `(d, e)` for the given
/// eigenvalues (ascending, computed beforehand to full precision), by
/// inverse iteration. Vectors whose eigenvalues lie within a cluster window
/// are kept mutually orthogonal.
pub fn inverse_iteration(d: &[f64], e: &[f64], eigenvalues: &[f64]) -> Vec<Vec<f64>> {
    let n = d.len();
    let norm = (0..n)
        .map(|i| d[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let cluster = 1e-3 * norm;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());

    for (idx, &lambda) in eigenvalues.iter().enumerate() {
        let lu = TridiagLu::new(d, e, lambda, norm);
        let mut x: Vec<f64> = (0..n)
            .map(|k| {
                let t = ((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64;
                t / (1u64 << 53) as f64 - 0.5 + 1e-3
            })
            .collect();
        for _ in 0..4 {
            lu.solve_in_place(&mut x);
            for (prev, &mu) in out.iter().zip(&eigenvalues[..idx]) {
                if (lambda - mu).abs() <= cluster {
                    let proj: f64 = prev.iter().zip(&x).map(|(a, b)| a * b).sum();
                    for (xi, pi) in x.iter_mut().zip(prev) {
                        *xi -= proj * pi;
                    }
                }
            }
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm == 0.0 || !nrm.is_finite() {
                x.iter_mut().for_each(|v| *v = 1.0);
                continue;
            }
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        out.push(x);
    }
    out
}

/// LU with partial pivoting of `T − λI`; `U` has two superdiagonals.
struct TridiagLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn new(d: &[f64], e: &[f64], lambda: f64, norm: f64) -> Self {
        let n = d.len();
        let tiny = f64::EPSILON * norm;
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        // current row i: (diag, sup1, sup2) pending
        let mut a = d[0] - lambda;
        let mut b = if n > 1 { e[0] } else { 0.0 };
        let mut c = 0.0;
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if a.abs() < tiny { tiny } else { a };
                u1[i] = 0.0;
                u2[i] = 0.0;
                break;
            }
            let sub = e[i];
            let next_d = d[i + 1] - lambda;
            let next_e = if i + 2 < n { e[i + 1] } else { 0.0 };
            if sub.abs() > a.abs() {
                // swap row i and i + 1
                swapped[i] = true;
                u0[i] = sub;
                u1[i] = next_d;
                u2[i] = next_e;
                let m = a / sub;
                mult[i] = m;
                a = b - m * next_d;
                b = c - m * next_e;
                c = 0.0;
            } else {
                let piv = if a.abs() < tiny { tiny } else { a };
                u0[i] = piv;
                u1[i] = b;
                u2[i] = c;
                let m = sub / piv;
                mult[i] = m;
                a = next_d - m * b;
                b = next_e - m * c;
                c = 0.0;
            }
        }
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.mult[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn path_laplacian_spectrum() {
        // 2 on the diagonal, -1 off: eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 12;
        let mut d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        ql_implicit(&mut d, &e, Some(&mut z)).unwrap();
        for (k, &lam) in d.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((lam - exact).abs() < 1e-13);
        }
        // columns are orthonormal eigenvectors
        for col in 0..n {
            let v: Vec<f64> = (0..n).map(|r| z[r * n + col]).collect();
            let nrm: f64 = v.iter().map(|x| x * x).sum();
            assert!((nrm - 1.0).abs() < 1e-12);
            for r in 0..n {
                let mut tv = 2.0 * v[r];
                if r > 0 {
                    tv -= v[r - 1];
                }
                if r + 1 < n {
                    tv -= v[r + 1];
                }
                assert!((tv - d[col] * v[r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_iteration_matches_ql_vectors() {
        let d: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin() + 3.0).collect();
        let e: Vec<f64> = (0..8).map(|i| 0.3 + 0.1 * i as f64).collect();
        let mut vals = d.clone();
        ql_implicit(&mut vals, &e, None).unwrap();
        let vecs = inverse_iteration(&d, &e, &vals);
        for (v, &lam) in vecs.iter().zip(&vals) {
            for r in 0..d.len() {
                let mut tv = d[r] * v[r];
                if r > 0 {
                    tv += e[r - 1] * v[r - 1];
                }
                if r + 1 < d.len() {
                    tv += e[r] * v[r + 1];
                }
                assert!((tv - lam * v[r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_pair_gets_orthogonal_vectors() {
        // block-diagonal: two identical decoupled 2x2 blocks
        let d = vec![1.0, 1.0, 1.0, 1.0];
        let e = vec![0.5, 0.0, 0.5];
        let mut vals = d.clone();
        ql_implicit(&mut vals, &e, None).unwrap();
        let vecs = inverse_iteration(&d, &e, &vals);
        let dot: f64 = vecs[0].iter().zip(&vecs[1]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-12);
        let dot: f64 = vecs[2].iter().zip(&vecs[3]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-12);
    }
}
