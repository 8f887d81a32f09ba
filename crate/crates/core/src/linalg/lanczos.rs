//! Lanczos iteration with full reorthogonalization and locking, for the
//! largest eigenpairs of a real symmetric operator.
//!
//! Converged Ritz pairs are locked and deflated from subsequent runs, and a
//! run is only declared complete after one extra run started orthogonal to
//! everything locked finds nothing larger. That extra run is what recovers
//! the second member of a degenerate pair, which a single Krylov sequence
//! cannot see.

use alloc::vec;
use alloc::vec::Vec;

use super::tridiag::ql_implicit;
use crate::{Error, Result};

/// Real symmetric linear operator.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Ritz residual tolerance relative to the largest Ritz value.
    pub tol: f64,
    /// Krylov basis size per run (clamped to the operator dimension).
    pub basis: usize,
    pub max_runs: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            basis: 40,
            max_runs: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in against {
            let h = dot(q, w);
            axpy(-h, q, w);
        }
    }
}

fn start_vector(n: usize, run: usize) -> Vec<f64> {
    let mut state = 0x2545_F491_4F6C_DD1Du64 ^ (run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

/// The `wanted` largest eigenpairs of `op`, descending by value.
pub fn largest_eigenpairs<O: SymmetricOperator>(op: &O, wanted: usize, opts: LanczosOptions) -> Result<Vec<RitzPair>> {
    let n = op.dim();
    if wanted > n {
        return Err(crate::error::invalid(
            "wanted",
            "more eigenpairs than the operator dimension",
        ));
    }
    let mut locked: Vec<RitzPair> = Vec::new();
    let mut restart: Option<Vec<f64>> = None;
    let mut basis_size = opts.basis.max(2 * wanted + 10);

    for run in 0..opts.max_runs {
        let free = n - locked.len();
        if free == 0 {
            break;
        }
        let m_max = basis_size.min(free);
        let locked_vecs: Vec<Vec<f64>> = locked.iter().map(|p| p.vector.clone()).collect();

        let mut r = restart.take().unwrap_or_else(|| start_vector(n, run));
        orthogonalize(&mut r, &locked_vecs);
        let mut rn = dot(&r, &r).sqrt();
        if rn == 0.0 {
            r = start_vector(n, run + 1000);
            orthogonalize(&mut r, &locked_vecs);
            rn = dot(&r, &r).sqrt();
        }
        r.iter_mut().for_each(|x| *x /= rn);

        let mut q: Vec<Vec<f64>> = Vec::with_capacity(m_max);
        let mut alpha: Vec<f64> = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut w = vec![0.0; n];
        let mut exhausted = false;
        for j in 0..m_max {
            q.push(r.clone());
            op.apply(&q[j], &mut w)?;
            let a = dot(&q[j], &w);
            alpha.push(a);
            orthogonalize(&mut w, &locked_vecs);
            orthogonalize(&mut w, &q);
            let b = dot(&w, &w).sqrt();
            beta.push(b);
            let scale = alpha.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            if b <= 1e-14 * scale {
                exhausted = true;
                break;
            }
            r.iter_mut().zip(&w).for_each(|(ri, wi)| *ri = wi / b);
        }

        let m = alpha.len();
        let mut theta = alpha.clone();
        let mut s = vec![0.0; m * m];
        for i in 0..m {
            s[i * m + i] = 1.0;
        }
        ql_implicit(&mut theta, &beta[..m - 1], Some(&mut s))?;
        let b_last = if exhausted { 0.0 } else { beta[m - 1] };
        let scale = theta
            .iter()
            .chain(locked.iter().map(|p| &p.value))
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(f64::MIN_POSITIVE);

        let ritz_vector = |k: usize| -> Vec<f64> {
            let mut v = vec![0.0; n];
            for (j, qj) in q.iter().enumerate() {
                axpy(s[j * m + k], qj, &mut v);
            }
            let nv = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            v
        };

        // descending Ritz values; lock the converged prefix
        let mut newly = 0;
        let mut first_unconverged: Option<usize> = None;
        for k in (0..m).rev() {
            let resid = (b_last * s[(m - 1) * m + k]).abs();
            if resid <= opts.tol * scale {
                let value = theta[k];
                let done_enough = locked.len() >= wanted;
                let beats_locked = locked.len() < wanted || value > locked[wanted - 1].value;
                if done_enough && !beats_locked {
                    break;
                }
                locked.push(RitzPair {
                    value,
                    vector: ritz_vector(k),
                });
                locked.sort_by(|a, b| b.value.total_cmp(&a.value));
                newly += 1;
            } else {
                first_unconverged = Some(k);
                break;
            }
        }

        if newly == 0 && locked.len() >= wanted {
            let top_unlocked = first_unconverged.map(|k| theta[k]);
            // nothing above the wanted set remains
            if top_unlocked.is_none_or(|t| t <= locked[wanted - 1].value) {
                locked.truncate(wanted);
                return Ok(locked);
            }
        }
        if let Some(k) = first_unconverged {
            if newly == 0 {
                basis_size = (basis_size * 3 / 2).min(n);
            }
            // restart from the leading unconverged Ritz direction
            let still = wanted.saturating_sub(locked.len()).max(1);
            let mut v = vec![0.0; n];
            for kk in (k + 1).saturating_sub(still)..=k {
                let rv = ritz_vector(kk);
                axpy(1.0, &rv, &mut v);
            }
            restart = Some(v);
        }
    }
    if locked.len() >= wanted && locked.len() == n {
        locked.truncate(wanted);
        return Ok(locked);
    }
    Err(Error::NotConverged {
        what: "Lanczos",
        iterations: opts.max_runs,
    })
}
