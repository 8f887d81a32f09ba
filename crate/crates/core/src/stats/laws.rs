//! Distribution laws compared against field statistics.

use alloc::vec::Vec;

use crate::error::invalid;
use crate::quad::{integrate, integrate_to_infinity};
use crate::special::{bessel_i0e, normal_cdf, one_minus_exp_over};
use crate::Result;

/// A continuous law on the real line.
pub trait Law {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;

    /// Lower end of the support.
    fn lower(&self) -> f64 {
        f64::NEG_INFINITY
    }

    /// CDF at ascending points; laws whose CDF needs quadrature override this
    /// to integrate incrementally.
    fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.cdf(x)).collect()
    }

    /// Inverse CDF by bracketing and bisection.
    fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.lower();
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = if self.lower().is_finite() {
            (self.lower(), self.lower() + 1.0)
        } else {
            (-1.0, 1.0)
        };
        while self.cdf(lo) > p {
            lo -= 2.0 * (hi - lo);
        }
        while self.cdf(hi) < p {
            hi += 2.0 * (hi - lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Standard normal law.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitNormal;

impl Law for UnitNormal {
    fn pdf(&self, x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * core::f64::consts::PI).sqrt()
    }

    fn cdf(&self, x: f64) -> f64 {
        normal_cdf(x)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid("eps", "openness must lie in (0, 1]"));
    }
    Ok(())
}

/// `μ = (1/ε + ε)/2`, `ν = (1/ε − ε)/2` of the density law.
pub fn density_mu_nu(eps: f64) -> (f64, f64) {
    (0.5 * (1.0 / eps + eps), 0.5 * (1.0 / eps - eps))
}

/// Law of the normalized density `ρ = |V|²/⟨|V|²⟩` of a complex Gaussian
/// field whose rotated parts have `σ_q/σ_p = ε`:
/// `f(ρ) = μ exp(−μ²ρ) I₀(μνρ)`. `ε = 1` is the exponential law `e^{−ρ}`.
#[derive(Debug, Clone, Copy)]
pub struct DensityLaw {
    mu: f64,
    nu: f64,
    eps: f64,
}

impl DensityLaw {
    pub fn new(eps: f64) -> Result<Self> {
        check_eps(eps)?;
        let (mu, nu) = density_mu_nu(eps);
        Ok(Self { mu, nu, eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn segment(&self, a: f64, b: f64) -> f64 {
        integrate(|r| self.pdf(r), a, b, 1e-15, 1e-13).unwrap_or_else(|_| {
            // fall back to a fine composite rule; never reached for smooth laws
            let n = 4096;
            let h = (b - a) / n as f64;
            (0..n).map(|k| self.pdf(a + (k as f64 + 0.5) * h) * h).sum()
        })
    }
}

impl Law for DensityLaw {
    fn pdf(&self, rho: f64) -> f64 {
        if rho < 0.0 {
            return 0.0;
        }
        // e^{−μ²ρ} I₀(μνρ) = e^{−μ(μ−ν)ρ} I₀e(μνρ) and μ − ν = ε
        self.mu * (-self.mu * self.eps * rho).exp() * bessel_i0e(self.mu * self.nu * rho)
    }

    fn cdf(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        if self.nu == 0.0 {
            return -libm::expm1(-rho);
        }
        self.segment(0.0, rho).min(1.0)
    }

    fn lower(&self) -> f64 {
        0.0
    }

    fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        if self.nu == 0.0 {
            return xs.iter().map(|&x| self.cdf(x)).collect();
        }
        let mut acc = 0.0;
        let mut last = 0.0;
        xs.iter()
            .map(|&x| {
                let x = x.max(0.0);
                if x > last {
                    acc += self.segment(last, x);
                    last = x;
                }
                acc.min(1.0)
            })
            .collect()
    }
}

/// Density law value `f(ρ)` at openness `ε`.
pub fn density_pdf(eps: f64, rho: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(invalid("rho", "must be non-negative"));
    }
    Ok(DensityLaw::new(eps)?.pdf(rho))
}

/// Law of the local heat power when the four current components are
/// independent Gaussians with variances `σ_r², σ_r², σ_i², σ_i²` and
/// `ε² = σ_i²/σ_r²`:
///
/// `f(P) = (1+ε²)/((1−ε²)⟨P⟩)·[exp(−(1+ε²)P/⟨P⟩) − exp(−(1+ε²)P/(ε²⟨P⟩))]`,
/// tending to `4P/⟨P⟩²·exp(−2P/⟨P⟩)` as `ε → 1` and to `e^{−P/⟨P⟩}/⟨P⟩` as
/// `ε → 0`. Equivalently `2μ/(ν⟨P⟩)·e^{−μx} sinh(νx)`, `x = P/⟨P⟩`, with
/// `μ = (σ_r²+σ_i²)²/(2σ_r²σ_i²)` and `ν = (σ_r⁴−σ_i⁴)/(2σ_r²σ_i²)`.
#[derive(Debug, Clone, Copy)]
pub struct HeatLaw {
    eps: f64,
    mean: f64,
    /// Decay rates in units of `1/⟨P⟩`: `a = 1+ε²`, `b = (1+ε²)/ε²`.
    a: f64,
    d: f64,
}

impl HeatLaw {
    pub fn new(eps: f64, mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(invalid("mean_P", "mean heat power must be positive"));
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(invalid("eps", "openness must lie in [0, 1]"));
        }
        let e2 = eps * eps;
        let a = 1.0 + e2;
        // b − a = (1 + ε²)(1 − ε²)/ε²
        let d = if eps == 0.0 { f64::INFINITY } else { a * (1.0 - e2) / e2 };
        Ok(Self { eps, mean, a, d })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `(μ, ν)` of the `sinh` form.
    pub fn mu_nu(&self) -> (f64, f64) {
        let e2 = self.eps * self.eps;
        let (sr2, si2) = (1.0, e2);
        (
            (sr2 + si2).powi(2) / (2.0 * sr2 * si2),
            (sr2 * sr2 - si2 * si2) / (2.0 * sr2 * si2),
        )
    }
}

impl Law for HeatLaw {
    fn pdf(&self, p: f64) -> f64 {
        if p < 0.0 {
            return 0.0;
        }
        let x = p / self.mean;
        if self.d.is_infinite() {
            return self.a * (-self.a * x).exp() / self.mean;
        }
        // a·b = a(a + d), written to stay finite for small ε
        let ab = self.a * (self.a + self.d);
        ab * (-self.a * x).exp() * one_minus_exp_over(self.d, x) / self.mean
    }

    fn cdf(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        let x = p / self.mean;
        // 1 − F = e^{−ax}[1 + a(1 − e^{−dx})/d]
        let tail = if self.d.is_infinite() {
            (-self.a * x).exp()
        } else {
            (-self.a * x).exp() * (1.0 + self.a * one_minus_exp_over(self.d, x))
        };
        1.0 - tail
    }

    fn lower(&self) -> f64 {
        0.0
    }
}

/// Heat law value `f(P)`.
pub fn heat_pdf(eps: f64, mean: f64, p: f64) -> Result<f64> {
    Ok(HeatLaw::new(eps, mean)?.pdf(p))
}

/// Relative heat variance `σ_P² = (1 + ε⁴)/(1 + ε²)²` implied by the law.
pub fn sigma_p_sq(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid("eps", "openness must lie in [0, 1]"));
    }
    let e2 = eps * eps;
    Ok((1.0 + e2 * e2) / ((1.0 + e2) * (1.0 + e2)))
}

/// `⟨(P − ⟨P⟩)²⟩ / ⟨P⟩²` over the given values.
pub fn sigma_p_sq_empirical(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("heat", "no values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if !(mean > 0.0) {
        return Err(crate::Error::Degenerate("zero mean heat power"));
    }
    let var = values.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
    Ok(var / (mean * mean))
}

/// `∫₀^∞ xᵏ f(x) dx` by adaptive quadrature.
pub fn moment<L: Law>(law: &L, k: i32) -> Result<f64> {
    integrate_to_infinity(|x| x.powi(k) * law.pdf(x), law.lower().max(0.0), 1e-14, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS_SET: [f64; 6] = [0.1, 0.25, 0.5, 0.6103, 0.9, 1.0];

    #[test]
    fn density_law_normalization_and_mean() {
        for eps in EPS_SET {
            let law = DensityLaw::new(eps).unwrap();
            let (mu, nu) = density_mu_nu(eps);
            assert!((mu * mu - nu * nu - 1.0).abs() < 1e-12);
            assert!((moment(&law, 0).unwrap() - 1.0).abs() < 1e-8, "eps {eps}");
            assert!((moment(&law, 1).unwrap() - 1.0).abs() < 1e-8, "eps {eps}");
        }
    }

    #[test]
    fn density_law_rayleigh_limit() {
        for k in 0..200 {
            let rho = k as f64 * 0.05;
            assert!((density_pdf(1.0, rho).unwrap() - (-rho).exp()).abs() < 1e-12);
        }
        assert!(density_pdf(0.0, 1.0).is_err());
        assert!(density_pdf(1.2, 1.0).is_err());
    }

    #[test]
    fn density_law_matches_unscaled_form() {
        // μ e^{−μ²ρ} I₀(μνρ) evaluated without exponential scaling
        let eps = 0.5;
        let (mu, nu) = density_mu_nu(eps);
        for rho in [0.0, 0.3, 1.0, 2.5, 6.0] {
            let direct = mu * (-mu * mu * rho).exp() * crate::special::bessel_i0(mu * nu * rho);
            assert!((density_pdf(eps, rho).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn density_cdf_incremental_matches_direct() {
        let law = DensityLaw::new(0.3).unwrap();
        let xs = [0.01, 0.2, 0.21, 1.0, 3.0, 9.0];
        let inc = law.cdf_sorted(&xs);
        for (x, c) in xs.iter().zip(&inc) {
            assert!((law.cdf(*x) - c).abs() < 1e-12);
        }
        assert!((law.cdf(60.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn heat_law_closed_values() {
        assert!((heat_pdf(1.0, 1.0, 1.0).unwrap() - 4.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!((heat_pdf(1.0, 1.0, 1.0).unwrap() - 0.5413).abs() < 1e-4);
        assert!(heat_pdf(0.5, 0.0, 1.0).is_err());
        // sinh form with the corrected ν
        for eps in [0.2, 0.5, 0.8] {
            let law = HeatLaw::new(eps, 1.7).unwrap();
            let (mu, nu) = law.mu_nu();
            for p in [0.1, 1.0, 4.0] {
                let x = p / 1.7;
                let sinh_form = 2.0 * mu / (nu * 1.7) * (-mu * x).exp() * (nu * x).sinh();
                assert!((law.pdf(p) - sinh_form).abs() < 1e-12 * sinh_form.max(1.0));
            }
        }
    }

    #[test]
    fn heat_law_moments() {
        for eps in [0.05, 0.1, 0.25, 0.5, 0.9, 0.999, 1.0] {
            let mean = 2.3;
            let law = HeatLaw::new(eps, mean).unwrap();
            let m0 = moment(&law, 0).unwrap();
            let m1 = moment(&law, 1).unwrap();
            let m2 = moment(&law, 2).unwrap();
            assert!((m0 - 1.0).abs() < 1e-8, "eps {eps}: {m0}");
            assert!((m1 / mean - 1.0).abs() < 1e-8);
            let ratio = m2 / (mean * mean) - 1.0;
            assert!((ratio - sigma_p_sq(eps).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn heat_cdf_is_integral_of_pdf() {
        for eps in [0.3, 1.0] {
            let law = HeatLaw::new(eps, 1.0).unwrap();
            for p in [0.2, 1.0, 3.0] {
                let q = integrate(|x| law.pdf(x), 0.0, p, 1e-15, 1e-13).unwrap();
                assert!((law.cdf(p) - q).abs() < 1e-12);
            }
        }
        // ε → 0 limit is exponential
        let law = HeatLaw::new(0.0, 1.0).unwrap();
        assert!((law.pdf(1.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma_p_sq(1.0).unwrap(), 0.5);
        assert_eq!(sigma_p_sq(0.0).unwrap(), 1.0);
        assert!((sigma_p_sq(0.5).unwrap() - 0.68).abs() < 1e-15);
        assert!((sigma_p_sq_empirical(&[1.0, 3.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(sigma_p_sq_empirical(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn quantiles_invert_cdf() {
        let n = UnitNormal;
        assert!((n.quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-9);
        let h = HeatLaw::new(0.4, 1.0).unwrap();
        let d = DensityLaw::new(0.4).unwrap();
        for p in [0.01, 0.3, 0.9] {
            assert!((h.cdf(h.quantile(p)) - p).abs() < 1e-12);
            assert!((d.cdf(d.quantile(p)) - p).abs() < 1e-10);
        }
    }
}
