//! Single-field statistics: phase rotation, openness, distribution laws and
//! goodness of fit.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::invalid;
use crate::solve::ComplexField;
use crate::{Error, Result};

mod fit;
mod laws;
mod oracle;

pub use fit::{fit_histogram, gaussianity_check, ks_critical, ks_distance, mean_sd, Histogram, HistogramFit};
pub use laws::{
    density_mu_nu, density_pdf, heat_pdf, moment, sigma_p_sq, sigma_p_sq_empirical, DensityLaw, HeatLaw, Law,
    UnitNormal,
};
pub use oracle::{current_chunk, gaussian_currents, heat_of, mc_heat_oracle, CHUNK};

/// Field turned by a global phase so its real and imaginary parts are
/// uncorrelated, the real part carrying the larger variance.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedField {
    /// Applied phase: `p + iq = V e^{iθ}`.
    pub theta: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// `⟨p²⟩` and `⟨q²⟩`.
    pub sigma_p2: f64,
    pub sigma_q2: f64,
}

impl RotatedField {
    /// Openness `ε = σ_q/σ_p ∈ [0, 1]`.
    pub fn eps(&self) -> f64 {
        libm::sqrt(self.sigma_q2 / self.sigma_p2)
    }

    /// `⟨p q⟩`, zero up to rounding.
    pub fn covariance(&self) -> f64 {
        self.p.iter().zip(&self.q).map(|(a, b)| a * b).sum::<f64>() / self.p.len() as f64
    }
}

/// Rotation `θ = −½ arg⟨V²⟩` of the given values.
pub fn phase_rotate_values(values: &[Complex64]) -> Result<RotatedField> {
    if values.is_empty() {
        return Err(invalid("values", "no sites selected"));
    }
    let n = values.len() as f64;
    let m2: Complex64 = values.iter().map(|v| v * v).sum::<Complex64>() / n;
    let theta = -0.5 * m2.arg();
    let rot = Complex64::from_polar(1.0, theta);
    let (p, q): (Vec<f64>, Vec<f64>) = values.iter().map(|v| v * rot).map(|w| (w.re, w.im)).unzip();
    let sigma_p2 = p.iter().map(|x| x * x).sum::<f64>() / n;
    let sigma_q2 = q.iter().map(|x| x * x).sum::<f64>() / n;
    if !(sigma_p2 > 0.0) {
        return Err(Error::Degenerate("zero field cannot be phase rotated"));
    }
    Ok(RotatedField {
        theta,
        p,
        q,
        sigma_p2,
        sigma_q2,
    })
}

/// Phase rotation over the interior sites, or over those where `mask` is
/// true.
pub fn phase_rotate(field: &ComplexField, mask: Option<&[bool]>) -> Result<RotatedField> {
    match mask {
        None => phase_rotate_values(&field.values),
        Some(m) => {
            if m.len() != field.values.len() {
                return Err(invalid("mask", "length differs from the interior site count"));
            }
            let v: Vec<Complex64> = field
                .values
                .iter()
                .zip(m)
                .filter(|(_, &k)| k)
                .map(|(v, _)| *v)
                .collect();
            phase_rotate_values(&v)
        }
    }
}

/// Second moments of link currents after the rotation
/// `θ = −½ arg⟨I_x² + I_y²⟩`, averaged over both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentStats {
    pub theta: f64,
    /// `⟨I'²⟩` per component.
    pub sigma_r2: f64,
    /// `⟨I''²⟩` per component.
    pub sigma_i2: f64,
}

impl CurrentStats {
    /// `ε = σ_i/σ_r` entering the heat law.
    pub fn eps(&self) -> f64 {
        libm::sqrt(self.sigma_i2 / self.sigma_r2)
    }
}

fn rotate_currents(components: &[[f64; 4]]) -> Result<(f64, Vec<[f64; 4]>)> {
    if components.is_empty() {
        return Err(invalid("currents", "no sites selected"));
    }
    let m2: Complex64 = components
        .iter()
        .map(|c| {
            let (a, b) = (Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3]));
            a * a + b * b
        })
        .sum();
    let theta = -0.5 * m2.arg();
    let rot = Complex64::from_polar(1.0, theta);
    let out = components
        .iter()
        .map(|c| {
            let a = Complex64::new(c[0], c[1]) * rot;
            let b = Complex64::new(c[2], c[3]) * rot;
            [a.re, a.im, b.re, b.im]
        })
        .collect();
    Ok((theta, out))
}

/// Rotated current variances from `(Re I_x, Im I_x, Re I_y, Im I_y)` samples.
pub fn current_statistics(components: &[[f64; 4]]) -> Result<CurrentStats> {
    let (theta, rot) = rotate_currents(components)?;
    let n = 2.0 * rot.len() as f64;
    let sigma_r2 = rot.iter().map(|c| c[0] * c[0] + c[2] * c[2]).sum::<f64>() / n;
    let sigma_i2 = rot.iter().map(|c| c[1] * c[1] + c[3] * c[3]).sum::<f64>() / n;
    if !(sigma_r2 > 0.0) {
        return Err(Error::Degenerate("zero currents"));
    }
    Ok(CurrentStats {
        theta,
        sigma_r2,
        sigma_i2,
    })
}

/// Directional anisotropy of the rotated currents:
/// `r' = (⟨I_x'²⟩ − ⟨I_y'²⟩)/(⟨I_x'²⟩ + ⟨I_y'²⟩)` and likewise `r''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anisotropy {
    pub r_real: f64,
    pub r_imag: f64,
}

pub fn anisotropy_metrics(components: &[[f64; 4]]) -> Result<Anisotropy> {
    let (_, rot) = rotate_currents(components)?;
    let sum = |k: usize| rot.iter().map(|c| c[k] * c[k]).sum::<f64>();
    let (xr, xi, yr, yi) = (sum(0), sum(1), sum(2), sum(3));
    if !(xr + yr > 0.0) || !(xi + yi > 0.0) {
        return Err(Error::Degenerate("a current component vanishes at every site"));
    }
    Ok(Anisotropy {
        r_real: (xr - yr) / (xr + yr),
        r_imag: (xi - yi) / (xi + yi),
    })
}

/// Openness of a field measured both from its voltages and from its
/// currents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpennessEstimate {
    /// `σ_q/σ_p` of the rotated voltages.
    pub eps_field: f64,
    /// `σ_i/σ_r` of the rotated currents.
    pub eps_current: f64,
    pub sigma_p2: f64,
    pub sigma_q2: f64,
    pub sigma_r2: f64,
    pub sigma_i2: f64,
    /// Density-law parameters at `eps_field`.
    pub mu: f64,
    pub nu: f64,
}

pub fn openness(rotated: &RotatedField, currents: &[[f64; 4]]) -> Result<OpennessEstimate> {
    let c = current_statistics(currents)?;
    let eps_field = rotated.eps();
    let (mu, nu) = density_mu_nu(eps_field);
    Ok(OpennessEstimate {
        eps_field,
        eps_current: c.eps(),
        sigma_p2: rotated.sigma_p2,
        sigma_q2: rotated.sigma_q2,
        sigma_r2: c.sigma_r2,
        sigma_i2: c.sigma_i2,
        mu,
        nu,
    })
}

/// The `ε ∈ [lo, 1]` whose density law is closest to the sample in KS
/// distance, by golden-section search. Returns `(ε, KS)`.
pub fn fit_density_eps(rho: &[f64], lo: f64) -> Result<(f64, f64)> {
    if !(lo > 0.0 && lo < 1.0) {
        return Err(invalid("lo", "must lie in (0, 1)"));
    }
    let mut s = rho.to_vec();
    if s.is_empty() || s.iter().any(|x| !x.is_finite()) {
        return Err(invalid("rho", "need finite samples"));
    }
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let ks = |eps: f64| -> f64 {
        let law = DensityLaw::new(eps).expect("eps in range");
        let cdf = law.cdf_sorted(&s);
        let mut d: f64 = 0.0;
        for (k, &f) in cdf.iter().enumerate() {
            d = d.max((k + 1) as f64 / n - f).max(f - k as f64 / n);
        }
        d
    };
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (lo, 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (ks(x1), ks(x2));
    while b - a > 1e-4 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = ks(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = ks(x2);
        }
    }
    let candidates = [(x1, f1), (x2, f2), (1.0, ks(1.0))];
    Ok(candidates
        .into_iter()
        .fold((1.0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(sp: f64, sq: f64, theta: f64, n: usize, seed: u64) -> Vec<Complex64> {
        let c = gaussian_currents(sp, sq, n, seed).unwrap();
        let rot = Complex64::from_polar(1.0, -theta);
        c.iter().map(|v| Complex64::new(v[0], v[1]) * rot).collect()
    }

    #[test]
    fn rotation_recovers_openness() {
        let v = synthetic(1.0, 0.4, 0.7, 200_000, 11);
        let r = phase_rotate_values(&v).unwrap();
        assert!((r.eps() - 0.4).abs() < 0.01);
        assert!(r.sigma_q2 <= r.sigma_p2);
        assert!(r.covariance().abs() < 1e-10 * (r.sigma_p2 * r.sigma_q2).sqrt());
        let rho: Vec<f64> = {
            let m = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64;
            v.iter().map(|z| z.norm_sqr() / m).collect()
        };
        assert!(ks_distance(&rho, &DensityLaw::new(0.4).unwrap()).unwrap() < 0.005);
    }

    #[test]
    fn density_fit_finds_eps() {
        let v = synthetic(1.0, 0.3, 0.0, 50_000, 5);
        let m = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64;
        let rho: Vec<f64> = v.iter().map(|z| z.norm_sqr() / m).collect();
        let (eps, ks) = fit_density_eps(&rho, 0.02).unwrap();
        assert!((eps - 0.3).abs() < 0.03, "{eps}");
        assert!(ks < 0.01);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(phase_rotate_values(&[Complex64::new(0.0, 0.0); 4]).is_err());
        assert!(phase_rotate_values(&[]).is_err());
        assert!(current_statistics(&[[0.0; 4]]).is_err());
    }

    #[test]
    fn anisotropy_of_one_directional_currents() {
        let c: Vec<[f64; 4]> = (0..50)
            .map(|k| [1.0 + k as f64, 0.3 * (k as f64).sin(), 0.0, 0.0])
            .collect();
        let a = anisotropy_metrics(&c).unwrap();
        assert!((a.r_real - 1.0).abs() < 1e-12 && (a.r_imag - 1.0).abs() < 1e-12);
        let iso = gaussian_currents(1.0, 0.5, 100_000, 2).unwrap();
        let a = anisotropy_metrics(&iso).unwrap();
        assert!(a.r_real.abs() < 0.02 && a.r_imag.abs() < 0.02);
        let s = current_statistics(&iso).unwrap();
        assert!((s.eps() - 0.5).abs() < 0.01);
    }

    #[test]
    fn openness_combines_both_routes() {
        let c = gaussian_currents(1.0, 0.5, 20_000, 9).unwrap();
        let v: Vec<Complex64> = c.iter().map(|x| Complex64::new(x[0], x[1])).collect();
        let o = openness(&phase_rotate_values(&v).unwrap(), &c).unwrap();
        assert!((o.mu * o.mu - o.nu * o.nu - 1.0).abs() < 1e-12);
        assert!((o.eps_field - 0.5).abs() < 0.02 && (o.eps_current - 0.5).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn eps_is_scale_and_phase_invariant(
            re in proptest::collection::vec(-1.0f64..1.0, 8..40),
            im_scale in 0.01f64..2.0,
            scale in 0.01f64..100.0,
            phase in -3.0f64..3.0,
        ) {
            let v: Vec<Complex64> = re.iter().enumerate()
                .map(|(k, &x)| Complex64::new(x + 0.01, im_scale * ((k as f64) * 1.3).sin()))
                .collect();
            let base = phase_rotate_values(&v).unwrap();
            let c = Complex64::from_polar(scale, phase);
            let moved: Vec<Complex64> = v.iter().map(|z| z * c).collect();
            let r = phase_rotate_values(&moved).unwrap();
            prop_assert!((r.eps() - base.eps()).abs() < 1e-9);
            prop_assert!(r.eps() <= 1.0 + 1e-12);
            prop_assert!(r.covariance().abs() <= 1e-10 * (r.sigma_p2 * r.sigma_q2).sqrt() + 1e-14 * r.sigma_p2);
        }

        #[test]
        fn mu_nu_identity(eps in 1e-3f64..=1.0) {
            let (mu, nu) = density_mu_nu(eps);
            prop_assert!((mu * mu - nu * nu - 1.0).abs() < 1e-9 * mu * mu);
        }

        #[test]
        fn heat_law_normalized(eps in 0.02f64..=1.0, mean in 0.1f64..10.0) {
            let law = HeatLaw::new(eps, mean).unwrap();
            prop_assert!((moment(&law, 0).unwrap() - 1.0).abs() < 1e-8);
            prop_assert!((law.cdf(1e3 * mean) - 1.0).abs() < 1e-12);
        }
    }
}
