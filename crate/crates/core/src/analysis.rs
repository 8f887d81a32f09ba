//! Multi-step analyses built from the solvers and statistics: source
//! placement, driven-field statistics, tolerance ensembles and streamline
//! seeding.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::invalid;
use crate::fields::{
    link_currents_perturbed, link_heat, nodal_vortices, probability_density, trace_streamlines, CurrentVariant,
    FlowField, Streamline, Vortex,
};
use crate::geometry::GridGeometry;
use crate::network::{CircuitSpec, Perturbation, Source, ToleranceSettings};
use crate::solve::{eigenmodes_near, wavelength, ComplexField, DrivenSolver, EigenOptions};
use crate::stats::{
    anisotropy_metrics, fit_density_eps, fit_histogram, gaussianity_check, ks_distance, mean_sd, openness,
    phase_rotate, sigma_p_sq, sigma_p_sq_empirical, Anisotropy, DensityLaw, HeatLaw, Histogram, HistogramFit,
    OpennessEstimate,
};
use crate::{Error, Result};

/// Interior sites farther than `radius` from `center` (billiard units).
pub fn exclusion_mask(geometry: &GridGeometry, center: (usize, usize), radius: f64) -> Vec<bool> {
    let (cx, cy) = geometry.position(center.0, center.1);
    geometry
        .interior()
        .iter()
        .map(|&(i, j)| {
            let (x, y) = geometry.position(i, j);
            (x - cx).hypot(y - cy) > radius
        })
        .collect()
}

/// Interior site of largest density, skipping `skip`; ties go to the
/// lexicographically smallest `(i, j)`.
pub fn density_argmax(geometry: &GridGeometry, rho: &[f64], skip: Option<(usize, usize)>) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for (&site, &r) in geometry.interior().iter().zip(rho) {
        if Some(site) == skip {
            continue;
        }
        best = match best {
            Some((s, b)) if r < b || (r == b && s < site) => Some((s, b)),
            _ => Some((site, r)),
        };
    }
    best.map(|(s, _)| s)
}

/// Density maximum of the lossless mode nearest `omega`, the default
/// starting point for source placement.
pub fn modal_maximum(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    omega: f64,
    pert: &Perturbation,
    eigen: &EigenOptions,
) -> Result<(usize, usize)> {
    let lossless = spec.with_resistance(0.0)?;
    let mode = eigenmodes_near(geometry, &lossless, pert, omega, 1, eigen)?
        .into_iter()
        .next()
        .ok_or(Error::Degenerate("no mode found"))?;
    let rho: Vec<f64> = mode.vector.iter().map(|v| v * v).collect();
    density_argmax(geometry, &rho, None).ok_or(Error::Degenerate("empty network"))
}

/// Outcome of moving the source toward the density maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub site: (usize, usize),
    /// Whether the largest density away from the source ended up on a
    /// lattice neighbor of it (the source sits on the maximum).
    pub converged: bool,
    /// Relocations performed.
    pub moves: usize,
    /// Sites visited, starting site first.
    pub path: Vec<(usize, usize)>,
    /// Field driven from `site`.
    pub field: ComplexField,
}

/// Repeatedly solves with a unit source and moves it to the density argmax
/// away from its own site, at most `n_iter` times. Stops early once the
/// argmax is adjacent to the source.
pub fn place_source_at_maximum(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    omega: f64,
    pert: &Perturbation,
    start: (usize, usize),
    n_iter: usize,
) -> Result<Placement> {
    if n_iter == 0 {
        return Err(invalid("n_iter", "must be at least 1"));
    }
    let solver = DrivenSolver::new(geometry, spec, omega, pert)?;
    let mut site = start;
    let mut path = alloc::vec![site];
    let mut moves = 0;
    loop {
        let field = solver.solve(&Source::unit(site))?;
        let rho = probability_density(&field)?;
        let next = density_argmax(geometry, &rho, Some(site)).ok_or(Error::Degenerate("single-site network"))?;
        let adjacent = next.0.abs_diff(site.0) <= 1 && next.1.abs_diff(site.1) <= 1;
        if adjacent || moves == n_iter {
            return Ok(Placement {
                site,
                converged: adjacent,
                moves,
                path,
                field,
            });
        }
        site = next;
        path.push(site);
        moves += 1;
    }
}

/// Statistics of one driven field over the sites kept by the source mask.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsSummary {
    pub omega: f64,
    pub source: (usize, usize),
    /// Sites within this distance of the source are left out.
    pub mask_radius: f64,
    pub n_sites: usize,
    pub theta: f64,
    pub openness: OpennessEstimate,
    pub participation_ratio: f64,
    /// KS of the density against the law at the measured `ε`.
    pub ks_density: f64,
    /// KS against the exponential (fully open) law.
    pub ks_rayleigh: f64,
    /// `ε` minimizing the density KS distance, and that distance.
    pub eps_fitted: f64,
    pub ks_density_fitted: f64,
    pub density_fit: HistogramFit,
    /// Heat law at the current-derived `ε` and the measured mean.
    pub heat_fit: HistogramFit,
    pub mean_heat: f64,
    pub sigma_p2_empirical: f64,
    pub sigma_p2_law: f64,
    /// Standardized `Re I_x` against the unit normal.
    pub current_gaussianity: HistogramFit,
    pub anisotropy: Anisotropy,
}

/// Options of [`driven_statistics`].
#[derive(Debug, Clone, Copy)]
pub struct StatsOptions {
    /// Mask radius in wavelengths.
    pub mask_wavelengths: f64,
    pub density_bins: usize,
    pub heat_bins: usize,
    pub current_bins: usize,
    pub fit_eps: bool,
}

impl Default for StatsOptions {
    fn default() -> Self {
        Self {
            mask_wavelengths: 1.0,
            density_bins: 50,
            heat_bins: 50,
            current_bins: 50,
            fit_eps: true,
        }
    }
}

/// Phase rotation, openness, density and heat fits, current Gaussianity and
/// anisotropy of a driven field. Sites within `mask_wavelengths·λ` of the
/// source are excluded.
pub fn driven_statistics(
    geometry: &GridGeometry,
    field: &ComplexField,
    spec: &CircuitSpec,
    pert: &Perturbation,
    opts: &StatsOptions,
) -> Result<StatsSummary> {
    let source = field.source.ok_or(invalid("field", "has no source"))?;
    let lambda = wavelength(spec, geometry.spacing(), field.omega)?;
    let radius = opts.mask_wavelengths * lambda;
    let mask = exclusion_mask(geometry, source.site, radius);
    let kept: Vec<(usize, usize)> = geometry
        .interior()
        .iter()
        .zip(&mask)
        .filter(|(_, &k)| k)
        .map(|(s, _)| *s)
        .collect();
    if kept.is_empty() {
        return Err(Error::Degenerate("mask leaves no sites"));
    }

    let rotated = phase_rotate(field, Some(&mask))?;
    let rho_all = probability_density(field)?;
    let rho_kept: Vec<f64> = rho_all.iter().zip(&mask).filter(|(_, &k)| k).map(|(r, _)| *r).collect();
    let m = rho_kept.iter().sum::<f64>() / rho_kept.len() as f64;
    let rho: Vec<f64> = rho_kept.iter().map(|r| r / m).collect();

    let currents = link_currents_perturbed(geometry, field, spec, pert, field.omega, CurrentVariant::Physical)?;
    let comps = currents.components_at(&kept);
    let est = openness(&rotated, &comps)?;

    let heat_all = link_heat(&currents);
    let heat: Vec<f64> = kept
        .iter()
        .map(|&(i, j)| heat_all.values[j * heat_all.nx + i])
        .collect();
    let mean_heat = heat.iter().sum::<f64>() / heat.len() as f64;

    let eps = est.eps_field.max(1e-6);
    let law = DensityLaw::new(eps)?;
    let density_fit = fit_histogram(&rho, &law, opts.density_bins, 1)?;
    let ks_rayleigh = ks_distance(&rho, &DensityLaw::new(1.0)?)?;
    let (eps_fitted, ks_density_fitted) = if opts.fit_eps {
        fit_density_eps(&rho, 0.01)?
    } else {
        (eps, density_fit.ks)
    };

    let heat_law = HeatLaw::new(est.eps_current, mean_heat)?;
    let heat_fit = fit_histogram(&heat, &heat_law, opts.heat_bins, 2)?;

    let re_ix: Vec<f64> = comps.iter().map(|c| c[0]).collect();
    Ok(StatsSummary {
        omega: field.omega,
        source: source.site,
        mask_radius: radius,
        n_sites: kept.len(),
        theta: rotated.theta,
        openness: est,
        participation_ratio: crate::fields::participation_ratio(&rho),
        ks_density: density_fit.ks,
        ks_rayleigh,
        eps_fitted,
        ks_density_fitted,
        density_fit,
        heat_fit,
        mean_heat,
        sigma_p2_empirical: sigma_p_sq_empirical(&heat)?,
        sigma_p2_law: sigma_p_sq(est.eps_current)?,
        current_gaussianity: gaussianity_check(&re_ix, opts.current_bins)?,
        anisotropy: anisotropy_metrics(&comps)?,
    })
}

/// What each ensemble realization computes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleTarget {
    /// The lossless mode nearest the target frequency.
    Eigenmode,
    /// A driven solve from a fixed site; the rotated real part is used.
    Driven { site: (usize, usize) },
}

/// Standardized real-part samples, `(x − mean)/sd` over the interior.
pub fn standardize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(invalid("values", "empty"));
    }
    let (mean, sd) = mean_sd(values);
    if !(sd > 0.0) {
        return Err(Error::Degenerate("field has zero variance"));
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

/// Standardized `Re V` of one realization. `stream` selects the
/// perturbation substream of `seed`; `tau = 0` gives the unperturbed network.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_realization(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    omega: f64,
    tolerance: ToleranceSettings,
    seed: u64,
    stream: u64,
    target: EnsembleTarget,
    eigen: &EigenOptions,
) -> Result<Vec<f64>> {
    let pert = if tolerance.tau > 0.0 {
        Perturbation::sample(geometry, tolerance, seed, stream)?
    } else {
        Perturbation::none(geometry)
    };
    let re = match target {
        EnsembleTarget::Eigenmode => {
            let modes = eigenmodes_near(geometry, spec, &pert, omega, 1, eigen)?;
            modes
                .into_iter()
                .next()
                .ok_or(Error::Degenerate("no mode found"))?
                .vector
        }
        EnsembleTarget::Driven { site } => {
            let field = DrivenSolver::new(geometry, spec, omega, &pert)?.solve(&Source::unit(site))?;
            phase_rotate(&field, None)?.p
        }
    };
    standardize(&re)
}

/// Shared edges for an ensemble: `bins` equal cells over `±max|z|` of the
/// unperturbed sample.
pub fn ensemble_edges(reference: &[f64], bins: usize) -> Result<Vec<f64>> {
    let m = reference.iter().fold(0.0f64, |a, z| a.max(z.abs()));
    Histogram::uniform_edges(-m, m, bins)
}

/// Averaged histogram over `n` realizations on fixed edges, run serially.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_average(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    omega: f64,
    tolerance: ToleranceSettings,
    n: usize,
    seed: u64,
    target: EnsembleTarget,
    edges: &[f64],
    eigen: &EigenOptions,
) -> Result<Histogram> {
    if n == 0 {
        return Err(invalid("n_realizations", "must be at least 1"));
    }
    if tolerance.tau == 0.0 && n > 1 {
        return Err(invalid("tau", "an ensemble without tolerance is degenerate"));
    }
    let hists = (0..n as u64)
        .map(|k| {
            let z = ensemble_realization(geometry, spec, omega, tolerance, seed, k, target, eigen)?;
            Histogram::with_edges(&z, edges)
        })
        .collect::<Result<Vec<_>>>()?;
    Histogram::average(&hists)
}

/// `count` seeds evenly spaced on a circle, keeping those inside the
/// network.
pub fn seed_ring(geometry: &GridGeometry, center: (f64, f64), radius: f64, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / count as f64;
            (center.0 + radius * libm::cos(t), center.1 + radius * libm::sin(t))
        })
        .filter(|&(x, y)| geometry.site_at(x, y).is_some())
        .collect()
}

/// Streamlines of the active-power flow seeded on a ring around the source,
/// together with the field's vortices.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPicture {
    pub vortices: Vec<Vortex>,
    pub streamlines: Vec<Streamline>,
    /// Per streamline, the distance from its end to the nearest vortex.
    pub end_to_vortex: Vec<f64>,
}

pub fn flow_picture(
    geometry: &GridGeometry,
    field: &ComplexField,
    spec: &CircuitSpec,
    pert: &Perturbation,
    seeds: usize,
    max_steps: usize,
) -> Result<FlowPicture> {
    let source = field.source.ok_or(invalid("field", "has no source"))?;
    let a0 = geometry.spacing();
    let currents = link_currents_perturbed(geometry, field, spec, pert, field.omega, CurrentVariant::Physical)?;
    let flow = FlowField::from_currents(geometry, field, &currents);
    let center = geometry.position(source.site.0, source.site.1);
    let ring = seed_ring(geometry, center, 1.5 * a0, seeds);
    let streamlines = trace_streamlines(geometry, &flow, &ring, 0.25 * a0, max_steps)?;
    let vortices = nodal_vortices(geometry, field);
    let end_to_vortex = streamlines
        .iter()
        .map(|s| {
            let (x, y) = *s.points.last().unwrap();
            vortices
                .iter()
                .map(|v| (v.x - x).hypot(v.y - y))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(FlowPicture {
        vortices,
        streamlines,
        end_to_vortex,
    })
}
