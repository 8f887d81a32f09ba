//! Experiment orchestration.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rlcnet_core::analysis::{
    driven_statistics, ensemble_edges, ensemble_realization, flow_picture, modal_maximum, place_source_at_maximum,
    EnsembleTarget, StatsOptions,
};
use rlcnet_core::fields::{
    link_currents_perturbed, link_heat, participation_ratio, power_balance, probability_density, CurrentVariant,
};
use rlcnet_core::geometry::{require_interior, GridGeometry};
use rlcnet_core::network::{CircuitSpec, Perturbation, Source};
use rlcnet_core::solve::{
    damping_length, driven_response, eigenmodes_lossless, quality_factor, resonance_sweep, wavelength, ComplexField,
    EigenOptions,
};
use rlcnet_core::stats::{
    current_chunk, fit_histogram, heat_of, sigma_p_sq, sigma_p_sq_empirical, HeatLaw, Histogram, UnitNormal, CHUNK,
};
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig, Placement, Target};
use crate::output;
use crate::RunError;

/// Where the outputs of a run went.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub summary: Value,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: &'a Path,
    files: Vec<String>,
}

impl Ctx<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.out.join(name)
    }
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

fn perturbation(cfg: &ExperimentConfig, g: &GridGeometry) -> Result<Perturbation, RunError> {
    if cfg.tau > 0.0 {
        let seed = cfg
            .seed
            .ok_or_else(|| RunError::Config("seed: required when tau > 0".into()))?;
        Ok(Perturbation::sample(g, cfg.tolerance(cfg.tau), seed, 0)?)
    } else {
        Ok(Perturbation::none(g))
    }
}

fn source_site(cfg: &ExperimentConfig, g: &GridGeometry) -> Result<Option<(usize, usize)>, RunError> {
    match cfg.source {
        Some([i, j]) => {
            require_interior(g, (i, j))?;
            Ok(Some((i, j)))
        }
        None => Ok(None),
    }
}

/// Drive at `cfg.omega`, placing the source per the config.
fn drive(
    cfg: &ExperimentConfig,
    g: &GridGeometry,
    spec: &CircuitSpec,
    pert: &Perturbation,
) -> Result<(ComplexField, Value), RunError> {
    let omega = cfg.omega.expect("validated");
    let given = source_site(cfg, g)?;
    match cfg.placement {
        Placement::Explicit => {
            let site = given.expect("validated");
            let field = driven_response(g, spec, omega, &Source::unit(site), pert)?;
            Ok((field, json!({"rule": "explicit", "site": [site.0, site.1]})))
        }
        Placement::DensityMaximum => {
            let start = match given {
                Some(s) => s,
                None => modal_maximum(g, spec, omega, pert, &EigenOptions::default())?,
            };
            let p = place_source_at_maximum(g, spec, omega, pert, start, cfg.place_iterations)?;
            let info = json!({
                "rule": "density_maximum",
                "start": [start.0, start.1],
                "site": [p.site.0, p.site.1],
                "converged": p.converged,
                "moves": p.moves,
                "path": p.path.iter().map(|s| [s.0, s.1]).collect::<Vec<_>>(),
            });
            Ok((p.field, info))
        }
    }
}

fn write_drive_files(ctx: &mut Ctx, g: &GridGeometry, field: &ComplexField) -> Result<(), RunError> {
    output::field_csv(&ctx.path("field.csv"), g, field)?;
    let rho = probability_density(field)?;
    output::scalar_csv(&ctx.path("density.csv"), g, &rho)?;
    output::pgm(&ctx.path("density.pgm"), g, &rho)?;
    Ok(())
}

fn spectrum(ctx: &mut Ctx, g: &GridGeometry, spec: &CircuitSpec) -> Result<Value, RunError> {
    if ctx.cfg.tau > 0.0 {
        return Err(RunError::Config(
            "tau: the spectrum experiment covers the unperturbed network".into(),
        ));
    }
    let modes = eigenmodes_lossless(g, spec, ctx.cfg.n_modes)?;
    output::modes_csv(&ctx.path("modes.csv"), &modes)?;
    Ok(json!({
        "n_modes": modes.len(),
        "lowest_eps": modes.first().map(|m| m.eps),
        "lowest_omega": modes.first().map(|m| m.omega),
    }))
}

fn drive_experiment(
    ctx: &mut Ctx,
    g: &GridGeometry,
    spec: &CircuitSpec,
    pert: &Perturbation,
) -> Result<Value, RunError> {
    let (field, placement) = drive(ctx.cfg, g, spec, pert)?;
    write_drive_files(ctx, g, &field)?;
    let mut summary = json!({ "placement": placement });
    let rho = probability_density(&field)?;
    summary["participation_ratio"] = json!(participation_ratio(&rho));
    if spec.resistance() > 0.0 {
        let currents = link_currents_perturbed(g, &field, spec, pert, field.omega, CurrentVariant::Physical)?;
        let heat = link_heat(&currents);
        output::scalar_csv(&ctx.path("heat.csv"), g, &heat.interior(g))?;
        let b = power_balance(g, &field, spec, pert, &heat)?;
        summary["power_balance"] = json!({"injected": b.injected, "dissipated": b.dissipated, "residual": b.residual});
    }
    Ok(summary)
}

fn sweep(ctx: &mut Ctx, g: &GridGeometry, spec: &CircuitSpec, pert: &Perturbation) -> Result<Value, RunError> {
    let cfg = ctx.cfg;
    let site = source_site(cfg, g)?.expect("validated");
    let peaks = resonance_sweep(
        g,
        spec,
        (cfg.omega_min.unwrap(), cfg.omega_max.unwrap()),
        cfg.n_points,
        &Source::unit(site),
        pert,
    )?;
    output::peaks_csv(&ctx.path("peaks.csv"), &peaks)?;
    Ok(json!({ "n_peaks": peaks.len() }))
}

fn ensemble(ctx: &mut Ctx, g: &GridGeometry, spec: &CircuitSpec) -> Result<Value, RunError> {
    let cfg = ctx.cfg;
    let omega = cfg.omega.unwrap();
    let seed = cfg.seed.unwrap();
    let eigen = EigenOptions::default();
    let target = match cfg.ensemble_target {
        Target::Eigenmode => EnsembleTarget::Eigenmode,
        Target::Driven => {
            let site = source_site(cfg, g)?.expect("validated");
            EnsembleTarget::Driven { site }
        }
    };
    let z0 = ensemble_realization(g, spec, omega, cfg.tolerance(0.0), seed, 0, target, &eigen)?;
    let edges = ensemble_edges(&z0, cfg.ensemble_bins)?;
    let h0 = Histogram::with_edges(&z0, &edges)?;
    let model = h0.model(&UnitNormal);
    output::averaged_csv(&ctx.path("hist_tau_0.csv"), &h0, &model)?;
    let mut rows = vec![json!({"tau": 0.0, "realizations": 1, "ks": h0.ks_against(&UnitNormal)})];
    for &tau in &cfg.taus {
        let tol = cfg.tolerance(tau);
        let hists = (0..cfg.n_realizations as u64)
            .into_par_iter()
            .map(|k| {
                let z = ensemble_realization(g, spec, omega, tol, seed, k, target, &eigen)?;
                Histogram::with_edges(&z, &edges)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let avg = Histogram::average(&hists)?;
        output::averaged_csv(&ctx.path(&format!("hist_tau_{tau}.csv")), &avg, &model)?;
        rows.push(json!({"tau": tau, "realizations": cfg.n_realizations, "ks": avg.ks_against(&UnitNormal)}));
    }
    Ok(json!({ "edges_from": "tau = 0", "bins": cfg.ensemble_bins, "histograms": rows }))
}

fn fit_json(f: &rlcnet_core::stats::HistogramFit) -> Value {
    json!({"n": f.n, "bins": f.counts.len(), "ks": f.ks, "chi2": f.chi2, "dof": f.dof, "chi2_per_dof": f.chi2_per_dof()})
}

fn stats_experiment(
    ctx: &mut Ctx,
    g: &GridGeometry,
    spec: &CircuitSpec,
    pert: &Perturbation,
) -> Result<(Value, f64), RunError> {
    let (field, placement) = drive(ctx.cfg, g, spec, pert)?;
    write_drive_files(ctx, g, &field)?;
    let opts = StatsOptions {
        mask_wavelengths: ctx.cfg.mask_wavelengths,
        density_bins: ctx.cfg.bins,
        heat_bins: ctx.cfg.bins,
        current_bins: ctx.cfg.bins,
        fit_eps: true,
    };
    let s = driven_statistics(g, &field, spec, pert, &opts)?;
    output::fit_csv(&ctx.path("hist_density.csv"), &s.density_fit)?;
    output::fit_csv(&ctx.path("hist_heat.csv"), &s.heat_fit)?;
    output::fit_csv(&ctx.path("hist_current.csv"), &s.current_gaussianity)?;
    let o = s.openness;
    let summary = json!({
        "placement": placement,
        "mask_radius": s.mask_radius,
        "n_sites": s.n_sites,
        "theta": s.theta,
        "eps": o.eps_field,
        "eps_current": o.eps_current,
        "eps_fitted": s.eps_fitted,
        "sigma_p2": o.sigma_p2,
        "sigma_q2": o.sigma_q2,
        "sigma_r2": o.sigma_r2,
        "sigma_i2": o.sigma_i2,
        "mu": o.mu,
        "nu": o.nu,
        "participation_ratio": s.participation_ratio,
        "ks_density": s.ks_density,
        "ks_density_fitted": s.ks_density_fitted,
        "ks_rayleigh": s.ks_rayleigh,
        "density_fit": fit_json(&s.density_fit),
        "heat_fit": fit_json(&s.heat_fit),
        "current_gaussianity": fit_json(&s.current_gaussianity),
        "mean_heat": s.mean_heat,
        "sigma_P2_empirical": s.sigma_p2_empirical,
        "sigma_P2_law": s.sigma_p2_law,
        "anisotropy": {"r_real": s.anisotropy.r_real, "r_imag": s.anisotropy.r_imag},
    });
    Ok((summary, o.eps_field))
}

fn streamlines(ctx: &mut Ctx, g: &GridGeometry, spec: &CircuitSpec, pert: &Perturbation) -> Result<Value, RunError> {
    let (field, placement) = drive(ctx.cfg, g, spec, pert)?;
    output::field_csv(&ctx.path("field.csv"), g, &field)?;
    let pic = flow_picture(g, &field, spec, pert, ctx.cfg.streamline_seeds, ctx.cfg.max_steps)?;
    output::streamlines_txt(&ctx.path("streamlines.txt"), &pic.streamlines)?;
    output::vortices_csv(&ctx.path("vortices.csv"), &pic.vortices)?;
    let near = pic.end_to_vortex.iter().filter(|&&d| d <= 2.0 * g.spacing()).count();
    Ok(json!({
        "placement": placement,
        "n_vortices": pic.vortices.len(),
        "n_streamlines": pic.streamlines.len(),
        "ending_within_2a0_of_vortex": near,
    }))
}

fn oracle(ctx: &mut Ctx) -> Result<Value, RunError> {
    let cfg = ctx.cfg;
    let seed = cfg.seed.unwrap();
    let n = cfg.n_samples;
    let chunks = n.div_ceil(CHUNK);
    let samples: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let len = CHUNK.min(n - c * CHUNK);
            current_chunk(cfg.sigma_r, cfg.sigma_i, seed, c as u64, len)
                .into_iter()
                .map(|s| heat_of(&s))
        })
        .collect();
    let (hi, lo) = if cfg.sigma_r >= cfg.sigma_i {
        (cfg.sigma_r, cfg.sigma_i)
    } else {
        (cfg.sigma_i, cfg.sigma_r)
    };
    let eps = lo / hi;
    let mean = hi * hi + lo * lo;
    let law = HeatLaw::new(eps, mean)?;
    let fit = fit_histogram(&samples, &law, cfg.bins, 0)?;
    output::fit_csv(&ctx.path("hist_oracle.csv"), &fit)?;
    let sample_mean = samples.iter().sum::<f64>() / n as f64;
    Ok(json!({
        "eps": eps,
        "mean_law": mean,
        "mean_sample": sample_mean,
        "sigma_P2_law": sigma_p_sq(eps)?,
        "sigma_P2_sample": sigma_p_sq_empirical(&samples)?,
        "fit": fit_json(&fit),
    }))
}

/// Runs one experiment into `out`, writing `summary.json` and
/// `manifest.json` next to its data files.
pub fn run(kind: Experiment, cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, RunError> {
    cfg.validate(kind)?;
    fs::create_dir_all(out)?;
    let mut ctx = Ctx {
        cfg,
        out,
        files: Vec::new(),
    };
    let spec = cfg.spec()?;
    let (summary, eps) = if kind == Experiment::Oracle {
        (oracle(&mut ctx)?, None)
    } else {
        let g = cfg.geometry()?;
        let pert = perturbation(cfg, &g)?;
        match kind {
            Experiment::Spectrum => (spectrum(&mut ctx, &g, &spec)?, None),
            Experiment::Drive => (drive_experiment(&mut ctx, &g, &spec, &pert)?, None),
            Experiment::Sweep => (sweep(&mut ctx, &g, &spec, &pert)?, None),
            Experiment::Ensemble => (ensemble(&mut ctx, &g, &spec)?, None),
            Experiment::Stats => {
                let (s, e) = stats_experiment(&mut ctx, &g, &spec, &pert)?;
                (s, Some(e))
            }
            Experiment::Streamlines => (streamlines(&mut ctx, &g, &spec, &pert)?, None),
            Experiment::Oracle => unreachable!(),
        }
    };
    output::json(&ctx.path("summary.json"), &summary)?;

    let a0 = cfg.a0;
    let lambda = match cfg.omega {
        Some(w) => Some(wavelength(&spec, a0, w)?),
        None => None,
    };
    let manifest = json!({
        "experiment": kind.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "seeds": {
            "seed": cfg.seed,
            "perturbation_stream": if cfg.tau > 0.0 { Some(0) } else { None },
            "ensemble_streams": if kind == Experiment::Ensemble { Some(format!("0..{}", cfg.n_realizations)) } else { None },
        },
        "derived": {
            "omega0": spec.omega0(),
            "gamma": spec.gamma(),
            "q": opt(quality_factor(&spec).ok()),
            "lambda": opt(lambda),
            "lambda_r": opt(damping_length(&spec, a0).ok()),
            "eps": opt(eps),
        },
        "corrections": {
            "heat_law_nu": "(sigma_r^4 - sigma_i^4) / (2 sigma_r^2 sigma_i^2)",
            "heat_law_prefactor": "1/<P>",
            "dispersion": "exact -z_link/z_ground",
            "driven_sign": "Y V = I_ext",
        },
        "files": ctx.files,
    });
    output::json(&out.join("manifest.json"), &manifest)?;
    ctx.files.push("manifest.json".into());
    Ok(RunReport {
        out_dir: out.to_path_buf(),
        files: ctx.files,
        summary,
    })
}
