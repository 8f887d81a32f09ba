//! Quantities derived from a voltage solution.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::invalid;
use crate::geometry::GridGeometry;
use crate::network::{links, CircuitSpec, Elements, LinkDir, Perturbation};
use crate::solve::ComplexField;
use crate::{Error, Result};

mod flow;
mod vortex;

pub use flow::{trace_streamlines, FlowField, StopReason, Streamline};
pub use vortex::{has_nodal_crossing, nodal_vortices, Vortex};

/// Density `|V|²` per interior site, normalized to unit interior mean.
pub fn probability_density(field: &ComplexField) -> Result<Vec<f64>> {
    let rho: Vec<f64> = field.values.iter().map(|v| v.norm_sqr()).collect();
    let mean = rho.iter().sum::<f64>() / rho.len().max(1) as f64;
    if !(mean > 0.0) {
        return Err(Error::Degenerate("zero field has no density normalization"));
    }
    Ok(rho.into_iter().map(|r| r / mean).collect())
}

/// `(Σρ)² / (N Σρ²)`: near 1 for an extended state, small when localized.
pub fn participation_ratio(rho: &[f64]) -> f64 {
    let s: f64 = rho.iter().sum();
    let s2: f64 = rho.iter().map(|r| r * r).sum();
    s * s / (rho.len() as f64 * s2)
}

/// How a link current is obtained from the voltage drop across it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurrentVariant {
    /// `I = ΔV / z_link`, the current the circuit actually carries.
    #[default]
    Physical,
    /// `I = ΔV / R`, the pure-resistor relation.
    ResistorDrop,
}

/// Complex link currents on the lattice.
///
/// `ix[j·nx + i]` is `(V(i+1, j) − V(i, j)) / z` on the link toward
/// `(i+1, j)`, `iy` likewise toward `(i, j+1)`; zero where no link exists.
/// With this sign the charge actually flows from `(i+1, j)` to `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    pub nx: usize,
    pub ny: usize,
    pub variant: CurrentVariant,
    pub ix: Vec<Complex64>,
    pub iy: Vec<Complex64>,
    /// Series resistance of each link element.
    pub rx: Vec<f64>,
    pub ry: Vec<f64>,
}

impl CurrentField {
    /// Uniform-resistance field built directly from current arrays.
    pub fn from_arrays(nx: usize, ny: usize, ix: Vec<Complex64>, iy: Vec<Complex64>, r: f64) -> Result<Self> {
        if ix.len() != nx * ny || iy.len() != nx * ny {
            return Err(invalid("currents", "array length differs from the lattice size"));
        }
        Ok(Self {
            nx,
            ny,
            variant: CurrentVariant::Physical,
            ix,
            iy,
            rx: vec![r; nx * ny],
            ry: vec![r; nx * ny],
        })
    }

    /// `(Re I_x, Im I_x, Re I_y, Im I_y)` at the given interior sites.
    pub fn components_at(&self, sites: &[(usize, usize)]) -> Vec<[f64; 4]> {
        sites
            .iter()
            .map(|&(i, j)| {
                let a = self.ix[j * self.nx + i];
                let b = self.iy[j * self.nx + i];
                [a.re, a.im, b.re, b.im]
            })
            .collect()
    }
}

/// Link currents of the unperturbed network.
pub fn link_currents(
    geometry: &GridGeometry,
    field: &ComplexField,
    spec: &CircuitSpec,
    omega: f64,
    variant: CurrentVariant,
) -> Result<CurrentField> {
    link_currents_perturbed(geometry, field, spec, &Perturbation::none(geometry), omega, variant)
}

/// Link currents with each link's own (perturbed) impedance.
pub fn link_currents_perturbed(
    geometry: &GridGeometry,
    field: &ComplexField,
    spec: &CircuitSpec,
    pert: &Perturbation,
    omega: f64,
    variant: CurrentVariant,
) -> Result<CurrentField> {
    if variant == CurrentVariant::ResistorDrop && spec.resistance() == 0.0 {
        return Err(invalid("variant", "the resistor relation needs R > 0"));
    }
    if !(omega > 0.0) {
        return Err(invalid("omega", "must be positive"));
    }
    let (nx, ny) = geometry.extents();
    let el = Elements {
        geometry,
        spec,
        pert,
        omega,
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut out = CurrentField {
        nx,
        ny,
        variant,
        ix: vec![zero; nx * ny],
        iy: vec![zero; nx * ny],
        rx: vec![0.0; nx * ny],
        ry: vec![0.0; nx * ny],
    };
    for link in links(geometry) {
        let (i, j) = link.from;
        let (ti, tj) = link.to();
        let dv = field.at(geometry, ti as i64, tj as i64) - field.at(geometry, i as i64, j as i64);
        let current = match variant {
            CurrentVariant::Physical => dv / el.link(&link),
            CurrentVariant::ResistorDrop => dv / spec.resistance(),
        };
        let r = match variant {
            CurrentVariant::Physical => el.link_resistance(&link),
            CurrentVariant::ResistorDrop => spec.resistance(),
        };
        let k = j * nx + i;
        match link.dir {
            LinkDir::X => {
                out.ix[k] = current;
                out.rx[k] = r;
            }
            LinkDir::Y => {
                out.iy[k] = current;
                out.ry[k] = r;
            }
        }
    }
    Ok(out)
}

/// Dissipated power per lattice site: the two links leaving the site toward
/// `+x` and `+y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatField {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl HeatField {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Values at the interior sites, in interior order.
    pub fn interior(&self, geometry: &GridGeometry) -> Vec<f64> {
        geometry
            .interior()
            .iter()
            .map(|&(i, j)| self.values[j * self.nx + i])
            .collect()
    }
}

/// `P = (R/2)(|I_x|² + |I_y|²)` with one resistance for every link.
pub fn heat_power(currents: &CurrentField, r: f64) -> HeatField {
    let values = currents
        .ix
        .iter()
        .zip(&currents.iy)
        .map(|(a, b)| 0.5 * r * (a.norm_sqr() + b.norm_sqr()))
        .collect();
    HeatField {
        nx: currents.nx,
        ny: currents.ny,
        values,
    }
}

/// Heat with each link's own series resistance.
pub fn link_heat(currents: &CurrentField) -> HeatField {
    let values = (0..currents.ix.len())
        .map(|k| 0.5 * (currents.rx[k] * currents.ix[k].norm_sqr() + currents.ry[k] * currents.iy[k].norm_sqr()))
        .collect();
    HeatField {
        nx: currents.nx,
        ny: currents.ny,
        values,
    }
}

/// Injected active power against everything dissipated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBalance {
    /// `½ Re(V_s · conj(I_s))` at the source.
    pub injected: f64,
    /// Link heat plus resistive ground elements (model II shunts, mixed
    /// boundary shunts).
    pub dissipated: f64,
    /// `|injected − dissipated| / injected`, or 0 when both vanish.
    pub residual: f64,
}

/// Energy conservation check of a driven solution.
pub fn power_balance(
    geometry: &GridGeometry,
    field: &ComplexField,
    spec: &CircuitSpec,
    pert: &Perturbation,
    heat: &HeatField,
) -> Result<PowerBalance> {
    let source = field.source.ok_or(invalid("field", "has no source"))?;
    let vs = field.at(geometry, source.site.0 as i64, source.site.1 as i64);
    let injected = 0.5 * (vs * source.amplitude.conj()).re;
    let el = Elements {
        geometry,
        spec,
        pert,
        omega: field.omega,
    };
    let mut shunt = 0.0;
    let floating = geometry
        .boundary()
        .iter()
        .enumerate()
        .filter(|(b, _)| !matches!(geometry.boundary_kind(*b), crate::geometry::BcKind::Dirichlet))
        .map(|(_, s)| s);
    for &(i, j) in geometry.interior().iter().chain(floating) {
        let r = el.ground_resistance(i, j);
        if r > 0.0 {
            let v = field.at(geometry, i as i64, j as i64);
            shunt += 0.5 * r * (v / el.ground(i, j)).norm_sqr();
        }
    }
    let dissipated = heat.total() + shunt;
    let scale = injected.abs().max(dissipated.abs());
    if scale == 0.0 {
        return Ok(PowerBalance {
            injected,
            dissipated,
            residual: 0.0,
        });
    }
    if injected == 0.0 {
        return Err(Error::Degenerate("heat without injected power"));
    }
    Ok(PowerBalance {
        injected,
        dissipated,
        residual: (injected - dissipated).abs() / injected.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize_quarter_stadium, rasterize_rectangle, BcKind, ShuntRl};
    use crate::network::{link_impedance, sample_perturbation, Model, Source};
    use crate::solve::driven_response;

    const L: f64 = 1e-4;
    const C: f64 = 1e-9;

    #[test]
    fn density_normalization() {
        let g = rasterize_rectangle(3, 2, 0.1).unwrap();
        let f = ComplexField::from_values(&g, vec![Complex64::new(0.3, -0.4); 6]).unwrap();
        assert!(probability_density(&f)
            .unwrap()
            .iter()
            .all(|&r| (r - 1.0).abs() < 1e-15));
        let zero = ComplexField::from_values(&g, vec![Complex64::new(0.0, 0.0); 6]).unwrap();
        assert!(probability_density(&zero).is_err());
        let vals: Vec<Complex64> = (0..6).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        let f = ComplexField::from_values(&g, vals).unwrap();
        let a = probability_density(&f).unwrap();
        let b = probability_density(&f.scaled(Complex64::from_polar(3.7, 1.1))).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!((a.iter().sum::<f64>() / 6.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn currents_of_simple_fields() {
        let g = rasterize_rectangle(2, 1, 0.1).unwrap();
        let s = CircuitSpec::new(Model::I, L, C, 0.5).unwrap();
        let w = 0.8611e6;
        let uniform = ComplexField::from_values(&g, vec![Complex64::new(2.0, 1.0); 2]).unwrap();
        let cur = link_currents(&g, &uniform, &s, w, CurrentVariant::Physical).unwrap();
        // only the internal link has zero drop; links into ground carry current
        assert_eq!(cur.ix[g.extents().0 + 1], Complex64::new(0.0, 0.0));

        let f = ComplexField::from_values(&g, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let cur = link_currents(&g, &f, &s, w, CurrentVariant::Physical).unwrap();
        let want = Complex64::new(1.0, 0.0) / Complex64::new(0.5, 86.11);
        assert!((cur.ix[g.extents().0 + 1] - want).norm() < 1e-15);

        let lit = link_currents(&g, &f, &s, w, CurrentVariant::ResistorDrop).unwrap();
        let factor = link_impedance(&s, w).unwrap() / 0.5;
        for (a, b) in cur.ix.iter().zip(&lit.ix).chain(cur.iy.iter().zip(&lit.iy)) {
            assert!((a * factor - b).norm() < 1e-13 * b.norm().max(1.0));
        }
        let lossless = s.with_resistance(0.0).unwrap();
        assert!(link_currents(&g, &f, &lossless, w, CurrentVariant::ResistorDrop).is_err());
    }

    #[test]
    fn heat_values() {
        let zero = Complex64::new(0.0, 0.0);
        let cur = CurrentField::from_arrays(1, 1, vec![Complex64::new(1.0, 0.0)], vec![zero], 2.0).unwrap();
        assert_eq!(heat_power(&cur, 2.0).values, vec![1.0]);
        assert_eq!(heat_power(&cur, 0.0).total(), 0.0);
        let double = CurrentField::from_arrays(1, 1, vec![Complex64::new(2.0, 0.0)], vec![zero], 2.0).unwrap();
        assert_eq!(heat_power(&double, 2.0).values, vec![4.0]);
        assert_eq!(link_heat(&cur).values, vec![1.0]);
    }

    #[test]
    fn heat_statistics_do_not_depend_on_variant() {
        let g = rasterize_quarter_stadium(1.0 / 20.0).unwrap();
        let s = CircuitSpec::new(Model::I, L, C, 0.4).unwrap();
        let w = 1.3e6;
        let f = driven_response(&g, &s, w, &Source::unit(g.interior()[40]), &Perturbation::none(&g)).unwrap();
        let a = heat_power(&link_currents(&g, &f, &s, w, CurrentVariant::Physical).unwrap(), 0.4);
        let b = heat_power(
            &link_currents(&g, &f, &s, w, CurrentVariant::ResistorDrop).unwrap(),
            0.4,
        );
        let (ma, mb) = (a.total(), b.total());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x / ma - y / mb).abs() < 1e-12 * (x / ma).max(1e-300) + 1e-300);
        }
    }

    fn balance(g: &GridGeometry, s: &CircuitSpec, w: f64, p: &Perturbation) -> PowerBalance {
        let src = Source::unit(g.interior()[g.interior().len() / 2]);
        let f = driven_response(g, s, w, &src, p).unwrap();
        let cur = link_currents_perturbed(g, &f, s, p, w, CurrentVariant::Physical).unwrap();
        power_balance(g, &f, s, p, &link_heat(&cur)).unwrap()
    }

    #[test]
    fn power_is_conserved() {
        let g = rasterize_quarter_stadium(1.0 / 20.0).unwrap();
        for model in [Model::I, Model::II] {
            let s = CircuitSpec::new(model, L, C, 0.7).unwrap();
            let b = balance(&g, &s, 1.2e6, &Perturbation::none(&g));
            assert!(b.injected > 0.0 && b.residual < 1e-8, "{model:?}: {b:?}");
            let p = sample_perturbation(&g, 0.03, 2).unwrap();
            assert!(balance(&g, &s, 1.2e6, &p).residual < 1e-8);
        }
        let mixed = g.clone().tag_boundary(BcKind::Mixed(ShuntRl::new(3.0, 2e-4).unwrap()));
        let s = CircuitSpec::new(Model::I, L, C, 0.7).unwrap();
        assert!(balance(&mixed, &s, 1.2e6, &Perturbation::none(&mixed)).residual < 1e-8);

        let lossless = CircuitSpec::new(Model::I, L, C, 0.0).unwrap();
        let b = balance(&g, &lossless, 1.234e6, &Perturbation::none(&g));
        assert!(b.injected.abs() < 1e-12 && b.dissipated == 0.0);
    }

    #[test]
    fn broken_current_breaks_balance() {
        let g = rasterize_quarter_stadium(1.0 / 20.0).unwrap();
        let s = CircuitSpec::new(Model::I, L, C, 0.7).unwrap();
        let none = Perturbation::none(&g);
        let src = Source::unit(g.interior()[100]);
        let f = driven_response(&g, &s, 1.2e6, &src, &none).unwrap();
        let mut cur = link_currents(&g, &f, &s, 1.2e6, CurrentVariant::Physical).unwrap();
        let (i, j) = src.site;
        cur.ix[j * cur.nx + i] = Complex64::new(0.0, 0.0);
        assert!(power_balance(&g, &f, &s, &none, &link_heat(&cur)).unwrap().residual > 1e-8);
    }

    #[test]
    fn localization_grows_with_resistance() {
        let g = rasterize_quarter_stadium(1.0 / 40.0).unwrap();
        let w = 0.8611e6;
        let src = Source::unit(g.interior()[g.interior().len() / 3]);
        let pr = |r: f64| {
            let s = CircuitSpec::new(Model::I, L, C, r).unwrap();
            let f = driven_response(&g, &s, w, &src, &Perturbation::none(&g)).unwrap();
            participation_ratio(&probability_density(&f).unwrap())
        };
        assert!(pr(20.0) < pr(0.5));
    }
}
