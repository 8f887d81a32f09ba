//! Circuit parameters, component tolerances and nodal admittance assembly.
//!
//! The network occupies every interior and boundary site of a
//! [`GridGeometry`]; each lattice link joining two occupied sites carries a
//! link element and each site a ground element. Dirichlet boundary sites are
//! grounded (`V = 0`), other boundary sites float and become unknowns.
//!
//! The assembled system is `Y·V = I_ext` with
//! `Y_ii = Σ 1/z_link + 1/z_ground` and `Y_ij = −1/z_link`, i.e. Kirchhoff's
//! current law with injected current on the right-hand side.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::invalid;
use crate::geometry::{require_interior, BcKind, GridGeometry, Label};
use crate::linalg::CsrMatrix;
use crate::Result;

/// Which element sits on the links and which shunts each site to ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Resistive inductor links, capacitors to ground; `ω² ∝ eigenvalue`.
    I,
    /// Capacitor links, resistive inductors to ground; `ω² ∝ 1/eigenvalue`.
    II,
}

/// Nominal component values shared by every cell of the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitSpec {
    model: Model,
    inductance: f64,
    capacitance: f64,
    resistance: f64,
}

impl CircuitSpec {
    /// `L` in henry, `C` in farad, `R` (series resistance of each inductor)
    /// in ohm.
    pub fn new(model: Model, inductance: f64, capacitance: f64, resistance: f64) -> Result<Self> {
        if !(inductance > 0.0 && inductance.is_finite()) {
            return Err(invalid("inductance", "must be positive and finite"));
        }
        if !(capacitance > 0.0 && capacitance.is_finite()) {
            return Err(invalid("capacitance", "must be positive and finite"));
        }
        if !(resistance >= 0.0 && resistance.is_finite()) {
            return Err(invalid("resistance", "must be non-negative and finite"));
        }
        Ok(Self {
            model,
            inductance,
            capacitance,
            resistance,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn inductance(&self) -> f64 {
        self.inductance
    }

    pub fn capacitance(&self) -> f64 {
        self.capacitance
    }

    pub fn resistance(&self) -> f64 {
        self.resistance
    }

    /// Same circuit with a different resistance.
    pub fn with_resistance(&self, resistance: f64) -> Result<Self> {
        Self::new(self.model, self.inductance, self.capacitance, resistance)
    }

    /// Same circuit with the other network topology.
    pub fn with_model(&self, model: Model) -> Self {
        Self { model, ..*self }
    }

    /// Cell resonance `ω₀ = 1/√(LC)` in rad/s.
    pub fn omega0(&self) -> f64 {
        1.0 / (self.inductance * self.capacitance).sqrt()
    }

    /// Linewidth: `R/L` (s⁻¹) in model I, `R·C` (s) in model II.
    pub fn gamma(&self) -> f64 {
        match self.model {
            Model::I => self.resistance / self.inductance,
            Model::II => self.resistance * self.capacitance,
        }
    }

    /// Characteristic impedance `√(L/C)`.
    pub fn characteristic_impedance(&self) -> f64 {
        (self.inductance / self.capacitance).sqrt()
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid("omega", "must be positive and finite"));
    }
    Ok(())
}

fn inductor(omega: f64, l: f64, r: f64) -> Complex64 {
    Complex64::new(r, omega * l)
}

fn capacitor(omega: f64, c: f64) -> Complex64 {
    Complex64::new(0.0, -1.0 / (omega * c))
}

/// Impedance of one nominal link element.
pub fn link_impedance(spec: &CircuitSpec, omega: f64) -> Result<Complex64> {
    check_omega(omega)?;
    Ok(match spec.model {
        Model::I => inductor(omega, spec.inductance, spec.resistance),
        Model::II => capacitor(omega, spec.capacitance),
    })
}

/// Impedance of one nominal site-to-ground element.
pub fn ground_impedance(spec: &CircuitSpec, omega: f64) -> Result<Complex64> {
    check_omega(omega)?;
    Ok(match spec.model {
        Model::I => capacitor(omega, spec.capacitance),
        Model::II => inductor(omega, spec.inductance, spec.resistance),
    })
}

/// Shape of the component spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ToleranceLaw {
    /// Uniform on `[1 − τ√3, 1 + τ√3]`, standard deviation exactly `τ`.
    #[default]
    Uniform,
    /// Normal with deviation `τ`, truncated (by rejection) at `±3τ`.
    TruncatedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSettings {
    pub tau: f64,
    pub law: ToleranceLaw,
    /// Whether an inductor's series resistance scales with its inductance.
    pub resistance_follows_inductor: bool,
}

impl ToleranceSettings {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            law: ToleranceLaw::Uniform,
            resistance_follows_inductor: true,
        }
    }
}

/// Per-element multipliers on the nominal component values.
///
/// `link_x[k]` belongs to the link from site `k = j·nx + i` to `(i+1, j)`,
/// `link_y[k]` to the link toward `(i, j+1)`, `site[k]` to the ground
/// element of site `k`. The link multiplier scales the link element (`L` in
/// model I, `C` in model II), the site multiplier the ground element.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    settings: ToleranceSettings,
    seed: u64,
    stream: u64,
    nx: usize,
    link_x: Vec<f64>,
    link_y: Vec<f64>,
    site: Vec<f64>,
}

impl Perturbation {
    /// All multipliers exactly one.
    pub fn none(geometry: &GridGeometry) -> Self {
        let (nx, ny) = geometry.extents();
        Self {
            settings: ToleranceSettings::new(0.0),
            seed: 0,
            stream: 0,
            nx,
            link_x: vec![1.0; nx * ny],
            link_y: vec![1.0; nx * ny],
            site: vec![1.0; nx * ny],
        }
    }

    /// Independent multipliers for every element, drawn from a ChaCha8
    /// generator seeded with `seed` on substream `stream`. Draw order: all
    /// x-links, then y-links, then sites, each in lattice storage order.
    pub fn sample(geometry: &GridGeometry, settings: ToleranceSettings, seed: u64, stream: u64) -> Result<Self> {
        let tau = settings.tau;
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(invalid("tau", "tolerance must be non-negative"));
        }
        if 3.0 * tau >= 1.0 {
            return Err(invalid(
                "tau",
                "tolerance must stay below 1/3 so components stay positive",
            ));
        }
        let mut p = Self::none(geometry);
        p.settings = settings;
        p.seed = seed;
        p.stream = stream;
        if tau == 0.0 {
            return Ok(p);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let half = tau * 3f64.sqrt();
        let draw = |rng: &mut ChaCha8Rng| match settings.law {
            ToleranceLaw::Uniform => 1.0 + half * (2.0 * rng.random::<f64>() - 1.0),
            ToleranceLaw::TruncatedGaussian => loop {
                let z: f64 = StandardNormal.sample(rng);
                if z.abs() <= 3.0 {
                    break 1.0 + tau * z;
                }
            },
        };
        for m in p.link_x.iter_mut().chain(p.link_y.iter_mut()).chain(p.site.iter_mut()) {
            *m = draw(&mut rng);
        }
        Ok(p)
    }

    pub fn settings(&self) -> ToleranceSettings {
        self.settings
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn link_x(&self, i: usize, j: usize) -> f64 {
        self.link_x[j * self.nx + i]
    }

    pub fn link_y(&self, i: usize, j: usize) -> f64 {
        self.link_y[j * self.nx + i]
    }

    pub fn site(&self, i: usize, j: usize) -> f64 {
        self.site[j * self.nx + i]
    }

    /// Multiplier on the series resistance of an inductor whose inductance
    /// multiplier is `m`.
    pub fn resistance_factor(&self, m: f64) -> f64 {
        if self.settings.resistance_follows_inductor {
            m
        } else {
            1.0
        }
    }

    /// Every multiplier, links first then sites.
    pub fn multipliers(&self) -> impl Iterator<Item = f64> + '_ {
        self.link_x.iter().chain(&self.link_y).chain(&self.site).copied()
    }
}

/// Multipliers with the given tolerance under the default law.
pub fn sample_perturbation(geometry: &GridGeometry, tau: f64, seed: u64) -> Result<Perturbation> {
    Perturbation::sample(geometry, ToleranceSettings::new(tau), seed, 0)
}

/// Ideal ac current source feeding one interior site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub site: (usize, usize),
    pub amplitude: Complex64,
}

impl Source {
    pub fn unit(site: (usize, usize)) -> Self {
        Self {
            site,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }
}

/// Direction of a lattice link leaving site `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkDir {
    /// Toward `(i + 1, j)`.
    X,
    /// Toward `(i, j + 1)`.
    Y,
}

/// A lattice link between two occupied sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub from: (usize, usize),
    pub dir: LinkDir,
}

impl Link {
    pub fn to(&self) -> (usize, usize) {
        match self.dir {
            LinkDir::X => (self.from.0 + 1, self.from.1),
            LinkDir::Y => (self.from.0, self.from.1 + 1),
        }
    }
}

fn occupied(g: &GridGeometry, i: usize, j: usize) -> bool {
    !matches!(g.label(i as i64, j as i64), Label::Exterior)
}

/// Every link of the network, in lattice storage order of its `from` site.
pub fn links(geometry: &GridGeometry) -> Vec<Link> {
    let (nx, ny) = geometry.extents();
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !occupied(geometry, i, j) {
                continue;
            }
            if i + 1 < nx && occupied(geometry, i + 1, j) {
                out.push(Link {
                    from: (i, j),
                    dir: LinkDir::X,
                });
            }
            if j + 1 < ny && occupied(geometry, i, j + 1) {
                out.push(Link {
                    from: (i, j),
                    dir: LinkDir::Y,
                });
            }
        }
    }
    out
}

/// Frequency-domain element values of one (possibly perturbed) network.
#[derive(Debug, Clone, Copy)]
pub struct Elements<'a> {
    pub geometry: &'a GridGeometry,
    pub spec: &'a CircuitSpec,
    pub pert: &'a Perturbation,
    pub omega: f64,
}

impl Elements<'_> {
    fn link_multiplier(&self, link: &Link) -> f64 {
        let (i, j) = link.from;
        match link.dir {
            LinkDir::X => self.pert.link_x(i, j),
            LinkDir::Y => self.pert.link_y(i, j),
        }
    }

    /// Impedance of a link element.
    pub fn link(&self, link: &Link) -> Complex64 {
        let m = self.link_multiplier(link);
        match self.spec.model {
            Model::I => inductor(
                self.omega,
                self.spec.inductance * m,
                self.spec.resistance * self.pert.resistance_factor(m),
            ),
            Model::II => capacitor(self.omega, self.spec.capacitance * m),
        }
    }

    /// Series resistance inside a link element (zero in model II).
    pub fn link_resistance(&self, link: &Link) -> f64 {
        match self.spec.model {
            Model::I => self.spec.resistance * self.pert.resistance_factor(self.link_multiplier(link)),
            Model::II => 0.0,
        }
    }

    /// Impedance of the ground element of an interior or floating site.
    pub fn ground(&self, i: usize, j: usize) -> Complex64 {
        if let Label::Boundary(b) = self.geometry.label(i as i64, j as i64) {
            if let BcKind::Mixed(shunt) = self.geometry.boundary_kind(b) {
                return inductor(self.omega, shunt.inductance(), shunt.resistance());
            }
        }
        let m = self.pert.site(i, j);
        match self.spec.model {
            Model::I => capacitor(self.omega, self.spec.capacitance * m),
            Model::II => inductor(
                self.omega,
                self.spec.inductance * m,
                self.spec.resistance * self.pert.resistance_factor(m),
            ),
        }
    }

    /// Series resistance inside the ground element.
    pub fn ground_resistance(&self, i: usize, j: usize) -> f64 {
        if let Label::Boundary(b) = self.geometry.label(i as i64, j as i64) {
            if let BcKind::Mixed(shunt) = self.geometry.boundary_kind(b) {
                return shunt.resistance();
            }
        }
        match self.spec.model {
            Model::I => 0.0,
            Model::II => self.spec.resistance * self.pert.resistance_factor(self.pert.site(i, j)),
        }
    }
}

/// Sites carrying an unknown voltage: all interior sites plus floating
/// boundary sites, merged in raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownMap {
    sites: Vec<(usize, usize)>,
    nx: usize,
    index: Vec<Option<usize>>,
}

impl UnknownMap {
    pub fn new(geometry: &GridGeometry) -> Self {
        let (nx, ny) = geometry.extents();
        let mut sites: Vec<(usize, usize)> = geometry.interior().to_vec();
        for (b, &s) in geometry.boundary().iter().enumerate() {
            if !matches!(geometry.boundary_kind(b), BcKind::Dirichlet) {
                sites.push(s);
            }
        }
        sites.sort_by_key(|&(i, j)| geometry.raster_key(i, j));
        let mut index = vec![None; nx * ny];
        for (k, &(i, j)) in sites.iter().enumerate() {
            index[j * nx + i] = Some(k);
        }
        Self { sites, nx, index }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[(usize, usize)] {
        &self.sites
    }

    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        self.index[j * self.nx + i]
    }
}

/// The nodal system `Y·V = I_ext` at one frequency.
#[derive(Debug, Clone)]
pub struct AdmittanceSystem {
    pub matrix: CsrMatrix<Complex64>,
    pub rhs: Vec<Complex64>,
    pub omega: f64,
    pub unknowns: UnknownMap,
    /// Largest total element admittance meeting at one site; the natural
    /// magnitude of a pivot before cancellation.
    pub element_scale: f64,
}

/// Assembles the admittance matrix (and injection vector if a source is
/// given) of the perturbed network at `omega`.
pub fn assemble_admittance(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    omega: f64,
    pert: &Perturbation,
    source: Option<&Source>,
) -> Result<AdmittanceSystem> {
    check_omega(omega)?;
    if pert.link_x.len() != geometry.extents().0 * geometry.extents().1 {
        return Err(invalid("perturbation", "sampled for a different geometry"));
    }
    let unknowns = UnknownMap::new(geometry);
    let el = Elements {
        geometry,
        spec,
        pert,
        omega,
    };
    let n = unknowns.len();
    let mut trip: Vec<(usize, usize, Complex64)> = Vec::with_capacity(5 * n);
    let mut weight = vec![0.0f64; n];
    for &(i, j) in unknowns.sites() {
        let k = unknowns.index(i, j).unwrap();
        let y = el.ground(i, j).inv();
        weight[k] += y.norm();
        trip.push((k, k, y));
    }
    for link in links(geometry) {
        let a = unknowns.index(link.from.0, link.from.1);
        let (ti, tj) = link.to();
        let b = unknowns.index(ti, tj);
        let y = el.link(&link).inv();
        if let Some(a) = a {
            weight[a] += y.norm();
            trip.push((a, a, y));
        }
        if let Some(b) = b {
            weight[b] += y.norm();
            trip.push((b, b, y));
        }
        if let (Some(a), Some(b)) = (a, b) {
            trip.push((a, b, -y));
            trip.push((b, a, -y));
        }
    }
    let matrix = CsrMatrix::from_triplets(n, trip);
    let element_scale = weight.iter().copied().fold(0.0, f64::max);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    if let Some(src) = source {
        require_interior(geometry, src.site)?;
        rhs[unknowns.index(src.site.0, src.site.1).unwrap()] = src.amplitude;
    }
    Ok(AdmittanceSystem {
        matrix,
        rhs,
        omega,
        unknowns,
        element_scale,
    })
}

/// Real pencil `K v = λ M v` of the lossless, Dirichlet-bounded network over
/// the interior sites, where `λ = ω²/ω₀²` (model I) or `ω₀²/ω²` (model II).
///
/// `K` is the five-point Laplacian with link weights `L/L_link` (model I) or
/// `C_link/C` (model II); `M` is diagonal with `C_site/C` (model I) or
/// `L/L_site` (model II). Without perturbation `K` is the plain stencil and
/// `M` the identity.
pub fn lossless_pencil(geometry: &GridGeometry, model: Model, pert: &Perturbation) -> (CsrMatrix<f64>, Vec<f64>) {
    let n = geometry.interior().len();
    let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(5 * n);
    for link in links(geometry) {
        let m = match link.dir {
            LinkDir::X => pert.link_x(link.from.0, link.from.1),
            LinkDir::Y => pert.link_y(link.from.0, link.from.1),
        };
        let w = match model {
            Model::I => 1.0 / m,
            Model::II => m,
        };
        let (ti, tj) = link.to();
        let a = geometry.interior_index(link.from.0 as i64, link.from.1 as i64);
        let b = geometry.interior_index(ti as i64, tj as i64);
        if let Some(a) = a {
            trip.push((a, a, w));
        }
        if let Some(b) = b {
            trip.push((b, b, w));
        }
        if let (Some(a), Some(b)) = (a, b) {
            trip.push((a, b, -w));
            trip.push((b, a, -w));
        }
    }
    let mass = geometry
        .interior()
        .iter()
        .map(|&(i, j)| match model {
            Model::I => pert.site(i, j),
            Model::II => 1.0 / pert.site(i, j),
        })
        .collect();
    (CsrMatrix::from_triplets(n, trip), mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize_quarter_stadium, rasterize_rectangle, ShuntRl};
    use proptest::prelude::*;

    const L: f64 = 1e-4;
    const C: f64 = 1e-9;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn element_impedances() {
        let s = CircuitSpec::new(Model::I, L, C, 0.0).unwrap();
        assert!(close(
            link_impedance(&s, 1e6).unwrap(),
            Complex64::new(0.0, 100.0),
            1e-15
        ));
        assert!(close(
            ground_impedance(&s, 1e6).unwrap(),
            Complex64::new(0.0, -1000.0),
            1e-15
        ));
        let w0 = s.omega0();
        assert!((w0 - 3.1623e6).abs() < 1e2);
        assert!(close(
            ground_impedance(&s, w0).unwrap(),
            Complex64::new(0.0, -316.227_766_016_837_9),
            1e-14
        ));

        let s = CircuitSpec::new(Model::I, L, C, 0.5).unwrap();
        assert!(close(
            link_impedance(&s, 0.8611e6).unwrap(),
            Complex64::new(0.5, 86.11),
            1e-14
        ));

        let s = CircuitSpec::new(Model::II, L, C, 1.0).unwrap();
        assert!(close(
            link_impedance(&s, 1e6).unwrap(),
            Complex64::new(0.0, -1000.0),
            1e-15
        ));
        assert!(close(
            ground_impedance(&s, 1e6).unwrap(),
            Complex64::new(1.0, 100.0),
            1e-15
        ));

        assert!(link_impedance(&s, 0.0).is_err());
        assert!(ground_impedance(&s, -1.0).is_err());
    }

    #[test]
    fn circuit_validation_and_derived_values() {
        assert!(CircuitSpec::new(Model::I, 0.0, C, 0.0).is_err());
        assert!(CircuitSpec::new(Model::I, L, C, -1.0).is_err());
        let s = CircuitSpec::new(Model::I, L, C, 0.1).unwrap();
        assert_eq!(s.omega0(), 1.0 / (L * C).sqrt());
        assert!((s.gamma() - 1e3).abs() < 1e-9);
        assert!((s.with_model(Model::II).gamma() - 1e-10).abs() < 1e-22);
    }

    #[test]
    fn single_site_system() {
        let g = rasterize_rectangle(1, 1, 0.5).unwrap();
        let s = CircuitSpec::new(Model::I, L, C, 0.3).unwrap();
        let w = 1.7e6;
        let sys = assemble_admittance(&g, &s, w, &Perturbation::none(&g), Some(&Source::unit((1, 1)))).unwrap();
        assert_eq!(sys.matrix.dim(), 1);
        // KCL row Σ(V_n − V)/z_L − V/z_C = −I, negated so the injection is positive
        let zl = link_impedance(&s, w).unwrap();
        let zc = ground_impedance(&s, w).unwrap();
        let expect = 4.0 / zl + 1.0 / zc;
        assert!(close(sys.matrix.get(0, 0), expect, 1e-14));
        assert_eq!(sys.rhs[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn lossless_matrix_is_shifted_laplacian() {
        let g = rasterize_quarter_stadium(1.0 / 12.0).unwrap();
        let s = CircuitSpec::new(Model::I, L, C, 0.0).unwrap();
        let w = 2.3e6;
        let sys = assemble_admittance(&g, &s, w, &Perturbation::none(&g), None).unwrap();
        let factor = Complex64::new(0.0, -1.0 / (w * L));
        let shift = L * C * w * w;
        let n = g.interior().len();
        assert_eq!(sys.matrix.dim(), n);
        for (a, &(i, j)) in g.interior().iter().enumerate() {
            for (b, &(k, l)) in g.interior().iter().enumerate() {
                let lap = if a == b {
                    4.0 - shift
                } else if i.abs_diff(k) + j.abs_diff(l) == 1 {
                    -1.0
                } else {
                    0.0
                };
                let want = factor * lap;
                let got = sys.matrix.get(a, b);
                assert!(
                    (got - want).norm() <= 1e-12 * factor.norm(),
                    "({a},{b}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn pure_imaginary_when_lossless() {
        let g = rasterize_rectangle(5, 4, 0.1).unwrap();
        let s = CircuitSpec::new(Model::I, L, C, 0.0).unwrap();
        let sys = assemble_admittance(&g, &s, 1e6, &Perturbation::none(&g), None).unwrap();
        for (_, _, v) in sys.matrix.iter() {
            assert_eq!(v.re, 0.0);
        }
    }

    #[test]
    fn zero_tolerance_is_bit_exact() {
        let g = rasterize_quarter_stadium(0.05).unwrap();
        let s = CircuitSpec::new(Model::I, L, C, 0.5).unwrap();
        let p0 = sample_perturbation(&g, 0.0, 99).unwrap();
        assert!(p0.multipliers().all(|m| m == 1.0));
        let a = assemble_admittance(&g, &s, 1.1e6, &Perturbation::none(&g), None).unwrap();
        let b = assemble_admittance(&g, &s, 1.1e6, &p0, None).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn tolerance_spread() {
        let g = rasterize_rectangle(576, 576, 1e-3).unwrap();
        let p = sample_perturbation(&g, 0.01, 7).unwrap();
        let m: Vec<f64> = p.multipliers().collect();
        assert!(m.len() >= 1_000_000);
        let mean = m.iter().sum::<f64>() / m.len() as f64;
        let var = m.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m.len() - 1) as f64;
        assert!((var.sqrt() / 0.01 - 1.0).abs() < 0.01);
        assert!(m.iter().all(|&x| (x - 1.0).abs() <= 0.03));

        let q = sample_perturbation(&g, 0.01, 8).unwrap();
        assert_ne!(p, q);
        assert_eq!(p, sample_perturbation(&g, 0.01, 7).unwrap());
        assert!(sample_perturbation(&g, -0.1, 7).is_err());
    }

    #[test]
    fn gaussian_law_stays_in_band() {
        let g = rasterize_rectangle(60, 60, 0.01).unwrap();
        let mut t = ToleranceSettings::new(0.02);
        t.law = ToleranceLaw::TruncatedGaussian;
        let p = Perturbation::sample(&g, t, 1, 3).unwrap();
        assert!(p.multipliers().all(|x| (x - 1.0).abs() <= 0.06));
    }

    #[test]
    fn floating_boundary_adds_unknowns() {
        let g = rasterize_rectangle(2, 2, 0.5).unwrap().tag_boundary(BcKind::Neumann);
        let s = CircuitSpec::new(Model::I, L, C, 0.1).unwrap();
        let sys = assemble_admittance(&g, &s, 1e6, &Perturbation::none(&g), None).unwrap();
        assert_eq!(sys.matrix.dim(), 16);
        let mixed = BcKind::Mixed(ShuntRl::new(2.0, 3e-4).unwrap());
        let g = g.tag_boundary(mixed);
        let el = Elements {
            geometry: &g,
            spec: &s,
            pert: &Perturbation::none(&g),
            omega: 1e6,
        };
        assert_eq!(el.ground(0, 1), Complex64::new(2.0, 300.0));
        assert_eq!(el.ground_resistance(0, 1), 2.0);
    }

    #[test]
    fn source_must_be_interior() {
        let g = rasterize_rectangle(2, 2, 0.5).unwrap();
        let s = CircuitSpec::new(Model::I, L, C, 0.1).unwrap();
        let r = assemble_admittance(&g, &s, 1e6, &Perturbation::none(&g), Some(&Source::unit((0, 0))));
        assert!(r.is_err());
    }

    proptest! {
        #[test]
        fn assembled_matrix_is_symmetric(
            n in 10usize..16,
            r in 0.0f64..2.0,
            tau in 0.0f64..0.05,
            seed in any::<u64>(),
            model2 in any::<bool>(),
            neumann in any::<bool>(),
        ) {
            let mut g = rasterize_quarter_stadium(1.0 / n as f64).unwrap();
            if neumann {
                g = g.tag_boundary(BcKind::Neumann);
            }
            let model = if model2 { Model::II } else { Model::I };
            let s = CircuitSpec::new(model, L, C, r).unwrap();
            let p = sample_perturbation(&g, tau, seed).unwrap();
            let sys = assemble_admittance(&g, &s, 1.3e6, &p, None).unwrap();
            for (a, b, v) in sys.matrix.iter() {
                prop_assert_eq!(sys.matrix.get(b, a), v);
            }
        }
    }
}
