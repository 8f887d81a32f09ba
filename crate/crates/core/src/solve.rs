//! Dispersion maps, lossless spectra, driven responses and resonance sweeps.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::invalid;
use crate::geometry::{BcKind, GridGeometry, Label};
use crate::linalg::dense::{SymmetricEigen, SymmetricMatrix};
use crate::linalg::lanczos::{largest_eigenpairs, LanczosOptions, SymmetricOperator};
use crate::linalg::{CsrMatrix, EnvelopeLdlt};
use crate::network::{assemble_admittance, lossless_pencil, CircuitSpec, Model, Perturbation, Source, UnknownMap};
use crate::{Error, Result};

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid("omega", "must be positive and finite"));
    }
    Ok(())
}

/// Dimensionless lattice eigenvalue `a₀²k² = −z_link/z_ground` reached by
/// driving at `omega`.
///
/// Model I: `ω²/ω₀² − iγω/ω₀²` with `γ = R/L`. Model II:
/// `1/(ω²/ω₀² − iγω)` with `γ = RC`, which reduces to `ω₀²/ω²` without loss
/// and to `ω₀²/ω² + iγω₀²/ω` to first order in `R` at `ω = ω₀`.
pub fn dispersion(spec: &CircuitSpec, omega: f64) -> Result<Complex64> {
    check_omega(omega)?;
    let w0 = spec.omega0();
    let g = spec.gamma();
    Ok(match spec.model() {
        Model::I => Complex64::new(omega * omega / (w0 * w0), -g * omega / (w0 * w0)),
        Model::II => Complex64::new(omega * omega / (w0 * w0), -g * omega).inv(),
    })
}

/// Wavelength in billiard widths, `λ = 2π a₀ ω₀/ω`.
pub fn wavelength(spec: &CircuitSpec, a0: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(2.0 * PI * a0 * spec.omega0() / omega)
}

/// Spatial damping length `λ_R ≈ (4π a₀/R)·√(L/C)` in billiard widths.
pub fn damping_length(spec: &CircuitSpec, a0: f64) -> Result<f64> {
    if spec.resistance() == 0.0 {
        return Err(Error::NoDamping);
    }
    Ok(4.0 * PI * a0 / spec.resistance() * spec.characteristic_impedance())
}

/// Quality factor of one cell, `Q = √(L/C)/R`.
pub fn quality_factor(spec: &CircuitSpec) -> Result<f64> {
    if spec.resistance() == 0.0 {
        return Err(Error::NoDamping);
    }
    Ok(spec.characteristic_impedance() / spec.resistance())
}

/// Lossless resonance frequency belonging to lattice eigenvalue `lambda`.
pub fn frequency_of(spec: &CircuitSpec, lambda: f64) -> f64 {
    match spec.model() {
        Model::I => spec.omega0() * lambda.sqrt(),
        Model::II => spec.omega0() / lambda.sqrt(),
    }
}

/// Lattice eigenvalue whose lossless resonance sits at `omega`.
pub fn eigenvalue_of(spec: &CircuitSpec, omega: f64) -> f64 {
    let r = omega / spec.omega0();
    match spec.model() {
        Model::I => r * r,
        Model::II => 1.0 / (r * r),
    }
}

/// A lossless resonance of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// Position in ascending lattice-eigenvalue order among the returned set.
    pub index: usize,
    /// Circuit frequency in rad/s.
    pub omega: f64,
    /// Lattice eigenvalue `a₀²k²`.
    pub lambda: f64,
    /// Billiard eigenvalue `k² = λ/a₀²`.
    pub eps: f64,
    /// Voltages on the interior sites, unit Euclidean norm, sign fixed so the
    /// largest-magnitude entry is positive.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Largest interior count handled by the dense solver; above it the
    /// shift-invert Lanczos path is used.
    pub dense_limit: usize,
    pub lanczos: LanczosOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: 4000,
            lanczos: LanczosOptions::default(),
        }
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (k, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = k;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Symmetric `M^{-1/2} K M^{-1/2}`.
fn scaled_pencil(k: &CsrMatrix<f64>, mass: &[f64]) -> CsrMatrix<f64> {
    let s: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let trip = k.iter().map(|(r, c, v)| (r, c, v * s[r] * s[c])).collect();
    CsrMatrix::from_triplets(k.dim(), trip)
}

/// Which part of the spectrum to extract.
#[derive(Debug, Clone, Copy)]
enum Target {
    Lowest,
    Nearest(f64),
}

struct ShiftInvert {
    factor: EnvelopeLdlt,
    imaginary: bool,
}

impl SymmetricOperator for ShiftInvert {
    fn dim(&self) -> usize {
        self.factor.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let mut z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.factor.solve_in_place(&mut z);
        for (yi, zi) in y.iter_mut().zip(&z) {
            *yi = if self.imaginary { zi.im } else { zi.re };
        }
        Ok(())
    }
}

/// `(λ, y)` pairs of the symmetric matrix `a`, ascending by λ.
fn symmetric_pairs(
    a: &CsrMatrix<f64>,
    count: usize,
    target: Target,
    opts: &EigenOptions,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = a.dim();
    if count > n {
        return Err(invalid("n_modes", "exceeds the number of interior sites"));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut pairs = if n <= opts.dense_limit {
        dense_pairs(a, count, target)?
    } else {
        krylov_pairs(a, count, target, opts)?
    };
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pairs)
}

fn dense_pairs(a: &CsrMatrix<f64>, count: usize, target: Target) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = a.dim();
    let mut m = SymmetricMatrix::zeros(n);
    for (r, c, v) in a.iter() {
        if c <= r {
            m.set(r, c, v);
        }
    }
    let eig = SymmetricEigen::new(m)?;
    let mut idx: Vec<usize> = match target {
        Target::Lowest => (0..count).collect(),
        Target::Nearest(t) => {
            let mut all: Vec<usize> = (0..n).collect();
            all.sort_by(|&x, &y| {
                (eig.values[x] - t)
                    .abs()
                    .total_cmp(&(eig.values[y] - t).abs())
                    .then(x.cmp(&y))
            });
            all.truncate(count);
            all
        }
    };
    idx.sort_unstable();
    let vecs = eig.vectors(&idx);
    Ok(idx.iter().map(|&i| eig.values[i]).zip(vecs).collect())
}

fn krylov_pairs(a: &CsrMatrix<f64>, count: usize, target: Target, opts: &EigenOptions) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = a.dim();
    // typical eigenvalue spacing of the five-point operator is 4π/n
    let (sigma, delta) = match target {
        Target::Lowest => (0.0, 0.0),
        Target::Nearest(t) => (t, 2.0 * PI * (count + 2) as f64 / n as f64),
    };
    let shifted = a.map(|v| Complex64::new(v, 0.0));
    let trip = shifted
        .iter()
        .map(|(r, c, v)| {
            if r == c {
                (r, c, v - Complex64::new(sigma, delta))
            } else {
                (r, c, v)
            }
        })
        .collect();
    let shifted = CsrMatrix::from_triplets(n, trip);
    let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max) + sigma.abs() + delta;
    let factor = EnvelopeLdlt::factor(&shifted, 1e-14 * scale)?;
    let op = ShiftInvert {
        factor,
        imaginary: delta != 0.0,
    };
    let ritz = largest_eigenpairs(&op, count, opts.lanczos)?;
    let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(count);
    let mut av = vec![0.0; n];
    for p in ritz {
        let y = p.vector;
        a.mul_vec_into(&y, &mut av);
        let lambda: f64 = y.iter().zip(&av).map(|(u, v)| u * v).sum();
        let resid = av
            .iter()
            .zip(&y)
            .map(|(v, u)| (v - lambda * u).powi(2))
            .sum::<f64>()
            .sqrt();
        if resid > 1e-7 * scale {
            return Err(Error::NotConverged {
                what: "shift-invert eigenvector",
                iterations: opts.lanczos.max_runs,
            });
        }
        out.push((lambda, y));
    }
    Ok(out)
}

fn pencil_modes(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    pert: &Perturbation,
    count: usize,
    target: Target,
    opts: &EigenOptions,
) -> Result<Vec<Mode>> {
    let (k, mass) = lossless_pencil(geometry, spec.model(), pert);
    let unit_mass = mass.iter().all(|&m| m == 1.0);
    let a = if unit_mass { k } else { scaled_pencil(&k, &mass) };
    let pairs = symmetric_pairs(&a, count, target, opts)?;
    let a0 = geometry.spacing();
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(index, (lambda, mut y))| {
            if !unit_mass {
                for (yi, m) in y.iter_mut().zip(&mass) {
                    *yi /= m.sqrt();
                }
            }
            normalize(&mut y);
            fix_sign(&mut y);
            Mode {
                index,
                omega: frequency_of(spec, lambda),
                lambda,
                eps: lambda / (a0 * a0),
                vector: y,
            }
        })
        .collect())
}

/// The `n_modes` lowest lattice eigenvalues of the lossless network with
/// grounded boundary (`R` is ignored), ascending in `λ`.
pub fn eigenmodes_lossless(geometry: &GridGeometry, spec: &CircuitSpec, n_modes: usize) -> Result<Vec<Mode>> {
    eigenmodes_lossless_with(geometry, spec, n_modes, &EigenOptions::default())
}

pub fn eigenmodes_lossless_with(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    n_modes: usize,
    opts: &EigenOptions,
) -> Result<Vec<Mode>> {
    pencil_modes(
        geometry,
        spec,
        &Perturbation::none(geometry),
        n_modes,
        Target::Lowest,
        opts,
    )
}

/// The `count` lossless modes of the (possibly perturbed) network whose
/// resonance lies nearest to `omega` in lattice eigenvalue, ascending in `λ`.
pub fn eigenmodes_near(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    pert: &Perturbation,
    omega: f64,
    count: usize,
    opts: &EigenOptions,
) -> Result<Vec<Mode>> {
    check_omega(omega)?;
    pencil_modes(
        geometry,
        spec,
        pert,
        count,
        Target::Nearest(eigenvalue_of(spec, omega)),
        opts,
    )
}

/// Complex node voltages of a driven (or modal) network state.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    /// One value per interior site, in [`GridGeometry::interior`] order.
    pub values: Vec<Complex64>,
    /// One value per boundary site; zero on grounded sites.
    pub boundary: Vec<Complex64>,
    pub omega: f64,
    pub spec: Option<CircuitSpec>,
    pub seed: Option<u64>,
    pub source: Option<Source>,
}

impl ComplexField {
    /// Real field of a lossless mode.
    pub fn from_mode(geometry: &GridGeometry, spec: &CircuitSpec, mode: &Mode) -> Self {
        Self {
            values: mode.vector.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            boundary: vec![Complex64::new(0.0, 0.0); geometry.boundary().len()],
            omega: mode.omega,
            spec: Some(*spec),
            seed: None,
            source: None,
        }
    }

    /// Field given directly by interior values; boundary grounded.
    pub fn from_values(geometry: &GridGeometry, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != geometry.interior().len() {
            return Err(invalid("values", "length differs from the interior site count"));
        }
        Ok(Self {
            values,
            boundary: vec![Complex64::new(0.0, 0.0); geometry.boundary().len()],
            omega: 0.0,
            spec: None,
            seed: None,
            source: None,
        })
    }

    /// Voltage at lattice site `(i, j)`; zero outside the network.
    pub fn at(&self, geometry: &GridGeometry, i: i64, j: i64) -> Complex64 {
        match geometry.label(i, j) {
            Label::Interior(k) => self.values[k],
            Label::Boundary(b) => self.boundary[b],
            Label::Exterior => Complex64::new(0.0, 0.0),
        }
    }

    /// Voltages on the whole `nx × ny` lattice, `j·nx + i` order.
    pub fn lattice(&self, geometry: &GridGeometry) -> Vec<Complex64> {
        let (nx, ny) = geometry.extents();
        let mut out = vec![Complex64::new(0.0, 0.0); nx * ny];
        for (&(i, j), v) in geometry.interior().iter().zip(&self.values) {
            out[j * nx + i] = *v;
        }
        for (&(i, j), v) in geometry.boundary().iter().zip(&self.boundary) {
            out[j * nx + i] = *v;
        }
        out
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut f = self.clone();
        f.values.iter_mut().chain(f.boundary.iter_mut()).for_each(|v| *v *= c);
        f
    }
}

/// Relative residual required of every driven solve.
pub const RESIDUAL_TOL: f64 = 1e-10;
const MAX_REFINEMENTS: usize = 6;
const PIVOT_TOL: f64 = 1e-13;

/// Factored admittance system at one frequency; solves for any number of
/// sources.
#[derive(Debug, Clone)]
pub struct DrivenSolver<'g> {
    geometry: &'g GridGeometry,
    spec: CircuitSpec,
    seed: Option<u64>,
    omega: f64,
    matrix: CsrMatrix<Complex64>,
    unknowns: UnknownMap,
    factor: EnvelopeLdlt,
}

impl<'g> DrivenSolver<'g> {
    pub fn new(geometry: &'g GridGeometry, spec: &CircuitSpec, omega: f64, pert: &Perturbation) -> Result<Self> {
        let sys = assemble_admittance(geometry, spec, omega, pert, None)?;
        let factor = EnvelopeLdlt::factor(&sys.matrix, PIVOT_TOL * sys.element_scale)?;
        let seed = (pert.settings().tau > 0.0).then_some(pert.seed());
        Ok(Self {
            geometry,
            spec: *spec,
            seed,
            omega,
            matrix: sys.matrix,
            unknowns: sys.unknowns,
            factor,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn matrix(&self) -> &CsrMatrix<Complex64> {
        &self.matrix
    }

    /// Response to one current source, refined until the relative residual
    /// is at most [`RESIDUAL_TOL`].
    pub fn solve(&self, source: &Source) -> Result<ComplexField> {
        let k = self
            .geometry
            .interior_index(source.site.0 as i64, source.site.1 as i64)
            .ok_or(Error::NotInterior {
                i: source.site.0 as i64,
                j: source.site.1 as i64,
            })?;
        let (si, sj) = self.geometry.interior()[k];
        let row = self.unknowns.index(si, sj).unwrap();
        let n = self.matrix.dim();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        b[row] = source.amplitude;
        let bnorm = source.amplitude.norm();
        if bnorm == 0.0 {
            return Ok(self.assemble_field(vec![Complex64::new(0.0, 0.0); n], source));
        }
        let mut x = self.factor.solve(&b);
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        let mut resid = f64::INFINITY;
        for _ in 0..=MAX_REFINEMENTS {
            self.matrix.mul_vec_into(&x, &mut r);
            for (ri, bi) in r.iter_mut().zip(&b) {
                *ri = *bi - *ri;
            }
            resid = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / bnorm;
            if !resid.is_finite() {
                break;
            }
            if resid <= RESIDUAL_TOL {
                return Ok(self.assemble_field(x, source));
            }
            self.factor.solve_in_place(&mut r);
            for (xi, di) in x.iter_mut().zip(&r) {
                *xi += *di;
            }
        }
        Err(Error::Residual {
            residual: resid,
            tolerance: RESIDUAL_TOL,
        })
    }

    fn assemble_field(&self, x: Vec<Complex64>, source: &Source) -> ComplexField {
        let g = self.geometry;
        let values = g
            .interior()
            .iter()
            .map(|&(i, j)| x[self.unknowns.index(i, j).unwrap()])
            .collect();
        let boundary = g
            .boundary()
            .iter()
            .enumerate()
            .map(|(b, &(i, j))| match g.boundary_kind(b) {
                BcKind::Dirichlet => Complex64::new(0.0, 0.0),
                _ => x[self.unknowns.index(i, j).unwrap()],
            })
            .collect();
        ComplexField {
            values,
            boundary,
            omega: self.omega,
            spec: Some(self.spec),
            seed: self.seed,
            source: Some(*source),
        }
    }
}

/// Steady-state voltages with an ac current source at one interior site.
pub fn driven_response(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    omega: f64,
    source: &Source,
    pert: &Perturbation,
) -> Result<ComplexField> {
    geometry
        .interior_index(source.site.0 as i64, source.site.1 as i64)
        .ok_or(Error::NotInterior {
            i: source.site.0 as i64,
            j: source.site.1 as i64,
        })?;
    DrivenSolver::new(geometry, spec, omega, pert)?.solve(source)
}

/// A resonance located by a frequency sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub omega: f64,
    /// `‖V‖²` at the peak.
    pub response: f64,
    /// Full width at half maximum, when both half-power points lie inside
    /// the swept range.
    pub fwhm: Option<f64>,
}

fn response(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    pert: &Perturbation,
    source: &Source,
    omega: f64,
) -> Result<f64> {
    let f = driven_response(geometry, spec, omega, source, pert)?;
    Ok(f.values.iter().chain(&f.boundary).map(|v| v.norm_sqr()).sum())
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const PEAK_REL_TOL: f64 = 1e-6;

/// Sweeps `‖V(ω)‖²` over `n_points` evenly spaced frequencies, then refines
/// every interior local maximum by golden-section search to relative
/// accuracy 10⁻⁶ and measures its half-power width.
pub fn resonance_sweep(
    geometry: &GridGeometry,
    spec: &CircuitSpec,
    range: (f64, f64),
    n_points: usize,
    source: &Source,
    pert: &Perturbation,
) -> Result<Vec<Peak>> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid("omega_range", "must be positive and increasing"));
    }
    if n_points < 3 {
        return Err(invalid("n_points", "a sweep needs at least three frequencies"));
    }
    if spec.resistance() == 0.0 {
        return Err(Error::NoDamping);
    }
    geometry
        .interior_index(source.site.0 as i64, source.site.1 as i64)
        .ok_or(Error::NotInterior {
            i: source.site.0 as i64,
            j: source.site.1 as i64,
        })?;
    let step = (hi - lo) / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points).map(|k| lo + step * k as f64).collect();
    let vals: Vec<f64> = grid
        .iter()
        .map(|&w| response(geometry, spec, pert, source, w))
        .collect::<Result<_>>()?;
    let eval = |w: f64| response(geometry, spec, pert, source, w);

    let mut peaks = Vec::new();
    for k in 1..n_points - 1 {
        if !(vals[k] > vals[k - 1] && vals[k] >= vals[k + 1]) {
            continue;
        }
        let (mut a, mut b) = (grid[k - 1], grid[k + 1]);
        let mut c = b - GOLDEN * (b - a);
        let mut d = a + GOLDEN * (b - a);
        let mut fc = eval(c)?;
        let mut fd = eval(d)?;
        while b - a > PEAK_REL_TOL * 0.5 * (a + b) {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - GOLDEN * (b - a);
                fc = eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + GOLDEN * (b - a);
                fd = eval(d)?;
            }
        }
        let omega = 0.5 * (a + b);
        let peak = eval(omega)?;
        let half = 0.5 * peak;
        let left = half_power_point(&eval, omega, lo, -step, half)?;
        let right = half_power_point(&eval, omega, hi, step, half)?;
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => Some(r - l),
            _ => None,
        };
        peaks.push(Peak {
            omega,
            response: peak,
            fwhm,
        });
    }
    Ok(peaks)
}

/// Frequency between `omega` and `limit` where the response first drops to
/// `half`, stepping outward by `step` then bisecting.
fn half_power_point<F: Fn(f64) -> Result<f64>>(
    eval: &F,
    omega: f64,
    limit: f64,
    step: f64,
    half: f64,
) -> Result<Option<f64>> {
    let h = step / 64.0;
    let mut inner = omega;
    let mut width = h;
    let mut outer = loop {
        let next = omega + width;
        if (h > 0.0 && next > limit) || (h < 0.0 && next < limit) {
            return Ok(None);
        }
        if eval(next)? <= half {
            break next;
        }
        inner = next;
        width *= 2.0;
    };
    for _ in 0..60 {
        let mid = 0.5 * (inner + outer);
        if (outer - inner).abs() <= 1e-9 * omega {
            break;
        }
        if eval(mid)? > half {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    Ok(Some(0.5 * (inner + outer)))
}
