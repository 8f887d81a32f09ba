//! Rasterized billiard shapes on a square lattice.
//!
//! Lattice site `(i, j)` sits at `(x, y) = a₀·(i, j)`. A site is interior iff
//! its center lies strictly inside the continuum region; sites on the curve
//! are not. Boundary sites are the non-interior sites next to the interior
//! and are stored explicitly so that shunt elements can be attached to them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::{Error, Result};

/// Coarsest allowed quarter-stadium spacing: ten sites across the width.
pub const MIN_SITES_PER_WIDTH: usize = 10;

/// Shunt element for mixed boundaries: a resistive inductor to ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuntRl {
    resistance: f64,
    inductance: f64,
}

impl ShuntRl {
    pub fn new(resistance: f64, inductance: f64) -> Result<Self> {
        if !(inductance > 0.0) || !inductance.is_finite() {
            return Err(invalid("shunt_inductance", "must be strictly positive"));
        }
        if !(resistance >= 0.0) || !resistance.is_finite() {
            return Err(invalid("shunt_resistance", "must be non-negative"));
        }
        Ok(Self { resistance, inductance })
    }

    pub fn resistance(&self) -> f64 {
        self.resistance
    }

    pub fn inductance(&self) -> f64 {
        self.inductance
    }
}

/// Boundary treatment of a boundary site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcKind {
    /// Site grounded: `V = 0`.
    Dirichlet,
    /// Site floating, shunted to ground through the network's ground element
    /// (a capacitor in model I): free boundary.
    Neumann,
    /// Site shunted to ground through a resistive inductor.
    Mixed(ShuntRl),
}

/// What occupies a lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Exterior,
    /// Index into [`GridGeometry::interior`].
    Interior(usize),
    /// Index into [`GridGeometry::boundary`].
    Boundary(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Rectangle { nx: usize, ny: usize },
    QuarterStadium { sites_per_width: usize },
}

/// A billiard mapped onto the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    shape: Shape,
    spacing: f64,
    nx: usize,
    ny: usize,
    labels: Vec<Label>,
    interior: Vec<(usize, usize)>,
    boundary: Vec<(usize, usize)>,
    boundary_kind: Vec<BcKind>,
    j_fast: bool,
    perimeter_links: usize,
}

impl GridGeometry {
    fn from_mask(
        shape: Shape,
        spacing: f64,
        nx: usize,
        ny: usize,
        inside: impl Fn(usize, usize) -> bool,
        frame: bool,
    ) -> Self {
        // the site index along the shorter extent varies fastest
        let j_fast = ny <= nx;
        let raster: Vec<(usize, usize)> = if j_fast {
            (0..nx).flat_map(|i| (0..ny).map(move |j| (i, j))).collect()
        } else {
            (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).collect()
        };
        let mut is_in = vec![false; nx * ny];
        for &(i, j) in &raster {
            is_in[j * nx + i] = inside(i, j);
        }
        let mut labels = vec![Label::Exterior; nx * ny];
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let mut perimeter_links = 0;
        for &(i, j) in &raster {
            let k = j * nx + i;
            if is_in[k] {
                debug_assert!(i > 0 && j > 0 && i + 1 < nx && j + 1 < ny);
                labels[k] = Label::Interior(interior.len());
                interior.push((i, j));
                continue;
            }
            let mut touching = 0;
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                if ii >= 0
                    && jj >= 0
                    && (ii as usize) < nx
                    && (jj as usize) < ny
                    && is_in[jj as usize * nx + ii as usize]
                {
                    touching += 1;
                }
            }
            perimeter_links += touching;
            let on_frame = frame && (i == 0 || j == 0 || i + 1 == nx || j + 1 == ny);
            if touching > 0 || on_frame {
                labels[k] = Label::Boundary(boundary.len());
                boundary.push((i, j));
            }
        }
        let boundary_kind = vec![BcKind::Dirichlet; boundary.len()];
        Self {
            shape,
            spacing,
            nx,
            ny,
            labels,
            interior,
            boundary,
            boundary_kind,
            j_fast,
            perimeter_links,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Lattice spacing `a₀` (billiard width is the unit of length).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Lattice extents `(nx, ny)`, including the boundary frame.
    pub fn extents(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Interior sites in raster order.
    pub fn interior(&self) -> &[(usize, usize)] {
        &self.interior
    }

    /// Boundary sites in raster order.
    pub fn boundary(&self) -> &[(usize, usize)] {
        &self.boundary
    }

    pub fn boundary_kind(&self, idx: usize) -> BcKind {
        self.boundary_kind[idx]
    }

    pub fn boundary_kinds(&self) -> &[BcKind] {
        &self.boundary_kind
    }

    pub fn label(&self, i: i64, j: i64) -> Label {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return Label::Exterior;
        }
        self.labels[j as usize * self.nx + i as usize]
    }

    pub fn interior_index(&self, i: i64, j: i64) -> Option<usize> {
        match self.label(i, j) {
            Label::Interior(k) => Some(k),
            _ => None,
        }
    }

    pub fn is_interior(&self, i: i64, j: i64) -> bool {
        self.interior_index(i, j).is_some()
    }

    /// Position of site `(i, j)` in billiard units.
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.spacing, j as f64 * self.spacing)
    }

    /// Interior site nearest to the point `(x, y)`, if that lattice site is
    /// interior.
    pub fn site_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let i = libm::round(x / self.spacing) as i64;
        let j = libm::round(y / self.spacing) as i64;
        self.interior_index(i, j).map(|k| self.interior[k])
    }

    /// Ordering key along the raster (short extent fastest).
    pub fn raster_key(&self, i: usize, j: usize) -> usize {
        if self.j_fast {
            i * self.ny + j
        } else {
            j * self.nx + i
        }
    }

    /// Area `A = N_interior · a₀²`.
    pub fn area(&self) -> f64 {
        self.interior.len() as f64 * self.spacing * self.spacing
    }

    /// Length of the staircase separating interior from non-interior sites.
    pub fn perimeter(&self) -> f64 {
        self.perimeter_links as f64 * self.spacing
    }

    /// Tags every boundary site with `kind`.
    pub fn tag_boundary(mut self, kind: BcKind) -> Self {
        self.boundary_kind.iter_mut().for_each(|k| *k = kind);
        self
    }

    /// Tags a single boundary site.
    pub fn tag_boundary_site(&mut self, idx: usize, kind: BcKind) {
        self.boundary_kind[idx] = kind;
    }

    pub fn has_floating_boundary(&self) -> bool {
        self.boundary_kind.iter().any(|k| !matches!(k, BcKind::Dirichlet))
    }
}

fn check_spacing(a0: f64) -> Result<()> {
    if !(a0 > 0.0) || !a0.is_finite() {
        return Err(invalid("spacing", "must be positive and finite"));
    }
    Ok(())
}

/// Full `nx × ny` block of interior sites inside a one-site frame.
pub fn rasterize_rectangle(nx: usize, ny: usize, a0: f64) -> Result<GridGeometry> {
    if nx == 0 || ny == 0 {
        return Err(invalid("extent", "rectangle needs at least one interior site per side"));
    }
    check_spacing(a0)?;
    Ok(GridGeometry::from_mask(
        Shape::Rectangle { nx, ny },
        a0,
        nx + 2,
        ny + 2,
        |i, j| i >= 1 && j >= 1 && i <= nx && j <= ny,
        true,
    ))
}

/// Quarter of the Bunimovich stadium: the unit square `0 < x < 1, 0 < y < 1`
/// joined to the quarter disk `(x − 1)² + y² < 1, x ≥ 1`. The spacing must
/// be `1/n` with `n ≥ 10`.
pub fn rasterize_quarter_stadium(a0: f64) -> Result<GridGeometry> {
    check_spacing(a0)?;
    let n_f = 1.0 / a0;
    let n = libm::round(n_f) as usize;
    if n < MIN_SITES_PER_WIDTH {
        return Err(invalid("spacing", "coarser than ten sites across the billiard width"));
    }
    if (n_f - n as f64).abs() > 1e-6 * n_f {
        return Err(invalid("spacing", "must be the reciprocal of an integer"));
    }
    let n2 = n * n;
    Ok(GridGeometry::from_mask(
        Shape::QuarterStadium { sites_per_width: n },
        1.0 / n as f64,
        2 * n + 1,
        n + 1,
        move |i, j| {
            if i == 0 || j == 0 || j >= n {
                return false;
            }
            i < n || (i - n) * (i - n) + j * j < n2
        },
        false,
    ))
}

/// Exact area of the continuum quarter stadium.
pub const QUARTER_STADIUM_AREA: f64 = 1.0 + core::f64::consts::FRAC_PI_4;

/// Checks that `(i, j)` names an interior site.
pub fn require_interior(g: &GridGeometry, site: (usize, usize)) -> Result<usize> {
    g.interior_index(site.0 as i64, site.1 as i64)
        .ok_or(Error::NotInterior {
            i: site.0 as i64,
            j: site.1 as i64,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rectangle_counts() {
        let g = rasterize_rectangle(2, 2, 0.25).unwrap();
        assert_eq!(g.interior().len(), 4);
        assert_eq!(g.boundary().len(), 12);

        let g = rasterize_rectangle(1, 1, 0.5).unwrap();
        assert_eq!(g.interior(), &[(1, 1)]);
        let nbrs = [(0, 1), (2, 1), (1, 0), (1, 2)];
        for (i, j) in nbrs {
            assert!(matches!(g.label(i, j), Label::Boundary(_)));
        }

        let g = rasterize_rectangle(99, 49, 0.01).unwrap();
        assert!((g.area() - 99.0 * 49.0 * 1e-4).abs() < 1e-12);
        assert!((g.area() - 0.485).abs() < 1e-3);
        assert!((g.perimeter() - 2.0 * (99.0 + 49.0) * 0.01).abs() < 1e-12);
    }

    #[test]
    fn rectangle_rejects_empty() {
        assert!(rasterize_rectangle(0, 3, 0.1).is_err());
        assert!(rasterize_rectangle(3, 3, 0.0).is_err());
    }

    #[test]
    fn stadium_area_converges() {
        let g = rasterize_quarter_stadium(0.01).unwrap();
        assert_eq!(g.extents(), (201, 101));
        assert!((g.area() / QUARTER_STADIUM_AREA - 1.0).abs() < 0.02);
        let g = rasterize_quarter_stadium(0.005).unwrap();
        assert!((g.area() / QUARTER_STADIUM_AREA - 1.0).abs() < 0.01);
        let p = 4.0 + core::f64::consts::FRAC_PI_2;
        // staircase length overestimates the arc by at most 4/π
        assert!(g.perimeter() > p && g.perimeter() < 4.0 + 2.0 + 0.05);
    }

    #[test]
    fn stadium_rejects_coarse_spacing() {
        assert!(rasterize_quarter_stadium(0.5).is_err());
        assert!(rasterize_quarter_stadium(0.101).is_err());
        assert!(rasterize_quarter_stadium(0.1).is_ok());
    }

    #[test]
    fn interior_and_boundary_are_disjoint_and_in_bounds() {
        let g = rasterize_quarter_stadium(1.0 / 23.0).unwrap();
        let (nx, ny) = g.extents();
        for &(i, j) in g.interior() {
            assert!(i >= 1 && j >= 1 && i + 1 < nx && j + 1 < ny);
            assert!(!g.boundary().contains(&(i, j)));
        }
        // every interior neighbor is interior or boundary
        for &(i, j) in g.interior() {
            for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                assert_ne!(g.label(i as i64 + di, j as i64 + dj), Label::Exterior);
            }
        }
    }

    #[test]
    fn boundary_tags() {
        let g = rasterize_rectangle(3, 2, 0.1).unwrap().tag_boundary(BcKind::Neumann);
        assert!(g.boundary_kinds().iter().all(|k| *k == BcKind::Neumann));
        assert!(ShuntRl::new(1.0, 0.0).is_err());
        let mixed = BcKind::Mixed(ShuntRl::new(1.0, 1e-4).unwrap());
        let g = g.tag_boundary(mixed);
        assert_eq!(g.boundary_kind(0), mixed);
    }

    proptest! {
        #[test]
        fn stadium_mask_is_monotone_under_refinement(n in 10usize..60) {
            let coarse = rasterize_quarter_stadium(1.0 / n as f64).unwrap();
            let fine = rasterize_quarter_stadium(1.0 / (2 * n) as f64).unwrap();
            for &(i, j) in coarse.interior() {
                prop_assert!(fine.is_interior(2 * i as i64, 2 * j as i64));
            }
        }

        #[test]
        fn rasterization_is_deterministic(n in 10usize..40) {
            let a = rasterize_quarter_stadium(1.0 / n as f64).unwrap();
            let b = rasterize_quarter_stadium(1.0 / n as f64).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
