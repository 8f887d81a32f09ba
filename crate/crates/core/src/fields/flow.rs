use alloc::vec;
use alloc::vec::Vec;

use super::CurrentField;
use crate::error::invalid;
use crate::geometry::GridGeometry;
use crate::solve::ComplexField;
use crate::{Error, Result};

/// Time-averaged active power carried along each link, on the staggered
/// lattice: `fx[j·nx + i]` sits at the midpoint between `(i, j)` and
/// `(i+1, j)` and is positive when power flows toward `+x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    nx: usize,
    ny: usize,
    spacing: f64,
    pub fx: Vec<f64>,
    pub fy: Vec<f64>,
    max: f64,
}

impl FlowField {
    /// `½ Re(V_mid · conj(I))` per link, with the link current taken in the
    /// direction of increasing index.
    pub fn from_currents(geometry: &GridGeometry, field: &ComplexField, currents: &CurrentField) -> Self {
        let (nx, ny) = geometry.extents();
        let mut fx = vec![0.0; nx * ny];
        let mut fy = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let v = field.at(geometry, i as i64, j as i64);
                if i + 1 < nx {
                    let mid = 0.5 * (v + field.at(geometry, i as i64 + 1, j as i64));
                    // stored currents point from the +x neighbor back to (i, j)
                    fx[k] = -0.5 * (mid * currents.ix[k].conj()).re;
                }
                if j + 1 < ny {
                    let mid = 0.5 * (v + field.at(geometry, i as i64, j as i64 + 1));
                    fy[k] = -0.5 * (mid * currents.iy[k].conj()).re;
                }
            }
        }
        Self::from_components(geometry, fx, fy)
    }

    /// Flow given directly by its staggered components.
    pub fn from_components(geometry: &GridGeometry, fx: Vec<f64>, fy: Vec<f64>) -> Self {
        let (nx, ny) = geometry.extents();
        let max = fx.iter().zip(&fy).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
        Self {
            nx,
            ny,
            spacing: geometry.spacing(),
            fx,
            fy,
            max,
        }
    }

    fn sample(&self, grid: &[f64], u: f64, v: f64) -> f64 {
        let i0 = libm::floor(u);
        let j0 = libm::floor(v);
        let (s, t) = (u - i0, v - j0);
        let at = |i: f64, j: f64| -> f64 {
            if i < 0.0 || j < 0.0 || i as usize >= self.nx || j as usize >= self.ny {
                0.0
            } else {
                grid[j as usize * self.nx + i as usize]
            }
        };
        (1.0 - s) * (1.0 - t) * at(i0, j0)
            + s * (1.0 - t) * at(i0 + 1.0, j0)
            + (1.0 - s) * t * at(i0, j0 + 1.0)
            + s * t * at(i0 + 1.0, j0 + 1.0)
    }

    /// Bilinear interpolation of the staggered components at `(x, y)`.
    pub fn at(&self, x: f64, y: f64) -> (f64, f64) {
        let u = x / self.spacing;
        let v = y / self.spacing;
        (self.sample(&self.fx, u - 0.5, v), self.sample(&self.fy, u, v - 0.5))
    }

    pub fn max_magnitude(&self) -> f64 {
        self.max
    }
}

/// Why a streamline ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The next step would leave the interior.
    Boundary,
    MaxSteps,
    /// Flow fell below 10⁻¹² of its maximum.
    Stagnation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Streamline {
    pub points: Vec<(f64, f64)>,
    pub stop: StopReason,
}

const STAGNATION: f64 = 1e-12;

/// Integrates the unit direction of the flow from each seed by classical
/// fourth-order Runge–Kutta with arc-length step `step` (`≤ a₀/2`).
pub fn trace_streamlines(
    geometry: &GridGeometry,
    flow: &FlowField,
    seeds: &[(f64, f64)],
    step: f64,
    max_steps: usize,
) -> Result<Vec<Streamline>> {
    if !(step > 0.0 && step <= 0.5 * geometry.spacing()) {
        return Err(invalid("step", "must lie in (0, a₀/2]"));
    }
    let inside = |x: f64, y: f64| geometry.site_at(x, y).is_some();
    let floor = STAGNATION * flow.max;
    let dir = |x: f64, y: f64| -> Option<(f64, f64)> {
        let (u, v) = flow.at(x, y);
        let m = u.hypot(v);
        (m > floor && m > 0.0).then(|| (u / m, v / m))
    };
    let mut out = Vec::with_capacity(seeds.len());
    for &(x0, y0) in seeds {
        if !inside(x0, y0) {
            return Err(Error::NotInterior {
                i: libm::round(x0 / geometry.spacing()) as i64,
                j: libm::round(y0 / geometry.spacing()) as i64,
            });
        }
        let mut pts = vec![(x0, y0)];
        let (mut x, mut y) = (x0, y0);
        let mut stop = StopReason::MaxSteps;
        for _ in 0..max_steps {
            let next = (|| {
                let k1 = dir(x, y)?;
                let k2 = dir(x + 0.5 * step * k1.0, y + 0.5 * step * k1.1)?;
                let k3 = dir(x + 0.5 * step * k2.0, y + 0.5 * step * k2.1)?;
                let k4 = dir(x + step * k3.0, y + step * k3.1)?;
                Some((
                    x + step / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                    y + step / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
                ))
            })();
            let Some((nx, ny)) = next else {
                stop = StopReason::Stagnation;
                break;
            };
            if !inside(nx, ny) {
                stop = StopReason::Boundary;
                break;
            }
            x = nx;
            y = ny;
            pts.push((x, y));
        }
        out.push(Streamline { points: pts, stop });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rasterize_rectangle;

    #[test]
    fn uniform_flow_gives_straight_lines() {
        let g = rasterize_rectangle(30, 10, 0.1).unwrap();
        let n = g.extents().0 * g.extents().1;
        let flow = FlowField::from_components(&g, vec![1.0; n], vec![0.0; n]);
        let lines = trace_streamlines(&g, &flow, &[(0.5, 0.5), (1.0, 0.3)], 0.05, 1000).unwrap();
        for l in &lines {
            assert_eq!(l.stop, StopReason::Boundary);
            let y0 = l.points[0].1;
            assert!(l.points.iter().all(|p| (p.1 - y0).abs() < 1e-12));
            assert!(l.points.windows(2).all(|w| w[1].0 > w[0].0));
        }
    }

    #[test]
    fn zero_flow_stops_immediately() {
        let g = rasterize_rectangle(5, 5, 0.1).unwrap();
        let n = g.extents().0 * g.extents().1;
        let flow = FlowField::from_components(&g, vec![0.0; n], vec![0.0; n]);
        let lines = trace_streamlines(&g, &flow, &[(0.3, 0.3)], 0.05, 10).unwrap();
        assert_eq!(lines[0].points.len(), 1);
        assert_eq!(lines[0].stop, StopReason::Stagnation);
    }

    #[test]
    fn seeds_and_steps_are_checked() {
        let g = rasterize_rectangle(5, 5, 0.1).unwrap();
        let n = g.extents().0 * g.extents().1;
        let flow = FlowField::from_components(&g, vec![1.0; n], vec![0.0; n]);
        assert!(trace_streamlines(&g, &flow, &[(0.0, 0.0)], 0.05, 10).is_err());
        assert!(trace_streamlines(&g, &flow, &[(0.3, 0.3)], 0.06, 10).is_err());
    }
}
