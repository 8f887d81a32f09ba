use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::GridGeometry;
use crate::solve::ComplexField;

/// Phase singularity of the voltage field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vortex {
    /// Position in billiard units.
    pub x: f64,
    pub y: f64,
    /// `+1` for counterclockwise phase increase, `−1` otherwise.
    pub winding: i32,
    /// Lower-left lattice site of the cell holding the vortex.
    pub cell: (usize, usize),
}

fn wrap(mut d: f64) -> f64 {
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Corner values of cell `(i, j)` counterclockwise from the lower left, if
/// all four corners are interior.
fn corners(g: &GridGeometry, f: &ComplexField, i: usize, j: usize) -> Option<[Complex64; 4]> {
    let sites = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (o, &(a, b)) in out.iter_mut().zip(&sites) {
        *o = f.values[g.interior_index(a as i64, b as i64)?];
    }
    Some(out)
}

fn changes_sign(v: [f64; 4]) -> bool {
    let pos = v.iter().any(|&x| x > 0.0);
    let neg = v.iter().any(|&x| x < 0.0);
    let zero = v.contains(&0.0);
    (pos && neg) || (zero && (pos || neg))
}

/// Whether both the real and the imaginary nodal line pass through the
/// cell with lower-left corner `(i, j)`.
pub fn has_nodal_crossing(geometry: &GridGeometry, field: &ComplexField, i: usize, j: usize) -> bool {
    match corners(geometry, field, i, j) {
        Some(c) => changes_sign(c.map(|v| v.re)) && changes_sign(c.map(|v| v.im)),
        None => false,
    }
}

/// Net phase winding around a cell, in units of 2π.
fn winding(c: &[Complex64; 4]) -> i32 {
    let mut total = 0.0;
    for k in 0..4 {
        total += wrap(c[(k + 1) % 4].arg() - c[k].arg());
    }
    libm::round(total / (2.0 * PI)) as i32
}

/// Common zero of the bilinear interpolants of Re and Im on the unit cell.
fn bilinear_zero(c: &[Complex64; 4]) -> (f64, f64) {
    // f(s, t) = a + b s + c t + d s t with corners (0,0) (1,0) (1,1) (0,1)
    let coef = |v: [f64; 4]| (v[0], v[1] - v[0], v[3] - v[0], v[2] - v[1] - v[3] + v[0]);
    let (a1, b1, c1, d1) = coef(c.map(|v| v.re));
    let (a2, b2, c2, d2) = coef(c.map(|v| v.im));
    // eliminate t: (a2 + b2 s)(c1 + d1 s) − (c2 + d2 s)(a1 + b1 s) = 0
    let qa = b2 * d1 - d2 * b1;
    let qb = a2 * d1 + b2 * c1 - c2 * b1 - d2 * a1;
    let qc = a2 * c1 - c2 * a1;
    let mut roots = [f64::NAN; 2];
    if qa.abs() <= 1e-14 * (qb.abs() + qc.abs()) {
        if qb != 0.0 {
            roots[0] = -qc / qb;
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (qb + sq.copysign(qb));
            roots = [q / qa, if q != 0.0 { qc / q } else { f64::NAN }];
        }
    }
    let t_of = |s: f64| {
        let den1 = c1 + d1 * s;
        let den2 = c2 + d2 * s;
        if den1.abs() >= den2.abs() {
            -(a1 + b1 * s) / den1
        } else {
            -(a2 + b2 * s) / den2
        }
    };
    let slack = 1e-9;
    let inside = |x: f64| x >= -slack && x <= 1.0 + slack;
    let mut best: Option<(f64, f64)> = None;
    for s in roots.into_iter().filter(|s| s.is_finite()) {
        let t = t_of(s);
        if inside(s) && t.is_finite() && inside(t) {
            best = Some((s.clamp(0.0, 1.0), t.clamp(0.0, 1.0)));
            break;
        }
    }
    best.unwrap_or((0.5, 0.5))
}

/// Vortices in every cell of four interior sites around which both nodal
/// lines cross and the phase winds by `±2π`.
pub fn nodal_vortices(geometry: &GridGeometry, field: &ComplexField) -> Vec<Vortex> {
    let (nx, ny) = geometry.extents();
    let a0 = geometry.spacing();
    let mut out = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let Some(c) = corners(geometry, field, i, j) else {
                continue;
            };
            if !(changes_sign(c.map(|v| v.re)) && changes_sign(c.map(|v| v.im))) {
                continue;
            }
            let w = winding(&c);
            if w.abs() != 1 {
                continue;
            }
            let (s, t) = bilinear_zero(&c);
            out.push(Vortex {
                x: (i as f64 + s) * a0,
                y: (j as f64 + t) * a0,
                winding: w,
                cell: (i, j),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rasterize_rectangle;

    fn field_from(g: &GridGeometry, f: impl Fn(f64, f64) -> Complex64) -> ComplexField {
        let vals = g
            .interior()
            .iter()
            .map(|&(i, j)| {
                let (x, y) = g.position(i, j);
                f(x, y)
            })
            .collect();
        ComplexField::from_values(g, vals).unwrap()
    }

    #[test]
    fn real_field_has_no_vortices() {
        let g = rasterize_rectangle(12, 9, 0.1).unwrap();
        let f = field_from(&g, |x, y| Complex64::new((7.0 * x).sin() * (5.0 * y).cos(), 0.0));
        assert!(nodal_vortices(&g, &f).is_empty());
    }

    #[test]
    fn single_constructed_zero() {
        let g = rasterize_rectangle(20, 20, 0.05).unwrap();
        let (x0, y0) = (0.537, 0.411);
        let f = field_from(&g, |x, y| Complex64::new(x - x0, y - y0));
        let v = nodal_vortices(&g, &f);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].winding, 1);
        assert!((v[0].x - x0).abs() < 1e-12 && (v[0].y - y0).abs() < 1e-12);
        assert!(has_nodal_crossing(&g, &f, v[0].cell.0, v[0].cell.1));

        let conj = ComplexField::from_values(&g, f.values.iter().map(|z| z.conj()).collect()).unwrap();
        let w = nodal_vortices(&g, &conj);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].winding, -1);
    }

    #[test]
    fn loop_winding_counts_enclosed_vortices() {
        let g = rasterize_rectangle(40, 40, 0.025).unwrap();
        let zeros = [(0.31, 0.27, 1), (0.62, 0.55, -1), (0.42, 0.71, 1), (0.77, 0.33, 1)];
        let f = field_from(&g, |x, y| {
            let mut z = Complex64::new(1.0, 0.0);
            for &(a, b, w) in &zeros {
                let d = Complex64::new(x - a, y - b);
                z *= if w > 0 { d } else { d.conj() };
            }
            z
        });
        let vort = nodal_vortices(&g, &f);
        let net: i32 = vort.iter().map(|v| v.winding).sum();
        assert_eq!(vort.len(), 4);
        assert_eq!(net, 2);
        // phase winding around the loop through sites 2..=38
        let (lo, hi) = (2usize, 38usize);
        let mut path = Vec::new();
        for i in lo..hi {
            path.push((i, lo));
        }
        for j in lo..hi {
            path.push((hi, j));
        }
        for i in (lo + 1..=hi).rev() {
            path.push((i, hi));
        }
        for j in (lo + 1..=hi).rev() {
            path.push((lo, j));
        }
        let val = |(i, j): (usize, usize)| f.values[g.interior_index(i as i64, j as i64).unwrap()];
        let mut total = 0.0;
        for k in 0..path.len() {
            total += wrap(val(path[(k + 1) % path.len()]).arg() - val(path[k]).arg());
        }
        assert_eq!(libm::round(total / (2.0 * PI)) as i32, net);
    }
}
