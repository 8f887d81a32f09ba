//! File formats. Floats are written with 17 significant digits so reruns
//! compare byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rlcnet_core::fields::{StopReason, Streamline, Vortex};
use rlcnet_core::geometry::GridGeometry;
use rlcnet_core::solve::{ComplexField, Mode, Peak};
use rlcnet_core::stats::{Histogram, HistogramFit};

/// `{:.16e}` formatting.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write(path: &Path, text: &str) -> std::io::Result<()> {
    fs::write(path, text)
}

/// `i,j,x,y,re_v,im_v` over interior and boundary sites, raster order.
pub fn field_csv(path: &Path, g: &GridGeometry, field: &ComplexField) -> std::io::Result<()> {
    let mut sites: Vec<(usize, usize)> = g.interior().iter().chain(g.boundary()).copied().collect();
    sites.sort_by_key(|&(i, j)| g.raster_key(i, j));
    let mut s = String::from("i,j,x,y,re_v,im_v\n");
    for (i, j) in sites {
        let (x, y) = g.position(i, j);
        let v = field.at(g, i as i64, j as i64);
        let _ = writeln!(s, "{i},{j},{},{},{},{}", num(x), num(y), num(v.re), num(v.im));
    }
    write(path, &s)
}

/// `i,j,x,y,value` over the interior sites.
pub fn scalar_csv(path: &Path, g: &GridGeometry, values: &[f64]) -> std::io::Result<()> {
    let mut s = String::from("i,j,x,y,value\n");
    for (&(i, j), v) in g.interior().iter().zip(values) {
        let (x, y) = g.position(i, j);
        let _ = writeln!(s, "{i},{j},{},{},{}", num(x), num(y), num(*v));
    }
    write(path, &s)
}

/// `n,omega,eps_n`.
pub fn modes_csv(path: &Path, modes: &[Mode]) -> std::io::Result<()> {
    let mut s = String::from("n,omega,eps_n\n");
    for m in modes {
        let _ = writeln!(s, "{},{},{}", m.index, num(m.omega), num(m.eps));
    }
    write(path, &s)
}

/// `omega,response,fwhm,q`; empty cells where no width was measured.
pub fn peaks_csv(path: &Path, peaks: &[Peak]) -> std::io::Result<()> {
    let mut s = String::from("omega,response,fwhm,q\n");
    for p in peaks {
        let (w, q) = match p.fwhm {
            Some(w) => (num(w), num(p.omega / w)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(s, "{},{},{w},{q}", num(p.omega), num(p.response));
    }
    write(path, &s)
}

/// `x,y,winding`.
pub fn vortices_csv(path: &Path, vortices: &[Vortex]) -> std::io::Result<()> {
    let mut s = String::from("x,y,winding\n");
    for v in vortices {
        let _ = writeln!(s, "{},{},{}", num(v.x), num(v.y), v.winding);
    }
    write(path, &s)
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Boundary => "boundary",
        StopReason::MaxSteps => "max_steps",
        StopReason::Stagnation => "stagnation",
    }
}

/// One block per streamline: a `# streamline k stop=…` header, then `x y`
/// lines, blocks separated by a blank line.
pub fn streamlines_txt(path: &Path, lines: &[Streamline]) -> std::io::Result<()> {
    let mut s = String::new();
    for (k, l) in lines.iter().enumerate() {
        if k > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "# streamline {k} stop={}", stop_name(l.stop));
        for &(x, y) in &l.points {
            let _ = writeln!(s, "{} {}", num(x), num(y));
        }
    }
    write(path, &s)
}

/// `bin_lo,bin_hi,empirical,model` from parallel columns.
pub fn histogram_csv(path: &Path, edges: &[f64], empirical: &[f64], model: &[f64]) -> std::io::Result<()> {
    let mut s = String::from("bin_lo,bin_hi,empirical,model\n");
    for k in 0..empirical.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            num(edges[k]),
            num(edges[k + 1]),
            num(empirical[k]),
            num(model[k])
        );
    }
    write(path, &s)
}

pub fn fit_csv(path: &Path, fit: &HistogramFit) -> std::io::Result<()> {
    histogram_csv(path, &fit.edges, &fit.empirical, &fit.model)
}

pub fn averaged_csv(path: &Path, h: &Histogram, model: &[f64]) -> std::io::Result<()> {
    histogram_csv(path, &h.edges, &h.freq, model)
}

/// Plain PGM (P2) of interior values on the lattice, scaled to 0–255 by the
/// maximum, `y` increasing upward.
pub fn pgm(path: &Path, g: &GridGeometry, values: &[f64]) -> std::io::Result<()> {
    let (nx, ny) = g.extents();
    let mut grid = vec![0.0; nx * ny];
    for (&(i, j), v) in g.interior().iter().zip(values) {
        grid[j * nx + i] = *v;
    }
    let max = grid.iter().cloned().fold(0.0, f64::max);
    let mut s = format!("P2\n{nx} {ny}\n255\n");
    for j in (0..ny).rev() {
        let row: Vec<String> = (0..nx)
            .map(|i| {
                let v = if max > 0.0 { grid[j * nx + i] / max } else { 0.0 };
                format!("{}", (v * 255.0).round() as u8)
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    write(path, &s)
}

pub fn json(path: &Path, value: &serde_json::Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    write(path, &text)
}
