//! Cutoff energy integrals over transverse 2-planes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::vortices::plaquette_vorticity;
use crate::error::{Error, Result};
use crate::functional::energy_density;
use crate::lattice::{FieldState, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub index: usize,
    pub integral: f64,
    /// Distance of the integral to the nearest element of `2πℕ`.
    pub distance: f64,
    /// `false` when the cutoff was centred at the energy barycentre.
    pub intersected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceQuantization {
    pub axis: usize,
    pub chi_radius: f64,
    pub slices: Vec<SliceRow>,
    pub median: f64,
    pub worst: f64,
}

impl SliceQuantization {
    pub const CSV_HEADER: &'static str = "slice,integral,distance,intersected";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.slices {
            out.push_str(&format!("{},{},{},{}\n", r.index, r.integral, r.distance, r.intersected));
        }
        out
    }
}

/// Plateau cutoff: 1 on `ρ ≤ 3R/4`, smoothstep down to 0 at `R`.
fn cutoff(rho: f64, radius: f64) -> f64 {
    let inner = 0.75 * radius;
    if rho <= inner {
        1.0
    } else if rho >= radius {
        0.0
    } else {
        let t = (radius - rho) / (radius - inner);
        t * t * (3.0 - 2.0 * t)
    }
}

fn in_plane_distance(g: &Grid, x: &[f64; 3], c: &[f64; 3], plane: (usize, usize)) -> f64 {
    let dj = g.min_image(x[plane.0] - c[plane.0], plane.0);
    let dk = g.min_image(x[plane.1] - c[plane.1], plane.1);
    dj.hypot(dk)
}

/// Energy-weighted circular mean of the slice positions.
fn barycentre(g: &Grid, sites: &[usize], e: &[f64], plane: (usize, usize)) -> [f64; 3] {
    let mut c = [0.0; 3];
    for j in [plane.0, plane.1] {
        let l = g.length(j);
        let (mut cs, mut sn) = (0.0, 0.0);
        for &s in sites {
            let phase = 2.0 * PI * g.position(s)[j] / l;
            cs += e[s] * phase.cos();
            sn += e[s] * phase.sin();
        }
        c[j] = (sn.atan2(cs) / (2.0 * PI)).rem_euclid(1.0) * l;
    }
    c
}

pub fn slice_quantization(state: &FieldState, eps: f64, axis: usize, chi_radius: f64) -> Result<SliceQuantization> {
    let g = state.grid();
    if g.dim() != 3 {
        return Err(Error::InvalidArgument("slice quantization needs a 3-dimensional grid".into()));
    }
    if axis > 2 {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    if !(chi_radius > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff radius must be positive, got {chi_radius}")));
    }
    let e = energy_density(state, eps)?;
    let plane = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let q = plaquette_vorticity(state, plane);
    let area = g.spacing(plane.0) * g.spacing(plane.1);
    let mut sites_by_slice = vec![Vec::new(); g.size(axis)];
    for s in 0..g.num_sites() {
        sites_by_slice[g.coords(s)[axis]].push(s);
    }

    let mut slices = Vec::with_capacity(g.size(axis));
    for (t, sites) in sites_by_slice.iter().enumerate() {
        let mut centres: Vec<[f64; 3]> = sites
            .iter()
            .filter(|&&s| q[s] != 0)
            .map(|&s| {
                let mut x = g.position(s);
                x[plane.0] += 0.5 * g.spacing(plane.0);
                x[plane.1] += 0.5 * g.spacing(plane.1);
                x
            })
            .collect();
        let intersected = !centres.is_empty();
        if !intersected {
            centres.push(barycentre(g, sites, &e, plane));
        }
        let integral: f64 = sites
            .iter()
            .map(|&s| {
                let x = g.position(s);
                let chi = centres.iter().map(|c| cutoff(in_plane_distance(g, &x, c, plane), chi_radius)).fold(0.0, f64::max);
                chi * e[s]
            })
            .sum::<f64>()
            * area;
        let k = (integral / (2.0 * PI)).round().max(0.0);
        slices.push(SliceRow { index: t, integral, distance: (integral - 2.0 * PI * k).abs(), intersected });
    }
    let mut d: Vec<f64> = slices.iter().map(|r| r.distance).collect();
    d.sort_by(f64::total_cmp);
    let median = if d.len() % 2 == 1 { d[d.len() / 2] } else { 0.5 * (d[d.len() / 2 - 1] + d[d.len() / 2]) };
    let worst = *d.last().unwrap();
    Ok(SliceQuantization { axis, chi_radius, slices, median, worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0, 1.0), 1.0);
        assert_eq!(cutoff(0.75, 1.0), 1.0);
        assert_eq!(cutoff(1.0, 1.0), 0.0);
        assert!((cutoff(0.875, 1.0) - 0.5).abs() < 1e-12);
    }
}
