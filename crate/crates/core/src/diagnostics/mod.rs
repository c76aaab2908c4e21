//! Structural measurements on computed states.

mod decay;
mod monotonicity;
mod slices;
mod vortices;

pub use decay::{decay_fit, distance_to_zero_set, DecayFit, DEFAULT_BETA};
pub use monotonicity::{monotonicity_profile, unit_ball_measure, MonotonicityProfile};
pub use slices::{slice_quantization, SliceQuantization, SliceRow};
pub use vortices::{extract_vortices, plaquette_vorticity, ChargedPoint, Polyline, VortexGeometry, VortexSet};

use crate::error::Result;
use crate::functional::energy_density;
use crate::lattice::{FieldState, Grid};
use crate::par;

/// Periodic distance from `x` to the segment `[p, q]` (endpoints joined by
/// their minimal image).
fn segment_distance(g: &Grid, x: &[f64; 3], p: &[f64; 3], q: &[f64; 3]) -> f64 {
    let dim = g.dim();
    let mut d = [0.0; 3];
    let mut t = [0.0; 3];
    for j in 0..dim {
        d[j] = g.min_image(x[j] - p[j], j);
        t[j] = g.min_image(q[j] - p[j], j);
    }
    let tt: f64 = t.iter().map(|v| v * v).sum();
    let s = if tt > 0.0 { (d.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>() / tt).clamp(0.0, 1.0) } else { 0.0 };
    (0..dim).map(|j| (d[j] - s * t[j]).powi(2)).sum::<f64>().sqrt()
}

/// Periodic distance from every site to the vortex set (points, or polyline
/// segments in 3D). Infinite when the set is empty.
pub fn distance_to_vortices(state: &FieldState, set: &VortexSet) -> Vec<f64> {
    let g = state.grid();
    match &set.geometry {
        VortexGeometry::Points(pts) => par::map(g.num_sites(), |s| {
            let x = g.position(s);
            pts.iter().map(|p| g.distance(&x[..2], &p.position)).fold(f64::INFINITY, f64::min)
        }),
        VortexGeometry::Lines(lines) => par::map(g.num_sites(), |s| {
            let x = g.position(s);
            let mut best = f64::INFINITY;
            for l in lines {
                let v = &l.vertices;
                if v.len() == 1 {
                    best = best.min(g.distance(&x, &v[0]));
                }
                let segs = if l.closed { v.len() } else { v.len().saturating_sub(1) };
                for i in 0..segs {
                    best = best.min(segment_distance(g, &x, &v[i], &v[(i + 1) % v.len()]));
                }
            }
            best
        }),
    }
}

/// Fraction of the total energy within distance `K ε` of the extracted vortex set.
pub fn concentration_fraction(state: &FieldState, eps: f64, k: f64) -> Result<f64> {
    let e = energy_density(state, eps)?;
    let set = extract_vortices(state);
    let dist = distance_to_vortices(state, &set);
    let radius = k * eps;
    let total = par::sum(e.len(), |s| e[s]);
    if !(total > 0.0) {
        return Ok(0.0);
    }
    let near = par::sum(e.len(), |s| if dist[s] <= radius { e[s] } else { 0.0 });
    Ok(near / total)
}
