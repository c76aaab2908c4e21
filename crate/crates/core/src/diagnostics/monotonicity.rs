//! Normalized ball energies `Ẽ(r) = e^{C r} r^{2−n} ∫_{B_r} e_ε`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::energy_density;
use crate::lattice::{FieldState, Grid};
use crate::par;

/// Volume of the unit ball in dimension `k`, via `ω_k = 2π ω_{k−2} / k`.
pub fn unit_ball_measure(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI * unit_ball_measure(k - 2) / k as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityProfile {
    pub center: [f64; 3],
    pub radii: Vec<f64>,
    pub density: Vec<f64>,
    pub slack: f64,
    /// Index pairs `(i, i+1)` where `Ẽ + C r` drops by more than `tol`.
    pub violations: Vec<(usize, usize)>,
    pub tol: f64,
    /// `Ẽ(r_min) / ω_{n−2}`.
    pub theta: f64,
}

impl MonotonicityProfile {
    pub const CSV_HEADER: &'static str = "radius,density,theta";

    /// `Ẽ(r_i) / ω_{n−2}`, the density in units of the flat `(n−2)`-plane.
    pub fn normalized(&self, i: usize, dim: usize) -> f64 {
        self.density[i] / unit_ball_measure(dim - 2)
    }

    pub fn to_csv(&self, dim: usize) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (i, r) in self.radii.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", r, self.density[i], self.normalized(i, dim)));
        }
        out
    }
}

/// Per-axis subsample offsets inside a cell, in units of the spacing.
fn subsamples(dim: usize) -> Vec<f64> {
    if dim == 2 {
        vec![-1.0 / 3.0, 0.0, 1.0 / 3.0]
    } else {
        vec![-0.25, 0.25]
    }
}

/// Fraction of the cell around site `s` lying inside `B_r(center)`.
fn overlap(g: &Grid, s: usize, center: &[f64; 3], r: f64, offs: &[f64]) -> f64 {
    let dim = g.dim();
    let x = g.position(s);
    let mut d = [0.0; 3];
    for j in 0..dim {
        d[j] = g.min_image(x[j] - center[j], j);
    }
    let dist = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let half_diag = 0.5 * g.spacings().iter().map(|h| h * h).sum::<f64>().sqrt();
    if dist + half_diag <= r {
        return 1.0;
    }
    if dist - half_diag > r {
        return 0.0;
    }
    let m = offs.len();
    let total = m.pow(dim as u32);
    let mut inside = 0;
    for idx in 0..total {
        let mut rem = idx;
        let mut rr = 0.0;
        for j in 0..dim {
            let y = d[j] + offs[rem % m] * g.spacing(j);
            rem /= m;
            rr += y * y;
        }
        if rr.sqrt() <= r {
            inside += 1;
        }
    }
    inside as f64 / total as f64
}

pub fn monotonicity_profile(
    state: &FieldState,
    eps: f64,
    center: [f64; 3],
    radii: &[f64],
    slack: f64,
) -> Result<MonotonicityProfile> {
    let g = state.grid();
    if !g.resolves(eps) {
        return Err(Error::UnderResolved { epsilon: eps, spacing: g.transverse_spacing() });
    }
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii".into()));
    }
    if !(slack >= 0.0) {
        return Err(Error::InvalidArgument(format!("slack constant must be nonnegative, got {slack}")));
    }
    let bound = g.lengths().iter().copied().fold(f64::INFINITY, f64::min) / 3.0;
    for w in radii.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
        }
    }
    if !(radii[0] > 0.0) {
        return Err(Error::InvalidArgument(format!("radii must be positive, got {}", radii[0])));
    }
    let r_max = *radii.last().unwrap();
    if r_max >= bound {
        return Err(Error::RadiusTooLarge { radius: r_max, bound });
    }

    let e = energy_density(state, eps)?;
    let vol = g.cell_volume();
    let dim = g.dim();
    let offs = subsamples(dim);
    let density: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let mass = vol * par::sum(e.len(), |s| if e[s] == 0.0 { 0.0 } else { e[s] * overlap(g, s, &center, r, &offs) });
            (slack * r).exp() * r.powi(2 - dim as i32) * mass
        })
        .collect();
    let peak = density.iter().copied().fold(0.0, f64::max);
    let tol = 0.05 * peak;
    let violations = (0..radii.len().saturating_sub(1))
        .filter(|&i| density[i + 1] + slack * radii[i + 1] < density[i] + slack * radii[i] - tol)
        .map(|i| (i, i + 1))
        .collect();
    let theta = density[0] / unit_ball_measure(dim - 2);
    Ok(MonotonicityProfile { center, radii: radii.to_vec(), density, slack, violations, tol, theta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_measures() {
        assert_eq!(unit_ball_measure(1), 2.0);
        assert!((unit_ball_measure(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        assert!((unit_ball_measure(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_recovers_disc_area() {
        let g = Grid::uniform(2, 64, 1.0).unwrap();
        let c = [0.5 + 0.003, 0.5 - 0.002, 0.0];
        let offs = subsamples(2);
        let r = 0.2;
        let area: f64 = (0..g.num_sites()).map(|s| overlap(&g, s, &c, r, &offs)).sum::<f64>() * g.cell_volume();
        let exact = std::f64::consts::PI * r * r;
        assert!((area - exact).abs() / exact < 5e-3, "{area} vs {exact}");
    }
}
