//! Log-linear fit of the energy density against distance to `Z_β`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::energy_density;
use crate::lattice::{FieldState, Grid};
use crate::planar::least_squares_line;

pub const DEFAULT_BETA: f64 = 0.5;
const BIN_WIDTH: f64 = 0.25;
const WINDOW: [f64; 2] = [3.0, 8.0];
const MIN_SHELLS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Decay rate per unit `r/ε`.
    pub rate: f64,
    /// `C` in `e ≈ C e^{−a r/ε} / ε²`.
    pub amplitude: f64,
    /// Window in units of ε.
    pub fit_window: [f64; 2],
    /// RMS residual of the fit in log units.
    pub residual: f64,
    pub beta: f64,
    /// `(bin centre r/ε, mean density, site count)`.
    pub shells: Vec<(f64, f64, usize)>,
}

impl DecayFit {
    pub const CSV_HEADER: &'static str = "r_over_eps,mean_density,count";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (r, m, c) in &self.shells {
            out.push_str(&format!("{r},{m},{c}\n"));
        }
        out
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra over the 8- (2D) or 26-neighbour (3D) periodic stencil.
fn stencil_distance(g: &Grid, sources: &[usize]) -> Vec<f64> {
    let dim = g.dim();
    let mut stencil = Vec::new();
    for idx in 0..3usize.pow(dim as u32) {
        let mut rem = idx;
        let mut off = vec![0i64; dim];
        for o in off.iter_mut() {
            *o = (rem % 3) as i64 - 1;
            rem /= 3;
        }
        if off.iter().all(|&o| o == 0) {
            continue;
        }
        let len = off.iter().enumerate().map(|(j, &o)| (o as f64 * g.spacing(j)).powi(2)).sum::<f64>().sqrt();
        stencil.push((off, len));
    }
    let mut dist = vec![f64::INFINITY; g.num_sites()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Item(0.0, s));
    }
    while let Some(Item(d, s)) = heap.pop() {
        if d > dist[s] {
            continue;
        }
        for (off, len) in &stencil {
            let t = g.offset(s, off);
            let nd = d + len;
            if nd < dist[t] {
                dist[t] = nd;
                heap.push(Item(nd, t));
            }
        }
    }
    dist
}

/// Stencil distance from each site to `Z_β = {|u|² ≤ 1 − β}`.
pub fn distance_to_zero_set(state: &FieldState, beta: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0,1), got {beta}")));
    }
    let sources: Vec<usize> =
        state.u().iter().enumerate().filter(|(_, z)| z.norm_sqr() <= 1.0 - beta).map(|(s, _)| s).collect();
    if sources.is_empty() {
        return Err(Error::NoZeroSet);
    }
    Ok(stencil_distance(state.grid(), &sources))
}

pub fn decay_fit(state: &FieldState, eps: f64, beta: f64) -> Result<DecayFit> {
    let e = energy_density(state, eps)?;
    let dist = distance_to_zero_set(state, beta)?;
    let bins = ((WINDOW[1] - WINDOW[0]) / BIN_WIDTH).round() as usize;
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (d, v) in dist.iter().zip(&e) {
        let x = d / eps;
        if x < WINDOW[0] || x >= WINDOW[1] {
            continue;
        }
        let b = (((x - WINDOW[0]) / BIN_WIDTH) as usize).min(bins - 1);
        sum[b] += v;
        count[b] += 1;
    }
    let shells: Vec<(f64, f64, usize)> = (0..bins)
        .filter(|&b| count[b] > 0 && sum[b] > 0.0)
        .map(|b| (WINDOW[0] + (b as f64 + 0.5) * BIN_WIDTH, sum[b] / count[b] as f64, count[b]))
        .collect();
    if shells.len() < MIN_SHELLS {
        return Err(Error::InvalidArgument(format!(
            "decay window [{}, {}]ε holds only {} populated shells (need {MIN_SHELLS})",
            WINDOW[0],
            WINDOW[1],
            shells.len()
        )));
    }
    let pts: Vec<(f64, f64)> = shells.iter().map(|s| (s.0, s.1.ln())).collect();
    let (slope, intercept) = least_squares_line(&pts);
    let residual =
        (pts.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    Ok(DecayFit { rate: -slope, amplitude: intercept.exp() * eps * eps, fit_window: WINDOW, residual, beta, shells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_distance_is_close_to_euclidean() {
        let g = Grid::uniform(2, 40, 1.0).unwrap();
        let src = g.index([20, 20, 0]);
        let d = stencil_distance(&g, &[src]);
        for s in 0..g.num_sites() {
            let exact = g.distance(&g.position(s), &g.position(src));
            assert!(d[s] >= exact - 1e-12);
            assert!(d[s] <= 1.09 * exact + 1e-12);
        }
    }
}
