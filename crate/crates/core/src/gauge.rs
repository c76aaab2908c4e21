//! Coulomb-gauge projection and reduction of the harmonic part of the
//! connection modulo the integral lattice.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::lattice::{apply_gauge, FieldState, Grid};
use crate::par;
use crate::spectral::solve_periodic_laplacian;

/// Backward-difference divergence `d*a` at sites (sign: `∑_j ∂_j a_j`).
pub fn divergence(state: &FieldState) -> Vec<f64> {
    let g = state.grid();
    let n = g.num_sites();
    let a = state.a();
    par::map(n, |s| {
        let mut acc = 0.0;
        for j in 0..g.dim() {
            acc += (a[j * n + s] - a[j * n + g.backward(s, j)]) / g.spacing(j);
        }
        acc
    })
}

/// Coulomb projection returning the gauge angle that was applied, so that
/// callers holding site-wise tangent data can rotate it along.
pub fn coulomb_gauge(state: &FieldState) -> (FieldState, Vec<f64>) {
    let g = state.grid();
    let div = divergence(state);
    let weights: Vec<f64> = g.spacings().iter().map(|h| 1.0 / (h * h)).collect();
    let theta = solve_periodic_laplacian(g.sizes(), &weights, &div);
    let minus: Vec<f64> = theta.iter().map(|t| -t).collect();
    (apply_gauge(state, &minus), minus)
}

/// Gauge-equivalent state with `d*a = 0` at the stencil level.
pub fn coulomb_project(state: &FieldState) -> FieldState {
    coulomb_gauge(state).0
}

/// Per-direction mean of the link field (flat-torus harmonic part).
pub fn harmonic_part(state: &FieldState) -> Vec<f64> {
    let g = state.grid();
    (0..g.dim())
        .map(|j| {
            let aj = state.a_dir(j);
            par::sum(aj.len(), |s| aj[s]) / aj.len() as f64
        })
        .collect()
}

/// Integers `k_j` of the lattice point `2π k_j / L_j` nearest to the harmonic
/// part, ties toward the upper end of the reduced interval.
pub fn harmonic_lattice_point(grid: &Grid, mean: &[f64]) -> Vec<i64> {
    mean.iter()
        .enumerate()
        .map(|(j, m)| (m * grid.length(j) / (2.0 * PI) - 0.5).ceil() as i64)
        .collect()
}

/// Harmonic reduction returning the site phase multiplied into `u`.
pub fn harmonic_gauge(state: &FieldState) -> (FieldState, Vec<f64>) {
    let g = state.grid();
    let k = harmonic_lattice_point(g, &harmonic_part(state));
    let n = g.num_sites();
    if k.iter().all(|&v| v == 0) {
        return (state.clone(), vec![0.0; n]);
    }
    let phase = par::map(n, |s| {
        let c = g.coords(s);
        -(0..g.dim()).map(|j| 2.0 * PI * k[j] as f64 * c[j] as f64 / g.size(j) as f64).sum::<f64>()
    });
    let mut out = state.clone();
    for (z, p) in out.u_mut().iter_mut().zip(&phase) {
        *z *= Complex64::from_polar(1.0, *p);
    }
    let a = out.a_mut();
    for j in 0..g.dim() {
        let shift = 2.0 * PI * k[j] as f64 / g.length(j);
        for v in &mut a[j * n..(j + 1) * n] {
            *v -= shift;
        }
    }
    (out, phase)
}

/// Gauge-equivalent state whose harmonic part lies in `(−π/L_j, π/L_j]`.
pub fn harmonic_reduce(state: &FieldState) -> FieldState {
    harmonic_gauge(state).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::energy;
    use crate::lattice::{build_state, BundleTwist, InitSpec};

    #[test]
    fn projection_kills_divergence() {
        let g = Grid::new(&[12, 10, 8], &[1.0, 1.3, 0.7]).unwrap();
        let st = build_state(&g, &BundleTwist::new(vec![1, 2, 0]), InitSpec::Random { seed: 3, amplitude: 0.7 }).unwrap();
        let p = coulomb_project(&st);
        assert!(divergence(&p).iter().all(|v| v.abs() < 1e-10));
        let (e0, e1) = (energy(&st, 0.4).unwrap().total, energy(&p, 0.4).unwrap().total);
        assert!((e0 - e1).abs() <= 1e-10 * e0);
        let (_, theta) = coulomb_gauge(&p);
        assert!(theta.iter().all(|t| t.abs() < 1e-12));
    }

    #[test]
    fn harmonic_exact_lattice_point() {
        let g = Grid::uniform(2, 16, 2.0).unwrap();
        let mut st = build_state(&g, &BundleTwist::trivial(2), InitSpec::Constant(Complex64::new(1.0, 0.0))).unwrap();
        let n = g.num_sites();
        for v in &mut st.a_mut()[..n] {
            *v = 2.0 * PI / 2.0;
        }
        let r = harmonic_reduce(&st);
        assert!(r.a().iter().all(|v| v.abs() < 1e-14));
        for s in 0..n {
            let x = g.position(s)[0];
            let want = Complex64::from_polar(1.0, -2.0 * PI * x / 2.0);
            assert!((r.u()[s] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn harmonic_small_mean_unchanged() {
        let g = Grid::uniform(2, 16, 1.0).unwrap();
        let mut st = build_state(&g, &BundleTwist::planar(2, 1), InitSpec::Random { seed: 1, amplitude: 0.0 }).unwrap();
        st.a_mut().iter_mut().for_each(|v| *v = 0.1);
        assert_eq!(harmonic_reduce(&st), st);
    }

    #[test]
    fn tie_stays_in_half_open_interval() {
        let g = Grid::uniform(2, 8, 1.0).unwrap();
        assert_eq!(harmonic_lattice_point(&g, &[PI, -PI]), vec![0, -1]);
        assert_eq!(harmonic_lattice_point(&g, &[3.0 * PI, 2.0 * PI - 0.1]), vec![1, 1]);
    }
}
