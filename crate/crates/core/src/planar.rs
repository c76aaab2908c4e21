//! Radially symmetric planar vortices at critical coupling and seeding of
//! torus initial data from them.
//!
//! With `u = f(r) e^{iNθ}` and `A = a(r) dθ` the first-order equations read
//!
//! ```text
//! f' = f (N − a) / r,        a' = r (1 − f²) / 2.
//! ```
//!
//! The solver writes `f = r^N g`, which removes the singular behaviour at the
//! origin (`g' = −g a / r`), and discretizes on a uniform mesh with the
//! midpoint box scheme. At `r_max` the linearization about the vacuum gives
//! `N − a = r (K₁/K₀)(r) (1 − f)`, used as the outer closure.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{BundleTwist, FieldState, Grid, TwistRule};
use crate::par;
use crate::spectral::solve_periodic_laplacian;

pub const DEFAULT_R_MAX: f64 = 25.0;
pub const DEFAULT_MESH: usize = 5000;

const NEWTON_TOL: f64 = 1e-13;
const MAX_NEWTON: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub n: u32,
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub a: Vec<f64>,
    g: Vec<f64>,
}

/// Banded matrix eliminated together with one right-hand side.
struct Banded {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, width, data: vec![0.0; n * width] }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let off = j + self.kl - i;
        debug_assert!(off < self.width);
        i * self.width + off
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Gaussian elimination with partial pivoting; overwrites `b` with the solution.
    fn solve(mut self, b: &mut [f64]) -> Option<()> {
        let (n, kl) = (self.n, self.kl);
        let reach = self.width - kl - 1; // upper bandwidth after fill
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut piv = k;
            for i in k + 1..=last_row {
                if self.get(i, k).abs() > self.get(piv, k).abs() {
                    piv = i;
                }
            }
            if self.get(piv, k) == 0.0 {
                return None;
            }
            if piv != k {
                for j in k..=last_col {
                    let (x, y) = (self.get(k, j), self.get(piv, j));
                    self.set(k, j, y);
                    self.set(piv, j, x);
                }
                b.swap(k, piv);
            }
            let p = self.get(k, k);
            for i in k + 1..=last_row {
                let m = self.get(i, k) / p;
                if m == 0.0 {
                    continue;
                }
                self.set(i, k, 0.0);
                for j in k + 1..=last_col {
                    let v = self.get(i, j) - m * self.get(k, j);
                    self.set(i, j, v);
                }
                b[i] -= m * b[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=last_col {
                acc -= self.get(k, j) * b[j];
            }
            b[k] = acc / self.get(k, k);
        }
        Some(())
    }
}

/// Ratio `K₁(r)/K₀(r)` from the large-argument expansions (accurate to
/// `O(r⁻³)`, i.e. better than `1e−5` for `r ≥ 20`).
fn bessel_ratio(r: f64) -> f64 {
    let k1 = 1.0 + 3.0 / (8.0 * r) - 15.0 / (128.0 * r * r);
    let k0 = 1.0 - 1.0 / (8.0 * r) + 9.0 / (128.0 * r * r);
    k1 / k0
}

struct Scheme {
    n: i32,
    h: f64,
    m: usize,
}

impl Scheme {
    fn rm(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    fn rmax(&self) -> f64 {
        self.m as f64 * self.h
    }

    /// Scaled residuals: the `f` equation in `f` units, the `a` equation
    /// divided by `r`.
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let (n, h, m) = (self.n, self.h, self.m);
        let mut res = vec![0.0; 2 * (m + 1)];
        res[0] = x[1];
        for i in 0..m {
            let (g0, a0, g1, a1) = (x[2 * i], x[2 * i + 1], x[2 * i + 2], x[2 * i + 3]);
            let r = self.rm(i);
            let (gm, am) = (0.5 * (g0 + g1), 0.5 * (a0 + a1));
            let rn = r.powi(n);
            res[2 * i + 1] = rn * ((g1 - g0) / h + gm * am / r);
            res[2 * i + 2] = ((a1 - a0) / h - 0.5 * r * (1.0 - rn * rn * gm * gm)) / r;
        }
        let r = self.rmax();
        let (g, a) = (x[2 * m], x[2 * m + 1]);
        res[2 * m + 1] = (n as f64 - a) - r * bessel_ratio(r) * (1.0 - r.powi(n) * g);
        res
    }

    fn jacobian(&self, x: &[f64]) -> Banded {
        let (n, h, m) = (self.n, self.h, self.m);
        let mut jac = Banded::new(2 * (m + 1), 2, 2);
        jac.set(0, 1, 1.0);
        for i in 0..m {
            let (g0, a0, g1, a1) = (x[2 * i], x[2 * i + 1], x[2 * i + 2], x[2 * i + 3]);
            let r = self.rm(i);
            let (gm, am) = (0.5 * (g0 + g1), 0.5 * (a0 + a1));
            let rn = r.powi(n);
            let row = 2 * i + 1;
            jac.set(row, 2 * i, rn * (-1.0 / h + 0.5 * am / r));
            jac.set(row, 2 * i + 2, rn * (1.0 / h + 0.5 * am / r));
            jac.set(row, 2 * i + 1, rn * 0.5 * gm / r);
            jac.set(row, 2 * i + 3, rn * 0.5 * gm / r);
            let row = 2 * i + 2;
            let dg = 0.5 * rn * rn * gm;
            jac.set(row, 2 * i, dg);
            jac.set(row, 2 * i + 2, dg);
            jac.set(row, 2 * i + 1, -1.0 / (h * r));
            jac.set(row, 2 * i + 3, 1.0 / (h * r));
        }
        let r = self.rmax();
        let row = 2 * m + 1;
        jac.set(row, 2 * m + 1, -1.0);
        jac.set(row, 2 * m, r * bessel_ratio(r) * r.powi(n));
        jac
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solve the radial first-order system for vortex number `n` on `[0, r_max]`
/// with `mesh_size` nodes.
pub fn solve_bps(n: u32, r_max: f64, mesh_size: usize) -> Result<RadialProfile> {
    if n == 0 {
        return Err(Error::InvalidArgument("vortex number must be at least 1".into()));
    }
    if !(r_max >= 20.0) {
        return Err(Error::InvalidArgument(format!("r_max must be >= 20, got {r_max}")));
    }
    if mesh_size < 2000 {
        return Err(Error::InvalidArgument(format!("mesh size must be >= 2000, got {mesh_size}")));
    }
    let m = mesh_size - 1;
    let scheme = Scheme { n: n as i32, h: r_max / m as f64, m };
    let nf = n as f64;
    let mut x = vec![0.0; 2 * (m + 1)];
    for i in 0..=m {
        let r = i as f64 * scheme.h;
        let t = if r == 0.0 { 1.0 } else { r.tanh() / r };
        x[2 * i] = t.powi(n as i32);
        x[2 * i + 1] = nf * r * r / (r * r + 4.0 * nf);
    }
    let mut res = scheme.residual(&x);
    let mut norm = sup(&res);
    for _ in 0..MAX_NEWTON {
        if norm <= NEWTON_TOL {
            break;
        }
        let mut step: Vec<f64> = res.iter().map(|v| -v).collect();
        scheme.jacobian(&x).solve(&mut step).ok_or(Error::OdeNonConvergence { residual: norm })?;
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-8 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(v, d)| v + alpha * d).collect();
            let tres = scheme.residual(&trial);
            let tn = sup(&tres);
            if tn < norm {
                x = trial;
                res = tres;
                norm = tn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm > 1e-10 {
        return Err(Error::OdeNonConvergence { residual: norm });
    }
    let r: Vec<f64> = (0..=m).map(|i| i as f64 * scheme.h).collect();
    let g: Vec<f64> = (0..=m).map(|i| x[2 * i]).collect();
    let mut a: Vec<f64> = (0..=m).map(|i| x[2 * i + 1]).collect();
    // the boundary row holds a(0) = 0 only up to the Newton tolerance
    a[0] = 0.0;
    let f = r.iter().zip(&g).map(|(ri, gi)| ri.powi(n as i32) * gi).collect();
    Ok(RadialProfile { n, r, f, a, g })
}

/// Interval-midpoint quantities `(r, f, f', a, a')`.
fn midpoints(p: &RadialProfile) -> impl Iterator<Item = (f64, f64, f64, f64, f64)> + '_ {
    let n = p.n as i32;
    (0..p.r.len() - 1).map(move |i| {
        let h = p.r[i + 1] - p.r[i];
        let r = 0.5 * (p.r[i] + p.r[i + 1]);
        let f = r.powi(n) * 0.5 * (p.g[i] + p.g[i + 1]);
        let a = 0.5 * (p.a[i] + p.a[i + 1]);
        (r, f, (p.f[i + 1] - p.f[i]) / h, a, (p.a[i + 1] - p.a[i]) / h)
    })
}

impl RadialProfile {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// Sup-norm over interval midpoints of the discrete first-order
    /// equations `f' − f(N−a)/r` (with `f' = r^N (g' + N g / r)`) and
    /// `a'/r − (1−f²)/2`.
    pub fn residuals(&self) -> (f64, f64) {
        let n = self.n as i32;
        let mut rf: f64 = 0.0;
        let mut ra: f64 = 0.0;
        for i in 0..self.r.len() - 1 {
            let h = self.r[i + 1] - self.r[i];
            let r = 0.5 * (self.r[i] + self.r[i + 1]);
            let gm = 0.5 * (self.g[i] + self.g[i + 1]);
            let am = 0.5 * (self.a[i] + self.a[i + 1]);
            let f = r.powi(n) * gm;
            rf = rf.max((r.powi(n) * ((self.g[i + 1] - self.g[i]) / h + gm * am / r)).abs());
            ra = ra.max(((self.a[i + 1] - self.a[i]) / h / r - 0.5 * (1.0 - f * f)).abs());
        }
        (rf, ra)
    }

    pub fn energy(&self) -> f64 {
        let nf = self.n as f64;
        let mut acc = 0.0;
        for (i, (r, f, df, a, da)) in midpoints(self).enumerate() {
            let h = self.r[i + 1] - self.r[i];
            let w = 1.0 - f * f;
            let e = df * df + f * f * (nf - a).powi(2) / (r * r) + da * da / (r * r) + 0.25 * w * w;
            acc += e * r * h;
        }
        2.0 * PI * acc
    }

    /// Planar energy density at the mesh nodes, from the first-order equations.
    pub fn energy_density(&self) -> Vec<f64> {
        let n = self.n as i32;
        let nf = self.n as f64;
        (0..self.r.len())
            .map(|i| {
                let r = self.r[i];
                let df = r.powi(n - 1) * self.g[i] * (nf - self.a[i]);
                let w = 1.0 - self.f[i] * self.f[i];
                2.0 * df * df + 0.5 * w * w
            })
            .collect()
    }

    pub const CSV_HEADER: &'static str = "r,f,a,energy_density";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (i, e) in self.energy_density().iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", self.r[i], self.f[i], self.a[i], e));
        }
        out
    }

    /// Linear interpolation of `(f, a)` at radius `r`; vacuum values beyond the mesh.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let h = self.r[1];
        let t = r / h;
        let i = t.floor() as usize;
        if i + 1 >= self.r.len() {
            return (1.0, self.n as f64);
        }
        let w = t - i as f64;
        (
            (1.0 - w) * self.f[i] + w * self.f[i + 1],
            (1.0 - w) * self.a[i] + w * self.a[i + 1],
        )
    }

    /// Least-squares slope of `log(1 − f)` against `r` on `[lo, hi]`.
    pub fn tail_slope(&self, lo: f64, hi: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .r
            .iter()
            .zip(&self.f)
            .filter(|(r, f)| **r >= lo && **r <= hi && **f < 1.0)
            .map(|(r, f)| (*r, (1.0 - f).ln()))
            .collect();
        least_squares_slope(&pts)
    }
}

pub fn profile_energy(p: &RadialProfile) -> f64 {
    p.energy()
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    least_squares_line(pts).0
}

/// Ordinary least-squares line `y = slope x + intercept`.
pub(crate) fn least_squares_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn wrap(x: f64) -> f64 {
    x - 2.0 * PI * (x / (2.0 * PI)).round()
}

/// Superposition of rescaled planar profiles with charges `charges` at
/// `zeros` (positions in the `(0,1)` coordinate plane). In dimension three
/// the configuration is extruded along axis 2 as straight vortex lines, which
/// requires the degrees of planes `(0,2)` and `(1,2)` to vanish.
pub fn seed_from_profile(
    grid: &Grid,
    twist: &BundleTwist,
    zeros: &[[f64; 2]],
    charges: &[i64],
    epsilon: f64,
) -> Result<FieldState> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if zeros.len() != charges.len() {
        return Err(Error::InvalidArgument(format!(
            "{} zeros but {} charges",
            zeros.len(),
            charges.len()
        )));
    }
    if twist.degrees().len() != grid.num_planes() {
        return Err(Error::Shape("bundle degrees do not match the grid dimension".into()));
    }
    if grid.dim() == 3 && (twist.degree(1) != 0 || twist.degree(2) != 0) {
        return Err(Error::InvalidArgument(
            "vortex-line seeds run along axis 2; degrees of planes (0,2) and (1,2) must be zero".into(),
        ));
    }
    let total: i64 = charges.iter().sum();
    if total != twist.degree(0) {
        return Err(Error::DegreeMismatch { charges: total, degree: twist.degree(0) });
    }
    if charges.iter().any(|&q| q == 0) {
        return Err(Error::InvalidArgument("zero charge".into()));
    }
    if !grid.resolves(epsilon) {
        return Err(Error::UnderResolved { epsilon, spacing: grid.transverse_spacing() });
    }
    for i in 0..zeros.len() {
        for k in 0..i {
            let d = grid.distance(&zeros[i], &zeros[k]);
            if d < 6.0 * epsilon {
                return Err(Error::InvalidArgument(format!(
                    "zeros {k} and {i} are {d} apart, closer than 6 epsilon"
                )));
            }
        }
    }

    let plane = Grid::new(&grid.sizes()[..2], &grid.lengths()[..2])?;
    let mut profiles: Vec<RadialProfile> = Vec::new();
    for q in charges {
        let nq = q.unsigned_abs() as u32;
        if !profiles.iter().any(|p| p.n == nq) {
            profiles.push(solve_bps(nq, DEFAULT_R_MAX, DEFAULT_MESH)?);
        }
    }
    let profile_of = |q: i64| profiles.iter().find(|p| p.n == q.unsigned_abs() as u32).unwrap();
    let (u2, a2) = planar_seed(&plane, twist.degree(0), zeros, charges, epsilon, &profile_of);

    if grid.dim() == 2 {
        return FieldState::from_parts(grid.clone(), twist.clone(), u2, a2);
    }
    let n = grid.num_sites();
    let n2 = plane.num_sites();
    let depth = grid.size(2);
    let u = (0..n).map(|s| u2[s / depth]).collect();
    let mut a = vec![0.0; grid.num_links()];
    for j in 0..2 {
        for s in 0..n {
            a[j * n + s] = a2[j * n2 + s / depth];
        }
    }
    FieldState::from_parts(grid.clone(), twist.clone(), u, a)
}

/// Planar link field (angle units) whose plaquette curl equals `target`,
/// which must sum to zero.
fn links_with_curl(g: &Grid, target: &[f64]) -> Vec<f64> {
    let n = g.num_sites();
    let rhs: Vec<f64> = target.iter().map(|v| -v).collect();
    let psi = solve_periodic_laplacian(g.sizes(), &[1.0, 1.0], &rhs);
    let mut b = vec![0.0; 2 * n];
    for s in 0..n {
        b[s] = psi[s] - psi[g.backward(s, 1)];
        b[n + s] = -(psi[s] - psi[g.backward(s, 0)]);
    }
    b
}

/// Planar seed. The flux is the superposed profile flux `(1 − f²)/(2ε²)`
/// topped up uniformly to `2πd`; the covariant phase one-form `e` (phase
/// difference minus transport angle) is the co-closed solution of
/// `curl e = 2π ∑ q_k δ_k − flux`, which for an isolated radial vortex is
/// `(N − a)/r dθ`.
fn planar_seed<'p>(
    g: &Grid,
    degree: i64,
    zeros: &[[f64; 2]],
    charges: &[i64],
    eps: f64,
    profile_of: &(dyn Fn(i64) -> &'p RadialProfile + Sync),
) -> (Vec<Complex64>, Vec<f64>) {
    let n = g.num_sites();
    let twist = BundleTwist::planar(2, degree);
    let rule = TwistRule::new(g, &twist);
    let disp = |x: &[f64; 3], z: &[f64; 2]| -> (f64, f64) {
        (g.min_image(x[0] - z[0], 0), g.min_image(x[1] - z[1], 1))
    };
    let centre = |s: usize| {
        let mut x = g.position(s);
        x[0] += 0.5 * g.spacing(0);
        x[1] += 0.5 * g.spacing(1);
        x
    };

    let area = g.spacing(0) * g.spacing(1);
    let mut flux: Vec<f64> = par::map(n, |s| {
        let x = centre(s);
        let mut v = 0.0;
        for k in 0..zeros.len() {
            let (dx, dy) = disp(&x, &zeros[k]);
            let f = profile_of(charges[k]).eval((dx * dx + dy * dy).sqrt() / eps).0;
            v += charges[k].signum() as f64 * (1.0 - f * f) / (2.0 * eps * eps) * area;
        }
        v
    });
    let deficit = (2.0 * PI * degree as f64 - par::sum(n, |s| flux[s])) / n as f64;
    flux.iter_mut().for_each(|v| *v += deficit);

    // a charge q winds once around each of the |q| plaquettes nearest its zero
    let mut winding = vec![0.0; n];
    for (z, &q) in zeros.iter().zip(charges) {
        let mut order: Vec<usize> = (0..n).collect();
        let dist: Vec<f64> = par::map(n, |s| g.distance(&centre(s), z));
        order.sort_by(|&s, &t| dist[s].total_cmp(&dist[t]).then(s.cmp(&t)));
        for &s in order.iter().take(q.unsigned_abs() as usize) {
            winding[s] += 2.0 * PI * q.signum() as f64;
        }
    }

    let shifted: Vec<f64> = (0..n).map(|s| flux[s] - rule.plaquette_shift(0, 1, &g.coords(s))).collect();
    let mut b = links_with_curl(g, &shifted);
    let source: Vec<f64> = (0..n).map(|s| winding[s] - flux[s]).collect();
    let e = links_with_curl(g, &source);

    let link_phase: Vec<f64> = (0..2 * n).map(|l| rule.link_phase(l / n, &g.coords(l % n))).collect();
    let gamma = |b: &[f64], l: usize| b[l] + link_phase[l] + e[l];

    // harmonic constants so that every cycle holonomy lies in 2πℤ
    for j in 0..2 {
        let mut hol = 0.0;
        let mut s = 0;
        for _ in 0..g.size(j) {
            hol += gamma(&b, j * n + s);
            s = g.forward(s, j);
        }
        let c = -wrap(hol) / g.size(j) as f64;
        for v in &mut b[j * n..(j + 1) * n] {
            *v += c;
        }
    }

    // integrate the phase along a spanning tree: axis 0 at x_1 = 0, then axis 1
    let mut chi = vec![0.0; n];
    let mut s = 0;
    for _ in 1..g.size(0) {
        let t = g.forward(s, 0);
        chi[t] = chi[s] + gamma(&b, s);
        s = t;
    }
    for i0 in 0..g.size(0) {
        let mut s = g.index([i0, 0, 0]);
        for _ in 1..g.size(1) {
            let t = g.forward(s, 1);
            chi[t] = chi[s] + gamma(&b, n + s);
            s = t;
        }
    }

    let u = par::map(n, |s| {
        let x = g.position(s);
        let mut m = 1.0;
        for k in 0..zeros.len() {
            let (dx, dy) = disp(&x, &zeros[k]);
            m *= profile_of(charges[k]).eval((dx * dx + dy * dy).sqrt() / eps).0;
        }
        Complex64::from_polar(m, chi[s])
    });
    let a = par::map(2 * n, |l| b[l] / g.spacing(l / n));
    (u, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banded_solver_matches_dense() {
        // 6x6 pentadiagonal system with a zero leading pivot
        let n = 6;
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if (i as i64 - j as i64).abs() <= 2 {
                    dense[i][j] = ((i * 7 + j * 3) % 5) as f64 - 1.5;
                }
            }
        }
        dense[0][0] = 0.0;
        let mut band = Banded::new(n, 2, 2);
        for i in 0..n {
            for j in 0..n {
                if (i as i64 - j as i64).abs() <= 2 {
                    band.set(i, j, dense[i][j]);
                }
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let mut b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i][j] * x_true[j]).sum()).collect();
        band.solve(&mut b).unwrap();
        for (x, y) in b.iter().zip(&x_true) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn profile_boundary_values() {
        let p = solve_bps(1, 20.0, 2000).unwrap();
        assert_eq!(p.f[0], 0.0);
        assert_eq!(p.a[0], 0.0);
        assert!(*p.f.last().unwrap() >= 1.0 - 1e-6);
        assert!(*p.a.last().unwrap() >= 1.0 - 1e-6);
        let (rf, ra) = p.residuals();
        assert!(rf <= 1e-8 && ra <= 1e-8, "{rf} {ra}");
        // in the far field the midpoint value r·ḡ exceeds 1 by O(h²/r²),
        // so a may dip at that level
        for w in p.f.windows(2).chain(p.a.windows(2)) {
            assert!(w[1] >= w[0] - 1e-8, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(solve_bps(0, 20.0, 2000).is_err());
        assert!(solve_bps(1, 10.0, 2000).is_err());
        assert!(solve_bps(1, 20.0, 100).is_err());
    }

    #[test]
    fn interpolation_hits_nodes() {
        let p = solve_bps(2, 20.0, 2001).unwrap();
        let (f, a) = p.eval(p.r[137]);
        assert!((f - p.f[137]).abs() < 1e-14 && (a - p.a[137]).abs() < 1e-14);
        assert_eq!(p.eval(1e3), (1.0, 2.0));
    }

    #[test]
    fn seed_validation() {
        let g = Grid::uniform(2, 64, 1.0).unwrap();
        let t = BundleTwist::planar(2, 1);
        assert!(matches!(
            seed_from_profile(&g, &t, &[[0.5, 0.5]], &[2], 0.1),
            Err(Error::DegreeMismatch { .. })
        ));
        assert!(matches!(
            seed_from_profile(&g, &t, &[[0.5, 0.5]], &[1], 0.05),
            Err(Error::UnderResolved { .. })
        ));
        let t0 = BundleTwist::planar(2, 0);
        assert!(seed_from_profile(&g, &t0, &[[0.5, 0.5], [0.6, 0.5]], &[1, -1], 0.1).is_err());
    }
}
