//! Periodic grids, twisted line bundles and lattice fields.
//!
//! Conventions used throughout the crate:
//!
//! * Sites are stored row-major (last axis fastest) and indices wrap modulo
//!   the per-axis size.
//! * The covariant derivative is `∇ = d − iA`. The link field `a_j(x)` lives on
//!   the link `x → x + e_j` and the transport bringing `u(x + e_j)` back to `x`
//!   is `T_j(x) = exp(−i (h_j a_j(x) + φ_j(x)))`, where `φ_j` is the twist phase
//!   (zero away from the seam).
//! * Gauge transformations act as `u ↦ e^{iθ} u`, `a_j ↦ a_j + (θ(x+e_j) − θ(x))/h_j`.
//! * A degree `d_{jk}` bundle is realized by one seam per coordinate plane: the
//!   links in direction `k` leaving the last slice `x_k = N_k − 1` carry the
//!   phase `2π d_{jk} x_j / L_j`, and every plaquette of that slice carries the
//!   real flux shift `2π d_{jk} / N_j`. Total fluxes are then exactly `2π d_{jk}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par;

pub const MIN_SITES_PER_AXIS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    sizes: [usize; 3],
    lengths: [f64; 3],
    spacings: [f64; 3],
    strides: [usize; 3],
}

impl Grid {
    pub fn new(sizes: &[usize], lengths: &[f64]) -> Result<Self> {
        let dim = sizes.len();
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if lengths.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} sizes but {} lengths",
                dim,
                lengths.len()
            )));
        }
        let mut s = [1usize; 3];
        let mut l = [1.0f64; 3];
        let mut h = [1.0f64; 3];
        for j in 0..dim {
            if sizes[j] < MIN_SITES_PER_AXIS {
                return Err(Error::InvalidGrid(format!(
                    "axis {j} has {} sites, need at least {MIN_SITES_PER_AXIS}",
                    sizes[j]
                )));
            }
            if !(lengths[j].is_finite() && lengths[j] > 0.0) {
                return Err(Error::InvalidGrid(format!("axis {j} length {} is not positive", lengths[j])));
            }
            s[j] = sizes[j];
            l[j] = lengths[j];
            h[j] = lengths[j] / sizes[j] as f64;
        }
        let strides = [s[1] * s[2], s[2], 1];
        Ok(Self { dim, sizes: s, lengths: l, spacings: h, strides })
    }

    /// Square (or cubic) grid with `n` sites and period `length` on every axis.
    pub fn uniform(dim: usize, n: usize, length: f64) -> Result<Self> {
        Self::new(&vec![n; dim], &vec![length; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes[..self.dim]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings[..self.dim]
    }

    pub fn size(&self, j: usize) -> usize {
        self.sizes[j]
    }

    pub fn length(&self, j: usize) -> f64 {
        self.lengths[j]
    }

    pub fn spacing(&self, j: usize) -> f64 {
        self.spacings[j]
    }

    pub fn num_sites(&self) -> usize {
        self.sizes[0] * self.sizes[1] * self.sizes[2]
    }

    pub fn num_links(&self) -> usize {
        self.dim * self.num_sites()
    }

    /// Midpoint-rule cell volume `∏ h_j`.
    pub fn cell_volume(&self) -> f64 {
        self.spacings[..self.dim].iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths[..self.dim].iter().product()
    }

    /// Spacing that has to resolve a codimension-two core: the larger of the
    /// two finest spacings (both spacings in dimension two).
    pub fn transverse_spacing(&self) -> f64 {
        let mut h: Vec<f64> = self.spacings().to_vec();
        h.sort_by(f64::total_cmp);
        h[1]
    }

    /// `true` when `epsilon >= 4 h` for the transverse spacing.
    pub fn resolves(&self, epsilon: f64) -> bool {
        self.transverse_spacing() <= epsilon / 4.0 * (1.0 + 1e-12)
    }

    pub fn coords(&self, s: usize) -> [usize; 3] {
        [
            s / self.strides[0],
            (s / self.strides[1]) % self.sizes[1],
            s % self.sizes[2],
        ]
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] * self.strides[0] + c[1] * self.strides[1] + c[2]
    }

    /// Site index of `s + e_j`.
    #[inline]
    pub fn forward(&self, s: usize, j: usize) -> usize {
        let c = (s / self.strides[j]) % self.sizes[j];
        if c + 1 == self.sizes[j] {
            s - c * self.strides[j]
        } else {
            s + self.strides[j]
        }
    }

    /// Site index of `s − e_j`.
    #[inline]
    pub fn backward(&self, s: usize, j: usize) -> usize {
        let c = (s / self.strides[j]) % self.sizes[j];
        if c == 0 {
            s + (self.sizes[j] - 1) * self.strides[j]
        } else {
            s - self.strides[j]
        }
    }

    /// Site index displaced by a (possibly negative) number of sites per axis.
    pub fn offset(&self, s: usize, shift: &[i64]) -> usize {
        let mut c = self.coords(s);
        for j in 0..self.dim {
            let n = self.sizes[j] as i64;
            c[j] = (c[j] as i64 + shift[j]).rem_euclid(n) as usize;
        }
        self.index(c)
    }

    pub fn position(&self, s: usize) -> [f64; 3] {
        let c = self.coords(s);
        let mut x = [0.0; 3];
        for j in 0..self.dim {
            x[j] = c[j] as f64 * self.spacings[j];
        }
        x
    }

    /// Minimum-image representative of a displacement along axis `j`.
    pub fn min_image(&self, dx: f64, j: usize) -> f64 {
        let l = self.lengths[j];
        dx - l * (dx / l).round()
    }

    /// Periodic Euclidean distance between two points.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.dim)
            .map(|j| self.min_image(x[j] - y[j], j).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Coordinate planes `(j, k)` with `j < k`, in storage order.
    pub fn planes(&self) -> Vec<(usize, usize)> {
        match self.dim {
            2 => vec![(0, 1)],
            _ => vec![(0, 1), (0, 2), (1, 2)],
        }
    }

    pub fn num_planes(&self) -> usize {
        self.dim * (self.dim - 1) / 2
    }

    pub fn plane_index(&self, j: usize, k: usize) -> usize {
        assert!(j < k && k < self.dim, "plane ({j},{k}) invalid in dim {}", self.dim);
        j + k - 1
    }
}

/// Degrees `d_{jk}` of the line bundle, one per coordinate plane in
/// [`Grid::planes`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleTwist {
    degrees: Vec<i64>,
}

impl BundleTwist {
    pub fn new(degrees: Vec<i64>) -> Self {
        Self { degrees }
    }

    pub fn trivial(dim: usize) -> Self {
        Self { degrees: vec![0; dim * (dim - 1) / 2] }
    }

    /// Planar bundle of degree `d` (dimension two), or degree `d` in the
    /// `(0,1)` plane only (dimension three).
    pub fn planar(dim: usize, d: i64) -> Self {
        let mut t = Self::trivial(dim);
        t.degrees[0] = d;
        t
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn degree(&self, plane: usize) -> i64 {
        self.degrees[plane]
    }

    pub fn is_trivial(&self) -> bool {
        self.degrees.iter().all(|&d| d == 0)
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if self.degrees.len() != grid.num_planes() {
            return Err(Error::Shape(format!(
                "{} degrees given for a {}-dimensional grid (need {})",
                self.degrees.len(),
                grid.dim(),
                grid.num_planes()
            )));
        }
        Ok(())
    }
}

/// Seam phases and plaquette flux shifts realizing a [`BundleTwist`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct TwistRule<'a> {
    grid: &'a Grid,
    twist: &'a BundleTwist,
}

impl<'a> TwistRule<'a> {
    pub(crate) fn new(grid: &'a Grid, twist: &'a BundleTwist) -> Self {
        Self { grid, twist }
    }

    /// Additive transport phase on link `(s, k)`.
    #[inline]
    pub(crate) fn link_phase(&self, k: usize, c: &[usize; 3]) -> f64 {
        let g = self.grid;
        if c[k] + 1 != g.sizes[k] {
            return 0.0;
        }
        let mut phi = 0.0;
        for j in 0..k {
            let d = self.twist.degrees[g.plane_index(j, k)];
            if d != 0 {
                phi += 2.0 * PI * d as f64 * c[j] as f64 / g.sizes[j] as f64;
            }
        }
        phi
    }

    /// Flux shift (angle units, i.e. already multiplied by `h_j h_k`) on the
    /// plaquette of plane `(j, k)` with lower corner at `c`.
    #[inline]
    pub(crate) fn plaquette_shift(&self, j: usize, k: usize, c: &[usize; 3]) -> f64 {
        let g = self.grid;
        let d = self.twist.degrees[g.plane_index(j, k)];
        if d == 0 || c[k] + 1 != g.sizes[k] {
            0.0
        } else {
            2.0 * PI * d as f64 / g.sizes[j] as f64
        }
    }
}

/// Initial data for [`build_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Constant(Complex64),
    Random { seed: u64, amplitude: f64 },
    Zero,
}

/// A discrete couple `(u, a)` on a twisted periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    grid: Grid,
    twist: BundleTwist,
    u: Vec<Complex64>,
    a: Vec<f64>,
}

impl FieldState {
    pub fn from_parts(grid: Grid, twist: BundleTwist, u: Vec<Complex64>, a: Vec<f64>) -> Result<Self> {
        twist.check(&grid)?;
        if u.len() != grid.num_sites() || a.len() != grid.num_links() {
            return Err(Error::Shape(format!(
                "expected {} sites and {} links, got {} and {}",
                grid.num_sites(),
                grid.num_links(),
                u.len(),
                a.len()
            )));
        }
        if !u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || !a.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("field values must be finite".into()));
        }
        Ok(Self { grid, twist, u, a })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn twist(&self) -> &BundleTwist {
        &self.twist
    }

    pub fn u(&self) -> &[Complex64] {
        &self.u
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn u_mut(&mut self) -> &mut [Complex64] {
        &mut self.u
    }

    pub fn a_mut(&mut self) -> &mut [f64] {
        &mut self.a
    }

    /// Connection values in direction `j`, one per site.
    pub fn a_dir(&self, j: usize) -> &[f64] {
        let n = self.grid.num_sites();
        &self.a[j * n..(j + 1) * n]
    }

    pub(crate) fn twist_rule(&self) -> TwistRule<'_> {
        TwistRule::new(&self.grid, &self.twist)
    }

    /// Transport `T_j(s)` along every link, direction-major.
    pub fn transports(&self) -> Vec<Complex64> {
        let g = &self.grid;
        let n = g.num_sites();
        let rule = self.twist_rule();
        par::map(g.num_links(), |l| {
            let (j, s) = (l / n, l % n);
            let c = g.coords(s);
            let phase = g.spacings[j] * self.a[l] + rule.link_phase(j, &c);
            Complex64::from_polar(1.0, -phase)
        })
    }

    pub fn max_abs_u(&self) -> f64 {
        par::max(self.u.len(), |s| self.u[s].norm())
    }

    /// Flat real vector `[Re u, Im u]` per site followed by the link field.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.u.len() + self.a.len());
        for z in &self.u {
            v.push(z.re);
            v.push(z.im);
        }
        v.extend_from_slice(&self.a);
        v
    }

    pub fn set_from_slice(&mut self, v: &[f64]) {
        let n = self.u.len();
        assert_eq!(v.len(), 2 * n + self.a.len());
        for (s, z) in self.u.iter_mut().enumerate() {
            *z = Complex64::new(v[2 * s], v[2 * s + 1]);
        }
        self.a.copy_from_slice(&v[2 * n..]);
    }

    pub fn with_vec(&self, v: &[f64]) -> Self {
        let mut out = self.clone();
        out.set_from_slice(v);
        out
    }

    pub fn vec_len(&self) -> usize {
        2 * self.u.len() + self.a.len()
    }
}

/// A variation `(du, da)` with the shape of a [`FieldState`].
#[derive(Debug, Clone, PartialEq)]
pub struct TangentState {
    pub du: Vec<Complex64>,
    pub da: Vec<f64>,
}

impl TangentState {
    pub fn zeros_like(state: &FieldState) -> Self {
        Self {
            du: vec![Complex64::new(0.0, 0.0); state.u.len()],
            da: vec![0.0; state.a.len()],
        }
    }

    pub fn random(state: &FieldState, seed: u64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let du = (0..state.u.len())
            .map(|_| {
                Complex64::new(
                    amplitude * rng.gen_range(-1.0..1.0),
                    amplitude * rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let da = (0..state.a.len()).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect();
        Self { du, da }
    }

    pub fn from_slice(v: &[f64], sites: usize) -> Self {
        let du = (0..sites).map(|s| Complex64::new(v[2 * s], v[2 * s + 1])).collect();
        Self { du, da: v[2 * sites..].to_vec() }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.du.len() + self.da.len());
        for z in &self.du {
            v.push(z.re);
            v.push(z.im);
        }
        v.extend_from_slice(&self.da);
        v
    }

    /// Euclidean pairing of the real components (no volume factor).
    pub fn dot(&self, other: &TangentState) -> f64 {
        let du = par::sum(self.du.len(), |s| {
            self.du[s].re * other.du[s].re + self.du[s].im * other.du[s].im
        });
        du + par::sum(self.da.len(), |l| self.da[l] * other.da[l])
    }

    /// Largest absolute real component.
    pub fn sup_norm(&self) -> f64 {
        let a = par::max(self.du.len(), |s| self.du[s].re.abs().max(self.du[s].im.abs()));
        let b = par::max(self.da.len(), |l| self.da[l].abs());
        a.max(b).max(0.0)
    }

    pub fn is_compatible(&self, state: &FieldState) -> bool {
        self.du.len() == state.u.len() && self.da.len() == state.a.len()
    }
}

pub fn build_state(grid: &Grid, twist: &BundleTwist, init: InitSpec) -> Result<FieldState> {
    twist.check(grid)?;
    let n = grid.num_sites();
    let nl = grid.num_links();
    let (u, a) = match init {
        InitSpec::Zero => (vec![Complex64::new(0.0, 0.0); n], vec![0.0; nl]),
        InitSpec::Constant(c) => {
            if c.norm() > 0.0 && !twist.is_trivial() {
                return Err(Error::NontrivialBundle(twist.degrees.clone()));
            }
            (vec![c; n], vec![0.0; nl])
        }
        InitSpec::Random { seed, amplitude } => {
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                return Err(Error::InvalidArgument(format!("noise amplitude {amplitude} invalid")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = (0..n)
                .map(|_| {
                    Complex64::new(
                        1.0 + amplitude * rng.gen_range(-1.0..1.0),
                        amplitude * rng.gen_range(-1.0..1.0),
                    )
                })
                .collect();
            let a = (0..nl).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect();
            (u, a)
        }
    };
    FieldState::from_parts(grid.clone(), twist.clone(), u, a)
}

/// `D_j u` on every link in direction `j`: `(T_j(x) u(x+e_j) − u(x)) / h_j`.
pub fn covariant_difference(state: &FieldState, j: usize) -> Vec<Complex64> {
    let g = &state.grid;
    assert!(j < g.dim, "direction {j} out of range");
    let n = g.num_sites();
    let h = g.spacings[j];
    let rule = state.twist_rule();
    par::map(n, |s| {
        let c = g.coords(s);
        let phase = h * state.a[j * n + s] + rule.link_phase(j, &c);
        let t = Complex64::from_polar(1.0, -phase);
        (t * state.u[g.forward(s, j)] - state.u[s]) / h
    })
}

/// Curvature `F_{jk}` on every plaquette of plane `(j, k)` (indexed by its
/// lower corner), including the seam shift.
pub fn plaquette_curvature(state: &FieldState, plane: (usize, usize)) -> Vec<f64> {
    let (j, k) = plane;
    let g = &state.grid;
    assert!(j < k && k < g.dim, "plane ({j},{k}) invalid");
    curvature_plane(g, &state.twist, &state.a, j, k)
}

pub(crate) fn curvature_plane(g: &Grid, twist: &BundleTwist, a: &[f64], j: usize, k: usize) -> Vec<f64> {
    let n = g.num_sites();
    let (hj, hk) = (g.spacings[j], g.spacings[k]);
    let rule = TwistRule::new(g, twist);
    let aj = &a[j * n..(j + 1) * n];
    let ak = &a[k * n..(k + 1) * n];
    par::map(n, |s| {
        let c = g.coords(s);
        let sj = g.forward(s, j);
        let sk = g.forward(s, k);
        (ak[sj] - ak[s]) / hj - (aj[sk] - aj[s]) / hk + rule.plaquette_shift(j, k, &c) / (hj * hk)
    })
}

/// `∑ F_{jk} h_j h_k` over one coordinate 2-torus. In dimension three the
/// slice is the one through the origin of the remaining axis; see
/// [`total_flux_slices`] for all of them.
pub fn total_flux(state: &FieldState, plane: (usize, usize)) -> f64 {
    total_flux_slices(state, plane)[0]
}

/// Total flux through every transverse slice of plane `(j, k)`.
pub fn total_flux_slices(state: &FieldState, plane: (usize, usize)) -> Vec<f64> {
    let g = &state.grid;
    let (j, k) = plane;
    let f = plaquette_curvature(state, plane);
    let area = g.spacings[j] * g.spacings[k];
    if g.dim == 2 {
        return vec![par::sum(f.len(), |s| f[s]) * area];
    }
    let t = 3 - j - k;
    let mut out = vec![0.0; g.sizes[t]];
    for (s, v) in f.iter().enumerate() {
        out[g.coords(s)[t]] += v * area;
    }
    out
}

/// Gauge transform `(e^{iθ} u, a + dθ)` with periodic differences of `θ`.
pub fn apply_gauge(state: &FieldState, theta: &[f64]) -> FieldState {
    let g = &state.grid;
    let n = g.num_sites();
    assert_eq!(theta.len(), n, "theta must have one value per site");
    let u = par::map(n, |s| state.u[s] * Complex64::from_polar(1.0, theta[s]));
    let a = par::map(g.num_links(), |l| {
        let (j, s) = (l / n, l % n);
        state.a[l] + (theta[g.forward(s, j)] - theta[s]) / g.spacings[j]
    });
    FieldState { grid: g.clone(), twist: state.twist.clone(), u, a }
}

/// Oriented sum of `F h h` over the six faces of every elementary cube
/// (dimension three). Vanishes identically for a closed discrete 2-form.
pub fn cube_divergence(state: &FieldState) -> Vec<f64> {
    let g = &state.grid;
    assert_eq!(g.dim, 3, "cube divergence needs dimension three");
    let f01 = plaquette_curvature(state, (0, 1));
    let f02 = plaquette_curvature(state, (0, 2));
    let f12 = plaquette_curvature(state, (1, 2));
    let (h0, h1, h2) = (g.spacings[0], g.spacings[1], g.spacings[2]);
    par::map(g.num_sites(), |s| {
        let (s0, s1, s2) = (g.forward(s, 0), g.forward(s, 1), g.forward(s, 2));
        (f12[s0] - f12[s]) * h1 * h2 - (f02[s1] - f02[s]) * h0 * h2 + (f01[s2] - f01[s]) * h0 * h1
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize) -> Grid {
        Grid::uniform(2, n, 1.0).unwrap()
    }

    #[test]
    fn grid_rejects_small_axes() {
        assert!(Grid::new(&[4, 16], &[1.0, 1.0]).is_err());
        assert!(Grid::new(&[16], &[1.0]).is_err());
        assert!(Grid::new(&[16, 16], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn neighbours_wrap() {
        let g = Grid::new(&[8, 10, 12], &[1.0, 2.0, 3.0]).unwrap();
        for s in [0, 7, 95, g.num_sites() - 1] {
            for j in 0..3 {
                assert_eq!(g.backward(g.forward(s, j), j), s);
            }
        }
        let last = g.index([7, 9, 11]);
        assert_eq!(g.forward(last, 0), g.index([0, 9, 11]));
        assert_eq!(g.forward(last, 2), g.index([7, 9, 0]));
        assert!((g.spacing(1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn constant_state_on_trivial_bundle() {
        let g = grid2(16);
        let st = build_state(&g, &BundleTwist::trivial(2), InitSpec::Constant(Complex64::new(1.0, 0.0))).unwrap();
        assert!(st.u().iter().all(|&z| z == Complex64::new(1.0, 0.0)));
        assert!(st.a().iter().all(|&v| v == 0.0));
        for d in covariant_difference(&st, 0).iter().chain(covariant_difference(&st, 1).iter()) {
            assert_eq!(d.norm(), 0.0);
        }
    }

    #[test]
    fn constant_state_rejected_on_nontrivial_bundle() {
        let g = grid2(16);
        let err = build_state(&g, &BundleTwist::planar(2, 1), InitSpec::Constant(Complex64::new(1.0, 0.0)));
        assert!(matches!(err, Err(Error::NontrivialBundle(_))));
        assert!(err.unwrap_err().to_string().contains("nontrivial bundle"));
        // the zero section is fine
        assert!(build_state(&g, &BundleTwist::planar(2, 1), InitSpec::Zero).is_ok());
    }

    #[test]
    fn random_init_is_deterministic() {
        let g = grid2(16);
        let t = BundleTwist::trivial(2);
        let a = build_state(&g, &t, InitSpec::Random { seed: 7, amplitude: 0.1 }).unwrap();
        let b = build_state(&g, &t, InitSpec::Random { seed: 7, amplitude: 0.1 }).unwrap();
        let c = build_state(&g, &t, InitSpec::Random { seed: 8, amplitude: 0.1 }).unwrap();
        assert_eq!(a.to_vec().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   b.to_vec().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_ne!(a, c);
        assert!(a.u().iter().all(|z| (z.re - 1.0).abs() <= 0.1 && z.im.abs() <= 0.1));
    }

    #[test]
    fn uniform_connection_closed_form() {
        let g = grid2(16);
        let mut st = build_state(&g, &BundleTwist::trivial(2), InitSpec::Constant(Complex64::new(1.0, 0.0))).unwrap();
        let kappa = 3.0;
        let n = g.num_sites();
        st.a_mut()[..n].iter_mut().for_each(|v| *v = kappa);
        let h = g.spacing(0);
        let expect = (Complex64::from_polar(1.0, -kappa * h) - 1.0).norm() / h;
        for d in covariant_difference(&st, 0) {
            assert!((d.norm() - expect).abs() < 1e-12);
        }
        assert!((expect - kappa).abs() < kappa.powi(3) * h * h);
    }

    #[test]
    fn plane_wave_is_covariantly_constant_to_second_order() {
        // u = e^{iκx}, a_1 = κ: the link transport cancels the phase exactly up
        // to the midpoint error of the constant field, so |D u| = 0 here.
        let g = grid2(32);
        let kappa = 2.0 * PI;
        let mut st = build_state(&g, &BundleTwist::trivial(2), InitSpec::Zero).unwrap();
        let n = g.num_sites();
        for s in 0..n {
            let x = g.position(s)[0];
            st.u_mut()[s] = Complex64::from_polar(1.0, kappa * x);
        }
        st.a_mut()[..n].iter_mut().for_each(|v| *v = kappa);
        let h = g.spacing(0);
        let worst = covariant_difference(&st, 0).iter().map(|d| d.norm()).fold(0.0, f64::max);
        assert!(worst <= h * h, "worst {worst}");
    }

    #[test]
    fn twist_gives_quantized_flux() {
        for d in [-2i64, 1, 2, 3] {
            let g = grid2(16);
            let st = build_state(&g, &BundleTwist::planar(2, d), InitSpec::Zero).unwrap();
            let flux = total_flux(&st, (0, 1));
            assert!((flux - 2.0 * PI * d as f64).abs() < 1e-12, "d={d}: {flux}");
        }
    }

    #[test]
    fn pure_gauge_has_no_curvature() {
        let g = Grid::new(&[12, 10, 8], &[1.0, 1.3, 0.7]).unwrap();
        let st = build_state(&g, &BundleTwist::trivial(3), InitSpec::Zero).unwrap();
        let theta: Vec<f64> = (0..g.num_sites()).map(|s| ((s * 7919) % 101) as f64 * 0.37).collect();
        let st2 = apply_gauge(&st, &theta);
        for (j, k) in g.planes() {
            let f = plaquette_curvature(&st2, (j, k));
            assert!(f.iter().all(|v| v.abs() < 1e-10), "plane ({j},{k})");
        }
    }

    #[test]
    fn three_torus_flux_slices_and_closedness() {
        let g = Grid::new(&[8, 10, 12], &[1.0, 1.5, 2.0]).unwrap();
        let tw = BundleTwist::new(vec![1, -2, 3]);
        let st = build_state(&g, &tw, InitSpec::Random { seed: 3, amplitude: 0.5 }).unwrap();
        for (p, (j, k)) in g.planes().into_iter().enumerate() {
            for flux in total_flux_slices(&st, (j, k)) {
                assert!((flux - 2.0 * PI * tw.degree(p) as f64).abs() < 1e-10);
            }
        }
        let div = cube_divergence(&st);
        assert!(div.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn gauge_inverse_and_constant_phase() {
        let g = grid2(16);
        let st = build_state(&g, &BundleTwist::planar(2, 1), InitSpec::Random { seed: 1, amplitude: 0.3 }).unwrap();
        let c = vec![0.7; g.num_sites()];
        let st_c = apply_gauge(&st, &c);
        for s in 0..g.num_sites() {
            assert!((st_c.u()[s] - st.u()[s] * Complex64::from_polar(1.0, 0.7)).norm() < 1e-15);
        }
        assert_eq!(st_c.a(), st.a());
        let theta: Vec<f64> = (0..g.num_sites()).map(|s| (s as f64 * 0.311).sin() * 4.0).collect();
        let minus: Vec<f64> = theta.iter().map(|t| -t).collect();
        let back = apply_gauge(&apply_gauge(&st, &theta), &minus);
        for (x, y) in back.to_vec().iter().zip(st.to_vec()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn transverse_spacing_picks_second_finest() {
        let g = Grid::new(&[128, 128, 32], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(g.transverse_spacing(), 1.0 / 128.0);
        assert!(g.resolves(0.06));
        assert!(!Grid::uniform(2, 16, 1.0).unwrap().resolves(0.1));
    }
}
