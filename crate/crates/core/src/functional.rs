//! The rescaled self-dual energy, its analytic gradient and the pointwise
//! quantities built from it.
//!
//! The discrete energy is
//!
//! ```text
//! E = vol ∑_links |D_j u|² + ε² vol ∑_plaquettes F_jk² + ε⁻² vol ∑_sites W(u),
//! W(u) = (1 − |u|²)² / 4,
//! ```
//!
//! with `vol = ∏ h_j`. Pointwise fields (energy density, discrepancy, stress
//! tensor) average link and plaquette quantities to sites: a site sees the two
//! links of each direction and the four plaquettes of each plane that touch it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{curvature_plane, FieldState, Grid, TangentState};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub maxwell: f64,
    pub potential: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub const CSV_HEADER: &'static str = "epsilon,dirichlet,maxwell,potential,total";

    pub fn csv_row(&self, epsilon: f64) -> String {
        format!("{epsilon},{},{},{},{}", self.dirichlet, self.maxwell, self.potential, self.total)
    }
}

#[inline]
pub fn potential_w(u: Complex64) -> f64 {
    let m = 1.0 - u.norm_sqr();
    0.25 * m * m
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

/// Link and plaquette data shared by every functional evaluation.
pub(crate) struct LinkData<'a> {
    pub state: &'a FieldState,
    pub transport: Vec<Complex64>,
    pub diff: Vec<Complex64>,
    /// Curvature per plane (storage order of `Grid::planes`), per plaquette corner.
    pub curv: Vec<Vec<f64>>,
}

impl<'a> LinkData<'a> {
    pub fn new(state: &'a FieldState) -> Self {
        let g = state.grid();
        let n = g.num_sites();
        let transport = state.transports();
        let u = state.u();
        let diff = par::map(g.num_links(), |l| {
            let (j, s) = (l / n, l % n);
            (transport[l] * u[g.forward(s, j)] - u[s]) / g.spacing(j)
        });
        let curv = g
            .planes()
            .into_iter()
            .map(|(j, k)| curvature_plane(g, state.twist(), state.a(), j, k))
            .collect();
        Self { state, transport, diff, curv }
    }

    fn grid(&self) -> &Grid {
        self.state.grid()
    }

    /// Oriented curvature `F_jk` for any ordered pair `j != k`.
    #[inline]
    fn f(&self, j: usize, k: usize, s: usize) -> f64 {
        let g = self.grid();
        if j < k {
            self.curv[g.plane_index(j, k)][s]
        } else {
            -self.curv[g.plane_index(k, j)][s]
        }
    }

    /// Site average of `|D_j u|²` over the two adjacent links.
    #[inline]
    fn dsq_site(&self, j: usize, s: usize) -> f64 {
        let g = self.grid();
        let n = g.num_sites();
        0.5 * (self.diff[j * n + s].norm_sqr() + self.diff[j * n + g.backward(s, j)].norm_sqr())
    }

    /// Site average of `D_j u`, with the backward link transported to `s`.
    #[inline]
    fn d_site(&self, j: usize, s: usize) -> Complex64 {
        let g = self.grid();
        let n = g.num_sites();
        let b = j * n + g.backward(s, j);
        0.5 * (self.diff[j * n + s] + self.transport[b].conj() * self.diff[b])
    }

    /// The four corners of the plaquettes of plane `(j, k)` that touch `s`.
    #[inline]
    fn plaquettes_at(&self, j: usize, k: usize, s: usize) -> [usize; 4] {
        let g = self.grid();
        let sj = g.backward(s, j);
        [s, sj, g.backward(s, k), g.backward(sj, k)]
    }

    /// Site average of `F_jk` and of `F_jk²` for plane index `p`.
    #[inline]
    fn f_site(&self, p: usize, j: usize, k: usize, s: usize) -> (f64, f64) {
        let f = &self.curv[p];
        let mut m = 0.0;
        let mut sq = 0.0;
        for c in self.plaquettes_at(j, k, s) {
            m += f[c];
            sq += f[c] * f[c];
        }
        (0.25 * m, 0.25 * sq)
    }

    fn breakdown(&self, eps: f64) -> EnergyBreakdown {
        let g = self.grid();
        let vol = g.cell_volume();
        let u = self.state.u();
        let dirichlet = vol * par::sum(self.diff.len(), |l| self.diff[l].norm_sqr());
        let mut fsq = 0.0;
        for f in &self.curv {
            fsq += par::sum(f.len(), |s| f[s] * f[s]);
        }
        let maxwell = eps * eps * vol * fsq;
        let potential = vol / (eps * eps) * par::sum(u.len(), |s| potential_w(u[s]));
        EnergyBreakdown { dirichlet, maxwell, potential, total: dirichlet + maxwell + potential }
    }

    fn gradient(&self, eps: f64) -> TangentState {
        let g = self.grid();
        let n = g.num_sites();
        let dim = g.dim();
        let u = self.state.u();
        let inv_eps2 = 1.0 / (eps * eps);
        let du = par::map(n, |s| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                let b = j * n + g.backward(s, j);
                acc += (self.transport[b].conj() * self.diff[b] - self.diff[j * n + s]) * (2.0 / g.spacing(j));
            }
            acc - u[s] * ((1.0 - u[s].norm_sqr()) * inv_eps2)
        });
        let two_eps2 = 2.0 * eps * eps;
        let da = par::map(g.num_links(), |l| {
            let (j, s) = (l / n, l % n);
            let mut acc = -2.0 * (u[s].conj() * self.diff[l]).im;
            for k in 0..dim {
                if k != j {
                    acc += two_eps2 * (self.f(j, k, s) - self.f(j, k, g.backward(s, k))) / g.spacing(k);
                }
            }
            acc
        });
        TangentState { du, da }
    }

    fn density(&self, eps: f64) -> Vec<f64> {
        let g = self.grid();
        let planes = g.planes();
        let u = self.state.u();
        let eps2 = eps * eps;
        par::map(g.num_sites(), |s| {
            let mut e = 0.0;
            for j in 0..g.dim() {
                e += self.dsq_site(j, s);
            }
            for (p, &(j, k)) in planes.iter().enumerate() {
                e += eps2 * self.f_site(p, j, k, s).1;
            }
            e + potential_w(u[s]) / eps2
        })
    }

    /// `|F|` at each site as the root of the site-averaged `∑_{j<k} F_jk²`.
    fn f_norm_site(&self, s: usize) -> f64 {
        let g = self.grid();
        let mut sq = 0.0;
        for (p, (j, k)) in g.planes().into_iter().enumerate() {
            sq += self.f_site(p, j, k, s).1;
        }
        sq.sqrt()
    }
}

pub fn energy(state: &FieldState, eps: f64) -> Result<EnergyBreakdown> {
    check_eps(eps)?;
    Ok(LinkData::new(state).breakdown(eps))
}

/// Exact derivative of the discrete energy, L²-paired with the cell volume:
/// `dE[δ] = vol · ⟨gradient, δ⟩` where the pairing sums the real components.
/// The `u` part is `2(∇*∇u − (1 − |u|²)u/(2ε²))` and the link part is
/// `2(ε² d*ω − ⟨∇u, iu⟩)` at the discrete level.
pub fn gradient(state: &FieldState, eps: f64) -> Result<TangentState> {
    check_eps(eps)?;
    Ok(LinkData::new(state).gradient(eps))
}

pub fn energy_and_gradient(state: &FieldState, eps: f64) -> Result<(EnergyBreakdown, TangentState)> {
    check_eps(eps)?;
    let ld = LinkData::new(state);
    Ok((ld.breakdown(eps), ld.gradient(eps)))
}

/// Pointwise energy integrand `e_ε` at sites; `∑ e_ε · vol` equals the total energy.
pub fn energy_density(state: &FieldState, eps: f64) -> Result<Vec<f64>> {
    check_eps(eps)?;
    Ok(LinkData::new(state).density(eps))
}

/// Signed discrepancy `ξ_ε = ε|F| − (1 − |u|²)/(2ε)` at sites.
pub fn discrepancy(state: &FieldState, eps: f64) -> Result<Vec<f64>> {
    check_eps(eps)?;
    let ld = LinkData::new(state);
    let u = state.u();
    Ok(par::map(u.len(), |s| eps * ld.f_norm_site(s) - (1.0 - u[s].norm_sqr()) / (2.0 * eps)))
}

/// Symmetric `dim × dim` matrix per site, stored as its upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    dim: usize,
    values: Vec<f64>,
}

impl TensorField {
    fn slot(dim: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // row-wise upper triangle
        i * dim - i * (i + 1) / 2 + j
    }

    fn width(dim: usize) -> usize {
        dim * (dim + 1) / 2
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_sites(&self) -> usize {
        self.values.len() / Self::width(self.dim)
    }

    pub fn get(&self, s: usize, i: usize, j: usize) -> f64 {
        self.values[s * Self::width(self.dim) + Self::slot(self.dim, i, j)]
    }

    pub fn trace(&self, s: usize) -> f64 {
        (0..self.dim).map(|i| self.get(s, i, i)).sum()
    }
}

/// Stress-energy tensor `T = e_ε g − 2∇u*∇u − 2ε² ω*ω` at sites (flat metric).
pub fn stress_energy(state: &FieldState, eps: f64) -> Result<TensorField> {
    check_eps(eps)?;
    let ld = LinkData::new(state);
    Ok(stress_from(&ld, eps))
}

fn stress_from(ld: &LinkData<'_>, eps: f64) -> TensorField {
    let g = ld.grid();
    let dim = g.dim();
    let planes = g.planes();
    let u = ld.state.u();
    let eps2 = eps * eps;
    let width = TensorField::width(dim);
    let rows: Vec<Vec<f64>> = par::map(g.num_sites(), |s| {
        let dsq: Vec<f64> = (0..dim).map(|j| ld.dsq_site(j, s)).collect();
        let dav: Vec<Complex64> = (0..dim).map(|j| ld.d_site(j, s)).collect();
        let fs: Vec<(f64, f64)> = planes.iter().enumerate().map(|(p, &(j, k))| ld.f_site(p, j, k, s)).collect();
        // oriented site-averaged F and F² for any ordered pair
        let fval = |i: usize, k: usize| -> f64 {
            if i < k {
                fs[g.plane_index(i, k)].0
            } else {
                -fs[g.plane_index(k, i)].0
            }
        };
        let fsq = |i: usize, k: usize| -> f64 {
            let (a, b) = if i < k { (i, k) } else { (k, i) };
            fs[g.plane_index(a, b)].1
        };
        let e = dsq.iter().sum::<f64>() + eps2 * fs.iter().map(|v| v.1).sum::<f64>() + potential_w(u[s]) / eps2;
        let mut row = vec![0.0; width];
        for i in 0..dim {
            for j in i..dim {
                let grad_part = if i == j { dsq[i] } else { (dav[i] * dav[j].conj()).re };
                let mut omega = 0.0;
                for k in 0..dim {
                    if k == i || k == j {
                        continue;
                    }
                    omega += if i == j { fsq(i, k) } else { fval(i, k) * fval(j, k) };
                }
                let delta = if i == j { e } else { 0.0 };
                row[TensorField::slot(dim, i, j)] = delta - 2.0 * grad_part - 2.0 * eps2 * omega;
            }
        }
        row
    });
    TensorField { dim, values: rows.into_iter().flatten().collect() }
}

/// One Fourier mode `amplitude · sin(2π ∑ m_j x_j / L_j + phase)` in
/// component `component` of a periodic vector field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub component: usize,
    pub wave: [i32; 3],
    pub amplitude: f64,
    pub phase: f64,
}

/// Smooth periodic vector field given as a sum of Fourier modes, with its
/// derivative evaluated analytically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub modes: Vec<FourierMode>,
}

impl VectorField {
    pub fn mode(component: usize, wave: [i32; 3], amplitude: f64, phase: f64) -> Self {
        Self { modes: vec![FourierMode { component, wave, amplitude, phase }] }
    }

    /// `X(x)` and `DX(x)[i][j] = ∂_j X_i`.
    pub fn eval(&self, grid: &Grid, x: &[f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
        let mut v = [0.0; 3];
        let mut dv = [[0.0; 3]; 3];
        for m in &self.modes {
            let mut arg = m.phase;
            let mut k = [0.0; 3];
            for j in 0..grid.dim() {
                k[j] = 2.0 * std::f64::consts::PI * m.wave[j] as f64 / grid.length(j);
                arg += k[j] * x[j];
            }
            v[m.component] += m.amplitude * arg.sin();
            for j in 0..grid.dim() {
                dv[m.component][j] += m.amplitude * arg.cos() * k[j];
            }
        }
        (v, dv)
    }

    /// Five fixed fields used to probe stationarity.
    pub fn standard_probes(dim: usize) -> Vec<VectorField> {
        let mut out = vec![
            VectorField::mode(0, [1, 0, 0], 1.0, 0.0),
            VectorField::mode(1, [0, 1, 0], 1.0, 0.3),
            VectorField::mode(0, [0, 1, 0], 1.0, 1.1),
            VectorField { modes: vec![
                FourierMode { component: 0, wave: [1, 1, 0], amplitude: 0.7, phase: 0.2 },
                FourierMode { component: 1, wave: [2, -1, 0], amplitude: 0.4, phase: 2.0 },
            ] },
        ];
        if dim == 3 {
            out.push(VectorField { modes: vec![
                FourierMode { component: 2, wave: [1, 0, 1], amplitude: 1.0, phase: 0.5 },
                FourierMode { component: 0, wave: [0, 1, 1], amplitude: 0.5, phase: 0.0 },
            ] });
        } else {
            out.push(VectorField::mode(1, [2, 1, 0], 0.8, 0.9));
        }
        out
    }
}

/// `|∑ ⟨T_ε, DX⟩ vol| / (‖DX‖_∞ E_ε)`; zero on exact stationary points.
/// `‖DX‖_∞` is the largest per-site Frobenius norm. Returns `0` when the
/// energy vanishes.
pub fn inner_variation_residual(state: &FieldState, eps: f64, field: &VectorField) -> Result<f64> {
    check_eps(eps)?;
    let ld = LinkData::new(state);
    let total = ld.breakdown(eps).total;
    let t = stress_from(&ld, eps);
    let g = state.grid();
    let dim = g.dim();
    let vol = g.cell_volume();
    let pairs: Vec<(f64, f64)> = par::map(g.num_sites(), |s| {
        let (_, dx) = field.eval(g, &g.position(s));
        let mut pair = 0.0;
        let mut fro = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                pair += t.get(s, i, j) * dx[i][j];
                fro += dx[i][j] * dx[i][j];
            }
        }
        (pair, fro.sqrt())
    });
    let integral = vol * par::sum(pairs.len(), |s| pairs[s].0);
    let dx_sup = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    if total <= 0.0 || dx_sup == 0.0 {
        return Ok(0.0);
    }
    Ok(integral.abs() / (dx_sup * total))
}

/// The two-form `J = ψ(u) + (1 − |u|²) ω` with `ψ_jk = 2⟨i∇_j u, ∇_k u⟩`.
///
/// Stored in the form `J = ω + dλ`, `λ = ⟨iu, ∇u⟩`, with λ on links and the
/// lattice curl on plaquettes, so that `∑ J` equals the flux.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentJ {
    /// Per plane (storage order of `Grid::planes`), per plaquette corner.
    pub planes: Vec<Vec<f64>>,
    /// Site values `|J|` (root of site-averaged `∑_{j<k} J_jk²`).
    pub norm: Vec<f64>,
    /// `∑ |J| vol`.
    pub mass: f64,
}

impl CurrentJ {
    /// `∑ J_jk h_j h_k` over the coordinate 2-torus of plane index `p`
    /// (the slice through the origin in dimension three).
    pub fn total(&self, grid: &Grid, p: usize) -> f64 {
        let (j, k) = grid.planes()[p];
        let area = grid.spacing(j) * grid.spacing(k);
        let vals = &self.planes[p];
        if grid.dim() == 2 {
            return area * par::sum(vals.len(), |s| vals[s]);
        }
        let t = 3 - j - k;
        let mut acc = 0.0;
        for (s, v) in vals.iter().enumerate() {
            if grid.coords(s)[t] == 0 {
                acc += v;
            }
        }
        acc * area
    }
}

pub fn current_j(state: &FieldState, eps: f64) -> Result<CurrentJ> {
    check_eps(eps)?;
    let ld = LinkData::new(state);
    let g = state.grid();
    let n = g.num_sites();
    let u = state.u();
    // gauge-invariant supercurrent ⟨iu, D_d u⟩ on the link (d, x)
    let lambda = |d: usize, x: usize| -> f64 { (u[x].conj() * ld.diff[d * n + x]).im };
    let planes: Vec<Vec<f64>> = g
        .planes()
        .into_iter()
        .enumerate()
        .map(|(p, (j, k))| {
            par::map(n, |s| {
                let dl = (lambda(k, g.forward(s, j)) - lambda(k, s)) / g.spacing(j)
                    - (lambda(j, g.forward(s, k)) - lambda(j, s)) / g.spacing(k);
                ld.curv[p][s] + dl
            })
        })
        .collect();
    let plane_list = g.planes();
    let norm = par::map(n, |s| {
        let mut sq = 0.0;
        for (p, &(j, k)) in plane_list.iter().enumerate() {
            for c in ld.plaquettes_at(j, k, s) {
                sq += 0.25 * planes[p][c] * planes[p][c];
            }
        }
        sq.sqrt()
    });
    let mass = g.cell_volume() * par::sum(n, |s| norm[s]);
    Ok(CurrentJ { planes, norm, mass })
}

/// `ψ(u)` norms per site together with `|∇u|²` (site-averaged), used to check
/// the pointwise bound `|ψ(u)| ≤ |∇u|²`.
pub fn psi_bound_terms(state: &FieldState) -> Vec<(f64, f64)> {
    let ld = LinkData::new(state);
    let g = state.grid();
    let dim = g.dim();
    par::map(g.num_sites(), |s| {
        let d: Vec<Complex64> = (0..dim).map(|j| ld.d_site(j, s)).collect();
        let mut psi_sq = 0.0;
        for (j, k) in g.planes() {
            let v = 2.0 * (d[j].conj() * d[k]).im;
            psi_sq += v * v;
        }
        let grad_sq: f64 = d.iter().map(|z| z.norm_sqr()).sum();
        (psi_sq.sqrt(), grad_sq)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{apply_gauge, build_state, BundleTwist, InitSpec};

    fn one() -> InitSpec {
        InitSpec::Constant(Complex64::new(1.0, 0.0))
    }

    #[test]
    fn vacuum_has_zero_energy() {
        let g = Grid::uniform(2, 16, 1.0).unwrap();
        let st = build_state(&g, &BundleTwist::trivial(2), one()).unwrap();
        let e = energy(&st, 0.3).unwrap();
        assert_eq!(e.total, 0.0);
        assert!(gradient(&st, 0.3).unwrap().sup_norm() == 0.0);
        assert!(energy_density(&st, 0.3).unwrap().iter().all(|&v| v == 0.0));
        assert!(discrepancy(&st, 0.3).unwrap().iter().all(|&v| v == 0.0));
        let t = stress_energy(&st, 0.3).unwrap();
        assert!((0..t.num_sites()).all(|s| t.trace(s) == 0.0));
        let j = current_j(&st, 0.3).unwrap();
        assert_eq!(j.mass, 0.0);
        let x = VectorField::mode(0, [1, 0, 0], 1.0, 0.0);
        assert_eq!(inner_variation_residual(&st, 0.3, &x).unwrap(), 0.0);
    }

    #[test]
    fn zero_section_energy() {
        let g = Grid::uniform(2, 16, 1.0).unwrap();
        let st = build_state(&g, &BundleTwist::trivial(2), InitSpec::Zero).unwrap();
        let eps = 0.5;
        let e = energy(&st, eps).unwrap();
        assert!((e.total - 1.0).abs() < 1e-12);
        assert_eq!(e.total, e.potential);
        for v in energy_density(&st, eps).unwrap() {
            assert!((v - 0.25 / (eps * eps)).abs() < 1e-12);
        }
        for v in discrepancy(&st, eps).unwrap() {
            assert!((v + 1.0 / (2.0 * eps)).abs() < 1e-12);
        }
        let t = stress_energy(&st, eps).unwrap();
        for s in 0..t.num_sites() {
            assert!((t.get(s, 0, 0) - 1.0).abs() < 1e-12);
            assert!((t.get(s, 1, 1) - 1.0).abs() < 1e-12);
            assert_eq!(t.get(s, 0, 1), 0.0);
        }
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let g = Grid::uniform(2, 8, 1.0).unwrap();
        let st = build_state(&g, &BundleTwist::trivial(2), InitSpec::Zero).unwrap();
        assert!(matches!(energy(&st, 0.0), Err(Error::InvalidEpsilon(_))));
        assert!(energy(&st, -1.0).is_err());
        assert!(gradient(&st, f64::NAN).is_err());
    }

    #[test]
    fn density_sums_to_energy_3d() {
        let g = Grid::new(&[8, 10, 9], &[1.0, 1.2, 0.8]).unwrap();
        let st = build_state(&g, &BundleTwist::new(vec![1, 0, -1]), InitSpec::Random { seed: 2, amplitude: 0.4 }).unwrap();
        let eps = 0.3;
        let e = energy(&st, eps).unwrap();
        let dens = energy_density(&st, eps).unwrap();
        let sum: f64 = dens.iter().sum::<f64>() * g.cell_volume();
        assert!((sum - e.total).abs() <= 1e-10 * e.total);
        assert!((e.dirichlet + e.maxwell + e.potential - e.total).abs() <= 1e-12 * e.total);
    }

    #[test]
    fn trace_identity_holds_per_site() {
        for dims in [vec![10usize, 12], vec![8, 8, 10]] {
            let g = Grid::new(&dims, &vec![1.0; dims.len()]).unwrap();
            let st = build_state(&g, &BundleTwist::trivial(dims.len()), InitSpec::Random { seed: 5, amplitude: 0.5 }).unwrap();
            let eps = 0.4;
            let ld = LinkData::new(&st);
            let t = stress_from(&ld, eps);
            let dens = ld.density(eps);
            let n = g.dim() as f64;
            for s in 0..g.num_sites() {
                let grad: f64 = (0..g.dim()).map(|j| ld.dsq_site(j, s)).sum();
                let fsq = ld.f_norm_site(s).powi(2);
                let expect = n * dens[s] - 2.0 * grad - 4.0 * eps * eps * fsq;
                assert!((t.trace(s) - expect).abs() <= 1e-10 * (1.0 + dens[s]));
                // trace inequality identity
                let w = potential_w(st.u()[s]) / (eps * eps);
                let lhs = t.trace(s) - (n - 2.0) * dens[s];
                assert!((lhs - 2.0 * (w - eps * eps * fsq)).abs() <= 1e-10 * (1.0 + dens[s]));
            }
        }
    }

    #[test]
    fn psi_bound_pointwise() {
        let g = Grid::new(&[10, 8, 8], &[1.0, 1.0, 1.0]).unwrap();
        let st = build_state(&g, &BundleTwist::trivial(3), InitSpec::Random { seed: 9, amplitude: 0.8 }).unwrap();
        for (psi, grad) in psi_bound_terms(&st) {
            assert!(psi <= grad + 1e-10);
        }
    }

    #[test]
    fn energy_is_gauge_invariant() {
        let g = Grid::uniform(2, 16, 1.0).unwrap();
        let st = build_state(&g, &BundleTwist::planar(2, 2), InitSpec::Random { seed: 4, amplitude: 0.3 }).unwrap();
        let theta: Vec<f64> = (0..g.num_sites()).map(|s| (s as f64).sqrt().sin() * 3.0).collect();
        let moved = apply_gauge(&st, &theta);
        let (e0, e1) = (energy(&st, 0.2).unwrap().total, energy(&moved, 0.2).unwrap().total);
        assert!((e0 - e1).abs() <= 1e-10 * e0);
    }

    #[test]
    fn tensor_slot_layout() {
        assert_eq!(TensorField::slot(3, 0, 0), 0);
        assert_eq!(TensorField::slot(3, 0, 2), 2);
        assert_eq!(TensorField::slot(3, 1, 1), 3);
        assert_eq!(TensorField::slot(3, 2, 1), 4);
        assert_eq!(TensorField::slot(3, 2, 2), 5);
        assert_eq!(TensorField::slot(2, 1, 1), 2);
    }
}
