//! Critical points as minimizers of `Φ(s) = ½ ‖gradient(s)‖²` (L² norm).
//!
//! Each step solves the Newton system `H δ = −G` by MINRES, with
//! Hessian-vector products from central differences of the gradient, and
//! backtracks on `Φ`. Since `∇Φ = H G`, the Newton direction satisfies
//! `dΦ[δ] = −‖G‖²` whenever the linear solve is accurate; otherwise the step
//! falls back to `−∇Φ`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{dot, minres, sup, Evaluator, SolveResult, SolverOptions, TraceRow};
use crate::error::{Error, Result};
use crate::functional::energy;
use crate::gauge::{coulomb_gauge, harmonic_gauge};
use crate::lattice::{build_state, FieldState, Grid, InitSpec, TangentState};

const TRIVIAL_ENERGY: f64 = 1e-6;
const SYMMETRY_DEFECT: f64 = 1e-8;
const MAX_GROUP: usize = 4096;
const MAX_STEP: f64 = 0.25;
const FD_STEP: f64 = 1e-5;

/// Site translation by `shift` (in lattice units), optionally composed with
/// charge conjugation `(u, a) ↦ (ū, −a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymmetryOp {
    pub shift: [i64; 3],
    pub conjugate: bool,
}

impl SymmetryOp {
    pub const IDENTITY: SymmetryOp = SymmetryOp { shift: [0, 0, 0], conjugate: false };

    fn normalized(self, grid: &Grid) -> Self {
        let mut shift = [0i64; 3];
        for j in 0..grid.dim() {
            shift[j] = self.shift[j].rem_euclid(grid.size(j) as i64);
        }
        Self { shift, conjugate: self.conjugate }
    }

    fn compose(self, other: Self, grid: &Grid) -> Self {
        let mut shift = [0i64; 3];
        for j in 0..3 {
            shift[j] = self.shift[j] + other.shift[j];
        }
        Self { shift, conjugate: self.conjugate ^ other.conjugate }.normalized(grid)
    }

    /// Action on a flat `[u, a]` vector: `v'(x) = C v(x − shift)`.
    pub fn act(&self, grid: &Grid, v: &[f64]) -> Vec<f64> {
        let n = grid.num_sites();
        let back: Vec<i64> = self.shift.iter().map(|t| -t).collect();
        let sign = if self.conjugate { -1.0 } else { 1.0 };
        let mut out = vec![0.0; v.len()];
        for s in 0..n {
            let src = grid.offset(s, &back[..grid.dim()]);
            out[2 * s] = v[2 * src];
            out[2 * s + 1] = sign * v[2 * src + 1];
        }
        let links = (v.len() - 2 * n) / n;
        for j in 0..links {
            for s in 0..n {
                let src = grid.offset(s, &back[..grid.dim()]);
                out[2 * n + j * n + s] = sign * v[2 * n + j * n + src];
            }
        }
        out
    }
}

/// Finite abelian group generated by translations and conjugation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrySpec {
    pub generators: Vec<SymmetryOp>,
}

impl SymmetrySpec {
    pub fn new(generators: Vec<SymmetryOp>) -> Self {
        Self { generators }
    }

    /// All group elements, identity included.
    pub fn elements(&self, grid: &Grid) -> Result<Vec<SymmetryOp>> {
        let mut seen = BTreeSet::new();
        let mut frontier = vec![SymmetryOp::IDENTITY];
        seen.insert(SymmetryOp::IDENTITY);
        let gens: Vec<SymmetryOp> = self.generators.iter().map(|g| g.normalized(grid)).collect();
        while let Some(e) = frontier.pop() {
            for g in &gens {
                let c = e.compose(*g, grid);
                if seen.insert(c) {
                    if seen.len() > MAX_GROUP {
                        return Err(Error::InvalidArgument(format!("symmetry group exceeds {MAX_GROUP} elements")));
                    }
                    frontier.push(c);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }
}

/// Gauge transformation composed with a group element so that its image is
/// compared in the gauge of the reference state: a large gauge move
/// `u ↦ e^{2πi ∑ k_j x_j / L_j} u`, `a_j ↦ a_j + 2π k_j / L_j` and a global phase.
#[derive(Debug, Clone, Copy)]
struct Correction {
    k: [i64; 3],
    phase: f64,
}

struct Group {
    grid: Grid,
    elements: Vec<SymmetryOp>,
    corrections: Vec<Correction>,
}

impl Group {
    fn new(grid: &Grid, elements: Vec<SymmetryOp>) -> Self {
        let corrections = vec![Correction { k: [0; 3], phase: 0.0 }; elements.len()];
        Self { grid: grid.clone(), elements, corrections }
    }

    fn site_phase(&self, c: &Correction, s: usize) -> f64 {
        let coords = self.grid.coords(s);
        let mut t = c.phase;
        for j in 0..self.grid.dim() {
            t += 2.0 * std::f64::consts::PI * c.k[j] as f64 * coords[j] as f64 / self.grid.size(j) as f64;
        }
        t
    }

    fn rotate(&self, c: &Correction, v: &mut [f64]) {
        let n = self.grid.num_sites();
        let theta: Vec<f64> = (0..n).map(|s| self.site_phase(c, s)).collect();
        super::rotate_sites(v, &theta);
    }

    fn act_state(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let c = &self.corrections[i];
        let mut y = self.elements[i].act(&self.grid, x);
        self.rotate(c, &mut y);
        let n = self.grid.num_sites();
        for j in 0..self.grid.dim() {
            let shift = 2.0 * std::f64::consts::PI * c.k[j] as f64 / self.grid.length(j);
            y[2 * n + j * n..2 * n + (j + 1) * n].iter_mut().for_each(|v| *v += shift);
        }
        y
    }

    fn act_tangent(&self, i: usize, v: &[f64]) -> Vec<f64> {
        let mut y = self.elements[i].act(&self.grid, v);
        self.rotate(&self.corrections[i], &mut y);
        y
    }

    /// Fix each correction from the reference state `x`: the nearest large
    /// gauge move matching the mean link fields, then the best global phase.
    fn calibrate(&mut self, x: &[f64]) {
        let g = self.grid.clone();
        let n = g.num_sites();
        let mean = |v: &[f64], j: usize| v[2 * n + j * n..2 * n + (j + 1) * n].iter().sum::<f64>() / n as f64;
        for i in 0..self.elements.len() {
            self.corrections[i] = Correction { k: [0; 3], phase: 0.0 };
            let y = self.act_state(i, x);
            let mut k = [0i64; 3];
            for j in 0..g.dim() {
                k[j] = ((mean(x, j) - mean(&y, j)) * g.length(j) / (2.0 * std::f64::consts::PI)).round() as i64;
            }
            self.corrections[i].k = k;
            let y = self.act_state(i, x);
            let mut overlap = Complex64::new(0.0, 0.0);
            for s in 0..n {
                overlap += Complex64::new(y[2 * s], -y[2 * s + 1]) * Complex64::new(x[2 * s], x[2 * s + 1]);
            }
            if overlap.norm() > 0.0 {
                self.corrections[i].phase = overlap.arg();
            }
        }
    }

    fn average(&self, v: &[f64], act: impl Fn(usize, &[f64]) -> Vec<f64>) -> Vec<f64> {
        let mut acc = vec![0.0; v.len()];
        for i in 0..self.elements.len() {
            let w = act(i, v);
            acc.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
        }
        let k = 1.0 / self.elements.len() as f64;
        acc.iter_mut().for_each(|a| *a *= k);
        acc
    }

    fn project(&self, v: &[f64]) -> Vec<f64> {
        self.average(v, |i, w| self.act_tangent(i, w))
    }

    fn self_test(&self, state: &FieldState, eps: f64) -> Result<()> {
        let probe = build_state(state.grid(), state.twist(), InitSpec::Random { seed: 0x5eed, amplitude: 0.3 })?;
        for st in [&probe, state] {
            let x = st.to_vec();
            let e0 = energy(st, eps)?.total;
            for el in &self.elements {
                let e1 = energy(&st.with_vec(&el.act(&self.grid, &x)), eps)?.total;
                let defect = (e1 - e0).abs();
                if !(defect <= SYMMETRY_DEFECT) {
                    return Err(Error::SymmetryRejected { defect });
                }
            }
        }
        Ok(())
    }

    /// Move to the harmonic-reduced Coulomb gauge, rotate the global phase so
    /// that conjugating elements fix the state as closely as possible,
    /// calibrate the gauge corrections and average over the group.
    fn symmetrize(&mut self, state: &FieldState) -> Vec<f64> {
        let (st, _) = harmonic_gauge(state);
        let (mut st, _) = coulomb_gauge(&st);
        if let Some(c) = self.elements.iter().find(|e| e.conjugate) {
            let x = st.to_vec();
            let y = c.act(&self.grid, &x);
            let n = self.grid.num_sites();
            let mut overlap = Complex64::new(0.0, 0.0);
            for s in 0..n {
                overlap += Complex64::new(x[2 * s], -x[2 * s + 1]) * Complex64::new(y[2 * s], y[2 * s + 1]);
            }
            if overlap.norm() > 0.0 {
                let rot = Complex64::from_polar(1.0, 0.5 * overlap.arg());
                st.u_mut().iter_mut().for_each(|z| *z *= rot);
            }
        }
        let x = st.to_vec();
        self.calibrate(&x);
        self.average(&x, |i, w| self.act_state(i, w))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalResult {
    pub result: SolveResult,
    /// `Φ = ½ ‖G‖²` at the returned state.
    pub phi: f64,
    /// `false` when the energy is at most `1e−6`.
    pub nontrivial: bool,
}

fn hess_vec(ev: &mut Evaluator, x: &[f64], v: &[f64]) -> Vec<f64> {
    let m = sup(v);
    if m == 0.0 {
        return vec![0.0; v.len()];
    }
    let t = FD_STEP / m;
    let plus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + t * b).collect();
    let minus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - t * b).collect();
    let gp = ev.gradient(&plus);
    let gm = ev.gradient(&minus);
    gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * t)).collect()
}

/// `Φ(s) = ½ ∑ G² vol`.
pub fn phi_value(state: &FieldState, eps: f64) -> Result<f64> {
    let g = crate::functional::gradient(state, eps)?;
    Ok(0.5 * state.grid().cell_volume() * g.dot(&g))
}

/// L²-gradient of `Φ`, that is `H G`, by central differencing of the
/// gradient along `G` itself.
pub fn phi_gradient(state: &FieldState, eps: f64) -> Result<TangentState> {
    let mut ev = Evaluator::new(state, eps);
    let x = state.to_vec();
    let g = ev.gradient(&x);
    Ok(TangentState::from_slice(&hess_vec(&mut ev, &x, &g), state.grid().num_sites()))
}

pub fn find_critical(
    state: &FieldState,
    eps: f64,
    opts: &SolverOptions,
    symmetry: Option<&SymmetrySpec>,
) -> Result<CriticalResult> {
    opts.validate()?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let mut group = match symmetry {
        Some(spec) => {
            let g = Group::new(state.grid(), spec.elements(state.grid())?);
            g.self_test(state, eps)?;
            Some(g)
        }
        None => None,
    };
    let mut x = match group.as_mut() {
        Some(g) => g.symmetrize(state),
        None => state.to_vec(),
    };
    let project = |v: Vec<f64>| match &group {
        Some(g) => g.project(&v),
        None => v,
    };

    let vol = state.grid().cell_volume();
    let mut ev = Evaluator::new(state, eps);
    let (mut e, g0) = ev.eval(&x);
    let mut g = project(g0);
    let mut gn = sup(&g);
    let mut phi = 0.5 * vol * dot(&g, &g);
    let mut trace = Vec::new();
    if opts.trace {
        trace.push(TraceRow { iter: 0, energy: e.total, grad_norm: gn, step_size: 0.0 });
    }
    let c1 = opts.line_search.c1;
    let shrink = opts.line_search.shrink;
    let mut iters = 0;
    let mut converged = gn <= opts.tol;

    while !converged && iters < opts.max_iters {
        let grad_phi = project(hess_vec(&mut ev, &x, &g));
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let sol = minres(|v| project(hess_vec(&mut ev, &x, v)), &rhs, 1e-4, 400);
        let newton = project(sol.x);

        let mut accepted = None;
        let fallback: Vec<f64> = grad_phi.iter().map(|v| -v).collect();
        for dir in [newton, fallback] {
            let m = sup(&dir);
            if m == 0.0 {
                continue;
            }
            let scale = (MAX_STEP / m).min(1.0);
            let dir: Vec<f64> = dir.iter().map(|v| v * scale).collect();
            let slope = vol * dot(&grad_phi, &dir);
            if !(slope < 0.0) {
                continue;
            }
            let mut alpha = 1.0;
            while alpha > 1e-12 {
                let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + alpha * b).collect();
                let (et, gt) = ev.eval(&trial);
                let gt = project(gt);
                let pt = 0.5 * vol * dot(&gt, &gt);
                if pt.is_finite() && pt <= phi + c1 * alpha * slope {
                    accepted = Some((trial, et, gt, pt, alpha));
                    break;
                }
                alpha *= shrink;
            }
            if accepted.is_some() {
                break;
            }
        }
        let Some((xn, en, gnew, pn, alpha)) = accepted else {
            break;
        };
        x = xn;
        e = en;
        g = gnew;
        phi = pn;
        gn = sup(&g);
        iters += 1;
        if opts.trace {
            trace.push(TraceRow { iter: iters, energy: e.total, grad_norm: gn, step_size: alpha });
        }
        converged = gn <= opts.tol;
    }

    // report the unprojected gradient
    let gn = sup(&ev.gradient(&x));
    let converged = gn <= opts.tol;
    let mut out = state.clone();
    out.set_from_slice(&x);
    let nontrivial = e.total > TRIVIAL_ENERGY;
    Ok(CriticalResult {
        result: SolveResult { state: out, breakdown: e, grad_norm: gn, iters, converged, epsilon: eps, trace },
        phi,
        nontrivial,
    })
}
