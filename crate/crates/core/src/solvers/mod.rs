//! Energy minimization, warm-started ε-continuation and critical-point search.

mod critical;
mod minres;

pub use critical::{find_critical, phi_gradient, phi_value, CriticalResult, SymmetryOp, SymmetrySpec};
pub use minres::{minres, MinresOutcome};

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{discrepancy, energy_and_gradient, EnergyBreakdown};
use crate::gauge::{coulomb_gauge, harmonic_gauge};
use crate::lattice::{total_flux, FieldState, TangentState};
use crate::par;
use crate::spectral::PeriodicFft;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    GradientDescent,
    Lbfgs { memory: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    pub c1: f64,
    pub shrink: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self { c1: 1e-4, shrink: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub method: Method,
    /// Sup-norm tolerance on the volume-normalized gradient.
    pub tol: f64,
    pub max_iters: usize,
    pub line_search: LineSearch,
    /// Harmonic reduction plus Coulomb projection every this many iterations (0 = never).
    pub gauge_cadence: usize,
    /// Use the Fourier-diagonal preconditioner as the initial inverse Hessian.
    pub precondition: bool,
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: Method::Lbfgs { memory: 10 },
            tol: 1e-6,
            max_iters: 20_000,
            line_search: LineSearch::default(),
            gauge_cadence: 50,
            precondition: true,
            trace: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        let LineSearch { c1, shrink } = self.line_search;
        if !(c1 > 0.0 && c1 < 1.0) {
            return Err(Error::InvalidArgument(format!("line search c1 must lie in (0,1), got {c1}")));
        }
        if !(shrink > 0.0 && shrink < 1.0) {
            return Err(Error::InvalidArgument(format!("line search shrink must lie in (0,1), got {shrink}")));
        }
        if let Method::Lbfgs { memory } = self.method {
            if memory == 0 {
                return Err(Error::InvalidArgument("L-BFGS memory must be at least 1".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub step_size: f64,
}

impl TraceRow {
    pub const CSV_HEADER: &'static str = "iter,energy,grad_norm,step_size";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.iter, self.energy, self.grad_norm, self.step_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub state: FieldState,
    pub breakdown: EnergyBreakdown,
    pub grad_norm: f64,
    pub iters: usize,
    pub converged: bool,
    pub epsilon: f64,
    pub trace: Vec<TraceRow>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    par::sum(a.len(), |i| a[i] * b[i])
}

pub(crate) fn sup(a: &[f64]) -> f64 {
    par::max(a.len(), |i| a[i].abs()).max(0.0)
}

/// Multiply the site-wise complex components of a flat vector by `e^{iθ}`.
pub(crate) fn rotate_sites(v: &mut [f64], theta: &[f64]) {
    for (s, t) in theta.iter().enumerate() {
        let z = Complex64::new(v[2 * s], v[2 * s + 1]) * Complex64::from_polar(1.0, *t);
        v[2 * s] = z.re;
        v[2 * s + 1] = z.im;
    }
}

/// Energy, flat gradient, and the state they were evaluated at.
pub(crate) struct Evaluator {
    pub state: FieldState,
    pub eps: f64,
    pub evals: usize,
}

impl Evaluator {
    pub fn new(state: &FieldState, eps: f64) -> Self {
        Self { state: state.clone(), eps, evals: 0 }
    }

    pub fn eval(&mut self, x: &[f64]) -> (EnergyBreakdown, Vec<f64>) {
        self.state.set_from_slice(x);
        self.evals += 1;
        let (e, g) = energy_and_gradient(&self.state, self.eps).expect("epsilon validated");
        (e, g.to_vec())
    }

    pub fn gradient(&mut self, x: &[f64]) -> Vec<f64> {
        self.eval(x).1
    }
}

/// Constant-coefficient model of the L² Hessian at the vacuum, inverted in
/// Fourier space: `(2λ + ε⁻²)⁻¹` on each real component of `u` and
/// `(2ε²λ + 2)⁻¹` on each link component, `λ` the Laplacian symbol.
pub(crate) struct Preconditioner {
    fft: PeriodicFft,
    inv_h2: Vec<f64>,
    n: usize,
    dim: usize,
    eps: f64,
}

impl Preconditioner {
    pub fn new(state: &FieldState, eps: f64) -> Self {
        let g = state.grid();
        Self {
            fft: PeriodicFft::new(g.sizes()),
            inv_h2: g.spacings().iter().map(|h| 1.0 / (h * h)).collect(),
            n: g.num_sites(),
            dim: g.dim(),
            eps,
        }
    }

    fn laplacian(&self, lam: &[f64]) -> f64 {
        lam.iter().zip(&self.inv_h2).map(|(l, w)| l * w).sum()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; v.len()];
        let e2 = self.eps * self.eps;
        let mut buf: Vec<Complex64> = (0..n).map(|s| Complex64::new(v[2 * s], v[2 * s + 1])).collect();
        self.fft.apply_symbol(&mut buf, |lam| 1.0 / (2.0 * self.laplacian(lam) + 1.0 / e2));
        for (s, z) in buf.iter().enumerate() {
            out[2 * s] = z.re;
            out[2 * s + 1] = z.im;
        }
        let a = &v[2 * n..];
        for j in (0..self.dim).step_by(2) {
            let pair = j + 1 < self.dim;
            let mut buf: Vec<Complex64> = (0..n)
                .map(|s| Complex64::new(a[j * n + s], if pair { a[(j + 1) * n + s] } else { 0.0 }))
                .collect();
            self.fft.apply_symbol(&mut buf, |lam| 1.0 / (2.0 * e2 * self.laplacian(lam) + 2.0));
            for (s, z) in buf.iter().enumerate() {
                out[2 * n + j * n + s] = z.re;
                if pair {
                    out[2 * n + (j + 1) * n + s] = z.im;
                }
            }
        }
        out
    }
}

/// Initial inverse Hessian of the two-loop recursion.
enum Scaling {
    Scalar(f64),
    Fourier(Preconditioner),
}

impl Scaling {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Scalar(c) => v.iter().map(|x| c * x).collect(),
            Scaling::Fourier(p) => p.apply(v),
        }
    }
}

struct Memory {
    cap: usize,
    /// `(s, y, 1/(s·y), s·y / y·H₀y)`
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64, f64)>,
}

impl Memory {
    fn new(cap: usize) -> Self {
        Self { cap, pairs: VecDeque::new() }
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>, h0: &Scaling) {
        let sy = dot(&s, &y);
        if !(sy > 1e-300) || self.cap == 0 {
            return;
        }
        let yhy = dot(&y, &h0.apply(&y));
        if !(yhy > 0.0) {
            return;
        }
        if self.pairs.len() == self.cap {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy, sy / yhy));
    }

    fn direction(&self, g: &[f64], h0: &Scaling) -> Vec<f64> {
        let mut q: Vec<f64> = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho, _) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = self.pairs.back().map_or(1.0, |p| p.3);
        let mut q = h0.apply(&q);
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho, _), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }

    fn rotate(&mut self, theta: &[f64]) {
        for (s, y, _, _) in self.pairs.iter_mut() {
            rotate_sites(s, theta);
            rotate_sites(y, theta);
        }
    }

    fn clear(&mut self) {
        self.pairs.clear();
    }

    fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Armijo decrease, or, once energy differences reach roundoff, the
/// approximate Wolfe conditions on the directional derivative.
fn accept_step(c1: f64, e0: f64, slope0: f64, et: f64, alpha: f64, slope_at: impl FnOnce() -> f64) -> bool {
    if !et.is_finite() {
        return false;
    }
    if et <= e0 + c1 * alpha * slope0 {
        return true;
    }
    if et > e0 + ROUNDOFF * e0.abs().max(1.0) {
        return false;
    }
    let st = slope_at();
    st >= 0.9 * slope0 && st <= (1.0 - 2.0 * c1) * -slope0
}

/// Relative energy change treated as indistinguishable from rounding.
const ROUNDOFF: f64 = 1e-12;

/// Steplength scale for plain gradient steps: inverse of the largest
/// curvature of the lattice Dirichlet term.
fn gradient_step_scale(state: &FieldState) -> f64 {
    let g = state.grid();
    1.0 / (8.0 * g.spacings().iter().map(|h| 1.0 / (h * h)).sum::<f64>())
}

pub fn minimize(state: &FieldState, eps: f64, opts: &SolverOptions) -> Result<SolveResult> {
    opts.validate()?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let mut ev = Evaluator::new(state, eps);
    let mut x = state.to_vec();
    let (mut e, mut g) = ev.eval(&x);
    let mut gn = sup(&g);
    let h0 = if opts.precondition {
        Scaling::Fourier(Preconditioner::new(state, eps))
    } else {
        Scaling::Scalar(gradient_step_scale(state))
    };
    let steepest = |g: &[f64]| -> Vec<f64> { h0.apply(g).into_iter().map(|v| -v).collect() };
    let mut memory = Memory::new(match opts.method {
        Method::Lbfgs { memory } => memory,
        Method::GradientDescent => 0,
    });
    let lbfgs = matches!(opts.method, Method::Lbfgs { .. });
    let mut trace = Vec::new();
    if opts.trace {
        trace.push(TraceRow { iter: 0, energy: e.total, grad_norm: gn, step_size: 0.0 });
    }
    let mut gd_alpha = 1.0;
    let mut iters = 0;
    let mut converged = gn <= opts.tol;

    while !converged && iters < opts.max_iters {
        if opts.gauge_cadence > 0 && iters > 0 && iters % opts.gauge_cadence == 0 {
            let mut st = ev.state.clone();
            st.set_from_slice(&x);
            let (st, ph1) = harmonic_gauge(&st);
            let (st, ph2) = coulomb_gauge(&st);
            let theta: Vec<f64> = ph1.iter().zip(&ph2).map(|(p, q)| p + q).collect();
            memory.rotate(&theta);
            x = st.to_vec();
            (e, g) = ev.eval(&x);
        }

        let mut p = if lbfgs { memory.direction(&g, &h0) } else { steepest(&g) };
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            memory.clear();
            p = steepest(&g);
            slope = dot(&g, &p);
        }

        let vol = state.grid().cell_volume();
        let mut accepted = None;
        for attempt in 0..2 {
            let mut alpha = if lbfgs && !memory.is_empty() { 1.0 } else { gd_alpha };
            let mut trial = vec![0.0; x.len()];
            while alpha > 1e-14 {
                trial.iter_mut().zip(x.iter().zip(&p)).for_each(|(t, (xi, pi))| *t = xi + alpha * pi);
                let (et, gt) = ev.eval(&trial);
                if accept_step(opts.line_search.c1, e.total, vol * slope, et.total, alpha, || vol * dot(&gt, &p)) {
                    accepted = Some((trial, et, gt, alpha));
                    break;
                }
                alpha *= opts.line_search.shrink;
            }
            if accepted.is_some() || attempt == 1 || memory.is_empty() {
                break;
            }
            memory.clear();
            p = steepest(&g);
            slope = dot(&g, &p);
        }
        let Some((xn, en, gnew, alpha)) = accepted else {
            break;
        };
        if !lbfgs || memory.is_empty() {
            gd_alpha = (alpha * 2.0).min(64.0);
        }
        if lbfgs {
            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
            memory.push(s, y, &h0);
        }
        x = xn;
        e = en;
        g = gnew;
        gn = sup(&g);
        iters += 1;
        if opts.trace {
            trace.push(TraceRow { iter: iters, energy: e.total, grad_norm: gn, step_size: alpha });
        }
        converged = gn <= opts.tol;
    }

    let mut out = state.clone();
    out.set_from_slice(&x);
    Ok(SolveResult { state: out, breakdown: e, grad_norm: gn, iters, converged, epsilon: eps, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub dirichlet: f64,
    pub maxwell: f64,
    pub potential: f64,
    pub total: f64,
    pub max_xi: f64,
    pub max_abs_u: f64,
    /// Total flux through the first coordinate plane, in units of 2π.
    pub flux: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub converged: bool,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "epsilon,dirichlet,maxwell,potential,total,max_xi,max_abs_u,flux,grad_norm,iters,converged";

    pub fn from_result(r: &SolveResult) -> Self {
        let xi = discrepancy(&r.state, r.epsilon).expect("epsilon validated");
        let max_xi = xi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let plane = r.state.grid().planes()[0];
        Self {
            epsilon: r.epsilon,
            dirichlet: r.breakdown.dirichlet,
            maxwell: r.breakdown.maxwell,
            potential: r.breakdown.potential,
            total: r.breakdown.total,
            max_xi,
            max_abs_u: r.state.max_abs_u(),
            flux: total_flux(&r.state, plane) / (2.0 * std::f64::consts::PI),
            grad_norm: r.grad_norm,
            iters: r.iters,
            converged: r.converged,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.epsilon,
            self.dirichlet,
            self.maxwell,
            self.potential,
            self.total,
            self.max_xi,
            self.max_abs_u,
            self.flux,
            self.grad_norm,
            self.iters,
            self.converged
        )
    }
}

/// Minimize at each ε of a strictly decreasing schedule, warm-starting from
/// the previous minimizer.
pub fn epsilon_sweep(state: &FieldState, schedule: &[f64], opts: &SolverOptions) -> Result<Vec<SolveResult>> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon schedule".into()));
    }
    for w in schedule.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidArgument(format!("schedule must be strictly decreasing ({} then {})", w[0], w[1])));
        }
    }
    let smallest = *schedule.last().unwrap();
    if !(smallest > 0.0) {
        return Err(Error::InvalidEpsilon(smallest));
    }
    if !state.grid().resolves(smallest) {
        return Err(Error::UnderResolved { epsilon: smallest, spacing: state.grid().transverse_spacing() });
    }
    let mut out: Vec<SolveResult> = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let start = out.last().map(|r| &r.state).unwrap_or(state);
        out.push(minimize(start, eps, opts)?);
    }
    Ok(out)
}

/// Central-difference check of the gradient along `dir`: returns
/// `(vol ⟨G, δ⟩, (E(s+tδ) − E(s−tδ)) / 2t)`.
pub fn directional_check(state: &FieldState, eps: f64, dir: &TangentState, t: f64) -> Result<(f64, f64)> {
    let (_, g) = energy_and_gradient(state, eps)?;
    let x = state.to_vec();
    let d = dir.to_vec();
    let plus: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
    let minus: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - t * b).collect();
    let ep = crate::functional::energy(&state.with_vec(&plus), eps)?.total;
    let em = crate::functional::energy(&state.with_vec(&minus), eps)?.total;
    Ok((state.grid().cell_volume() * g.dot(dir), (ep - em) / (2.0 * t)))
}

