//! Unpreconditioned MINRES for symmetric (possibly indefinite or singular)
//! operators given as matrix-vector products.

use super::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct MinresOutcome {
    pub x: Vec<f64>,
    pub iters: usize,
    /// Estimated residual norm relative to `‖b‖`.
    pub rel_residual: f64,
}

pub fn minres<A>(mut apply: A, b: &[f64], rtol: f64, max_iters: usize) -> MinresOutcome
where
    A: FnMut(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let beta1 = dot(b, b).sqrt();
    if beta1 == 0.0 {
        return MinresOutcome { x, iters: 0, rel_residual: 0.0 };
    }
    let mut v_old = vec![0.0; n];
    let mut v: Vec<f64> = b.iter().map(|bi| bi / beta1).collect();
    let mut beta = beta1;
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut iters = 0;
    let mut first = true;
    while iters < max_iters {
        iters += 1;
        let mut p = apply(&v);
        let alfa = dot(&v, &p);
        for i in 0..n {
            p[i] -= alfa * v[i] + if first { 0.0 } else { beta * v_old[i] };
        }
        first = false;
        let beta_new = dot(&p, &p).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta_new;
        dbar = -cs * beta_new;
        let gamma = gbar.hypot(beta_new).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta_new / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let w1 = std::mem::replace(&mut w2, std::mem::take(&mut w));
        w = (0..n).map(|i| (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma).collect();
        x.iter_mut().zip(&w).for_each(|(xi, wi)| *xi += phi * wi);

        if phibar <= rtol * beta1 || beta_new == 0.0 {
            break;
        }
        v_old = std::mem::replace(&mut v, p.iter().map(|pi| pi / beta_new).collect());
        beta = beta_new;
    }
    MinresOutcome { x, iters, rel_residual: phibar / beta1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    #[test]
    fn solves_indefinite_system() {
        let n = 12;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = i as f64 - 5.5;
            if i + 1 < n {
                m[i][i + 1] = 0.3;
                m[i + 1][i] = 0.3;
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let b = matvec(&m, &x_true);
        let out = minres(|v| matvec(&m, v), &b, 1e-13, 100);
        for (a, b) in out.x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(out.rel_residual < 1e-12);
    }

    #[test]
    fn consistent_singular_system() {
        // null vector (1, -1, 0); right-hand side orthogonal to it
        let m = vec![vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, -2.0]];
        let b = vec![2.0, 2.0, 4.0];
        let out = minres(|v| matvec(&m, v), &b, 1e-14, 50);
        let r = matvec(&m, &out.x);
        for (a, b) in r.iter().zip(&b) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((out.x[0] - out.x[1]).abs() < 1e-12);
    }
}
