//! Gauge-invariant plaquette vorticity and the extracted vortex set.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::lattice::{plaquette_curvature, FieldState, Grid};
use crate::par;

/// Integer vorticity of every plaquette of plane `(j, k)`, indexed by lower corner.
///
/// `q = (1/2π) [∑ arg(ū(x) T(x) u(x+e)) + F h_j h_k]` with the link terms
/// taken around the plaquette in positive orientation. The bracket is an
/// exact multiple of `2π`; rounding only removes floating-point noise.
pub fn plaquette_vorticity(state: &FieldState, plane: (usize, usize)) -> Vec<i64> {
    let g = state.grid();
    let (j, k) = plane;
    let n = g.num_sites();
    let u = state.u();
    let t = state.transports();
    let f = plaquette_curvature(state, plane);
    let area = g.spacing(j) * g.spacing(k);
    let link = |dir: usize, s: usize| -> f64 {
        (u[s].conj() * t[dir * n + s] * u[g.forward(s, dir)]).arg()
    };
    par::map(n, |s| {
        let sj = g.forward(s, j);
        let sk = g.forward(s, k);
        let w = link(j, s) + link(k, sj) - link(j, sk) - link(k, s) + f[s] * area;
        (w / (2.0 * PI)).round() as i64
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargedPoint {
    pub position: [f64; 2],
    pub charge: i64,
}

/// A closed vortex line through plaquette centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub vertices: Vec<[f64; 3]>,
    pub charge: i64,
    /// Net number of turns around each periodic axis.
    pub winding: [i64; 3],
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VortexGeometry {
    Points(Vec<ChargedPoint>),
    Lines(Vec<Polyline>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexSet {
    pub geometry: VortexGeometry,
    /// Signed vorticity summed over the first slice of each coordinate plane.
    pub plane_charges: Vec<i64>,
    /// Charged plaquettes without a nearby site of `|u|² ≤ 3/4`.
    pub unresolved_plaquettes: usize,
    /// Lines that could not be closed (non-conserved face charges).
    pub broken_lines: usize,
}

impl VortexSet {
    pub fn points(&self) -> &[ChargedPoint] {
        match &self.geometry {
            VortexGeometry::Points(p) => p,
            VortexGeometry::Lines(_) => &[],
        }
    }

    pub fn lines(&self) -> &[Polyline] {
        match &self.geometry {
            VortexGeometry::Lines(l) => l,
            VortexGeometry::Points(_) => &[],
        }
    }

    /// Sample locations used for distance queries (3-vectors).
    pub fn locations(&self) -> Vec<[f64; 3]> {
        match &self.geometry {
            VortexGeometry::Points(p) => p.iter().map(|c| [c.position[0], c.position[1], 0.0]).collect(),
            VortexGeometry::Lines(l) => l.iter().flat_map(|p| p.vertices.iter().copied()).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.geometry {
            VortexGeometry::Points(p) => p.is_empty(),
            VortexGeometry::Lines(l) => l.is_empty(),
        }
    }

    /// Charges sorted ascending (points in 2D, lines in 3D).
    pub fn charges(&self) -> Vec<i64> {
        let mut q: Vec<i64> = match &self.geometry {
            VortexGeometry::Points(p) => p.iter().map(|c| c.charge).collect(),
            VortexGeometry::Lines(l) => l.iter().map(|c| c.charge).collect(),
        };
        q.sort_unstable();
        q
    }
}

fn plaquette_centre(g: &Grid, s: usize, j: usize, k: usize) -> [f64; 3] {
    let mut x = g.position(s);
    x[j] += 0.5 * g.spacing(j);
    x[k] += 0.5 * g.spacing(k);
    x
}

fn corners_resolved(state: &FieldState, s: usize, j: usize, k: usize) -> bool {
    let g = state.grid();
    let u = state.u();
    let sj = g.forward(s, j);
    [s, sj, g.forward(s, k), g.forward(sj, k)].iter().any(|&c| u[c].norm_sqr() <= 0.75)
}

fn slice_sum(g: &Grid, q: &[i64], plane: (usize, usize)) -> i64 {
    if g.dim() == 2 {
        return q.iter().sum();
    }
    let t = 3 - plane.0 - plane.1;
    q.iter().enumerate().filter(|(s, _)| g.coords(*s)[t] == 0).map(|(_, v)| v).sum()
}

pub fn extract_vortices(state: &FieldState) -> VortexSet {
    let g = state.grid();
    let planes = g.planes();
    let q: Vec<Vec<i64>> = planes.iter().map(|&p| plaquette_vorticity(state, p)).collect();
    let plane_charges = planes.iter().zip(&q).map(|(&p, v)| slice_sum(g, v, p)).collect();
    let mut unresolved = 0;
    for (&(j, k), v) in planes.iter().zip(&q) {
        for (s, &c) in v.iter().enumerate() {
            if c != 0 && !corners_resolved(state, s, j, k) {
                unresolved += 1;
            }
        }
    }

    if g.dim() == 2 {
        let pts = q[0]
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(s, &c)| {
                let x = plaquette_centre(g, s, 0, 1);
                ChargedPoint { position: [x[0], x[1]], charge: c }
            })
            .collect();
        return VortexSet {
            geometry: VortexGeometry::Points(pts),
            plane_charges,
            unresolved_plaquettes: unresolved,
            broken_lines: 0,
        };
    }

    let (lines, broken) = string_lines(g, &q);
    VortexSet { geometry: VortexGeometry::Lines(lines), plane_charges, unresolved_plaquettes: unresolved, broken_lines: broken }
}

/// Follow unit currents through cubes. The current along axis `a` through
/// the face with normal `a` at site `s` goes from cube `s − e_a` to cube `s`
/// and equals `q_12`, `−q_02`, `q_01` for `a = 0, 1, 2`.
fn string_lines(g: &Grid, q: &[Vec<i64>]) -> (Vec<Polyline>, usize) {
    let n = g.num_sites();
    // remaining current per (axis, face site)
    let mut cur: Vec<i64> = Vec::with_capacity(3 * n);
    cur.extend(q[2].iter().copied());
    cur.extend(q[1].iter().map(|v| -v));
    cur.extend(q[0].iter().copied());
    let face_centre = |axis: usize, s: usize| -> [f64; 3] {
        let mut x = g.position(s);
        for d in 0..3 {
            if d != axis {
                x[d] += 0.5 * g.spacing(d);
            }
        }
        x
    };
    // outgoing unit edges of cube c: (axis, face, sign, next cube)
    let outgoing = |cur: &[i64], c: usize| -> Option<(usize, usize, i64, usize)> {
        for axis in 0..3 {
            let fwd = g.forward(c, axis);
            if cur[axis * n + fwd] > 0 {
                return Some((axis, fwd, 1, fwd));
            }
            if cur[axis * n + c] < 0 {
                return Some((axis, c, -1, g.backward(c, axis)));
            }
        }
        None
    };

    let mut lines = Vec::new();
    let mut broken = 0;
    for start_face in 0..3 * n {
        while cur[start_face] != 0 {
            let (axis, face) = (start_face / n, start_face % n);
            let sign = cur[start_face].signum();
            let (start_cube, mut cube) = if sign > 0 {
                (g.backward(face, axis), face)
            } else {
                (face, g.backward(face, axis))
            };
            cur[start_face] -= sign;
            let mut vertices = vec![face_centre(axis, face)];
            let mut steps = [0i64; 3];
            steps[axis] += sign;
            let mut closed = false;
            loop {
                if cube == start_cube {
                    closed = true;
                    break;
                }
                let Some((ax, f, sg, next)) = outgoing(&cur, cube) else {
                    break;
                };
                cur[ax * n + f] -= sg;
                vertices.push(face_centre(ax, f));
                steps[ax] += sg;
                cube = next;
            }
            if !closed {
                broken += 1;
            }
            let mut winding = [0i64; 3];
            for d in 0..3 {
                winding[d] = steps[d].div_euclid(g.size(d) as i64);
            }
            lines.push(Polyline { vertices, charge: 1, winding, closed });
        }
    }
    (lines, broken)
}
