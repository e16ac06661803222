//! Raviart–Thomas elements `RT^m = [P^m]^d + x·P̃^m` on the reference simplex.
//!
//! Degrees of freedom, in local order:
//! * for every local face `f` (opposite vertex `f`), the moments
//!   `∫_f (v·n̂_f) B_α` against the Bernstein polynomials of degree `m` in the
//!   barycentric coordinates of the face vertices (taken in increasing local
//!   order);
//! * the interior moments `∫ v_c t^β` for `c < d`, `|β| ≤ m − 1`.

use faer::prelude::*;
use faer::Mat;

use super::poly::{binomial, exponents, exponents_exact, multi_indices, reference_centroid};
use super::quadrature::{reference_measure, simplex_rule};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::local_face_vertices;

/// Largest supported Raviart–Thomas degree.
pub const MAX_RT_DEGREE: usize = 5;

#[derive(Clone, Debug)]
enum RawFn {
    /// `e_c t^e`.
    Comp(usize, [usize; 3]),
    /// `t · t^e` with `|e| = m`.
    Radial([usize; 3]),
}

#[derive(Clone, Debug)]
pub struct RtBasis {
    pub dim: usize,
    pub degree: usize,
    raw: Vec<RawFn>,
    /// `coef[k * n + j]`: coefficient of raw function `j` in basis function `k`.
    coef: Vec<f64>,
    center: Point,
    /// Bernstein multi-indices of a face, in local dof order.
    pub face_alphas: Vec<Vec<usize>>,
    pub n_interior: usize,
}

/// Vertices of the reference simplex.
pub fn reference_vertex(dim: usize, v: usize) -> Point {
    let mut p = [0.0; 3];
    if v > 0 {
        p[v - 1] = 1.0;
    }
    let _ = dim;
    p
}

/// Outward unit normal and measure of reference face `f`.
pub fn reference_face(dim: usize, f: usize) -> (Point, f64) {
    let mut n = [0.0; 3];
    if f == 0 {
        let s = 1.0 / (dim as f64).sqrt();
        for x in n.iter_mut().take(dim) {
            *x = s;
        }
        let meas = if dim == 2 { 2f64.sqrt() } else { 3f64.sqrt() / 2.0 };
        (n, meas)
    } else {
        n[f - 1] = -1.0;
        (n, reference_measure(dim - 1))
    }
}

/// Bernstein polynomial `B_α(μ)` in barycentric coordinates `μ`.
pub fn bernstein(alpha: &[usize], mu: &[f64]) -> f64 {
    let m: usize = alpha.iter().sum();
    let mut coef = 1.0;
    let mut rem = m;
    for &a in alpha {
        coef *= binomial(rem, a) as f64;
        rem -= a;
    }
    let mut v = coef;
    for (&a, &x) in alpha.iter().zip(mu) {
        v *= x.powi(a as i32);
    }
    v
}

impl RtBasis {
    pub fn new(dim: usize, degree: usize) -> Result<RtBasis> {
        if degree > MAX_RT_DEGREE {
            return Err(Error::UnsupportedDegree { degree, max: MAX_RT_DEGREE });
        }
        let m = degree;
        let mut raw = Vec::new();
        for c in 0..dim {
            for e in exponents(dim, m) {
                raw.push(RawFn::Comp(c, e));
            }
        }
        for e in exponents_exact(dim, m) {
            raw.push(RawFn::Radial(e));
        }
        let n = raw.len();
        let center = reference_centroid(dim);
        let face_alphas = multi_indices(dim, m);
        let interior_exps = if m == 0 { Vec::new() } else { exponents(dim, m - 1) };
        let n_interior = dim * interior_exps.len();
        if (dim + 1) * face_alphas.len() + n_interior != n {
            return Err(Error::InvalidArgument("inconsistent Raviart–Thomas dof count".into()));
        }
        let mut basis = RtBasis { dim, degree, raw, coef: vec![0.0; n * n], center, face_alphas, n_interior };

        // Dof matrix: dofs[i][j] = dof_i(raw_j).
        let mut dofs = Mat::<f64>::zeros(n, n);
        let mut vals = vec![[0.0; 3]; n];
        let mut divs = vec![0.0; n];
        let face_rule = simplex_rule(dim - 1, 2 * m + 2)?;
        let mut row = 0;
        for f in 0..=dim {
            let (normal, meas) = reference_face(dim, f);
            let verts: Vec<Point> = local_face_vertices(dim, f).iter().map(|&v| reference_vertex(dim, v)).collect();
            let wscale = meas / reference_measure(dim - 1);
            for alpha in &basis.face_alphas {
                for q in 0..face_rule.len() {
                    let mu = face_rule.barycentric(q);
                    let mut x = [0.0; 3];
                    for (i, v) in verts.iter().enumerate() {
                        for a in 0..3 {
                            x[a] += mu[i] * v[a];
                        }
                    }
                    basis.eval_raw(&x, &mut vals, &mut divs);
                    let w = face_rule.weights[q] * wscale * bernstein(alpha, &mu);
                    for j in 0..n {
                        let vn = vals[j][0] * normal[0] + vals[j][1] * normal[1] + vals[j][2] * normal[2];
                        dofs[(row, j)] += w * vn;
                    }
                }
                row += 1;
            }
        }
        let cell_rule = simplex_rule(dim, 2 * m + 2)?;
        for c in 0..dim {
            for e in &interior_exps {
                for q in 0..cell_rule.len() {
                    let x = cell_rule.points[q];
                    basis.eval_raw(&x, &mut vals, &mut divs);
                    let t = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
                    let w = cell_rule.weights[q] * t[0].powi(e[0] as i32) * t[1].powi(e[1] as i32) * t[2].powi(e[2] as i32);
                    for j in 0..n {
                        dofs[(row, j)] += w * vals[j][c];
                    }
                }
                row += 1;
            }
        }
        let inv = dofs.partial_piv_lu().solve(Mat::<f64>::identity(n, n));
        for k in 0..n {
            for j in 0..n {
                basis.coef[k * n + j] = inv[(j, k)];
            }
        }
        Ok(basis)
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn dofs_per_face(&self) -> usize {
        self.face_alphas.len()
    }

    fn eval_raw(&self, xi: &Point, vals: &mut [Point], divs: &mut [f64]) {
        let t = [xi[0] - self.center[0], xi[1] - self.center[1], xi[2] - self.center[2]];
        let d = self.dim;
        for (j, r) in self.raw.iter().enumerate() {
            match r {
                RawFn::Comp(c, e) => {
                    let mono = t[0].powi(e[0] as i32) * t[1].powi(e[1] as i32) * t[2].powi(e[2] as i32);
                    let mut v = [0.0; 3];
                    v[*c] = mono;
                    vals[j] = v;
                    divs[j] = if e[*c] > 0 {
                        let mut ee = *e;
                        ee[*c] -= 1;
                        e[*c] as f64 * t[0].powi(ee[0] as i32) * t[1].powi(ee[1] as i32) * t[2].powi(ee[2] as i32)
                    } else {
                        0.0
                    };
                }
                RawFn::Radial(e) => {
                    let mono = t[0].powi(e[0] as i32) * t[1].powi(e[1] as i32) * t[2].powi(e[2] as i32);
                    let mut v = [0.0; 3];
                    for a in 0..d {
                        v[a] = t[a] * mono;
                    }
                    vals[j] = v;
                    divs[j] = (d + self.degree) as f64 * mono;
                }
            }
        }
    }

    /// Reference values and divergences of all basis functions at `xi`.
    pub fn eval(&self, xi: &Point, vals: &mut [Point], divs: &mut [f64]) {
        let n = self.len();
        let mut rv = vec![[0.0; 3]; n];
        let mut rd = vec![0.0; n];
        self.eval_raw(xi, &mut rv, &mut rd);
        for k in 0..n {
            let row = &self.coef[k * n..(k + 1) * n];
            let mut v = [0.0; 3];
            let mut dv = 0.0;
            for j in 0..n {
                let c = row[j];
                v[0] += c * rv[j][0];
                v[1] += c * rv[j][1];
                v[2] += c * rv[j][2];
                dv += c * rd[j];
            }
            vals[k] = v;
            divs[k] = dv;
        }
    }
}

impl RtBasis {
    /// Exponents `β` of the interior moments (per component).
    pub fn interior_exponents(&self) -> Vec<[usize; 3]> {
        if self.degree == 0 {
            Vec::new()
        } else {
            exponents(self.dim, self.degree - 1)
        }
    }

    /// Interior moments `∫ v̂_c t^β` of a reference vector field.
    pub fn interior_moments<F: Fn(&Point) -> Point>(&self, vhat: F) -> Result<Vec<f64>> {
        let exps = self.interior_exponents();
        let rule = simplex_rule(self.dim, 2 * self.degree + 4)?;
        let mut out = vec![0.0; self.n_interior];
        for q in 0..rule.len() {
            let x = rule.points[q];
            let v = vhat(&x);
            let t = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
            let mut row = 0;
            for c in 0..self.dim {
                for e in &exps {
                    let mono = t[0].powi(e[0] as i32) * t[1].powi(e[1] as i32) * t[2].powi(e[2] as i32);
                    out[row] += rule.weights[q] * v[c] * mono;
                    row += 1;
                }
            }
        }
        Ok(out)
    }
}
