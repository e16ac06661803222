//! Monomials and the orthonormal reference basis of discontinuous spaces.

use super::quadrature::simplex_rule;
use crate::error::{Error, Result};
use crate::geom::Point;

/// Largest polynomial degree supported by the spaces.
pub const MAX_DEGREE: usize = 6;

/// All multi-indices of `n_vars` variables with total degree exactly `total`,
/// in lexicographically decreasing order of the first entry.
pub fn multi_indices(n_vars: usize, total: usize) -> Vec<Vec<usize>> {
    if n_vars == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if n_vars == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in multi_indices(n_vars - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exponents of all monomials in `dim` variables of total degree at most
/// `degree`, ordered by degree.
pub fn exponents(dim: usize, degree: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for t in 0..=degree {
        for a in multi_indices(dim, t) {
            let mut e = [0; 3];
            e[..dim].copy_from_slice(&a);
            out.push(e);
        }
    }
    out
}

/// Exponents with total degree exactly `degree`.
pub fn exponents_exact(dim: usize, degree: usize) -> Vec<[usize; 3]> {
    multi_indices(dim, degree)
        .into_iter()
        .map(|a| {
            let mut e = [0; 3];
            e[..dim].copy_from_slice(&a);
            e
        })
        .collect()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Power table `pw[a][k] = t[a]^k` for `k ≤ degree`.
fn powers(t: &Point, degree: usize) -> [[f64; MAX_DEGREE + 3]; 3] {
    let mut pw = [[1.0; MAX_DEGREE + 3]; 3];
    for a in 0..3 {
        for k in 1..=degree.min(MAX_DEGREE + 2) {
            pw[a][k] = pw[a][k - 1] * t[a];
        }
    }
    pw
}

/// Evaluates monomials `t^e` and, optionally, their gradients.
pub fn eval_monomials(exps: &[[usize; 3]], t: &Point, vals: &mut [f64], grads: Option<&mut [Point]>) {
    let deg = exps.iter().map(|e| e[0] + e[1] + e[2]).max().unwrap_or(0);
    let pw = powers(t, deg);
    for (i, e) in exps.iter().enumerate() {
        vals[i] = pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]];
    }
    if let Some(g) = grads {
        for (i, e) in exps.iter().enumerate() {
            let mut gi = [0.0; 3];
            for a in 0..3 {
                if e[a] > 0 {
                    let mut p = e[a] as f64;
                    for b in 0..3 {
                        p *= if a == b { pw[b][e[b] - 1] } else { pw[b][e[b]] };
                    }
                    gi[a] = p;
                }
            }
            g[i] = gi;
        }
    }
}

/// Centroid of the reference simplex.
pub fn reference_centroid(dim: usize) -> Point {
    let c = 1.0 / (dim + 1) as f64;
    let mut p = [0.0; 3];
    for x in p.iter_mut().take(dim) {
        *x = c;
    }
    p
}

/// Orthonormal basis of `P^degree` on the reference simplex, obtained by
/// twice-iterated modified Gram–Schmidt on centred monomials.
#[derive(Clone, Debug)]
pub struct DgBasis {
    pub dim: usize,
    pub degree: usize,
    exps: Vec<[usize; 3]>,
    /// `coef[k * n + j]`: coefficient of monomial `j` in basis function `k`.
    coef: Vec<f64>,
    center: Point,
}

impl DgBasis {
    pub fn new(dim: usize, degree: usize) -> Result<DgBasis> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree { degree, max: MAX_DEGREE });
        }
        let exps = exponents(dim, degree);
        let n = exps.len();
        let center = reference_centroid(dim);
        let rule = simplex_rule(dim, 2 * degree)?;
        let nq = rule.len();
        let mut cols = vec![vec![0.0; nq]; n];
        let mut vals = vec![0.0; n];
        for q in 0..nq {
            let t = sub3(&rule.points[q], &center);
            eval_monomials(&exps, &t, &mut vals, None);
            let sw = rule.weights[q].sqrt();
            for j in 0..n {
                cols[j][q] = sw * vals[j];
            }
        }
        let mut coef = vec![0.0; n * n];
        let mut q_vecs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = cols[k].clone();
            let mut c = vec![0.0; n];
            c[k] = 1.0;
            for _pass in 0..2 {
                for i in 0..k {
                    let r: f64 = v.iter().zip(&q_vecs[i]).map(|(a, b)| a * b).sum();
                    for (x, y) in v.iter_mut().zip(&q_vecs[i]) {
                        *x -= r * y;
                    }
                    for j in 0..n {
                        c[j] -= r * coef[i * n + j];
                    }
                }
            }
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= nv;
            }
            for j in 0..n {
                coef[k * n + j] = c[j] / nv;
            }
            q_vecs.push(v);
        }
        Ok(DgBasis { dim, degree, exps, coef, center })
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Values (and reference gradients) of all basis functions at `xi`.
    pub fn eval(&self, xi: &Point, vals: &mut [f64], grads: Option<&mut [Point]>) {
        let n = self.len();
        let t = sub3(xi, &self.center);
        let mut mv = [0.0; 84];
        let mut mg = [[0.0; 3]; 84];
        let want_grad = grads.is_some();
        eval_monomials(&self.exps, &t, &mut mv[..n], if want_grad { Some(&mut mg[..n]) } else { None });
        for k in 0..n {
            let row = &self.coef[k * n..(k + 1) * n];
            vals[k] = row.iter().zip(&mv[..n]).map(|(a, b)| a * b).sum();
        }
        if let Some(g) = grads {
            for k in 0..n {
                let row = &self.coef[k * n..(k + 1) * n];
                let mut gk = [0.0; 3];
                for j in 0..n {
                    for a in 0..3 {
                        gk[a] += row[j] * mg[j][a];
                    }
                }
                g[k] = gk;
            }
        }
    }
}

fn sub3(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
