//! Quadrature on reference simplices by collapsed (Duffy) tensor products of
//! Gauss–Legendre rules.
//!
//! The reference simplex of dimension `d` has vertices `0, e_1, …, e_d`.

use crate::error::{Error, Result};
use crate::geom::Point;

/// Largest exactness degree accepted by [`quadrature`].
pub const MAX_QUADRATURE_DEGREE: usize = 14;

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub dim: usize,
    /// Reference coordinates; unused trailing entries are zero.
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates of point `q` (length `dim + 1`).
    pub fn barycentric(&self, q: usize) -> Vec<f64> {
        let p = &self.points[q];
        let mut b = Vec::with_capacity(self.dim + 1);
        b.push(1.0 - p[..self.dim].iter().sum::<f64>());
        b.extend_from_slice(&p[..self.dim]);
        b
    }
}

/// Rule on the reference simplex of dimension `dim` (0 to 3), exact for
/// polynomials of total degree `degree`.
pub fn quadrature(dim: usize, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::UnsupportedDegree { degree, max: MAX_QUADRATURE_DEGREE });
    }
    simplex_rule(dim, degree)
}

/// Same as [`quadrature`] without the degree cap (used for error norms).
pub fn simplex_rule(dim: usize, degree: usize) -> Result<QuadratureRule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match dim {
        0 => {
            points.push([0.0; 3]);
            weights.push(1.0);
        }
        1 => {
            let (x, w) = gauss_legendre((degree + 2) / 2);
            for i in 0..x.len() {
                points.push([x[i], 0.0, 0.0]);
                weights.push(w[i]);
            }
        }
        2 => {
            // The collapsed direction carries one extra power of (1 - b).
            let (xa, wa) = gauss_legendre((degree + 2) / 2);
            let (xb, wb) = gauss_legendre((degree + 3) / 2);
            for j in 0..xb.len() {
                for i in 0..xa.len() {
                    let b = xb[j];
                    points.push([xa[i] * (1.0 - b), b, 0.0]);
                    weights.push(wa[i] * wb[j] * (1.0 - b));
                }
            }
        }
        3 => {
            let (xa, wa) = gauss_legendre((degree + 2) / 2);
            let (xb, wb) = gauss_legendre((degree + 3) / 2);
            let (xc, wc) = gauss_legendre((degree + 4) / 2);
            for k in 0..xc.len() {
                for j in 0..xb.len() {
                    for i in 0..xa.len() {
                        let (a, b, c) = (xa[i], xb[j], xc[k]);
                        points.push([a * (1.0 - b) * (1.0 - c), b * (1.0 - c), c]);
                        weights.push(wa[i] * wb[j] * wc[k] * (1.0 - b) * (1.0 - c) * (1.0 - c));
                    }
                }
            }
        }
        _ => return Err(Error::InvalidArgument(format!("no quadrature for dimension {dim}"))),
    }
    Ok(QuadratureRule { dim, points, weights, degree })
}

/// `n`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = n.max(1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// Measure of the reference simplex of dimension `dim`.
pub fn reference_measure(dim: usize) -> f64 {
    match dim {
        0 | 1 => 1.0,
        2 => 0.5,
        _ => 1.0 / 6.0,
    }
}
