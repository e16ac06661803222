//! Physical quadrature points on mesh faces with the matching reference
//! coordinates in each neighbouring element.

use super::quadrature::{reference_measure, QuadratureRule};
use crate::geom::{self, Point};
use crate::mesh::Mesh;

#[derive(Clone, Debug)]
pub struct FacePoints {
    pub x: Vec<Point>,
    pub weights: Vec<f64>,
    pub xi_plus: Vec<Point>,
    /// Empty on boundary faces.
    pub xi_minus: Vec<Point>,
}

/// Maps a rule on the reference `(dim − 1)`-simplex onto face `f`.
pub fn face_points(mesh: &Mesh, f: usize, rule: &QuadratureRule) -> FacePoints {
    let face = &mesh.faces[f];
    let wscale = face.measure / reference_measure(mesh.dim - 1);
    let n = rule.len();
    let mut out =
        FacePoints { x: Vec::with_capacity(n), weights: Vec::with_capacity(n), xi_plus: Vec::with_capacity(n), xi_minus: Vec::new() };
    for q in 0..n {
        let mu = rule.barycentric(q);
        let mut x = [0.0; 3];
        for (i, &v) in face.vertices.iter().enumerate() {
            x = geom::add(&x, &geom::scale(&mesh.vertices[v], mu[i]));
        }
        out.x.push(x);
        out.weights.push(rule.weights[q] * wscale);
        out.xi_plus.push(mesh.to_reference(face.elem_plus, &x));
        if let Some(m) = face.elem_minus {
            out.xi_minus.push(mesh.to_reference(m, &x));
        }
    }
    out
}
