//! Projection of callables onto discrete spaces.

use std::sync::Arc;

use super::poly::MAX_DEGREE;
use super::quadrature::{reference_measure, simplex_rule};
use super::rt::bernstein;
use super::space::{Field, Space, SpaceKind};
use crate::error::{Error, Result};
use crate::geom::{self, Point};

/// Element-wise L² projection of a scalar callable onto a DG scalar space.
pub fn interpolate_scalar<F: Fn(&Point) -> f64>(space: &Arc<Space>, f: F) -> Result<Field> {
    if space.kind != SpaceKind::DgScalar {
        return Err(Error::SpaceMismatch("scalar interpolation needs a DG scalar space".into()));
    }
    let mesh = &space.mesh;
    let n = space.dofs_per_element;
    let rule = simplex_rule(mesh.dim, 2 * space.degree.max(1) + 4)?;
    let mut field = Field::zeros(space.clone());
    let mut vals = vec![0.0; n];
    for k in 0..mesh.n_elements() {
        let det = mesh.map(k).det;
        for q in 0..rule.len() {
            let x = mesh.to_physical(k, &rule.points[q]);
            let fx = f(&x);
            space.eval_scalar(k, &rule.points[q], &mut vals, None);
            let w = rule.weights[q] * det * fx;
            for i in 0..n {
                field.coeffs[k * n + i] += w * vals[i];
            }
        }
    }
    Ok(field)
}

/// Interpolation of a vector callable: element-wise L² projection for DG
/// vector spaces, face and interior moments for Raviart–Thomas spaces.
pub fn interpolate_vector<F: Fn(&Point) -> Point>(space: &Arc<Space>, f: F) -> Result<Field> {
    match space.kind {
        SpaceKind::DgVector => interpolate_dg_vector(space, f),
        SpaceKind::Rt => interpolate_rt(space, f),
        SpaceKind::DgScalar => Err(Error::SpaceMismatch("vector interpolation needs a vector space".into())),
    }
}

fn interpolate_dg_vector<F: Fn(&Point) -> Point>(space: &Arc<Space>, f: F) -> Result<Field> {
    let mesh = &space.mesh;
    let d = mesh.dim;
    let ns = space.scalar_block();
    let n = space.dofs_per_element;
    let basis = space.dg_basis().unwrap();
    let rule = simplex_rule(d, 2 * space.degree.max(1) + 4)?;
    let mut field = Field::zeros(space.clone());
    let mut vals = vec![0.0; ns];
    for k in 0..mesh.n_elements() {
        let det = mesh.map(k).det;
        let s = 1.0 / det.sqrt();
        for q in 0..rule.len() {
            let x = mesh.to_physical(k, &rule.points[q]);
            let fx = f(&x);
            basis.eval(&rule.points[q], &mut vals, None);
            let w = rule.weights[q] * det * s;
            for c in 0..d {
                for j in 0..ns {
                    field.coeffs[k * n + c * ns + j] += w * fx[c] * vals[j];
                }
            }
        }
    }
    Ok(field)
}

fn interpolate_rt<F: Fn(&Point) -> Point>(space: &Arc<Space>, f: F) -> Result<Field> {
    let mesh = &space.mesh;
    let d = mesh.dim;
    let b = space.rt_basis().unwrap();
    let nf = b.dofs_per_face();
    let ni = b.n_interior;
    let mut field = Field::zeros(space.clone());
    let rule = simplex_rule(d - 1, 2 * space.degree + 4)?;
    let wscale = 1.0 / reference_measure(d - 1);
    for (fi, face) in mesh.faces.iter().enumerate() {
        for q in 0..rule.len() {
            let mu = rule.barycentric(q);
            let mut x = [0.0; 3];
            for (i, &v) in face.vertices.iter().enumerate() {
                x = geom::add(&x, &geom::scale(&mesh.vertices[v], mu[i]));
            }
            let vn = geom::dot(&f(&x), &face.normal);
            let w = rule.weights[q] * face.measure * wscale * vn;
            for (a, alpha) in b.face_alphas.iter().enumerate() {
                field.coeffs[fi * nf + a] += w * bernstein(alpha, &mu);
            }
        }
    }
    if ni > 0 {
        let off = mesh.n_faces() * nf;
        for k in 0..mesh.n_elements() {
            let map = mesh.map(k);
            let moments = b.interior_moments(|xi| {
                let x = mesh.to_physical(k, xi);
                geom::scale(&geom::mat_vec(&map.jac_inv, &f(&x)), map.det)
            })?;
            field.coeffs[off + k * ni..off + (k + 1) * ni].copy_from_slice(&moments);
        }
    }
    let _ = MAX_DEGREE;
    Ok(field)
}
