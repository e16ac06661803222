//! Diffusion (symmetric interior penalty) and convection forms of the heat problem.

use super::data::{ProblemData, ThermalBc};
use super::local::{add_outer, pair_dofs, ScalarVals};
use super::penalty::{penalty_sigma, PenaltyConfig};
use crate::error::{Error, Result};
use crate::fespace::{face_points, simplex_rule, Field, Space, SpaceKind};
use crate::geom::{self, Mat3};
use crate::mesh::Mesh;
use crate::sparse::{CsrMatrix, Triplets};

fn check_scalar(space: &Space) -> Result<()> {
    if space.kind != SpaceKind::DgScalar {
        return Err(Error::SpaceMismatch("heat forms need a scalar DG space".into()));
    }
    Ok(())
}

fn trace(m: &Mat3, dim: usize) -> f64 {
    (0..dim).map(|i| m[i][i]).sum()
}

/// Per-element trace of the conductivity, used by the penalty `σ`.
pub fn conductivity_trace(mesh: &Mesh, data: &ProblemData) -> Result<Vec<f64>> {
    Ok(data.conductivity_tensors(mesh)?.iter().map(|m| trace(m, mesh.dim)).collect())
}

/// Symmetric interior penalty form `A_h` and the load of its boundary data.
///
/// Dirichlet faces carry the SIP boundary terms with `T_D` moved to the
/// load; Robin faces carry `γ ∫ T S` and `γ T_ext ∫ S`.
pub fn assemble_ah(space: &Space, data: &ProblemData, pen: &PenaltyConfig) -> Result<(CsrMatrix, Vec<f64>)> {
    check_scalar(space)?;
    pen.validate()?;
    let mesh = &*space.mesh;
    let d = mesh.dim;
    let theta = data.conductivity_tensors(mesh)?;
    let theta_bar: Vec<f64> = theta.iter().map(|m| trace(m, d)).collect();
    let n = space.dofs_per_element;
    let l = space.degree;
    let mut trip = Triplets::new(space.total_dofs, space.total_dofs);
    let mut rhs = vec![0.0; space.total_dofs];
    let mut sv = ScalarVals::new(n);
    let mut sm = ScalarVals::new(n);

    let vrule = simplex_rule(d, 2 * l)?;
    let mut block = vec![0.0; n * n];
    for k in 0..mesh.n_elements() {
        block.iter_mut().for_each(|b| *b = 0.0);
        let det = mesh.map(k).det;
        for q in 0..vrule.len() {
            sv.eval(space, k, &vrule.points[q]);
            let w = vrule.weights[q] * det;
            for i in 0..n {
                let tg = geom::mat_vec(&theta[k], &sv.g[i]);
                for j in 0..n {
                    block[i * n + j] += w * geom::dot(&tg, &sv.g[j]);
                }
            }
        }
        let dofs = space.element_dofs(k);
        trip.push_block(&dofs, &dofs, &block);
    }

    let frule = simplex_rule(d - 1, 2 * l + 2)?;
    let mut jump = vec![0.0; 2 * n];
    let mut flux = vec![0.0; 2 * n];
    let mut fblock = vec![0.0; 4 * n * n];
    for &f in mesh.interior_faces() {
        let face = &mesh.faces[f];
        let (kp, km) = (face.elem_plus, face.elem_minus.unwrap());
        let sigma = penalty_sigma(mesh, f, pen, &theta_bar, l);
        let fp = face_points(mesh, f, &frule);
        fblock.iter_mut().for_each(|b| *b = 0.0);
        for q in 0..fp.x.len() {
            sv.eval(space, kp, &fp.xi_plus[q]);
            sm.eval(space, km, &fp.xi_minus[q]);
            let tn_p = geom::mat_vec(&theta[kp], &face.normal);
            let tn_m = geom::mat_vec(&theta[km], &face.normal);
            for i in 0..n {
                jump[i] = sv.v[i];
                jump[n + i] = -sm.v[i];
                flux[i] = 0.5 * geom::dot(&tn_p, &sv.g[i]);
                flux[n + i] = 0.5 * geom::dot(&tn_m, &sm.g[i]);
            }
            let w = fp.weights[q];
            add_outer(&mut fblock, &jump, &flux, -w);
            add_outer(&mut fblock, &flux, &jump, -w);
            add_outer(&mut fblock, &jump, &jump, sigma * w);
        }
        let dofs = pair_dofs(space, kp, km);
        trip.push_block(&dofs, &dofs, &fblock);
    }

    let mut bblock = vec![0.0; n * n];
    for &f in mesh.boundary_faces() {
        let face = &mesh.faces[f];
        let k = face.elem_plus;
        let tag = face.boundary_tag.as_deref().unwrap_or_default();
        let bc = data.bcs.thermal_bc(tag)?;
        let fp = face_points(mesh, f, &frule);
        let dofs = space.element_dofs(k);
        bblock.iter_mut().for_each(|b| *b = 0.0);
        match bc {
            ThermalBc::DirichletTemperature(td) => {
                let sigma = penalty_sigma(mesh, f, pen, &theta_bar, l);
                let tn = geom::mat_vec(&theta[k], &face.normal);
                for q in 0..fp.x.len() {
                    sv.eval(space, k, &fp.xi_plus[q]);
                    let fl: Vec<f64> = (0..n).map(|i| geom::dot(&tn, &sv.g[i])).collect();
                    let w = fp.weights[q];
                    add_outer(&mut bblock, &sv.v, &fl, -w);
                    add_outer(&mut bblock, &fl, &sv.v, -w);
                    add_outer(&mut bblock, &sv.v, &sv.v, sigma * w);
                    let tdv = td(&fp.x[q]);
                    for i in 0..n {
                        rhs[dofs[i]] += w * tdv * (sigma * sv.v[i] - fl[i]);
                    }
                }
            }
            ThermalBc::Robin { gamma, t_ext } => {
                for q in 0..fp.x.len() {
                    sv.eval(space, k, &fp.xi_plus[q]);
                    let w = fp.weights[q];
                    add_outer(&mut bblock, &sv.v, &sv.v, gamma * w);
                    for i in 0..n {
                        rhs[dofs[i]] += w * gamma * t_ext * sv.v[i];
                    }
                }
            }
        }
        trip.push_block(&dofs, &dofs, &bblock);
    }
    Ok((trip.to_csr(), rhs))
}

/// Upwind convection form with the skew-symmetrising correction, for the
/// advecting velocity `u`, and the load of inflow Dirichlet data.
///
/// Dirichlet faces carry `½ ∫ (|u·n| − u·n) (T − T_D) S`; Robin faces carry
/// `−½ ∫ (u·n) T S`. Normal-jump terms of `u` are skipped for
/// Raviart–Thomas velocities.
pub fn assemble_ch(u: &Field, space: &Space, data: &ProblemData) -> Result<(CsrMatrix, Vec<f64>)> {
    check_scalar(space)?;
    if !u.space.is_vector() {
        return Err(Error::SpaceMismatch("convection needs a vector velocity field".into()));
    }
    if !std::sync::Arc::ptr_eq(&u.space.mesh, &space.mesh) {
        return Err(Error::SpaceMismatch("velocity and temperature live on different meshes".into()));
    }
    let mesh = &*space.mesh;
    let d = mesh.dim;
    let n = space.dofs_per_element;
    let l = space.degree;
    let lu = u.space.polynomial_degree();
    let deg = (2 * l + 2).max(2 * l + lu);
    let dg_velocity = u.space.kind == SpaceKind::DgVector;
    let mut trip = Triplets::new(space.total_dofs, space.total_dofs);
    let mut rhs = vec![0.0; space.total_dofs];
    let mut sv = ScalarVals::new(n);
    let mut sm = ScalarVals::new(n);

    let vrule = simplex_rule(d, deg)?;
    let mut block = vec![0.0; n * n];
    let mut adv = vec![0.0; n];
    for k in 0..mesh.n_elements() {
        block.iter_mut().for_each(|b| *b = 0.0);
        let det = mesh.map(k).det;
        for q in 0..vrule.len() {
            let xi = &vrule.points[q];
            sv.eval(space, k, xi);
            let (uv, div) = u.eval_vector(k, xi);
            for j in 0..n {
                adv[j] = geom::dot(&uv, &sv.g[j]) + 0.5 * div * sv.v[j];
            }
            add_outer(&mut block, &sv.v, &adv, vrule.weights[q] * det);
        }
        let dofs = space.element_dofs(k);
        trip.push_block(&dofs, &dofs, &block);
    }

    let frule = simplex_rule(d - 1, deg)?;
    let mut jump = vec![0.0; 2 * n];
    let mut avg = vec![0.0; 2 * n];
    let mut fblock = vec![0.0; 4 * n * n];
    for &f in mesh.interior_faces() {
        let face = &mesh.faces[f];
        let (kp, km) = (face.elem_plus, face.elem_minus.unwrap());
        let fp = face_points(mesh, f, &frule);
        fblock.iter_mut().for_each(|b| *b = 0.0);
        for q in 0..fp.x.len() {
            sv.eval(space, kp, &fp.xi_plus[q]);
            sm.eval(space, km, &fp.xi_minus[q]);
            let up = u.eval_vector(kp, &fp.xi_plus[q]).0;
            let um = u.eval_vector(km, &fp.xi_minus[q]).0;
            let unp = geom::dot(&up, &face.normal);
            let unm = geom::dot(&um, &face.normal);
            let avg_un = 0.5 * (unp + unm);
            for i in 0..n {
                jump[i] = sv.v[i];
                jump[n + i] = -sm.v[i];
                avg[i] = 0.5 * sv.v[i];
                avg[n + i] = 0.5 * sm.v[i];
            }
            let w = fp.weights[q];
            add_outer(&mut fblock, &avg, &jump, -avg_un * w);
            add_outer(&mut fblock, &jump, &jump, 0.5 * avg_un.abs() * w);
            if dg_velocity {
                // −½ [u]_n {T S}
                let c = -0.25 * (unp - unm) * w;
                let nn = 2 * n;
                for i in 0..n {
                    for j in 0..n {
                        fblock[i * nn + j] += c * sv.v[i] * sv.v[j];
                        fblock[(n + i) * nn + n + j] += c * sm.v[i] * sm.v[j];
                    }
                }
            }
        }
        let dofs = pair_dofs(space, kp, km);
        trip.push_block(&dofs, &dofs, &fblock);
    }

    let mut bblock = vec![0.0; n * n];
    for &f in mesh.boundary_faces() {
        let face = &mesh.faces[f];
        let k = face.elem_plus;
        let tag = face.boundary_tag.as_deref().unwrap_or_default();
        let bc = data.bcs.thermal_bc(tag)?;
        let fp = face_points(mesh, f, &frule);
        let dofs = space.element_dofs(k);
        bblock.iter_mut().for_each(|b| *b = 0.0);
        for q in 0..fp.x.len() {
            sv.eval(space, k, &fp.xi_plus[q]);
            let un = geom::dot(&u.eval_vector(k, &fp.xi_plus[q]).0, &face.normal);
            let w = fp.weights[q];
            match bc {
                ThermalBc::DirichletTemperature(td) => {
                    let c = 0.5 * (un.abs() - un);
                    add_outer(&mut bblock, &sv.v, &sv.v, c * w);
                    if c != 0.0 {
                        let tdv = td(&fp.x[q]);
                        for i in 0..n {
                            rhs[dofs[i]] += c * w * tdv * sv.v[i];
                        }
                    }
                }
                ThermalBc::Robin { .. } => add_outer(&mut bblock, &sv.v, &sv.v, -0.5 * un * w),
            }
        }
        trip.push_block(&dofs, &dofs, &bblock);
    }
    Ok((trip.to_csr(), rhs))
}

/// Load `∫ g S` of the heat source.
pub fn assemble_heat_load(space: &Space, data: &ProblemData) -> Result<Vec<f64>> {
    check_scalar(space)?;
    let mesh = &*space.mesh;
    let n = space.dofs_per_element;
    let rule = simplex_rule(mesh.dim, 2 * space.degree + 2)?;
    let mut rhs = vec![0.0; space.total_dofs];
    let mut sv = ScalarVals::new(n);
    for k in 0..mesh.n_elements() {
        let det = mesh.map(k).det;
        for q in 0..rule.len() {
            let xi = &rule.points[q];
            space.eval_scalar(k, xi, &mut sv.v, None);
            let gv = (data.g)(&mesh.to_physical(k, xi)) * rule.weights[q] * det;
            for i in 0..n {
                rhs[k * n + i] += gv * sv.v[i];
            }
        }
    }
    Ok(rhs)
}
