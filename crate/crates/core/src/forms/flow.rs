//! Mass, divergence and penalty forms of the flow problem.

use super::data::{FlowBc, ProblemData};
use super::local::{add_outer, pair_dofs, ScalarVals, VectorVals};
use super::penalty::{penalty_rho, penalty_xi, PenaltyConfig};
use crate::error::{Error, Result};
use crate::fespace::{bernstein, face_points, reference_measure, simplex_rule, Field, Space, SpaceKind};
use crate::geom::{self, Mat3, Point};
use crate::sparse::{CsrMatrix, Triplets};

fn check_velocity(space: &Space) -> Result<()> {
    if !space.is_vector() {
        return Err(Error::SpaceMismatch("flow forms need a vector velocity space".into()));
    }
    Ok(())
}

fn check_pressure(space: &Space) -> Result<()> {
    if space.kind != SpaceKind::DgScalar {
        return Err(Error::SpaceMismatch("pressure space must be scalar DG".into()));
    }
    Ok(())
}

/// Weighted velocity mass `∫ c(x) (M ψ_j)·ψ_i` with an element-wise
/// constant tensor `M` and a pointwise scalar weight `c`.
fn weighted_mass<C>(space: &Space, tensor: Option<&[Mat3]>, mut coef: C) -> Result<CsrMatrix>
where
    C: FnMut(usize, &Point) -> Result<f64>,
{
    let mesh = &*space.mesh;
    let n = space.dofs_per_element;
    let rule = simplex_rule(mesh.dim, 2 * space.polynomial_degree() + 2)?;
    let mut vv = VectorVals::new(n);
    let mut trip = Triplets::new(space.total_dofs, space.total_dofs);
    let mut block = vec![0.0; n * n];
    for k in 0..mesh.n_elements() {
        block.iter_mut().for_each(|b| *b = 0.0);
        let det = mesh.map(k).det;
        for q in 0..rule.len() {
            let xi = &rule.points[q];
            let c = coef(k, xi)? * rule.weights[q] * det;
            if c == 0.0 {
                continue;
            }
            vv.eval(space, k, xi);
            for j in 0..n {
                let mj = match tensor {
                    Some(t) => geom::mat_vec(&t[k], &vv.v[j]),
                    None => vv.v[j],
                };
                for i in 0..n {
                    block[i * n + j] += c * geom::dot(&mj, &vv.v[i]);
                }
            }
        }
        let dofs = space.element_dofs(k);
        trip.push_block(&dofs, &dofs, &block);
    }
    Ok(trip.to_csr())
}

/// Plain velocity mass matrix `(u, v)`.
pub fn assemble_velocity_mass(space: &Space) -> Result<CsrMatrix> {
    check_velocity(space)?;
    weighted_mass(space, None, |_, _| Ok(1.0))
}

/// `M_ν(T; u, v) = (ν(T) K⁻¹ u, v)` with `ν(T)` evaluated at quadrature points.
pub fn assemble_mnu(t: &Field, space: &Space, data: &ProblemData) -> Result<CsrMatrix> {
    check_velocity(space)?;
    if t.space.kind != SpaceKind::DgScalar {
        return Err(Error::SpaceMismatch("temperature must be a scalar field".into()));
    }
    let kinv = data.inverse_permeability(&space.mesh)?;
    weighted_mass(space, Some(&kinv), |k, xi| data.viscosity_at(t.eval_scalar(k, xi).0))
}

/// `M_β(w; u, v) = (β |w| u, v)` for the frozen velocity `w`.
pub fn assemble_mbeta(w: &Field, space: &Space, beta: f64) -> Result<CsrMatrix> {
    check_velocity(space)?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Data(format!("Forchheimer coefficient must be non-negative, got {beta}")));
    }
    if !w.space.is_vector() {
        return Err(Error::SpaceMismatch("frozen velocity must be a vector field".into()));
    }
    weighted_mass(space, None, |k, xi| Ok(if beta == 0.0 { 0.0 } else { beta * geom::norm(&w.eval_vector(k, xi).0) }))
}

/// `B_h(q, v) = −(q, div_h v) + Σ_{F_I} ∫ {q} [v]_n`, rows indexed by
/// pressure dofs. For DG velocities the face term also runs over
/// boundary faces with a prescribed normal velocity, where `u·n` is
/// imposed weakly.
pub fn assemble_bh(p_space: &Space, v_space: &Space, data: &ProblemData) -> Result<CsrMatrix> {
    check_pressure(p_space)?;
    check_velocity(v_space)?;
    if !std::sync::Arc::ptr_eq(&p_space.mesh, &v_space.mesh) {
        return Err(Error::SpaceMismatch("pressure and velocity live on different meshes".into()));
    }
    let mesh = &*v_space.mesh;
    let d = mesh.dim;
    let np = p_space.dofs_per_element;
    let nv = v_space.dofs_per_element;
    let deg = p_space.degree + v_space.polynomial_degree();
    let mut trip = Triplets::new(p_space.total_dofs, v_space.total_dofs);
    let mut sp = ScalarVals::new(np);
    let mut sm = ScalarVals::new(np);
    let mut vp = VectorVals::new(nv);
    let mut vm = VectorVals::new(nv);

    let vrule = simplex_rule(d, deg)?;
    let mut block = vec![0.0; np * nv];
    for k in 0..mesh.n_elements() {
        block.iter_mut().for_each(|b| *b = 0.0);
        let det = mesh.map(k).det;
        for q in 0..vrule.len() {
            let xi = &vrule.points[q];
            p_space.eval_scalar(k, xi, &mut sp.v, None);
            vp.eval(v_space, k, xi);
            add_outer(&mut block, &sp.v, &vp.div, -vrule.weights[q] * det);
        }
        trip.push_block(&p_space.element_dofs(k), &v_space.element_dofs(k), &block);
    }

    if v_space.kind == SpaceKind::DgVector {
        let frule = simplex_rule(d - 1, deg)?;
        let mut avg = vec![0.0; 2 * np];
        let mut jn = vec![0.0; 2 * nv];
        let mut fblock = vec![0.0; 4 * np * nv];
        for &f in mesh.interior_faces() {
            let face = &mesh.faces[f];
            let (kp, km) = (face.elem_plus, face.elem_minus.unwrap());
            let fp = face_points(mesh, f, &frule);
            fblock.iter_mut().for_each(|b| *b = 0.0);
            for q in 0..fp.x.len() {
                p_space.eval_scalar(kp, &fp.xi_plus[q], &mut sp.v, None);
                p_space.eval_scalar(km, &fp.xi_minus[q], &mut sm.v, None);
                vp.eval(v_space, kp, &fp.xi_plus[q]);
                vm.eval(v_space, km, &fp.xi_minus[q]);
                for i in 0..np {
                    avg[i] = 0.5 * sp.v[i];
                    avg[np + i] = 0.5 * sm.v[i];
                }
                for j in 0..nv {
                    jn[j] = geom::dot(&vp.v[j], &face.normal);
                    jn[nv + j] = -geom::dot(&vm.v[j], &face.normal);
                }
                add_outer(&mut fblock, &avg, &jn, fp.weights[q]);
            }
            trip.push_block(&pair_dofs(p_space, kp, km), &pair_dofs(v_space, kp, km), &fblock);
        }
        let mut vn = vec![0.0; nv];
        for &f in mesh.boundary_faces() {
            let face = &mesh.faces[f];
            let tag = face.boundary_tag.as_deref().unwrap_or_default();
            if !matches!(data.bcs.flow_bc(tag)?, FlowBc::NormalVelocity(_)) {
                continue;
            }
            let k = face.elem_plus;
            let fp = face_points(mesh, f, &frule);
            block.iter_mut().for_each(|b| *b = 0.0);
            for q in 0..fp.x.len() {
                p_space.eval_scalar(k, &fp.xi_plus[q], &mut sp.v, None);
                vp.eval(v_space, k, &fp.xi_plus[q]);
                for j in 0..nv {
                    vn[j] = geom::dot(&vp.v[j], &face.normal);
                }
                add_outer(&mut block, &sp.v, &vn, fp.weights[q]);
            }
            trip.push_block(&p_space.element_dofs(k), &v_space.element_dofs(k), &block);
        }
    }
    Ok(trip.to_csr())
}

/// `D_u(u, v) = Σ_{F_I} ∫ ξ [u]_n [v]_n` and, for DG velocities, the same
/// penalty on prescribed-normal-velocity boundary faces with `u_n` moved
/// to the load. Zero for Raviart–Thomas spaces.
pub fn assemble_du(space: &Space, data: &ProblemData, pen: &PenaltyConfig) -> Result<(CsrMatrix, Vec<f64>)> {
    check_velocity(space)?;
    pen.validate()?;
    let mut rhs = vec![0.0; space.total_dofs];
    let mut trip = Triplets::new(space.total_dofs, space.total_dofs);
    if space.kind == SpaceKind::Rt {
        return Ok((trip.to_csr(), rhs));
    }
    let mesh = &*space.mesh;
    let n = space.dofs_per_element;
    let l = space.degree;
    let frule = simplex_rule(mesh.dim - 1, 2 * l + 2)?;
    let mut vp = VectorVals::new(n);
    let mut vm = VectorVals::new(n);
    let mut jn = vec![0.0; 2 * n];
    let mut fblock = vec![0.0; 4 * n * n];
    for &f in mesh.interior_faces() {
        let face = &mesh.faces[f];
        let (kp, km) = (face.elem_plus, face.elem_minus.unwrap());
        let xi_f = penalty_xi(mesh, f, pen, l);
        let fp = face_points(mesh, f, &frule);
        fblock.iter_mut().for_each(|b| *b = 0.0);
        for q in 0..fp.x.len() {
            vp.eval(space, kp, &fp.xi_plus[q]);
            vm.eval(space, km, &fp.xi_minus[q]);
            for j in 0..n {
                jn[j] = geom::dot(&vp.v[j], &face.normal);
                jn[n + j] = -geom::dot(&vm.v[j], &face.normal);
            }
            add_outer(&mut fblock, &jn, &jn, xi_f * fp.weights[q]);
        }
        let dofs = pair_dofs(space, kp, km);
        trip.push_block(&dofs, &dofs, &fblock);
    }
    let mut vn = vec![0.0; n];
    let mut block = vec![0.0; n * n];
    for &f in mesh.boundary_faces() {
        let face = &mesh.faces[f];
        let tag = face.boundary_tag.as_deref().unwrap_or_default();
        let FlowBc::NormalVelocity(un) = data.bcs.flow_bc(tag)? else {
            continue;
        };
        let k = face.elem_plus;
        let xi_f = penalty_xi(mesh, f, pen, l);
        let fp = face_points(mesh, f, &frule);
        let dofs = space.element_dofs(k);
        block.iter_mut().for_each(|b| *b = 0.0);
        for q in 0..fp.x.len() {
            vp.eval(space, k, &fp.xi_plus[q]);
            for j in 0..n {
                vn[j] = geom::dot(&vp.v[j], &face.normal);
            }
            let w = xi_f * fp.weights[q];
            add_outer(&mut block, &vn, &vn, w);
            let g = un(&fp.x[q]);
            for i in 0..n {
                rhs[dofs[i]] += w * g * vn[i];
            }
        }
        trip.push_block(&dofs, &dofs, &block);
    }
    Ok((trip.to_csr(), rhs))
}

/// `D_p(p, q) = Σ_{F_I} ∫ ϱ [p] [q]`.
pub fn assemble_dp(space: &Space, pen: &PenaltyConfig) -> Result<CsrMatrix> {
    check_pressure(space)?;
    pen.validate()?;
    let mesh = &*space.mesh;
    let n = space.dofs_per_element;
    let frule = simplex_rule(mesh.dim - 1, 2 * space.degree)?;
    let mut sp = ScalarVals::new(n);
    let mut sm = ScalarVals::new(n);
    let mut jump = vec![0.0; 2 * n];
    let mut fblock = vec![0.0; 4 * n * n];
    let mut trip = Triplets::new(space.total_dofs, space.total_dofs);
    for &f in mesh.interior_faces() {
        let face = &mesh.faces[f];
        let (kp, km) = (face.elem_plus, face.elem_minus.unwrap());
        let rho = penalty_rho(mesh, f, pen, space.degree);
        let fp = face_points(mesh, f, &frule);
        fblock.iter_mut().for_each(|b| *b = 0.0);
        for q in 0..fp.x.len() {
            space.eval_scalar(kp, &fp.xi_plus[q], &mut sp.v, None);
            space.eval_scalar(km, &fp.xi_minus[q], &mut sm.v, None);
            for i in 0..n {
                jump[i] = sp.v[i];
                jump[n + i] = -sm.v[i];
            }
            add_outer(&mut fblock, &jump, &jump, rho * fp.weights[q]);
        }
        let dofs = pair_dofs(space, kp, km);
        trip.push_block(&dofs, &dofs, &fblock);
    }
    Ok(trip.to_csr())
}

/// Loads of the flow problem: momentum `(f, v) − Σ ∫ p_D v·n` over
/// pressure faces, and continuity `Σ ∫ q u_n` over prescribed-normal-velocity
/// faces (DG velocities only; Raviart–Thomas imposes `u_n` on the dofs).
pub fn assemble_flow_rhs(v_space: &Space, p_space: &Space, data: &ProblemData) -> Result<(Vec<f64>, Vec<f64>)> {
    check_velocity(v_space)?;
    check_pressure(p_space)?;
    let mesh = &*v_space.mesh;
    let d = mesh.dim;
    let nv = v_space.dofs_per_element;
    let np = p_space.dofs_per_element;
    let lv = v_space.polynomial_degree();
    let mut fv = vec![0.0; v_space.total_dofs];
    let mut gq = vec![0.0; p_space.total_dofs];
    let mut vv = VectorVals::new(nv);
    let mut sp = ScalarVals::new(np);

    let vrule = simplex_rule(d, 2 * lv + 2)?;
    for k in 0..mesh.n_elements() {
        let det = mesh.map(k).det;
        let dofs = v_space.element_dofs(k);
        for q in 0..vrule.len() {
            let xi = &vrule.points[q];
            vv.eval(v_space, k, xi);
            let f = (data.f)(&mesh.to_physical(k, xi));
            let w = vrule.weights[q] * det;
            for i in 0..nv {
                fv[dofs[i]] += w * geom::dot(&f, &vv.v[i]);
            }
        }
    }

    let frule = simplex_rule(d - 1, 2 * lv.max(p_space.degree) + 2)?;
    for &f in mesh.boundary_faces() {
        let face = &mesh.faces[f];
        let tag = face.boundary_tag.as_deref().unwrap_or_default();
        let k = face.elem_plus;
        let fp = face_points(mesh, f, &frule);
        match data.bcs.flow_bc(tag)? {
            FlowBc::DirichletPressure(pd) => {
                let dofs = v_space.element_dofs(k);
                for q in 0..fp.x.len() {
                    vv.eval(v_space, k, &fp.xi_plus[q]);
                    let w = fp.weights[q] * pd(&fp.x[q]);
                    for i in 0..nv {
                        fv[dofs[i]] -= w * geom::dot(&vv.v[i], &face.normal);
                    }
                }
            }
            FlowBc::NormalVelocity(un) => {
                if v_space.kind != SpaceKind::DgVector {
                    continue;
                }
                let dofs = p_space.element_dofs(k);
                for q in 0..fp.x.len() {
                    p_space.eval_scalar(k, &fp.xi_plus[q], &mut sp.v, None);
                    let w = fp.weights[q] * un(&fp.x[q]);
                    for i in 0..np {
                        gq[dofs[i]] += w * sp.v[i];
                    }
                }
            }
        }
    }
    Ok((fv, gq))
}

/// Values of the Raviart–Thomas dofs on prescribed-normal-velocity faces:
/// `∫_F u_n B_α` for each face Bernstein weight.
pub fn rt_boundary_values(space: &Space, data: &ProblemData) -> Result<Vec<(usize, f64)>> {
    let b = space.rt_basis().ok_or_else(|| Error::SpaceMismatch("strong normal velocity needs a Raviart–Thomas space".into()))?;
    let mesh = &*space.mesh;
    let nf = b.dofs_per_face();
    let rule = simplex_rule(mesh.dim - 1, 2 * space.degree + 4)?;
    let wscale = 1.0 / reference_measure(mesh.dim - 1);
    let mut out = Vec::new();
    for &f in mesh.boundary_faces() {
        let face = &mesh.faces[f];
        let tag = face.boundary_tag.as_deref().unwrap_or_default();
        let FlowBc::NormalVelocity(un) = data.bcs.flow_bc(tag)? else {
            continue;
        };
        let mut vals = vec![0.0; nf];
        for q in 0..rule.len() {
            let mu = rule.barycentric(q);
            let mut x = [0.0; 3];
            for (i, &v) in face.vertices.iter().enumerate() {
                x = geom::add(&x, &geom::scale(&mesh.vertices[v], mu[i]));
            }
            let w = rule.weights[q] * face.measure * wscale * un(&x);
            for (a, alpha) in b.face_alphas.iter().enumerate() {
                vals[a] += w * bernstein(alpha, &mu);
            }
        }
        out.extend(space.face_dofs(f).into_iter().zip(vals));
    }
    Ok(out)
}
