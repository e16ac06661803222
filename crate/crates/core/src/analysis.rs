//! Norms, errors against exact solutions, convergence rates and the
//! discrete inf-sup probe.

use std::sync::Arc;

use crate::cases::{CaseDefinition, ExactSolution, MeshSpec};
use crate::error::{Error, Result};
use crate::fespace::{face_points, simplex_rule, Field, Space, SpaceKind};
use crate::forms::{self, penalty_sigma, penalty_xi, PenaltyConfig, ProblemData, Scheme, ThermalBc};
use crate::geom::{self, Point};
use crate::linsolve::{LinearSolverConfig, ReusableSolver, SystemKind};
use crate::mesh::Mesh;
use crate::solver::{fixed_point_solve_on, Discretization, SolveReport, SolverConfig};
use crate::sparse::{self, CsrMatrix, Triplets};

fn require_vector(f: &Field) -> Result<()> {
    if !f.space.is_vector() {
        return Err(Error::SpaceMismatch("expected a vector field".into()));
    }
    Ok(())
}

fn require_scalar(f: &Field) -> Result<()> {
    if f.space.kind != SpaceKind::DgScalar {
        return Err(Error::SpaceMismatch("expected a scalar DG field".into()));
    }
    Ok(())
}

/// Sum over elements and quadrature points of `w · integrand(k, xi, x)`.
fn integrate<F: FnMut(usize, &Point, &Point) -> f64>(space: &Space, degree: usize, mut integrand: F) -> Result<f64> {
    let mesh = &*space.mesh;
    let rule = simplex_rule(mesh.dim, degree)?;
    let mut s = 0.0;
    for k in 0..mesh.n_elements() {
        let det = mesh.map(k).det;
        for q in 0..rule.len() {
            let xi = &rule.points[q];
            s += rule.weights[q] * det * integrand(k, xi, &mesh.to_physical(k, xi));
        }
    }
    Ok(s)
}

fn default_degree(space: &Space) -> usize {
    2 * space.polynomial_degree() + 2
}

pub fn l2_scalar(f: &Field) -> Result<f64> {
    require_scalar(f)?;
    Ok(integrate(&f.space, default_degree(&f.space), |k, xi, _| f.eval_scalar(k, xi).0.powi(2))?.sqrt())
}

pub fn l2_vector(u: &Field) -> Result<f64> {
    require_vector(u)?;
    Ok(integrate(&u.space, default_degree(&u.space), |k, xi, _| {
        let v = u.eval_vector(k, xi).0;
        geom::dot(&v, &v)
    })?
    .sqrt())
}

/// `‖div_h u‖_{L²}`.
pub fn div_l2(u: &Field) -> Result<f64> {
    require_vector(u)?;
    Ok(integrate(&u.space, default_degree(&u.space), |k, xi, _| u.eval_vector(k, xi).1.powi(2))?.sqrt())
}

/// `‖u‖_{L³}`.
pub fn l3_vector(u: &Field) -> Result<f64> {
    require_vector(u)?;
    Ok(integrate(&u.space, 3 * u.space.polynomial_degree() + 2, |k, xi, _| geom::norm(&u.eval_vector(k, xi).0).powi(3))?.cbrt())
}

/// `Σ_{F_I} ξ ‖[u]_n‖²_F` (zero for Raviart–Thomas fields).
pub fn velocity_jump_energy(u: &Field, pen: &PenaltyConfig) -> Result<f64> {
    require_vector(u)?;
    if u.space.kind == SpaceKind::Rt {
        return Ok(0.0);
    }
    let mesh = &*u.space.mesh;
    let l = u.space.degree;
    let rule = simplex_rule(mesh.dim - 1, 2 * l + 2)?;
    let mut s = 0.0;
    for &f in mesh.interior_faces() {
        let face = &mesh.faces[f];
        let (kp, km) = (face.elem_plus, face.elem_minus.unwrap());
        let xi_f = penalty_xi(mesh, f, pen, l);
        let fp = face_points(mesh, f, &rule);
        for q in 0..fp.x.len() {
            let a = u.eval_vector(kp, &fp.xi_plus[q]).0;
            let b = u.eval_vector(km, &fp.xi_minus[q]).0;
            s += xi_f * fp.weights[q] * geom::dot(&geom::sub(&a, &b), &face.normal).powi(2);
        }
    }
    Ok(s)
}

/// Both velocity norms: the squared form
/// `(‖v‖² + ‖div v‖² + Σ ξ‖[v]_n‖²)^{1/2}` and the sum form
/// `‖v‖ + ‖v‖_{L³} + ‖div v‖ + (Σ ξ‖[v]_n‖²)^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivNorms {
    pub squared: f64,
    pub triple: f64,
}

pub fn norm_dg_div(u: &Field, pen: &PenaltyConfig) -> Result<DivNorms> {
    let l2 = l2_vector(u)?;
    let div = div_l2(u)?;
    let jumps = velocity_jump_energy(u, pen)?;
    Ok(DivNorms { squared: (l2 * l2 + div * div + jumps).sqrt(), triple: l2 + l3_vector(u)? + div + jumps.sqrt() })
}

/// How boundary faces enter the temperature jump term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryJump {
    /// `[S] = S` on every boundary face.
    Trace,
    /// `[S] = S − T_D` on Dirichlet faces and no contribution on Robin faces.
    DirichletData,
}

/// `‖S‖²_{dG,T} = ‖√Θ ∇_h S‖² + Σ_F σ ‖[S]‖²_F`, with `g` the optional
/// exact temperature subtracted inside the broken gradient.
fn dg_t_squared(
    t: &Field,
    data: &ProblemData,
    pen: &PenaltyConfig,
    boundary: BoundaryJump,
    exact_grad: Option<&dyn Fn(&Point) -> Point>,
    extra_degree: usize,
) -> Result<f64> {
    require_scalar(t)?;
    let space = &*t.space;
    let mesh = &*space.mesh;
    let l = space.degree;
    let theta = data.conductivity_tensors(mesh)?;
    let theta_bar = forms::conductivity_trace(mesh, data)?;
    let vol = integrate(space, 2 * l + extra_degree, |k, xi, x| {
        let mut g = t.eval_scalar(k, xi).1;
        if let Some(eg) = exact_grad {
            g = geom::sub(&g, &eg(x));
        }
        geom::dot(&geom::mat_vec(&theta[k], &g), &g)
    })?;
    let rule = simplex_rule(mesh.dim - 1, 2 * l + extra_degree)?;
    let mut jumps = 0.0;
    for &f in mesh.interior_faces() {
        let face = &mesh.faces[f];
        let sigma = penalty_sigma(mesh, f, pen, &theta_bar, l);
        let fp = face_points(mesh, f, &rule);
        for q in 0..fp.x.len() {
            let a = t.eval_scalar(face.elem_plus, &fp.xi_plus[q]).0;
            let b = t.eval_scalar(face.elem_minus.unwrap(), &fp.xi_minus[q]).0;
            jumps += sigma * fp.weights[q] * (a - b).powi(2);
        }
    }
    for &f in mesh.boundary_faces() {
        let face = &mesh.faces[f];
        let td = match boundary {
            BoundaryJump::Trace => None,
            BoundaryJump::DirichletData => match data.bcs.thermal_bc(face.boundary_tag.as_deref().unwrap_or_default())? {
                ThermalBc::DirichletTemperature(td) => Some(td.clone()),
                ThermalBc::Robin { .. } => continue,
            },
        };
        let sigma = penalty_sigma(mesh, f, pen, &theta_bar, l);
        let fp = face_points(mesh, f, &rule);
        for q in 0..fp.x.len() {
            let mut a = t.eval_scalar(face.elem_plus, &fp.xi_plus[q]).0;
            if let Some(td) = &td {
                a -= td(&fp.x[q]);
            }
            jumps += sigma * fp.weights[q] * a * a;
        }
    }
    Ok(vol + jumps)
}

/// `‖S‖_{dG,T}` with plain boundary traces in the jump term.
pub fn norm_dg_t(t: &Field, data: &ProblemData, pen: &PenaltyConfig) -> Result<f64> {
    Ok(dg_t_squared(t, data, pen, BoundaryJump::Trace, None, 0)?.sqrt())
}

/// `‖S‖_{dG,T}` with the chosen boundary jump convention.
pub fn norm_dg_t_with(t: &Field, data: &ProblemData, pen: &PenaltyConfig, boundary: BoundaryJump) -> Result<f64> {
    Ok(dg_t_squared(t, data, pen, boundary, None, 0)?.sqrt())
}

/// Auxiliary norm `‖S‖²_{dG,3} = ‖S‖²_{L³} + ‖∇_h S‖²_{L³} + max_F max_κ ℓ²/h_κ ‖[S]‖²_{L³(F)}`.
pub fn norm_dg3(t: &Field) -> Result<f64> {
    require_scalar(t)?;
    let space = &*t.space;
    let mesh = &*space.mesh;
    let l = space.degree;
    let deg = 3 * l + 2;
    let s3 = integrate(space, deg, |k, xi, _| t.eval_scalar(k, xi).0.abs().powi(3))?.cbrt();
    let g3 = integrate(space, deg, |k, xi, _| geom::norm(&t.eval_scalar(k, xi).1).powi(3))?.cbrt();
    let rule = simplex_rule(mesh.dim - 1, deg)?;
    let l2 = (l.max(1) * l.max(1)) as f64;
    let mut worst: f64 = 0.0;
    for f in 0..mesh.n_faces() {
        let face = &mesh.faces[f];
        let fp = face_points(mesh, f, &rule);
        let mut j3 = 0.0;
        for q in 0..fp.x.len() {
            let mut a = t.eval_scalar(face.elem_plus, &fp.xi_plus[q]).0;
            if let Some(km) = face.elem_minus {
                a -= t.eval_scalar(km, &fp.xi_minus[q]).0;
            }
            j3 += fp.weights[q] * a.abs().powi(3);
        }
        let hmin = std::iter::once(face.elem_plus).chain(face.elem_minus).map(|k| mesh.elem_diameter[k]).fold(f64::INFINITY, f64::min);
        worst = worst.max(l2 / hmin * j3.cbrt().powi(2));
    }
    Ok((s3 * s3 + g3 * g3 + worst).sqrt())
}

/// `‖(v, q, S)‖_E` with the inf-sup constant `𝔹` set to 1.
pub fn energy_norm(u: &Field, p: &Field, t: &Field, data: &ProblemData, pen: &PenaltyConfig, boundary: BoundaryJump) -> Result<f64> {
    let l2 = l2_vector(u)?;
    let l3 = l3_vector(u)?;
    let div = div_l2(u)?;
    let jumps = velocity_jump_energy(u, pen)?;
    let pl2 = l2_scalar(p)?;
    let tt = dg_t_squared(t, data, pen, boundary, None, 0)?;
    Ok((l2 * l2 + l3.powi(3) + div * div + jumps + pl2 * pl2 + tt).sqrt())
}

/// Gram matrix of the squared-form velocity norm.
pub fn velocity_norm_matrix(space: &Space, pen: &PenaltyConfig) -> Result<CsrMatrix> {
    if !space.is_vector() {
        return Err(Error::SpaceMismatch("velocity norm needs a vector space".into()));
    }
    let mesh = &*space.mesh;
    let n = space.dofs_per_element;
    let rule = simplex_rule(mesh.dim, 2 * space.polynomial_degree())?;
    let mut trip = Triplets::new(space.total_dofs, space.total_dofs);
    let mut vals = vec![[0.0; 3]; n];
    let mut divs = vec![0.0; n];
    let mut block = vec![0.0; n * n];
    for k in 0..mesh.n_elements() {
        block.iter_mut().for_each(|b| *b = 0.0);
        let det = mesh.map(k).det;
        for q in 0..rule.len() {
            space.eval_vector(k, &rule.points[q], &mut vals, &mut divs);
            let w = rule.weights[q] * det;
            for i in 0..n {
                for j in 0..n {
                    block[i * n + j] += w * (geom::dot(&vals[i], &vals[j]) + divs[i] * divs[j]);
                }
            }
        }
        let dofs = space.element_dofs(k);
        trip.push_block(&dofs, &dofs, &block);
    }
    if space.kind == SpaceKind::DgVector {
        let l = space.degree;
        let frule = simplex_rule(mesh.dim - 1, 2 * l)?;
        let mut vm = vec![[0.0; 3]; n];
        let mut dm = vec![0.0; n];
        for &f in mesh.interior_faces() {
            let face = &mesh.faces[f];
            let (kp, km) = (face.elem_plus, face.elem_minus.unwrap());
            let xi_f = penalty_xi(mesh, f, pen, l);
            let fp = face_points(mesh, f, &frule);
            let mut dofs = space.element_dofs(kp);
            dofs.extend(space.element_dofs(km));
            let mut fblock = vec![0.0; 4 * n * n];
            let mut jump = vec![0.0; 2 * n];
            for q in 0..fp.x.len() {
                space.eval_vector(kp, &fp.xi_plus[q], &mut vals, &mut divs);
                space.eval_vector(km, &fp.xi_minus[q], &mut vm, &mut dm);
                for i in 0..n {
                    jump[i] = geom::dot(&vals[i], &face.normal);
                    jump[n + i] = -geom::dot(&vm[i], &face.normal);
                }
                let w = xi_f * fp.weights[q];
                for i in 0..2 * n {
                    for j in 0..2 * n {
                        fblock[i * 2 * n + j] += w * jump[i] * jump[j];
                    }
                }
            }
            trip.push_block(&dofs, &dofs, &fblock);
        }
    }
    Ok(trip.to_csr())
}

/// Gram matrix of `‖·‖_{dG,T}` with plain boundary traces.
pub fn temperature_norm_matrix(space: &Space, data: &ProblemData, pen: &PenaltyConfig) -> Result<CsrMatrix> {
    let mesh = &*space.mesh;
    let theta = data.conductivity_tensors(mesh)?;
    let theta_bar = forms::conductivity_trace(mesh, data)?;
    let n = space.dofs_per_element;
    let l = space.degree;
    let mut trip = Triplets::new(space.total_dofs, space.total_dofs);
    let rule = simplex_rule(mesh.dim, 2 * l)?;
    let mut v = vec![0.0; n];
    let mut g = vec![[0.0; 3]; n];
    let mut block = vec![0.0; n * n];
    for k in 0..mesh.n_elements() {
        block.iter_mut().for_each(|b| *b = 0.0);
        let det = mesh.map(k).det;
        for q in 0..rule.len() {
            space.eval_scalar(k, &rule.points[q], &mut v, Some(&mut g));
            let w = rule.weights[q] * det;
            for i in 0..n {
                let tg = geom::mat_vec(&theta[k], &g[i]);
                for j in 0..n {
                    block[i * n + j] += w * geom::dot(&tg, &g[j]);
                }
            }
        }
        let dofs = space.element_dofs(k);
        trip.push_block(&dofs, &dofs, &block);
    }
    let frule = simplex_rule(mesh.dim - 1, 2 * l)?;
    let mut vm = vec![0.0; n];
    for f in 0..mesh.n_faces() {
        let face = &mesh.faces[f];
        let sigma = penalty_sigma(mesh, f, pen, &theta_bar, l);
        let fp = face_points(mesh, f, &frule);
        let mut dofs = space.element_dofs(face.elem_plus);
        if let Some(km) = face.elem_minus {
            dofs.extend(space.element_dofs(km));
        }
        let nn = dofs.len();
        let mut fblock = vec![0.0; nn * nn];
        let mut jump = vec![0.0; nn];
        for q in 0..fp.x.len() {
            space.eval_scalar(face.elem_plus, &fp.xi_plus[q], &mut v, None);
            jump[..n].copy_from_slice(&v);
            if let Some(km) = face.elem_minus {
                space.eval_scalar(km, &fp.xi_minus[q], &mut vm, None);
                for i in 0..n {
                    jump[n + i] = -vm[i];
                }
            }
            let w = sigma * fp.weights[q];
            for i in 0..nn {
                for j in 0..nn {
                    fblock[i * nn + j] += w * jump[i] * jump[j];
                }
            }
        }
        trip.push_block(&dofs, &dofs, &fblock);
    }
    Ok(trip.to_csr())
}

/// Quadratic-form evaluation of the increment norms used by the solver.
pub struct NormOperators {
    velocity: CsrMatrix,
    temperature: CsrMatrix,
}

impl NormOperators {
    pub fn new(disc: &Discretization, data: &ProblemData, pen: &PenaltyConfig) -> Result<NormOperators> {
        Ok(NormOperators {
            velocity: velocity_norm_matrix(&disc.velocity, pen)?,
            temperature: temperature_norm_matrix(&disc.temperature, data, pen)?,
        })
    }

    pub fn velocity(&self, u: &Field) -> f64 {
        self.velocity.bilinear(&u.coeffs, &u.coeffs).max(0.0).sqrt()
    }

    /// L² norm; the DG basis is orthonormal, so this is the coefficient norm.
    pub fn pressure(&self, p: &Field) -> f64 {
        sparse::norm2(&p.coeffs)
    }

    pub fn temperature(&self, t: &Field) -> f64 {
        self.temperature.bilinear(&t.coeffs, &t.coeffs).max(0.0).sqrt()
    }

    /// `‖(u, p, T)‖_E` with plain boundary traces.
    pub fn energy(&self, u: &Field, p: &Field, t: &Field) -> Result<f64> {
        let v = self.velocity(u);
        let l3 = l3_vector(u)?;
        Ok((v * v + l3.powi(3) + self.pressure(p).powi(2) + self.temperature(t).powi(2)).sqrt())
    }
}

/// Errors of one discrete solution against the exact fields.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub scheme: Scheme,
    /// Temperature and DG velocity degree `ℓ`.
    pub degree: usize,
    /// Pressure degree `m`.
    pub pressure_degree: usize,
    /// Largest element diameter.
    pub h: f64,
    /// `1 / h`.
    pub one_over_h: f64,
    pub iterations: usize,
    pub converged: bool,
    pub err_u_l2: f64,
    /// `‖u − u_h‖_{dG,div}` in squared form.
    pub err_u_energy: f64,
    pub err_p_l2: f64,
    pub err_t_l2: f64,
    pub err_t_dgt: f64,
    /// `‖(u_h, p_h, T_h)‖_E` with Dirichlet data in the boundary jumps.
    pub energy_norm: f64,
}

impl ErrorReport {
    /// The five tabulated errors in column order.
    pub fn errors(&self) -> [f64; 5] {
        [self.err_u_l2, self.err_u_energy, self.err_p_l2, self.err_t_l2, self.err_t_dgt]
    }
}

/// Errors of `(u_h, p_h, T_h)`. The manufactured velocities are solenoidal,
/// so the divergence error is `‖div_h u_h‖`.
pub fn compute_errors(u: &Field, p: &Field, t: &Field, exact: &ExactSolution, data: &ProblemData, pen: &PenaltyConfig) -> Result<[f64; 5]> {
    let deg = (2 * t.space.degree + 4).max(2 * u.space.polynomial_degree() + 3);
    compute_errors_with_degree(u, p, t, exact, data, pen, deg)
}

/// [`compute_errors`] with an explicit quadrature degree.
pub fn compute_errors_with_degree(
    u: &Field,
    p: &Field,
    t: &Field,
    exact: &ExactSolution,
    data: &ProblemData,
    pen: &PenaltyConfig,
    deg: usize,
) -> Result<[f64; 5]> {
    require_vector(u)?;
    require_scalar(p)?;
    require_scalar(t)?;
    let extra = deg.saturating_sub(2 * t.space.degree);
    let eu = integrate(&u.space, deg, |k, xi, x| {
        let e = geom::sub(&(exact.u)(x), &u.eval_vector(k, xi).0);
        geom::dot(&e, &e)
    })?;
    let div = integrate(&u.space, deg, |k, xi, _| u.eval_vector(k, xi).1.powi(2))?;
    let jumps = velocity_jump_energy(u, pen)?;
    let ep = integrate(&p.space, deg, |k, xi, x| ((exact.p)(x) - p.eval_scalar(k, xi).0).powi(2))?;
    let et = integrate(&t.space, deg, |k, xi, x| ((exact.t)(x) - t.eval_scalar(k, xi).0).powi(2))?;
    let grad = exact.grad_t.clone();
    let g = move |x: &Point| grad(x);
    let etd = dg_t_squared(t, data, pen, BoundaryJump::DirichletData, Some(&g), extra)?;
    Ok([eu.sqrt(), (eu + div + jumps).sqrt(), ep.sqrt(), et.sqrt(), etd.sqrt()])
}

/// Solves `case` on one mesh and reports the errors together with the solution.
pub fn study_point(case: &CaseDefinition, config: &SolverConfig, spec: MeshSpec) -> Result<(ErrorReport, SolveReport)> {
    if case.exact.is_none() {
        return Err(Error::InvalidArgument(format!("case {} has no exact solution", case.name)));
    }
    study_on_mesh(case, config, Arc::new(case.build_mesh(spec)?))
}

/// [`study_point`] on a prepared mesh.
pub fn study_on_mesh(case: &CaseDefinition, config: &SolverConfig, mesh: Arc<Mesh>) -> Result<(ErrorReport, SolveReport)> {
    let exact = case.exact.as_ref().ok_or_else(|| Error::InvalidArgument(format!("case {} has no exact solution", case.name)))?;
    let disc = Discretization::new(mesh.clone(), config)?;
    let rep = fixed_point_solve_on(&disc, &case.data, config)?;
    let [err_u_l2, err_u_energy, err_p_l2, err_t_l2, err_t_dgt] =
        compute_errors(&rep.u, &rep.p, &rep.t, exact, &case.data, &config.penalty)?;
    let energy_norm = energy_norm(&rep.u, &rep.p, &rep.t, &case.data, &config.penalty, BoundaryJump::DirichletData)?;
    let report = ErrorReport {
        scheme: config.scheme,
        degree: config.degree,
        pressure_degree: config.pressure_degree,
        h: mesh.h_max(),
        one_over_h: 1.0 / mesh.h_max(),
        iterations: rep.iterations,
        converged: rep.converged,
        err_u_l2,
        err_u_energy,
        err_p_l2,
        err_t_l2,
        err_t_dgt,
        energy_norm,
    };
    Ok((report, rep))
}

/// Solves `case` on every mesh of the sequence and reports the errors.
pub fn error_study(case: &CaseDefinition, config: &SolverConfig, meshes: &[MeshSpec]) -> Result<Vec<ErrorReport>> {
    meshes.iter().map(|&spec| study_point(case, config, spec).map(|(r, _)| r)).collect()
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive pairs.
pub fn pairwise_rates(h: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    if h.len() != e.len() {
        return Err(Error::InvalidArgument("mesh sizes and errors differ in length".into()));
    }
    if h.iter().chain(e).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("rates need positive finite sizes and errors".into()));
    }
    Ok(h.windows(2).zip(e.windows(2)).map(|(hh, ee)| (ee[0] / ee[1]).ln() / (hh[0] / hh[1]).ln()).collect())
}

/// Least-squares slope of `log e` against `log x`.
pub fn lsq_slope(x: &[f64], e: &[f64]) -> Result<f64> {
    if x.len() != e.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs at least two matching points".into()));
    }
    if x.iter().chain(e).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("slope fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let le: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    linear_slope(&lx, &le)
}

/// Least-squares slope of `log e` against `x` (exponential decay rate).
pub fn exp_slope(x: &[f64], e: &[f64]) -> Result<f64> {
    if x.len() != e.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs at least two matching points".into()));
    }
    if e.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("slope fit needs positive finite errors".into()));
    }
    let le: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    linear_slope(x, &le)
}

fn linear_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Largest mesh accepted by [`infsup_probe`].
pub const INFSUP_MAX_ELEMENTS: usize = 512;

/// Lower bound for the discrete inf-sup constant:
/// `min_{‖q‖=1} (sup_v B(v,q)/‖v‖_{dG,div} + D_p(q,q)^{1/2}) ≥ λ_min(B N⁻¹ Bᵀ + D_p)^{1/2}`
/// with `N` the Gram matrix of the squared-form velocity norm. When the
/// pressure is only defined up to a constant, the constant mode is removed.
pub fn infsup_probe(disc: &Discretization, data: &ProblemData, pen: &PenaltyConfig) -> Result<f64> {
    let mesh = &*disc.mesh;
    if mesh.n_elements() > INFSUP_MAX_ELEMENTS {
        return Err(Error::InvalidArgument(format!(
            "inf-sup probe limited to {INFSUP_MAX_ELEMENTS} elements, mesh has {}",
            mesh.n_elements()
        )));
    }
    let (v, p) = (&*disc.velocity, &*disc.pressure);
    let b = forms::assemble_bh(p, v, data)?;
    let n = velocity_norm_matrix(v, pen)?;
    let dp = match disc.scheme {
        Scheme::DgDgDg => forms::assemble_dp(p, pen)?,
        Scheme::RtDgDg => CsrMatrix::zeros(p.total_dofs, p.total_dofs),
    };
    let (nv, np) = (v.total_dofs, p.total_dofs);
    let bt = b.transpose();
    let mut solver = ReusableSolver::new(SystemKind::QuasiDefinite { signs: vec![1; nv] }, LinearSolverConfig::default());
    // Columns of N⁻¹ Bᵀ.
    let dense_bt = bt.to_dense();
    let mut x = vec![vec![0.0; nv]; np];
    for (j, col) in x.iter_mut().enumerate() {
        let rhs: Vec<f64> = (0..nv).map(|i| dense_bt[i][j]).collect();
        if rhs.iter().any(|&r| r != 0.0) {
            *col = solver.solve(&n, &rhs, None)?;
        }
    }
    let mut s = faer::Mat::<f64>::zeros(np, np);
    for i in 0..np {
        let (cols, vals) = b.row(i);
        for j in 0..np {
            let mut acc = 0.0;
            for (&c, &bv) in cols.iter().zip(vals) {
                acc += bv * x[j][c];
            }
            s[(i, j)] = acc + dp.get(i, j);
        }
    }
    for i in 0..np {
        for j in 0..i {
            let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = avg;
            s[(j, i)] = avg;
        }
    }
    if data.bcs.needs_pressure_gauge(mesh) {
        let c = crate::solver::mean_functional(p)?;
        let cn = sparse::norm2(&c);
        let shift = s.norm_max().max(1.0);
        for i in 0..np {
            for j in 0..np {
                s[(i, j)] += shift * c[i] * c[j] / (cn * cn);
            }
        }
    }
    let eig = s.self_adjoint_eigenvalues(faer::Side::Lower).map_err(|e| Error::Singular(format!("eigenvalue solve failed: {e:?}")))?;
    let lmin = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(lmin.max(0.0).sqrt())
}

/// `|Ω|⁻¹ ∫_Ω f` of a scalar field.
pub fn mean_value(f: &Field) -> Result<f64> {
    require_scalar(f)?;
    let s = integrate(&f.space, f.space.degree.max(1), |k, xi, _| f.eval_scalar(k, xi).0)?;
    Ok(s / f.space.mesh.total_volume())
}

/// Largest `|u|` over element centroids, with the centroid where it occurs.
pub fn peak_centroid_speed(u: &Field) -> Result<(f64, Point)> {
    require_vector(u)?;
    let mesh = &*u.space.mesh;
    let mut xi = [0.0; 3];
    xi[..mesh.dim].fill(1.0 / (mesh.dim + 1) as f64);
    let mut best = (-1.0, [0.0; 3]);
    for k in 0..mesh.n_elements() {
        let s = geom::norm(&u.eval_vector(k, &xi).0);
        if s > best.0 {
            best = (s, mesh.centroid(k));
        }
    }
    Ok(best)
}
