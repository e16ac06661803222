//! Picard splitting for the coupled problem: a linearised flow solve
//! followed by a linearised heat solve per iteration.

use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, info};

use crate::analysis::{self, NormOperators};
use crate::cases::CaseDefinition;
use crate::error::{Error, Result};
use crate::fespace::{simplex_rule, Field, Space, SpaceKind};
use crate::forms::{self, PenaltyConfig, ProblemData, Scheme};
use crate::linsolve::{LinearSolverConfig, ReusableSolver, SystemKind};
use crate::mesh::Mesh;
use crate::sparse::{CsrMatrix, Triplets};

/// Velocity fed to the heat step of iteration `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeatVelocity {
    /// The velocity `u^k` just computed by the flow step.
    Current,
    /// The velocity `u^{k−1}` of the previous iterate.
    Previous,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Temperature degree `ℓ` (also the DG velocity degree).
    pub degree: usize,
    /// Pressure degree `m` (also the Raviart–Thomas velocity degree).
    pub pressure_degree: usize,
    /// Tolerance on the largest relative increment.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub penalty: PenaltyConfig,
    pub linear: LinearSolverConfig,
    pub heat_velocity: HeatVelocity,
}

impl SolverConfig {
    /// Default configuration with `m = ℓ − 1`.
    pub fn new(scheme: Scheme, degree: usize) -> SolverConfig {
        SolverConfig {
            scheme,
            degree,
            pressure_degree: degree.saturating_sub(1),
            rel_tol: 1e-8,
            max_iter: 50,
            penalty: PenaltyConfig::default(),
            linear: LinearSolverConfig::default(),
            heat_velocity: HeatVelocity::Current,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::InvalidArgument("temperature degree must be at least 1".into()));
        }
        if self.pressure_degree > self.degree + 1 {
            return Err(Error::InvalidArgument(format!("pressure degree {} exceeds ℓ + 1 = {}", self.pressure_degree, self.degree + 1)));
        }
        if !(self.rel_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidArgument("rel_tol must be positive and max_iter non-zero".into()));
        }
        self.penalty.validate()
    }
}

/// Discrete spaces of one scheme on one mesh.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: Arc<Mesh>,
    pub scheme: Scheme,
    pub velocity: Arc<Space>,
    pub pressure: Arc<Space>,
    pub temperature: Arc<Space>,
}

impl Discretization {
    pub fn new(mesh: Arc<Mesh>, config: &SolverConfig) -> Result<Discretization> {
        config.validate()?;
        let velocity = match config.scheme {
            Scheme::DgDgDg => Space::dg_vector(mesh.clone(), config.degree)?,
            Scheme::RtDgDg => Space::rt(mesh.clone(), config.pressure_degree)?,
        };
        Ok(Discretization {
            scheme: config.scheme,
            velocity: Arc::new(velocity),
            pressure: Arc::new(Space::dg_scalar(mesh.clone(), config.pressure_degree)?),
            temperature: Arc::new(Space::dg_scalar(mesh.clone(), config.degree)?),
            mesh,
        })
    }
}

/// Removes the net outflow left by face quadrature of non-polynomial normal
/// data, in proportion to each dof's magnitude so that walls stay zero.
fn balance_boundary_flux(fixed: &mut [(usize, f64)]) {
    let net: f64 = fixed.iter().map(|(_, v)| v).sum();
    let total: f64 = fixed.iter().map(|(_, v)| v.abs()).sum();
    if total > 0.0 {
        for (_, v) in fixed.iter_mut() {
            *v -= net * v.abs() / total;
        }
    }
}

/// Saddle-point flow solver with the iteration-independent blocks kept.
pub struct FlowSolver {
    disc: Discretization,
    data: ProblemData,
    b: CsrMatrix,
    du: CsrMatrix,
    dp: CsrMatrix,
    rhs_u: Vec<f64>,
    rhs_p: Vec<f64>,
    gauge: Option<Vec<f64>>,
    fixed: Vec<(usize, f64)>,
    linear: ReusableSolver,
}

impl FlowSolver {
    pub fn new(disc: &Discretization, data: &ProblemData, config: &SolverConfig) -> Result<FlowSolver> {
        let mesh = &*disc.mesh;
        data.validate(mesh)?;
        let (v, p) = (&*disc.velocity, &*disc.pressure);
        let b = forms::assemble_bh(p, v, data)?;
        let (du, du_rhs) = forms::assemble_du(v, data, &config.penalty)?;
        let dp = match disc.scheme {
            Scheme::DgDgDg => forms::assemble_dp(p, &config.penalty)?,
            Scheme::RtDgDg => Triplets::new(p.total_dofs, p.total_dofs).to_csr(),
        };
        let (mut rhs_u, rhs_p) = forms::assemble_flow_rhs(v, p, data)?;
        for (r, d) in rhs_u.iter_mut().zip(&du_rhs) {
            *r += d;
        }
        let gauge = data.bcs.needs_pressure_gauge(mesh).then(|| mean_functional(p)).transpose()?;
        let mut fixed = match disc.scheme {
            Scheme::RtDgDg => forms::rt_boundary_values(v, data)?,
            Scheme::DgDgDg => Vec::new(),
        };
        if gauge.is_some() {
            balance_boundary_flux(&mut fixed);
        }
        let (nv, np) = (v.total_dofs, p.total_dofs);
        let mut signs = vec![1i8; nv];
        signs.extend(std::iter::repeat_n(-1i8, np));
        if gauge.is_some() {
            signs.push(1);
        }
        Ok(FlowSolver {
            disc: disc.clone(),
            data: data.clone(),
            b,
            du,
            dp,
            rhs_u,
            rhs_p,
            gauge,
            fixed,
            linear: ReusableSolver::new(SystemKind::QuasiDefinite { signs }, config.linear),
        })
    }

    pub fn stats(&self) -> crate::linsolve::SolverStats {
        self.linear.stats
    }

    /// Solves the flow system with viscosity from `t_prev` and Forchheimer
    /// drag frozen at `u_prev` (omitted when `u_prev` is `None`).
    pub fn solve(&mut self, t_prev: &Field, u_prev: Option<&Field>) -> Result<(Field, Field)> {
        let v = &*self.disc.velocity;
        let (nv, np) = (v.total_dofs, self.disc.pressure.total_dofs);
        let clock = Instant::now();
        let mut a = forms::assemble_mnu(t_prev, v, &self.data)?;
        if let Some(w) = u_prev {
            a = a.add(1.0, &forms::assemble_mbeta(w, v, self.data.beta)?, 1.0);
        }
        if self.du.nnz() > 0 {
            a = a.add(1.0, &self.du, 1.0);
        }
        let mut dp = self.dp.clone();
        dp.scale(-1.0);
        let bt = self.b.transpose();
        let mut system = match &self.gauge {
            None => CsrMatrix::block(&[vec![Some(&a), Some(&bt)], vec![Some(&self.b), Some(&dp)]], &[nv, np], &[nv, np]),
            Some(c) => {
                let col = column(c);
                let row = col.transpose();
                CsrMatrix::block(
                    &[vec![Some(&a), Some(&bt), None], vec![Some(&self.b), Some(&dp), Some(&col)], vec![None, Some(&row), None]],
                    &[nv, np, 1],
                    &[nv, np, 1],
                )
            }
        };
        if system.n_rows > nv + np {
            // Keep the diagonal of the multiplier row in the pattern.
            system = system.add(1.0, &diag_entry(system.n_rows, nv + np), 0.0);
        }
        let mut rhs = self.rhs_u.clone();
        rhs.extend(&self.rhs_p);
        rhs.resize(system.n_rows, 0.0);
        eliminate_fixed(&mut system, &mut rhs, &self.fixed);
        let assembled = clock.elapsed();
        let x = self.linear.solve(&system, &rhs, None)?;
        debug!("flow step: assembly {:.2?}, solve {:.2?}", assembled, clock.elapsed() - assembled);
        let u = Field::new(self.disc.velocity.clone(), x[..nv].to_vec())?;
        let p = Field::new(self.disc.pressure.clone(), x[nv..nv + np].to_vec())?;
        Ok((u, p))
    }
}

fn column(c: &[f64]) -> CsrMatrix {
    let mut t = Triplets::new(c.len(), 1);
    for (i, &v) in c.iter().enumerate() {
        t.push(i, 0, v);
    }
    t.to_csr()
}

fn diag_entry(n: usize, i: usize) -> CsrMatrix {
    let mut t = Triplets::new(n, n);
    t.push(i, i, 0.0);
    t.to_csr()
}

/// `c_i = ∫ φ_i` for a scalar DG space.
pub fn mean_functional(space: &Space) -> Result<Vec<f64>> {
    let mesh = &*space.mesh;
    let n = space.dofs_per_element;
    let rule = simplex_rule(mesh.dim, space.degree)?;
    let mut vals = vec![0.0; n];
    let mut c = vec![0.0; space.total_dofs];
    for k in 0..mesh.n_elements() {
        let det = mesh.map(k).det;
        for q in 0..rule.len() {
            space.eval_scalar(k, &rule.points[q], &mut vals, None);
            for i in 0..n {
                c[k * n + i] += rule.weights[q] * det * vals[i];
            }
        }
    }
    Ok(c)
}

/// Imposes `x_i = value` for the listed dofs, moving the eliminated columns
/// to the right-hand side so the matrix stays symmetric. The sparsity
/// pattern is left unchanged.
fn eliminate_fixed(a: &mut CsrMatrix, rhs: &mut [f64], fixed: &[(usize, f64)]) {
    if fixed.is_empty() {
        return;
    }
    let mut value = vec![None; a.n_rows];
    for &(i, v) in fixed {
        value[i] = Some(v);
    }
    for i in 0..a.n_rows {
        let (lo, hi) = (a.indptr[i], a.indptr[i + 1]);
        if let Some(vi) = value[i] {
            for p in lo..hi {
                a.values[p] = if a.indices[p] == i { 1.0 } else { 0.0 };
            }
            rhs[i] = vi;
        } else {
            for p in lo..hi {
                if let Some(vj) = value[a.indices[p]] {
                    rhs[i] -= a.values[p] * vj;
                    a.values[p] = 0.0;
                }
            }
        }
    }
}

/// Heat solver with the iteration-independent diffusion part kept.
pub struct HeatSolver {
    space: Arc<Space>,
    data: ProblemData,
    a: CsrMatrix,
    rhs: Vec<f64>,
    linear: ReusableSolver,
}

impl HeatSolver {
    pub fn new(disc: &Discretization, data: &ProblemData, config: &SolverConfig) -> Result<HeatSolver> {
        let space = disc.temperature.clone();
        let (a, mut rhs) = forms::assemble_ah(&space, data, &config.penalty)?;
        for (r, g) in rhs.iter_mut().zip(forms::assemble_heat_load(&space, data)?) {
            *r += g;
        }
        Ok(HeatSolver { space, data: data.clone(), a, rhs, linear: ReusableSolver::new(SystemKind::General, config.linear) })
    }

    pub fn stats(&self) -> crate::linsolve::SolverStats {
        self.linear.stats
    }

    /// Solves `(A + C(u)) T = rhs`.
    pub fn solve(&mut self, u: &Field) -> Result<Field> {
        let clock = Instant::now();
        let (c, c_rhs) = forms::assemble_ch(u, &self.space, &self.data)?;
        let m = self.a.add(1.0, &c, 1.0);
        let rhs: Vec<f64> = self.rhs.iter().zip(&c_rhs).map(|(a, b)| a + b).collect();
        let assembled = clock.elapsed();
        let x = self.linear.solve(&m, &rhs, None)?;
        debug!("heat step: assembly {:.2?}, solve {:.2?}", assembled, clock.elapsed() - assembled);
        Field::new(self.space.clone(), x)
    }
}

/// One flow step: `(u^k, p^k)` from `(T^{k−1}, u^{k−1})`.
pub fn solve_flow_step(
    disc: &Discretization,
    t_prev: &Field,
    u_prev: &Field,
    data: &ProblemData,
    config: &SolverConfig,
) -> Result<(Field, Field)> {
    FlowSolver::new(disc, data, config)?.solve(t_prev, Some(u_prev))
}

/// One heat step: `T^k` advected by `u`.
pub fn solve_heat_step(disc: &Discretization, u: &Field, data: &ProblemData, config: &SolverConfig) -> Result<Field> {
    HeatSolver::new(disc, data, config)?.solve(u)
}

/// Norms of one Picard increment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Increment {
    /// `‖δ_u‖_{dG,div}` (squared form).
    pub du: f64,
    /// `‖δ_p‖_{L²}`.
    pub dp: f64,
    /// `‖δ_T‖_{dG,T}`.
    pub dt: f64,
    /// `‖(δ_u, δ_p, δ_T)‖_E`.
    pub energy: f64,
    /// Largest relative increment.
    pub relative: f64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub increments: Vec<Increment>,
    pub u: Field,
    pub p: Field,
    pub t: Field,
    pub wall_time: Duration,
    pub flow_factorizations: usize,
    pub heat_factorizations: usize,
}

/// Relative increment with an absolute fallback for vanishing fields.
fn relative(delta: f64, reference: f64) -> f64 {
    if reference < 1e-14 {
        delta
    } else {
        delta / reference
    }
}

fn difference(a: &Field, b: &Field) -> Field {
    Field { space: a.space.clone(), coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect() }
}

/// Runs the Picard iteration on a prepared discretization.
///
/// Initialization: a Darcy solve with `ν(0)` and no Forchheimer drag,
/// followed by a heat solve with that velocity.
pub fn fixed_point_solve_on(disc: &Discretization, data: &ProblemData, config: &SolverConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let mut flow = FlowSolver::new(disc, data, config)?;
    let mut heat = HeatSolver::new(disc, data, config)?;
    let norms = NormOperators::new(disc, data, &config.penalty)?;

    let t0 = Field::zeros(disc.temperature.clone());
    let (mut u, mut p) = flow.solve(&t0, None)?;
    let mut t = heat.solve(&u)?;
    let mut increments = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=config.max_iter {
        let (u_new, p_new) = flow.solve(&t, Some(&u))?;
        let advecting = match config.heat_velocity {
            HeatVelocity::Current => &u_new,
            HeatVelocity::Previous => &u,
        };
        let t_new = heat.solve(advecting)?;
        let (du, dp, dt) = (difference(&u_new, &u), difference(&p_new, &p), difference(&t_new, &t));
        let inc_u = norms.velocity(&du);
        let inc_p = norms.pressure(&dp);
        let inc_t = norms.temperature(&dt);
        let parts =
            [relative(inc_u, norms.velocity(&u_new)), relative(inc_p, norms.pressure(&p_new)), relative(inc_t, norms.temperature(&t_new))];
        let rel = parts[0].max(parts[1]).max(parts[2]);
        let energy = norms.energy(&du, &dp, &dt)?;
        increments.push(Increment { du: inc_u, dp: inc_p, dt: inc_t, energy, relative: rel });
        debug!("iteration {k}: relative increments u {:.3e}, p {:.3e}, T {:.3e}", parts[0], parts[1], parts[2]);
        u = u_new;
        p = p_new;
        t = t_new;
        iterations = k;
        if rel < config.rel_tol {
            converged = true;
            break;
        }
    }
    info!(
        "{} iterations ({}), {} flow / {} heat factorizations, {:.2?}",
        iterations,
        if converged { "converged" } else { "not converged" },
        flow.stats().factorizations,
        heat.stats().factorizations,
        start.elapsed()
    );
    Ok(SolveReport {
        iterations,
        converged,
        increments,
        u,
        p,
        t,
        wall_time: start.elapsed(),
        flow_factorizations: flow.stats().factorizations,
        heat_factorizations: heat.stats().factorizations,
    })
}

/// Builds the mesh and spaces of `case` and runs the Picard iteration.
pub fn fixed_point_solve(case: &CaseDefinition, mesh: Arc<Mesh>, config: &SolverConfig) -> Result<SolveReport> {
    if mesh.dim != case.dim {
        return Err(Error::InvalidArgument(format!("case {} needs a {}D mesh", case.name, case.dim)));
    }
    let disc = Discretization::new(mesh, config)?;
    fixed_point_solve_on(&disc, &case.data, config)
}

/// Ratios `‖δ^k‖_E / ‖δ^{k−1}‖_E` of successive increments; empty when
/// fewer than three iterations were run.
pub fn contraction_probe(report: &SolveReport) -> Vec<f64> {
    let h = &report.increments;
    if h.len() < 3 {
        return Vec::new();
    }
    h.windows(2).map(|w| if w[0].energy > 0.0 { w[1].energy / w[0].energy } else { 0.0 }).collect()
}

/// `‖div u‖_{L²}` of a velocity field.
pub fn divergence_norm(u: &Field) -> Result<f64> {
    if u.space.kind == SpaceKind::DgScalar {
        return Err(Error::SpaceMismatch("divergence needs a vector field".into()));
    }
    analysis::div_l2(u)
}
