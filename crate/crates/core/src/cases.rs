//! Problem instances: manufactured solutions on the unit square and cube,
//! and the L-shaped channel driven by boundary ramps.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fespace::quadrature::gauss_legendre;
use crate::forms::{default_viscosity, scaled_identity, BoundarySpec, FlowBc, ProblemData, ScalarFn, ThermalBc, VectorFn};
use crate::geom::{self, Point};
use crate::mesh::{build_lshape_mesh, build_structured_box_mesh, BoxExtent, Mesh};

/// Smooth plateau profile: `φ_m` outside `[a, d]`, `φ_M` on `[b, c]`,
/// cosine transitions on `[a, b]` and `[c, d]`, defined on `[0, e]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampProfile {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub phi_min: f64,
    pub phi_max: f64,
}

impl RampProfile {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, phi_min: f64, phi_max: f64) -> Result<RampProfile> {
        if !(0.0 <= a && a < b && b <= c && c < d && d <= e) {
            return Err(Error::InvalidArgument(format!(
                "ramp breakpoints must satisfy 0 ≤ a < b ≤ c < d ≤ e, got ({a}, {b}, {c}, {d}, {e})"
            )));
        }
        Ok(RampProfile { a, b, c, d, e, phi_min, phi_max })
    }

    /// Value at `x`, without range checks.
    pub fn value(&self, x: f64) -> f64 {
        let (lo, hi) = (self.phi_min, self.phi_max);
        let half = 0.5 * (hi - lo);
        if x < self.a || x >= self.d {
            lo
        } else if x < self.b {
            lo + half * (1.0 - (PI * (x - self.a) / (self.b - self.a)).cos())
        } else if x < self.c {
            hi
        } else {
            lo + half * (1.0 + (PI * (x - self.c) / (self.d - self.c)).cos())
        }
    }

    /// Exact integral over `[0, e]`.
    pub fn integral(&self) -> f64 {
        let ramps = 0.5 * (self.b - self.a + self.d - self.c);
        self.phi_min * self.e + (self.phi_max - self.phi_min) * (ramps + self.c - self.b)
    }
}

/// Checked evaluation of a ramp on `[0, e]`.
pub fn ramp_eval(r: &RampProfile, x: f64) -> Result<f64> {
    if !(0.0..=r.e).contains(&x) {
        return Err(Error::InvalidArgument(format!("ramp argument {x} outside [0, {}]", r.e)));
    }
    Ok(r.value(x))
}

/// Exact velocity, pressure and temperature with the derivatives needed
/// by the error norms.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: VectorFn,
    pub p: ScalarFn,
    pub grad_p: VectorFn,
    pub t: ScalarFn,
    pub grad_t: VectorFn,
    pub lap_t: ScalarFn,
}

/// Computational domain of a case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    UnitBox,
    LShape,
}

/// How to build the mesh of a case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeshSpec {
    /// `n` cells per unit length.
    Cells(usize),
    /// Largest element diameter at most `h`.
    TargetH(f64),
    /// Structured unit-box mesh with exactly this many simplices.
    Elements(usize),
    /// Largest element diameter closest to `1/v`.
    InverseH(f64),
}

#[derive(Clone)]
pub struct CaseDefinition {
    pub name: &'static str,
    pub dim: usize,
    pub domain: Domain,
    pub data: ProblemData,
    pub exact: Option<ExactSolution>,
    /// Default temperature and velocity degree `ℓ`.
    pub default_degree: usize,
}

impl std::fmt::Debug for CaseDefinition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CaseDefinition").field("name", &self.name).field("dim", &self.dim).finish_non_exhaustive()
    }
}

pub const CASE_NAMES: [&str; 4] = ["conv2d", "conv3d", "lshape2d", "lshape3d"];

pub fn case_by_name(name: &str) -> Result<CaseDefinition> {
    match name {
        "conv2d" => Ok(case_convergence_2d()),
        "conv3d" => Ok(case_convergence_3d()),
        "lshape2d" => case_lshape(2),
        "lshape3d" => case_lshape(3),
        _ => Err(Error::InvalidArgument(format!("unknown case `{name}` (expected one of {})", CASE_NAMES.join(", ")))),
    }
}

impl CaseDefinition {
    pub fn build_mesh(&self, spec: MeshSpec) -> Result<Mesh> {
        match (self.domain, spec) {
            (Domain::UnitBox, MeshSpec::Cells(n)) => build_structured_box_mesh(self.dim, [n, n, n], &BoxExtent::unit()),
            (Domain::UnitBox, MeshSpec::TargetH(h)) => {
                let n = cells_for_h(self.dim, h)?;
                build_structured_box_mesh(self.dim, [n, n, n], &BoxExtent::unit())
            }
            (Domain::UnitBox, MeshSpec::Elements(count)) => {
                let cells = box_cells_for_count(self.dim, count)?;
                build_structured_box_mesh(self.dim, cells, &BoxExtent::unit())
            }
            (Domain::UnitBox, MeshSpec::InverseH(v)) => {
                let n = cells_for_inverse_h(self.dim, v)?;
                build_structured_box_mesh(self.dim, [n, n, n], &BoxExtent::unit())
            }
            (Domain::LShape, MeshSpec::InverseH(v)) => {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidArgument(format!("1/h must be positive, got {v}")));
                }
                build_lshape_mesh(self.dim, 1.0 / v)
            }
            (Domain::LShape, MeshSpec::Cells(n)) => build_lshape_mesh(self.dim, (self.dim as f64).sqrt() / n.max(1) as f64),
            (Domain::LShape, MeshSpec::TargetH(h)) => build_lshape_mesh(self.dim, h),
            (Domain::LShape, MeshSpec::Elements(_)) => {
                Err(Error::InvalidArgument("element-count meshes are only available on the unit box".into()))
            }
        }
    }
}

fn cells_for_h(dim: usize, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("mesh size must be positive, got {h}")));
    }
    Ok(((dim as f64).sqrt() / h).ceil().max(1.0) as usize)
}

/// Cells per side of the structured unit box whose diameter `√d / n` is closest to `1/v`.
pub fn cells_for_inverse_h(dim: usize, v: f64) -> Result<usize> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidArgument(format!("1/h must be positive, got {v}")));
    }
    Ok(((dim as f64).sqrt() * v).round().max(1.0) as usize)
}

/// Most isotropic box grid with `count` simplices (2 per square, 6 per cube).
fn box_cells_for_count(dim: usize, count: usize) -> Result<[usize; 3]> {
    let per = if dim == 2 { 2 } else { 6 };
    if count == 0 || !count.is_multiple_of(per) {
        return Err(Error::InvalidArgument(format!("{count} elements cannot tile the unit box in {dim}D")));
    }
    let cells = count / per;
    let mut best: Option<[usize; 3]> = None;
    let spread = |c: &[usize; 3]| {
        let used = &c[..dim];
        used.iter().max().unwrap() - used.iter().min().unwrap()
    };
    for nx in 1..=cells {
        if !cells.is_multiple_of(nx) {
            continue;
        }
        let rest = cells / nx;
        let cands: Vec<[usize; 3]> = if dim == 2 {
            vec![[nx, rest, 1]]
        } else {
            (1..=rest).filter(|ny| rest.is_multiple_of(*ny)).map(|ny| [nx, ny, rest / ny]).collect()
        };
        for c in cands {
            let better = match &best {
                None => true,
                Some(b) => spread(&c) < spread(b) || (spread(&c) == spread(b) && c > *b),
            };
            if better {
                best = Some(c);
            }
        }
    }
    Ok(best.unwrap())
}

fn manufactured_data(ex: &ExactSolution) -> ProblemData {
    let viscosity = default_viscosity();
    let (u, gp, t, gt, lt) = (ex.u.clone(), ex.grad_p.clone(), ex.t.clone(), ex.grad_t.clone(), ex.lap_t.clone());
    let nu = viscosity.clone();
    // K = I, β = 1, Θ = I.
    let f: VectorFn = Arc::new(move |x| {
        let uv = u(x);
        let c = nu(t(x)) + geom::norm(&uv);
        geom::add(&geom::scale(&uv, c), &gp(x))
    });
    let u = ex.u.clone();
    let g: ScalarFn = Arc::new(move |x| -lt(x) + geom::dot(&u(x), &gt(x)));
    let p = ex.p.clone();
    let t = ex.t.clone();
    ProblemData {
        permeability: scaled_identity(1.0),
        conductivity: scaled_identity(1.0),
        beta: 1.0,
        viscosity,
        f,
        g,
        bcs: BoundarySpec::uniform(FlowBc::DirichletPressure(p), ThermalBc::DirichletTemperature(t)),
    }
}

/// Manufactured solution on the unit square with `K = I`, `β = 1`, `Θ = I`.
pub fn case_convergence_2d() -> CaseDefinition {
    let tp = 2.0 * PI;
    let u: VectorFn = Arc::new(move |x: &Point| {
        let (s, c) = (tp * x[1]).sin_cos();
        [x[0] * x[0] * s, x[0] / PI * c, 0.0]
    });
    let pfun = |x: &Point| x[0] * x[0] + 3.0 * x[1] - 2.0 * x[0] * x[1];
    let p: ScalarFn = Arc::new(move |x| pfun(x) * (tp * x[0]).sin());
    let grad_p: VectorFn = Arc::new(move |x| {
        let (s, c) = (tp * x[0]).sin_cos();
        [(2.0 * x[0] - 2.0 * x[1]) * s + tp * pfun(x) * c, (3.0 - 2.0 * x[0]) * s, 0.0]
    });
    let q = |x: &Point| -x[1] * x[1] + 2.0 * x[0];
    let t: ScalarFn = Arc::new(move |x| q(x) * (tp * x[0]).cos());
    let grad_t: VectorFn = Arc::new(move |x| {
        let (s, c) = (tp * x[0]).sin_cos();
        [2.0 * c - tp * q(x) * s, -2.0 * x[1] * c, 0.0]
    });
    let lap_t: ScalarFn = Arc::new(move |x| {
        let (s, c) = (tp * x[0]).sin_cos();
        -4.0 * tp * s - tp * tp * q(x) * c - 2.0 * c
    });
    let exact = ExactSolution { u, p, grad_p, t, grad_t, lap_t };
    CaseDefinition {
        name: "conv2d",
        dim: 2,
        domain: Domain::UnitBox,
        data: manufactured_data(&exact),
        exact: Some(exact),
        default_degree: 2,
    }
}

/// Manufactured solution on the unit cube with `K = I`, `β = 1`, `Θ = I`.
/// The second velocity component uses `sin(2πz)` so that the field is
/// divergence free.
pub fn case_convergence_3d() -> CaseDefinition {
    let tp = 2.0 * PI;
    let u: VectorFn = Arc::new(move |x: &Point| {
        let (sy, cy) = (tp * x[1]).sin_cos();
        let (sz, cz) = (tp * x[2]).sin_cos();
        [x[0] * x[0] * sy * sz, -x[0] / PI * cy * sz, 2.0 * x[0] / PI * sy * cz]
    });
    let pp = |x: &Point| x[0] * x[0] + 3.0 * x[1] - 2.0 * x[0] * x[1] + x[0] * x[2] - x[2] * x[2];
    let ps = move |x: &Point| (tp * x[0]).sin() * (tp * x[1]).sin() * (tp * x[2]).cos();
    let p: ScalarFn = Arc::new(move |x| pp(x) * ps(x));
    let grad_p: VectorFn = Arc::new(move |x| {
        let (sx, cx) = (tp * x[0]).sin_cos();
        let (sy, cy) = (tp * x[1]).sin_cos();
        let (sz, cz) = (tp * x[2]).sin_cos();
        let gp = [2.0 * x[0] - 2.0 * x[1] + x[2], 3.0 - 2.0 * x[0], x[0] - 2.0 * x[2]];
        let s = sx * sy * cz;
        let gs = [tp * cx * sy * cz, tp * sx * cy * cz, -tp * sx * sy * sz];
        let v = pp(x);
        [gp[0] * s + v * gs[0], gp[1] * s + v * gs[1], gp[2] * s + v * gs[2]]
    });
    let tq = |x: &Point| -3.0 * x[0] + 2.0 * x[1] * x[1] + 4.0 * x[1] * x[2] + x[2];
    let grad_q = |x: &Point| [-3.0, 4.0 * x[1] + 4.0 * x[2], 4.0 * x[1] + 1.0];
    let tr = move |x: &Point| (tp * x[0]).cos() * (tp * x[1]).cos() * (tp * x[2]).sin();
    let grad_r = move |x: &Point| {
        let (sx, cx) = (tp * x[0]).sin_cos();
        let (sy, cy) = (tp * x[1]).sin_cos();
        let (sz, cz) = (tp * x[2]).sin_cos();
        [-tp * sx * cy * sz, -tp * cx * sy * sz, tp * cx * cy * cz]
    };
    let t: ScalarFn = Arc::new(move |x| tq(x) * tr(x));
    let grad_t: VectorFn = Arc::new(move |x| {
        let (gq, gr) = (grad_q(x), grad_r(x));
        let (q, r) = (tq(x), tr(x));
        [gq[0] * r + q * gr[0], gq[1] * r + q * gr[1], gq[2] * r + q * gr[2]]
    });
    let lap_t: ScalarFn = Arc::new(move |x| {
        let r = tr(x);
        4.0 * r + 2.0 * geom::dot(&grad_q(x), &grad_r(x)) - 3.0 * tp * tp * tq(x) * r
    });
    let exact = ExactSolution { u, p, grad_p, t, grad_t, lap_t };
    CaseDefinition {
        name: "conv3d",
        dim: 3,
        domain: Domain::UnitBox,
        data: manufactured_data(&exact),
        exact: Some(exact),
        default_degree: 2,
    }
}

/// Inflow velocity profile on `y ∈ [0, 2]`.
pub fn lshape_inflow_ramp() -> RampProfile {
    RampProfile { a: 0.5, b: 0.9, c: 1.1, d: 1.5, e: 2.0, phi_min: 0.0, phi_max: 1.0 }
}

/// Outflow velocity profile on `y ∈ [0, 2]`; the plateau is set so that the
/// outflow balances the inflow.
pub fn lshape_outflow_ramp() -> RampProfile {
    RampProfile { a: 1.25, b: 1.45, c: 1.55, d: 1.75, e: 2.0, phi_min: 0.0, phi_max: 2.0 }
}

/// Inflow temperature profile on `y ∈ [0, 2]`.
pub fn lshape_temperature_ramp() -> RampProfile {
    RampProfile { a: 0.5, b: 0.9, c: 1.1, d: 1.5, e: 2.0, phi_min: 0.0, phi_max: 5.0 }
}

pub const LSHAPE_ROBIN_GAMMA: f64 = 0.1;
pub const LSHAPE_T_EXT: f64 = 0.5;
/// Conductivity scale of the L-shaped channel (advection dominated).
pub const LSHAPE_CONDUCTIVITY: f64 = 0.01;

/// Net flux through a ramp-driven boundary, integrated with composite
/// Gauss–Legendre quadrature on `[0, e]`.
fn ramp_flux(r: &RampProfile) -> f64 {
    let (xs, ws) = gauss_legendre(8);
    let panels = 400;
    let h = r.e / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        for (x, w) in xs.iter().zip(&ws) {
            s += h * w * r.value((p as f64 + x) * h);
        }
    }
    s
}

/// L-shaped channel `(0,4)×(0,2) \ (2,4)×(0,1)` (extruded to `z ∈ (0,2)` in
/// 3D with the notch `z < 1`): fluid injected through `x = 0` and
/// extracted through `x = 4`, hot inflow, Robin exchange elsewhere.
pub fn case_lshape(dim: usize) -> Result<CaseDefinition> {
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidArgument(format!("dimension must be 2 or 3, got {dim}")));
    }
    let (uin, uout, tin) = (lshape_inflow_ramp(), lshape_outflow_ramp(), lshape_temperature_ramp());
    let depth = if dim == 3 { 2.0 } else { 1.0 };
    let (qin, qout) = (ramp_flux(&uin) * depth, ramp_flux(&uout) * depth);
    if (qin - qout).abs() > 1e-10 {
        return Err(Error::Data(format!("inflow flux {qin} and outflow flux {qout} differ")));
    }
    let mut bcs = BoundarySpec::default();
    bcs.flow.insert("inflow".into(), FlowBc::NormalVelocity(Arc::new(move |x| -uin.value(x[1]))));
    bcs.flow.insert("outflow".into(), FlowBc::NormalVelocity(Arc::new(move |x| uout.value(x[1]))));
    bcs.flow.insert("wall".into(), FlowBc::NormalVelocity(Arc::new(|_| 0.0)));
    bcs.thermal.insert("inflow".into(), ThermalBc::DirichletTemperature(Arc::new(move |x| tin.value(x[1]))));
    bcs.default_thermal = Some(ThermalBc::Robin { gamma: LSHAPE_ROBIN_GAMMA, t_ext: LSHAPE_T_EXT });
    let data = ProblemData {
        permeability: scaled_identity(1.0),
        conductivity: scaled_identity(LSHAPE_CONDUCTIVITY),
        beta: 1.0,
        viscosity: default_viscosity(),
        f: Arc::new(|_| [0.0; 3]),
        g: Arc::new(|_| 0.0),
        bcs,
    };
    Ok(CaseDefinition {
        name: if dim == 2 { "lshape2d" } else { "lshape3d" },
        dim,
        domain: Domain::LShape,
        data,
        exact: None,
        default_degree: 2,
    })
}

/// Reentrant corner (2D) or the closest point on the reentrant edges (3D).
pub fn lshape_reentrant_distance(dim: usize, x: &Point) -> f64 {
    let corner = |a: f64, b: f64| (a * a + b * b).sqrt();
    if dim == 2 {
        return corner(x[0] - 2.0, x[1] - 1.0);
    }
    // Edges {x=2,y=1, z∈[0,1]}, {x=2,z=1, y∈[0,1]}, {y=1,z=1, x∈[2,4]}.
    let clamp = |v: f64, lo: f64, hi: f64| v.max(lo).min(hi);
    let e1 = geom::norm(&[x[0] - 2.0, x[1] - 1.0, x[2] - clamp(x[2], 0.0, 1.0)]);
    let e2 = geom::norm(&[x[0] - 2.0, x[1] - clamp(x[1], 0.0, 1.0), x[2] - 1.0]);
    let e3 = geom::norm(&[x[0] - clamp(x[0], 2.0, 4.0), x[1] - 1.0, x[2] - 1.0]);
    e1.min(e2).min(e3)
}
