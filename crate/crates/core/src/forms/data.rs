//! Coefficients, sources and boundary conditions of a coupled problem.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{self, Mat3, Point};
use crate::mesh::Mesh;

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(&Point) -> Mat3 + Send + Sync>;
pub type ViscosityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Boundary condition of the flow problem on one boundary tag.
#[derive(Clone)]
pub enum FlowBc {
    /// Prescribed pressure `p = p_D`.
    DirichletPressure(ScalarFn),
    /// Prescribed normal velocity `u·n = u_n` (outward normal).
    NormalVelocity(ScalarFn),
}

/// Boundary condition of the heat problem on one boundary tag.
#[derive(Clone)]
pub enum ThermalBc {
    DirichletTemperature(ScalarFn),
    /// `Θ∇T·n + γ (T − T_ext) = 0`.
    Robin {
        gamma: f64,
        t_ext: f64,
    },
}

impl fmt::Debug for FlowBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowBc::DirichletPressure(_) => write!(f, "DirichletPressure"),
            FlowBc::NormalVelocity(_) => write!(f, "NormalVelocity"),
        }
    }
}

impl fmt::Debug for ThermalBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThermalBc::DirichletTemperature(_) => write!(f, "DirichletTemperature"),
            ThermalBc::Robin { gamma, t_ext } => write!(f, "Robin {{ gamma: {gamma}, t_ext: {t_ext} }}"),
        }
    }
}

/// Boundary conditions keyed by boundary tag, with optional fallbacks for
/// tags that are not listed.
#[derive(Clone, Debug, Default)]
pub struct BoundarySpec {
    pub flow: BTreeMap<String, FlowBc>,
    pub thermal: BTreeMap<String, ThermalBc>,
    pub default_flow: Option<FlowBc>,
    pub default_thermal: Option<ThermalBc>,
}

impl BoundarySpec {
    /// The same pair of conditions on every boundary face.
    pub fn uniform(flow: FlowBc, thermal: ThermalBc) -> BoundarySpec {
        BoundarySpec { default_flow: Some(flow), default_thermal: Some(thermal), ..Default::default() }
    }

    pub fn flow_bc(&self, tag: &str) -> Result<&FlowBc> {
        self.flow.get(tag).or(self.default_flow.as_ref()).ok_or_else(|| Error::Data(format!("no flow boundary condition for tag `{tag}`")))
    }

    pub fn thermal_bc(&self, tag: &str) -> Result<&ThermalBc> {
        self.thermal
            .get(tag)
            .or(self.default_thermal.as_ref())
            .ok_or_else(|| Error::Data(format!("no thermal boundary condition for tag `{tag}`")))
    }

    /// Checks that every boundary tag of `mesh` has one flow and one thermal condition.
    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        for tag in mesh.boundary_tags() {
            self.flow_bc(&tag)?;
            if let ThermalBc::Robin { gamma, t_ext } = self.thermal_bc(&tag)? {
                if !(*gamma >= 0.0) || !t_ext.is_finite() {
                    return Err(Error::Data(format!("invalid Robin data on tag `{tag}`")));
                }
            }
        }
        Ok(())
    }

    /// True when no boundary face carries a pressure condition, so the
    /// pressure is determined only up to a constant.
    pub fn needs_pressure_gauge(&self, mesh: &Mesh) -> bool {
        mesh.boundary_tags().iter().all(|t| matches!(self.flow_bc(t), Ok(FlowBc::NormalVelocity(_))))
    }
}

/// Coefficients and sources of the coupled flow and heat problem.
#[derive(Clone)]
pub struct ProblemData {
    /// Permeability `K`, assumed constant on each element.
    pub permeability: TensorFn,
    /// Heat conductivity `Θ`, assumed constant on each element.
    pub conductivity: TensorFn,
    /// Forchheimer coefficient.
    pub beta: f64,
    pub viscosity: ViscosityFn,
    pub f: VectorFn,
    pub g: ScalarFn,
    pub bcs: BoundarySpec,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData").field("beta", &self.beta).field("bcs", &self.bcs).finish_non_exhaustive()
    }
}

/// `ν(S) = 1 + e^{−S}`.
pub fn default_viscosity() -> ViscosityFn {
    Arc::new(|s: f64| 1.0 + (-s).exp())
}

pub fn constant_tensor(m: Mat3) -> TensorFn {
    Arc::new(move |_| m)
}

pub fn scaled_identity(s: f64) -> TensorFn {
    constant_tensor(geom::mat_scale(&geom::identity(), s))
}

impl ProblemData {
    /// Per-element inverse permeability, checking symmetric positive definiteness.
    pub fn inverse_permeability(&self, mesh: &Mesh) -> Result<Vec<Mat3>> {
        (0..mesh.n_elements())
            .map(|k| {
                let m = spd_at(&self.permeability, mesh, k, "permeability")?;
                Ok(geom::inverse(&m, mesh.dim))
            })
            .collect()
    }

    /// Per-element conductivity tensors, checking symmetric positive definiteness.
    pub fn conductivity_tensors(&self, mesh: &Mesh) -> Result<Vec<Mat3>> {
        (0..mesh.n_elements()).map(|k| spd_at(&self.conductivity, mesh, k, "conductivity")).collect()
    }

    /// `ν(s)`, rejecting non-positive or non-finite values.
    pub fn viscosity_at(&self, s: f64) -> Result<f64> {
        let v = (self.viscosity)(s);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Data(format!("viscosity law returned {v} at temperature {s}")))
        }
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::Data(format!("Forchheimer coefficient must be non-negative, got {}", self.beta)));
        }
        self.inverse_permeability(mesh)?;
        self.conductivity_tensors(mesh)?;
        self.bcs.validate(mesh)
    }
}

fn spd_at(t: &TensorFn, mesh: &Mesh, k: usize, name: &str) -> Result<Mat3> {
    let m = t(&mesh.centroid(k));
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Data(format!("{name} tensor is not finite on element {k}")));
    }
    match geom::spd_min_pivot(&m, mesh.dim) {
        None => Err(Error::Data(format!("{name} tensor is not symmetric on element {k}"))),
        Some(p) if p <= 0.0 => Err(Error::Data(format!("{name} tensor is not positive definite on element {k}"))),
        Some(_) => Ok(m),
    }
}
