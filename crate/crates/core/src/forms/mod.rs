//! Bilinear and trilinear forms of the flow and heat problems, assembled
//! into sparse matrices and load vectors.

mod data;
mod flow;
mod heat;
mod local;
mod penalty;

pub use data::{
    constant_tensor, default_viscosity, scaled_identity, BoundarySpec, FlowBc, ProblemData, ScalarFn, TensorFn, ThermalBc, VectorFn,
    ViscosityFn,
};
pub use flow::{
    assemble_bh, assemble_dp, assemble_du, assemble_flow_rhs, assemble_mbeta, assemble_mnu, assemble_velocity_mass, rt_boundary_values,
};
pub use heat::{assemble_ah, assemble_ch, assemble_heat_load, conductivity_trace};
pub use penalty::{penalty_rho, penalty_sigma, penalty_xi, PenaltyConfig};

/// Velocity discretisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Discontinuous velocity, pressure and temperature.
    DgDgDg,
    /// Raviart–Thomas velocity with discontinuous pressure and temperature.
    RtDgDg,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::DgDgDg => "dg",
            Scheme::RtDgDg => "rt",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Scheme> {
        match s {
            "dg" | "dg-dg-dg" => Ok(Scheme::DgDgDg),
            "rt" | "rt-dg-dg" => Ok(Scheme::RtDgDg),
            _ => Err(crate::Error::InvalidArgument(format!("unknown scheme `{s}` (expected dg or rt)"))),
        }
    }
}
