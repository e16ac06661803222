//! Finite-element solver for steady Darcy–Forchheimer flow coupled with
//! advection–diffusion heat transport through a temperature-dependent
//! viscosity.
//!
//! Two discretizations are provided on simplicial meshes:
//! * `dG-dG-dG`: discontinuous velocity, pressure, and temperature;
//! * `RT-dG-dG`: Raviart–Thomas velocity with discontinuous pressure and
//!   temperature.
//!
//! The nonlinear problem is solved by a Picard splitting that alternates a
//! linearized flow solve and a linear heat solve.

pub mod analysis;
pub mod cases;
pub mod cli;
pub mod error;
pub mod fespace;
pub mod forms;
pub mod geom;
pub mod io;
pub mod linsolve;
pub mod mesh;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
