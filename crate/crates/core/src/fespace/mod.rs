//! Polynomial spaces, quadrature, and fields.

mod facequad;
mod interpolate;
pub mod poly;
pub mod quadrature;
pub mod rt;
mod space;

pub use facequad::{face_points, FacePoints};
pub use interpolate::{interpolate_scalar, interpolate_vector};
pub use poly::{DgBasis, MAX_DEGREE};
pub use quadrature::{quadrature, reference_measure, simplex_rule, QuadratureRule, MAX_QUADRATURE_DEGREE};
pub use rt::{bernstein, reference_face, reference_vertex, RtBasis, MAX_RT_DEGREE};
pub use space::{eval_basis, BasisValues, Field, Space, SpaceKind};
