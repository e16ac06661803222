//! Face penalty coefficients of the interior penalty terms.

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig { alpha1: 10.0, alpha2: 10.0, alpha3: 10.0 }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2), ("alpha3", self.alpha3)] {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {a}")));
            }
        }
        Ok(())
    }
}

/// Degree factor `ℓ²`, with `ℓ = 0` treated as `ℓ = 1`.
fn degree_sq(degree: usize) -> f64 {
    let l = degree.max(1) as f64;
    l * l
}

fn owners(mesh: &Mesh, f: usize) -> impl Iterator<Item = usize> {
    let face = &mesh.faces[f];
    std::iter::once(face.elem_plus).chain(face.elem_minus)
}

/// `σ = α₁ max_κ Θ̄_κ ℓ² / h_κ` over the owners of face `f`; `theta_bar` holds
/// the per-element trace of the conductivity tensor.
pub fn penalty_sigma(mesh: &Mesh, f: usize, cfg: &PenaltyConfig, theta_bar: &[f64], degree: usize) -> f64 {
    let l2 = degree_sq(degree);
    owners(mesh, f).map(|k| cfg.alpha1 * theta_bar[k] * l2 / mesh.elem_diameter[k]).fold(0.0, f64::max)
}

/// `ξ = α₂ max_κ ℓ² / h_κ`.
pub fn penalty_xi(mesh: &Mesh, f: usize, cfg: &PenaltyConfig, degree: usize) -> f64 {
    let l2 = degree_sq(degree);
    owners(mesh, f).map(|k| cfg.alpha2 * l2 / mesh.elem_diameter[k]).fold(0.0, f64::max)
}

/// `ϱ = α₃ min_κ h_κ / m`, with `m = 0` treated as `m = 1`.
pub fn penalty_rho(mesh: &Mesh, f: usize, cfg: &PenaltyConfig, degree: usize) -> f64 {
    let m = degree.max(1) as f64;
    owners(mesh, f).map(|k| cfg.alpha3 * mesh.elem_diameter[k] / m).fold(f64::INFINITY, f64::min)
}
