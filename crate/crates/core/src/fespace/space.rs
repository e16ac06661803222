//! Discrete spaces on a mesh and fields bound to them.

use std::sync::Arc;

use super::poly::DgBasis;
use super::rt::RtBasis;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::{local_face_vertices, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    DgScalar,
    DgVector,
    Rt,
}

#[derive(Debug)]
pub struct Space {
    pub kind: SpaceKind,
    pub degree: usize,
    pub mesh: Arc<Mesh>,
    pub dofs_per_element: usize,
    pub total_dofs: usize,
    dg: Option<DgBasis>,
    rt: Option<RtBasis>,
    /// Global index and sign of every local RT dof, element-major.
    rt_dofs: Vec<(usize, f64)>,
}

/// Physical basis values of a space at one point of one element.
#[derive(Clone, Debug, Default)]
pub struct BasisValues {
    /// Scalar spaces: one value per basis function.
    pub values: Vec<f64>,
    /// Scalar spaces: physical gradients.
    pub gradients: Vec<Point>,
    /// Vector spaces: one vector per basis function.
    pub vectors: Vec<Point>,
    /// Vector spaces: divergences.
    pub divergences: Vec<f64>,
}

impl Space {
    pub fn dg_scalar(mesh: Arc<Mesh>, degree: usize) -> Result<Space> {
        let b = DgBasis::new(mesh.dim, degree)?;
        let n = b.len();
        Ok(Space {
            kind: SpaceKind::DgScalar,
            degree,
            total_dofs: n * mesh.n_elements(),
            dofs_per_element: n,
            mesh,
            dg: Some(b),
            rt: None,
            rt_dofs: Vec::new(),
        })
    }

    pub fn dg_vector(mesh: Arc<Mesh>, degree: usize) -> Result<Space> {
        let b = DgBasis::new(mesh.dim, degree)?;
        let n = b.len() * mesh.dim;
        Ok(Space {
            kind: SpaceKind::DgVector,
            degree,
            total_dofs: n * mesh.n_elements(),
            dofs_per_element: n,
            mesh,
            dg: Some(b),
            rt: None,
            rt_dofs: Vec::new(),
        })
    }

    pub fn rt(mesh: Arc<Mesh>, degree: usize) -> Result<Space> {
        let b = RtBasis::new(mesh.dim, degree)?;
        let d = mesh.dim;
        let nf = b.dofs_per_face();
        let ni = b.n_interior;
        let n_loc = b.len();
        let face_offset = mesh.n_faces() * nf;
        let mut rt_dofs = Vec::with_capacity(n_loc * mesh.n_elements());
        for k in 0..mesh.n_elements() {
            let ev = mesh.element(k);
            for f in 0..=d {
                let fi = mesh.element_face(k, f);
                let face = &mesh.faces[fi];
                let sign = if face.elem_plus == k { 1.0 } else { -1.0 };
                let globals: Vec<usize> = local_face_vertices(d, f).iter().map(|&l| ev[l]).collect();
                let pos: Vec<usize> = globals.iter().map(|g| face.vertices.iter().position(|v| v == g).unwrap()).collect();
                for alpha in &b.face_alphas {
                    let mut beta = vec![0; d];
                    for (i, &a) in alpha.iter().enumerate() {
                        beta[pos[i]] = a;
                    }
                    let idx = b.face_alphas.iter().position(|x| *x == beta).unwrap();
                    rt_dofs.push((fi * nf + idx, sign));
                }
            }
            for j in 0..ni {
                rt_dofs.push((face_offset + k * ni + j, 1.0));
            }
        }
        Ok(Space {
            kind: SpaceKind::Rt,
            degree,
            total_dofs: face_offset + ni * mesh.n_elements(),
            dofs_per_element: n_loc,
            mesh,
            dg: None,
            rt: Some(b),
            rt_dofs,
        })
    }

    /// Total polynomial degree of the basis functions.
    pub fn polynomial_degree(&self) -> usize {
        match self.kind {
            SpaceKind::Rt => self.degree + 1,
            _ => self.degree,
        }
    }

    pub fn is_vector(&self) -> bool {
        self.kind != SpaceKind::DgScalar
    }

    pub fn dg_basis(&self) -> Option<&DgBasis> {
        self.dg.as_ref()
    }

    pub fn rt_basis(&self) -> Option<&RtBasis> {
        self.rt.as_ref()
    }

    /// Number of scalar DG functions per element (DG spaces only).
    pub fn scalar_block(&self) -> usize {
        self.dg.as_ref().map(|b| b.len()).unwrap_or(0)
    }

    /// Global index and sign of local dof `i` of element `k`.
    #[inline]
    pub fn local_dof(&self, k: usize, i: usize) -> (usize, f64) {
        match self.kind {
            SpaceKind::Rt => self.rt_dofs[k * self.dofs_per_element + i],
            _ => (k * self.dofs_per_element + i, 1.0),
        }
    }

    /// Global dofs of element `k` in local order. Orientation signs are
    /// already folded into the values returned by the evaluators.
    pub fn element_dofs(&self, k: usize) -> Vec<usize> {
        (0..self.dofs_per_element).map(|i| self.local_dof(k, i).0).collect()
    }

    /// Global dof indices attached to face `f` (RT spaces only).
    pub fn face_dofs(&self, f: usize) -> Vec<usize> {
        match &self.rt {
            Some(b) => {
                let nf = b.dofs_per_face();
                (f * nf..(f + 1) * nf).collect()
            }
            None => Vec::new(),
        }
    }

    /// Physical values and gradients of a scalar DG basis.
    pub fn eval_scalar(&self, k: usize, xi: &Point, vals: &mut [f64], grads: Option<&mut [Point]>) {
        let b = self.dg.as_ref().expect("scalar evaluation needs a DG space");
        let map = self.mesh.map(k);
        let s = 1.0 / map.det.sqrt();
        match grads {
            Some(g) => {
                b.eval(xi, vals, Some(&mut *g));
                for i in 0..b.len() {
                    vals[i] *= s;
                    g[i] = geom::scale(&geom::mat_t_vec(&map.jac_inv, &g[i]), s);
                }
            }
            None => {
                b.eval(xi, vals, None);
                for v in vals.iter_mut().take(b.len()) {
                    *v *= s;
                }
            }
        }
    }

    /// Physical vector values and divergences of a DG vector or RT basis.
    pub fn eval_vector(&self, k: usize, xi: &Point, vals: &mut [Point], divs: &mut [f64]) {
        let map = self.mesh.map(k);
        match self.kind {
            SpaceKind::DgVector => {
                let b = self.dg.as_ref().unwrap();
                let ns = b.len();
                let mut sv = [0.0; 84];
                let mut sg = [[0.0; 3]; 84];
                b.eval(xi, &mut sv[..ns], Some(&mut sg[..ns]));
                let s = 1.0 / map.det.sqrt();
                for j in 0..ns {
                    let g = geom::mat_t_vec(&map.jac_inv, &sg[j]);
                    for c in 0..self.mesh.dim {
                        let mut v = [0.0; 3];
                        v[c] = sv[j] * s;
                        vals[c * ns + j] = v;
                        divs[c * ns + j] = g[c] * s;
                    }
                }
            }
            SpaceKind::Rt => {
                let b = self.rt.as_ref().unwrap();
                b.eval(xi, vals, divs);
                let inv_det = 1.0 / map.det;
                for i in 0..b.len() {
                    let sign = self.rt_dofs[k * self.dofs_per_element + i].1;
                    vals[i] = geom::scale(&geom::mat_vec(&map.jac, &vals[i]), sign * inv_det);
                    divs[i] *= sign * inv_det;
                }
            }
            SpaceKind::DgScalar => panic!("vector evaluation needs a vector space"),
        }
    }

    /// Allocating form of [`Space::eval_scalar`] / [`Space::eval_vector`].
    pub fn eval_basis(&self, k: usize, xi: &Point) -> BasisValues {
        let n = self.dofs_per_element;
        let mut out = BasisValues::default();
        if self.kind == SpaceKind::DgScalar {
            out.values = vec![0.0; n];
            out.gradients = vec![[0.0; 3]; n];
            self.eval_scalar(k, xi, &mut out.values, Some(&mut out.gradients));
        } else {
            out.vectors = vec![[0.0; 3]; n];
            out.divergences = vec![0.0; n];
            self.eval_vector(k, xi, &mut out.vectors, &mut out.divergences);
        }
        out
    }
}

/// Checked [`Space::eval_basis`] that rejects points outside the reference simplex.
pub fn eval_basis(space: &Space, k: usize, xi: &Point) -> Result<BasisValues> {
    let d = space.mesh.dim;
    let tol = 1e-12;
    if xi[..d].iter().any(|&x| x < -tol) || xi[..d].iter().sum::<f64>() > 1.0 + tol {
        return Err(Error::InvalidArgument(format!("point {xi:?} outside the reference simplex")));
    }
    if k >= space.mesh.n_elements() {
        return Err(Error::InvalidArgument(format!("element {k} out of range")));
    }
    Ok(space.eval_basis(k, xi))
}

/// Coefficient vector bound to a space.
#[derive(Clone, Debug)]
pub struct Field {
    pub space: Arc<Space>,
    pub coeffs: Vec<f64>,
}

impl Field {
    pub fn zeros(space: Arc<Space>) -> Field {
        let n = space.total_dofs;
        Field { space, coeffs: vec![0.0; n] }
    }

    pub fn new(space: Arc<Space>, coeffs: Vec<f64>) -> Result<Field> {
        if coeffs.len() != space.total_dofs {
            return Err(Error::SpaceMismatch(format!("coefficient length {} differs from {} dofs", coeffs.len(), space.total_dofs)));
        }
        Ok(Field { space, coeffs })
    }

    /// Value and gradient of a scalar field at reference point `xi` of element `k`.
    pub fn eval_scalar(&self, k: usize, xi: &Point) -> (f64, Point) {
        let n = self.space.dofs_per_element;
        let mut v = [0.0; 84];
        let mut g = [[0.0; 3]; 84];
        self.space.eval_scalar(k, xi, &mut v[..n], Some(&mut g[..n]));
        let off = k * n;
        let mut val = 0.0;
        let mut grad = [0.0; 3];
        for i in 0..n {
            let c = self.coeffs[off + i];
            val += c * v[i];
            for a in 0..3 {
                grad[a] += c * g[i][a];
            }
        }
        (val, grad)
    }

    /// Value and divergence of a vector field at reference point `xi` of element `k`.
    pub fn eval_vector(&self, k: usize, xi: &Point) -> (Point, f64) {
        let n = self.space.dofs_per_element;
        let mut v = vec![[0.0; 3]; n];
        let mut d = vec![0.0; n];
        self.space.eval_vector(k, xi, &mut v, &mut d);
        let mut val = [0.0; 3];
        let mut div = 0.0;
        for i in 0..n {
            let (g, _) = self.space.local_dof(k, i);
            let c = self.coeffs[g];
            for a in 0..3 {
                val[a] += c * v[i][a];
            }
            div += c * d[i];
        }
        (val, div)
    }

    /// Local coefficients of element `k` (signs already folded into the basis).
    pub fn local_coeffs(&self, k: usize) -> Vec<f64> {
        (0..self.space.dofs_per_element).map(|i| self.coeffs[self.space.local_dof(k, i).0]).collect()
    }
}
