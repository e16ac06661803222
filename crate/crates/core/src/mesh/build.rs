//! Structured mesh generators: boxes split into simplices and the L-shaped
//! channel domain.

use super::Mesh;
use crate::error::{Error, Result};
use crate::geom::Point;

/// Axis-aligned box `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxExtent {
    pub lo: Point,
    pub hi: Point,
}

impl BoxExtent {
    pub fn new(lo: Point, hi: Point) -> BoxExtent {
        BoxExtent { lo, hi }
    }

    pub fn unit() -> BoxExtent {
        BoxExtent { lo: [0.0; 3], hi: [1.0; 3] }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        for a in 0..dim {
            if !(self.hi[a] - self.lo[a] > 0.0) || !self.hi[a].is_finite() || !self.lo[a].is_finite() {
                return Err(Error::InvalidArgument(format!("box side {a} is not positive")));
            }
        }
        Ok(())
    }
}

/// Uniform mesh of a box with `cells_per_side` cells along every axis; each
/// square is split into 2 triangles and each cube into 6 tetrahedra.
pub fn build_structured_simplex_mesh(dim: usize, cells_per_side: usize, extent: &BoxExtent) -> Result<Mesh> {
    build_structured_box_mesh(dim, [cells_per_side; 3], extent)
}

/// Like [`build_structured_simplex_mesh`] with a separate cell count per axis.
/// Boundary faces are tagged `x0`, `x1`, `y0`, `y1` (and `z0`, `z1`).
pub fn build_structured_box_mesh(dim: usize, cells: [usize; 3], extent: &BoxExtent) -> Result<Mesh> {
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidArgument(format!("dimension must be 2 or 3, got {dim}")));
    }
    if cells[..dim].contains(&0) {
        return Err(Error::InvalidArgument("cells per side must be at least 1".into()));
    }
    extent.validate(dim)?;
    let mut mesh = grid_mesh(dim, cells, extent, |_| true)?;
    let ext = *extent;
    let tol: Vec<f64> = (0..3).map(|a| 1e-9 * (ext.hi[a] - ext.lo[a]).abs().max(1.0)).collect();
    mesh.tag_boundary(|c, _| {
        let names = [("x0", "x1"), ("y0", "y1"), ("z0", "z1")];
        for a in 0..dim {
            if (c[a] - ext.lo[a]).abs() < tol[a] {
                return names[a].0.to_string();
            }
            if (c[a] - ext.hi[a]).abs() < tol[a] {
                return names[a].1.to_string();
            }
        }
        super::DEFAULT_BOUNDARY_TAG.to_string()
    });
    Ok(mesh)
}

/// Mesh of `(0,4)×(0,2) \ (2,4)×(0,1)` (2D) or
/// `(0,4)×(0,2)×(0,2) \ (2,4)×(0,1)×(0,1)` (3D) whose element diameter does
/// not exceed `target_h`. Boundary faces are tagged `inflow` (x = 0),
/// `outflow` (x = 4) and `wall`.
pub fn build_lshape_mesh(dim: usize, target_h: f64) -> Result<Mesh> {
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidArgument(format!("dimension must be 2 or 3, got {dim}")));
    }
    if !(target_h > 0.0) || !target_h.is_finite() {
        return Err(Error::InvalidArgument(format!("target_h must be positive, got {target_h}")));
    }
    let n = ((dim as f64).sqrt() / target_h).ceil().max(1.0) as usize;
    let extent = BoxExtent::new([0.0; 3], [4.0, 2.0, if dim == 3 { 2.0 } else { 1.0 }]);
    let cells = [4 * n, 2 * n, 2 * n];
    let mut mesh = grid_mesh(dim, cells, &extent, |c| {
        let in_notch = c[0] > 2.0 && c[1] < 1.0 && (dim == 2 || c[2] < 1.0);
        !in_notch
    })?;
    mesh.tag_boundary(|c, _| {
        if c[0].abs() < 1e-9 {
            "inflow".to_string()
        } else if (c[0] - 4.0).abs() < 1e-9 {
            "outflow".to_string()
        } else {
            "wall".to_string()
        }
    });
    Ok(mesh)
}

/// Structured simplicial mesh of the cells of a box grid whose centres
/// satisfy `keep`. Unused vertices are dropped.
fn grid_mesh<F: Fn(&Point) -> bool>(dim: usize, cells: [usize; 3], extent: &BoxExtent, keep: F) -> Result<Mesh> {
    let (nx, ny) = (cells[0], cells[1]);
    let nz = if dim == 3 { cells[2] } else { 0 };
    let step: Vec<f64> = (0..3).map(|a| (extent.hi[a] - extent.lo[a]) / cells[a].max(1) as f64).collect();
    let coord = |a: usize, i: usize| {
        if i == cells[a] {
            extent.hi[a]
        } else {
            extent.lo[a] + i as f64 * step[a]
        }
    };
    let vid = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let n_grid = (nx + 1) * (ny + 1) * (nz + 1);
    let mut elements: Vec<Vec<usize>> = Vec::new();
    for k in 0..nz.max(1) {
        for j in 0..ny {
            for i in 0..nx {
                let mut center = [coord(0, i) + 0.5 * step[0], coord(1, j) + 0.5 * step[1], 0.0];
                if dim == 3 {
                    center[2] = coord(2, k) + 0.5 * step[2];
                }
                if !keep(&center) {
                    continue;
                }
                if dim == 2 {
                    let (v00, v10, v01, v11) = (vid(i, j, 0), vid(i + 1, j, 0), vid(i, j + 1, 0), vid(i + 1, j + 1, 0));
                    elements.push(vec![v00, v10, v11]);
                    elements.push(vec![v00, v11, v01]);
                } else {
                    // Six tetrahedra sharing the main diagonal (Kuhn split).
                    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
                    for p in PERMS {
                        let mut c = [i, j, k];
                        let mut tet = vec![vid(c[0], c[1], c[2])];
                        for &axis in &p {
                            c[axis] += 1;
                            tet.push(vid(c[0], c[1], c[2]));
                        }
                        elements.push(tet);
                    }
                }
            }
        }
    }
    let mut new_id = vec![usize::MAX; n_grid];
    let mut vertices = Vec::new();
    for e in elements.iter_mut() {
        for v in e.iter_mut() {
            if new_id[*v] == usize::MAX {
                new_id[*v] = vertices.len();
                let i = *v % (nx + 1);
                let j = (*v / (nx + 1)) % (ny + 1);
                let k = *v / ((nx + 1) * (ny + 1));
                vertices.push([coord(0, i), coord(1, j), if dim == 3 { coord(2, k) } else { 0.0 }]);
            }
            *v = new_id[*v];
        }
    }
    Mesh::new(dim, vertices, elements)
}
