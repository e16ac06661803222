//! Legacy ASCII VTK output of meshes and discrete fields.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fespace::{simplex_rule, Field, SpaceKind};
use crate::geom::{self, Point};
use crate::mesh::Mesh;

/// Per-element value exported as `CELL_DATA`: the element average for DG
/// fields and the centroid value for Raviart–Thomas velocities.
pub fn cell_values(field: &Field) -> Result<Vec<Point>> {
    let space = &field.space;
    let mesh = &*space.mesh;
    let d = mesh.dim;
    let mut centroid = [0.0; 3];
    centroid[..d].fill(1.0 / (d + 1) as f64);
    let rule = simplex_rule(d, space.polynomial_degree().max(1))?;
    let total: f64 = rule.weights.iter().sum();
    let mut out = Vec::with_capacity(mesh.n_elements());
    for k in 0..mesh.n_elements() {
        let v = match space.kind {
            SpaceKind::DgScalar => {
                let s: f64 = (0..rule.len()).map(|q| rule.weights[q] * field.eval_scalar(k, &rule.points[q]).0).sum();
                [s / total, 0.0, 0.0]
            }
            SpaceKind::DgVector => {
                let mut acc = [0.0; 3];
                for q in 0..rule.len() {
                    acc = geom::add(&acc, &geom::scale(&field.eval_vector(k, &rule.points[q]).0, rule.weights[q]));
                }
                geom::scale(&acc, 1.0 / total)
            }
            SpaceKind::Rt => field.eval_vector(k, &centroid).0,
        };
        out.push(v);
    }
    Ok(out)
}

fn reference_vertices(dim: usize) -> Vec<Point> {
    let mut v = vec![[0.0; 3]];
    for a in 0..dim {
        let mut p = [0.0; 3];
        p[a] = 1.0;
        v.push(p);
    }
    v
}

fn write_points_and_cells(s: &mut String, mesh: &Mesh, discontinuous: bool) {
    let d = mesh.dim;
    let ne = mesh.n_elements();
    let nv = if discontinuous { ne * (d + 1) } else { mesh.n_vertices() };
    let _ = writeln!(s, "POINTS {nv} double");
    if discontinuous {
        for k in 0..ne {
            for &v in mesh.element(k) {
                let x = mesh.vertices[v];
                let _ = writeln!(s, "{:e} {:e} {:e}", x[0], x[1], x[2]);
            }
        }
    } else {
        for x in &mesh.vertices {
            let _ = writeln!(s, "{:e} {:e} {:e}", x[0], x[1], x[2]);
        }
    }
    let _ = writeln!(s, "CELLS {ne} {}", ne * (d + 2));
    for k in 0..ne {
        let _ = write!(s, "{}", d + 1);
        for (i, &v) in mesh.element(k).iter().enumerate() {
            let id = if discontinuous { k * (d + 1) + i } else { v };
            let _ = write!(s, " {id}");
        }
        s.push('\n');
    }
    let cell_type = if d == 2 { 5 } else { 10 };
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "{cell_type}");
    }
}

fn write_values(s: &mut String, name: &str, vector: bool, values: &[Point]) {
    if vector {
        let _ = writeln!(s, "VECTORS {name} double");
        for v in values {
            let _ = writeln!(s, "{:e} {:e} {:e}", v[0], v[1], v[2]);
        }
    } else {
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(s, "{:e}", v[0]);
        }
    }
}

/// Renders one field as a legacy VTK unstructured grid. With
/// `discontinuous`, every element gets its own vertex copies and the
/// vertex values of the field are added as `POINT_DATA`.
pub fn vtk_string(name: &str, field: &Field, discontinuous: bool) -> Result<String> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(Error::InvalidArgument(format!("invalid VTK field name `{name}`")));
    }
    let mesh = &*field.space.mesh;
    let vector = field.space.is_vector();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "dfheat {name}");
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    write_points_and_cells(&mut s, mesh, discontinuous);
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_elements());
    write_values(&mut s, name, vector, &cell_values(field)?);
    if discontinuous {
        let refs = reference_vertices(mesh.dim);
        let mut nodal = Vec::with_capacity(mesh.n_elements() * refs.len());
        for k in 0..mesh.n_elements() {
            for xi in &refs {
                nodal.push(if vector { field.eval_vector(k, xi).0 } else { [field.eval_scalar(k, xi).0, 0.0, 0.0] });
            }
        }
        let _ = writeln!(s, "POINT_DATA {}", nodal.len());
        write_values(&mut s, &format!("{name}_vertex"), vector, &nodal);
    }
    Ok(s)
}

pub fn write_vtk(name: &str, field: &Field, path: &Path, discontinuous: bool) -> Result<()> {
    std::fs::write(path, vtk_string(name, field, discontinuous)?)?;
    Ok(())
}
