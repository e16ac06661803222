//! Plain-text mesh format.
//!
//! ```text
//! dim n_vertices n_elements
//! x y [z]                      (n_vertices lines)
//! v0 v1 v2 [v3]                (n_elements lines, zero-based)
//! f0 f1 [f2] tag               (optional boundary tag lines)
//! ```
//! Tokens are whitespace separated; `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use super::Mesh;
use crate::error::{Error, Result};

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    read_mesh_str(&std::fs::read_to_string(path)?)
}

pub fn read_mesh_str(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).enumerate().filter(|(_, l)| !l.is_empty());
    let perr = |line: usize, msg: &str| Error::Parse(format!("line {}: {msg}", line + 1));
    let (ln, header) = lines.next().ok_or_else(|| Error::Parse("empty mesh file".into()))?;
    let head: Vec<usize> =
        header.split_whitespace().map(|t| t.parse::<usize>().map_err(|_| perr(ln, "bad header"))).collect::<Result<_>>()?;
    if head.len() != 3 {
        return Err(perr(ln, "header must be `dim n_vertices n_elements`"));
    }
    let (dim, nv, ne) = (head[0], head[1], head[2]);
    if dim != 2 && dim != 3 {
        return Err(perr(ln, "dimension must be 2 or 3"));
    }
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| Error::Parse("missing vertex lines".into()))?;
        let c: Vec<f64> = l.split_whitespace().map(|t| t.parse::<f64>().map_err(|_| perr(ln, "bad coordinate"))).collect::<Result<_>>()?;
        if c.len() != dim {
            return Err(perr(ln, "wrong number of coordinates"));
        }
        vertices.push([c[0], c[1], if dim == 3 { c[2] } else { 0.0 }]);
    }
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = lines.next().ok_or_else(|| Error::Parse("missing element lines".into()))?;
        let e: Vec<usize> =
            l.split_whitespace().map(|t| t.parse::<usize>().map_err(|_| perr(ln, "bad vertex index"))).collect::<Result<_>>()?;
        if e.len() != dim + 1 {
            return Err(perr(ln, "wrong number of element vertices"));
        }
        elements.push(e);
    }
    let mut mesh = Mesh::new(dim, vertices, elements)?;
    for (ln, l) in lines {
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != dim + 1 {
            return Err(perr(ln, "boundary tag line must list the face vertices and a tag"));
        }
        let verts: Vec<usize> =
            tok[..dim].iter().map(|t| t.parse::<usize>().map_err(|_| perr(ln, "bad face vertex"))).collect::<Result<_>>()?;
        mesh.set_face_tag(&verts, tok[dim]).map_err(|e| perr(ln, &e.to_string()))?;
    }
    Ok(mesh)
}

pub fn write_mesh_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    let d = mesh.dim;
    writeln!(s, "{} {} {}", d, mesh.n_vertices(), mesh.n_elements()).unwrap();
    for v in &mesh.vertices {
        let parts: Vec<String> = v[..d].iter().map(|x| format!("{x:?}")).collect();
        writeln!(s, "{}", parts.join(" ")).unwrap();
    }
    for k in 0..mesh.n_elements() {
        let parts: Vec<String> = mesh.element(k).iter().map(|x| x.to_string()).collect();
        writeln!(s, "{}", parts.join(" ")).unwrap();
    }
    for &f in mesh.boundary_faces() {
        let face = &mesh.faces[f];
        let parts: Vec<String> = face.vertices.iter().map(|x| x.to_string()).collect();
        let tag = face.boundary_tag.as_deref().unwrap_or(super::DEFAULT_BOUNDARY_TAG);
        writeln!(s, "{} {}", parts.join(" "), tag).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}
