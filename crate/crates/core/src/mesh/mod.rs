//! Conforming simplicial meshes (triangles and tetrahedra) with full face
//! topology.

mod build;
mod io;

pub use build::{build_lshape_mesh, build_structured_box_mesh, build_structured_simplex_mesh, BoxExtent};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{self, Mat3, Point};

/// Tag given to boundary faces that no builder or file labelled.
pub const DEFAULT_BOUNDARY_TAG: &str = "boundary";

/// A codimension-one face shared by one (boundary) or two (interior) elements.
#[derive(Clone, Debug)]
pub struct Face {
    /// Vertex indices sorted increasingly.
    pub vertices: Vec<usize>,
    pub elem_plus: usize,
    pub elem_minus: Option<usize>,
    /// Local face index inside `elem_plus` (index of the opposite vertex).
    pub local_plus: usize,
    pub local_minus: Option<usize>,
    /// Unit normal pointing out of `elem_plus`.
    pub normal: Point,
    pub measure: f64,
    pub boundary_tag: Option<String>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.elem_minus.is_none()
    }
}

/// Affine map `x = origin + jac · ξ` from the reference simplex.
#[derive(Clone, Debug)]
pub struct ElementMap {
    pub origin: Point,
    pub jac: Mat3,
    pub jac_inv: Mat3,
    /// Determinant of the Jacobian, positive for every stored element.
    pub det: f64,
}

/// Partition of the faces into interior and boundary sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceSets {
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<Point>,
    elements: Vec<[usize; 4]>,
    pub faces: Vec<Face>,
    /// Largest vertex-pair distance per element.
    pub elem_diameter: Vec<f64>,
    elem_faces: Vec<[usize; 4]>,
    maps: Vec<ElementMap>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
}

/// Local vertices of local face `f` (all vertices except `f`), increasing.
pub fn local_face_vertices(dim: usize, f: usize) -> Vec<usize> {
    (0..=dim).filter(|&v| v != f).collect()
}

fn face_key(verts: &[usize]) -> [usize; 3] {
    let mut k = [usize::MAX; 3];
    k[..verts.len()].copy_from_slice(verts);
    k[..verts.len()].sort_unstable();
    k
}

impl Mesh {
    /// Builds a mesh, fixing element orientation so that every Jacobian
    /// determinant is positive. All boundary faces get [`DEFAULT_BOUNDARY_TAG`].
    pub fn new(dim: usize, vertices: Vec<Point>, elements: Vec<Vec<usize>>) -> Result<Mesh> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("mesh dimension must be 2 or 3, got {dim}")));
        }
        if elements.is_empty() {
            return Err(Error::InvalidArgument("mesh has no elements".into()));
        }
        let nv = vertices.len();
        let mut elems = Vec::with_capacity(elements.len());
        let mut maps = Vec::with_capacity(elements.len());
        let mut diam = Vec::with_capacity(elements.len());
        for (k, e) in elements.iter().enumerate() {
            if e.len() != dim + 1 {
                return Err(Error::InvalidArgument(format!("element {k} has {} vertices, expected {}", e.len(), dim + 1)));
            }
            let mut ev = [usize::MAX; 4];
            for (i, &v) in e.iter().enumerate() {
                if v >= nv {
                    return Err(Error::InvalidArgument(format!("element {k} references vertex {v} of {nv}")));
                }
                ev[i] = v;
            }
            let mut h: f64 = 0.0;
            for i in 0..=dim {
                for j in i + 1..=dim {
                    h = h.max(geom::norm(&geom::sub(&vertices[ev[i]], &vertices[ev[j]])));
                }
            }
            let mut map = element_map(dim, &vertices, &ev);
            if map.det < 0.0 {
                ev.swap(dim - 1, dim);
                map = element_map(dim, &vertices, &ev);
            }
            if !(map.det > 1e-14 * h.powi(dim as i32)) {
                return Err(Error::Topology(format!("element {k} is degenerate")));
            }
            elems.push(ev);
            maps.push(map);
            diam.push(h);
        }

        let mut lookup: HashMap<[usize; 3], usize> = HashMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut owners: Vec<u8> = Vec::new();
        let mut elem_faces = vec![[usize::MAX; 4]; elems.len()];
        for (k, ev) in elems.iter().enumerate() {
            for f in 0..=dim {
                let fv: Vec<usize> = local_face_vertices(dim, f).iter().map(|&l| ev[l]).collect();
                let key = face_key(&fv);
                match lookup.get(&key) {
                    Some(&fi) => {
                        owners[fi] += 1;
                        if owners[fi] > 2 {
                            return Err(Error::Topology(format!("face {:?} has more than two owners", &key[..dim])));
                        }
                        faces[fi].elem_minus = Some(k);
                        faces[fi].local_minus = Some(f);
                        elem_faces[k][f] = fi;
                    }
                    None => {
                        let mut sorted = fv.clone();
                        sorted.sort_unstable();
                        let (normal, measure) = face_normal(dim, &vertices, &sorted, &centroid_of(dim, &vertices, ev));
                        lookup.insert(key, faces.len());
                        elem_faces[k][f] = faces.len();
                        owners.push(1);
                        faces.push(Face {
                            vertices: sorted,
                            elem_plus: k,
                            elem_minus: None,
                            local_plus: f,
                            local_minus: None,
                            normal,
                            measure,
                            boundary_tag: None,
                        });
                    }
                }
            }
        }
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (i, face) in faces.iter_mut().enumerate() {
            if face.elem_minus.is_none() {
                face.boundary_tag = Some(DEFAULT_BOUNDARY_TAG.to_string());
                boundary.push(i);
            } else {
                interior.push(i);
            }
        }
        Ok(Mesh { dim, vertices, elements: elems, faces, elem_diameter: diam, elem_faces, maps, interior, boundary })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Vertex indices of element `k` (positively oriented).
    pub fn element(&self, k: usize) -> &[usize] {
        &self.elements[k][..=self.dim]
    }

    /// Global face index of local face `f` of element `k`.
    pub fn element_face(&self, k: usize, f: usize) -> usize {
        self.elem_faces[k][f]
    }

    pub fn map(&self, k: usize) -> &ElementMap {
        &self.maps[k]
    }

    pub fn volume(&self, k: usize) -> f64 {
        let fact = if self.dim == 2 { 2.0 } else { 6.0 };
        self.maps[k].det / fact
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_elements()).map(|k| self.volume(k)).sum()
    }

    pub fn centroid(&self, k: usize) -> Point {
        centroid_of(self.dim, &self.vertices, &self.elements[k])
    }

    pub fn face_centroid(&self, f: usize) -> Point {
        let face = &self.faces[f];
        let mut c = geom::ZERO;
        for &v in &face.vertices {
            c = geom::add(&c, &self.vertices[v]);
        }
        geom::scale(&c, 1.0 / face.vertices.len() as f64)
    }

    pub fn to_physical(&self, k: usize, xi: &Point) -> Point {
        let m = &self.maps[k];
        geom::add(&m.origin, &geom::mat_vec(&m.jac, xi))
    }

    pub fn to_reference(&self, k: usize, x: &Point) -> Point {
        let m = &self.maps[k];
        geom::mat_vec(&m.jac_inv, &geom::sub(x, &m.origin))
    }

    pub fn h_max(&self) -> f64 {
        self.elem_diameter.iter().cloned().fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        self.elem_diameter.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn interior_faces(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary
    }

    /// Largest diameter ratio between face-neighbouring elements.
    pub fn max_neighbor_h_ratio(&self) -> f64 {
        let mut r: f64 = 1.0;
        for &f in &self.interior {
            let face = &self.faces[f];
            let a = self.elem_diameter[face.elem_plus];
            let b = self.elem_diameter[face.elem_minus.unwrap()];
            r = r.max(a / b).max(b / a);
        }
        r
    }

    /// Relabels every boundary face with `tagger(face centroid, outward normal)`.
    pub fn tag_boundary<F: Fn(&Point, &Point) -> String>(&mut self, tagger: F) {
        for &f in &self.boundary.clone() {
            let c = self.face_centroid(f);
            let tag = tagger(&c, &self.faces[f].normal);
            self.faces[f].boundary_tag = Some(tag);
        }
    }

    /// Sets the tag of the boundary face with the given vertices.
    pub fn set_face_tag(&mut self, verts: &[usize], tag: &str) -> Result<()> {
        let mut sorted = verts.to_vec();
        sorted.sort_unstable();
        for &f in &self.boundary {
            if self.faces[f].vertices == sorted {
                self.faces[f].boundary_tag = Some(tag.to_string());
                return Ok(());
            }
        }
        Err(Error::InvalidArgument(format!("no boundary face with vertices {verts:?}")))
    }

    /// Distinct boundary tags in sorted order.
    pub fn boundary_tags(&self) -> Vec<String> {
        let mut tags: Vec<String> = self.boundary.iter().filter_map(|&f| self.faces[f].boundary_tag.clone()).collect();
        tags.sort();
        tags.dedup();
        tags
    }
}

/// Splits the faces of a mesh into interior and boundary sets, checking that
/// every face has one or two owners.
pub fn face_topology(mesh: &Mesh) -> Result<FaceSets> {
    let mut count = vec![0usize; mesh.n_faces()];
    for k in 0..mesh.n_elements() {
        for f in 0..=mesh.dim {
            count[mesh.element_face(k, f)] += 1;
        }
    }
    let mut sets = FaceSets { interior: Vec::new(), boundary: Vec::new() };
    for (i, &c) in count.iter().enumerate() {
        match c {
            1 => sets.boundary.push(i),
            2 => sets.interior.push(i),
            _ => return Err(Error::Topology(format!("face {i} has {c} owners"))),
        }
    }
    Ok(sets)
}

fn centroid_of(dim: usize, vertices: &[Point], ev: &[usize]) -> Point {
    let mut c = geom::ZERO;
    for &v in &ev[..=dim] {
        c = geom::add(&c, &vertices[v]);
    }
    geom::scale(&c, 1.0 / (dim + 1) as f64)
}

fn element_map(dim: usize, vertices: &[Point], ev: &[usize; 4]) -> ElementMap {
    let origin = vertices[ev[0]];
    let mut jac = [[0.0; 3]; 3];
    for c in 0..dim {
        let e = geom::sub(&vertices[ev[c + 1]], &origin);
        for r in 0..3 {
            jac[r][c] = e[r];
        }
    }
    if dim == 2 {
        jac[2][2] = 1.0;
    }
    let det = geom::det(&jac, dim);
    let jac_inv = if det != 0.0 { geom::inverse(&jac, dim) } else { [[0.0; 3]; 3] };
    ElementMap { origin, jac, jac_inv, det }
}

fn face_normal(dim: usize, vertices: &[Point], fv: &[usize], elem_centroid: &Point) -> (Point, f64) {
    let a = vertices[fv[0]];
    let (mut n, measure) = if dim == 2 {
        let t = geom::sub(&vertices[fv[1]], &a);
        let len = geom::norm(&t);
        ([t[1] / len, -t[0] / len, 0.0], len)
    } else {
        let c = geom::cross(&geom::sub(&vertices[fv[1]], &a), &geom::sub(&vertices[fv[2]], &a));
        let len = geom::norm(&c);
        (geom::scale(&c, 1.0 / len), 0.5 * len)
    };
    if geom::dot(&n, &geom::sub(&a, elem_centroid)) < 0.0 {
        n = geom::scale(&n, -1.0);
    }
    (n, measure)
}
