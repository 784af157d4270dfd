//! Indexed triangle mesh.

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Point3<f64>;
pub type Face = [usize; 3];

/// Indexed triangle mesh: a vertex list and index triples into it.
///
/// Coordinates are in model units until [`crate::volume::apply_scale`] has
/// been applied, after which they are meters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    pub faces: Vec<Face>,
}

impl TriangleMesh {
    /// Build a mesh and check every invariant.
    pub fn new(vertices: Vec<Point>, faces: Vec<Face>) -> Result<Self> {
        let mesh = TriangleMesh { vertices, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn empty() -> Self {
        TriangleMesh::default()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Check indices in range, finite coordinates and three distinct
    /// indices per face.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(Error::NonFiniteCoordinate { vertex: i });
            }
        }
        let n = self.vertices.len();
        for (fi, f) in self.faces.iter().enumerate() {
            for &idx in f {
                if idx >= n {
                    return Err(Error::InvalidIndex {
                        face: fi,
                        index: idx as i64,
                        vertex_count: n,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::DegenerateFace {
                    face: fi,
                    indices: *f,
                });
            }
        }
        Ok(())
    }

    pub fn triangle(&self, face: usize) -> [Point; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Axis-aligned bounds of the vertex set, `None` when there are no
    /// vertices.
    pub fn bounds(&self) -> Option<(Point, Point)> {
        bounds_of(self.vertices.iter())
    }

    pub fn translate(&mut self, offset: &Vector3<f64>) {
        for v in &mut self.vertices {
            *v += offset;
        }
    }

    /// Reverse the winding of every face.
    pub fn flip_orientation(&mut self) {
        for f in &mut self.faces {
            f.swap(1, 2);
        }
    }

    /// Append another mesh, offsetting its indices.
    pub fn append(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces.extend(
            other
                .faces
                .iter()
                .map(|f| [f[0] + base, f[1] + base, f[2] + base]),
        );
    }

    /// Keep only the listed faces (in their current relative order) and drop
    /// vertices no kept face references. Vertex order is preserved.
    pub fn retain_faces(&self, keep: impl Fn(usize) -> bool) -> TriangleMesh {
        let faces: Vec<Face> = (0..self.faces.len())
            .filter(|&f| keep(f))
            .map(|f| self.faces[f])
            .collect();
        let mut used = vec![false; self.vertices.len()];
        for f in &faces {
            for &i in f {
                used[i] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if used[i] {
                remap[i] = vertices.len();
                vertices.push(*v);
            }
        }
        let faces = faces
            .into_iter()
            .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
            .collect();
        TriangleMesh { vertices, faces }
    }

    /// Number of undirected edges not shared by exactly two faces.
    pub fn boundary_edge_count(&self) -> usize {
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(self.faces.len() * 3);
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        let mut count = 0;
        let mut i = 0;
        while i < edges.len() {
            let mut j = i + 1;
            while j < edges.len() && edges[j] == edges[i] {
                j += 1;
            }
            if j - i != 2 {
                count += 1;
            }
            i = j;
        }
        count
    }

    /// Every edge is shared by exactly two faces.
    pub fn is_closed(&self) -> bool {
        !self.faces.is_empty() && self.boundary_edge_count() == 0
    }
}

pub(crate) fn bounds_of<'a>(points: impl Iterator<Item = &'a Point>) -> Option<(Point, Point)> {
    let mut it = points.peekable();
    let first = **it.peek()?;
    Some(it.fold((first, first), |(lo, hi), p| {
        (
            Point::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
            Point::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
        )
    }))
}
