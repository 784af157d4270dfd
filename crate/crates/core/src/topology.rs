//! Connected components and isolated-piece removal.
//!
//! Connectivity is by shared vertex index. A component's diameter is the
//! diagonal of the axis-aligned bounding box of the vertices its faces use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{bounds_of, TriangleMesh};

/// Default cleaning threshold, as a fraction of the reference diameter.
pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentLabeling {
    /// Component id per face; ids are dense and ordered by the smallest face
    /// index they contain.
    pub component_of_face: Vec<usize>,
    pub component_count: usize,
}

impl ComponentLabeling {
    pub fn faces_of(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.component_of_face
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == id)
            .map(|(f, _)| f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub id: usize,
    pub face_count: usize,
    pub vertex_count: usize,
    pub diameter: f64,
}

/// What the cleaning threshold is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiameterReference {
    /// Diameter of the largest component.
    #[default]
    LargestComponent,
    /// Diameter of the whole mesh.
    WholeMesh,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

pub fn connected_components(mesh: &TriangleMesh) -> ComponentLabeling {
    let mut ds = DisjointSet::new(mesh.vertices.len());
    for f in &mesh.faces {
        ds.union(f[0], f[1]);
        ds.union(f[1], f[2]);
    }
    let mut id_of_root = vec![usize::MAX; mesh.vertices.len()];
    let mut next = 0;
    let component_of_face = mesh
        .faces
        .iter()
        .map(|f| {
            let root = ds.find(f[0]);
            if id_of_root[root] == usize::MAX {
                id_of_root[root] = next;
                next += 1;
            }
            id_of_root[root]
        })
        .collect();
    ComponentLabeling {
        component_of_face,
        component_count: next,
    }
}

/// Statistics for every component, indexed by id.
pub fn component_stats(mesh: &TriangleMesh, labeling: &ComponentLabeling) -> Vec<ComponentStats> {
    let k = labeling.component_count;
    let mut face_count = vec![0usize; k];
    let mut owner = vec![usize::MAX; mesh.vertices.len()];
    for (f, &c) in labeling.component_of_face.iter().enumerate() {
        face_count[c] += 1;
        for &v in &mesh.faces[f] {
            owner[v] = c;
        }
    }
    let mut lo = vec![[f64::INFINITY; 3]; k];
    let mut hi = vec![[f64::NEG_INFINITY; 3]; k];
    let mut vertex_count = vec![0usize; k];
    for (v, &c) in owner.iter().enumerate() {
        if c == usize::MAX {
            continue;
        }
        vertex_count[c] += 1;
        let p = mesh.vertices[v];
        for a in 0..3 {
            lo[c][a] = lo[c][a].min(p[a]);
            hi[c][a] = hi[c][a].max(p[a]);
        }
    }
    (0..k)
        .map(|c| {
            let d: f64 = (0..3).map(|a| (hi[c][a] - lo[c][a]).powi(2)).sum();
            ComponentStats {
                id: c,
                face_count: face_count[c],
                vertex_count: vertex_count[c],
                diameter: d.sqrt(),
            }
        })
        .collect()
}

pub fn component_diameter(mesh: &TriangleMesh, labeling: &ComponentLabeling, id: usize) -> Result<f64> {
    if id >= labeling.component_count {
        return Err(Error::UnknownComponent {
            id,
            count: labeling.component_count,
        });
    }
    let points = labeling
        .faces_of(id)
        .flat_map(|f| mesh.faces[f].iter().map(|&v| &mesh.vertices[v]));
    let (lo, hi) = bounds_of(points).expect("component has at least one face");
    Ok((hi - lo).norm())
}

/// Drop every component whose diameter is not strictly greater than
/// `delta` times the largest component's diameter.
pub fn remove_isolated_pieces(mesh: &TriangleMesh, delta: f64) -> TriangleMesh {
    remove_isolated_pieces_with(mesh, delta, DiameterReference::LargestComponent)
}

pub fn remove_isolated_pieces_with(
    mesh: &TriangleMesh,
    delta: f64,
    reference: DiameterReference,
) -> TriangleMesh {
    let labeling = connected_components(mesh);
    if labeling.component_count == 0 {
        return TriangleMesh::empty();
    }
    let stats = component_stats(mesh, &labeling);
    let largest = stats.iter().map(|s| s.diameter).fold(f64::NEG_INFINITY, f64::max);
    let reference_diameter = match reference {
        DiameterReference::LargestComponent => largest,
        DiameterReference::WholeMesh => {
            let used = mesh.faces.iter().flatten().map(|&v| &mesh.vertices[v]);
            let (lo, hi) = bounds_of(used).expect("non-empty");
            (hi - lo).norm()
        }
    };
    let threshold = delta * reference_diameter;
    // the largest piece always survives, even when delta >= 1
    let largest_id = stats
        .iter()
        .find(|s| s.diameter == largest)
        .map(|s| s.id)
        .expect("non-empty");
    let keep: Vec<bool> = stats
        .iter()
        .map(|s| s.id == largest_id || s.diameter > threshold)
        .collect();
    tracing::debug!(
        "cleaning: {} of {} components kept (threshold {threshold})",
        keep.iter().filter(|&&k| k).count(),
        stats.len()
    );
    mesh.retain_faces(|f| keep[labeling.component_of_face[f]])
}
