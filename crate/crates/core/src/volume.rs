//! Volume by tetrahedral decomposition, and metric scaling.
//!
//! Every face forms a tetrahedron with the origin. Summing the signed
//! tetrahedron volumes and taking one absolute value at the end gives the
//! enclosed volume of any closed, consistently oriented mesh. Taking the
//! absolute value of each term instead is only correct when the solid is
//! star-shaped about the origin; that variant is kept for comparison.

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    /// Signed sum, absolute value at the end.
    #[default]
    Divergence,
    /// Absolute value of every tetrahedron term.
    PerFaceAbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeResult {
    pub volume: f64,
    /// Orientation-signed sum of tetrahedron volumes.
    pub signed_raw: f64,
    pub method: VolumeMethod,
    /// Edges not shared by exactly two faces. Non-zero means the divergence
    /// volume depends on where the origin is.
    pub boundary_edges: usize,
}

fn signed_terms(mesh: &TriangleMesh) -> impl Iterator<Item = f64> + '_ {
    mesh.faces.iter().map(move |f| {
        let a = mesh.vertices[f[0]].coords;
        let b = mesh.vertices[f[1]].coords;
        let c = mesh.vertices[f[2]].coords;
        a.dot(&b.cross(&c)) / 6.0
    })
}

pub fn volume_divergence(mesh: &TriangleMesh) -> VolumeResult {
    let signed_raw: f64 = signed_terms(mesh).sum();
    let boundary_edges = mesh.boundary_edge_count();
    if boundary_edges > 0 {
        warn!("mesh has {boundary_edges} boundary edges; volume depends on origin placement");
    }
    VolumeResult {
        volume: signed_raw.abs(),
        signed_raw,
        method: VolumeMethod::Divergence,
        boundary_edges,
    }
}

pub fn volume_per_face_abs(mesh: &TriangleMesh) -> VolumeResult {
    let (signed_raw, volume) = signed_terms(mesh).fold((0.0, 0.0), |(s, a), t| (s + t, a + t.abs()));
    VolumeResult {
        volume,
        signed_raw,
        method: VolumeMethod::PerFaceAbs,
        boundary_edges: mesh.boundary_edge_count(),
    }
}

pub fn volume(mesh: &TriangleMesh, method: VolumeMethod) -> VolumeResult {
    match method {
        VolumeMethod::Divergence => volume_divergence(mesh),
        VolumeMethod::PerFaceAbs => volume_per_face_abs(mesh),
    }
}

/// Multiply every vertex by `s` (meters per model unit).
pub fn apply_scale(mesh: &TriangleMesh, s: f64) -> Result<TriangleMesh> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::NonPositiveScale(s));
    }
    Ok(TriangleMesh {
        vertices: mesh.vertices.iter().map(|v| v * s).collect(),
        faces: mesh.faces.clone(),
    })
}
