//! Deterministic analytic test assets.
//!
//! Closed meshes with known volume, checkerboard corner grids with known
//! scale, and multi-component scenes with small decoy pieces for the
//! cleaning stage. Everything is a pure function of its parameters and seed.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Face, Point, TriangleMesh};
use crate::registration::RigidTransform;
use crate::scale::CornerGrid;

pub const DEFAULT_TORUS_MAJOR_SEGMENTS: usize = 96;
pub const DEFAULT_TORUS_MINOR_SEGMENTS: usize = 48;
pub const MAX_ICOSPHERE_SUBDIVISIONS: u32 = 6;

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDimension(format!("{name} = {value}")))
    }
}

/// Axis-aligned box centred on the origin with edge lengths `a`, `b`, `c`.
pub fn make_box(a: f64, b: f64, c: f64) -> Result<TriangleMesh> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("c", c)?;
    let h = [a / 2.0, b / 2.0, c / 2.0];
    // corner i has bit 0 -> +x, bit 1 -> +y, bit 2 -> +z
    let vertices = (0..8)
        .map(|i| {
            let s = |bit: usize, half: f64| if i & (1 << bit) != 0 { half } else { -half };
            Point::new(s(0, h[0]), s(1, h[1]), s(2, h[2]))
        })
        .collect();
    let quads = [
        [0, 4, 6, 2],
        [1, 3, 7, 5],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 2, 3, 1],
        [4, 5, 7, 6],
    ];
    let faces = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    TriangleMesh::new(vertices, faces)
}

/// Icosahedron with every face split into four `subdivisions` times, all
/// vertices projected onto the sphere of radius `r` about the origin.
pub fn make_icosphere(r: f64, subdivisions: u32) -> Result<TriangleMesh> {
    check_positive("radius", r)?;
    if subdivisions > MAX_ICOSPHERE_SUBDIVISIONS {
        return Err(Error::InvalidParameter(format!(
            "subdivisions must be in 0..={MAX_ICOSPHERE_SUBDIVISIONS}, got {subdivisions}"
        )));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let mut unit: Vec<Vector3<f64>> = raw
        .iter()
        .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
        .collect();
    let mut faces: Vec<Face> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, unit: &mut Vec<Vector3<f64>>| -> usize {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                unit.push((unit[a] + unit[b]).normalize());
                unit.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut unit);
            let bc = mid(b, c, &mut unit);
            let ca = mid(c, a, &mut unit);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = unit.into_iter().map(|u| Point::from(u * r)).collect();
    TriangleMesh::new(vertices, faces)
}

/// Torus about the z axis with tube centre radius `major` and tube radius
/// `minor`, vertices on the exact surface.
pub fn make_torus(
    major: f64,
    minor: f64,
    major_segments: usize,
    minor_segments: usize,
) -> Result<TriangleMesh> {
    check_positive("major radius", major)?;
    check_positive("minor radius", minor)?;
    if minor >= major {
        return Err(Error::InvalidParameter(
            "minor radius must be smaller than major radius".into(),
        ));
    }
    if major_segments < 3 || minor_segments < 3 {
        return Err(Error::InvalidParameter(
            "torus needs at least 3 segments each way".into(),
        ));
    }
    let (n, m) = (major_segments, minor_segments);
    let mut vertices = Vec::with_capacity(n * m);
    for i in 0..n {
        let u = 2.0 * PI * i as f64 / n as f64;
        for j in 0..m {
            let v = 2.0 * PI * j as f64 / m as f64;
            let ring = major + minor * v.cos();
            vertices.push(Point::new(ring * u.cos(), ring * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % n) * m + (j % m);
    let mut faces = Vec::with_capacity(2 * n * m);
    for i in 0..n {
        for j in 0..m {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Parameters of a synthetic checkerboard corner grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerGridSpec {
    pub rows: usize,
    pub cols: usize,
    /// Corner spacing in model units.
    pub spacing: f64,
    /// Physical square size in meters.
    pub square_size_real_m: f64,
    #[serde(default)]
    pub pose: RigidTransform,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl CornerGridSpec {
    /// Meters per model unit this grid encodes.
    pub fn true_scale(&self) -> f64 {
        self.square_size_real_m / self.spacing
    }
}

/// Planar grid in the local xy plane, moved by `pose`, with optional
/// isotropic Gaussian noise on every coordinate.
pub fn make_corner_grid(spec: &CornerGridSpec) -> Result<CornerGrid> {
    if spec.rows < 2 || spec.cols < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 2x2 corners, got {}x{}",
            spec.rows, spec.cols
        )));
    }
    check_positive("spacing", spec.spacing)?;
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise sigma {}",
            spec.noise_sigma
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).expect("sigma checked");
    let mut corners = Vec::with_capacity(spec.rows * spec.cols);
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let local = Point::new(c as f64 * spec.spacing, r as f64 * spec.spacing, 0.0);
            let mut p = spec.pose.apply(&local);
            if spec.noise_sigma > 0.0 {
                p += Vector3::new(
                    noise.sample(&mut rng),
                    noise.sample(&mut rng),
                    noise.sample(&mut rng),
                );
            }
            corners.push(p);
        }
    }
    CornerGrid::new(corners, spec.rows, spec.cols, spec.square_size_real_m)
}

/// A small piece added next to the main body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoy {
    pub spec: FixtureSpec,
    /// Decoy diameter as a fraction of the base diameter.
    pub relative_diameter: f64,
    /// Decoy centre relative to the base centre.
    pub offset: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub first_face: usize,
    pub face_count: usize,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiComponent {
    pub mesh: TriangleMesh,
    /// Base first, then decoys in the given order.
    pub components: Vec<ComponentRecord>,
}

fn aabb_diameter(mesh: &TriangleMesh) -> f64 {
    mesh.bounds().map_or(0.0, |(lo, hi)| (hi - lo).norm())
}

fn aabb_center(mesh: &TriangleMesh) -> Vector3<f64> {
    mesh.bounds()
        .map_or(Vector3::zeros(), |(lo, hi)| (lo.coords + hi.coords) / 2.0)
}

/// Base mesh plus decoys rescaled to the requested relative diameter and
/// centred at `base centre + offset`.
pub fn make_multi_component(base: &FixtureSpec, decoys: &[Decoy]) -> Result<MultiComponent> {
    let mut mesh = base.build_mesh()?;
    let base_diameter = aabb_diameter(&mesh);
    let base_center = aabb_center(&mesh);
    let mut components = vec![ComponentRecord {
        first_face: 0,
        face_count: mesh.face_count(),
        diameter: base_diameter,
    }];
    let mut boxes = vec![mesh.bounds().expect("base mesh has vertices")];
    for (k, d) in decoys.iter().enumerate() {
        check_positive("relative diameter", d.relative_diameter)?;
        let mut piece = d.spec.build_mesh()?;
        let c = aabb_center(&piece);
        let factor = d.relative_diameter * base_diameter / aabb_diameter(&piece);
        let target = base_center + Vector3::from(d.offset);
        for v in &mut piece.vertices {
            *v = Point::from((v.coords - c) * factor + target);
        }
        let (lo, hi) = piece.bounds().expect("decoy has vertices");
        for (j, (blo, bhi)) in boxes.iter().enumerate() {
            let separated = (0..3).any(|a| hi[a] < blo[a] || lo[a] > bhi[a]);
            if !separated {
                return Err(Error::OverlapDetected(format!(
                    "decoy {k} bounding box intersects component {j}"
                )));
            }
        }
        boxes.push((lo, hi));
        components.push(ComponentRecord {
            first_face: mesh.face_count(),
            face_count: piece.face_count(),
            diameter: aabb_diameter(&piece),
        });
        mesh.append(&piece);
    }
    Ok(MultiComponent { mesh, components })
}

/// Kind-specific fixture parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixtureSpec {
    Box {
        a: f64,
        b: f64,
        c: f64,
    },
    Icosphere {
        radius: f64,
        subdivisions: u32,
    },
    Torus {
        major_radius: f64,
        minor_radius: f64,
        #[serde(default = "default_major_segments")]
        major_segments: usize,
        #[serde(default = "default_minor_segments")]
        minor_segments: usize,
    },
    MultiComponent {
        base: Box<FixtureSpec>,
        #[serde(default)]
        decoys: Vec<Decoy>,
    },
    CornerGrid(CornerGridSpec),
}

fn default_major_segments() -> usize {
    DEFAULT_TORUS_MAJOR_SEGMENTS
}

fn default_minor_segments() -> usize {
    DEFAULT_TORUS_MINOR_SEGMENTS
}

/// Known ground truth for a fixture.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTruth {
    /// Volume of the ideal solid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    /// Relative tolerance of the discretised mesh against `volume`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_rel_tolerance: Option<f64>,
    /// Meters per model unit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

/// Relative volume deficit bound of an icosphere against its sphere,
/// per subdivision level.
const ICOSPHERE_REL_TOLERANCE: [f64; 7] = [0.40, 0.13, 0.035, 0.0087, 0.0022, 5.5e-4, 1.4e-4];

/// What a fixture builds into.
#[derive(Debug, Clone, PartialEq)]
pub enum Fixture {
    Mesh(TriangleMesh),
    Grid(CornerGrid),
}

impl FixtureSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("fixture spec", e))
    }

    pub fn build(&self) -> Result<Fixture> {
        match self {
            FixtureSpec::CornerGrid(g) => make_corner_grid(g).map(Fixture::Grid),
            _ => self.build_mesh().map(Fixture::Mesh),
        }
    }

    pub fn build_mesh(&self) -> Result<TriangleMesh> {
        match self {
            FixtureSpec::Box { a, b, c } => make_box(*a, *b, *c),
            FixtureSpec::Icosphere { radius, subdivisions } => make_icosphere(*radius, *subdivisions),
            FixtureSpec::Torus {
                major_radius,
                minor_radius,
                major_segments,
                minor_segments,
            } => make_torus(*major_radius, *minor_radius, *major_segments, *minor_segments),
            FixtureSpec::MultiComponent { base, decoys } => {
                make_multi_component(base, decoys).map(|m| m.mesh)
            }
            FixtureSpec::CornerGrid(_) => {
                Err(Error::InvalidParameter("corner grid fixture has no mesh".into()))
            }
        }
    }

    pub fn analytic_truth(&self) -> AnalyticTruth {
        match self {
            FixtureSpec::Box { a, b, c } => AnalyticTruth {
                volume: Some(a * b * c),
                volume_rel_tolerance: Some(1e-12),
                scale: None,
            },
            FixtureSpec::Icosphere { radius, subdivisions } => AnalyticTruth {
                volume: Some(4.0 / 3.0 * PI * radius.powi(3)),
                volume_rel_tolerance: ICOSPHERE_REL_TOLERANCE.get(*subdivisions as usize).copied(),
                scale: None,
            },
            FixtureSpec::Torus {
                major_radius,
                minor_radius,
                major_segments,
                minor_segments,
            } => {
                // inscribed polygons lose sin(x)/x of the ideal in each direction
                let loss = |n: usize| {
                    let x = 2.0 * PI / n as f64;
                    1.0 - (x.sin() / x)
                };
                AnalyticTruth {
                    volume: Some(2.0 * PI * PI * major_radius * minor_radius * minor_radius),
                    volume_rel_tolerance: Some(1.05 * (loss(*major_segments) + loss(*minor_segments))),
                    scale: None,
                }
            }
            FixtureSpec::MultiComponent { base, decoys } => {
                let base_truth = base.analytic_truth();
                let mut total = base_truth.volume;
                let mut tol = base_truth.volume_rel_tolerance.unwrap_or(0.0);
                // decoys are rescaled, so their volume depends on the base diameter
                if !decoys.is_empty() {
                    let base_d = base.build_mesh().map(|m| aabb_diameter(&m)).ok();
                    for d in decoys {
                        let t = d.spec.analytic_truth();
                        let own_d = d.spec.build_mesh().map(|m| aabb_diameter(&m)).ok();
                        total = match (total, t.volume, base_d, own_d) {
                            (Some(acc), Some(v), Some(bd), Some(od)) => {
                                Some(acc + v * (d.relative_diameter * bd / od).powi(3))
                            }
                            _ => None,
                        };
                        tol = tol.max(t.volume_rel_tolerance.unwrap_or(0.0));
                    }
                }
                AnalyticTruth {
                    volume: total,
                    volume_rel_tolerance: total.map(|_| tol),
                    scale: None,
                }
            }
            FixtureSpec::CornerGrid(g) => AnalyticTruth {
                volume: None,
                volume_rel_tolerance: None,
                scale: Some(g.true_scale()),
            },
        }
    }
}
