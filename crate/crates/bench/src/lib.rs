//! Inputs shared by the benchmarks.

use foodvol::fixtures::{make_box, make_icosphere, make_multi_component, Decoy, FixtureSpec};
use foodvol::metrics::sample_surface;
use foodvol::registration::RigidTransform;
use foodvol::{Point, TriangleMesh};
use nalgebra::Vector3;

pub fn sphere(subdivisions: u32) -> TriangleMesh {
    make_icosphere(0.03, subdivisions).expect("valid icosphere")
}

/// Surface samples of a decimeter-scale box.
pub fn box_cloud(n: usize, seed: u64) -> Vec<Point> {
    let m = make_box(0.08, 0.06, 0.04).expect("valid box");
    sample_surface(&m, n, seed).expect("box has area").points
}

/// A small rotation and shift, like the residual between two reconstructions.
pub fn small_motion() -> RigidTransform {
    RigidTransform::from_axis_angle(
        Vector3::new(0.3, 1.0, 0.2),
        0.08,
        Vector3::new(0.004, -0.002, 0.003),
    )
}

/// Fine sphere with `pieces` tiny decoys around it.
pub fn cluttered(pieces: usize) -> TriangleMesh {
    let base = FixtureSpec::Icosphere {
        radius: 1.0,
        subdivisions: 4,
    };
    let decoys: Vec<Decoy> = (0..pieces)
        .map(|i| Decoy {
            spec: FixtureSpec::Icosphere {
                radius: 1.0,
                subdivisions: 1,
            },
            relative_diameter: 0.01 + 0.001 * (i % 20) as f64,
            offset: [3.0 + 0.2 * i as f64, 0.0, 0.0],
        })
        .collect();
    make_multi_component(&base, &decoys)
        .expect("decoys do not overlap")
        .mesh
}
