use foodvol::fixtures::{make_box, make_corner_grid, make_icosphere, make_torus, CornerGridSpec};
use foodvol::io::{read_obj, read_ply, write_obj, write_ply};
use foodvol::metrics::{ape, chamfer_points, sample_surface, ChamferConvention};
use foodvol::registration::{icp_points, IcpParams, RigidTransform};
use foodvol::scale::{adjacent_corner_distances, estimate_scale, median, CornerGrid};
use foodvol::topology::{component_diameter, component_stats, connected_components, remove_isolated_pieces};
use foodvol::volume::{apply_scale, volume_divergence, volume_per_face_abs};
use foodvol::{Point, TriangleMesh};
use nalgebra::Vector3;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn coord() -> impl Strategy<Value = f64> {
    -1e3f64..1e3
}

fn point() -> impl Strategy<Value = Point> {
    (coord(), coord(), coord()).prop_map(|(x, y, z)| Point::new(x, y, z))
}

fn rigid() -> impl Strategy<Value = RigidTransform> {
    (
        (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..1.0),
        -3.1f64..3.1,
        (-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0),
    )
        .prop_map(|((ax, ay, az), angle, (tx, ty, tz))| {
            RigidTransform::from_axis_angle(Vector3::new(ax, ay, az), angle, Vector3::new(tx, ty, tz))
        })
}

fn mesh() -> impl Strategy<Value = TriangleMesh> {
    prop::collection::vec(point(), 3..40).prop_flat_map(|verts| {
        let n = verts.len();
        let face = (0..n, 0..n, 0..n)
            .prop_filter("distinct", |(a, b, c)| a != b && b != c && a != c)
            .prop_map(|(a, b, c)| [a, b, c]);
        prop::collection::vec(face, 0..60).prop_map(move |faces| TriangleMesh {
            vertices: verts.clone(),
            faces,
        })
    })
}

fn closed_solid() -> impl Strategy<Value = TriangleMesh> {
    prop_oneof![
        (0.1f64..5.0, 0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, b, c)| make_box(a, b, c).unwrap()),
        (0.1f64..5.0, 0u32..3).prop_map(|(r, k)| make_icosphere(r, k).unwrap()),
        (1.0f64..3.0, 0.1f64..0.9).prop_map(|(big, small)| make_torus(big, small, 24, 12).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn obj_and_ply_round_trip_exactly(m in mesh()) {
        let mut obj = Vec::new();
        write_obj(&m, &mut obj).unwrap();
        prop_assert_eq!(&read_obj(obj.as_slice()).unwrap(), &m);
        let mut ply = Vec::new();
        write_ply(&m, &mut ply).unwrap();
        prop_assert_eq!(&read_ply(ply.as_slice()).unwrap(), &m);
    }

    #[test]
    fn volume_is_rigid_invariant(m in closed_solid(), t in rigid()) {
        let moved = TriangleMesh { vertices: t.apply_all(&m.vertices), faces: m.faces.clone() };
        let a = volume_divergence(&m).volume;
        let b = volume_divergence(&moved).volume;
        prop_assert!(rel(b, a) < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn volume_follows_cubic_scaling(m in closed_solid(), s in 1e-3f64..1e3) {
        let v = volume_divergence(&m).volume;
        let vs = volume_divergence(&apply_scale(&m, s).unwrap()).volume;
        prop_assert!(rel(vs, s * s * s * v) < 1e-9);
    }

    #[test]
    fn flipping_negates_signed_volume(m in closed_solid()) {
        let mut f = m.clone();
        f.flip_orientation();
        let (a, b) = (volume_divergence(&m), volume_divergence(&f));
        prop_assert_eq!(a.signed_raw, -b.signed_raw);
        prop_assert_eq!(a.volume, b.volume);
    }

    #[test]
    fn methods_agree_on_origin_star_shaped_solids(m in prop_oneof![
        (0.1f64..5.0, 0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, b, c)| make_box(a, b, c).unwrap()),
        (0.1f64..5.0, 0u32..4).prop_map(|(r, k)| make_icosphere(r, k).unwrap()),
    ]) {
        let a = volume_divergence(&m).volume;
        let b = volume_per_face_abs(&m).volume;
        prop_assert!(rel(b, a) < 1e-9);
    }

    #[test]
    fn volume_is_additive(a in closed_solid(), b in closed_solid()) {
        let mut far = b.clone();
        far.translate(&Vector3::new(100.0, 0.0, 0.0));
        let mut both = a.clone();
        both.append(&far);
        let sum = volume_divergence(&a).volume + volume_divergence(&b).volume;
        prop_assert!(rel(volume_divergence(&both).volume, sum) < 1e-9);
    }

    #[test]
    fn diameter_invariances(m in closed_solid(), t in (-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0), k in 0.01f64..100.0) {
        let lab = connected_components(&m);
        let d = component_diameter(&m, &lab, 0).unwrap();

        let mut shifted = m.clone();
        shifted.translate(&Vector3::new(t.0, t.1, t.2));
        prop_assert!(rel(component_diameter(&shifted, &lab, 0).unwrap(), d) < 1e-9);

        // reversing vertex order and remapping faces leaves the diameter alone
        let n = m.vertex_count();
        let permuted = TriangleMesh {
            vertices: m.vertices.iter().rev().copied().collect(),
            faces: m.faces.iter().map(|f| [n - 1 - f[0], n - 1 - f[1], n - 1 - f[2]]).collect(),
        };
        prop_assert_eq!(component_diameter(&permuted, &connected_components(&permuted), 0).unwrap(), d);

        let scaled = apply_scale(&m, k).unwrap();
        prop_assert!(rel(component_diameter(&scaled, &lab, 0).unwrap(), k * d) < 1e-12);
    }

    #[test]
    fn cleaning_keeps_volume_of_retained_pieces(
        sizes in prop::collection::vec(0.005f64..1.0, 1..6),
        delta in 0.0f64..0.99,
    ) {
        let mut m = TriangleMesh::empty();
        for (i, s) in sizes.iter().enumerate() {
            let mut cube = make_box(*s, *s, *s).unwrap();
            cube.translate(&Vector3::new(3.0 * i as f64, 0.0, 0.0));
            m.append(&cube);
        }
        let cleaned = remove_isolated_pieces(&m, delta);
        let largest = sizes.iter().cloned().fold(0.0, f64::max);
        let expected: f64 = sizes
            .iter()
            .filter(|&&s| s == largest || s * 3f64.sqrt() > delta * largest * 3f64.sqrt())
            .map(|s| s * s * s)
            .sum();
        prop_assert!(rel(volume_divergence(&cleaned).volume, expected) < 1e-9);
        let stats = component_stats(&cleaned, &connected_components(&cleaned));
        let by_parts: f64 = stats.iter().map(|s| {
            let side = s.diameter / 3f64.sqrt();
            side * side * side
        }).sum();
        prop_assert!(rel(by_parts, expected) < 1e-9);
    }

    #[test]
    fn scale_is_rigid_invariant(t in rigid(), rows in 2usize..8, cols in 2usize..8, spacing in 0.01f64..10.0) {
        let base = CornerGridSpec {
            rows, cols, spacing, square_size_real_m: 0.012,
            pose: RigidTransform::identity(), noise_sigma: 0.0, seed: 0,
        };
        let s0 = estimate_scale(&make_corner_grid(&base).unwrap()).unwrap().s;
        let s1 = estimate_scale(&make_corner_grid(&CornerGridSpec { pose: t, ..base.clone() }).unwrap()).unwrap().s;
        prop_assert!(rel(s1, s0) < 1e-12);
        prop_assert!(rel(s0, base.true_scale()) < 1e-12);
    }

    #[test]
    fn scaling_corners_divides_scale(k in 0.01f64..100.0, sigma in 0.0f64..0.01) {
        let spec = CornerGridSpec {
            rows: 5, cols: 6, spacing: 0.3, square_size_real_m: 0.02,
            pose: RigidTransform::identity(), noise_sigma: sigma, seed: 3,
        };
        let g = make_corner_grid(&spec).unwrap();
        let scaled = CornerGrid::new(g.corners().iter().map(|p| p * k).collect(), 5, 6, 0.02).unwrap();
        let (a, b) = (estimate_scale(&g).unwrap().s, estimate_scale(&scaled).unwrap().s);
        prop_assert!(rel(b, a / k) < 1e-12);
    }

    #[test]
    fn median_ignores_a_minority_of_large_values(
        clean in prop::collection::vec(1.0f64..2.0, 5..40),
        bump in prop::collection::vec(10.0f64..1e6, 40),
    ) {
        let n = clean.len();
        let lo = clean.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = clean.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut corrupted = clean.clone();
        let k = (n - 1) / 2;
        corrupted[..k].copy_from_slice(&bump[..k]);
        let m = median(&corrupted).unwrap();
        prop_assert!(m >= lo && m <= hi);
    }

    #[test]
    fn chamfer_symmetry_and_invariances(
        a in prop::collection::vec(point(), 1..60),
        b in prop::collection::vec(point(), 1..60),
        t in rigid(),
        pow in -4i32..5,
    ) {
        let ab = chamfer_points(&a, &b, ChamferConvention::Mean).unwrap();
        let ba = chamfer_points(&b, &a, ChamferConvention::Mean).unwrap();
        prop_assert_eq!(ab.value, ba.value);
        prop_assert_eq!(ab.value, (ab.forward_mean + ab.backward_mean) / 2.0);

        let moved = chamfer_points(&t.apply_all(&a), &t.apply_all(&b), ChamferConvention::Mean).unwrap();
        prop_assert!((moved.value - ab.value).abs() <= 1e-9 * ab.value.max(1e-300) + 1e-9);

        let k = 2f64.powi(pow);
        let scale = |v: &[Point]| v.iter().map(|p| p * k).collect::<Vec<_>>();
        let scaled = chamfer_points(&scale(&a), &scale(&b), ChamferConvention::Mean).unwrap();
        prop_assert_eq!(scaled.value, k * ab.value);
    }

    #[test]
    fn ape_is_scale_free(t in 0.1f64..1e4, p in 0.0f64..1e4, k in 1e-3f64..1e3) {
        prop_assert!((ape(k * t, k * p).unwrap() - ape(t, p).unwrap()).abs() < 1e-9 * ape(t, p).unwrap().max(1.0));
    }

    #[test]
    fn icp_output_is_proper_and_monotone(
        a in prop::collection::vec(point(), 3..80),
        b in prop::collection::vec(point(), 3..80),
    ) {
        let r = icp_points(&a, &b, &IcpParams::default()).unwrap();
        prop_assert!(r.transform.is_proper(1e-9));
        prop_assert!(r.iterations_used <= 50);
        for w in r.rmse_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].max(1.0), "{:?}", r.rmse_history);
        }
    }
}

#[test]
fn adjacency_count_formula() {
    for (rows, cols) in [(2, 2), (3, 3), (7, 10), (4, 9)] {
        let spec = CornerGridSpec {
            rows,
            cols,
            spacing: 1.0,
            square_size_real_m: 1.0,
            pose: RigidTransform::identity(),
            noise_sigma: 0.0,
            seed: 0,
        };
        let d = adjacent_corner_distances(&make_corner_grid(&spec).unwrap()).unwrap();
        assert_eq!(d.len(), rows * (cols - 1) + cols * (rows - 1));
    }
}

#[test]
fn noisy_grid_median_near_spacing() {
    let sigma = 1e-3;
    let spec = CornerGridSpec {
        rows: 7,
        cols: 10,
        spacing: 0.05,
        square_size_real_m: 0.012,
        pose: RigidTransform::identity(),
        noise_sigma: sigma,
        seed: 11,
    };
    let d = adjacent_corner_distances(&make_corner_grid(&spec).unwrap()).unwrap();
    assert_eq!(d.len(), 123);
    // independent median: sort and take the middle element of 123
    let mut sorted = d.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(median(&d).unwrap(), sorted[61]);
    assert!((sorted[61] - 0.05).abs() < 3.0 * sigma);
}

#[test]
fn outlier_corner_barely_moves_scale() {
    let spec = CornerGridSpec {
        rows: 7,
        cols: 10,
        spacing: 0.05,
        square_size_real_m: 0.012,
        pose: RigidTransform::identity(),
        noise_sigma: 0.0,
        seed: 0,
    };
    let clean = make_corner_grid(&spec).unwrap();
    let mut corners = clean.corners().to_vec();
    corners[23] = Point::from(corners[23].coords * 10.0);
    let bad = CornerGrid::new(corners, 7, 10, 0.012).unwrap();
    let (a, b) = (estimate_scale(&clean).unwrap().s, estimate_scale(&bad).unwrap().s);
    assert!(rel(b, a) < 0.01);
}

#[test]
fn icp_is_equivariant_on_an_asymmetric_solid() {
    let m = make_box(1.0, 2.0, 3.0).unwrap();
    let src = sample_surface(&m, 3000, 5).unwrap().points;
    let truth =
        RigidTransform::from_axis_angle(Vector3::new(1.0, 2.0, 0.5), 0.1, Vector3::new(0.2, -0.1, 0.3));
    let tgt = truth.apply_all(&src);
    let base = icp_points(&src, &tgt, &IcpParams::default()).unwrap();
    let q = RigidTransform::from_axis_angle(Vector3::new(0.0, 1.0, 1.0), 0.05, Vector3::zeros());
    let pre = icp_points(&q.apply_all(&src), &tgt, &IcpParams::default()).unwrap();
    let expected = base.transform.compose(&q.inverse());
    assert!((pre.transform.rotation - expected.rotation).amax() < 1e-6);
    assert!((pre.transform.translation - expected.translation).amax() < 1e-6);
}

#[test]
fn smooth_sphere_rotation_is_not_identifiable() {
    // a fine sphere looks the same under any rotation, so ICP settles at a
    // low RMSE without recovering the rotation
    let m = make_icosphere(1.0, 4).unwrap();
    let src = sample_surface(&m, 4000, 7).unwrap().points;
    let truth = RigidTransform::from_axis_angle(
        Vector3::new(0.3, -0.5, 1.0),
        30f64.to_radians(),
        Vector3::new(1.0, 2.0, 3.0),
    );
    let r = icp_points(&src, &truth.apply_all(&src), &IcpParams::default()).unwrap();
    assert!(r.final_rmse < 0.05);
    assert!((r.transform.rotation - truth.rotation).amax() > 0.1);
}

#[test]
fn per_face_counts_follow_area() {
    let m = make_box(1.0, 2.0, 4.0).unwrap();
    let n = 70_000;
    let c = sample_surface(&m, n, 21).unwrap();
    // faces normal to x have area 8, y: 4, z: 2 (per side), total 28
    let mut per_axis = [0usize; 3];
    for p in &c.points {
        let r = [p.x.abs() / 0.5, p.y.abs() / 1.0, p.z.abs() / 2.0];
        let axis = (0..3).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap();
        per_axis[axis] += 1;
    }
    for (axis, area) in [(0, 16.0), (1, 8.0), (2, 4.0)] {
        let expected = n as f64 * area / 28.0;
        let sd = (n as f64 * (area / 28.0) * (1.0 - area / 28.0)).sqrt();
        assert!(
            (per_axis[axis] as f64 - expected).abs() < 4.0 * sd,
            "{per_axis:?}"
        );
    }
}

#[test]
fn fixtures_are_closed_and_match_truth() {
    use foodvol::fixtures::FixtureSpec;
    let specs = [
        FixtureSpec::Box {
            a: 0.3,
            b: 1.5,
            c: 2.0,
        },
        FixtureSpec::Icosphere {
            radius: 0.7,
            subdivisions: 4,
        },
        FixtureSpec::Icosphere {
            radius: 2.0,
            subdivisions: 2,
        },
        FixtureSpec::Torus {
            major_radius: 2.0,
            minor_radius: 0.5,
            major_segments: 96,
            minor_segments: 48,
        },
        FixtureSpec::Torus {
            major_radius: 1.0,
            minor_radius: 0.3,
            major_segments: 32,
            minor_segments: 16,
        },
    ];
    for spec in specs {
        let m = spec.build_mesh().unwrap();
        m.validate().unwrap();
        assert!(m.is_closed(), "{spec:?}");
        let truth = spec.analytic_truth();
        let v = volume_divergence(&m).volume;
        assert!(
            rel(v, truth.volume.unwrap()) <= truth.volume_rel_tolerance.unwrap(),
            "{spec:?}"
        );
    }
}
