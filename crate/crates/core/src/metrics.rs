//! Surface sampling, Chamfer distance and volume percentage errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdtree::KdTree;
use crate::mesh::{Point, TriangleMesh};

pub const DEFAULT_SAMPLE_COUNT: usize = 100_000;

/// Points drawn from a mesh surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCloud {
    pub points: Vec<Point>,
    pub source_mesh_id: String,
    pub sample_count: usize,
    pub seed: u64,
}

impl SampledCloud {
    /// Wrap an existing point list.
    pub fn from_points(points: Vec<Point>, source_mesh_id: impl Into<String>) -> Self {
        SampledCloud {
            sample_count: points.len(),
            points,
            source_mesh_id: source_mesh_id.into(),
            seed: 0,
        }
    }

    pub fn transformed(&self, t: &crate::registration::RigidTransform) -> SampledCloud {
        SampledCloud {
            points: t.apply_all(&self.points),
            ..self.clone()
        }
    }
}

/// Area-weighted uniform samples: pick a face with probability proportional
/// to its area, then a uniform point inside it.
pub fn sample_surface(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<SampledCloud> {
    sample_surface_tagged(mesh, n, seed, "")
}

pub fn sample_surface_tagged(
    mesh: &TriangleMesh,
    n: usize,
    seed: u64,
    source_mesh_id: &str,
) -> Result<SampledCloud> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::ZeroAreaMesh);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let pick = rng.random::<f64>() * total;
            // first face whose cumulative area exceeds the draw; zero-area
            // faces are never selected
            let f = cumulative
                .partition_point(|&c| c <= pick)
                .min(cumulative.len() - 1);
            let [a, b, c] = mesh.triangle(f);
            let r1: f64 = rng.random::<f64>().sqrt();
            let r2: f64 = rng.random();
            Point::from(a.coords * (1.0 - r1) + b.coords * (r1 * (1.0 - r2)) + c.coords * (r1 * r2))
        })
        .collect();
    Ok(SampledCloud {
        points,
        source_mesh_id: source_mesh_id.to_string(),
        sample_count: n,
        seed,
    })
}

/// How per-point nearest-neighbour distances are reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChamferConvention {
    /// Mean Euclidean distance per direction.
    #[default]
    Mean,
    /// Mean squared distance per direction.
    MeanSquared,
    /// Summed Euclidean distance per direction.
    Sum,
    /// Summed squared distance per direction.
    SumSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamferResult {
    /// Average of the two directions.
    pub value: f64,
    pub forward_mean: f64,
    pub backward_mean: f64,
}

fn one_direction(from: &[Point], from_tree: &KdTree, into: &KdTree, convention: ChamferConvention) -> f64 {
    let order = from_tree.spatial_order();
    let found: Vec<f64> = order
        .par_iter()
        .map(|&i| into.nearest(&from[i]).expect("non-empty").distance_squared)
        .collect();
    // back to input order so the sum does not depend on the tree layout
    let mut d2 = vec![0.0; from.len()];
    for (&i, d) in order.iter().zip(found) {
        d2[i] = d;
    }
    let squared = matches!(
        convention,
        ChamferConvention::MeanSquared | ChamferConvention::SumSquared
    );
    let sum: f64 = if squared {
        d2.iter().sum()
    } else {
        d2.iter().map(|d| d.sqrt()).sum()
    };
    match convention {
        ChamferConvention::Mean | ChamferConvention::MeanSquared => sum / from.len() as f64,
        ChamferConvention::Sum | ChamferConvention::SumSquared => sum,
    }
}

pub fn chamfer_distance(a: &SampledCloud, b: &SampledCloud) -> Result<ChamferResult> {
    chamfer_points(&a.points, &b.points, ChamferConvention::Mean)
}

pub fn chamfer_distance_with(
    a: &SampledCloud,
    b: &SampledCloud,
    convention: ChamferConvention,
) -> Result<ChamferResult> {
    chamfer_points(&a.points, &b.points, convention)
}

pub fn chamfer_points(a: &[Point], b: &[Point], convention: ChamferConvention) -> Result<ChamferResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let tree_a = KdTree::build(a);
    let tree_b = KdTree::build(b);
    let forward = one_direction(a, &tree_a, &tree_b, convention);
    let backward = one_direction(b, &tree_b, &tree_a, convention);
    Ok(ChamferResult {
        value: (forward + backward) / 2.0,
        forward_mean: forward,
        backward_mean: backward,
    })
}

/// Absolute percentage error of one prediction.
pub fn ape(v_true: f64, v_pred: f64) -> Result<f64> {
    if !(v_true > 0.0) {
        return Err(Error::NonPositiveTrueVolume(v_true));
    }
    Ok((v_true - v_pred).abs() / v_true * 100.0)
}

/// Mean absolute percentage error over `(v_true, v_pred)` pairs.
pub fn mape(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("mape needs at least one pair".into()));
    }
    let total = pairs.iter().map(|&(t, p)| ape(t, p)).sum::<Result<f64>>()?;
    Ok(total / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::make_box;

    #[test]
    fn samples_stay_inside_triangle() {
        let m = TriangleMesh::new(
            vec![
                Point::new(0.0, 0.0, 0.0),
                Point::new(2.0, 0.0, 0.0),
                Point::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let c = sample_surface(&m, 1000, 3).unwrap();
        assert_eq!(c.points.len(), 1000);
        for p in &c.points {
            // barycentric coordinates of (x, y) in this triangle
            let (u, v) = (p.x / 2.0, p.y);
            assert!(u >= -1e-12 && v >= -1e-12 && u + v <= 1.0 + 1e-12);
            assert_eq!(p.z, 0.0);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = make_box(1.0, 2.0, 3.0).unwrap();
        assert_eq!(
            sample_surface(&m, 500, 9).unwrap(),
            sample_surface(&m, 500, 9).unwrap()
        );
        assert_ne!(
            sample_surface(&m, 500, 9).unwrap(),
            sample_surface(&m, 500, 10).unwrap()
        );
    }

    #[test]
    fn cube_faces_get_equal_share() {
        let m = make_box(1.0, 1.0, 1.0).unwrap();
        let n = 60_000;
        let c = sample_surface(&m, n, 42).unwrap();
        let mut counts = [0usize; 6];
        for p in &c.points {
            let side = [p.x, p.y, p.z]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(axis, v)| 2 * axis + usize::from(*v > 0.0))
                .unwrap();
            counts[side] += 1;
        }
        let expect = n as f64 / 6.0;
        for c in counts {
            assert!((c as f64 - expect).abs() / expect < 0.05, "{counts:?}");
        }
    }

    #[test]
    fn zero_area_and_zero_count() {
        let flat = TriangleMesh {
            vertices: vec![
                Point::origin(),
                Point::new(1.0, 0.0, 0.0),
                Point::new(2.0, 0.0, 0.0),
            ],
            faces: vec![[0, 1, 2]],
        };
        assert!(matches!(sample_surface(&flat, 10, 0), Err(Error::ZeroAreaMesh)));
        assert!(matches!(
            sample_surface(&TriangleMesh::empty(), 10, 0),
            Err(Error::ZeroAreaMesh)
        ));
        let m = make_box(1.0, 1.0, 1.0).unwrap();
        assert!(sample_surface(&m, 0, 0).is_err());
    }

    #[test]
    fn chamfer_basics() {
        let a = SampledCloud::from_points(vec![Point::origin()], "a");
        let b = SampledCloud::from_points(vec![Point::new(3.0, 0.0, 0.0)], "b");
        let r = chamfer_distance(&a, &b).unwrap();
        assert_eq!((r.value, r.forward_mean, r.backward_mean), (3.0, 3.0, 3.0));
        assert_eq!(chamfer_distance(&a, &a).unwrap().value, 0.0);
        let sq = chamfer_distance_with(&a, &b, ChamferConvention::MeanSquared).unwrap();
        assert_eq!(sq.value, 9.0);
        let empty = SampledCloud::from_points(vec![], "e");
        assert!(matches!(chamfer_distance(&a, &empty), Err(Error::EmptyCloud)));
    }

    #[test]
    fn chamfer_sum_variant() {
        let a = SampledCloud::from_points(vec![Point::origin(), Point::new(1.0, 0.0, 0.0)], "a");
        let b = SampledCloud::from_points(vec![Point::new(0.0, 1.0, 0.0)], "b");
        let r = chamfer_distance_with(&a, &b, ChamferConvention::Sum).unwrap();
        assert!((r.forward_mean - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(r.backward_mean, 1.0);
    }

    #[test]
    fn ape_values() {
        assert!((ape(38.53, 37.00).unwrap() - 3.97).abs() < 0.02);
        assert_eq!(ape(10.0, 10.0).unwrap(), 0.0);
        assert!((ape(589.82, 589.82 - 7.64).unwrap() - 1.30).abs() < 0.02);
        assert!(matches!(ape(0.0, 1.0), Err(Error::NonPositiveTrueVolume(_))));
    }

    #[test]
    fn mape_values() {
        assert_eq!(mape(&[(2.0, 3.0)]).unwrap(), ape(2.0, 3.0).unwrap());
        assert!((mape(&[(10.0, 10.0), (10.0, 11.0)]).unwrap() - 5.0).abs() < 1e-12);
        assert!(matches!(mape(&[]), Err(Error::EmptyInput(_))));
        assert!(mape(&[(1.0, 1.0), (-1.0, 1.0)]).is_err());
    }
}
