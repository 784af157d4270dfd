//! Rigid registration: closed-form least-squares fit and point-to-point ICP.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdtree::KdTree;
use crate::mesh::Point;
use crate::metrics::SampledCloud;

/// Proper rigid motion `p -> R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "TransformJson", into = "TransformJson")]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

/// Row-major JSON layout.
#[derive(Serialize, Deserialize)]
struct TransformJson {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl From<TransformJson> for RigidTransform {
    fn from(j: TransformJson) -> Self {
        let r = j.rotation;
        RigidTransform {
            rotation: Matrix3::new(
                r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
            ),
            translation: Vector3::from(j.translation),
        }
    }
}

impl From<RigidTransform> for TransformJson {
    fn from(t: RigidTransform) -> Self {
        let m = &t.rotation;
        TransformJson {
            rotation: [
                [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
                [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
                [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
            ],
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        RigidTransform::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Rotation by `angle` radians about `axis`, followed by `translation`.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64, translation: Vector3<f64>) -> Self {
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        RigidTransform {
            rotation: *rot.matrix(),
            translation,
        }
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_all(&self, points: &[Point]) -> Vec<Point> {
        points.iter().map(|p| self.apply(p)).collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Largest element of `RᵀR − I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).amax()
    }

    pub fn is_proper(&self, tol: f64) -> bool {
        self.orthonormality_error() <= tol && (self.rotation.determinant() - 1.0).abs() <= tol
    }
}

fn centroid(points: &[Point]) -> Vector3<f64> {
    let sum = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords);
    sum / points.len() as f64
}

/// Proper rigid transform minimising `Σ ‖R sᵢ + t − tᵢ‖²`.
///
/// Uses the SVD of the cross-covariance matrix, flipping the last singular
/// direction when needed so the result is never a reflection.
pub fn best_rigid_fit(source: &[Point], target: &[Point]) -> Result<RigidTransform> {
    if source.len() != target.len() {
        return Err(Error::InvalidParameter(format!(
            "point lists differ in length: {} vs {}",
            source.len(),
            target.len()
        )));
    }
    if source.len() < 3 {
        return Err(Error::InsufficientPoints(source.len()));
    }
    let cs = centroid(source);
    let ct = centroid(target);
    let mut h = Matrix3::zeros();
    let mut spread = Matrix3::zeros();
    for (s, t) in source.iter().zip(target) {
        let a = s.coords - cs;
        h += a * (t.coords - ct).transpose();
        spread += a * a.transpose();
    }
    let eig = spread.symmetric_eigenvalues();
    let mut ev = [eig[0], eig[1], eig[2]];
    ev.sort_by(|a, b| b.total_cmp(a));
    if !(ev[0] > 0.0) || ev[1] <= ev[0] * 1e-12 {
        return Err(Error::DegenerateConfiguration(
            "source points are coincident or collinear".into(),
        ));
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("svd u");
    let v = svd.v_t.expect("svd v_t").transpose();
    let d = (v * u.transpose()).determinant().signum();
    let correction = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d));
    let rotation = v * correction * u.transpose();
    Ok(RigidTransform {
        rotation,
        translation: ct - rotation * cs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcpParams {
    pub max_iterations: usize,
    /// Stop once the RMSE changes by less than this between iterations.
    pub convergence_eps: f64,
    /// Ignore correspondences longer than this.
    pub max_correspondence_distance: Option<f64>,
    /// Use a random subset of this many source points for correspondence.
    pub source_subsample: Option<usize>,
    /// Seed for the subset draw.
    pub seed: u64,
}

impl Default for IcpParams {
    fn default() -> Self {
        IcpParams {
            max_iterations: 50,
            convergence_eps: 1e-8,
            max_correspondence_distance: None,
            source_subsample: None,
            seed: 0,
        }
    }
}

impl IcpParams {
    fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if !(self.convergence_eps > 0.0) {
            return Err(Error::InvalidParameter("convergence_eps must be > 0".into()));
        }
        if let Some(d) = self.max_correspondence_distance {
            if !(d > 0.0) {
                return Err(Error::InvalidParameter(
                    "max_correspondence_distance must be > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcpResult {
    /// Maps source coordinates into the target frame.
    pub transform: RigidTransform,
    pub final_rmse: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// RMSE after centroid alignment, then after every iteration.
    pub rmse_history: Vec<f64>,
}

struct Correspondences {
    /// Nearest target index of every moved point, kept as search hints for
    /// the next round.
    nearest: Vec<usize>,
    source: Vec<Point>,
    target: Vec<Point>,
    rmse: f64,
}

fn correspond(
    tree: &KdTree,
    target: &[Point],
    moved: &[Point],
    order: &[usize],
    hints: Option<&[usize]>,
    max_distance: Option<f64>,
) -> Correspondences {
    let found: Vec<_> = order
        .par_iter()
        .map(|&i| {
            match hints {
                Some(h) => tree.nearest_with_hint(&moved[i], h[i]),
                None => tree.nearest(&moved[i]),
            }
            .expect("target is non-empty")
        })
        .collect();
    let mut hits = vec![None; moved.len()];
    for (&i, hit) in order.iter().zip(found) {
        hits[i] = Some(hit);
    }
    let hits: Vec<_> = hits
        .into_iter()
        .map(|h| h.expect("every point queried"))
        .collect();
    let limit = max_distance.map_or(f64::INFINITY, |d| d * d);
    let mut source = Vec::with_capacity(moved.len());
    let mut matched = Vec::with_capacity(moved.len());
    let mut sum = 0.0;
    for (p, hit) in moved.iter().zip(&hits) {
        if hit.distance_squared <= limit {
            source.push(*p);
            matched.push(target[hit.index]);
            sum += hit.distance_squared;
        }
    }
    let rmse = if source.is_empty() {
        0.0
    } else {
        (sum / source.len() as f64).sqrt()
    };
    Correspondences {
        nearest: hits.iter().map(|h| h.index).collect(),
        source,
        target: matched,
        rmse,
    }
}

/// Translation-only fallback when the matched source points cannot fix a
/// rotation.
fn fit_step(source: &[Point], target: &[Point]) -> RigidTransform {
    match best_rigid_fit(source, target) {
        Ok(t) => t,
        Err(_) if !source.is_empty() => RigidTransform::from_translation(centroid(target) - centroid(source)),
        Err(_) => RigidTransform::identity(),
    }
}

/// Point-to-point ICP from `source` into `target`.
///
/// Starts by moving the source centroid onto the target centroid, then
/// alternates exact nearest-neighbour matching with [`best_rigid_fit`].
pub fn icp(source: &SampledCloud, target: &SampledCloud, params: &IcpParams) -> Result<IcpResult> {
    icp_points(&source.points, &target.points, params)
}

pub fn icp_points(source: &[Point], target: &[Point], params: &IcpParams) -> Result<IcpResult> {
    params.validate()?;
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let working: Vec<Point> = match params.source_subsample {
        Some(k) if k < source.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let mut idx = rand::seq::index::sample(&mut rng, source.len(), k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| source[i]).collect()
        }
        _ => source.to_vec(),
    };
    let tree = KdTree::build(target);
    // a rigid motion keeps neighbours together, so one ordering serves every round
    let order = KdTree::build(&working).spatial_order().to_vec();

    let mut transform = RigidTransform::from_translation(centroid(target) - centroid(&working));
    let mut pairs = correspond(
        &tree,
        target,
        &transform.apply_all(&working),
        &order,
        None,
        params.max_correspondence_distance,
    );
    let mut history = vec![pairs.rmse];
    let mut converged = false;
    let mut iterations_used = 0;

    for it in 1..=params.max_iterations {
        iterations_used = it;
        let step = fit_step(&pairs.source, &pairs.target);
        transform = step.compose(&transform);
        let next = correspond(
            &tree,
            target,
            &transform.apply_all(&working),
            &order,
            Some(&pairs.nearest),
            params.max_correspondence_distance,
        );
        let change = (pairs.rmse - next.rmse).abs();
        history.push(next.rmse);
        pairs = next;
        if change < params.convergence_eps {
            converged = true;
            break;
        }
    }
    tracing::debug!(
        "icp: {} iterations, rmse {:.3e}, converged {converged}",
        iterations_used,
        pairs.rmse
    );
    Ok(IcpResult {
        transform,
        final_rmse: pairs.rmse,
        iterations_used,
        converged,
        rmse_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scattered() -> Vec<Point> {
        (0..50)
            .map(|i| {
                let f = i as f64;
                Point::new(
                    (f * 0.37).sin() * 2.0,
                    (f * 0.71).cos(),
                    (f * 0.13).sin() * 0.5 + f * 0.01,
                )
            })
            .collect()
    }

    #[test]
    fn identity_fit() {
        let pts = scattered();
        let t = best_rigid_fit(&pts, &pts).unwrap();
        assert!((t.rotation - Matrix3::identity()).amax() < 1e-12);
        assert!(t.translation.amax() < 1e-12);
    }

    #[test]
    fn recovers_known_transform() {
        let pts = scattered();
        let truth = RigidTransform::from_axis_angle(Vector3::z(), PI / 6.0, Vector3::new(1.0, 2.0, 3.0));
        let moved = truth.apply_all(&pts);
        let t = best_rigid_fit(&pts, &moved).unwrap();
        assert!((t.rotation - truth.rotation).amax() < 1e-9);
        assert!((t.translation - truth.translation).amax() < 1e-9);
    }

    #[test]
    fn mirror_image_still_proper() {
        let pts = scattered();
        let mirrored: Vec<Point> = pts.iter().map(|p| Point::new(-p.x, p.y, p.z)).collect();
        let t = best_rigid_fit(&pts, &mirrored).unwrap();
        assert!((t.rotation.determinant() - 1.0).abs() < 1e-9);
        assert!(t.orthonormality_error() < 1e-9);
    }

    #[test]
    fn fit_errors() {
        let two = vec![Point::origin(), Point::new(1.0, 0.0, 0.0)];
        assert!(matches!(
            best_rigid_fit(&two, &two),
            Err(Error::InsufficientPoints(2))
        ));
        let line: Vec<Point> = (0..5)
            .map(|i| Point::new(i as f64, 2.0 * i as f64, 0.0))
            .collect();
        assert!(matches!(
            best_rigid_fit(&line, &line),
            Err(Error::DegenerateConfiguration(_))
        ));
        assert!(matches!(
            best_rigid_fit(&line, &line[..4]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn icp_identical_clouds() {
        let pts = scattered();
        let r = icp_points(&pts, &pts, &IcpParams::default()).unwrap();
        assert!(r.converged && r.iterations_used <= 2);
        assert!(r.final_rmse < 1e-12);
        for p in &pts {
            assert!((r.transform.apply(p) - p).norm() < 1e-9);
        }
    }

    #[test]
    fn icp_rejects_empty_and_bad_params() {
        let pts = scattered();
        assert!(matches!(
            icp_points(&[], &pts, &IcpParams::default()),
            Err(Error::EmptyCloud)
        ));
        assert!(matches!(
            icp_points(&pts, &[], &IcpParams::default()),
            Err(Error::EmptyCloud)
        ));
        let bad = IcpParams {
            max_iterations: 0,
            ..IcpParams::default()
        };
        assert!(icp_points(&pts, &pts, &bad).is_err());
    }

    #[test]
    fn icp_single_point_is_translation() {
        let a = [Point::new(1.0, 1.0, 1.0)];
        let b = [Point::new(4.0, 1.0, 1.0)];
        let r = icp_points(&a, &b, &IcpParams::default()).unwrap();
        assert!(r.final_rmse < 1e-15);
        assert!(r.transform.is_proper(1e-12));
    }

    #[test]
    fn transform_json_is_row_major() {
        let t = RigidTransform {
            rotation: Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0),
            translation: Vector3::new(1.0, 2.0, 3.0),
        };
        let v = serde_json::to_value(t).unwrap();
        assert_eq!(v["rotation"][0], serde_json::json!([0.0, -1.0, 0.0]));
        assert_eq!(v["translation"], serde_json::json!([1.0, 2.0, 3.0]));
        let back: RigidTransform = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn compose_and_inverse() {
        let a =
            RigidTransform::from_axis_angle(Vector3::new(1.0, 1.0, 0.0), 0.3, Vector3::new(0.5, 0.0, -1.0));
        let id = a.compose(&a.inverse());
        assert!((id.rotation - Matrix3::identity()).amax() < 1e-12);
        assert!(id.translation.amax() < 1e-12);
    }
}
