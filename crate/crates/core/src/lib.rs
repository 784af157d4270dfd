//! Post-reconstruction geometry for food volume estimation.
//!
//! Takes an unscaled food mesh and the checkerboard corners seen in the same
//! reconstruction, and turns them into a metric volume:
//!
//! 1. [`topology::remove_isolated_pieces`] drops small disconnected pieces.
//! 2. [`scale::estimate_scale`] reads meters-per-unit off the checkerboard.
//! 3. [`volume::apply_scale`] and [`volume::volume_divergence`] give the
//!    volume in cubic meters.
//!
//! Against a ground-truth mesh, [`registration::icp`] aligns the prediction
//! and [`metrics`] scores it with Chamfer distance and percentage error.
//! [`harness`] strings this together per scene and aggregates reports;
//! [`fixtures`] generates analytic scenes for testing.

// `!(x > 0.0)` is how the validators reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fixtures;
pub mod harness;
pub mod io;
pub mod kdtree;
pub mod mesh;
pub mod metrics;
pub mod registration;
pub mod scale;
pub mod topology;
pub mod volume;

pub use error::{Error, Result};
pub use io::{load_mesh, save_mesh, MeshFormat};
pub use mesh::{Face, Point, TriangleMesh};
pub use metrics::{ape, chamfer_distance, mape, sample_surface, ChamferResult, SampledCloud};
pub use registration::{best_rigid_fit, icp, IcpParams, IcpResult, RigidTransform};
pub use scale::{estimate_scale, CornerGrid, ScaleEstimate};
pub use topology::{connected_components, remove_isolated_pieces, ComponentLabeling};
pub use volume::{apply_scale, volume_divergence, volume_per_face_abs, VolumeMethod, VolumeResult};
