//! Per-scene evaluation and multi-scene reports.
//!
//! A scene is a food mesh in model units, the checkerboard corners from the
//! same reconstruction, and optionally a metric ground-truth mesh and
//! volume. [`run_scene`] cleans the food mesh, scales it, measures it and,
//! when a ground-truth mesh is given, scores shape agreement before and
//! after ICP. The reference corners are read as-is and never cleaned.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures::{make_corner_grid, make_multi_component, CornerGridSpec, Decoy, FixtureSpec};
use crate::io::{load_mesh, save_mesh, MeshFormat};
use crate::metrics::{
    ape, chamfer_distance_with, sample_surface_tagged, ChamferConvention, DEFAULT_SAMPLE_COUNT,
};
use crate::registration::{icp, IcpParams, IcpResult, RigidTransform};
use crate::scale::{estimate_scale, CornerGrid};
use crate::topology::{connected_components, remove_isolated_pieces_with, DiameterReference, DEFAULT_DELTA};
use crate::volume::{apply_scale, volume_divergence};

/// Unit tag for volumes in manifests and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeUnit {
    #[default]
    M3,
    L,
    Ml,
    Cm3,
    Mm3,
}

impl VolumeUnit {
    /// How many of this unit make one cubic meter.
    pub fn per_cubic_meter(self) -> f64 {
        match self {
            VolumeUnit::M3 => 1.0,
            VolumeUnit::L => 1e3,
            VolumeUnit::Ml | VolumeUnit::Cm3 => 1e6,
            VolumeUnit::Mm3 => 1e9,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VolumeUnit::M3 => "m3",
            VolumeUnit::L => "l",
            VolumeUnit::Ml => "ml",
            VolumeUnit::Cm3 => "cm3",
            VolumeUnit::Mm3 => "mm3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaggedVolume {
    pub value: f64,
    pub unit: VolumeUnit,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

/// One scene's inputs. Relative paths resolve against the manifest file's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub scene_id: String,
    /// Text prompt that selected the food upstream. Carried into reports.
    pub food_label: String,
    pub food_mesh_path: PathBuf,
    pub reference_corners_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_mesh_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_volume: Option<TaggedVolume>,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl SceneManifest {
    pub fn validate(&self) -> Result<()> {
        if let Some(gt) = &self.ground_truth_volume {
            if !(gt.value > 0.0 && gt.value.is_finite()) {
                return Err(Error::NonPositiveTrueVolume(gt.value));
            }
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!(
                "delta must be in [0, 1], got {}",
                self.delta
            )));
        }
        Ok(())
    }

    fn resolve_against(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.food_mesh_path);
        fix(&mut self.reference_corners_path);
        if let Some(p) = self.ground_truth_mesh_path.as_mut() {
            fix(p);
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ManifestFile {
    One(SceneManifest),
    Many(Vec<SceneManifest>),
    Wrapped { scenes: Vec<SceneManifest> },
}

/// Extension of per-scene manifest files inside a manifest directory.
pub const SCENE_MANIFEST_SUFFIX: &str = ".scene.json";

/// Read manifests from a file (one scene, a list, or `{"scenes": [...]}`)
/// or from every `*.scene.json` file in a directory, in file-name order.
pub fn load_manifests(path: &Path) -> Result<Vec<SceneManifest>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.ends_with(SCENE_MANIFEST_SUFFIX))
            })
            .collect();
        files.sort();
        let mut out = Vec::new();
        for f in files {
            out.extend(load_manifest_file(&f)?);
        }
        if out.is_empty() {
            return Err(Error::EmptyInput(format!(
                "no *{SCENE_MANIFEST_SUFFIX} files in {}",
                path.display()
            )));
        }
        Ok(out)
    } else {
        load_manifest_file(path)
    }
}

fn load_manifest_file(path: &Path) -> Result<Vec<SceneManifest>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed: ManifestFile =
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    let mut scenes = match parsed {
        ManifestFile::One(m) => vec![m],
        ManifestFile::Many(v) | ManifestFile::Wrapped { scenes: v } => v,
    };
    let base = path.parent().unwrap_or(Path::new("."));
    for m in &mut scenes {
        m.resolve_against(base);
        m.validate()?;
    }
    Ok(scenes)
}

/// Knobs shared by every scene in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Surface samples per mesh for Chamfer and ICP.
    pub samples: usize,
    /// Sampling seed, used for both the prediction and the ground truth.
    pub seed: u64,
    pub icp: IcpParams,
    /// Overrides each manifest's delta when set.
    pub delta_override: Option<f64>,
    pub chamfer: ChamferConvention,
    pub diameter_reference: DiameterReference,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            samples: DEFAULT_SAMPLE_COUNT,
            seed: 0,
            icp: IcpParams::default(),
            delta_override: None,
            chamfer: ChamferConvention::Mean,
            diameter_reference: DiameterReference::LargestComponent,
        }
    }
}

/// One report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub scene_id: String,
    pub label: String,
    /// Unit of `v_pred`, `v_true` and `abs_error`.
    pub volume_unit: VolumeUnit,
    pub v_pred: f64,
    pub v_true: Option<f64>,
    pub abs_error: Option<f64>,
    pub ape_percent: Option<f64>,
    pub chamfer_pre_icp: Option<f64>,
    pub chamfer_post_icp: Option<f64>,
    /// Meters per model unit.
    pub scale_s: f64,
    pub components_before: usize,
    pub components_after: usize,
    pub icp: Option<IcpResult>,
}

fn stage<T>(scene: &str, name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        scene_id: scene.to_string(),
        stage: name,
        source: Box::new(e),
    })
}

/// Clean, scale, measure and optionally score one scene.
pub fn run_scene(manifest: &SceneManifest, opts: &RunOptions) -> Result<EvaluationRecord> {
    let id = manifest.scene_id.as_str();
    stage(id, "manifest", manifest.validate())?;
    let delta = opts.delta_override.unwrap_or(manifest.delta);

    let raw = stage(
        id,
        "load_food_mesh",
        load_mesh(&manifest.food_mesh_path, MeshFormat::Auto),
    )?;
    let components_before = connected_components(&raw).component_count;
    let cleaned = remove_isolated_pieces_with(&raw, delta, opts.diameter_reference);
    let components_after = connected_components(&cleaned).component_count;

    let grid = stage(
        id,
        "load_corners",
        CornerGrid::load(&manifest.reference_corners_path),
    )?;
    let scale = stage(id, "scale", estimate_scale(&grid))?;
    let scaled = stage(id, "apply_scale", apply_scale(&cleaned, scale.s))?;
    let volume_m3 = volume_divergence(&scaled).volume;

    let unit = manifest.ground_truth_volume.map_or(VolumeUnit::M3, |gt| gt.unit);
    let v_pred = volume_m3 * unit.per_cubic_meter();
    let (v_true, abs_error, ape_percent) = match manifest.ground_truth_volume {
        Some(gt) => (
            Some(gt.value),
            Some((gt.value - v_pred).abs()),
            Some(stage(id, "ape", ape(gt.value, v_pred))?),
        ),
        None => (None, None, None),
    };

    let mut record = EvaluationRecord {
        scene_id: manifest.scene_id.clone(),
        label: manifest.food_label.clone(),
        volume_unit: unit,
        v_pred,
        v_true,
        abs_error,
        ape_percent,
        chamfer_pre_icp: None,
        chamfer_post_icp: None,
        scale_s: scale.s,
        components_before,
        components_after,
        icp: None,
    };

    if let Some(gt_path) = &manifest.ground_truth_mesh_path {
        let gt = stage(id, "load_ground_truth_mesh", load_mesh(gt_path, MeshFormat::Auto))?;
        let pred_cloud = stage(
            id,
            "sample_prediction",
            sample_surface_tagged(&scaled, opts.samples, opts.seed, "prediction"),
        )?;
        let gt_cloud = stage(
            id,
            "sample_ground_truth",
            sample_surface_tagged(&gt, opts.samples, opts.seed, "ground_truth"),
        )?;
        let pre = stage(
            id,
            "chamfer_pre_icp",
            chamfer_distance_with(&pred_cloud, &gt_cloud, opts.chamfer),
        )?;
        let reg = stage(id, "icp", icp(&pred_cloud, &gt_cloud, &opts.icp))?;
        let aligned = pred_cloud.transformed(&reg.transform);
        let post = stage(
            id,
            "chamfer_post_icp",
            chamfer_distance_with(&aligned, &gt_cloud, opts.chamfer),
        )?;
        record.chamfer_pre_icp = Some(pre.value);
        record.chamfer_post_icp = Some(post.value);
        record.icp = Some(reg);
    }
    Ok(record)
}

/// Run scenes in parallel; records come back in manifest order.
pub fn run_batch(manifests: &[SceneManifest], opts: &RunOptions) -> Result<Vec<EvaluationRecord>> {
    manifests.par_iter().map(|m| run_scene(m, opts)).collect()
}

/// Per-column values of an aggregate row. Absent where no record has the
/// column or the statistic is undefined.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub v_pred: Option<f64>,
    pub v_true: Option<f64>,
    pub abs_error: Option<f64>,
    pub ape_percent: Option<f64>,
    pub chamfer_pre_icp: Option<f64>,
    pub chamfer_post_icp: Option<f64>,
    pub scale_s: Option<f64>,
}

/// Relative difference of a baseline's means against ours, in percent:
/// `(baseline − ours) / ours × 100`. Positive means the baseline's error is
/// larger than ours. Only error columns are filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeRow {
    pub baseline: String,
    pub percent: SummaryRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<EvaluationRecord>,
    pub mean_row: SummaryRow,
    /// Sample standard deviation (n − 1 denominator).
    pub stdev_row: SummaryRow,
    #[serde(default)]
    pub relative_rows: Vec<RelativeRow>,
}

/// Column means of some other method, to compare against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub name: String,
    pub mean: SummaryRow,
}

impl Baseline {
    pub fn from_report(name: impl Into<String>, report: &Report) -> Self {
        Baseline {
            name: name.into(),
            mean: report.mean_row.clone(),
        }
    }

    pub fn from_records(name: impl Into<String>, records: &[EvaluationRecord]) -> Result<Self> {
        let columns = Columns::of(records);
        Ok(Baseline {
            name: name.into(),
            mean: columns.map(mean),
        })
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Sample standard deviation; `None` for fewer than two values.
pub fn sample_stdev(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

struct Columns {
    v_pred: Vec<f64>,
    v_true: Vec<f64>,
    abs_error: Vec<f64>,
    ape_percent: Vec<f64>,
    chamfer_pre_icp: Vec<f64>,
    chamfer_post_icp: Vec<f64>,
    scale_s: Vec<f64>,
}

impl Columns {
    fn of(records: &[EvaluationRecord]) -> Columns {
        let pick = |f: fn(&EvaluationRecord) -> Option<f64>| records.iter().filter_map(f).collect();
        Columns {
            v_pred: pick(|r| Some(r.v_pred)),
            v_true: pick(|r| r.v_true),
            abs_error: pick(|r| r.abs_error),
            ape_percent: pick(|r| r.ape_percent),
            chamfer_pre_icp: pick(|r| r.chamfer_pre_icp),
            chamfer_post_icp: pick(|r| r.chamfer_post_icp),
            scale_s: pick(|r| Some(r.scale_s)),
        }
    }

    fn map(&self, f: fn(&[f64]) -> Option<f64>) -> SummaryRow {
        SummaryRow {
            v_pred: f(&self.v_pred),
            v_true: f(&self.v_true),
            abs_error: f(&self.abs_error),
            ape_percent: f(&self.ape_percent),
            chamfer_pre_icp: f(&self.chamfer_pre_icp),
            chamfer_post_icp: f(&self.chamfer_post_icp),
            scale_s: f(&self.scale_s),
        }
    }
}

fn relative(ours: Option<f64>, theirs: Option<f64>) -> Option<f64> {
    match (ours, theirs) {
        (Some(o), Some(b)) if o != 0.0 => Some((b - o) / o * 100.0),
        _ => None,
    }
}

/// Means, sample standard deviations and baseline comparisons.
pub fn aggregate(records: &[EvaluationRecord], baselines: &[Baseline]) -> Result<Report> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to aggregate".into()));
    }
    let columns = Columns::of(records);
    let mean_row = columns.map(mean);
    let stdev_row = columns.map(sample_stdev);
    let relative_rows = baselines
        .iter()
        .map(|b| RelativeRow {
            baseline: b.name.clone(),
            percent: SummaryRow {
                abs_error: relative(mean_row.abs_error, b.mean.abs_error),
                ape_percent: relative(mean_row.ape_percent, b.mean.ape_percent),
                chamfer_pre_icp: relative(mean_row.chamfer_pre_icp, b.mean.chamfer_pre_icp),
                chamfer_post_icp: relative(mean_row.chamfer_post_icp, b.mean.chamfer_post_icp),
                ..SummaryRow::default()
            },
        })
        .collect();
    Ok(Report {
        records: records.to_vec(),
        mean_row,
        stdev_row,
        relative_rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: [&str; 10] = [
    "id",
    "label",
    "unit",
    "v_pred",
    "v_true",
    "abs_error",
    "ape_percent",
    "chamfer_pre_icp",
    "chamfer_post_icp",
    "scale_s",
];

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.4}"))
}

fn summary_cells(id: &str, label: &str, row: &SummaryRow) -> Vec<String> {
    vec![
        id.to_string(),
        label.to_string(),
        String::new(),
        cell(row.v_pred),
        cell(row.v_true),
        cell(row.abs_error),
        cell(row.ape_percent),
        cell(row.chamfer_pre_icp),
        cell(row.chamfer_post_icp),
        cell(row.scale_s),
    ]
}

impl Report {
    /// CSV table: one row per record, then `Mean`, `Stdev.` and one `Rel.`
    /// row per baseline. Numbers carry four decimals.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.scene_id.clone(),
                r.label.clone(),
                r.volume_unit.as_str().to_string(),
                cell(Some(r.v_pred)),
                cell(r.v_true),
                cell(r.abs_error),
                cell(r.ape_percent),
                cell(r.chamfer_pre_icp),
                cell(r.chamfer_post_icp),
                cell(Some(r.scale_s)),
            ])?;
        }
        w.write_record(summary_cells("Mean", "-", &self.mean_row))?;
        w.write_record(summary_cells("Stdev.", "-", &self.stdev_row))?;
        for rel in &self.relative_rows {
            w.write_record(summary_cells("Rel.", &rel.baseline, &rel.percent))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Full-precision JSON.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("report", e))
    }

    pub fn from_json_str(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::json("report", e))
    }

    pub fn load(path: &Path) -> Result<Report> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }
}

pub fn write_report(report: &Report, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report.to_csv()?,
        ReportFormat::Json => report.to_json()?,
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// A synthetic scene whose metric truth is known.
///
/// The ground-truth mesh is `shape` in meters. The food mesh is the same
/// shape plus `decoys`, moved by `pose` and divided by `true_scale`, so a
/// correct pipeline reproduces the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFixtureSpec {
    pub scene_id: String,
    pub label: String,
    pub shape: FixtureSpec,
    #[serde(default)]
    pub decoys: Vec<Decoy>,
    /// Meters per model unit of the food mesh.
    pub true_scale: f64,
    pub square_size_real_m: f64,
    #[serde(default = "default_rows")]
    pub grid_rows: usize,
    #[serde(default = "default_cols")]
    pub grid_cols: usize,
    #[serde(default)]
    pub corner_noise_sigma: f64,
    /// Frame of the food mesh relative to the ground truth, in meters.
    #[serde(default)]
    pub pose: RigidTransform,
    #[serde(default)]
    pub volume_unit: VolumeUnit,
    #[serde(default)]
    pub seed: u64,
}

fn default_rows() -> usize {
    7
}

fn default_cols() -> usize {
    10
}

/// Write the food mesh, corners and ground-truth mesh of a fixture scene
/// into `dir`, plus `<scene_id>.scene.json`. Returns the manifest with
/// resolved paths.
pub fn write_scene_fixture(spec: &SceneFixtureSpec, dir: &Path) -> Result<SceneManifest> {
    if !(spec.true_scale > 0.0 && spec.true_scale.is_finite()) {
        return Err(Error::NonPositiveScale(spec.true_scale));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let gt = spec.shape.build_mesh()?;
    let with_decoys = make_multi_component(&spec.shape, &spec.decoys)?.mesh;
    let mut food = with_decoys;
    for v in &mut food.vertices {
        *v = spec.pose.apply(v) / spec.true_scale;
    }

    // board placed beside the food; its position does not matter
    let grid = make_corner_grid(&CornerGridSpec {
        rows: spec.grid_rows,
        cols: spec.grid_cols,
        spacing: spec.square_size_real_m / spec.true_scale,
        square_size_real_m: spec.square_size_real_m,
        pose: RigidTransform::from_axis_angle(
            Vector3::new(1.0, 0.3, 0.0),
            0.4,
            Vector3::new(0.0, 0.0, -2.0 / spec.true_scale),
        ),
        noise_sigma: spec.corner_noise_sigma,
        seed: spec.seed,
    })?;

    let id = &spec.scene_id;
    let food_name = format!("{id}_food.obj");
    let corners_name = format!("{id}_corners.json");
    let gt_name = format!("{id}_gt.ply");
    save_mesh(&food, &dir.join(&food_name), MeshFormat::Obj)?;
    grid.save(&dir.join(&corners_name))?;
    save_mesh(&gt, &dir.join(&gt_name), MeshFormat::PlyAscii)?;

    let gt_volume = volume_divergence(&gt).volume * spec.volume_unit.per_cubic_meter();
    let manifest = SceneManifest {
        scene_id: id.clone(),
        food_label: spec.label.clone(),
        food_mesh_path: PathBuf::from(food_name),
        reference_corners_path: PathBuf::from(corners_name),
        ground_truth_mesh_path: Some(PathBuf::from(gt_name)),
        ground_truth_volume: Some(TaggedVolume {
            value: gt_volume,
            unit: spec.volume_unit,
        }),
        delta: DEFAULT_DELTA,
    };
    let manifest_path = dir.join(format!("{id}{SCENE_MANIFEST_SUFFIX}"));
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json("manifest", e))?;
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;

    let mut resolved = manifest;
    resolved.resolve_against(dir);
    Ok(resolved)
}

const FOOD_LABELS: [&str; 5] = ["Strawberry", "Cake", "Burger", "Banana", "Salmon"];

/// A reproducible mix of `count` fixture scenes: boxes, spheres and tori at
/// decimeter scale with realistic scale factors, small decoy pieces, small
/// frame offsets and (for every other scene) noisy corners.
pub fn fixture_batch_specs(count: usize, seed: u64) -> Vec<SceneFixtureSpec> {
    (0..count)
        .map(|i| {
            let k = i as f64;
            let t = seed as f64 * 0.01 + k;
            let shape = match i % 3 {
                0 => FixtureSpec::Box {
                    a: 0.06 + 0.002 * k,
                    b: 0.04 + 0.001 * k,
                    c: 0.03,
                },
                1 => FixtureSpec::Icosphere {
                    radius: 0.025 + 0.001 * k,
                    subdivisions: 3,
                },
                _ => FixtureSpec::Torus {
                    major_radius: 0.04,
                    minor_radius: 0.012 + 0.0005 * k,
                    major_segments: 48,
                    minor_segments: 24,
                },
            };
            let decoys = vec![Decoy {
                spec: FixtureSpec::Icosphere {
                    radius: 1.0,
                    subdivisions: 1,
                },
                relative_diameter: 0.01 + 0.003 * (i % 10) as f64,
                offset: [0.15, 0.02 * (t.sin()), 0.0],
            }];
            SceneFixtureSpec {
                scene_id: format!("scene{:02}", i + 1),
                label: FOOD_LABELS[i % FOOD_LABELS.len()].to_string(),
                shape,
                decoys,
                true_scale: 0.09 + 0.003 * k,
                square_size_real_m: 0.012,
                grid_rows: 7,
                grid_cols: 10,
                corner_noise_sigma: if i % 2 == 1 {
                    0.01 * 0.012 / (0.09 + 0.003 * k)
                } else {
                    0.0
                },
                pose: RigidTransform::from_axis_angle(
                    Vector3::new(t.cos(), t.sin(), 1.0),
                    0.05 + 0.01 * (i % 4) as f64,
                    Vector3::new(0.01 * k, -0.02, 0.005 * k),
                ),
                volume_unit: VolumeUnit::Ml,
                seed: seed.wrapping_add(i as u64),
            }
        })
        .collect()
}

/// Write a fixture batch into `dir` and return its manifests.
pub fn write_fixture_batch(dir: &Path, count: usize, seed: u64) -> Result<Vec<SceneManifest>> {
    fixture_batch_specs(count, seed)
        .iter()
        .map(|s| write_scene_fixture(s, dir))
        .collect()
}
