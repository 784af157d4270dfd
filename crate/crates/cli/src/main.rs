use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use foodvol::fixtures::{Fixture, FixtureSpec};
use foodvol::harness::{
    aggregate, load_manifests, run_batch, write_fixture_batch, write_report, write_scene_fixture, Baseline,
    Report, ReportFormat, RunOptions, SceneFixtureSpec,
};
use foodvol::io::{load_mesh, save_mesh, MeshFormat};
use foodvol::metrics::{ChamferConvention, DEFAULT_SAMPLE_COUNT};
use foodvol::registration::IcpParams;
use foodvol::scale::{estimate_scale, CornerGrid};
use foodvol::topology::{
    connected_components, remove_isolated_pieces_with, DiameterReference, DEFAULT_DELTA,
};
use foodvol::volume::{volume, VolumeMethod};
use serde_json::json;
use tracing_subscriber::filter::LevelFilter;

#[derive(Parser)]
#[command(
    name = "foodvol",
    version,
    about = "Metric food volume from reconstructed meshes"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every scene of a manifest and write a report.
    Eval {
        /// A directory of *.scene.json files or a single manifest file.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Overrides the per-scene cleaning threshold.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Another method's JSON report to compare against, as name=path.
        #[arg(long = "baseline", value_name = "NAME=REPORT")]
        baselines: Vec<String>,
        #[arg(long, value_enum, default_value_t = Chamfer::Mean)]
        chamfer: Chamfer,
        #[arg(long, value_enum, default_value_t = Reference::Largest)]
        diameter_reference: Reference,
        #[arg(long, default_value_t = IcpParams::default().max_iterations)]
        icp_max_iterations: usize,
    },
    /// Generate a synthetic mesh, corner grid or scene set.
    Fixture {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the enclosed volume of a mesh in its own units.
    Volume {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Divergence)]
        method: Method,
    },
    /// Drop small disconnected pieces from a mesh.
    Clean {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Reference::Largest)]
        diameter_reference: Reference,
    },
    /// Estimate meters per model unit from checkerboard corners.
    Scale {
        #[arg(long)]
        corners: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Divergence,
    PerFaceAbs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Chamfer {
    Mean,
    MeanSquared,
    Sum,
    SumSquared,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reference {
    /// Largest component's diameter.
    Largest,
    /// Diameter of the whole input mesh.
    WholeMesh,
}

impl From<Reference> for DiameterReference {
    fn from(r: Reference) -> Self {
        match r {
            Reference::Largest => DiameterReference::LargestComponent,
            Reference::WholeMesh => DiameterReference::WholeMesh,
        }
    }
}

impl From<Chamfer> for ChamferConvention {
    fn from(c: Chamfer) -> Self {
        match c {
            Chamfer::Mean => ChamferConvention::Mean,
            Chamfer::MeanSquared => ChamferConvention::MeanSquared,
            Chamfer::Sum => ChamferConvention::Sum,
            Chamfer::SumSquared => ChamferConvention::SumSquared,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::WARN,
        1 => LevelFilter::INFO,
        _ => LevelFilter::DEBUG,
    };
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Eval {
            manifest,
            out,
            format,
            delta,
            samples,
            seed,
            baselines,
            chamfer,
            diameter_reference,
            icp_max_iterations,
        } => {
            let opts = RunOptions {
                samples,
                seed,
                icp: IcpParams {
                    max_iterations: icp_max_iterations,
                    ..IcpParams::default()
                },
                delta_override: delta,
                chamfer: chamfer.into(),
                diameter_reference: diameter_reference.into(),
            };
            eval(&manifest, &out, format, &baselines, &opts)
        }
        Command::Fixture { spec, out } => fixture(&spec, &out),
        Command::Volume { mesh, method } => {
            let m = load_mesh(&mesh, MeshFormat::Auto).context("stage load_mesh")?;
            let method = match method {
                Method::Divergence => VolumeMethod::Divergence,
                Method::PerFaceAbs => VolumeMethod::PerFaceAbs,
            };
            let r = volume(&m, method);
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(())
        }
        Command::Clean {
            mesh,
            delta,
            out,
            diameter_reference,
        } => {
            if !(0.0..1.0).contains(&delta) {
                bail!("stage clean: delta must be in [0, 1), got {delta}");
            }
            let m = load_mesh(&mesh, MeshFormat::Auto).context("stage load_mesh")?;
            let cleaned = remove_isolated_pieces_with(&m, delta, diameter_reference.into());
            save_mesh(&cleaned, &out, MeshFormat::Auto).context("stage save_mesh")?;
            println!(
                "{}",
                json!({
                    "components_before": connected_components(&m).component_count,
                    "components_after": connected_components(&cleaned).component_count,
                    "faces_before": m.face_count(),
                    "faces_after": cleaned.face_count(),
                })
            );
            Ok(())
        }
        Command::Scale { corners } => {
            let grid = CornerGrid::load(&corners).context("stage load_corners")?;
            let est = estimate_scale(&grid).context("stage scale")?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "s": est.s,
                    "median_distance": est.median_distance,
                    "distance_count": est.distance_count,
                }))?
            );
            Ok(())
        }
    }
}

fn parse_baseline(arg: &str) -> Result<Baseline> {
    let (name, path) = arg
        .split_once('=')
        .with_context(|| format!("baseline must look like name=report.json, got {arg:?}"))?;
    let report = Report::load(Path::new(path)).with_context(|| format!("stage load_baseline {name}"))?;
    Ok(Baseline::from_report(name, &report))
}

fn eval(manifest: &Path, out: &Path, format: Format, baselines: &[String], opts: &RunOptions) -> Result<()> {
    let baselines = baselines
        .iter()
        .map(|b| parse_baseline(b))
        .collect::<Result<Vec<_>>>()?;
    let manifests = load_manifests(manifest).context("stage load_manifests")?;
    let records = run_batch(&manifests, opts)?;
    let report = aggregate(&records, &baselines).context("stage aggregate")?;
    let format = match format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    write_report(&report, out, format).context("stage write_report")?;
    match report.mean_row.ape_percent {
        Some(mape) => eprintln!("{} scenes, MAPE {mape:.2}%", records.len()),
        None => eprintln!("{} scenes", records.len()),
    }
    Ok(())
}

/// `spec` holds a single fixture (tagged by `kind`), a scene fixture
/// (with `scene_id`) or `{"batch": {"count": n, "seed": s}}`.
fn fixture(spec: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(spec).with_context(|| format!("stage read_spec: {}", spec.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).context("stage parse_spec")?;
    fs::create_dir_all(out).with_context(|| format!("stage write_fixture: {}", out.display()))?;

    if let Some(batch) = value.get("batch") {
        let count = batch
            .get("count")
            .and_then(|v| v.as_u64())
            .context("stage parse_spec: batch.count")?;
        let seed = batch.get("seed").and_then(|v| v.as_u64()).unwrap_or(0);
        let manifests = write_fixture_batch(out, count as usize, seed).context("stage write_fixture")?;
        eprintln!("wrote {} scenes to {}", manifests.len(), out.display());
        return Ok(());
    }
    if value.get("scene_id").is_some() {
        let scene: SceneFixtureSpec = serde_json::from_value(value).context("stage parse_spec")?;
        write_scene_fixture(&scene, out).context("stage write_fixture")?;
        eprintln!("wrote scene {} to {}", scene.scene_id, out.display());
        return Ok(());
    }

    let spec: FixtureSpec = serde_json::from_value(value).context("stage parse_spec")?;
    match spec.build().context("stage build_fixture")? {
        Fixture::Mesh(mesh) => save_mesh(&mesh, &out.join("mesh.obj"), MeshFormat::Obj),
        Fixture::Grid(grid) => grid.save(&out.join("corners.json")),
    }
    .context("stage write_fixture")?;
    let truth = serde_json::to_string_pretty(&spec.analytic_truth())?;
    fs::write(out.join("truth.json"), truth).context("stage write_fixture")?;
    Ok(())
}
