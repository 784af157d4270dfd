use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    InvalidIndex {
        face: usize,
        index: i64,
        vertex_count: usize,
    },

    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteCoordinate { vertex: usize },

    #[error("face {face} repeats a vertex index: {indices:?}")]
    DegenerateFace { face: usize, indices: [usize; 3] },

    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),

    #[error("unknown component id {id} (mesh has {count} components)")]
    UnknownComponent { id: usize, count: usize },

    #[error("scale must be positive and finite, got {0}")]
    NonPositiveScale(f64),

    #[error("invalid corner grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate corner grid: {0}")]
    DegenerateGrid(String),

    #[error("need at least 3 point pairs, got {0}")]
    InsufficientPoints(usize),

    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("mesh has no face with positive area")]
    ZeroAreaMesh,

    #[error("true volume must be positive, got {0}")]
    NonPositiveTrueVolume(f64),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension must be positive and finite: {0}")]
    NonPositiveDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fixture components overlap: {0}")]
    OverlapDetected(String),

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("scene {scene_id}, stage {stage}: {source}")]
    Stage {
        scene_id: String,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
