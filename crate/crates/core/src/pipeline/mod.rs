//! Dataset generation and the commands behind the `cadet` CLI.
//!
//! A dataset is a KITTI object layout (`label_2/`, `calib/`, `velodyne/`,
//! `planes/`, `image_2/`) plus `manifest.txt`, `generate.toml` and the
//! `train.txt`/`val.txt` split lists.

mod generate;
mod project;
mod rasterize;
mod stats;
mod validate;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bev::BevError;
use crate::kitti_io::KittiError;
use crate::scene_synth::SceneError;

pub use generate::{
    generate_dataset, read_manifest, synthesize_sample, write_sample, GenerateConfig, GenerateSummary, Manifest,
    ManifestRow, Mixture, Sample, SampleTruth, CONFIG_FILE, DEBUG_DIR, MANIFEST_FILE,
};
pub use project::{cmd_project, depth_color, project_overlay, COLORMAP_FAR, COLORMAP_NEAR};
pub use rasterize::{bev_points, cmd_rasterize, RasterizeReport};
pub use stats::{
    cmd_stats, compute_stats, orientation_bin, stats_csv, write_stats_csv, BboxSummary, ClassStats, DatasetStats,
    ORIENTATION_BINS,
};
pub use validate::{cmd_validate, ValidationReport, Violation};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Kitti {
        path: PathBuf,
        #[source]
        source: KittiError,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<PipelineError>,
    },
    #[error("sample {index} missing: {} not found", path.display())]
    MissingSample { index: usize, path: PathBuf },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Bev(#[from] BevError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl PipelineError {
    /// Process exit status: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. } => 2,
            PipelineError::Image {
                source: image::ImageError::IoError(_),
                ..
            } => 2,
            PipelineError::Bev(BevError::Io(_)) => 2,
            PipelineError::Sample { source, .. } => source.exit_code(),
            _ => 1,
        }
    }

    pub(crate) fn in_sample(self, index: usize) -> Self {
        match self {
            e @ (PipelineError::Sample { .. } | PipelineError::MissingSample { .. }) => e,
            e => PipelineError::Sample {
                index,
                source: Box::new(e),
            },
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn kitti_err(path: &Path) -> impl FnOnce(KittiError) -> PipelineError + '_ {
    move |source| PipelineError::Kitti {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

pub(crate) fn write_bytes(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

pub(crate) fn load_png(path: &Path) -> Result<image::RgbImage, PipelineError> {
    let img = image::open(path).map_err(|source| PipelineError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(img.to_rgb8())
}

pub(crate) fn save_png(img: &image::RgbImage, path: &Path) -> Result<(), PipelineError> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| PipelineError::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// 64-bit FNV-1a of `bytes`, printed as 16 hex digits in manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    crate::bev::fnv1a64(bytes)
}

/// Hash of the canonical TOML serialization of a config value.
pub fn config_hash<T: serde::Serialize>(value: &T) -> u64 {
    fnv1a64(toml::to_string(value).expect("config serializes").as_bytes())
}
