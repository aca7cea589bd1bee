//! Bird's-eye-view rasterization of point clouds into fixed-size feature maps.
//!
//! The grid covers `x_range` by `y_range` in square cells; rows run along x
//! and columns along y. Heights are split into `num_slices` equal slices of
//! `z_range`. A config names which features to compute per slice and which
//! to compute over the whole column.

mod config;
mod export;
mod raster;

use std::hash::Hasher;

pub use config::{density_value, preset, BevConfig, BevFeature, BevPreset, LayerGroup, LayerMeta};
pub use export::{decode_stack, encode_header, encode_payload, export_stack, import_stack, layer_image};
pub use raster::{cell_of, rasterize, BevStack};

#[derive(Debug, thiserror::Error)]
pub enum BevError {
    #[error("config produces no layers")]
    EmptyConfig,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("malformed stack: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = fnv::FnvHasher::default();
    h.write(bytes);
    h.finish()
}
