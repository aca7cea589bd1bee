//! Readers and writers for the KITTI object-detection layout.
//!
//! ```text
//! root/
//!   label_2/NNNNNN.txt   15 space-separated fields per object
//!   calib/NNNNNN.txt     P0..P3, R0_rect, Tr_velo_to_cam, Tr_imu_to_velo
//!   velodyne/NNNNNN.bin  packed little-endian f32 (x, y, z, intensity)
//!   planes/NNNNNN.txt    ground plane coefficients
//!   image_2/NNNNNN.png   8-bit RGB
//! ```

mod calib;
mod fmt;
mod label;
mod plane;
mod velodyne;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use calib::{parse_calib_file, write_calib_file, CalibrationSet, Mat34};
pub use label::{
    box_corners, compute_alpha, parse_label_file, write_label_file, write_label_file_with, BBox2d, Dimensions,
    LabelWriteOptions, ObjectLabel, OcclusionField, DONT_CARE, OCCLUSION_LARGELY_OCCLUDED, OCCLUSION_VISIBLE,
};
pub use plane::{parse_plane_file, write_plane_file, GroundPlane};
pub use velodyne::{read_velodyne_bin, write_velodyne_bin, VelodyneScan, VELODYNE_RECORD_BYTES};

#[derive(Debug, Error)]
pub enum KittiError {
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("line {line}: expected 15 or 16 fields, found {fields}")]
    MalformedLine { line: usize, fields: usize },
    #[error("line {line}, field {field}: {value:?} is not numeric")]
    NonNumericField { line: usize, field: usize, value: String },
    #[error("calibration key {0:?} missing")]
    MissingKey(String),
    #[error("calibration matrix {key}: {reason}")]
    MalformedMatrix { key: String, reason: String },
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("velodyne file of {len} bytes is not a whole number of 16-byte points")]
    TruncatedFile { len: usize },
    #[error("scan has {points} points but {intensity} intensities")]
    IntensityMismatch { points: usize, intensity: usize },
    #[error("invalid ground plane: {0}")]
    InvalidPlane(String),
    #[error("location depth {depth} m is behind the camera")]
    BehindCamera { depth: f64 },
}

/// Subdirectories of a KITTI object dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Label,
    Calib,
    Velodyne,
    Plane,
    Image,
}

impl Part {
    pub const ALL: [Part; 5] = [Part::Label, Part::Calib, Part::Velodyne, Part::Plane, Part::Image];

    pub fn dir(self) -> &'static str {
        match self {
            Part::Label => "label_2",
            Part::Calib => "calib",
            Part::Velodyne => "velodyne",
            Part::Plane => "planes",
            Part::Image => "image_2",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Part::Velodyne => "bin",
            Part::Image => "png",
            _ => "txt",
        }
    }
}

pub fn sample_name(index: usize) -> String {
    format!("{index:06}")
}

/// Path helper for a dataset root.
#[derive(Debug, Clone)]
pub struct KittiLayout {
    root: PathBuf,
}

impl KittiLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dir(&self, part: Part) -> PathBuf {
        self.root.join(part.dir())
    }

    pub fn path(&self, part: Part, index: usize) -> PathBuf {
        self.dir(part)
            .join(format!("{}.{}", sample_name(index), part.extension()))
    }

    pub fn create_dirs(&self) -> std::io::Result<()> {
        for part in Part::ALL {
            std::fs::create_dir_all(self.dir(part))?;
        }
        Ok(())
    }

    /// Sorted sample indices present in `part`'s directory. Files whose stem is
    /// not a number or whose extension differs are ignored; a missing directory
    /// yields an empty list.
    pub fn indices(&self, part: Part) -> std::io::Result<Vec<usize>> {
        let dir = self.dir(part);
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some(part.extension()) {
                continue;
            }
            if let Some(idx) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse().ok()) {
                out.push(idx);
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_padded_names() {
        assert_eq!(sample_name(0), "000000");
        assert_eq!(sample_name(4321), "004321");
        let l = KittiLayout::new("/data/kitti");
        assert_eq!(
            l.path(Part::Velodyne, 7),
            PathBuf::from("/data/kitti/velodyne/000007.bin")
        );
        assert_eq!(l.path(Part::Image, 12), PathBuf::from("/data/kitti/image_2/000012.png"));
    }

    #[test]
    fn indices_skip_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let l = KittiLayout::new(dir.path());
        l.create_dirs().unwrap();
        for name in ["000003.txt", "000001.txt", "notes.txt", "000002.bin"] {
            std::fs::write(l.dir(Part::Label).join(name), "").unwrap();
        }
        assert_eq!(l.indices(Part::Label).unwrap(), vec![1, 3]);
        assert!(KittiLayout::new(dir.path().join("missing"))
            .indices(Part::Calib)
            .unwrap()
            .is_empty());
    }
}
