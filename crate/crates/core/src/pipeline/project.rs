use std::path::Path;

use image::{Rgb, RgbImage};

use super::{kitti_err, load_png, read_text, save_png, PipelineError};
use crate::kitti_io::{parse_calib_file, read_velodyne_bin, CalibrationSet, KittiLayout, Part, VelodyneScan};

/// Depth (m) drawn pure red; nearer points saturate.
pub const COLORMAP_NEAR: f64 = 2.0;
/// Depth (m) drawn pure blue; farther points saturate.
pub const COLORMAP_FAR: f64 = 80.0;

/// Red at [`COLORMAP_NEAR`] to blue at [`COLORMAP_FAR`], linear in `1 / depth`.
pub fn depth_color(depth: f64) -> Rgb<u8> {
    let inv = |d: f64| 1.0 / d;
    let t = ((inv(depth) - inv(COLORMAP_FAR)) / (inv(COLORMAP_NEAR) - inv(COLORMAP_FAR))).clamp(0.0, 1.0);
    Rgb([(255.0 * t).round() as u8, 0, (255.0 * (1.0 - t)).round() as u8])
}

/// Draws every projectable in-image point as one pixel, far points first.
pub fn project_overlay(image: &RgbImage, scan: &VelodyneScan, calib: &CalibrationSet) -> RgbImage {
    let mut out = image.clone();
    let (w, h) = (f64::from(image.width()), f64::from(image.height()));
    let mut drawn: Vec<(u32, u32, f64)> = scan
        .points
        .iter()
        .filter_map(|p| calib.project_velodyne([f64::from(p.x), f64::from(p.y), f64::from(p.z)]))
        .filter(|(u, v, _)| *u >= 0.0 && *v >= 0.0 && *u < w && *v < h)
        .map(|(u, v, d)| (u as u32, v as u32, d))
        .collect();
    drawn.sort_by(|a, b| b.2.total_cmp(&a.2));
    for (u, v, d) in drawn {
        out.put_pixel(u, v, depth_color(d));
    }
    out
}

/// Writes the LIDAR-on-image overlay for one sample.
pub fn cmd_project(dataset: &Path, index: usize, out: &Path) -> Result<(), PipelineError> {
    let layout = KittiLayout::new(dataset);
    let require = |part: Part| {
        let path = layout.path(part, index);
        if path.is_file() {
            Ok(path)
        } else {
            Err(PipelineError::MissingSample { index, path })
        }
    };
    let image = load_png(&require(Part::Image)?)?;
    let velo = require(Part::Velodyne)?;
    let bytes = std::fs::read(&velo).map_err(super::io_err(&velo))?;
    let scan = read_velodyne_bin(&bytes).map_err(kitti_err(&velo))?;
    let calib_path = require(Part::Calib)?;
    let calib = parse_calib_file(&read_text(&calib_path)?).map_err(kitti_err(&calib_path))?;
    save_png(&project_overlay(&image, &scan, &calib), out)
}
