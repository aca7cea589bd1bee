use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::{io_err, kitti_err, read_text, PipelineError};
use crate::bev::{export_stack, rasterize, BevConfig};
use crate::geometry::{Frame, PointCloud, Vec3};
use crate::kitti_io::{
    parse_calib_file, parse_plane_file, read_velodyne_bin, sample_name, CalibrationSet, GroundPlane, KittiLayout, Part,
    VelodyneScan,
};

#[derive(Debug, Clone, PartialEq)]
pub struct RasterizeReport {
    pub samples: usize,
    pub layers: usize,
    pub seconds: f64,
    pub samples_per_sec: f64,
    pub out_dir: PathBuf,
}

/// Velodyne points with `z` replaced by height above the ground plane.
pub fn bev_points(scan: &VelodyneScan, calib: &CalibrationSet, plane: &GroundPlane) -> PointCloud<f32> {
    let t = &calib.tr_velo_to_cam;
    let r = &calib.r0_rect;
    let points = scan
        .points
        .iter()
        .map(|p| {
            let v = [f64::from(p.x), f64::from(p.y), f64::from(p.z)];
            let cam: [f64; 3] = std::array::from_fn(|i| t[i][0] * v[0] + t[i][1] * v[1] + t[i][2] * v[2] + t[i][3]);
            let rect = Vec3::from_array(std::array::from_fn(|i| {
                r[i][0] * cam[0] + r[i][1] * cam[1] + r[i][2] * cam[2]
            }));
            Vec3::new(p.x, p.y, plane.height_of(rect) as f32)
        })
        .collect();
    PointCloud::new(Frame::Velodyne, points)
}

fn rasterize_one(
    layout: &KittiLayout,
    index: usize,
    cfg: &BevConfig<f32>,
    hash: u64,
    out: &Path,
) -> Result<(), PipelineError> {
    let require = |part: Part| {
        let path = layout.path(part, index);
        if path.is_file() {
            Ok(path)
        } else {
            Err(PipelineError::MissingSample { index, path })
        }
    };
    let velo = require(Part::Velodyne)?;
    let bytes = std::fs::read(&velo).map_err(io_err(&velo))?;
    let scan = read_velodyne_bin(&bytes).map_err(kitti_err(&velo))?;
    let calib_path = require(Part::Calib)?;
    let calib = parse_calib_file(&read_text(&calib_path)?).map_err(kitti_err(&calib_path))?;
    let plane_path = require(Part::Plane)?;
    let plane = parse_plane_file(&read_text(&plane_path)?).map_err(kitti_err(&plane_path))?;
    let stack = rasterize(&bev_points(&scan, &calib, &plane), cfg)?;
    export_stack(&stack, hash, out, &sample_name(index))?;
    Ok(())
}

/// Rasterizes each sample's scan into `out_dir/NNNNNN.{bin,txt}`. Without a
/// range every sample with a velodyne file is processed.
pub fn cmd_rasterize(
    dataset: &Path,
    cfg: &BevConfig<f32>,
    range: Option<Range<usize>>,
    out_dir: &Path,
) -> Result<RasterizeReport, PipelineError> {
    cfg.validate()?;
    let start = Instant::now();
    let layout = KittiLayout::new(dataset);
    let indices: Vec<usize> = match range {
        Some(r) => r.collect(),
        None => layout
            .indices(Part::Velodyne)
            .map_err(io_err(&layout.dir(Part::Velodyne)))?,
    };
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let hash = cfg.config_hash();
    let results: Vec<Result<(), PipelineError>> = indices
        .par_iter()
        .map(|&i| rasterize_one(&layout, i, cfg, hash, out_dir).map_err(|e| e.in_sample(i)))
        .collect();
    results.into_iter().collect::<Result<Vec<()>, _>>()?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(RasterizeReport {
        samples: indices.len(),
        layers: cfg.layer_count(),
        seconds,
        samples_per_sec: indices.len() as f64 / seconds.max(1e-9),
        out_dir: out_dir.to_path_buf(),
    })
}
