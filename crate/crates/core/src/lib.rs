//! Synthetic driving-dataset toolkit.
//!
//! The crate covers the full data path from a simulated scene to a KITTI-layout
//! dataset and its Bird's-Eye-View (BEV) feature maps:
//!
//! * [`geometry`]: frames, rigid transforms, pinhole projection, attitude correction.
//! * [`kitti_io`]: label, calibration, velodyne and ground-plane readers/writers.
//! * [`occlusion`]: depth-map vertex visibility heuristic.
//! * [`bev`]: configurable slice/cloud feature-map rasterizer.
//! * [`scene_synth`]: box-world scene generator, raycast LIDAR, depth rendering, ground truth.
//! * [`pipeline`]: dataset generation, statistics, validation and the CLI commands.
//!
//! Geometry, occlusion and BEV code is generic over [`Real`] (`f32` or `f64`);
//! the aliases below name the common instantiations.

// Validation uses `!(a < b)` so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bev;
pub mod geometry;
pub mod kitti_io;
pub mod occlusion;
pub mod pipeline;
pub mod scalar;
pub mod scene_synth;

pub use scalar::Real;

pub type Vec3f = geometry::Vec3<f32>;
pub type Vec3d = geometry::Vec3<f64>;
pub type Mat3d = geometry::Mat3<f64>;
pub type RigidTransformd = geometry::RigidTransform<f64>;
pub type CameraModeld = geometry::CameraModel<f64>;
pub type Attituded = geometry::Attitude<f64>;
pub type PointCloudf = geometry::PointCloud<f32>;
pub type PointCloudd = geometry::PointCloud<f64>;
pub type DepthMapf = occlusion::DepthMap<f32>;
pub type DepthMapd = occlusion::DepthMap<f64>;
pub type BevConfigf = bev::BevConfig<f32>;
pub type BevStackf = bev::BevStack<f32>;
