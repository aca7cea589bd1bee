//! Coordinate frames, rigid transforms and pinhole projection.
//!
//! Frame conventions:
//!
//! * `SimWorld` / `SimVehicle`: left-handed, x forward, y right, z up (meters).
//! * `Velodyne`: right-handed, x forward, y left, z up (meters).
//! * `CameraRect`: right-handed, x right, y down, z forward (meters).
//! * `Image`: pixels, origin top-left, u right, v down.

mod camera;
mod transform;
mod vector;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use camera::{project, unproject, CameraModel, Projection, MIN_PROJECTABLE_DEPTH};
pub use transform::{compose, RigidTransform};
pub use vector::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    SimWorld,
    SimVehicle,
    Velodyne,
    CameraRect,
    Image,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point at depth {depth} m is behind the camera")]
    BehindCamera { depth: f64 },
    #[error("frame mismatch: expected {expected:?}, found {found:?}")]
    FrameMismatch { expected: Frame, found: Frame },
    #[error("matrix is not a proper rotation (orthonormality error {orthonormality_error:e}, det {determinant})")]
    NotARotation {
        orthonormality_error: f64,
        determinant: f64,
    },
    #[error("invalid camera intrinsics: {0}")]
    InvalidCamera(String),
    #[error("attitude angle {0} rad outside [-pi, pi]")]
    AngleOutOfRange(f64),
}

/// Ordered 3D points tagged with their frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PointCloud<T: Real> {
    pub frame: Frame,
    pub points: Vec<Vec3<T>>,
    pub intensity: Option<Vec<T>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(frame: Frame, points: Vec<Vec3<T>>) -> Self {
        Self {
            frame,
            points,
            intensity: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Vehicle attitude in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Attitude<T: Real> {
    pub pitch: T,
    pub roll: T,
    pub yaw: T,
}

impl<T: Real> Attitude<T> {
    pub fn new(pitch: T, roll: T, yaw: T) -> Result<Self, GeometryError> {
        for a in [pitch, roll, yaw] {
            if !(a.abs() <= T::PI()) {
                return Err(GeometryError::AngleOutOfRange(a.to_f64_lossy()));
            }
        }
        Ok(Self { pitch, roll, yaw })
    }

    /// `R = R_roll * R_pitch`; yaw is deliberately absent.
    ///
    /// Positive pitch raises the nose (+x tilts toward +z); positive roll
    /// raises the +y side.
    pub fn leveling_rotation(&self) -> Mat3<T> {
        let pitch = Mat3::rot_y(-self.pitch);
        let roll = Mat3::rot_x(self.roll);
        roll.mul_mat(&pitch)
    }
}

/// Left-handed simulator axes to right-handed Velodyne axes.
#[inline]
pub fn sim_to_velodyne<T: Real>(p: Vec3<T>) -> Vec3<T> {
    Vec3::new(p.x, -p.y, p.z)
}

/// Pure axis permutation from Velodyne axes to camera axes: `(x, y, z) -> (-y, -z, x)`.
#[inline]
pub fn velodyne_axes_to_camera<T: Real>(p: Vec3<T>) -> Vec3<T> {
    Vec3::new(-p.y, -p.z, p.x)
}

/// The permutation above expressed as a proper rotation.
pub fn velodyne_to_camera_rotation<T: Real>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    Mat3::from_rows([[z, -o, z], [z, z, -o], [o, z, z]])
}

/// Full `Tr_velo_to_cam`: axis permutation followed by the rig's mounting
/// transform (CameraRect to CameraRect).
pub fn velodyne_to_camera_transform<T: Real>(mounting: &RigidTransform<T>) -> Result<RigidTransform<T>, GeometryError> {
    let axes = RigidTransform::new(
        velodyne_to_camera_rotation(),
        Vec3::zeros(),
        Frame::Velodyne,
        Frame::CameraRect,
    )?;
    compose(mounting, &axes)
}

/// Maps a Velodyne point into the rectified camera frame through the rig mounting.
pub fn velodyne_to_camera<T: Real>(p: Vec3<T>, mounting: &RigidTransform<T>) -> Vec3<T> {
    mounting.apply(velodyne_axes_to_camera(p))
}

/// Expresses a vehicle-frame cloud in the gravity-aligned vehicle frame.
pub fn correct_attitude<T: Real>(cloud: &PointCloud<T>, att: &Attitude<T>) -> PointCloud<T> {
    rotate_cloud(cloud, &att.leveling_rotation())
}

/// Inverse of [`correct_attitude`].
pub fn restore_attitude<T: Real>(cloud: &PointCloud<T>, att: &Attitude<T>) -> PointCloud<T> {
    rotate_cloud(cloud, &att.leveling_rotation().transpose())
}

fn rotate_cloud<T: Real>(cloud: &PointCloud<T>, r: &Mat3<T>) -> PointCloud<T> {
    PointCloud {
        frame: cloud.frame,
        points: cloud.points.iter().map(|p| r.mul_vec(*p)).collect(),
        intensity: cloud.intensity.clone(),
    }
}
