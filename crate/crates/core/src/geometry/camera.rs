use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec3};
use crate::scalar::Real;

/// Depths at or below this value cannot be projected.
pub const MIN_PROJECTABLE_DEPTH: f64 = 1e-6;

/// Zero-distortion pinhole camera in the rectified camera frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CameraModel<T: Real> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: u32,
    pub height: u32,
    /// 3x4 projection matrix (the KITTI `P2` role).
    pub projection: [[T; 4]; 3],
}

impl<T: Real> CameraModel<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, width: u32, height: u32) -> Result<Self, GeometryError> {
        let (o, z) = (T::one(), T::zero());
        let cam = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            projection: [[fx, z, cx, z], [z, fy, cy, z], [z, z, o, z]],
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Image-centred camera with equal focal lengths.
    pub fn centered(focal: T, width: u32, height: u32) -> Result<Self, GeometryError> {
        let half = T::lit(0.5);
        Self::new(
            focal,
            focal,
            T::of_usize(width as usize) * half,
            T::of_usize(height as usize) * half,
            width,
            height,
        )
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let w = T::of_usize(self.width as usize);
        let h = T::of_usize(self.height as usize);
        let ok = self.fx > T::zero()
            && self.fy > T::zero()
            && self.cx >= T::zero()
            && self.cx < w
            && self.cy >= T::zero()
            && self.cy < h;
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidCamera(format!(
                "fx={} fy={} cx={} cy={} size={}x{}",
                self.fx, self.fy, self.cx, self.cy, self.width, self.height
            )))
        }
    }

    pub fn contains(&self, u: T, v: T) -> bool {
        u >= T::zero()
            && v >= T::zero()
            && u < T::of_usize(self.width as usize)
            && v < T::of_usize(self.height as usize)
    }
}

/// Pixel coordinates plus z-depth of a projected point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Projection<T: Real> {
    pub u: T,
    pub v: T,
    pub depth: T,
}

/// Pinhole projection of a rectified-camera point. The result may fall outside the image.
pub fn project<T: Real>(p: Vec3<T>, cam: &CameraModel<T>) -> Result<Projection<T>, GeometryError> {
    if !(p.z > T::lit(MIN_PROJECTABLE_DEPTH)) {
        return Err(GeometryError::BehindCamera {
            depth: p.z.to_f64_lossy(),
        });
    }
    Ok(Projection {
        u: cam.fx * p.x / p.z + cam.cx,
        v: cam.fy * p.y / p.z + cam.cy,
        depth: p.z,
    })
}

pub fn unproject<T: Real>(proj: Projection<T>, cam: &CameraModel<T>) -> Vec3<T> {
    let z = proj.depth;
    Vec3::new((proj.u - cam.cx) * z / cam.fx, (proj.v - cam.cy) * z / cam.fy, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kitti_like() -> CameraModel<f64> {
        CameraModel::new(700.0, 700.0, 620.0, 187.0, 1242, 375).unwrap()
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let p = project(Vec3::new(0.0, 0.0, 10.0), &kitti_like()).unwrap();
        assert_eq!((p.u, p.v, p.depth), (620.0, 187.0, 10.0));
    }

    #[test]
    fn lateral_offset_moves_u() {
        let p = project(Vec3::new(1.0, 0.0, 10.0), &kitti_like()).unwrap();
        assert_eq!((p.u, p.v, p.depth), (690.0, 187.0, 10.0));
    }

    #[test]
    fn behind_camera_is_rejected() {
        let cam = kitti_like();
        assert!(matches!(
            project(Vec3::new(0.0, 0.0, -1.0), &cam),
            Err(GeometryError::BehindCamera { .. })
        ));
        assert!(project(Vec3::new(0.0, 0.0, 1e-6), &cam).is_err());
        assert!(project(Vec3::new(0.0, 0.0, 2e-6), &cam).is_ok());
    }

    #[test]
    fn invalid_intrinsics_are_rejected() {
        assert!(CameraModel::new(-1.0, 700.0, 620.0, 187.0, 1242, 375).is_err());
        assert!(CameraModel::new(700.0, 700.0, 1242.0, 187.0, 1242, 375).is_err());
        assert!(CameraModel::new(700.0, 700.0, 620.0, -0.5, 1242, 375).is_err());
    }

    #[test]
    fn projection_matrix_has_unit_depth_row() {
        let cam = kitti_like();
        assert_eq!(cam.projection[2], [0.0, 0.0, 1.0, 0.0]);
    }
}
