use serde::{Deserialize, Serialize};

use super::{Frame, GeometryError, Mat3, Vec3};
use crate::scalar::Real;

/// Tolerance used for orthonormality and determinant checks.
pub(crate) fn rotation_tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(100.0))
}

/// Proper rigid transform `p -> R p + t` mapping points from `from_frame` to `to_frame`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RigidTransform<T: Real> {
    rotation: Mat3<T>,
    translation: Vec3<T>,
    from_frame: Frame,
    to_frame: Frame,
}

impl<T: Real> RigidTransform<T> {
    pub fn new(
        rotation: Mat3<T>,
        translation: Vec3<T>,
        from_frame: Frame,
        to_frame: Frame,
    ) -> Result<Self, GeometryError> {
        let tol = rotation_tolerance::<T>();
        let ortho = rotation.orthonormality_error();
        let det = rotation.det();
        if !(ortho <= tol) || !((det - T::one()).abs() <= tol) {
            return Err(GeometryError::NotARotation {
                orthonormality_error: ortho.to_f64_lossy(),
                determinant: det.to_f64_lossy(),
            });
        }
        Ok(Self {
            rotation,
            translation,
            from_frame,
            to_frame,
        })
    }

    pub fn identity(from_frame: Frame, to_frame: Frame) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
            from_frame,
            to_frame,
        }
    }

    pub fn from_translation(t: Vec3<T>, from_frame: Frame, to_frame: Frame) -> Self {
        Self {
            translation: t,
            ..Self::identity(from_frame, to_frame)
        }
    }

    pub fn rotation(&self) -> &Mat3<T> {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3<T> {
        self.translation
    }

    pub fn from_frame(&self) -> Frame {
        self.from_frame
    }

    pub fn to_frame(&self) -> Frame {
        self.to_frame
    }

    #[inline]
    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    /// Rotates a direction; translation is ignored.
    #[inline]
    pub fn apply_vector(&self, v: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(v)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -rt.mul_vec(self.translation),
            from_frame: self.to_frame,
            to_frame: self.from_frame,
        }
    }

    /// KITTI-style 3x4 `[R | t]` block.
    pub fn to_matrix_3x4(&self) -> [[T; 4]; 3] {
        let r = &self.rotation.rows;
        let t = self.translation;
        [
            [r[0][0], r[0][1], r[0][2], t.x],
            [r[1][0], r[1][1], r[1][2], t.y],
            [r[2][0], r[2][1], r[2][2], t.z],
        ]
    }

    pub fn from_matrix_3x4(m: &[[T; 4]; 3], from_frame: Frame, to_frame: Frame) -> Result<Self, GeometryError> {
        let rotation = Mat3::from_rows(m.map(|row| [row[0], row[1], row[2]]));
        let translation = Vec3::new(m[0][3], m[1][3], m[2][3]);
        Self::new(rotation, translation, from_frame, to_frame)
    }
}

/// `compose(a, b)` applies `b` first, then `a`.
pub fn compose<T: Real>(a: &RigidTransform<T>, b: &RigidTransform<T>) -> Result<RigidTransform<T>, GeometryError> {
    if a.from_frame != b.to_frame {
        return Err(GeometryError::FrameMismatch {
            expected: a.from_frame,
            found: b.to_frame,
        });
    }
    Ok(RigidTransform {
        rotation: a.rotation.mul_mat(&b.rotation),
        translation: a.rotation.mul_vec(b.translation) + a.translation,
        from_frame: b.from_frame,
        to_frame: a.to_frame,
    })
}
