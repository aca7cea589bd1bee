use super::fmt::sci;
use super::KittiError;
use crate::geometry::Vec3;

const PLANE_PRECISION: usize = 12;

/// Ground plane `n . x + d = 0` in the rectified camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPlane {
    pub normal: Vec3<f64>,
    pub d: f64,
}

impl GroundPlane {
    pub fn new(normal: Vec3<f64>, d: f64) -> Result<Self, KittiError> {
        let gp = Self { normal, d };
        gp.validate()?;
        Ok(gp)
    }

    /// Flat ground `camera_height` meters below the camera.
    pub fn flat(camera_height: f64) -> Self {
        Self {
            normal: Vec3::new(0.0, -1.0, 0.0),
            d: camera_height,
        }
    }

    pub fn validate(&self) -> Result<(), KittiError> {
        let n = self.normal.norm();
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(KittiError::InvalidPlane(format!("normal length {n} is not 1")));
        }
        if !(self.normal.y < 0.0) {
            return Err(KittiError::InvalidPlane(format!(
                "normal y component {} must be negative (up in camera frame)",
                self.normal.y
            )));
        }
        if !self.d.is_finite() {
            return Err(KittiError::InvalidPlane("non-finite offset".into()));
        }
        Ok(())
    }

    /// Signed height above the plane of a camera-frame point.
    pub fn height_of(&self, p: Vec3<f64>) -> f64 {
        self.normal.dot(p) + self.d
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.normal.x, self.normal.y, self.normal.z, self.d]
    }
}

pub fn write_plane_file(gp: &GroundPlane) -> Result<String, KittiError> {
    gp.validate()?;
    let coeffs: Vec<String> = gp.coefficients().iter().map(|v| sci(*v, PLANE_PRECISION)).collect();
    Ok(format!("# Plane\nWidth 4\nHeight 1\n{}\n", coeffs.join(" ")))
}

/// Accepts both this writer's header and the `# Matrix` / `WIDTH` / `HEIGHT` variant.
pub fn parse_plane_file(text: &str) -> Result<GroundPlane, KittiError> {
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let first = t.split_whitespace().next().unwrap_or_default().to_ascii_lowercase();
        if first == "width" || first == "height" {
            continue;
        }
        let vals = t
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| KittiError::InvalidPlane(format!("non-numeric coefficient line {t:?}")))?;
        if vals.len() != 4 {
            return Err(KittiError::InvalidPlane(format!(
                "expected 4 coefficients, found {}",
                vals.len()
            )));
        }
        return GroundPlane::new(Vec3::new(vals[0], vals[1], vals[2]), vals[3]);
    }
    Err(KittiError::InvalidPlane("no coefficient line".into()))
}
