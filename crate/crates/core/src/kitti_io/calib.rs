use std::fmt::Write as _;

use super::fmt::sci;
use super::KittiError;
use crate::geometry::{CameraModel, Mat3, RigidTransform};

pub type Mat34 = [[f64; 4]; 3];

const CALIB_PRECISION: usize = 11; // 12 significant digits
const R0_TOLERANCE: f64 = 1e-6;

/// Contents of a KITTI `calib/NNNNNN.txt` file.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSet {
    /// `P0`..`P3`.
    pub projections: [Mat34; 4],
    pub r0_rect: [[f64; 3]; 3],
    pub tr_velo_to_cam: Mat34,
    pub tr_imu_to_velo: Mat34,
}

fn identity_3x4() -> Mat34 {
    [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]
}

impl CalibrationSet {
    /// Single zero-baseline camera: every `P` is the camera matrix, no
    /// rectification, and the IMU coincides with the LIDAR.
    pub fn simulated(cam: &CameraModel<f64>, velo_to_cam: &RigidTransform<f64>) -> Self {
        Self {
            projections: [cam.projection; 4],
            r0_rect: Mat3::<f64>::identity().rows,
            tr_velo_to_cam: velo_to_cam.to_matrix_3x4(),
            tr_imu_to_velo: identity_3x4(),
        }
    }

    pub fn p2(&self) -> &Mat34 {
        &self.projections[2]
    }

    pub fn validate(&self) -> Result<(), KittiError> {
        let all = self
            .projections
            .iter()
            .flatten()
            .chain(self.tr_velo_to_cam.iter())
            .chain(self.tr_imu_to_velo.iter())
            .flatten()
            .chain(self.r0_rect.iter().flatten());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(KittiError::InvalidCalibration("non-finite entry".into()));
        }
        let err = Mat3::from_rows(self.r0_rect).orthonormality_error();
        if err > R0_TOLERANCE {
            return Err(KittiError::InvalidCalibration(format!(
                "R0_rect not orthonormal (error {err:e})"
            )));
        }
        Ok(())
    }

    /// Simulated rigs have no stereo baseline: `P2`'s last row is `(0, 0, 1, 0)`.
    pub fn check_zero_baseline(&self) -> Result<(), KittiError> {
        if self.p2()[2] == [0.0, 0.0, 1.0, 0.0] {
            Ok(())
        } else {
            Err(KittiError::InvalidCalibration(format!(
                "P2 third row {:?} is not (0, 0, 1, 0)",
                self.p2()[2]
            )))
        }
    }

    /// Projects a Velodyne point to `(u, v, depth)` through `P2 * R0_rect * Tr_velo_to_cam`.
    pub fn project_velodyne(&self, p: [f64; 3]) -> Option<(f64, f64, f64)> {
        let t = &self.tr_velo_to_cam;
        let cam: [f64; 3] = std::array::from_fn(|i| t[i][0] * p[0] + t[i][1] * p[1] + t[i][2] * p[2] + t[i][3]);
        let r = &self.r0_rect;
        let rect: [f64; 3] = std::array::from_fn(|i| r[i][0] * cam[0] + r[i][1] * cam[1] + r[i][2] * cam[2]);
        let pm = self.p2();
        let h: [f64; 3] =
            std::array::from_fn(|i| pm[i][0] * rect[0] + pm[i][1] * rect[1] + pm[i][2] * rect[2] + pm[i][3]);
        if rect[2] <= 0.0 || h[2] <= 0.0 {
            return None;
        }
        Some((h[0] / h[2], h[1] / h[2], rect[2]))
    }
}

const KEYS: [&str; 7] = ["P0", "P1", "P2", "P3", "R0_rect", "Tr_velo_to_cam", "Tr_imu_to_velo"];

fn push_row(out: &mut String, key: &str, values: impl IntoIterator<Item = f64>) {
    out.push_str(key);
    out.push(':');
    for v in values {
        write!(out, " {}", sci(v, CALIB_PRECISION)).expect("String write");
    }
    out.push('\n');
}

pub fn write_calib_file(c: &CalibrationSet) -> Result<String, KittiError> {
    c.validate()?;
    let mut out = String::new();
    for (i, p) in c.projections.iter().enumerate() {
        push_row(&mut out, KEYS[i], p.iter().flatten().copied());
    }
    push_row(&mut out, KEYS[4], c.r0_rect.iter().flatten().copied());
    push_row(&mut out, KEYS[5], c.tr_velo_to_cam.iter().flatten().copied());
    push_row(&mut out, KEYS[6], c.tr_imu_to_velo.iter().flatten().copied());
    Ok(out)
}

pub fn parse_calib_file(text: &str) -> Result<CalibrationSet, KittiError> {
    let mut values: [Option<Vec<f64>>; 7] = Default::default();
    for line in text.lines() {
        let Some((key, rest)) = line.split_once(':') else {
            continue;
        };
        let Some(slot) = KEYS.iter().position(|k| *k == key.trim()) else {
            continue;
        };
        let parsed = rest
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>().map_err(|_| KittiError::MalformedMatrix {
                    key: KEYS[slot].to_string(),
                    reason: format!("non-numeric value {f:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        values[slot] = Some(parsed);
    }
    let take = |slot: usize, expected: usize| -> Result<Vec<f64>, KittiError> {
        let v = values[slot]
            .clone()
            .ok_or_else(|| KittiError::MissingKey(KEYS[slot].to_string()))?;
        if v.len() != expected {
            return Err(KittiError::MalformedMatrix {
                key: KEYS[slot].to_string(),
                reason: format!("expected {expected} values, found {}", v.len()),
            });
        }
        Ok(v)
    };
    let m34 = |v: Vec<f64>| -> Mat34 { std::array::from_fn(|r| std::array::from_fn(|c| v[r * 4 + c])) };
    let projections = [
        m34(take(0, 12)?),
        m34(take(1, 12)?),
        m34(take(2, 12)?),
        m34(take(3, 12)?),
    ];
    let r0 = take(4, 9)?;
    Ok(CalibrationSet {
        projections,
        r0_rect: std::array::from_fn(|r| std::array::from_fn(|c| r0[r * 3 + c])),
        tr_velo_to_cam: m34(take(5, 12)?),
        tr_imu_to_velo: m34(take(6, 12)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{velodyne_to_camera_transform, Frame};

    fn sim() -> CalibrationSet {
        let cam = CameraModel::new(700.0, 700.0, 621.0, 187.5, 1242, 375).unwrap();
        let mount = RigidTransform::identity(Frame::CameraRect, Frame::CameraRect);
        CalibrationSet::simulated(&cam, &velodyne_to_camera_transform(&mount).unwrap())
    }

    #[test]
    fn simulated_rig_shape() {
        let c = sim();
        assert_eq!(c.r0_rect, Mat3::<f64>::identity().rows);
        assert!(c.projections.iter().all(|p| p == &c.projections[0]));
        c.validate().unwrap();
        c.check_zero_baseline().unwrap();
    }

    #[test]
    fn file_layout() {
        let text = write_calib_file(&sim()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines[0].starts_with("P0: 7.00000000000e+02 0.00000000000e+00 6.21000000000e+02"));
        assert!(lines[4].starts_with("R0_rect: 1.00000000000e+00"));
        assert_eq!(lines[5].split_whitespace().count(), 13);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn round_trip_and_byte_identity() {
        let mut c = sim();
        c.tr_velo_to_cam[0][3] = -4.069766e-03;
        c.projections[2][0][3] = 4.485728e+01;
        c.projections[2][2][3] = 0.0;
        let text = write_calib_file(&c).unwrap();
        let back = parse_calib_file(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(write_calib_file(&back).unwrap(), text);
    }

    #[test]
    fn missing_key_is_named() {
        let text = write_calib_file(&sim()).unwrap();
        let without: String = text
            .lines()
            .filter(|l| !l.starts_with("R0_rect"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(parse_calib_file(&without), Err(KittiError::MissingKey(k)) if k == "R0_rect"));
    }

    #[test]
    fn short_matrix_is_malformed() {
        let text = write_calib_file(&sim())
            .unwrap()
            .replace("P1: 7.00000000000e+02 ", "P1: ");
        assert!(matches!(parse_calib_file(&text), Err(KittiError::MalformedMatrix { key, .. }) if key == "P1"));
    }

    #[test]
    fn real_kitti_file_parses() {
        let text = "P0: 7.215377e+02 0.000000e+00 6.095593e+02 0.000000e+00 0.000000e+00 7.215377e+02 1.728540e+02 0.000000e+00 0.000000e+00 0.000000e+00 1.000000e+00 0.000000e+00
P1: 7.215377e+02 0.000000e+00 6.095593e+02 -3.875744e+02 0.000000e+00 7.215377e+02 1.728540e+02 0.000000e+00 0.000000e+00 0.000000e+00 1.000000e+00 0.000000e+00
P2: 7.215377e+02 0.000000e+00 6.095593e+02 4.485728e+01 0.000000e+00 7.215377e+02 1.728540e+02 2.163791e-01 0.000000e+00 0.000000e+00 1.000000e+00 2.745884e-03
P3: 7.215377e+02 0.000000e+00 6.095593e+02 -3.395242e+02 0.000000e+00 7.215377e+02 1.728540e+02 2.199936e+00 0.000000e+00 0.000000e+00 1.000000e+00 2.729905e-03
R0_rect: 9.999239e-01 9.837760e-03 -7.445048e-03 -9.869795e-03 9.999421e-01 -4.278459e-03 7.402527e-03 4.351614e-03 9.999631e-01
Tr_velo_to_cam: 7.533745e-03 -9.999714e-01 -6.166020e-04 -4.069766e-03 1.480249e-02 7.280733e-04 -9.998902e-01 -7.631618e-02 9.998621e-01 7.523790e-03 1.480755e-02 -2.717806e-01
Tr_imu_to_velo: 9.999976e-01 7.553071e-04 -2.035826e-03 -8.086759e-01 -7.854027e-04 9.998898e-01 -1.482298e-02 3.195559e-01 2.024406e-03 1.482454e-02 9.998881e-01 -7.997231e-01

";
        let c = parse_calib_file(text).unwrap();
        c.validate().unwrap();
        assert!(c.check_zero_baseline().is_err());
        assert_eq!(c.p2()[0][3], 4.485728e+01);
    }

    #[test]
    fn projects_through_matrices() {
        let (u, v, d) = sim().project_velodyne([10.0, 0.0, 0.0]).unwrap();
        assert_eq!((u, v, d), (621.0, 187.5, 10.0));
        assert!(sim().project_velodyne([-10.0, 0.0, 0.0]).is_none());
    }
}
