use super::KittiError;
use crate::geometry::{Frame, PointCloud, Vec3};

/// Bytes per point record (x, y, z, intensity as f32).
pub const VELODYNE_RECORD_BYTES: usize = 16;
const POINT_BYTES: usize = VELODYNE_RECORD_BYTES;

/// One LIDAR sweep in the Velodyne frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VelodyneScan {
    pub points: Vec<Vec3<f32>>,
    /// Reflectance in `[0, 1]`, one per point.
    pub intensity: Vec<f32>,
}

impl VelodyneScan {
    pub fn new(points: Vec<Vec3<f32>>, intensity: Vec<f32>) -> Result<Self, KittiError> {
        if points.len() != intensity.len() {
            return Err(KittiError::IntensityMismatch {
                points: points.len(),
                intensity: intensity.len(),
            });
        }
        Ok(Self { points, intensity })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_cloud(&self) -> PointCloud<f32> {
        PointCloud {
            frame: Frame::Velodyne,
            points: self.points.clone(),
            intensity: Some(self.intensity.clone()),
        }
    }
}

/// Packed little-endian `f32` quadruples `(x, y, z, intensity)`, no header.
pub fn write_velodyne_bin(scan: &VelodyneScan) -> Vec<u8> {
    let mut out = Vec::with_capacity(scan.len() * POINT_BYTES);
    for (p, i) in scan.points.iter().zip(&scan.intensity) {
        for v in [p.x, p.y, p.z, *i] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn read_velodyne_bin(bytes: &[u8]) -> Result<VelodyneScan, KittiError> {
    if !bytes.len().is_multiple_of(POINT_BYTES) {
        return Err(KittiError::TruncatedFile { len: bytes.len() });
    }
    let n = bytes.len() / POINT_BYTES;
    let mut points = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    for chunk in bytes.chunks_exact(POINT_BYTES) {
        let f = |k: usize| f32::from_le_bytes(chunk[k * 4..k * 4 + 4].try_into().expect("4-byte slice"));
        points.push(Vec3::new(f(0), f(1), f(2)));
        intensity.push(f(3));
    }
    Ok(VelodyneScan { points, intensity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_scan_is_empty_file() {
        assert!(write_velodyne_bin(&VelodyneScan::default()).is_empty());
        assert!(read_velodyne_bin(&[]).unwrap().is_empty());
    }

    #[test]
    fn single_point_layout() {
        let scan = VelodyneScan::new(vec![Vec3::new(1.0, 2.0, 3.0)], vec![0.5]).unwrap();
        let bytes = write_velodyne_bin(&scan);
        assert_eq!(bytes.len(), 16);
        assert_eq!(&bytes[0..4], &1.0f32.to_le_bytes());
        assert_eq!(&bytes[12..16], &0.5f32.to_le_bytes());
        assert_eq!(read_velodyne_bin(&bytes).unwrap(), scan);
    }

    #[test]
    fn ragged_length_is_truncated_file() {
        assert!(matches!(
            read_velodyne_bin(&[0u8; 17]),
            Err(KittiError::TruncatedFile { len: 17 })
        ));
    }

    #[test]
    fn mismatched_intensity_is_rejected() {
        assert!(VelodyneScan::new(vec![Vec3::zeros()], vec![]).is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_bits_round_trip(raw in prop::collection::vec(any::<u32>(), 0..400)) {
            let n = raw.len() / 4 * 4;
            let bytes: Vec<u8> = raw[..n].iter().flat_map(|w| w.to_le_bytes()).collect();
            let scan = read_velodyne_bin(&bytes).unwrap();
            prop_assert_eq!(write_velodyne_bin(&scan), bytes);
        }
    }
}
