//! Depth-map visibility test for 3D boxes.
//!
//! A box vertex is occluded when any pixel in the 3x3 window around its
//! projection (clipped at the image border, centre included) holds a depth
//! more than [`DEPTH_EPSILON`] closer than the vertex. An object is occluded
//! when at least [`OCCLUDED_VERTEX_THRESHOLD`] of its eight vertices are.
//! Vertices behind the camera or outside the image count as occluded.

use image::{Rgb, RgbImage};
use thiserror::Error;

use crate::geometry::{project, CameraModel, Projection, Vec3};
use crate::scalar::Real;

/// Depth tolerance (meters) that keeps a vertex from being hidden by the
/// surface it lies on.
pub const DEPTH_EPSILON: f64 = 0.01;
pub const OCCLUDED_VERTEX_THRESHOLD: usize = 4;
/// Far plane of CARLA-style 24-bit depth images.
pub const DEFAULT_FAR_PLANE: f64 = 1000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OcclusionError {
    #[error("pixel ({u}, {v}) outside {width}x{height} depth map")]
    OutOfBounds {
        u: usize,
        v: usize,
        width: usize,
        height: usize,
    },
    #[error("depth map of {width}x{height} needs {expected} values, got {found}")]
    SizeMismatch {
        width: usize,
        height: usize,
        expected: usize,
        found: usize,
    },
    #[error("depth {value} at index {index} is neither positive nor +inf")]
    InvalidDepth { index: usize, value: f64 },
}

/// Dense row-major metric depth; `+inf` marks sky.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap<T: Real> {
    width: usize,
    height: usize,
    depth: Vec<T>,
}

impl<T: Real> DepthMap<T> {
    pub fn new(width: usize, height: usize, depth: Vec<T>) -> Result<Self, OcclusionError> {
        if depth.len() != width * height {
            return Err(OcclusionError::SizeMismatch {
                width,
                height,
                expected: width * height,
                found: depth.len(),
            });
        }
        if let Some((index, value)) = depth.iter().enumerate().find(|(_, d)| !(**d > T::zero())) {
            return Err(OcclusionError::InvalidDepth {
                index,
                value: value.to_f64_lossy(),
            });
        }
        Ok(Self { width, height, depth })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            depth: vec![value; width * height],
        }
    }

    pub fn sky(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::infinity())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[T] {
        &self.depth
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> T {
        self.depth[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, value: T) {
        self.depth[v * self.width + u] = value;
    }

    /// Minimum over the 3x3 window centred on `(u, v)`, clipped at the borders.
    pub fn neighbourhood_min(&self, u: usize, v: usize) -> T {
        let mut m = T::infinity();
        for y in v.saturating_sub(1)..=(v + 1).min(self.height - 1) {
            for x in u.saturating_sub(1)..=(u + 1).min(self.width - 1) {
                m = m.min(self.get(x, y));
            }
        }
        m
    }
}

/// Per-vertex outcome of [`object_occluded`].
#[derive(Debug, Clone, PartialEq)]
pub struct VertexVisibility<T: Real> {
    pub occluded: [bool; 8],
    /// `None` for vertices that could not be projected.
    pub projected: [Option<Projection<T>>; 8],
}

impl<T: Real> VertexVisibility<T> {
    pub fn occluded_count(&self) -> usize {
        self.occluded.iter().filter(|o| **o).count()
    }
}

pub fn vertex_occluded<T: Real>(
    dm: &DepthMap<T>,
    pixel: (usize, usize),
    vertex_depth: T,
) -> Result<bool, OcclusionError> {
    let (u, v) = pixel;
    if u >= dm.width || v >= dm.height {
        return Err(OcclusionError::OutOfBounds {
            u,
            v,
            width: dm.width,
            height: dm.height,
        });
    }
    Ok(dm.neighbourhood_min(u, v) < vertex_depth - T::lit(DEPTH_EPSILON))
}

/// Tests the eight box vertices (rectified camera frame) against the depth map.
pub fn object_occluded<T: Real>(
    dm: &DepthMap<T>,
    box_vertices: &[Vec3<T>; 8],
    cam: &CameraModel<T>,
) -> (bool, VertexVisibility<T>) {
    let mut occluded = [true; 8];
    let mut projected = [None; 8];
    let (w, h) = (T::of_usize(dm.width), T::of_usize(dm.height));
    for (i, vertex) in box_vertices.iter().enumerate() {
        let Ok(p) = project(*vertex, cam) else {
            continue;
        };
        projected[i] = Some(p);
        if !(p.u >= T::zero() && p.v >= T::zero() && p.u < w && p.v < h) {
            continue;
        }
        let pixel = (
            p.u.floor().to_usize().unwrap_or(usize::MAX),
            p.v.floor().to_usize().unwrap_or(usize::MAX),
        );
        occluded[i] = vertex_occluded(dm, pixel, p.depth).unwrap_or(true);
    }
    let vv = VertexVisibility { occluded, projected };
    (vv.occluded_count() >= OCCLUDED_VERTEX_THRESHOLD, vv)
}

/// Keeps the non-occluded objects, in input order.
pub fn visible_objects<T: Real, L: Clone>(
    scene: &[(L, [Vec3<T>; 8])],
    dm: &DepthMap<T>,
    cam: &CameraModel<T>,
) -> Vec<(L, VertexVisibility<T>)> {
    scene
        .iter()
        .filter_map(|(label, vertices)| {
            let (occ, vv) = object_occluded(dm, vertices, cam);
            (!occ).then(|| (label.clone(), vv))
        })
        .collect()
}

/// Decodes a 24-bit RGB depth image: `(R + 256 G + 65536 B) / (2^24 - 1) * far_plane`.
/// The saturated code is treated as sky.
pub fn decode_rgb_depth(img: &RgbImage, far_plane: f64) -> Result<DepthMap<f64>, OcclusionError> {
    const FULL_SCALE: f64 = 16_777_215.0;
    let depth: Vec<f64> = img
        .pixels()
        .map(|Rgb([r, g, b])| {
            let code = f64::from(*r) + 256.0 * f64::from(*g) + 65536.0 * f64::from(*b);
            if code >= FULL_SCALE {
                f64::INFINITY
            } else {
                code / FULL_SCALE * far_plane
            }
        })
        .collect();
    DepthMap::new(img.width() as usize, img.height() as usize, depth)
}

/// Inverse of [`decode_rgb_depth`], quantized to the 24-bit code.
pub fn encode_rgb_depth<T: Real>(dm: &DepthMap<T>, far_plane: f64) -> RgbImage {
    RgbImage::from_fn(dm.width as u32, dm.height as u32, |u, v| {
        let d = dm.get(u as usize, v as usize).to_f64_lossy();
        let code = if d.is_finite() {
            ((d / far_plane) * 16_777_215.0).round().clamp(0.0, 16_777_215.0) as u32
        } else {
            16_777_215
        };
        Rgb([(code & 0xff) as u8, ((code >> 8) & 0xff) as u8, (code >> 16) as u8])
    })
}

/// Draws green (visible) and red (occluded) 5x5 dots at projected vertices.
pub fn draw_vertex_overlay<T: Real>(img: &mut RgbImage, vv: &VertexVisibility<T>) {
    for (p, occluded) in vv.projected.iter().zip(vv.occluded) {
        let Some(p) = p else { continue };
        let colour = if occluded { Rgb([255, 0, 0]) } else { Rgb([0, 255, 0]) };
        let (cu, cv) = (p.u.floor().to_f64_lossy(), p.v.floor().to_f64_lossy());
        for dv in -2..=2 {
            for du in -2..=2 {
                let (x, y) = (cu + f64::from(du), cv + f64::from(dv));
                if x >= 0.0 && y >= 0.0 && x < f64::from(img.width()) && y < f64::from(img.height()) {
                    img.put_pixel(x as u32, y as u32, colour);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_with_min(min: f64) -> DepthMap<f64> {
        let mut dm = DepthMap::filled(5, 5, 50.0);
        dm.set(1, 3, min);
        dm
    }

    #[test]
    fn closer_neighbour_occludes() {
        assert!(vertex_occluded(&map_with_min(5.0), (2, 2), 7.0).unwrap());
    }

    #[test]
    fn farther_neighbourhood_is_visible() {
        assert!(!vertex_occluded(&map_with_min(7.0), (2, 2), 5.0).unwrap());
    }

    #[test]
    fn within_epsilon_is_visible() {
        assert!(!vertex_occluded(&map_with_min(6.995), (2, 2), 7.0).unwrap());
        assert!(vertex_occluded(&map_with_min(6.985), (2, 2), 7.0).unwrap());
    }

    #[test]
    fn window_is_clipped_at_border() {
        let mut dm = DepthMap::filled(4, 3, 20.0);
        dm.set(3, 2, 1.0);
        assert!(vertex_occluded(&dm, (3, 2), 10.0).unwrap());
        assert!(vertex_occluded(&dm, (2, 1), 10.0).unwrap());
        assert!(!vertex_occluded(&dm, (0, 0), 10.0).unwrap());
    }

    #[test]
    fn out_of_bounds_pixel_is_error() {
        let dm = DepthMap::<f64>::sky(4, 3);
        assert!(matches!(
            vertex_occluded(&dm, (4, 0), 1.0),
            Err(OcclusionError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn depth_map_rejects_bad_values() {
        assert!(DepthMap::new(2, 1, vec![1.0, 0.0]).is_err());
        assert!(DepthMap::new(2, 1, vec![1.0, f64::NAN]).is_err());
        assert!(DepthMap::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DepthMap::new(2, 1, vec![1.0, f64::INFINITY]).is_ok());
    }

    #[test]
    fn rgb_depth_round_trip() {
        let mut dm = DepthMap::filled(3, 2, 12.5);
        dm.set(0, 0, f64::INFINITY);
        dm.set(2, 1, 999.0);
        let back = decode_rgb_depth(&encode_rgb_depth(&dm, DEFAULT_FAR_PLANE), DEFAULT_FAR_PLANE).unwrap();
        assert!(back.get(0, 0).is_infinite());
        // one code step is far/(2^24-1), about 6e-5 m
        assert!((back.get(1, 0) - 12.5).abs() < 1e-4);
        assert!((back.get(2, 1) - 999.0).abs() < 1e-4);
    }

    #[test]
    fn decode_formula() {
        let img = RgbImage::from_pixel(1, 1, Rgb([1, 2, 3]));
        let dm = decode_rgb_depth(&img, 1000.0).unwrap();
        let expected = (1.0 + 512.0 + 196_608.0) / 16_777_215.0 * 1000.0;
        assert_eq!(dm.get(0, 0), expected);
    }
}
