use super::config::{density_value, BevConfig, BevFeature, LayerMeta};
use super::BevError;
use crate::geometry::{PointCloud, Vec3};
use crate::scalar::Real;

/// Stack of `rows x cols` layers, each stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BevStack<T> {
    pub rows: usize,
    pub cols: usize,
    pub layers: Vec<Vec<T>>,
    pub meta: Vec<LayerMeta>,
}

impl<T: Real> BevStack<T> {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn get(&self, layer: usize, row: usize, col: usize) -> T {
        self.layers[layer][row * self.cols + col]
    }

    pub fn layer(&self, layer: usize) -> &[T] {
        &self.layers[layer]
    }
}

/// Maps a point to `(row, col, slice)`, or `None` if it lies outside the volume.
pub fn cell_of<T: Real>(cfg: &BevConfig<T>, p: &Vec3<T>) -> Option<(usize, usize, usize)> {
    let (x0, x1) = cfg.x_range;
    let (y0, y1) = cfg.y_range;
    let (z0, z1) = cfg.z_range;
    if !(p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1 && p.z >= z0 && p.z <= z1) {
        return None;
    }
    let (rows, cols) = cfg.grid_shape();
    let index = |v: T, lo: T, n: usize| ((v - lo) / cfg.cell_size).floor().to_usize().unwrap_or(0).min(n - 1);
    let slice = ((p.z - z0) / cfg.slice_height())
        .floor()
        .to_usize()
        .unwrap_or(0)
        .min(cfg.num_slices - 1);
    Some((index(p.x, x0, rows), index(p.y, y0, cols), slice))
}

struct Accum<T> {
    max: Vec<T>,
    min: Vec<T>,
    count: Vec<u32>,
}

impl<T: Real> Accum<T> {
    fn new(n: usize) -> Self {
        Self {
            max: vec![T::neg_infinity(); n],
            min: vec![T::infinity(); n],
            count: vec![0; n],
        }
    }

    fn push(&mut self, i: usize, z: T) {
        self.max[i] = self.max[i].max(z);
        self.min[i] = self.min[i].min(z);
        self.count[i] += 1;
    }

    fn feature(&self, i: usize, f: BevFeature, bottom: T, height: T, base: u32) -> T {
        let n = self.count[i] as usize;
        match f {
            BevFeature::Density => density_value(n, base),
            _ if n == 0 => T::zero(),
            BevFeature::MaxHeight => ((self.max[i] - bottom) / height).max(T::zero()).min(T::one()),
            BevFeature::MinHeight => ((self.min[i] - bottom) / height).max(T::zero()).min(T::one()),
        }
    }
}

/// Rasterizes a point cloud into the layers described by `cfg`.
///
/// Heights are normalized to `[0, 1]` over the slice for slice layers and over
/// the whole `z_range` for cloud layers. Empty cells are 0 in every layer.
pub fn rasterize<T: Real>(cloud: &PointCloud<T>, cfg: &BevConfig<T>) -> Result<BevStack<T>, BevError> {
    cfg.validate()?;
    let (rows, cols) = cfg.grid_shape();
    let cells = rows * cols;
    let mut slices = (!cfg.slice_features.is_empty()).then(|| Accum::new(cells * cfg.num_slices));
    let mut cloud_acc = (!cfg.cloud_features.is_empty()).then(|| Accum::new(cells));

    for p in &cloud.points {
        let Some((r, c, k)) = cell_of(cfg, p) else { continue };
        let cell = r * cols + c;
        if let Some(acc) = slices.as_mut() {
            acc.push(k * cells + cell, p.z);
        }
        if let Some(acc) = cloud_acc.as_mut() {
            acc.push(cell, p.z);
        }
    }

    let base = cfg.density_log_base_count;
    let mut layers = Vec::with_capacity(cfg.layer_count());
    if let Some(acc) = &slices {
        let h = cfg.slice_height();
        for k in 0..cfg.num_slices {
            let bottom = cfg.z_range.0 + T::of_usize(k) * h;
            for &f in &cfg.slice_features {
                layers.push(
                    (0..cells)
                        .map(|i| acc.feature(k * cells + i, f, bottom, h, base))
                        .collect(),
                );
            }
        }
    }
    if let Some(acc) = &cloud_acc {
        let h = cfg.z_range.1 - cfg.z_range.0;
        for &f in &cfg.cloud_features {
            layers.push((0..cells).map(|i| acc.feature(i, f, cfg.z_range.0, h, base)).collect());
        }
    }
    Ok(BevStack {
        rows,
        cols,
        layers,
        meta: cfg.layer_meta(),
    })
}
