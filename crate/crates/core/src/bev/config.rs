use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BevError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BevFeature {
    MaxHeight,
    MinHeight,
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerGroup {
    /// Computed per vertical slice.
    Slice,
    /// Computed over the whole column inside `z_range`.
    Cloud,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerMeta {
    pub group: LayerGroup,
    pub feature: BevFeature,
    /// Set for slice layers only.
    pub slice_index: Option<usize>,
}

impl fmt::Display for LayerMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let group = match self.group {
            LayerGroup::Slice => "slice",
            LayerGroup::Cloud => "cloud",
        };
        match self.slice_index {
            Some(k) => write!(f, "{group} {:?} {k}", self.feature),
            None => write!(f, "{group} {:?} -", self.feature),
        }
    }
}

/// The three named layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BevPreset {
    /// Five slices of max height plus whole-cloud density (6 layers).
    Default,
    /// Three slices of max height and density (6 layers).
    Max3Density3,
    /// Whole-cloud max height, min height and density (3 layers).
    MaxMinDensity,
}

impl BevPreset {
    pub const ALL: [BevPreset; 3] = [BevPreset::Default, BevPreset::Max3Density3, BevPreset::MaxMinDensity];

    pub fn name(self) -> &'static str {
        match self {
            BevPreset::Default => "default",
            BevPreset::Max3Density3 => "max3_density3",
            BevPreset::MaxMinDensity => "max_min_density",
        }
    }
}

impl FromStr for BevPreset {
    type Err = BevError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| BevError::UnknownPreset(s.to_string()))
    }
}

/// Declarative feature-map layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BevConfig<T: Real> {
    /// Forward extent in meters, half-open `[min, max)`.
    pub x_range: (T, T),
    /// Lateral extent in meters, half-open `[min, max)`.
    pub y_range: (T, T),
    /// Vertical extent in meters, closed `[min, max]`.
    pub z_range: (T, T),
    pub cell_size: T,
    pub num_slices: usize,
    pub slice_features: Vec<BevFeature>,
    pub cloud_features: Vec<BevFeature>,
    /// Point count that saturates the density feature.
    pub density_log_base_count: u32,
}

impl<T: Real> BevConfig<T> {
    fn with_features(num_slices: usize, slice_features: Vec<BevFeature>, cloud_features: Vec<BevFeature>) -> Self {
        Self {
            x_range: (T::zero(), T::lit(70.0)),
            y_range: (T::lit(-40.0), T::lit(40.0)),
            z_range: (T::lit(-0.2), T::lit(2.3)),
            cell_size: T::lit(0.1),
            num_slices,
            slice_features,
            cloud_features,
            density_log_base_count: 16,
        }
    }

    pub fn from_preset(preset: BevPreset) -> Self {
        use BevFeature::*;
        match preset {
            BevPreset::Default => Self::with_features(5, vec![MaxHeight], vec![Density]),
            BevPreset::Max3Density3 => Self::with_features(3, vec![MaxHeight, Density], vec![]),
            BevPreset::MaxMinDensity => Self::with_features(1, vec![], vec![MaxHeight, MinHeight, Density]),
        }
    }

    pub fn layer_count(&self) -> usize {
        self.num_slices * self.slice_features.len() + self.cloud_features.len()
    }

    /// Slice group first (slice-major, feature-minor), then the cloud group.
    pub fn layer_meta(&self) -> Vec<LayerMeta> {
        let slices = (0..self.num_slices).flat_map(|k| {
            self.slice_features.iter().map(move |f| LayerMeta {
                group: LayerGroup::Slice,
                feature: *f,
                slice_index: Some(k),
            })
        });
        let cloud = self.cloud_features.iter().map(|f| LayerMeta {
            group: LayerGroup::Cloud,
            feature: *f,
            slice_index: None,
        });
        slices.chain(cloud).collect()
    }

    pub fn slice_height(&self) -> T {
        (self.z_range.1 - self.z_range.0) / T::of_usize(self.num_slices)
    }

    /// `(rows, cols)`: rows along x, columns along y.
    pub fn grid_shape(&self) -> (usize, usize) {
        (
            cell_count(self.x_range.1 - self.x_range.0, self.cell_size),
            cell_count(self.y_range.1 - self.y_range.0, self.cell_size),
        )
    }

    pub fn validate(&self) -> Result<(), BevError> {
        let bad = |m: String| Err(BevError::InvalidConfig(m));
        if !(self.cell_size > T::zero()) {
            return bad(format!("cell_size {} must be positive", self.cell_size));
        }
        for (name, (lo, hi)) in [
            ("x_range", self.x_range),
            ("y_range", self.y_range),
            ("z_range", self.z_range),
        ] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return bad(format!("{name} ({lo}, {hi}) is empty"));
            }
        }
        if self.num_slices == 0 {
            return bad("num_slices must be at least 1".into());
        }
        if self.density_log_base_count < 2 {
            return bad(format!(
                "density_log_base_count {} must be at least 2",
                self.density_log_base_count
            ));
        }
        for (name, group) in [
            ("slice_features", &self.slice_features),
            ("cloud_features", &self.cloud_features),
        ] {
            for (i, f) in group.iter().enumerate() {
                if group[..i].contains(f) {
                    return bad(format!("{name} lists {f:?} twice"));
                }
            }
        }
        if self.layer_count() == 0 {
            return Err(BevError::EmptyConfig);
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("BevConfig always serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, BevError> {
        let cfg: Self = toml::from_str(text).map_err(|e| BevError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// 64-bit FNV-1a over the canonical TOML serialization.
    pub fn config_hash(&self) -> u64 {
        super::fnv1a64(self.to_toml().as_bytes())
    }
}

pub fn preset<T: Real>(name: &str) -> Result<BevConfig<T>, BevError> {
    Ok(BevConfig::from_preset(name.parse()?))
}

/// `ceil(extent / cell)`, snapping quotients within float noise of an integer.
pub(crate) fn cell_count<T: Real>(extent: T, cell: T) -> usize {
    let q = extent / cell;
    let r = q.round();
    let n = if (q - r).abs() <= T::lit(1e-6) * r.max(T::one()) {
        r
    } else {
        q.ceil()
    };
    n.to_usize().unwrap_or(0)
}

/// `min(1, ln(n + 1) / ln(base))`.
pub fn density_value<T: Real>(n: usize, base: u32) -> T {
    let v = T::of_usize(n + 1).ln() / T::lit(f64::from(base)).ln();
    v.min(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_layer_counts() {
        assert_eq!(preset::<f32>("default").unwrap().layer_count(), 6);
        assert_eq!(preset::<f32>("max3_density3").unwrap().layer_count(), 6);
        assert_eq!(preset::<f32>("max_min_density").unwrap().layer_count(), 3);
        assert!(matches!(preset::<f32>("mv3d"), Err(BevError::UnknownPreset(_))));
    }

    #[test]
    fn layer_order_is_slice_major() {
        let cfg = BevConfig::<f32>::from_preset(BevPreset::Max3Density3);
        let meta: Vec<String> = cfg.layer_meta().iter().map(ToString::to_string).collect();
        assert_eq!(
            meta,
            [
                "slice MaxHeight 0",
                "slice Density 0",
                "slice MaxHeight 1",
                "slice Density 1",
                "slice MaxHeight 2",
                "slice Density 2"
            ]
        );
        let cfg = BevConfig::<f32>::from_preset(BevPreset::Default);
        assert_eq!(cfg.layer_meta()[5].to_string(), "cloud Density -");
    }

    #[test]
    fn default_grid_is_700_by_800() {
        assert_eq!(
            BevConfig::<f32>::from_preset(BevPreset::Default).grid_shape(),
            (700, 800)
        );
        assert_eq!(
            BevConfig::<f64>::from_preset(BevPreset::Default).grid_shape(),
            (700, 800)
        );
    }

    #[test]
    fn partial_cells_round_up() {
        assert_eq!(cell_count(1.05_f64, 0.1), 11);
        assert_eq!(cell_count(1.0_f64, 0.3), 4);
        assert_eq!(cell_count(0.3_f64, 0.1), 3);
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_value::<f64>(0, 16), 0.0);
        assert!((density_value::<f64>(3, 16) - 0.5).abs() < 1e-12);
        assert_eq!(density_value::<f64>(15, 16), 1.0);
        assert_eq!(density_value::<f64>(10_000, 16), 1.0);
        assert!((density_value::<f64>(7, 64) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut cfg = BevConfig::<f32>::from_preset(BevPreset::Default);
        cfg.slice_features.clear();
        cfg.cloud_features.clear();
        assert!(matches!(cfg.validate(), Err(BevError::EmptyConfig)));

        let mut cfg = BevConfig::<f32>::from_preset(BevPreset::Default);
        cfg.cell_size = 0.0;
        assert!(matches!(cfg.validate(), Err(BevError::InvalidConfig(_))));

        let mut cfg = BevConfig::<f32>::from_preset(BevPreset::Default);
        cfg.z_range = (1.0, 1.0);
        assert!(cfg.validate().is_err());

        let mut cfg = BevConfig::<f32>::from_preset(BevPreset::Default);
        cfg.cloud_features = vec![BevFeature::Density, BevFeature::Density];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        for p in BevPreset::ALL {
            let cfg = BevConfig::<f64>::from_preset(p);
            let text = cfg.to_toml();
            assert_eq!(BevConfig::<f64>::from_toml(&text).unwrap(), cfg);
        }
        let text = "x_range = [0.0, 40.0]\ny_range = [-20.0, 20.0]\nz_range = [-2.0, 1.0]\ncell_size = 0.2\n\
                    num_slices = 2\nslice_features = [\"MinHeight\"]\ncloud_features = []\ndensity_log_base_count = 64\n";
        let cfg = BevConfig::<f32>::from_toml(text).unwrap();
        assert_eq!(cfg.grid_shape(), (200, 200));
        assert_eq!(cfg.layer_count(), 2);
    }

    #[test]
    fn hash_distinguishes_presets() {
        let h: Vec<u64> = BevPreset::ALL
            .iter()
            .map(|p| BevConfig::<f32>::from_preset(*p).config_hash())
            .collect();
        assert_ne!(h[0], h[1]);
        assert_ne!(h[1], h[2]);
        assert_eq!(h[0], BevConfig::<f32>::from_preset(BevPreset::Default).config_hash());
    }
}
