use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use super::{io_err, kitti_err, read_text, write_bytes, PipelineError};
use crate::kitti_io::{parse_label_file, KittiLayout, ObjectLabel, Part};

/// Orientation histogram bins over `[-pi, pi)`.
pub const ORIENTATION_BINS: usize = 36;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BboxSummary {
    pub width_min: f64,
    pub width_max: f64,
    pub width_mean: f64,
    pub height_min: f64,
    pub height_max: f64,
    pub height_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    pub count: usize,
    /// Counts of `rotation_y` per bin of width `2 pi / 36`, starting at `-pi`.
    pub orientation: [usize; ORIENTATION_BINS],
    pub bbox: BboxSummary,
}

impl Default for ClassStats {
    fn default() -> Self {
        Self {
            count: 0,
            orientation: [0; ORIENTATION_BINS],
            bbox: BboxSummary::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetStats {
    pub samples: usize,
    pub classes: BTreeMap<String, ClassStats>,
    /// `objects_per_image[n]` is the number of images with exactly `n` objects.
    pub objects_per_image: Vec<usize>,
}

impl DatasetStats {
    pub fn total_objects(&self) -> usize {
        self.classes.values().map(|c| c.count).sum()
    }

    pub fn count(&self, class: &str) -> usize {
        self.classes.get(class).map_or(0, |c| c.count)
    }

    pub fn mean_objects_per_image(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.total_objects() as f64 / self.samples as f64
        }
    }
}

pub fn orientation_bin(rotation_y: f64) -> usize {
    let w = 2.0 * PI / ORIENTATION_BINS as f64;
    (((rotation_y + PI) / w).floor().max(0.0) as usize).min(ORIENTATION_BINS - 1)
}

/// Statistics over per-sample label lists; `DontCare` rows are skipped.
pub fn compute_stats(samples: &[Vec<ObjectLabel>]) -> DatasetStats {
    let mut stats = DatasetStats {
        samples: samples.len(),
        ..DatasetStats::default()
    };
    let mut sums: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for labels in samples {
        let mut n = 0;
        for l in labels.iter().filter(|l| !l.is_dont_care()) {
            n += 1;
            let c = stats.classes.entry(l.class_name.clone()).or_default();
            let (w, h) = (l.bbox2d.width(), l.bbox2d.height());
            if c.count == 0 {
                c.bbox = BboxSummary {
                    width_min: w,
                    width_max: w,
                    height_min: h,
                    height_max: h,
                    ..BboxSummary::default()
                };
            }
            c.count += 1;
            c.orientation[orientation_bin(l.rotation_y)] += 1;
            let b = &mut c.bbox;
            b.width_min = b.width_min.min(w);
            b.width_max = b.width_max.max(w);
            b.height_min = b.height_min.min(h);
            b.height_max = b.height_max.max(h);
            let s = sums.entry(l.class_name.clone()).or_default();
            s.0 += w;
            s.1 += h;
        }
        if stats.objects_per_image.len() <= n {
            stats.objects_per_image.resize(n + 1, 0);
        }
        stats.objects_per_image[n] += 1;
    }
    for (name, (sw, sh)) in sums {
        let c = stats.classes.get_mut(&name).expect("summed classes exist");
        c.bbox.width_mean = sw / c.count as f64;
        c.bbox.height_mean = sh / c.count as f64;
    }
    stats
}

/// Reads every `label_2` file and summarizes it.
pub fn cmd_stats(dataset: &Path) -> Result<DatasetStats, PipelineError> {
    let layout = KittiLayout::new(dataset);
    let indices = layout.indices(Part::Label).map_err(io_err(&layout.dir(Part::Label)))?;
    let mut samples = Vec::with_capacity(indices.len());
    for i in indices {
        let path = layout.path(Part::Label, i);
        samples.push(parse_label_file(&read_text(&path)?).map_err(kitti_err(&path))?);
    }
    Ok(compute_stats(&samples))
}

/// Long-format CSV `section,class,key,lower,upper,value` preceded by `#`
/// lines that state the bin edges.
pub fn stats_csv(stats: &DatasetStats) -> String {
    let w = 2.0 * PI / ORIENTATION_BINS as f64;
    let mut head = String::new();
    head.push_str("# cadet dataset statistics\n");
    head.push_str(&format!("# samples {}\n", stats.samples));
    head.push_str(&format!(
        "# orientation: {ORIENTATION_BINS} bins of rotation_y over [-pi, pi), width 2*pi/{ORIENTATION_BINS} rad; bin k is [lower, upper)\n"
    ));
    head.push_str("# objects_per_image: bin n counts images with exactly n labeled objects, edges [n, n+1)\n");
    head.push_str("# count: labeled objects per class; bbox: 2D box width/height in pixels (min, mean, max)\n");

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut row = |section: &str, class: &str, key: String, lower: String, upper: String, value: String| {
        wtr.write_record([section, class, &key, &lower, &upper, &value])
            .expect("in-memory CSV");
    };
    row(
        "section",
        "class",
        "key".into(),
        "lower".into(),
        "upper".into(),
        "value".into(),
    );
    row(
        "samples",
        "all",
        String::new(),
        String::new(),
        String::new(),
        stats.samples.to_string(),
    );
    for (name, c) in &stats.classes {
        row(
            "count",
            name,
            String::new(),
            String::new(),
            String::new(),
            c.count.to_string(),
        );
    }
    for (name, c) in &stats.classes {
        for (k, n) in c.orientation.iter().enumerate() {
            let lo = -PI + k as f64 * w;
            row(
                "orientation",
                name,
                k.to_string(),
                format!("{lo:.6}"),
                format!("{:.6}", lo + w),
                n.to_string(),
            );
        }
    }
    for (name, c) in &stats.classes {
        let b = &c.bbox;
        for (key, v) in [
            ("width_min", b.width_min),
            ("width_mean", b.width_mean),
            ("width_max", b.width_max),
            ("height_min", b.height_min),
            ("height_mean", b.height_mean),
            ("height_max", b.height_max),
        ] {
            row(
                "bbox",
                name,
                key.into(),
                String::new(),
                String::new(),
                format!("{v:.3}"),
            );
        }
    }
    for (n, images) in stats.objects_per_image.iter().enumerate() {
        row(
            "objects_per_image",
            "all",
            n.to_string(),
            n.to_string(),
            (n + 1).to_string(),
            images.to_string(),
        );
    }
    let body = String::from_utf8(wtr.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8");
    head + &body
}

pub fn write_stats_csv(stats: &DatasetStats, path: &Path) -> Result<(), PipelineError> {
    write_bytes(path, stats_csv(stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::kitti_io::{BBox2d, Dimensions};

    fn label(class: &str, ry: f64, w: f64, h: f64) -> ObjectLabel {
        ObjectLabel {
            class_name: class.into(),
            truncation: 0.0,
            occlusion: 0,
            alpha: 0.0,
            bbox2d: BBox2d {
                left: 100.0,
                top: 100.0,
                right: 100.0 + w,
                bottom: 100.0 + h,
            },
            dimensions: Dimensions {
                height: 1.5,
                width: 1.6,
                length: 4.0,
            },
            location: Vec3::new(0.0, 1.7, 10.0),
            rotation_y: ry,
            score: None,
        }
    }

    #[test]
    fn empty_dataset_is_all_zero() {
        let s = compute_stats(&[]);
        assert_eq!(s, DatasetStats::default());
        assert_eq!(s.mean_objects_per_image(), 0.0);
    }

    #[test]
    fn hand_built_fixture() {
        let samples = vec![
            vec![label("Car", 0.0, 50.0, 30.0), label("Pedestrian", -PI, 20.0, 60.0)],
            vec![],
            vec![
                label("Car", 3.0, 70.0, 40.0),
                label("Car", PI, 60.0, 50.0),
                label("DontCare", 0.0, 5.0, 5.0),
            ],
        ];
        let s = compute_stats(&samples);
        assert_eq!(s.samples, 3);
        assert_eq!(s.count("Car"), 3);
        assert_eq!(s.count("Pedestrian"), 1);
        assert_eq!(s.objects_per_image, vec![1, 0, 2]);
        let car = &s.classes["Car"];
        assert_eq!(car.orientation[18], 1);
        assert_eq!(car.orientation[35], 2);
        assert_eq!(s.classes["Pedestrian"].orientation[0], 1);
        assert_eq!(car.bbox.width_min, 50.0);
        assert_eq!(car.bbox.width_max, 70.0);
        assert_eq!(car.bbox.width_mean, 60.0);
        assert_eq!(car.bbox.height_mean, 40.0);
        assert!((s.mean_objects_per_image() - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.total_objects(), 4);
        for c in s.classes.values() {
            assert_eq!(c.orientation.iter().sum::<usize>(), c.count);
        }
    }

    #[test]
    fn csv_states_bin_edges() {
        let s = compute_stats(&[vec![label("Car", 0.1, 10.0, 10.0)]]);
        let text = stats_csv(&s);
        assert!(text.lines().next().unwrap().starts_with('#'));
        assert!(text.contains("orientation,Car,18,0.000000,0.174533,1"));
        assert!(text.contains("count,Car,,,,1"));
        assert!(text.contains("objects_per_image,all,1,1,2,1"));
    }
}
