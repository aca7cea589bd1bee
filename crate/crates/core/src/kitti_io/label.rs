use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::KittiError;
use crate::geometry::{Mat3, Vec3};
use crate::scalar::wrap_to_pi;

pub const DONT_CARE: &str = "DontCare";

/// Occlusion levels written into the third label column.
pub const OCCLUSION_VISIBLE: i8 = 0;
pub const OCCLUSION_LARGELY_OCCLUDED: i8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox2d {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl BBox2d {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }
}

/// Box extents in meters, KITTI order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    pub height: f64,
    pub width: f64,
    pub length: f64,
}

/// One row of a KITTI `label_2` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectLabel {
    pub class_name: String,
    pub truncation: f64,
    pub occlusion: i8,
    pub alpha: f64,
    pub bbox2d: BBox2d,
    pub dimensions: Dimensions,
    /// Bottom centre of the box in the rectified camera frame.
    pub location: Vec3<f64>,
    pub rotation_y: f64,
    /// Detection score; only present in result files and never written.
    pub score: Option<f64>,
}

impl ObjectLabel {
    pub fn is_dont_care(&self) -> bool {
        self.class_name == DONT_CARE
    }

    /// Checks the label invariants. `DontCare` rows only need a class and a valid 2D box.
    pub fn validate(&self) -> Result<(), KittiError> {
        let bad = |msg: String| Err(KittiError::InvalidLabel(msg));
        if self.class_name.is_empty() || self.class_name.chars().any(char::is_whitespace) {
            return bad(format!("class name {:?}", self.class_name));
        }
        let b = &self.bbox2d;
        if !(b.left < b.right) || !(b.top < b.bottom) {
            return bad(format!(
                "bbox ({}, {}, {}, {}) is empty or inverted",
                b.left, b.top, b.right, b.bottom
            ));
        }
        if self.is_dont_care() {
            return Ok(());
        }
        if !(0.0..=1.0).contains(&self.truncation) {
            return bad(format!("truncation {} outside [0, 1]", self.truncation));
        }
        if !(0..=3).contains(&self.occlusion) {
            return bad(format!("occlusion flag {} outside 0..=3", self.occlusion));
        }
        let d = &self.dimensions;
        if !(d.height > 0.0 && d.width > 0.0 && d.length > 0.0) {
            return bad(format!(
                "dimensions ({}, {}, {}) not positive",
                d.height, d.width, d.length
            ));
        }
        for (name, a) in [("alpha", self.alpha), ("rotation_y", self.rotation_y)] {
            if !(a.abs() <= PI) {
                return bad(format!("{name} {a} outside [-pi, pi]"));
            }
        }
        let l = self.location;
        if !(l.x.is_finite() && l.y.is_finite() && l.z.is_finite()) {
            return bad("non-finite location".into());
        }
        Ok(())
    }

    /// Eight box corners in the rectified camera frame (KITTI devkit order:
    /// bottom face first, then top face).
    pub fn corners(&self) -> [Vec3<f64>; 8] {
        box_corners(self.location, self.dimensions, self.rotation_y)
    }
}

pub fn box_corners(location: Vec3<f64>, dims: Dimensions, rotation_y: f64) -> [Vec3<f64>; 8] {
    let (l2, w2, h) = (dims.length / 2.0, dims.width / 2.0, dims.height);
    let xs = [l2, l2, -l2, -l2, l2, l2, -l2, -l2];
    let ys = [0.0, 0.0, 0.0, 0.0, -h, -h, -h, -h];
    let zs = [w2, -w2, -w2, w2, w2, -w2, -w2, w2];
    let r = Mat3::rot_y(rotation_y);
    std::array::from_fn(|i| r.mul_vec(Vec3::new(xs[i], ys[i], zs[i])) + location)
}

/// Observation angle: `wrap(rotation_y - atan2(x, z))`.
pub fn compute_alpha(location: Vec3<f64>, rotation_y: f64) -> Result<f64, KittiError> {
    if !(location.z > 0.0) {
        return Err(KittiError::BehindCamera { depth: location.z });
    }
    Ok(wrap_to_pi(rotation_y - location.x.atan2(location.z)))
}

/// Source of the occlusion column when writing labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OcclusionField {
    /// Write each label's own flag.
    #[default]
    AsLabeled,
    /// Write the same flag on every row.
    Constant(i8),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LabelWriteOptions {
    pub occlusion: OcclusionField,
}

pub fn write_label_file(labels: &[ObjectLabel]) -> Result<String, KittiError> {
    write_label_file_with(labels, LabelWriteOptions::default())
}

pub fn write_label_file_with(labels: &[ObjectLabel], opts: LabelWriteOptions) -> Result<String, KittiError> {
    let mut out = String::new();
    for label in labels {
        label.validate()?;
        let occlusion = match opts.occlusion {
            OcclusionField::AsLabeled => label.occlusion,
            OcclusionField::Constant(v) => v,
        };
        let b = &label.bbox2d;
        let d = &label.dimensions;
        let l = &label.location;
        writeln!(
            out,
            "{} {:.2} {} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2}",
            label.class_name,
            label.truncation,
            occlusion,
            label.alpha,
            b.left,
            b.top,
            b.right,
            b.bottom,
            d.height,
            d.width,
            d.length,
            l.x,
            l.y,
            l.z,
            label.rotation_y
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

pub fn parse_label_file(text: &str) -> Result<Vec<ObjectLabel>, KittiError> {
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 15 && fields.len() != 16 {
            return Err(KittiError::MalformedLine {
                line: line_no,
                fields: fields.len(),
            });
        }
        let num = |i: usize| -> Result<f64, KittiError> {
            fields[i].parse::<f64>().map_err(|_| KittiError::NonNumericField {
                line: line_no,
                field: i + 1,
                value: fields[i].to_string(),
            })
        };
        let occlusion = fields[2].parse::<i8>().map_err(|_| KittiError::NonNumericField {
            line: line_no,
            field: 3,
            value: fields[2].to_string(),
        })?;
        labels.push(ObjectLabel {
            class_name: fields[0].to_string(),
            truncation: num(1)?,
            occlusion,
            alpha: num(3)?,
            bbox2d: BBox2d {
                left: num(4)?,
                top: num(5)?,
                right: num(6)?,
                bottom: num(7)?,
            },
            dimensions: Dimensions {
                height: num(8)?,
                width: num(9)?,
                length: num(10)?,
            },
            location: Vec3::new(num(11)?, num(12)?, num(13)?),
            rotation_y: num(14)?,
            score: if fields.len() == 16 { Some(num(15)?) } else { None },
        });
    }
    Ok(labels)
}
