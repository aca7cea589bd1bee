use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use super::{io_err, read_manifest, PipelineError, MANIFEST_FILE};
use crate::kitti_io::{parse_calib_file, parse_label_file, parse_plane_file, KittiLayout, Part, VELODYNE_RECORD_BYTES};

/// One problem found in a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: PathBuf,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub samples_checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: &Path, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.to_path_buf(),
            message: message.into(),
        });
    }
}

fn check_file(report: &mut ValidationReport, path: &Path, part: Part) {
    let text = || std::fs::read_to_string(path).map_err(|e| e.to_string());
    let result: Result<(), String> = match part {
        Part::Label => text().and_then(|t| {
            let labels = parse_label_file(&t).map_err(|e| e.to_string())?;
            labels.iter().try_for_each(|l| l.validate()).map_err(|e| e.to_string())
        }),
        Part::Calib => text().and_then(|t| {
            parse_calib_file(&t)
                .and_then(|c| c.validate())
                .map_err(|e| e.to_string())
        }),
        Part::Plane => text().and_then(|t| {
            parse_plane_file(&t)
                .and_then(|p| p.validate())
                .map_err(|e| e.to_string())
        }),
        Part::Velodyne => std::fs::metadata(path).map_err(|e| e.to_string()).and_then(|m| {
            if m.len() % VELODYNE_RECORD_BYTES as u64 == 0 {
                Ok(())
            } else {
                Err(format!(
                    "length {} is not a multiple of {VELODYNE_RECORD_BYTES}",
                    m.len()
                ))
            }
        }),
        Part::Image => image::ImageReader::open(path)
            .map_err(|e| e.to_string())
            .and_then(|r| r.with_guessed_format().map_err(|e| e.to_string()))
            .and_then(|r| r.into_dimensions().map_err(|e| e.to_string()))
            .and_then(|(w, h)| {
                if w == 0 || h == 0 {
                    Err("empty image".into())
                } else {
                    Ok(())
                }
            }),
    };
    if let Err(msg) = result {
        report.push(path, msg);
    }
}

/// Checks that every sample has all five parts and that each file parses
/// and passes its domain checks. A manifest, when present, must list
/// exactly the samples on disk.
///
/// Only a missing or unreadable dataset root is an error; everything else
/// is reported as a violation.
pub fn cmd_validate(dataset: &Path) -> Result<ValidationReport, PipelineError> {
    std::fs::metadata(dataset).map_err(io_err(dataset))?;
    let layout = KittiLayout::new(dataset);
    let mut report = ValidationReport::default();

    let mut per_part = Vec::new();
    for part in Part::ALL {
        let dir = layout.dir(part);
        let indices: BTreeSet<usize> = layout.indices(part).map_err(io_err(&dir))?.into_iter().collect();
        per_part.push((part, indices));
    }
    let all: BTreeSet<usize> = per_part.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    report.samples_checked = all.len();

    for &index in &all {
        for (part, present) in &per_part {
            let path = layout.path(*part, index);
            if present.contains(&index) {
                check_file(&mut report, &path, *part);
            } else {
                report.push(&path, "missing");
            }
        }
    }

    let manifest_path = dataset.join(MANIFEST_FILE);
    if manifest_path.exists() {
        match read_manifest(dataset) {
            Ok(m) => {
                let listed: BTreeSet<usize> = m.rows.iter().map(|r| r.index).collect();
                if listed.len() != m.rows.len() {
                    report.push(&manifest_path, "duplicate sample rows");
                }
                for i in all.difference(&listed) {
                    report.push(&manifest_path, format!("sample {i} on disk but not listed"));
                }
                for i in listed.difference(&all) {
                    report.push(&manifest_path, format!("sample {i} listed but not on disk"));
                }
            }
            Err(e) => report.push(&manifest_path, e.to_string()),
        }
    }
    Ok(report)
}
