use std::fs;
use std::path::{Path, PathBuf};

use image::GrayImage;

use super::config::{BevFeature, LayerGroup, LayerMeta};
use super::raster::BevStack;
use super::BevError;
use crate::scalar::Real;

const MAGIC: &str = "# bev stack v1";

/// Text sidecar describing a planar float32 payload.
pub fn encode_header<T: Real>(stack: &BevStack<T>, config_hash: u64) -> String {
    let mut out = format!(
        "{MAGIC}\ndtype f32le\norder planar-row-major\nrows {}\ncols {}\nlayers {}\nconfig_hash {config_hash:016x}\n",
        stack.rows,
        stack.cols,
        stack.layer_count()
    );
    for (i, m) in stack.meta.iter().enumerate() {
        out.push_str(&format!("layer {i} {m}\n"));
    }
    out
}

pub fn encode_payload<T: Real>(stack: &BevStack<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(stack.layers.iter().map(Vec::len).sum::<usize>() * 4);
    for v in stack.layers.iter().flatten() {
        out.extend_from_slice(&v.to_f32().unwrap_or(f32::NAN).to_le_bytes());
    }
    out
}

fn parse_meta(fields: &[&str]) -> Option<LayerMeta> {
    let group = match fields[0] {
        "slice" => LayerGroup::Slice,
        "cloud" => LayerGroup::Cloud,
        _ => return None,
    };
    let feature = match fields[1] {
        "MaxHeight" => BevFeature::MaxHeight,
        "MinHeight" => BevFeature::MinHeight,
        "Density" => BevFeature::Density,
        _ => return None,
    };
    let slice_index = match fields[2] {
        "-" => None,
        k => Some(k.parse().ok()?),
    };
    Some(LayerMeta {
        group,
        feature,
        slice_index,
    })
}

/// Inverse of [`encode_header`] + [`encode_payload`]. Returns the stack and config hash.
pub fn decode_stack(header: &str, payload: &[u8]) -> Result<(BevStack<f32>, u64), BevError> {
    let err = |m: String| BevError::Format(m);
    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return Err(err("missing stack header".into()));
    }
    let (mut rows, mut cols, mut layers, mut hash) = (None, None, None, None);
    let mut meta = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad number in `{line}`")));
        match (fields[0], fields.len()) {
            ("dtype", 2) if fields[1] == "f32le" => {}
            ("order", 2) if fields[1] == "planar-row-major" => {}
            ("rows", 2) => rows = Some(num(fields[1])?),
            ("cols", 2) => cols = Some(num(fields[1])?),
            ("layers", 2) => layers = Some(num(fields[1])?),
            ("config_hash", 2) => {
                hash = Some(u64::from_str_radix(fields[1], 16).map_err(|_| err(format!("bad hash `{line}`")))?)
            }
            ("layer", 5) => {
                if num(fields[1])? != meta.len() {
                    return Err(err(format!("layer out of order: `{line}`")));
                }
                meta.push(parse_meta(&fields[2..]).ok_or_else(|| err(format!("bad layer line `{line}`")))?);
            }
            _ => return Err(err(format!("unrecognized header line `{line}`"))),
        }
    }
    let (Some(rows), Some(cols), Some(n), Some(hash)) = (rows, cols, layers, hash) else {
        return Err(err("header lacks rows, cols, layers or config_hash".into()));
    };
    if meta.len() != n {
        return Err(err(format!("{n} layers declared, {} described", meta.len())));
    }
    let cells = rows * cols;
    if payload.len() != cells * n * 4 {
        return Err(err(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            cells * n * 4
        )));
    }
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let layers = if cells == 0 {
        vec![Vec::new(); n]
    } else {
        values.chunks(cells).map(<[f32]>::to_vec).collect()
    };
    Ok((
        BevStack {
            rows,
            cols,
            layers,
            meta,
        },
        hash,
    ))
}

/// Writes `<stem>.bin` and `<stem>.txt`; returns both paths.
pub fn export_stack<T: Real>(
    stack: &BevStack<T>,
    config_hash: u64,
    dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf), BevError> {
    fs::create_dir_all(dir)?;
    let bin = dir.join(format!("{stem}.bin"));
    let txt = dir.join(format!("{stem}.txt"));
    fs::write(&bin, encode_payload(stack))?;
    fs::write(&txt, encode_header(stack, config_hash))?;
    Ok((bin, txt))
}

pub fn import_stack(bin: &Path, header: &Path) -> Result<(BevStack<f32>, u64), BevError> {
    decode_stack(&fs::read_to_string(header)?, &fs::read(bin)?)
}

/// 8-bit grayscale view of one layer, `value * 255` rounded.
pub fn layer_image<T: Real>(stack: &BevStack<T>, layer: usize) -> GrayImage {
    let data = stack.layers[layer]
        .iter()
        .map(|v| (v.to_f64_lossy().clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    GrayImage::from_raw(stack.cols as u32, stack.rows as u32, data).expect("layer length matches grid")
}
