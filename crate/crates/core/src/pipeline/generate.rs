use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{config_hash, io_err, kitti_err, read_text, save_png, write_bytes, PipelineError};
use crate::geometry::CameraModel;
use crate::kitti_io::{
    sample_name, write_calib_file, write_label_file, write_plane_file, write_velodyne_bin, CalibrationSet, GroundPlane,
    KittiLayout, ObjectLabel, Part, VelodyneScan, OCCLUSION_LARGELY_OCCLUDED, OCCLUSION_VISIBLE,
};
use crate::occlusion::{draw_vertex_overlay, object_occluded, DepthMap, VertexVisibility};
use crate::scene_synth::{
    default_camera, default_camera_pose, footprints_overlap, generate_scene, ground_truth_labels, mix, raycast_lidar,
    render, LabeledObject, LidarRig, ObjectClass, Scene, SceneParams, SizeCategory,
};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const CONFIG_FILE: &str = "generate.toml";
pub const DEBUG_DIR: &str = "debug_occlusion";

/// Target labeled objects per sample, by class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub car: f64,
    pub pedestrian: f64,
}

impl Default for Mixture {
    /// 13 989 cars and 4 895 pedestrians over 10 000 samples.
    fn default() -> Self {
        Self {
            car: 1.3989,
            pedestrian: 0.4895,
        }
    }
}

impl FromStr for Mixture {
    type Err = PipelineError;

    /// `car=1.4,ped=0.49`; omitted classes are 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PipelineError::InvalidArgument(format!("mixture `{s}`: expected car=X,ped=Y"));
        let mut m = Mixture {
            car: 0.0,
            pedestrian: 0.0,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let value: f64 = value.trim().parse().map_err(|_| bad())?;
            if !(value >= 0.0 && value.is_finite()) {
                return Err(bad());
            }
            match key.trim() {
                "car" | "cars" | "Car" => m.car = value,
                "ped" | "pedestrian" | "pedestrians" | "Pedestrian" => m.pedestrian = value,
                _ => return Err(bad()),
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub samples: usize,
    /// A fresh scene is drawn every `reset_interval` samples.
    pub reset_interval: usize,
    pub seed: u64,
    pub mixture: Mixture,
    /// Bound on each object's per-sample random-walk step, meters.
    pub max_step: f64,
    /// Also emit heuristic-occluded objects, flagged as largely occluded.
    pub keep_occluded: bool,
    /// Write `debug_occlusion/NNNNNN.png` vertex overlays.
    pub debug_overlays: bool,
    /// Placement area, size ranges and tilt; the counts are ignored.
    pub scene: SceneParams,
    pub rig: LidarRig,
    pub camera: CameraModel<f64>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            samples: 1,
            reset_interval: 25,
            seed: 0,
            mixture: Mixture::default(),
            max_step: 0.5,
            keep_occluded: false,
            debug_overlays: false,
            scene: SceneParams::default(),
            rig: LidarRig::default(),
            camera: default_camera(),
        }
    }
}

impl GenerateConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::InvalidArgument(m.to_string()));
        if self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if self.reset_interval == 0 {
            return bad("reset_interval must be at least 1");
        }
        if !(self.max_step >= 0.0) {
            return bad("max_step must be non-negative");
        }
        self.rig.validate()?;
        self.camera
            .validate()
            .map_err(|e| PipelineError::InvalidArgument(e.to_string()))?;
        Ok(())
    }
}

/// Everything recorded for one sample index.
#[derive(Debug, Clone)]
pub struct Sample {
    pub index: usize,
    pub scan: VelodyneScan,
    pub image: RgbImage,
    pub depth: DepthMap<f64>,
    pub labels: Vec<ObjectLabel>,
    pub calib: CalibrationSet,
    pub plane: GroundPlane,
}

/// Oracle and heuristic results behind a sample's labels.
#[derive(Debug, Clone)]
pub struct SampleTruth {
    pub objects: Vec<LabeledObject>,
    pub heuristic: Vec<VertexVisibility<f64>>,
    pub heuristic_visible: Vec<bool>,
    /// Size-qualified objects considered for labeling.
    pub candidates: usize,
    /// Candidates where heuristic and oracle disagree.
    pub disagreements: usize,
}

/// Senses one scene: LIDAR sweep, render, ground truth and emitted labels.
pub fn synthesize_sample(index: usize, scene: &Scene, cfg: &GenerateConfig) -> (Sample, SampleTruth) {
    let pose = default_camera_pose();
    let scan = raycast_lidar(scene, &cfg.rig);
    let rendered = render(scene, &cfg.rig, &cfg.camera, &pose);
    let objects = ground_truth_labels(scene, &cfg.rig, &cfg.camera, &pose);

    let mut labels = Vec::new();
    let mut heuristic = Vec::with_capacity(objects.len());
    let mut heuristic_visible = Vec::with_capacity(objects.len());
    let (mut candidates, mut disagreements) = (0, 0);
    for o in &objects {
        let (occluded, vv) = object_occluded(&rendered.occluders, &o.vertices, &cfg.camera);
        heuristic.push(vv);
        heuristic_visible.push(!occluded);
        if o.size == SizeCategory::Filtered {
            continue;
        }
        candidates += 1;
        disagreements += usize::from(occluded == o.truly_visible);
        if !occluded || cfg.keep_occluded {
            let mut label = o.label.clone();
            label.occlusion = if occluded {
                OCCLUSION_LARGELY_OCCLUDED
            } else {
                OCCLUSION_VISIBLE
            };
            labels.push(label);
        }
    }
    let sample = Sample {
        index,
        scan,
        image: rendered.image,
        depth: rendered.depth,
        labels,
        calib: CalibrationSet::simulated(&cfg.camera, &pose.inverse()),
        plane: GroundPlane::flat(cfg.rig.mount_height),
    };
    let truth = SampleTruth {
        objects,
        heuristic,
        heuristic_visible,
        candidates,
        disagreements,
    };
    (sample, truth)
}

/// Writes the five KITTI parts of a sample.
pub fn write_sample(layout: &KittiLayout, sample: &Sample) -> Result<(), PipelineError> {
    let i = sample.index;
    let label_path = layout.path(Part::Label, i);
    write_bytes(
        &label_path,
        write_label_file(&sample.labels).map_err(kitti_err(&label_path))?,
    )?;
    let calib_path = layout.path(Part::Calib, i);
    write_bytes(
        &calib_path,
        write_calib_file(&sample.calib).map_err(kitti_err(&calib_path))?,
    )?;
    let plane_path = layout.path(Part::Plane, i);
    write_bytes(
        &plane_path,
        write_plane_file(&sample.plane).map_err(kitti_err(&plane_path))?,
    )?;
    write_bytes(&layout.path(Part::Velodyne, i), write_velodyne_bin(&sample.scan))?;
    save_png(&sample.image, &layout.path(Part::Image, i))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManifestRow {
    pub index: usize,
    pub interval: usize,
    pub cars: usize,
    pub pedestrians: usize,
    pub disagreements: usize,
    pub candidates: usize,
}

/// Parsed `manifest.txt`: key-value header then one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: Vec<(String, String)>,
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# cadet dataset manifest\n");
        for (k, v) in &self.header {
            writeln!(out, "{k} {v}").expect("String write");
        }
        out.push_str("columns index interval cars pedestrians disagreements candidates\n");
        for r in &self.rows {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                sample_name(r.index),
                r.interval,
                r.cars,
                r.pedestrians,
                r.disagreements,
                r.candidates
            )
            .expect("String write");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut header = Vec::new();
        let mut rows = Vec::new();
        let mut in_rows = false;
        for (n, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            if line.starts_with("columns ") {
                in_rows = true;
                continue;
            }
            if !in_rows {
                let (k, v) = line
                    .split_once(' ')
                    .ok_or_else(|| format!("line {}: expected `key value`", n + 1))?;
                header.push((k.to_string(), v.to_string()));
                continue;
            }
            let f: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| format!("line {}: non-numeric field", n + 1))?;
            let [index, interval, cars, pedestrians, disagreements, candidates] = f[..] else {
                return Err(format!("line {}: expected 6 fields, found {}", n + 1, f.len()));
            };
            rows.push(ManifestRow {
                index,
                interval,
                cars,
                pedestrians,
                disagreements,
                candidates,
            });
        }
        Ok(Self { header, rows })
    }
}

pub fn read_manifest(dataset: &Path) -> Result<Manifest, PipelineError> {
    let path = dataset.join(MANIFEST_FILE);
    Manifest::parse(&read_text(&path)?).map_err(|m| PipelineError::InvalidArgument(format!("{}: {m}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateSummary {
    pub samples: usize,
    pub cars: usize,
    pub pedestrians: usize,
    pub candidates: usize,
    pub disagreements: usize,
    pub seconds: f64,
}

impl GenerateSummary {
    pub fn disagreement_rate(&self) -> f64 {
        if self.candidates == 0 {
            0.0
        } else {
            self.disagreements as f64 / self.candidates as f64
        }
    }
}

/// Spawn rates from running label counts. Each class's Poisson mean is set
/// so that the expected labeled total after the next interval meets the
/// target, using the observed labels per spawned object-sample.
struct SpawnControl {
    target: [f64; 2],
    labeled: [f64; 2],
    exposure: [f64; 2],
    samples_done: usize,
}

impl SpawnControl {
    const PRIOR_YIELD: f64 = 0.6;
    const PRIOR_WEIGHT: f64 = 20.0;
    const CAP: f64 = 4.0;

    fn rates(&self, k: usize) -> [f64; 2] {
        std::array::from_fn(|c| {
            let y =
                (self.labeled[c] + Self::PRIOR_YIELD * Self::PRIOR_WEIGHT) / (self.exposure[c] + Self::PRIOR_WEIGHT);
            let y = y.max(0.05);
            let deficit = self.target[c] * (self.samples_done + k) as f64 - self.labeled[c];
            (deficit / (k as f64 * y)).clamp(0.0, Self::CAP * self.target[c] / y)
        })
    }

    fn record(&mut self, spawned: [usize; 2], k: usize, labeled: [usize; 2]) {
        for c in 0..2 {
            self.exposure[c] += (spawned[c] * k) as f64;
            self.labeled[c] += labeled[c] as f64;
        }
        self.samples_done += k;
    }
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> usize {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite mean").sample(rng) as usize
}

/// Moves every object by at most `max_step`, keeping it inside the area and
/// clear of the others; rejected steps leave the object in place.
fn random_walk(scene: &mut Scene, params: &SceneParams, max_step: f64, rng: &mut ChaCha8Rng) {
    for i in 0..scene.objects.len() {
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let r = max_step * rng.random::<f64>().sqrt();
        let mut moved = scene.objects[i];
        moved.center.x += r * angle.cos();
        moved.center.y += r * angle.sin();
        let inside = (params.x_range.0..params.x_range.1).contains(&moved.center.x)
            && (params.y_range.0..params.y_range.1).contains(&moved.center.y);
        let clear = scene
            .objects
            .iter()
            .enumerate()
            .all(|(j, o)| j == i || !footprints_overlap(o, &moved, params.clearance));
        if inside && clear {
            scene.objects[i] = moved;
        }
    }
}

fn class_counts(labels: &[ObjectLabel]) -> [usize; 2] {
    let count = |name: &str| labels.iter().filter(|l| l.class_name == name).count();
    [count("Car"), count("Pedestrian")]
}

/// Generates `cfg.samples` samples under `out_dir`.
pub fn generate_dataset(cfg: &GenerateConfig, out_dir: &Path) -> Result<GenerateSummary, PipelineError> {
    cfg.validate()?;
    let start = Instant::now();
    let layout = KittiLayout::new(out_dir);
    layout.create_dirs().map_err(io_err(out_dir))?;
    let debug_dir = out_dir.join(DEBUG_DIR);
    if cfg.debug_overlays {
        fs::create_dir_all(&debug_dir).map_err(io_err(&debug_dir))?;
    }

    let mut control = SpawnControl {
        target: [cfg.mixture.car, cfg.mixture.pedestrian],
        labeled: [0.0; 2],
        exposure: [0.0; 2],
        samples_done: 0,
    };
    let mut rows = Vec::with_capacity(cfg.samples);
    let (mut train, mut val) = (String::new(), String::new());

    let intervals = cfg.samples.div_ceil(cfg.reset_interval);
    for interval in 0..intervals {
        let first = interval * cfg.reset_interval;
        let k = cfg.reset_interval.min(cfg.samples - first);
        let stream = mix(cfg.seed, interval as u64);
        let mut count_rng = ChaCha8Rng::seed_from_u64(mix(stream, 1));
        let mut walk_rng = ChaCha8Rng::seed_from_u64(mix(stream, 2));
        let [car_rate, ped_rate] = control.rates(k);
        let params = SceneParams {
            cars: poisson(&mut count_rng, car_rate),
            pedestrians: poisson(&mut count_rng, ped_rate),
            ..cfg.scene.clone()
        };
        let mut scene = generate_scene(&params, stream)?;
        let mut labeled = [0; 2];

        for j in 0..k {
            let index = first + j;
            if j > 0 {
                random_walk(&mut scene, &params, cfg.max_step, &mut walk_rng);
            }
            scene.rng_seed = mix(stream, 3 + j as u64);
            let (sample, truth) = synthesize_sample(index, &scene, cfg);
            write_sample(&layout, &sample).map_err(|e| e.in_sample(index))?;
            if cfg.debug_overlays {
                let mut img = sample.image.clone();
                truth.heuristic.iter().for_each(|vv| draw_vertex_overlay(&mut img, vv));
                save_png(&img, &debug_dir.join(format!("{}.png", sample_name(index))))
                    .map_err(|e| e.in_sample(index))?;
            }
            let counts = class_counts(&sample.labels);
            labeled[0] += counts[0];
            labeled[1] += counts[1];
            rows.push(ManifestRow {
                index,
                interval,
                cars: counts[0],
                pedestrians: counts[1],
                disagreements: truth.disagreements,
                candidates: truth.candidates,
            });
            let split = if interval % 2 == 0 { &mut train } else { &mut val };
            writeln!(split, "{}", sample_name(index)).expect("String write");
        }
        control.record(
            [scene.count(ObjectClass::Car), scene.count(ObjectClass::Pedestrian)],
            k,
            labeled,
        );
    }

    let hex = |h: u64| format!("{h:016x}");
    let manifest = Manifest {
        header: vec![
            ("seed".into(), cfg.seed.to_string()),
            ("samples".into(), cfg.samples.to_string()),
            ("reset_interval".into(), cfg.reset_interval.to_string()),
            (
                "mixture".into(),
                format!("car={} pedestrian={}", cfg.mixture.car, cfg.mixture.pedestrian),
            ),
            ("config_hash".into(), hex(config_hash(cfg))),
            ("scene_hash".into(), hex(config_hash(&cfg.scene))),
            ("rig_hash".into(), hex(config_hash(&cfg.rig))),
            ("camera_hash".into(), hex(config_hash(&cfg.camera))),
        ],
        rows,
    };
    write_bytes(&out_dir.join(MANIFEST_FILE), manifest.render())?;
    write_bytes(
        &out_dir.join(CONFIG_FILE),
        toml::to_string(cfg).expect("config serializes"),
    )?;
    write_bytes(&out_dir.join("train.txt"), train)?;
    write_bytes(&out_dir.join("val.txt"), val)?;

    let sum = |f: fn(&ManifestRow) -> usize| manifest.rows.iter().map(f).sum::<usize>();
    Ok(GenerateSummary {
        samples: cfg.samples,
        cars: sum(|r| r.cars),
        pedestrians: sum(|r| r.pedestrians),
        candidates: sum(|r| r.candidates),
        disagreements: sum(|r| r.disagreements),
        seconds: start.elapsed().as_secs_f64(),
    })
}
