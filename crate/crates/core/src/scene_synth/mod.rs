//! Box-world scene generator used as the data source and as the oracle.
//!
//! Objects are oriented boxes standing on a flat ground plane (`z = 0` in
//! SimWorld). `SceneObject::center` is the geometric centre of the physical
//! body. The ego vehicle sits at the SimWorld origin with the LIDAR and the
//! camera co-located at `mount_height` above the ground.
//!
//! All sensor simulation works in the gravity-aligned Velodyne frame whose
//! origin is the sensor ([`World`]).

mod raycast;
mod render;
mod truth;
mod world;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Attitude, CameraModel, GeometryError, Vec3};
use crate::kitti_io::Dimensions;

pub(crate) use raycast::mix;
pub use raycast::{raycast_lidar, raycast_lidar_hits, LidarHit, LIDAR_INTENSITY};
pub use render::{default_camera_pose, render, render_depth, Rendered, Surface};
pub use truth::{
    ground_truth_labels, label_dimensions, LabeledObject, SizeCategory, LARGE_MIN_HEIGHT_PX, SMALL_MIN_HEIGHT_PX,
};
pub use world::{Body, OrientedBox, World, FENCE_HOLE_PITCH};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("could not place {class:?} #{placed} after {attempts} attempts")]
    PlacementFailure {
        class: ObjectClass,
        placed: usize,
        attempts: usize,
    },
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("scene file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectClass {
    Car,
    Pedestrian,
    Fence,
    Wall,
}

impl ObjectClass {
    /// KITTI class name for labeled classes.
    pub fn kitti_name(self) -> Option<&'static str> {
        match self {
            ObjectClass::Car => Some("Car"),
            ObjectClass::Pedestrian => Some("Pedestrian"),
            _ => None,
        }
    }

    pub fn is_labeled(self) -> bool {
        self.kitti_name().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub class_name: ObjectClass,
    /// Geometric centre in SimWorld meters.
    pub center: Vec3<f64>,
    pub dimensions: Dimensions,
    /// SimWorld heading in radians (rotates +x toward +y).
    pub yaw: f64,
    /// Fraction of rays that pass through; 0 for solid objects.
    pub porosity: f64,
}

impl SceneObject {
    /// Solid object resting on the ground.
    pub fn on_ground(class_name: ObjectClass, x: f64, y: f64, dimensions: Dimensions, yaw: f64) -> Self {
        Self {
            class_name,
            center: Vec3::new(x, y, dimensions.height / 2.0),
            dimensions,
            yaw,
            porosity: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let d = self.dimensions;
        if !(d.height > 0.0 && d.width > 0.0 && d.length > 0.0) {
            return Err(SceneError::Invalid(format!(
                "{:?} has non-positive dimensions",
                self.class_name
            )));
        }
        if !(0.0..=1.0).contains(&self.porosity) {
            return Err(SceneError::Invalid(format!(
                "porosity {} outside [0, 1]",
                self.porosity
            )));
        }
        if self.class_name.is_labeled() && self.porosity != 0.0 {
            return Err(SceneError::Invalid(format!("{:?} must be solid", self.class_name)));
        }
        if !(self.center.x.is_finite()
            && self.center.y.is_finite()
            && self.center.z.is_finite()
            && self.yaw.is_finite())
        {
            return Err(SceneError::Invalid("non-finite pose".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarRig {
    pub channels: u32,
    /// Lowest and highest channel elevation in degrees.
    pub vertical_fov: (f64, f64),
    /// Azimuth increment in degrees.
    pub horizontal_step: f64,
    pub max_range: f64,
    pub mount_height: f64,
    /// Standard deviation of Gaussian range noise in meters; 0 disables it.
    #[serde(default)]
    pub range_noise_sigma: f64,
}

impl Default for LidarRig {
    fn default() -> Self {
        Self {
            channels: 32,
            vertical_fov: (-30.0, 10.0),
            horizontal_step: 0.18,
            max_range: 70.0,
            mount_height: 1.7,
            range_noise_sigma: 0.0,
        }
    }
}

impl LidarRig {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Invalid(m));
        if self.channels == 0 {
            return bad("rig needs at least one channel".into());
        }
        if !(self.max_range > 0.0) {
            return bad(format!("max_range {} must be positive", self.max_range));
        }
        if !(self.horizontal_step > 0.0 && self.horizontal_step <= 360.0) {
            return bad(format!("horizontal_step {} outside (0, 360]", self.horizontal_step));
        }
        let (lo, hi) = self.vertical_fov;
        if !(lo <= hi && lo >= -90.0 && hi <= 90.0) {
            return bad(format!("vertical_fov ({lo}, {hi}) invalid"));
        }
        if !(self.mount_height > 0.0) {
            return bad(format!("mount_height {} must be positive", self.mount_height));
        }
        if !(self.range_noise_sigma >= 0.0) {
            return bad(format!(
                "range_noise_sigma {} must be non-negative",
                self.range_noise_sigma
            ));
        }
        Ok(())
    }

    /// Channel elevations in degrees, evenly spaced and inclusive of both ends.
    pub fn elevations(&self) -> Vec<f64> {
        let (lo, hi) = self.vertical_fov;
        if self.channels == 1 {
            return vec![lo];
        }
        let step = (hi - lo) / f64::from(self.channels - 1);
        (0..self.channels).map(|k| lo + step * f64::from(k)).collect()
    }

    pub fn azimuth_steps(&self) -> usize {
        (360.0 / self.horizontal_step).round().max(1.0) as usize
    }
}

/// KITTI-shaped default camera: 1242x375, f = 700, centred principal point.
pub fn default_camera() -> CameraModel<f64> {
    CameraModel::centered(700.0, 1242, 375).expect("default intrinsics are valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    pub attitude: Attitude<f64>,
    pub rng_seed: u64,
}

impl Scene {
    pub fn empty(rng_seed: u64) -> Self {
        Self {
            objects: Vec::new(),
            attitude: Attitude::default(),
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        Attitude::new(self.attitude.pitch, self.attitude.roll, self.attitude.yaw)?;
        self.objects.iter().try_for_each(SceneObject::validate)
    }

    pub fn count(&self, class: ObjectClass) -> usize {
        self.objects.iter().filter(|o| o.class_name == class).count()
    }
}

/// Size ranges `(min, max)` for the randomized physical bodies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeRange {
    pub height: (f64, f64),
    pub width: (f64, f64),
    pub length: (f64, f64),
}

impl SizeRange {
    fn sample(&self, rng: &mut impl Rng) -> Dimensions {
        let mut pick = |(a, b): (f64, f64)| if a < b { rng.random_range(a..b) } else { a };
        Dimensions {
            height: pick(self.height),
            width: pick(self.width),
            length: pick(self.length),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub cars: usize,
    pub pedestrians: usize,
    /// SimWorld placement bounds for object centres.
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub car_size: SizeRange,
    pub pedestrian_size: SizeRange,
    /// Minimum gap between footprints in meters.
    pub clearance: f64,
    /// Ego pitch and roll are uniform in `[-max_tilt, max_tilt]` radians.
    pub max_tilt: f64,
    pub max_attempts: usize,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            cars: 0,
            pedestrians: 0,
            x_range: (6.0, 45.0),
            y_range: (-16.0, 16.0),
            car_size: SizeRange {
                height: (1.4, 1.65),
                width: (1.65, 1.9),
                length: (3.8, 4.8),
            },
            pedestrian_size: SizeRange {
                height: (1.6, 1.9),
                width: (0.45, 0.65),
                length: (0.5, 0.8),
            },
            clearance: 0.3,
            max_tilt: 0.03,
            max_attempts: 1000,
        }
    }
}

impl SceneParams {
    pub fn with_counts(cars: usize, pedestrians: usize) -> Self {
        Self {
            cars,
            pedestrians,
            ..Self::default()
        }
    }

    /// Draws a total of `n` objects, each a car with probability `car_share`.
    pub fn from_mixture(n: usize, car_share: f64, rng: &mut impl Rng) -> Self {
        let cars = (0..n).filter(|_| rng.random_bool(car_share.clamp(0.0, 1.0))).count();
        Self::with_counts(cars, n - cars)
    }
}

/// Axis-aligned footprint `(xmin, xmax, ymin, ymax)` of the labeled extent.
pub fn footprint(obj: &SceneObject) -> (f64, f64, f64, f64) {
    let d = label_dimensions(obj.class_name, obj.dimensions);
    let (c, s) = (obj.yaw.cos().abs(), obj.yaw.sin().abs());
    let hx = c * d.length / 2.0 + s * d.width / 2.0;
    let hy = s * d.length / 2.0 + c * d.width / 2.0;
    (
        obj.center.x - hx,
        obj.center.x + hx,
        obj.center.y - hy,
        obj.center.y + hy,
    )
}

pub fn footprints_overlap(a: &SceneObject, b: &SceneObject, clearance: f64) -> bool {
    let (ax0, ax1, ay0, ay1) = footprint(a);
    let (bx0, bx1, by0, by1) = footprint(b);
    ax0 < bx1 + clearance && bx0 < ax1 + clearance && ay0 < by1 + clearance && by0 < ay1 + clearance
}

/// Samples a non-overlapping scene. Cars are placed before pedestrians.
pub fn generate_scene(params: &SceneParams, seed: u64) -> Result<Scene, SceneError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tilt = params.max_tilt.abs().min(PI);
    let sample_tilt = |rng: &mut ChaCha8Rng| {
        if tilt > 0.0 {
            rng.random_range(-tilt..=tilt)
        } else {
            0.0
        }
    };
    let pitch = sample_tilt(&mut rng);
    let roll = sample_tilt(&mut rng);
    let mut scene = Scene {
        objects: Vec::with_capacity(params.cars + params.pedestrians),
        attitude: Attitude::new(pitch, roll, 0.0)?,
        rng_seed: seed,
    };
    let plan = [
        (ObjectClass::Car, params.cars, params.car_size),
        (ObjectClass::Pedestrian, params.pedestrians, params.pedestrian_size),
    ];
    for (class, count, sizes) in plan {
        for placed in 0..count {
            let obj =
                place_one(&mut rng, params, class, &sizes, &scene.objects).ok_or(SceneError::PlacementFailure {
                    class,
                    placed,
                    attempts: params.max_attempts,
                })?;
            scene.objects.push(obj);
        }
    }
    Ok(scene)
}

fn place_one(
    rng: &mut ChaCha8Rng,
    params: &SceneParams,
    class: ObjectClass,
    sizes: &SizeRange,
    existing: &[SceneObject],
) -> Option<SceneObject> {
    for _ in 0..params.max_attempts {
        let dims = sizes.sample(rng);
        let x = rng.random_range(params.x_range.0..params.x_range.1);
        let y = rng.random_range(params.y_range.0..params.y_range.1);
        let yaw = rng.random_range(-PI..PI);
        let obj = SceneObject::on_ground(class, x, y, dims, yaw);
        if !existing.iter().any(|o| footprints_overlap(o, &obj, params.clearance)) {
            return Some(obj);
        }
    }
    None
}

/// Text scene description: objects, rig and camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub scene: Scene,
    pub rig: LidarRig,
    pub camera: CameraModel<f64>,
}

impl SceneFile {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene always serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, SceneError> {
        let f: Self = toml::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;
        f.scene.validate()?;
        f.rig.validate()?;
        let cam = CameraModel::new(
            f.camera.fx,
            f.camera.fy,
            f.camera.cx,
            f.camera.cy,
            f.camera.width,
            f.camera.height,
        )?;
        if cam != f.camera {
            return Err(SceneError::Parse(
                "camera projection matrix disagrees with intrinsics".into(),
            ));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_counts_give_empty_scene() {
        let s = generate_scene(&SceneParams::with_counts(0, 0), 3).unwrap();
        assert!(s.objects.is_empty());
    }

    #[test]
    fn same_seed_same_scene() {
        let p = SceneParams::with_counts(4, 3);
        assert_eq!(generate_scene(&p, 11).unwrap(), generate_scene(&p, 11).unwrap());
        assert_ne!(generate_scene(&p, 11).unwrap(), generate_scene(&p, 12).unwrap());
    }

    #[test]
    fn placed_objects_do_not_overlap() {
        let p = SceneParams::with_counts(8, 6);
        for seed in 0..20 {
            let s = generate_scene(&p, seed).unwrap();
            s.validate().unwrap();
            assert_eq!(s.count(ObjectClass::Car), 8);
            for (i, a) in s.objects.iter().enumerate() {
                assert!((p.x_range.0..p.x_range.1).contains(&a.center.x));
                assert!((-PI..PI).contains(&a.yaw));
                for b in &s.objects[i + 1..] {
                    assert!(!footprints_overlap(a, b, p.clearance));
                }
            }
        }
    }

    #[test]
    fn crowded_area_fails_placement() {
        let mut p = SceneParams::with_counts(30, 0);
        p.x_range = (10.0, 12.0);
        p.y_range = (-1.0, 1.0);
        p.max_attempts = 50;
        assert!(matches!(
            generate_scene(&p, 1),
            Err(SceneError::PlacementFailure { placed: 1, .. })
        ));
    }

    #[test]
    fn rig_elevations_span_fov() {
        let rig = LidarRig::default();
        let e = rig.elevations();
        assert_eq!(e.len(), 32);
        assert_eq!(e[0], -30.0);
        assert!((e[31] - 10.0).abs() < 1e-12);
        assert_eq!(rig.azimuth_steps(), 2000);
    }

    #[test]
    fn scene_file_round_trip() {
        let mut scene = generate_scene(&SceneParams::with_counts(3, 2), 5).unwrap();
        scene.objects.push(SceneObject {
            class_name: ObjectClass::Fence,
            center: Vec3::new(7.0, 0.1, 1.0),
            dimensions: Dimensions {
                height: 2.0,
                width: 0.05,
                length: 8.0,
            },
            yaw: PI / 2.0,
            porosity: 0.7,
        });
        let f = SceneFile {
            scene,
            rig: LidarRig::default(),
            camera: default_camera(),
        };
        let text = f.to_toml();
        assert_eq!(SceneFile::from_toml(&text).unwrap(), f);
    }

    #[test]
    fn invalid_objects_rejected() {
        let mut s = Scene::empty(0);
        let dims = Dimensions {
            height: 1.5,
            width: 1.8,
            length: 4.0,
        };
        let mut car = SceneObject::on_ground(ObjectClass::Car, 10.0, 0.0, dims, 0.0);
        car.porosity = 0.5;
        s.objects.push(car);
        assert!(s.validate().is_err());
    }
}
