use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::world::{Porosity, World};
use super::{LidarRig, Scene, Surface};
use crate::geometry::{correct_attitude, sim_to_velodyne, Frame, PointCloud, Vec3};
use crate::kitti_io::VelodyneScan;

/// Constant reflectance written for every return.
pub const LIDAR_INTENSITY: f32 = 0.5;

/// One return in full precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarHit {
    /// Attitude-corrected Velodyne coordinates.
    pub point: Vec3<f64>,
    /// `azimuth_index * channels + channel`.
    pub ray: usize,
    pub surface: Surface,
}

/// SplitMix64 finalizer over two words; a stateless per-ray hash.
pub(crate) fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Casts one ray per (azimuth, channel) pair and returns every hit within range.
pub fn raycast_lidar_hits(scene: &Scene, rig: &LidarRig) -> Vec<LidarHit> {
    let world = World::new(scene, rig.mount_height);
    let leveling = scene.attitude.leveling_rotation();
    let elevations: Vec<f64> = rig.elevations().iter().map(|e| e.to_radians()).collect();
    let channels = elevations.len();
    let n_az = rig.azimuth_steps();
    let seed = scene.rng_seed;
    let noise =
        (rig.range_noise_sigma > 0.0).then(|| Normal::new(0.0, rig.range_noise_sigma).expect("sigma validated"));

    let raw: Vec<(Vec3<f64>, usize, Surface)> = (0..n_az)
        .into_par_iter()
        .flat_map_iter(|k| {
            let az = (k as f64 * rig.horizontal_step).to_radians();
            let world = &world;
            let elevations = &elevations;
            (0..channels).filter_map(move |ch| {
                let ray = k * channels + ch;
                let e = elevations[ch];
                let d_raw = Vec3::new(e.cos() * az.cos(), e.cos() * az.sin(), e.sin());
                // The attitude acts on simulator axes.
                let d = sim_to_velodyne(leveling.mul_vec(sim_to_velodyne(d_raw)));
                let pass = |body: usize| unit(mix(mix(seed, ray as u64), body as u64)) < world.bodies[body].porosity;
                let body = world.body_hit(Vec3::zeros(), d, &Porosity::Sampled(&pass));
                let ground = world.ground_hit(Vec3::zeros(), d);
                let (mut t, surface) = match (body, ground) {
                    (Some((tb, _)), Some(tg)) if tg < tb => (tg, Surface::Ground),
                    (Some((tb, i)), _) => (tb, Surface::Object(i)),
                    (None, Some(tg)) => (tg, Surface::Ground),
                    (None, None) => return None,
                };
                if let Some(n) = noise {
                    t += n.sample(&mut ChaCha8Rng::seed_from_u64(mix(seed ^ 0x006e_6f69_7365, ray as u64)));
                }
                (t > 0.0 && t <= rig.max_range).then(|| {
                    // Express the hit as the tilted sensor would report it.
                    let raw = leveling.transpose().mul_vec(sim_to_velodyne(d.scale(t)));
                    (raw, ray, surface)
                })
            })
        })
        .collect();

    let cloud = PointCloud::new(Frame::SimVehicle, raw.iter().map(|r| r.0).collect());
    let level = correct_attitude(&cloud, &scene.attitude);
    level
        .points
        .into_iter()
        .zip(raw)
        .map(|(p, (_, ray, surface))| LidarHit {
            point: sim_to_velodyne(p),
            ray,
            surface,
        })
        .collect()
}

/// Full sweep as a KITTI scan (f32 coordinates, constant intensity).
pub fn raycast_lidar(scene: &Scene, rig: &LidarRig) -> VelodyneScan {
    let points: Vec<Vec3<f32>> = raycast_lidar_hits(scene, rig).iter().map(|h| h.point.cast()).collect();
    let intensity = vec![LIDAR_INTENSITY; points.len()];
    VelodyneScan::new(points, intensity).expect("lengths match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Attitude;
    use crate::kitti_io::Dimensions;
    use crate::scene_synth::{ObjectClass, SceneObject};

    fn sparse_rig() -> LidarRig {
        LidarRig {
            channels: 16,
            vertical_fov: (-25.0, 5.0),
            horizontal_step: 1.0,
            ..LidarRig::default()
        }
    }

    #[test]
    fn empty_scene_hits_ground_at_closed_form_range() {
        let rig = sparse_rig();
        let hits = raycast_lidar_hits(&Scene::empty(1), &rig);
        let elev = rig.elevations();
        let mut down = 0;
        for h in &hits {
            let e = elev[h.ray % 16].to_radians();
            assert!(e < 0.0);
            let expected = rig.mount_height / e.sin().abs();
            assert!((h.point.norm() - expected).abs() < 1e-9);
            assert_eq!(h.surface, Surface::Ground);
            down += 1;
        }
        // Downward channels reaching the ground inside 70 m.
        let reach = elev
            .iter()
            .filter(|e| **e < 0.0 && rig.mount_height / e.to_radians().sin().abs() <= 70.0)
            .count();
        assert_eq!(down, reach * 360);
    }

    #[test]
    fn box_ahead_returns_front_face() {
        let mut scene = Scene::empty(0);
        let dims = Dimensions {
            height: 3.0,
            width: 2.0,
            length: 4.0,
        };
        scene
            .objects
            .push(SceneObject::on_ground(ObjectClass::Car, 10.0, 0.0, dims, 0.0));
        let rig = LidarRig {
            channels: 1,
            vertical_fov: (0.0, 0.0),
            horizontal_step: 1.0,
            ..LidarRig::default()
        };
        let hits = raycast_lidar_hits(&scene, &rig);
        let forward = hits.iter().find(|h| h.ray == 0).unwrap();
        assert!((forward.point.x - (10.0 - 2.0)).abs() < 1e-12);
        assert_eq!(forward.surface, Surface::Object(0));
    }

    #[test]
    fn points_lie_on_surfaces_and_within_range() {
        let mut scene =
            crate::scene_synth::generate_scene(&crate::scene_synth::SceneParams::with_counts(5, 3), 9).unwrap();
        scene.attitude = Attitude::new(0.04, -0.03, 0.0).unwrap();
        let rig = sparse_rig();
        let world = World::new(&scene, rig.mount_height);
        let hits = raycast_lidar_hits(&scene, &rig);
        assert!(hits.iter().any(|h| matches!(h.surface, Surface::Object(_))));
        for h in hits {
            assert!(world.surface_distance(h.point) < 1e-6);
            assert!(h.point.norm() <= rig.max_range + 1e-9);
        }
    }

    #[test]
    fn fully_porous_fence_is_invisible() {
        let base = crate::scene_synth::generate_scene(&crate::scene_synth::SceneParams::with_counts(3, 1), 4).unwrap();
        let mut fenced = base.clone();
        fenced.objects.push(SceneObject {
            class_name: ObjectClass::Fence,
            center: Vec3::new(5.0, 0.0, 1.0),
            dimensions: Dimensions {
                height: 2.0,
                width: 0.05,
                length: 10.0,
            },
            yaw: std::f64::consts::FRAC_PI_2,
            porosity: 1.0,
        });
        assert_eq!(
            raycast_lidar(&base, &sparse_rig()),
            raycast_lidar(&fenced, &sparse_rig())
        );
        fenced.objects.last_mut().unwrap().porosity = 0.0;
        assert_ne!(
            raycast_lidar(&base, &sparse_rig()),
            raycast_lidar(&fenced, &sparse_rig())
        );
    }

    #[test]
    fn noise_is_seeded() {
        let rig = LidarRig {
            range_noise_sigma: 0.02,
            ..sparse_rig()
        };
        let s = Scene::empty(77);
        assert_eq!(raycast_lidar(&s, &rig), raycast_lidar(&s, &rig));
        assert_ne!(raycast_lidar(&s, &rig), raycast_lidar(&s, &sparse_rig()));
    }
}
