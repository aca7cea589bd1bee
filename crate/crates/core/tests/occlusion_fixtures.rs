use std::f64::consts::FRAC_PI_2;

use cadet_core::geometry::{project, Vec3};
use cadet_core::kitti_io::{box_corners, Dimensions};
use cadet_core::occlusion::{object_occluded, DepthMap};
use cadet_core::pipeline::{synthesize_sample, GenerateConfig};
use cadet_core::scene_synth::{default_camera, ObjectClass, Scene, SceneObject};

const CAR: Dimensions = Dimensions {
    height: 1.5,
    width: 1.8,
    length: 4.2,
};

fn car_vertices() -> [Vec3<f64>; 8] {
    box_corners(Vec3::new(1.0, 1.7, 12.0), CAR, 0.3)
}

/// Empty depth map with an occluder at 5 m painted over the given vertices.
fn painted(vertices: &[Vec3<f64>; 8], covered: &[usize]) -> DepthMap<f64> {
    let cam = default_camera();
    let mut dm = DepthMap::sky(cam.width as usize, cam.height as usize);
    for &i in covered {
        let p = project(vertices[i], &cam).unwrap();
        dm.set(p.u.floor() as usize, p.v.floor() as usize, 5.0);
    }
    dm
}

#[test]
fn three_of_eight_is_visible() {
    let v = car_vertices();
    let (occluded, vv) = object_occluded(&painted(&v, &[0, 3, 6]), &v, &default_camera());
    assert_eq!(vv.occluded_count(), 3);
    assert!(!occluded);
}

#[test]
fn four_of_eight_is_occluded() {
    let v = car_vertices();
    let (occluded, vv) = object_occluded(&painted(&v, &[0, 3, 6, 7]), &v, &default_camera());
    assert_eq!(vv.occluded_count(), 4);
    assert!(occluded);
}

fn fence_scene(porosity: Option<f64>) -> Scene {
    let mut scene = Scene::empty(3);
    if let Some(porosity) = porosity {
        scene.objects.push(SceneObject {
            class_name: ObjectClass::Fence,
            center: Vec3::new(5.0, 0.0, 1.0),
            dimensions: Dimensions {
                height: 2.0,
                width: 0.05,
                length: 14.0,
            },
            yaw: FRAC_PI_2,
            porosity,
        });
    }
    scene
        .objects
        .push(SceneObject::on_ground(ObjectClass::Car, 10.0, -2.5, CAR, 0.3));
    scene
        .objects
        .push(SceneObject::on_ground(ObjectClass::Car, 12.0, 2.8, CAR, -0.4));
    scene
}

fn heuristic_counts(scene: &Scene) -> (usize, Vec<usize>) {
    let (sample, truth) = synthesize_sample(0, scene, &GenerateConfig::default());
    (
        sample.labels.len(),
        truth.heuristic.iter().map(|v| v.occluded_count()).collect(),
    )
}

#[test]
fn cars_behind_chain_fence_stay_labeled() {
    let (open_labels, open) = heuristic_counts(&fence_scene(None));
    let (labels, fenced) = heuristic_counts(&fence_scene(Some(0.7)));
    assert_eq!(open_labels, 2);
    assert_eq!(labels, 2);
    assert_eq!(open, vec![1, 1]);
    // The fence hides extra vertices but never four.
    assert_eq!(fenced, vec![2, 3]);
}

#[test]
fn solid_fence_hides_both_cars() {
    let (labels, counts) = heuristic_counts(&fence_scene(Some(0.0)));
    assert_eq!(labels, 0);
    assert_eq!(counts, vec![8, 8]);
}
