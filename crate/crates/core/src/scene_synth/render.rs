use image::{Rgb, RgbImage};
use rayon::prelude::*;

use super::world::{nearest_hit, Body, Porosity, World};
use super::{LidarRig, ObjectClass, Scene};
use crate::geometry::{velodyne_to_camera_transform, CameraModel, Frame, RigidTransform, Vec3, MIN_PROJECTABLE_DEPTH};
use crate::occlusion::DepthMap;

/// What a pixel ray hit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Surface {
    Sky,
    Ground,
    /// Index into `Scene::objects`.
    Object(usize),
}

/// Camera-side render products.
#[derive(Debug, Clone)]
pub struct Rendered {
    /// z-depth of the nearest surface, `+inf` for sky.
    pub depth: DepthMap<f64>,
    /// Same as `depth` with the ground plane removed.
    pub occluders: DepthMap<f64>,
    /// Row-major surface ids.
    pub surfaces: Vec<Surface>,
    /// Flat class-coloured image.
    pub image: RgbImage,
}

pub const SKY_COLOR: Rgb<u8> = Rgb([135, 206, 235]);
pub const GROUND_COLOR: Rgb<u8> = Rgb([105, 105, 105]);

pub fn class_color(class: ObjectClass) -> Rgb<u8> {
    match class {
        ObjectClass::Car => Rgb([200, 30, 30]),
        ObjectClass::Pedestrian => Rgb([240, 190, 40]),
        ObjectClass::Fence => Rgb([70, 150, 70]),
        ObjectClass::Wall => Rgb([150, 120, 90]),
    }
}

/// Camera at the sensor origin looking along Velodyne +x (CameraRect to Velodyne).
pub fn default_camera_pose() -> RigidTransform<f64> {
    velodyne_to_camera_transform(&RigidTransform::identity(Frame::CameraRect, Frame::CameraRect))
        .expect("axis permutation is a rotation")
        .inverse()
}

/// Pixel rectangle `(u0, u1, v0, v1)` (inclusive) that can contain the body,
/// or the whole image when the body reaches behind the camera.
fn screen_rect(
    body: &Body,
    cam: &CameraModel<f64>,
    world_to_cam: &RigidTransform<f64>,
) -> (usize, usize, usize, usize) {
    let full = (0, cam.width as usize - 1, 0, cam.height as usize - 1);
    let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in body.shape.corners() {
        let p = world_to_cam.apply(c);
        if p.z <= MIN_PROJECTABLE_DEPTH {
            return full;
        }
        let (u, v) = (cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy);
        u0 = u0.min(u);
        u1 = u1.max(u);
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    let clamp = |x: f64, hi: u32| x.clamp(0.0, f64::from(hi - 1)) as usize;
    if u1 < -1.0 || v1 < -1.0 || u0 > f64::from(cam.width) + 1.0 || v0 > f64::from(cam.height) + 1.0 {
        return (1, 0, 1, 0);
    }
    (
        clamp(u0.floor() - 1.0, cam.width),
        clamp(u1.ceil() + 1.0, cam.width),
        clamp(v0.floor() - 1.0, cam.height),
        clamp(v1.ceil() + 1.0, cam.height),
    )
}

/// Renders the scene from a camera whose pose maps CameraRect into the
/// sensor-centred Velodyne frame. Rays pass through pixel centres.
pub fn render(scene: &Scene, rig: &LidarRig, cam: &CameraModel<f64>, pose: &RigidTransform<f64>) -> Rendered {
    let world = World::new(scene, rig.mount_height);
    let world_to_cam = pose.inverse();
    let rects: Vec<_> = world
        .bodies
        .iter()
        .map(|b| screen_rect(b, cam, &world_to_cam))
        .collect();
    let (w, h) = (cam.width as usize, cam.height as usize);
    let origin = pose.translation();
    let rot = *pose.rotation();

    let rows: Vec<Vec<(f64, f64, Surface)>> = (0..h)
        .into_par_iter()
        .map(|v| {
            let in_row: Vec<(&Body, usize, usize)> = world
                .bodies
                .iter()
                .zip(&rects)
                .filter(|(_, r)| r.2 <= v && v <= r.3)
                .map(|(b, r)| (b, r.0, r.1))
                .collect();
            (0..w)
                .map(|u| {
                    let d_cam = Vec3::new(
                        (u as f64 + 0.5 - cam.cx) / cam.fx,
                        (v as f64 + 0.5 - cam.cy) / cam.fy,
                        1.0,
                    );
                    let dir = rot.mul_vec(d_cam);
                    let candidates = in_row
                        .iter()
                        .filter(|(_, a, b)| *a <= u && u <= *b)
                        .map(|(body, _, _)| *body);
                    let body = nearest_hit(candidates, origin, dir, &Porosity::HoleGrid);
                    let ground = world.ground_hit(origin, dir);
                    let occluder = body.map_or(f64::INFINITY, |(t, _)| t);
                    match (body, ground) {
                        (Some((tb, _)), Some(tg)) if tg < tb => (tg, occluder, Surface::Ground),
                        (Some((tb, i)), _) => (tb, occluder, Surface::Object(i)),
                        (None, Some(tg)) => (tg, occluder, Surface::Ground),
                        (None, None) => (f64::INFINITY, occluder, Surface::Sky),
                    }
                })
                .collect()
        })
        .collect();

    let mut depth = Vec::with_capacity(w * h);
    let mut occluders = Vec::with_capacity(w * h);
    let mut surfaces = Vec::with_capacity(w * h);
    for (d, o, s) in rows.into_iter().flatten() {
        depth.push(d);
        occluders.push(o);
        surfaces.push(s);
    }
    let image = RgbImage::from_fn(cam.width, cam.height, |u, v| {
        match surfaces[v as usize * w + u as usize] {
            Surface::Sky => SKY_COLOR,
            Surface::Ground => GROUND_COLOR,
            Surface::Object(i) => class_color(scene.objects[i].class_name),
        }
    });
    Rendered {
        depth: DepthMap::new(w, h, depth).expect("ray depths are positive"),
        occluders: DepthMap::new(w, h, occluders).expect("ray depths are positive"),
        surfaces,
        image,
    }
}

/// Full z-depth map (ground included).
pub fn render_depth(
    scene: &Scene,
    rig: &LidarRig,
    cam: &CameraModel<f64>,
    pose: &RigidTransform<f64>,
) -> DepthMap<f64> {
    render(scene, rig, cam, pose).depth
}
