use super::world::World;
use super::{LidarRig, ObjectClass, Scene};
use crate::geometry::{sim_to_velodyne, CameraModel, RigidTransform, Vec3, MIN_PROJECTABLE_DEPTH};
use crate::kitti_io::{box_corners, compute_alpha, BBox2d, Dimensions, ObjectLabel, OCCLUSION_VISIBLE};
use crate::occlusion::OCCLUDED_VERTEX_THRESHOLD;
use crate::scalar::wrap_to_pi;

/// Minimum clipped 2D box height for the large (easy) category.
pub const LARGE_MIN_HEIGHT_PX: f64 = 40.0;
/// Minimum clipped 2D box height for the small (moderate/hard) category.
pub const SMALL_MIN_HEIGHT_PX: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SizeCategory {
    Large,
    Small,
    Filtered,
}

impl SizeCategory {
    pub fn from_height(px: f64) -> Self {
        if px >= LARGE_MIN_HEIGHT_PX {
            SizeCategory::Large
        } else if px >= SMALL_MIN_HEIGHT_PX {
            SizeCategory::Small
        } else {
            SizeCategory::Filtered
        }
    }
}

/// Annotated extent for a physical body. The label box is slightly larger
/// than the body on every side except the bottom, which stays on the ground,
/// so its vertices sit in free space like the corners of a real car's
/// cuboid annotation.
pub fn label_dimensions(class: ObjectClass, body: Dimensions) -> Dimensions {
    let (dh, dw, dl) = match class {
        ObjectClass::Car => (0.1, 0.3, 0.5),
        ObjectClass::Pedestrian => (0.05, 0.3, 0.3),
        ObjectClass::Fence | ObjectClass::Wall => (0.0, 0.0, 0.0),
    };
    Dimensions {
        height: body.height + dh,
        width: body.width + dw,
        length: body.length + dl,
    }
}

/// Ground truth for one labeled-class object in view.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledObject {
    /// Index into `Scene::objects`.
    pub object_index: usize,
    pub label: ObjectLabel,
    /// Label box corners in the rectified camera frame (KITTI order).
    pub vertices: [Vec3<f64>; 8],
    /// Unclipped bounds of the projected vertices.
    pub unclipped: BBox2d,
    /// Per-vertex line of sight, same order as `vertices`.
    pub vertex_visible: [bool; 8],
    /// Line of sight to the box centre, ignoring the object's own body.
    pub centre_visible: bool,
    /// Fewer than [`OCCLUDED_VERTEX_THRESHOLD`] vertices hidden.
    pub truly_visible: bool,
    pub size: SizeCategory,
}

fn project(p: Vec3<f64>, cam: &CameraModel<f64>) -> (f64, f64) {
    (cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy)
}

/// Labels for every car and pedestrian that lies fully in front of the
/// camera and projects at least partly into the image.
///
/// Visibility is an exact line-of-sight test from the camera to each label
/// vertex and to the box centre against the physical bodies (ground
/// excluded, fence holes honoured). The object's own body can hide its
/// vertices but not its centre. Points outside the image count as hidden.
/// `truly_visible` applies the depth-map vertex rule to the exact vertex
/// results; the centre is reported alongside.
pub fn ground_truth_labels(
    scene: &Scene,
    rig: &LidarRig,
    cam: &CameraModel<f64>,
    pose: &RigidTransform<f64>,
) -> Vec<LabeledObject> {
    let world = World::new(scene, rig.mount_height);
    let to_cam = pose.inverse();
    let eye = pose.translation();
    let (w, h) = (f64::from(cam.width), f64::from(cam.height));
    let mut out = Vec::new();

    for (index, obj) in scene.objects.iter().enumerate() {
        let Some(class_name) = obj.class_name.kitti_name() else {
            continue;
        };
        let dims = label_dimensions(obj.class_name, obj.dimensions);
        let bottom = sim_to_velodyne(Vec3::new(obj.center.x, obj.center.y, -rig.mount_height));
        let heading = Vec3::new((-obj.yaw).cos(), (-obj.yaw).sin(), 0.0);
        let location = to_cam.apply(bottom);
        let hc = to_cam.apply_vector(heading);
        let rotation_y = wrap_to_pi((-hc.z).atan2(hc.x));
        let vertices = box_corners(location, dims, rotation_y);
        if vertices.iter().any(|v| v.z <= MIN_PROJECTABLE_DEPTH) {
            continue;
        }
        let uv: Vec<(f64, f64)> = vertices.iter().map(|v| project(*v, cam)).collect();
        let unclipped = BBox2d {
            left: uv.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
            right: uv.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
            top: uv.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            bottom: uv.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        };
        let bbox2d = BBox2d {
            left: unclipped.left.clamp(0.0, w - 1.0),
            right: unclipped.right.clamp(0.0, w - 1.0),
            top: unclipped.top.clamp(0.0, h - 1.0),
            bottom: unclipped.bottom.clamp(0.0, h - 1.0),
        };
        if !(bbox2d.left < bbox2d.right && bbox2d.top < bbox2d.bottom) {
            continue;
        }
        let truncation = (1.0 - bbox2d.area() / unclipped.area()).clamp(0.0, 1.0);

        let centre = location + Vec3::new(0.0, -dims.height / 2.0, 0.0);
        let sees = |p: Vec3<f64>, skip: Option<usize>| {
            let (u, v) = project(p, cam);
            cam.contains(u, v) && !world.segment_blocked(eye, pose.apply(p), skip)
        };
        let vertex_visible = vertices.map(|v| sees(v, None));
        let hidden = vertex_visible.iter().filter(|v| !**v).count();

        out.push(LabeledObject {
            object_index: index,
            label: ObjectLabel {
                class_name: class_name.to_string(),
                truncation,
                occlusion: OCCLUSION_VISIBLE,
                alpha: compute_alpha(location, rotation_y).expect("location is in front of the camera"),
                bbox2d,
                dimensions: dims,
                location,
                rotation_y,
                score: None,
            },
            vertices,
            unclipped,
            vertex_visible,
            centre_visible: sees(centre, Some(index)),
            truly_visible: hidden < OCCLUDED_VERTEX_THRESHOLD,
            size: SizeCategory::from_height(bbox2d.height()),
        });
    }
    out
}
