use super::{ObjectClass, Scene};
use crate::geometry::{sim_to_velodyne, Vec3};

/// Side of one square cell of a porous object's hole grid, in meters.
pub const FENCE_HOLE_PITCH: f64 = 0.3;

/// Box with its length along local x, width along y and height along z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Vec3<f64>,
    /// Half extents `(l/2, w/2, h/2)`.
    pub half: Vec3<f64>,
    /// Heading about +z.
    pub yaw: f64,
    cos: f64,
    sin: f64,
}

impl OrientedBox {
    pub fn new(center: Vec3<f64>, half: Vec3<f64>, yaw: f64) -> Self {
        Self {
            center,
            half,
            yaw,
            cos: yaw.cos(),
            sin: yaw.sin(),
        }
    }

    pub fn to_local(&self, p: Vec3<f64>) -> Vec3<f64> {
        self.dir_to_local(p - self.center)
    }

    pub fn dir_to_local(&self, d: Vec3<f64>) -> Vec3<f64> {
        Vec3::new(self.cos * d.x + self.sin * d.y, -self.sin * d.x + self.cos * d.y, d.z)
    }

    /// Parameter interval `(t_enter, t_exit)` where `origin + t * dir` is inside.
    pub fn intersect(&self, origin: Vec3<f64>, dir: Vec3<f64>) -> Option<(f64, f64)> {
        let o = self.to_local(origin).to_array();
        let d = self.dir_to_local(dir).to_array();
        let h = self.half.to_array();
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..3 {
            if d[i] == 0.0 {
                if o[i].abs() > h[i] {
                    return None;
                }
                continue;
            }
            let a = (-h[i] - o[i]) / d[i];
            let b = (h[i] - o[i]) / d[i];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 <= t1).then_some((t0, t1))
    }

    /// Unsigned distance from `p` to the box surface.
    pub fn surface_distance(&self, p: Vec3<f64>) -> f64 {
        let l = self.to_local(p);
        let q = Vec3::new(
            l.x.abs() - self.half.x,
            l.y.abs() - self.half.y,
            l.z.abs() - self.half.z,
        );
        let outside = Vec3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm();
        let inside = q.x.max(q.y).max(q.z).min(0.0);
        (outside + inside).abs()
    }

    /// Corners, bottom face first, counter-clockwise from `(+l, +w)`.
    pub fn corners(&self) -> [Vec3<f64>; 8] {
        let s = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
        std::array::from_fn(|i| {
            let (sx, sy) = s[i % 4];
            let sz = if i < 4 { -1.0 } else { 1.0 };
            let (lx, ly) = (sx * self.half.x, sy * self.half.y);
            self.center
                + Vec3::new(
                    self.cos * lx - self.sin * ly,
                    self.sin * lx + self.cos * ly,
                    sz * self.half.z,
                )
        })
    }
}

/// A scene object placed in the sensor-centred level Velodyne frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub index: usize,
    pub class: ObjectClass,
    pub shape: OrientedBox,
    pub porosity: f64,
}

impl Body {
    /// Whether a hit at `p` falls in a hole of the deterministic grid
    /// (square holes of side `sqrt(porosity) * pitch`, measured along the
    /// object's length and height).
    pub fn in_hole(&self, p: Vec3<f64>) -> bool {
        if self.porosity <= 0.0 {
            return false;
        }
        let l = self.shape.to_local(p);
        let a = self.porosity.sqrt();
        let frac = |v: f64| (v / FENCE_HOLE_PITCH).rem_euclid(1.0);
        frac(l.x + self.shape.half.x) < a && frac(l.z + self.shape.half.z) < a
    }
}

/// Scene geometry in the gravity-aligned Velodyne frame centred on the sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    /// Height of the ground plane (always `-mount_height`).
    pub ground_z: f64,
    pub bodies: Vec<Body>,
}

/// Which porous bodies a ray treats as open.
pub(crate) enum Porosity<'a> {
    /// Hole grid, as seen by the camera.
    HoleGrid,
    /// Caller-supplied pass-through decision per body index.
    Sampled(&'a dyn Fn(usize) -> bool),
}

impl World {
    pub fn new(scene: &Scene, mount_height: f64) -> Self {
        let bodies = scene
            .objects
            .iter()
            .enumerate()
            .map(|(index, o)| {
                let c = o.center - Vec3::new(0.0, 0.0, mount_height);
                let d = o.dimensions;
                Body {
                    index,
                    class: o.class_name,
                    shape: OrientedBox::new(
                        sim_to_velodyne(c),
                        Vec3::new(d.length / 2.0, d.width / 2.0, d.height / 2.0),
                        -o.yaw,
                    ),
                    porosity: o.porosity,
                }
            })
            .collect();
        Self {
            ground_z: -mount_height,
            bodies,
        }
    }

    pub fn ground_hit(&self, origin: Vec3<f64>, dir: Vec3<f64>) -> Option<f64> {
        if dir.z >= 0.0 {
            return None;
        }
        let t = (self.ground_z - origin.z) / dir.z;
        (t > 0.0).then_some(t)
    }

    /// Nearest body hit with `t > 0`, honouring porosity.
    pub(crate) fn body_hit(&self, origin: Vec3<f64>, dir: Vec3<f64>, porosity: &Porosity<'_>) -> Option<(f64, usize)> {
        nearest_hit(self.bodies.iter(), origin, dir, porosity)
    }

    /// True if the open segment `from -> to` crosses a body other than
    /// `skip`, using the hole grid for porous bodies. Ground is ignored.
    pub fn segment_blocked(&self, from: Vec3<f64>, to: Vec3<f64>, skip: Option<usize>) -> bool {
        const END_SLACK: f64 = 1e-9;
        let dir = to - from;
        self.bodies.iter().filter(|b| Some(b.index) != skip).any(|b| {
            let Some((t0, t1)) = b.shape.intersect(from, dir) else {
                return false;
            };
            if t1 <= END_SLACK || t0 >= 1.0 - END_SLACK {
                return false;
            }
            let entry = t0.max(0.0);
            !(b.porosity > 0.0 && b.in_hole(from + dir.scale(entry)))
        })
    }

    /// Distance from `p` to the nearest surface (ground or body).
    pub fn surface_distance(&self, p: Vec3<f64>) -> f64 {
        self.bodies
            .iter()
            .map(|b| b.shape.surface_distance(p))
            .fold((p.z - self.ground_z).abs(), f64::min)
    }
}

pub(crate) fn nearest_hit<'a>(
    bodies: impl Iterator<Item = &'a Body>,
    origin: Vec3<f64>,
    dir: Vec3<f64>,
    porosity: &Porosity<'_>,
) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for b in bodies {
        let Some((t0, _)) = b.shape.intersect(origin, dir) else {
            continue;
        };
        if !(t0 > 0.0) || best.is_some_and(|(t, _)| t <= t0) {
            continue;
        }
        if b.porosity > 0.0 {
            let open = match porosity {
                Porosity::HoleGrid => b.in_hole(origin + dir.scale(t0)),
                Porosity::Sampled(pass) => pass(b.index),
            };
            if open {
                continue;
            }
        }
        best = Some((t0, b.index));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kitti_io::Dimensions;
    use crate::scene_synth::SceneObject;
    use std::f64::consts::FRAC_PI_2;

    fn unit_box() -> OrientedBox {
        OrientedBox::new(Vec3::new(10.0, 0.0, 0.0), Vec3::new(2.0, 1.0, 0.5), 0.0)
    }

    #[test]
    fn slab_hit_from_front() {
        let (t0, t1) = unit_box().intersect(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((t0 - 8.0).abs() < 1e-12 && (t1 - 12.0).abs() < 1e-12);
        assert!(unit_box().intersect(Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0)).is_none());
    }

    #[test]
    fn rotated_box_swaps_extents() {
        let b = OrientedBox::new(Vec3::new(10.0, 0.0, 0.0), Vec3::new(2.0, 1.0, 0.5), FRAC_PI_2);
        let (t0, _) = b.intersect(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((t0 - 9.0).abs() < 1e-12);
        let c = b.corners();
        assert!(c.iter().all(|p| b.surface_distance(*p) < 1e-12));
    }

    #[test]
    fn surface_distance_inside_and_outside() {
        let b = unit_box();
        assert!((b.surface_distance(Vec3::new(10.0, 0.0, 0.0)) - 0.5).abs() < 1e-12);
        assert!((b.surface_distance(Vec3::new(13.0, 0.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!(b.surface_distance(Vec3::new(8.0, 0.3, 0.1)) < 1e-12);
    }

    #[test]
    fn world_mirrors_lateral_axis() {
        let mut s = Scene::empty(0);
        let dims = Dimensions {
            height: 1.5,
            width: 1.8,
            length: 4.0,
        };
        s.objects
            .push(SceneObject::on_ground(ObjectClass::Car, 10.0, 3.0, dims, 0.3));
        let w = World::new(&s, 1.7);
        let b = &w.bodies[0].shape;
        assert_eq!(b.center, Vec3::new(10.0, -3.0, 0.75 - 1.7));
        assert_eq!(b.yaw, -0.3);
        assert_eq!(w.ground_z, -1.7);
    }

    #[test]
    fn hole_grid_fraction_matches_porosity() {
        let body = Body {
            index: 0,
            class: ObjectClass::Fence,
            shape: OrientedBox::new(Vec3::new(5.0, 0.0, 0.0), Vec3::new(3.0, 0.025, 0.9), FRAC_PI_2),
            porosity: 0.49,
        };
        let n = 600;
        let mut open = 0;
        for i in 0..n {
            for j in 0..n {
                let y = -3.0 + 6.0 * (i as f64 + 0.5) / n as f64;
                let z = -0.9 + 1.8 * (j as f64 + 0.5) / n as f64;
                open += usize::from(body.in_hole(Vec3::new(5.0, y, z)));
            }
        }
        let frac = open as f64 / (n * n) as f64;
        assert!((frac - 0.49).abs() < 0.01, "{frac}");
    }
}
