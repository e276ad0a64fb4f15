use glam::DVec3;

use crate::bvh::Aabb;

use super::{Procedural, Result, SceneError};

/// World-space ray with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldRay {
    pub origin: DVec3,
    pub dir: DVec3,
}

/// Pinhole camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: DVec3,
    pub look_at: DVec3,
    pub up: DVec3,
    /// Vertical field of view in degrees.
    pub vfov: f64,
    pub width: u32,
    pub height: u32,
    // right, up and forward unit vectors
    basis: [DVec3; 3],
}

impl Camera {
    pub fn new(position: DVec3, look_at: DVec3, up: DVec3, vfov: f64, width: u32, height: u32) -> Result<Self> {
        let forward = (look_at - position).normalize_or_zero();
        let right = forward.cross(up).normalize_or_zero();
        let ok = forward != DVec3::ZERO
            && right != DVec3::ZERO
            && position.is_finite()
            && vfov > 0.0
            && vfov < 180.0
            && width > 0
            && height > 0;
        if !ok {
            return Err(SceneError::InvalidCamera);
        }
        let true_up = right.cross(forward);
        Ok(Self { position, look_at, up, vfov, width, height, basis: [right, true_up, forward] })
    }

    /// Default view of a procedural scene.
    pub fn for_scene(scene: Procedural, width: u32, height: u32) -> Result<Self> {
        let (pos, at) = match scene {
            Procedural::Cornell => (DVec3::new(0.5, 0.5, 0.98), DVec3::new(0.5, 0.45, 0.0)),
            Procedural::Sphere(_) => (DVec3::new(0.4, 0.3, 3.0), DVec3::ZERO),
            Procedural::Grid(_) => (DVec3::new(2.2, 1.7, 3.0), DVec3::ZERO),
        };
        let fov = if scene == Procedural::Cornell { 70.0 } else { 45.0 };
        Self::new(pos, at, DVec3::Y, fov, width, height)
    }

    /// Looks at the center of `bounds` from above, right and in front, far
    /// enough back that the whole box is in view.
    pub fn framing(bounds: &Aabb, width: u32, height: u32) -> Result<Self> {
        if bounds.is_empty() {
            return Err(SceneError::InvalidCamera);
        }
        let (lo, hi) = (bounds.lo_f64(), bounds.hi_f64());
        let center = (lo + hi) * 0.5;
        let radius = ((hi - lo).length() * 0.5).max(1e-6);
        let vfov: f64 = 45.0;
        let dist = radius / (vfov.to_radians() * 0.5).sin();
        let pos = center + DVec3::new(0.35, 0.25, 1.0).normalize() * dist;
        Self::new(pos, center, DVec3::Y, vfov, width, height)
    }

    pub fn forward(&self) -> DVec3 {
        self.basis[2]
    }

    /// Ray through the center of pixel `(x, y)`; row 0 is the top.
    pub fn ray(&self, x: u32, y: u32) -> WorldRay {
        let [right, up, forward] = self.basis;
        let h = (self.vfov.to_radians() * 0.5).tan();
        let w = h * f64::from(self.width) / f64::from(self.height);
        let sx = (2.0 * (f64::from(x) + 0.5) / f64::from(self.width) - 1.0) * w;
        let sy = (1.0 - 2.0 * (f64::from(y) + 0.5) / f64::from(self.height)) * h;
        WorldRay { origin: self.position, dir: (forward + right * sx + up * sy).normalize() }
    }

    /// One ray per pixel in row-major order.
    pub fn primary_rays(&self) -> Vec<WorldRay> {
        (0..self.height).flat_map(|y| (0..self.width).map(move |x| self.ray(x, y))).collect()
    }

    /// Height of one pixel at distance `d` along the view direction.
    pub fn pixel_footprint(&self, d: f64) -> f64 {
        2.0 * d * (self.vfov.to_radians() * 0.5).tan() / f64::from(self.height)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam(w: u32, h: u32) -> Camera {
        Camera::new(DVec3::new(0.0, 0.0, 5.0), DVec3::ZERO, DVec3::Y, 60.0, w, h).unwrap()
    }

    #[test]
    fn center_ray_is_view_direction() {
        let c = cam(65, 65);
        assert!(c.ray(32, 32).dir.abs_diff_eq(DVec3::NEG_Z, 1e-12));
        assert_eq!(c.primary_rays().len(), 65 * 65);
    }

    #[test]
    fn corners_are_mirror_images() {
        let c = cam(40, 30);
        let a = c.ray(0, 0).dir;
        let b = c.ray(39, 29).dir;
        assert!((a.x + b.x).abs() < 1e-12 && (a.y + b.y).abs() < 1e-12 && (a.z - b.z).abs() < 1e-12);
        let m = c.ray(39, 0).dir;
        assert!((a.x + m.x).abs() < 1e-12 && (a.y - m.y).abs() < 1e-12);
    }

    #[test]
    fn framing_keeps_box_in_view() {
        let b = Aabb::new(glam::Vec3::new(-3.0, 0.0, 1.0), glam::Vec3::new(5.0, 2.0, 4.0));
        let c = Camera::framing(&b, 64, 64).unwrap();
        let half = (c.vfov.to_radians() * 0.5).tan();
        for i in 0..8 {
            let p = DVec3::new(
                if i & 1 == 0 { -3.0 } else { 5.0 },
                if i & 2 == 0 { 0.0 } else { 2.0 },
                if i & 4 == 0 { 1.0 } else { 4.0 },
            );
            let d = p - c.position;
            let z = d.dot(c.forward());
            assert!(z > 0.0);
            let [r, u, _] = c.basis;
            assert!(d.dot(r).abs() / z <= half && d.dot(u).abs() / z <= half);
        }
        assert!(Camera::framing(&Aabb::EMPTY, 4, 4).is_err());
    }

    #[test]
    fn degenerate_basis() {
        assert!(Camera::new(DVec3::ZERO, DVec3::Y, DVec3::Y, 60.0, 4, 4).is_err());
        assert!(Camera::new(DVec3::ZERO, DVec3::ZERO, DVec3::Y, 60.0, 4, 4).is_err());
        assert!(Camera::new(DVec3::ZERO, DVec3::X, DVec3::Y, 60.0, 0, 4).is_err());
    }
}
