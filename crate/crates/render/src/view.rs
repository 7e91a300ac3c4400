use gad_core::gad::Camera;
use gad_core::geom::{add, cross, dot, norm, normalize, scale, sub, Vec3};

use crate::RenderError;

const NEAR: f64 = 1e-6;

/// Pinhole projection for one camera and image size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct View {
    pub eye: Vec3,
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    tan_half: f64,
    aspect: f64,
    width: f64,
    height: f64,
}

impl View {
    /// `right = dir × up` and `up' = right × dir`, so a slightly skewed up
    /// vector is re-orthogonalized.
    pub fn new(camera: &Camera, width: u32, height: u32, fov_y: f64) -> Result<Self, RenderError> {
        let bad = |m: &str| RenderError::InvalidState(m.to_string());
        if camera.position.iter().any(|v| !v.is_finite()) {
            return Err(bad("camera position is not finite"));
        }
        let forward = normalize(camera.direction).ok_or_else(|| bad("camera direction is zero"))?;
        let up = normalize(camera.up).ok_or_else(|| bad("camera up is zero"))?;
        let r = cross(forward, up);
        if norm(r) < 1e-9 {
            return Err(bad("camera direction and up are parallel"));
        }
        let right = normalize(r).ok_or_else(|| bad("camera basis degenerate"))?;
        let up = cross(right, forward);
        Ok(Self {
            eye: camera.position,
            forward,
            right,
            up,
            tan_half: (fov_y.to_radians() * 0.5).tan(),
            aspect: width as f64 / height as f64,
            width: width as f64,
            height: height as f64,
        })
    }

    /// Unit ray direction through image point `(px, py)`; pixel `(i, j)`
    /// has its center at `(i + 0.5, j + 0.5)`.
    pub fn ray(&self, px: f64, py: f64) -> Vec3 {
        let x = (2.0 * px / self.width - 1.0) * self.tan_half * self.aspect;
        let y = (1.0 - 2.0 * py / self.height) * self.tan_half;
        let d = add(self.forward, add(scale(self.right, x), scale(self.up, y)));
        scale(d, 1.0 / norm(d))
    }

    /// Image position and view depth of `p`, or `None` behind the eye.
    pub fn project(&self, p: Vec3) -> Option<[f64; 3]> {
        let d = sub(p, self.eye);
        let z = dot(d, self.forward);
        if z <= NEAR {
            return None;
        }
        let x = dot(d, self.right) / (z * self.tan_half * self.aspect);
        let y = dot(d, self.up) / (z * self.tan_half);
        Some([
            (x + 1.0) * 0.5 * self.width,
            (1.0 - y) * 0.5 * self.height,
            z,
        ])
    }

    /// View depth of `p` (distance along the forward axis).
    pub fn depth(&self, p: Vec3) -> f64 {
        dot(sub(p, self.eye), self.forward)
    }

    pub fn near(&self) -> f64 {
        NEAR
    }
}
