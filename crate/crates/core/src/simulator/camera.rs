use serde::{Deserialize, Serialize};

use super::SimError;

pub type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: Vec3) -> Vec3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
}

impl Default for Intrinsics {
    fn default() -> Self {
        Self {
            width: 1280,
            height: 720,
            hfov_deg: 105.0,
        }
    }
}

impl Intrinsics {
    /// Focal length in pixels (square pixels, principal point at the centre).
    pub fn focal_px(&self) -> f64 {
        self.width as f64 / 2.0 / (self.hfov_deg.to_radians() / 2.0).tan()
    }
}

/// Viewer position on a circle around the shelf centre. Positive azimuth is
/// to the viewer's right. `pan_deg` / `tilt_deg` fix the optical axis (yaw to
/// the right, pitch upward); otherwise the camera faces the shelf aim point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub radius_m: f64,
    pub azimuth_deg: f64,
    pub height_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pan_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt_deg: Option<f64>,
}

impl CameraPose {
    pub const DEFAULT_HEIGHT_M: f64 = 0.4;

    pub fn new(radius_m: f64, azimuth_deg: f64) -> Self {
        Self {
            radius_m,
            azimuth_deg,
            height_m: Self::DEFAULT_HEIGHT_M,
            pan_deg: None,
            tilt_deg: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.radius_m > 0.0) || !self.azimuth_deg.is_finite() || !self.height_m.is_finite() {
            return Err(SimError::Config(format!("invalid camera pose {self:?}")));
        }
        Ok(())
    }

    pub fn position(&self) -> Vec3 {
        let az = self.azimuth_deg.to_radians();
        [self.radius_m * az.sin(), self.height_m, self.radius_m * az.cos()]
    }
}

/// Yaw and pitch, degrees, of the direction from `from` to `to`.
pub fn look_angles(from: Vec3, to: Vec3) -> (f64, f64) {
    let d = sub(to, from);
    let yaw = d[0].atan2(-d[2]).to_degrees();
    let pitch = d[1].atan2(d[0].hypot(d[2])).to_degrees();
    (yaw, pitch)
}

/// Posed pinhole camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub intrinsics: Intrinsics,
    pub position: Vec3,
    forward: Vec3,
    right: Vec3,
    up: Vec3,
}

impl Camera {
    pub fn new(intrinsics: Intrinsics, pose: &CameraPose, aim: (f64, f64)) -> Self {
        let position = pose.position();
        let (auto_yaw, auto_pitch) = look_angles(position, [aim.0, aim.1, 0.0]);
        let yaw = pose.pan_deg.unwrap_or(auto_yaw).to_radians();
        let pitch = pose.tilt_deg.unwrap_or(auto_pitch).to_radians();
        let forward = [yaw.sin() * pitch.cos(), pitch.sin(), -yaw.cos() * pitch.cos()];
        let right = normalize(cross(forward, [0.0, 1.0, 0.0]));
        let up = cross(right, forward);
        Self {
            intrinsics,
            position,
            forward,
            right,
            up,
        }
    }

    /// Pixel coordinates of a world point, `None` behind the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let d = sub(p, self.position);
        let z = dot(d, self.forward);
        if z <= 1e-6 {
            return None;
        }
        let f = self.intrinsics.focal_px();
        let cx = self.intrinsics.width as f64 / 2.0;
        let cy = self.intrinsics.height as f64 / 2.0;
        Some((cx + f * dot(d, self.right) / z, cy - f * dot(d, self.up) / z))
    }

    /// Where the ray through pixel `(u, v)` meets the shelf plane `z = 0`.
    pub fn shelf_hit(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        let f = self.intrinsics.focal_px();
        let a = (u - self.intrinsics.width as f64 / 2.0) / f;
        let b = (v - self.intrinsics.height as f64 / 2.0) / f;
        let dir: Vec3 = std::array::from_fn(|k| self.forward[k] + a * self.right[k] - b * self.up[k]);
        if self.position[2] <= 0.0 || dir[2] >= 0.0 {
            return None;
        }
        let t = -self.position[2] / dir[2];
        Some((self.position[0] + t * dir[0], self.position[1] + t * dir[1]))
    }

    /// Angle between the shelf normal and the line of sight to `p`, degrees.
    pub fn obliquity_deg(&self, p: Vec3) -> f64 {
        let d = normalize(sub(self.position, p));
        d[2].clamp(-1.0, 1.0).acos().to_degrees()
    }
}
