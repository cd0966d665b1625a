//! Ground-plane perspective mapping for a forward-looking monocular camera.
//!
//! The camera sits at (d, l, h) in a frame whose x axis points to the right
//! of the vehicle and whose y axis points forward. `pixel_to_ground` maps an
//! image pixel to the ground point its ray hits; `ground_to_pixel` is the
//! exact inverse on the front half-plane and is what the overhead warp uses
//! to pull pixels so the top view has no holes.

use crate::image::Image;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    /// The pixel's vertical ray angle is at or above the horizon; the ray
    /// never intersects the ground plane ahead.
    #[error("pixel ray does not intersect the ground ahead (at or above horizon)")]
    AboveHorizon,
    /// The ground point is not strictly in front of the camera (y - l <= 0).
    #[error("ground point is behind the camera")]
    BehindCamera,
    /// Empty or behind-camera overhead region, or non-positive resolution.
    #[error("invalid overhead region")]
    InvalidRegion,
}

/// Intrinsic/extrinsic camera description.
///
/// Angles are radians. Invariants: `h > 0`, `alpha_u`/`alpha_v` in (0, pi/2),
/// `r_u`/`r_v >= 2`. Degrees appear only at the CLI/config boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    /// Lateral offset of the camera in meters (vehicle x).
    pub d: f64,
    /// Longitudinal offset of the camera in meters (vehicle y).
    pub l: f64,
    /// Camera height above the ground plane in meters.
    pub h: f64,
    /// Yaw of the optical axis, radians, positive toward +x.
    pub gamma: f64,
    /// Pitch-down of the optical axis, radians.
    pub theta: f64,
    /// Horizontal half field of view, radians.
    pub alpha_u: f64,
    /// Vertical half field of view, radians.
    pub alpha_v: f64,
    /// Horizontal resolution in pixels.
    pub r_u: usize,
    /// Vertical resolution in pixels.
    pub r_v: usize,
}

impl CameraModel {
    /// Camera used by all canned experiments: 0.8 m high, 60 degree
    /// horizontal field of view, 320x240, pitched down 15 degrees. The
    /// vertical half-FOV keeps square pixels (atan(tan(alpha_u) * 240/320)).
    pub fn default_experiment() -> Self {
        let alpha_u = 30.0_f64.to_radians();
        let alpha_v = (alpha_u.tan() * (240.0 / 320.0)).atan();
        Self {
            d: 0.0,
            l: 0.0,
            h: 0.8,
            gamma: 0.0,
            theta: 15.0_f64.to_radians(),
            alpha_u,
            alpha_v,
            r_u: 320,
            r_v: 240,
        }
    }

    /// Vertical ray angle below horizontal for image row `v` (radians).
    #[inline]
    pub fn vertical_ray_angle(&self, v: f64) -> f64 {
        (2.0 * self.alpha_v / (self.r_v as f64 - 1.0)) * v - self.alpha_v + self.theta
    }

    /// Horizontal ray angle from the heading direction for column `u`.
    #[inline]
    pub fn horizontal_ray_angle(&self, u: f64) -> f64 {
        (2.0 * self.alpha_u / (self.r_u as f64 - 1.0)) * u - self.alpha_u + self.gamma
    }
}

/// Point on the ground plane, camera/vehicle frame, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPoint {
    pub x: f64,
    pub y: f64,
}

/// Fractional pixel coordinate; (0, 0) is the top-left pixel center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelCoord {
    pub u: f64,
    pub v: f64,
}

/// Axis-aligned rectangle on the ground plane ahead of the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Image-to-ground transform. Errors with `AboveHorizon` when the pixel's
/// vertical ray angle is not strictly positive.
pub fn pixel_to_ground(cam: &CameraModel, p: PixelCoord) -> Result<GroundPoint, GeometryError> {
    let vert = cam.vertical_ray_angle(p.v);
    if vert <= 0.0 {
        return Err(GeometryError::AboveHorizon);
    }
    let horiz = cam.horizontal_ray_angle(p.u);
    let range = cam.h / vert.tan();
    Ok(GroundPoint {
        x: range * horiz.sin() + cam.d,
        y: range * horiz.cos() + cam.l,
    })
}

/// Ground-to-image transform, the reverse mapping used to stuff the overhead
/// view. Only the front half-plane (y - l > 0) projects; the result may lie
/// outside the image bounds, which the caller checks.
pub fn ground_to_pixel(cam: &CameraModel, g: GroundPoint) -> Result<PixelCoord, GeometryError> {
    let dx = g.x - cam.d;
    let dy = g.y - cam.l;
    if dy <= 0.0 {
        return Err(GeometryError::BehindCamera);
    }
    let vert = (cam.h / (dx * dx + dy * dy).sqrt()).atan();
    let horiz = (dx / dy).atan();
    Ok(PixelCoord {
        u: (cam.r_u as f64 - 1.0) * (horiz + cam.alpha_u - cam.gamma) / (2.0 * cam.alpha_u),
        v: (cam.r_v as f64 - 1.0) * (vert + cam.alpha_v - cam.theta) / (2.0 * cam.alpha_v),
    })
}

/// Overhead (bird's-eye) warp. Every output pixel's ground coordinate is
/// pushed through `ground_to_pixel` and sampled nearest-neighbor from the
/// source frame; pixels whose source falls outside the frame are black.
/// Output columns run left-to-right over [x_min, x_max], rows top-to-bottom
/// over [y_max, y_min] (far field at the top).
pub fn warp_to_overhead(
    cam: &CameraModel,
    frame: &Image,
    region: &GroundRegion,
    resolution_m_per_px: f64,
) -> Result<Image, GeometryError> {
    if resolution_m_per_px.is_nan()
        || resolution_m_per_px <= 0.0
        || region.x_max <= region.x_min
        || region.y_max <= region.y_min
        || region.y_min <= cam.l
    {
        return Err(GeometryError::InvalidRegion);
    }
    let out_w = ((region.x_max - region.x_min) / resolution_m_per_px).round() as usize;
    let out_h = ((region.y_max - region.y_min) / resolution_m_per_px).round() as usize;
    if out_w == 0 || out_h == 0 {
        return Err(GeometryError::InvalidRegion);
    }

    let mut out = Image::new(out_w, out_h);
    for row in 0..out_h {
        let y = region.y_max - (row as f64 + 0.5) * resolution_m_per_px;
        for col in 0..out_w {
            let x = region.x_min + (col as f64 + 0.5) * resolution_m_per_px;
            let Ok(p) = ground_to_pixel(cam, GroundPoint { x, y }) else {
                continue;
            };
            let u = p.u.round();
            let v = p.v.round();
            if u >= 0.0 && v >= 0.0 && (u as usize) < frame.width && (v as usize) < frame.height {
                out.set(col, row, frame.get(u as usize, v as usize));
            }
        }
    }
    Ok(out)
}
