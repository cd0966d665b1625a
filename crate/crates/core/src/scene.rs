//! Procedural park-scene world model and synthetic camera renderer.
//!
//! The renderer composes the inverse perspective mapping with the track's
//! ground-truth paint: each below-horizon pixel is cast onto the ground
//! plane, moved into the world through the vehicle pose, colored by
//! `sample_world`, then lit and noised. Identical inputs and frame index
//! produce bit-identical images.

use crate::camera::{pixel_to_ground, CameraModel, GroundPoint, PixelCoord};
use crate::image::Image;
use crate::track::{Pose, Track};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Lighting and sensor-noise settings for a rendering pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConditions {
    /// Global illumination multiplier in [0, 1].
    pub ambient_gain: f64,
    pub headlight_enabled: bool,
    /// Ground distance from the camera kept at full gain when headlights
    /// are on; intensity falls off inverse-square beyond it.
    pub headlight_range: f64,
    /// Per-channel additive Gaussian noise standard deviation.
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl SceneConditions {
    pub fn day(seed: u64) -> Self {
        Self {
            ambient_gain: 1.0,
            headlight_enabled: false,
            headlight_range: 0.0,
            noise_sigma: 4.0,
            rng_seed: seed,
        }
    }

    pub fn night(seed: u64) -> Self {
        Self {
            ambient_gain: 0.35,
            headlight_enabled: true,
            headlight_range: 10.0,
            noise_sigma: 8.0,
            rng_seed: seed,
        }
    }
}

/// Camera-frame ground intersection of every pixel ray, precomputed once
/// per camera: the per-pixel trigonometry does not depend on the vehicle
/// pose, so a closed-loop run reuses one map for all frames.
#[derive(Debug, Clone)]
pub struct GroundMap {
    width: usize,
    height: usize,
    /// (x, y, ground distance from the camera), None above the horizon.
    points: Vec<Option<(f64, f64, f64)>>,
}

impl GroundMap {
    pub fn new(cam: &CameraModel) -> Self {
        let mut points = Vec::with_capacity(cam.r_u * cam.r_v);
        for v in 0..cam.r_v {
            for u in 0..cam.r_u {
                let p = pixel_to_ground(
                    cam,
                    PixelCoord {
                        u: u as f64,
                        v: v as f64,
                    },
                )
                .ok()
                .map(|g| {
                    let dist = ((g.x - cam.d).powi(2) + (g.y - cam.l).powi(2)).sqrt();
                    (g.x, g.y, dist)
                });
                points.push(p);
            }
        }
        Self {
            width: cam.r_u,
            height: cam.r_v,
            points,
        }
    }
}

/// Ground-truth paint color at a world point: central marker, boundary
/// lines at +/- lane_half_width, road surface, or off-road. Distances are
/// the unsigned minimum to the centerline over the whole track.
pub fn sample_world(track: &Track, g: GroundPoint) -> [u8; 3] {
    let d = track.distance(g.x, g.y);
    let half_marker = track.marker_width / 2.0;
    if d <= half_marker {
        track.marker_color
    } else if (d - track.lane_half_width).abs() <= half_marker {
        track.boundary_color
    } else if d <= track.lane_half_width {
        track.road_color
    } else {
        track.off_road_color
    }
}

#[inline]
fn light_gain(cond: &SceneConditions, ground_dist: f64) -> f64 {
    let mut gain = cond.ambient_gain;
    if cond.headlight_enabled && cond.headlight_range > 0.0 {
        let beam = if ground_dist <= cond.headlight_range {
            1.0
        } else {
            (cond.headlight_range / ground_dist).powi(2)
        };
        gain = gain.max(beam);
    }
    gain.clamp(0.0, 1.0)
}

/// Render one camera frame from `vehicle_pose`. Deterministic in all
/// arguments including `frame_index`, which decorrelates the noise stream
/// between frames of a run.
pub fn render_frame(
    cam: &CameraModel,
    vehicle_pose: &Pose,
    track: &Track,
    cond: &SceneConditions,
    frame_index: u64,
) -> Image {
    render_frame_cached(
        &GroundMap::new(cam),
        vehicle_pose,
        track,
        cond,
        frame_index,
    )
}

/// `render_frame` with the per-camera ray map precomputed by the caller.
pub fn render_frame_cached(
    map: &GroundMap,
    vehicle_pose: &Pose,
    track: &Track,
    cond: &SceneConditions,
    frame_index: u64,
) -> Image {
    let mut img = Image::new(map.width, map.height);
    let (fx, fy) = vehicle_pose.direction();
    let (rx, ry) = vehicle_pose.right_normal();

    let mut rng = ChaCha8Rng::seed_from_u64(
        cond.rng_seed ^ frame_index.wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    let noise = if cond.noise_sigma > 0.0 {
        Some(Normal::new(0.0, cond.noise_sigma).expect("sigma is finite and non-negative"))
    } else {
        None
    };
    let sky_gain = cond.ambient_gain.clamp(0.0, 1.0);

    for (i, entry) in map.points.iter().enumerate() {
        let (base, gain) = match entry {
            Some((gx, gy, dist)) => {
                let wx = vehicle_pose.x + gx * rx + gy * fx;
                let wy = vehicle_pose.y + gx * ry + gy * fy;
                (
                    sample_world(track, GroundPoint { x: wx, y: wy }),
                    light_gain(cond, *dist),
                )
            }
            None => (track.sky_color, sky_gain),
        };
        let mut px = [0u8; 3];
        for c in 0..3 {
            let mut val = base[c] as f64 * gain;
            if let Some(n) = &noise {
                val += n.sample(&mut rng);
            }
            px[c] = val.round().clamp(0.0, 255.0) as u8;
        }
        img.data[3 * i..3 * i + 3].copy_from_slice(&px);
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::ground_to_pixel;
    use crate::track::TrackSegment;

    fn straight_track() -> Track {
        Track::new(&[TrackSegment::Straight { length: 200.0 }]).unwrap()
    }

    fn noiseless(seed: u64) -> SceneConditions {
        SceneConditions {
            noise_sigma: 0.0,
            ..SceneConditions::day(seed)
        }
    }

    fn origin_pose() -> Pose {
        Pose {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
        }
    }

    #[test]
    fn sample_world_paint_bands() {
        let t = straight_track();
        let q = |x: f64| sample_world(&t, GroundPoint { x, y: 10.0 });
        assert_eq!(q(0.0), t.marker_color);
        assert_eq!(q(t.lane_half_width / 2.0), t.road_color);
        assert_eq!(q(t.lane_half_width), t.boundary_color);
        assert_eq!(q(2.0 * t.lane_half_width), t.off_road_color);
    }

    #[test]
    fn sample_world_rigid_invariance() {
        // The same segment list laid out from a rotated/translated start pose
        // reports the same color for the correspondingly transformed query.
        let segs = [
            TrackSegment::Straight { length: 30.0 },
            TrackSegment::Arc {
                radius: 8.0,
                sweep: 1.0,
            },
        ];
        let base = Track::new(&segs).unwrap();
        let start = Pose {
            x: 12.5,
            y: -3.0,
            heading: 0.7,
        };
        let moved = Track::with_start(
            start,
            &segs,
            base.marker_width,
            base.lane_half_width,
        )
        .unwrap();
        let (fx, fy) = start.direction();
        let (rx, ry) = start.right_normal();
        for (x, y) in [(0.3, 5.0), (-1.2, 12.0), (2.0, 25.0), (0.07, 33.0)] {
            let a = sample_world(&base, GroundPoint { x, y });
            let b = sample_world(
                &moved,
                GroundPoint {
                    x: start.x + x * rx + y * fx,
                    y: start.y + x * ry + y * fy,
                },
            );
            assert_eq!(a, b, "query ({x}, {y})");
        }
    }

    #[test]
    fn centered_straight_marker_projects_to_center_column() {
        let cam = CameraModel::default_experiment();
        let track = straight_track();
        let img = render_frame(&cam, &origin_pose(), &track, &noiseless(1), 0);
        // Check a band of rows: the marker must cover the center column and
        // its projected half-width at that row's depth.
        for v in [150usize, 180, 220] {
            let center = img.get(159, v);
            assert_eq!(center, track.marker_color, "row {v}");
            let g = pixel_to_ground(
                &cam,
                PixelCoord {
                    u: 159.5,
                    v: v as f64,
                },
            )
            .unwrap();
            let edge = ground_to_pixel(
                &cam,
                GroundPoint {
                    x: track.marker_width / 2.0,
                    y: g.y,
                },
            )
            .unwrap();
            // One pixel inside the projected right edge is still marker.
            let inside = (edge.u.floor() as usize).saturating_sub(1);
            assert_eq!(img.get(inside, v), track.marker_color, "row {v}");
            // Well outside the marker the road color shows.
            let outside = edge.u.ceil() as usize + 3;
            assert_eq!(img.get(outside, v), track.road_color, "row {v}");
        }
    }

    #[test]
    fn zero_ambient_no_headlight_is_black_below_horizon() {
        let cam = CameraModel::default_experiment();
        let track = straight_track();
        let cond = SceneConditions {
            ambient_gain: 0.0,
            headlight_enabled: false,
            headlight_range: 0.0,
            noise_sigma: 0.0,
            rng_seed: 0,
        };
        let img = render_frame(&cam, &origin_pose(), &track, &cond, 0);
        for v in 60..cam.r_v {
            for u in 0..cam.r_u {
                assert_eq!(img.get(u, v), [0, 0, 0]);
            }
        }
    }

    #[test]
    fn determinism_per_seed_and_frame() {
        let cam = CameraModel::default_experiment();
        let track = straight_track();
        let cond = SceneConditions::day(7);
        let a = render_frame(&cam, &origin_pose(), &track, &cond, 3);
        let b = render_frame(&cam, &origin_pose(), &track, &cond, 3);
        assert_eq!(a, b);
        let c = render_frame(&cam, &origin_pose(), &track, &cond, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn headlight_keeps_near_field_bright() {
        let cam = CameraModel::default_experiment();
        let track = straight_track();
        let night = SceneConditions {
            noise_sigma: 0.0,
            ..SceneConditions::night(2)
        };
        let day = noiseless(2);
        let img_n = render_frame(&cam, &origin_pose(), &track, &night, 0);
        let img_d = render_frame(&cam, &origin_pose(), &track, &day, 0);
        // Bottom rows are within headlight range: identical to daytime.
        for u in (0..cam.r_u).step_by(13) {
            assert_eq!(img_n.get(u, 230), img_d.get(u, 230));
        }
        // Sky is dimmed by ambient gain.
        let sky_n = img_n.get(10, 5);
        let sky_d = img_d.get(10, 5);
        assert!(sky_n[0] < sky_d[0]);
    }
}
