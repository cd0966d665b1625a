//! Parametric track centerline: straight and arc segments joined
//! C0-continuously, with arc-length lookup and closed-form nearest-point
//! queries per segment.
//!
//! World conventions: the track starts at the origin heading +y. Heading is
//! measured from +y, positive toward +x, so the direction vector at heading
//! psi is (sin psi, cos psi) and a positive arc sweep curves toward +x.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("invalid track segment: {0}")]
    InvalidSegment(String),
}

/// Position plus heading (radians from +y toward +x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    /// Unit direction of travel.
    #[inline]
    pub fn direction(&self) -> (f64, f64) {
        (self.heading.sin(), self.heading.cos())
    }

    /// Unit vector pointing to the right of the direction of travel.
    #[inline]
    pub fn right_normal(&self) -> (f64, f64) {
        (self.heading.cos(), -self.heading.sin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackSegment {
    /// Straight run of the given length in meters.
    Straight { length: f64 },
    /// Circular arc: radius in meters, signed sweep in radians (positive
    /// sweeps toward +x, i.e. a right-hand turn).
    Arc { radius: f64, sweep: f64 },
}

impl TrackSegment {
    fn validate(&self) -> Result<(), TrackError> {
        match *self {
            TrackSegment::Straight { length } => {
                if length.is_nan() || length <= 0.0 {
                    return Err(TrackError::InvalidSegment(format!(
                        "straight length must be positive, got {length}"
                    )));
                }
            }
            TrackSegment::Arc { radius, sweep } => {
                if radius.is_nan() || radius <= 0.0 {
                    return Err(TrackError::InvalidSegment(format!(
                        "arc radius must be positive, got {radius}"
                    )));
                }
                if sweep.is_nan() || sweep == 0.0 {
                    return Err(TrackError::InvalidSegment("arc sweep must be nonzero".into()));
                }
            }
        }
        Ok(())
    }

    fn length(&self) -> f64 {
        match *self {
            TrackSegment::Straight { length } => length,
            TrackSegment::Arc { radius, sweep } => radius * sweep.abs(),
        }
    }
}

/// Segment geometry resolved against its start pose.
#[derive(Debug, Clone, Copy)]
enum SegGeom {
    Straight {
        // Unit direction.
        dx: f64,
        dy: f64,
    },
    Arc {
        cx: f64,
        cy: f64,
        radius: f64,
        /// +1 for right-hand (clockwise) arcs, -1 for left-hand.
        side: f64,
        /// atan2 angle of the start point around the center.
        a_start: f64,
    },
}

/// One segment with its precomputed start pose, geometry, and cumulative
/// arc length.
#[derive(Debug, Clone, Copy)]
struct PlacedSegment {
    start: Pose,
    geom: SegGeom,
    s0: f64,
    length: f64,
}

impl PlacedSegment {
    fn place(seg: &TrackSegment, start: Pose, s0: f64) -> Self {
        let length = seg.length();
        let geom = match *seg {
            TrackSegment::Straight { .. } => {
                let (dx, dy) = start.direction();
                SegGeom::Straight { dx, dy }
            }
            TrackSegment::Arc { radius, sweep } => {
                let (rx, ry) = start.right_normal();
                let side = sweep.signum();
                let cx = start.x + side * radius * rx;
                let cy = start.y + side * radius * ry;
                SegGeom::Arc {
                    cx,
                    cy,
                    radius,
                    side,
                    a_start: (start.y - cy).atan2(start.x - cx),
                }
            }
        };
        Self {
            start,
            geom,
            s0,
            length,
        }
    }

    /// Pose at local arc length t in [0, length].
    fn pose_at(&self, t: f64) -> Pose {
        match self.geom {
            SegGeom::Straight { dx, dy } => Pose {
                x: self.start.x + t * dx,
                y: self.start.y + t * dy,
                heading: self.start.heading,
            },
            SegGeom::Arc { radius, side, .. } => {
                let kappa = side / radius;
                let psi0 = self.start.heading;
                let psi = psi0 + kappa * t;
                Pose {
                    x: self.start.x + (psi0.cos() - psi.cos()) / kappa,
                    y: self.start.y + (psi.sin() - psi0.sin()) / kappa,
                    heading: psi,
                }
            }
        }
    }

    /// Cheap lower bound on the squared distance from `q` to this segment.
    #[inline]
    fn dist2_lower_bound(&self, qx: f64, qy: f64) -> f64 {
        match self.geom {
            SegGeom::Straight { .. } => 0.0,
            SegGeom::Arc {
                cx, cy, radius, ..
            } => {
                let r = ((qx - cx).powi(2) + (qy - cy).powi(2)).sqrt();
                let d = r - radius;
                d * d
            }
        }
    }

    /// Nearest point on this segment to `q`, as (local arc length, squared
    /// distance).
    fn nearest(&self, qx: f64, qy: f64) -> (f64, f64) {
        match self.geom {
            SegGeom::Straight { dx, dy } => {
                let t = ((qx - self.start.x) * dx + (qy - self.start.y) * dy)
                    .clamp(0.0, self.length);
                let px = self.start.x + t * dx;
                let py = self.start.y + t * dy;
                (t, (qx - px).powi(2) + (qy - py).powi(2))
            }
            SegGeom::Arc {
                cx,
                cy,
                radius,
                side,
                a_start,
            } => {
                // Local arc length of q's radial projection along the travel
                // direction: positive sweeps run clockwise in the xy plane
                // (decreasing atan2 angle).
                let a_q = (qy - cy).atan2(qx - cx);
                let delta = (side * (a_start - a_q)).rem_euclid(std::f64::consts::TAU);
                let t_along = delta * radius;
                let t = if t_along <= self.length {
                    t_along
                } else {
                    // Beyond the angular span: nearer endpoint wins.
                    let end = self.pose_at(self.length);
                    let d_start = (qx - self.start.x).powi(2) + (qy - self.start.y).powi(2);
                    let d_end = (qx - end.x).powi(2) + (qy - end.y).powi(2);
                    if d_end <= d_start {
                        self.length
                    } else {
                        0.0
                    }
                };
                let p = self.pose_at(t);
                (t, (qx - p.x).powi(2) + (qy - p.y).powi(2))
            }
        }
    }
}

/// Result of a nearest-centerline query.
#[derive(Debug, Clone, Copy)]
pub struct NearestPoint {
    /// Arc length of the nearest centerline point from the track start.
    pub s: f64,
    /// Unsigned distance to the centerline.
    pub distance: f64,
    /// Signed lateral offset: positive when the query point lies to the
    /// right of the path direction.
    pub signed_lateral: f64,
    /// Pose of the nearest centerline point.
    pub pose: Pose,
}

/// Track centerline plus the painted-road geometry and palette used by the
/// scene sampler.
#[derive(Debug, Clone)]
pub struct Track {
    placed: Vec<PlacedSegment>,
    total_length: f64,
    closed: bool,
    /// Painted line width in meters (central marker and boundary lines).
    pub marker_width: f64,
    /// Half the road width; boundary lines sit at this lateral offset.
    pub lane_half_width: f64,
    /// Central tracked marker color.
    pub marker_color: [u8; 3],
    /// Boundary line color.
    pub boundary_color: [u8; 3],
    pub road_color: [u8; 3],
    pub off_road_color: [u8; 3],
    pub sky_color: [u8; 3],
}

/// Default paint geometry and palette: a yellow central marker responds in
/// the LAB b* channel while the white boundaries respond in value/lightness.
pub const DEFAULT_MARKER_WIDTH: f64 = 0.15;
pub const DEFAULT_LANE_HALF_WIDTH: f64 = 1.75;
pub const DEFAULT_MARKER_COLOR: [u8; 3] = [255, 220, 40];
pub const DEFAULT_BOUNDARY_COLOR: [u8; 3] = [245, 245, 245];
pub const DEFAULT_ROAD_COLOR: [u8; 3] = [90, 90, 90];
pub const DEFAULT_OFF_ROAD_COLOR: [u8; 3] = [40, 60, 40];
pub const DEFAULT_SKY_COLOR: [u8; 3] = [140, 180, 220];

impl Track {
    /// Build a track from segments starting at the origin heading +y.
    pub fn new(segments: &[TrackSegment]) -> Result<Self, TrackError> {
        Self::with_geometry(segments, DEFAULT_MARKER_WIDTH, DEFAULT_LANE_HALF_WIDTH)
    }

    pub fn with_geometry(
        segments: &[TrackSegment],
        marker_width: f64,
        lane_half_width: f64,
    ) -> Result<Self, TrackError> {
        Self::with_start(
            Pose {
                x: 0.0,
                y: 0.0,
                heading: 0.0,
            },
            segments,
            marker_width,
            lane_half_width,
        )
    }

    /// Build a track laid out from an arbitrary start pose.
    pub fn with_start(
        start: Pose,
        segments: &[TrackSegment],
        marker_width: f64,
        lane_half_width: f64,
    ) -> Result<Self, TrackError> {
        if segments.is_empty() {
            return Err(TrackError::InvalidSegment("segment list is empty".into()));
        }
        if marker_width.is_nan()
            || marker_width <= 0.0
            || lane_half_width.is_nan()
            || lane_half_width <= marker_width / 2.0
        {
            return Err(TrackError::InvalidSegment(
                "marker/lane widths out of range".into(),
            ));
        }
        let mut placed = Vec::with_capacity(segments.len());
        let mut cursor = start;
        let mut s0 = 0.0;
        for seg in segments {
            seg.validate()?;
            let ps = PlacedSegment::place(seg, cursor, s0);
            cursor = ps.pose_at(ps.length);
            s0 += ps.length;
            placed.push(ps);
        }
        let end = cursor;
        let dh = (end.heading - start.heading).rem_euclid(std::f64::consts::TAU);
        let closed = (end.x - start.x).abs() < 1e-6
            && (end.y - start.y).abs() < 1e-6
            && dh.min(std::f64::consts::TAU - dh) < 1e-6;
        Ok(Self {
            placed,
            total_length: s0,
            closed,
            marker_width,
            lane_half_width,
            marker_color: DEFAULT_MARKER_COLOR,
            boundary_color: DEFAULT_BOUNDARY_COLOR,
            road_color: DEFAULT_ROAD_COLOR,
            off_road_color: DEFAULT_OFF_ROAD_COLOR,
            sky_color: DEFAULT_SKY_COLOR,
        })
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Whether the last segment returns to the start pose.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Centerline pose at arc length `s`. Closed tracks wrap; open tracks
    /// clamp to the endpoints.
    pub fn point_at(&self, s: f64) -> Pose {
        let s = if self.closed {
            s.rem_euclid(self.total_length)
        } else {
            s.clamp(0.0, self.total_length)
        };
        // Last segment absorbs s == total_length.
        let idx = match self
            .placed
            .binary_search_by(|p| p.s0.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let p = &self.placed[idx];
        p.pose_at((s - p.s0).clamp(0.0, p.length))
    }

    /// Unsigned distance from `(qx, qy)` to the centerline.
    pub fn distance(&self, qx: f64, qy: f64) -> f64 {
        let mut best_d2 = f64::INFINITY;
        for p in &self.placed {
            if p.dist2_lower_bound(qx, qy) >= best_d2 {
                continue;
            }
            let (_, d2) = p.nearest(qx, qy);
            if d2 < best_d2 {
                best_d2 = d2;
            }
        }
        best_d2.sqrt()
    }

    /// Nearest centerline point to `(qx, qy)` over all segments.
    pub fn nearest(&self, qx: f64, qy: f64) -> NearestPoint {
        let mut best_s = 0.0;
        let mut best_d2 = f64::INFINITY;
        for p in &self.placed {
            if p.dist2_lower_bound(qx, qy) >= best_d2 {
                continue;
            }
            let (t, d2) = p.nearest(qx, qy);
            if d2 < best_d2 {
                best_d2 = d2;
                best_s = p.s0 + t;
            }
        }
        let pose = self.point_at(best_s);
        let (rx, ry) = pose.right_normal();
        let signed = (qx - pose.x) * rx + (qy - pose.y) * ry;
        NearestPoint {
            s: best_s,
            distance: best_d2.sqrt(),
            signed_lateral: signed,
            pose,
        }
    }
}
