use std::f64::consts::{FRAC_PI_2, PI};

use super::SimError;
use crate::kinematics::{wrap, Pose, RimSpeeds};

/// Bang-bang waypoint follower settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    /// Both wheels on straights, and the outer wheel in turns, m/s.
    pub straight_speed: f64,
    /// Inner wheel in turns, m/s.
    pub turn_inner_speed: f64,
    /// Distance at which a waypoint counts as reached, meters.
    pub capture_radius: f64,
    /// Bearing error below which the robot drives straight, radians.
    pub heading_tolerance: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            straight_speed: 0.3,
            turn_inner_speed: 0.05,
            capture_radius: 0.05,
            heading_tolerance: 0.05,
        }
    }
}

/// Start pose followed by an ordered list of waypoints; consecutive points
/// form the line segments to follow.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPlan {
    start: Pose,
    waypoints: Vec<(f64, f64)>,
}

impl PathPlan {
    pub fn new(start: Pose, waypoints: Vec<(f64, f64)>) -> Result<Self, SimError> {
        if waypoints.is_empty() {
            return Err(SimError::EmptyPlan);
        }
        Ok(PathPlan { start, waypoints })
    }

    /// Starts at the first point, facing the second.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self, SimError> {
        if points.len() < 2 {
            return Err(SimError::EmptyPlan);
        }
        let (x0, y0) = points[0];
        let (x1, y1) = points[1];
        let start = Pose::new(x0, y0, (y1 - y0).atan2(x1 - x0));
        PathPlan::new(start, points[1..].to_vec())
    }

    pub fn start(&self) -> Pose {
        self.start
    }

    pub fn waypoints(&self) -> &[(f64, f64)] {
        &self.waypoints
    }

    /// Sum of segment lengths from the start pose.
    pub fn length(&self) -> f64 {
        let mut prev = (self.start.x, self.start.y);
        let mut total = 0.0;
        for &w in &self.waypoints {
            total += (w.0 - prev.0).hypot(w.1 - prev.1);
            prev = w;
        }
        total
    }
}

/// Axis-aligned rectangle with its lower-left corner at the origin and
/// circular corner arcs; driven counterclockwise from `(corner_radius, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundedRectangle {
    pub width: f64,
    pub height: f64,
    pub corner_radius: f64,
    /// Chords per quarter arc.
    pub arc_segments: usize,
}

impl Default for RoundedRectangle {
    fn default() -> Self {
        RoundedRectangle {
            width: 4.0,
            height: 3.0,
            corner_radius: 0.5,
            arc_segments: 6,
        }
    }
}

impl RoundedRectangle {
    pub fn plan(&self) -> Result<PathPlan, SimError> {
        let (w, h, r) = (self.width, self.height, self.corner_radius);
        if !(r >= 0.0 && 2.0 * r <= w && 2.0 * r <= h && w > 0.0 && h > 0.0) {
            return Err(SimError::InvalidParam {
                field: "rounded_rectangle",
                reason: format!(
                    "need 0 <= 2·corner_radius <= width, height (got {w} × {h}, r = {r})"
                ),
            });
        }
        let n = self.arc_segments.max(1);
        let mut pts = Vec::new();
        // (corner centre, edge end before the arc, arc start angle)
        let corners = [
            ((w - r, r), (w - r, 0.0), -FRAC_PI_2),
            ((w - r, h - r), (w, h - r), 0.0),
            ((r, h - r), (r, h), FRAC_PI_2),
            ((r, r), (0.0, r), PI),
        ];
        for (centre, edge_end, a0) in corners {
            pts.push(edge_end);
            if r > 0.0 {
                for k in 1..=n {
                    let a = a0 + FRAC_PI_2 * k as f64 / n as f64;
                    pts.push((centre.0 + r * a.cos(), centre.1 + r * a.sin()));
                }
            }
        }
        PathPlan::new(Pose::new(r, 0.0, 0.0), pts)
    }
}

/// Stateful follower over a [`PathPlan`].
#[derive(Debug, Clone)]
pub struct PathController {
    plan: PathPlan,
    params: ControllerParams,
    next: usize,
}

impl PathController {
    pub fn new(plan: PathPlan, params: ControllerParams) -> Self {
        PathController {
            plan,
            params,
            next: 0,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.next >= self.plan.waypoints.len()
    }

    /// Index of the waypoint currently being chased.
    pub fn target_index(&self) -> usize {
        self.next
    }

    fn segment_start(&self) -> (f64, f64) {
        if self.next == 0 {
            (self.plan.start.x, self.plan.start.y)
        } else {
            self.plan.waypoints[self.next - 1]
        }
    }

    /// Waypoint is reached inside the capture radius, or once the robot has
    /// passed the end of the current segment.
    fn reached(&self, pose: &Pose) -> bool {
        let target = self.plan.waypoints[self.next];
        let (dx, dy) = (target.0 - pose.x, target.1 - pose.y);
        if dx.hypot(dy) <= self.params.capture_radius {
            return true;
        }
        let from = self.segment_start();
        let (sx, sy) = (target.0 - from.0, target.1 - from.1);
        let len2 = sx * sx + sy * sy;
        len2 > 0.0 && ((pose.x - from.0) * sx + (pose.y - from.1) * sy) >= len2
    }

    /// Rim speeds for the current estimated pose; `(0, 0)` once exhausted.
    pub fn command(&mut self, pose: &Pose) -> RimSpeeds {
        while !self.is_finished() && self.reached(pose) {
            self.next += 1;
        }
        if self.is_finished() {
            return RimSpeeds::new(0.0, 0.0);
        }
        let target = self.plan.waypoints[self.next];
        let bearing = (target.1 - pose.y).atan2(target.0 - pose.x);
        let error = wrap(bearing - pose.theta);
        let (fast, slow) = (self.params.straight_speed, self.params.turn_inner_speed);
        if error > self.params.heading_tolerance {
            RimSpeeds::new(fast, slow)
        } else if error < -self.params.heading_tolerance {
            RimSpeeds::new(slow, fast)
        } else {
            RimSpeeds::new(fast, fast)
        }
    }
}

/// Single-shot form of [`PathController::command`].
pub fn path_controller(pose: &Pose, controller: &mut PathController) -> RimSpeeds {
    controller.command(pose)
}
