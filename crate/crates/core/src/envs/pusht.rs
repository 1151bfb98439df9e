//! Planar quasi-static pushing of a T-shaped object by a disc pusher.
//!
//! State layout: `[pusher_x, pusher_y, object_x, object_y, object_theta]`, where the
//! object pose is that of its centroid. Actions are pusher displacements.
//!
//! Each action is integrated in substeps. Whenever the pusher disc penetrates the T,
//! the object translates along the pusher's motion direction by the penetration depth
//! (scaled by `kappa_t`) and rotates by `kappa_r * depth * cross(contact - centroid,
//! direction)`. Any residual overlap is then removed by sliding the object further
//! along the motion direction.

use serde::{Deserialize, Serialize};

use super::{check_action, Environment, Transition};
use crate::error::{Error, Result};
use crate::geometry::{
    add, area, centroid, contains_point, convex_intersect, cross, dot, intersection_area, length,
    scale, signed_distance, sub, Point, Pose2, Rect,
};
use crate::vector::{wrap_angle, ActionVec, StateVec};

pub type TPose = Pose2;

const RESOLVE_ITERS: usize = 3;
const RESOLVE_TOL: f64 = 1e-6;

/// A T built from a horizontal bar sitting on a vertical stem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TShape {
    pub stem_w: f64,
    pub stem_h: f64,
    pub bar_w: f64,
    pub bar_h: f64,
}

impl TShape {
    /// The two convex parts (stem, bar) in the body frame, centroid at the origin,
    /// counter-clockwise.
    pub fn parts(&self) -> [Vec<Point>; 2] {
        let stem = Rect::new(-self.stem_w / 2.0, 0.0, self.stem_w / 2.0, self.stem_h);
        let bar = Rect::new(
            -self.bar_w / 2.0,
            self.stem_h,
            self.bar_w / 2.0,
            self.stem_h + self.bar_h,
        );
        let (stem, bar) = (stem.to_polygon(), bar.to_polygon());
        let (a_s, a_b) = (area(&stem), area(&bar));
        let (c_s, c_b) = (centroid(&stem), centroid(&bar));
        let cy = (a_s * c_s[1] + a_b * c_b[1]) / (a_s + a_b);
        let shift = |poly: Vec<Point>| poly.into_iter().map(|p| [p[0], p[1] - cy]).collect();
        [shift(stem), shift(bar)]
    }

    pub fn area(&self) -> f64 {
        self.stem_w * self.stem_h + self.bar_w * self.bar_h
    }

    /// Largest distance between two points of the shape.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Point> = self.parts().concat();
        let mut d: f64 = 0.0;
        for a in &pts {
            for b in &pts {
                d = d.max(length(sub(*a, *b)));
            }
        }
        d
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [self.stem_w, self.stem_h, self.bar_w, self.bar_h];
        if dims.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::ContractViolation(format!(
                "degenerate T shape {self:?}"
            )));
        }
        Ok(())
    }

    pub fn placed(&self, pose: &TPose) -> [Vec<Point>; 2] {
        let [a, b] = self.parts();
        [pose.apply_all(&a), pose.apply_all(&b)]
    }
}

/// Fraction of the T at `pose_b` covered by the T at `pose_a`.
pub fn coverage(pose_a: &TPose, pose_b: &TPose, shape: &TShape) -> Result<f64> {
    shape.validate()?;
    let a = shape.placed(pose_a);
    let b = shape.placed(pose_b);
    let mut overlap = 0.0;
    for pa in &a {
        for pb in &b {
            overlap += intersection_area(pa, pb);
        }
    }
    let total = area(&b[0]) + area(&b[1]);
    Ok((overlap / total).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushT2DWorld {
    pub table: Rect,
    pub shape: TShape,
    pub pusher_radius: f64,
    pub goal: TPose,
    pub obstacles: Vec<Rect>,
    pub kappa_t: f64,
    pub kappa_r: f64,
    pub substep: f64,
    pub max_action_norm: f64,
    pub cost_floor: f64,
    pub goal_coverage: f64,
}

/// Deepest overlap between the pusher disc and the object.
#[derive(Clone, Copy, Debug)]
struct Contact {
    depth: f64,
    point: Point,
    /// Pusher centre lies inside the polygon.
    inside: bool,
}

pub fn object_pose(s: &StateVec) -> TPose {
    Pose2::new(s[2], s[3], s[4])
}

pub fn pusher_position(s: &StateVec) -> Point {
    [s[0], s[1]]
}

pub fn pack_state(pusher: Point, pose: &TPose) -> StateVec {
    StateVec::new(vec![pusher[0], pusher[1], pose.x, pose.y, wrap_angle(pose.theta)])
}

impl PushT2DWorld {
    pub fn object_polygons(&self, pose: &TPose) -> [Vec<Point>; 2] {
        self.shape.placed(pose)
    }

    /// Distance from the pusher centre to the object surface (0 when inside).
    pub fn pusher_object_distance(&self, pusher: Point, pose: &TPose) -> f64 {
        self.object_polygons(pose)
            .iter()
            .map(|poly| signed_distance(poly, pusher).0.max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    fn contact(&self, pusher: Point, pose: &TPose) -> Option<Contact> {
        let mut best: Option<Contact> = None;
        for poly in self.object_polygons(pose) {
            let (sd, point) = signed_distance(&poly, pusher);
            let depth = self.pusher_radius - sd;
            if depth > 0.0 && best.is_none_or(|b| depth > b.depth) {
                best = Some(Contact {
                    depth,
                    point,
                    inside: sd < 0.0,
                });
            }
        }
        best
    }

    /// Advances pusher and object by one action.
    pub fn simulate(&self, pusher: Point, pose: TPose, a: &[f64]) -> (Point, TPose) {
        self.simulate_with_substep(pusher, pose, a, self.substep)
    }

    pub fn simulate_with_substep(
        &self,
        mut pusher: Point,
        mut pose: TPose,
        a: &[f64],
        substep: f64,
    ) -> (Point, TPose) {
        let delta = [a[0], a[1]];
        let len = length(delta);
        if len == 0.0 {
            return (pusher, pose);
        }
        let n = (len / substep).ceil().max(1.0) as usize;
        let step = scale(delta, 1.0 / n as f64);
        let dir = scale(delta, 1.0 / len);
        for _ in 0..n {
            pusher = add(pusher, step);
            let Some(c) = self.contact(pusher, &pose) else {
                continue;
            };
            let lever = sub(c.point, pose.position());
            pose.theta += self.kappa_r * c.depth * cross(lever, dir);
            let shift = scale(dir, self.kappa_t * c.depth);
            pose.x += shift[0];
            pose.y += shift[1];
            for _ in 0..RESOLVE_ITERS {
                let Some(r) = self.contact(pusher, &pose) else {
                    break;
                };
                if r.depth <= RESOLVE_TOL {
                    break;
                }
                // Direction the object must move to clear the pusher.
                let away = if r.inside {
                    sub(pusher, r.point)
                } else {
                    sub(r.point, pusher)
                };
                let n_len = length(away);
                let cos = if n_len > 0.0 {
                    dot(dir, scale(away, 1.0 / n_len)).max(0.1)
                } else {
                    1.0
                };
                let t = r.depth / cos;
                pose.x += dir[0] * t;
                pose.y += dir[1] * t;
            }
        }
        pose.theta = wrap_angle(pose.theta);
        (pusher, pose)
    }

    pub fn object_in_table(&self, pose: &TPose) -> bool {
        self.object_polygons(pose)
            .iter()
            .all(|poly| poly.iter().all(|&p| self.table.contains(p)))
    }

    pub fn object_hits_obstacle(&self, pose: &TPose) -> bool {
        let polys = self.object_polygons(pose);
        self.obstacles.iter().any(|o| {
            let rect = o.to_polygon();
            polys.iter().any(|poly| convex_intersect(poly, &rect))
        })
    }

    pub fn coverage_of(&self, pose: &TPose) -> f64 {
        coverage(pose, &self.goal, &self.shape).unwrap_or(0.0)
    }

    pub fn pusher_overlaps_object(&self, pusher: Point, pose: &TPose) -> bool {
        self.contact(pusher, pose)
            .is_some_and(|c| c.depth > RESOLVE_TOL * 10.0)
    }

    pub fn point_in_object(&self, p: Point, pose: &TPose) -> bool {
        self.object_polygons(pose)
            .iter()
            .any(|poly| contains_point(poly, p))
    }
}

impl Environment for PushT2DWorld {
    fn state_dim(&self) -> usize {
        5
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn max_action_norm(&self) -> f64 {
        self.max_action_norm
    }

    fn angular_dims(&self) -> Vec<bool> {
        vec![false, false, false, false, true]
    }

    fn evaluate(&self, s: &StateVec, a: &ActionVec) -> Result<Transition> {
        check_action(self, s, a)?;
        let (pusher, pose) = self.simulate(pusher_position(s), object_pose(s), a.as_slice());
        let valid = self.table.contains(pusher)
            && self.object_in_table(&pose)
            && !self.object_hits_obstacle(&pose);
        Ok(Transition {
            next: pack_state(pusher, &pose),
            cost: a.norm() + self.cost_floor,
            valid,
        })
    }

    fn goal_satisfied(&self, s: &StateVec) -> bool {
        self.coverage_of(&object_pose(s)) >= self.goal_coverage
    }

    /// Same conditions as a valid transition. Pusher/object overlap is allowed, since
    /// contact resolution may leave a small residual penetration.
    fn valid_state(&self, s: &StateVec) -> bool {
        if s.dim() != 5 || !s.is_finite() {
            return false;
        }
        let pose = object_pose(s);
        self.table.contains(pusher_position(s))
            && self.object_in_table(&pose)
            && !self.object_hits_obstacle(&pose)
    }
}
