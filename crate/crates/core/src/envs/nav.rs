use serde::{Deserialize, Serialize};

use super::{check_action, Environment, Transition};
use crate::error::Result;
use crate::geometry::{length, sub, Point, Rect};
use crate::vector::{ActionVec, StateVec};

/// Point agent among axis-aligned rectangular obstacles. Edge cost is distance travelled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nav2DWorld {
    pub bounds: Rect,
    pub obstacles: Vec<Rect>,
    pub goal_center: Point,
    pub goal_radius: f64,
    pub max_action_norm: f64,
}

impl Nav2DWorld {
    pub fn point_free(&self, p: Point) -> bool {
        self.bounds.contains(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn segment_free(&self, p0: Point, p1: Point) -> bool {
        self.bounds.contains(p0)
            && self.bounds.contains(p1)
            && !self.obstacles.iter().any(|o| o.intersects_segment(p0, p1))
    }

    pub fn distance_to_goal(&self, p: Point) -> f64 {
        length(sub(p, self.goal_center))
    }
}

fn point(s: &StateVec) -> Point {
    [s[0], s[1]]
}

impl Environment for Nav2DWorld {
    fn state_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn max_action_norm(&self) -> f64 {
        self.max_action_norm
    }

    fn angular_dims(&self) -> Vec<bool> {
        vec![false, false]
    }

    fn evaluate(&self, s: &StateVec, a: &ActionVec) -> Result<Transition> {
        check_action(self, s, a)?;
        let p0 = point(s);
        let p1 = [s[0] + a[0], s[1] + a[1]];
        Ok(Transition {
            next: StateVec::new(p1.to_vec()),
            cost: a.norm(),
            valid: self.segment_free(p0, p1),
        })
    }

    fn goal_satisfied(&self, s: &StateVec) -> bool {
        self.distance_to_goal(point(s)) <= self.goal_radius
    }

    fn valid_state(&self, s: &StateVec) -> bool {
        s.dim() == 2 && s.is_finite() && self.point_free(point(s))
    }
}
