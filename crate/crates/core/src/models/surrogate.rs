//! Closed-form actor/critic pairs standing in for trained networks.

use rand::RngCore;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ActionSampler, CostToGo, SamplingMode};
use crate::envs::{object_pose, pusher_position, PushT2DWorld, TPose, TShape};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{add, dot, length, ray_exit, scale, sub, Point};
use crate::vector::{clip_norm, wrap_angle, ActionVec, StateVec};

/// The eight grid moves of length `step` (axis) and `step * sqrt 2` (diagonal).
pub fn king_moves(step: f64) -> Vec<ActionVec> {
    [
        (1.0, 0.0),
        (0.0, 1.0),
        (-1.0, 0.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (-1.0, 1.0),
        (-1.0, -1.0),
        (1.0, -1.0),
    ]
    .iter()
    .map(|&(x, y)| ActionVec::new(vec![x * step, y * step]))
    .collect()
}

fn gaussian(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("noise sigma {sigma}: {e}")))
}

fn perturb(mean: Point, noise: &Normal<f64>, max_norm: f64, rng: &mut dyn RngCore) -> ActionVec {
    let mut a = vec![mean[0] + noise.sample(rng), mean[1] + noise.sample(rng)];
    clip_norm(&mut a, max_norm);
    ActionVec::new(a)
}

/// Nav2D surrogate: the actor heads straight for the goal, the critic is the
/// straight-line remaining distance after the step.
#[derive(Clone, Debug)]
pub struct NavSurrogate {
    pub goal: Point,
    pub sigma: f64,
    pub max_norm: f64,
    mode: SamplingMode,
    probes: Vec<ActionVec>,
}

impl NavSurrogate {
    pub fn new(goal: Point, sigma: f64, max_norm: f64) -> Result<Self> {
        gaussian(sigma)?;
        Ok(NavSurrogate {
            goal,
            sigma,
            max_norm,
            mode: SamplingMode::Stochastic,
            probes: Vec::new(),
        })
    }

    /// Fixed action list returned on every call, cycled to the requested count.
    pub fn deterministic(mut self, probes: Vec<ActionVec>) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::Config("deterministic mode needs probe actions".into()));
        }
        for p in &probes {
            check_dim("probe action", 2, p.dim())?;
        }
        self.mode = SamplingMode::Deterministic;
        self.probes = probes;
        Ok(self)
    }

    pub fn mean_action(&self, s: &StateVec) -> Point {
        let mut d = vec![self.goal[0] - s[0], self.goal[1] - s[1]];
        clip_norm(&mut d, self.max_norm);
        [d[0], d[1]]
    }
}

impl ActionSampler for NavSurrogate {
    fn sample_actions(
        &self,
        s: &StateVec,
        k: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<ActionVec>> {
        check_dim("nav state", 2, s.dim())?;
        match self.mode {
            SamplingMode::Deterministic => {
                Ok((0..k).map(|j| self.probes[j % self.probes.len()].clone()).collect())
            }
            SamplingMode::Stochastic => {
                let mean = self.mean_action(s);
                let noise = gaussian(self.sigma)?;
                Ok((0..k)
                    .map(|_| perturb(mean, &noise, self.max_norm, rng))
                    .collect())
            }
        }
    }
}

impl CostToGo for NavSurrogate {
    fn cost_to_go(&self, s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
        check_dim("nav state", 2, s.dim())?;
        actions
            .iter()
            .map(|a| {
                check_dim("nav action", 2, a.dim())?;
                let next = [s[0] + a[0], s[1] + a[1]];
                Ok(a.norm() + length(sub(next, self.goal)))
            })
            .collect()
    }
}

/// Sideways contact offset per radian of heading error.
const ROTATION_GAIN: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushTCriticWeights {
    pub position: f64,
    pub angle: f64,
    pub reach: f64,
    /// Extra clearance beyond the pusher radius that still counts as touching.
    pub contact_margin: f64,
}

impl Default for PushTCriticWeights {
    fn default() -> Self {
        PushTCriticWeights {
            position: 1.0,
            angle: 0.1,
            reach: 1.0,
            contact_margin: 0.005,
        }
    }
}

/// Push-T surrogate. The actor walks the pusher to the far side of the T from the goal
/// and then pushes towards the goal. The critic adds object pose error to the gap
/// between the pusher (after the step) and the T.
#[derive(Clone, Debug)]
pub struct PushTSurrogate {
    goal: TPose,
    shape: TShape,
    pusher_radius: f64,
    pub weights: PushTCriticWeights,
    pub sigma: f64,
    pub max_norm: f64,
    /// Sideways shift of the contact point per radian of angle error.
    pub rotation_gain: f64,
    mode: SamplingMode,
    probes: Vec<[f64; 2]>,
}

impl PushTSurrogate {
    pub fn new(world: &PushT2DWorld, weights: PushTCriticWeights, sigma: f64) -> Result<Self> {
        gaussian(sigma)?;
        Ok(PushTSurrogate {
            goal: world.goal,
            shape: world.shape,
            pusher_radius: world.pusher_radius,
            weights,
            sigma,
            max_norm: world.max_action_norm,
            rotation_gain: ROTATION_GAIN,
            mode: SamplingMode::Stochastic,
            probes: Vec::new(),
        })
    }

    /// Replaces Gaussian draws by `sigma * offset` for each listed offset.
    pub fn deterministic(mut self, offsets: Vec<[f64; 2]>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::Config("deterministic mode needs probe offsets".into()));
        }
        self.mode = SamplingMode::Deterministic;
        self.probes = offsets;
        Ok(self)
    }

    fn surface_distance(&self, p: Point, pose: &TPose) -> f64 {
        self.shape
            .placed(pose)
            .iter()
            .map(|poly| crate::geometry::signed_distance(poly, p).0.max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Unit vector from the object towards the goal position, if they are apart.
    fn goal_direction(&self, pose: &TPose) -> Option<Point> {
        let d = sub(self.goal.position(), pose.position());
        let len = length(d);
        (len > 1e-9).then(|| scale(d, 1.0 / len))
    }

    /// Pusher position just outside the T on the side opposite the goal. The contact
    /// line is shifted sideways to turn the T towards the goal angle while pushing.
    pub fn push_point(&self, pose: &TPose) -> Option<Point> {
        let dir = self.goal_direction(pose)?;
        Some(add(pose.position(), self.push_offset(pose, dir)))
    }

    fn push_offset(&self, pose: &TPose, dir: Point) -> Point {
        let back = scale(dir, -1.0);
        let perp = [-dir[1], dir[0]];
        let err = wrap_angle(self.goal.theta - pose.theta);
        let half = self.shape.bar_w / 4.0;
        let lat = (-self.rotation_gain * err).clamp(-half, half);
        let origin = add(pose.position(), scale(perp, lat));
        let exit = self
            .shape
            .placed(pose)
            .iter()
            .filter_map(|poly| ray_exit(poly, origin, back))
            .fold(0.0_f64, f64::max);
        add(
            scale(perp, lat),
            scale(back, exit + self.pusher_radius + self.weights.contact_margin),
        )
    }

    pub fn mean_action(&self, s: &StateVec) -> Point {
        let pose = object_pose(s);
        let pusher = pusher_position(s);
        let Some(dir) = self.goal_direction(&pose) else {
            return [0.0, 0.0];
        };
        let offset = self.push_offset(&pose, dir);
        let target = add(pose.position(), offset);
        let tol = self.pusher_radius + self.weights.contact_margin;
        let perp = [-dir[1], dir[0]];
        let rel = sub(pusher, pose.position());
        let ahead = dot(rel, dir);
        let lateral = dot(rel, perp);
        let behind = dot(offset, dir);
        let clearance = self.shape.diameter() / 2.0 + tol;
        let remaining = length(sub(self.goal.position(), pose.position()));
        let mean = if length(sub(target, pusher)) <= tol {
            scale(dir, remaining.min(self.max_norm))
        } else if ahead <= behind + tol {
            sub(target, pusher)
        } else if lateral.abs() >= clearance {
            scale(dir, -self.max_norm)
        } else {
            let side = if lateral >= 0.0 { 1.0 } else { -1.0 };
            scale(perp, side * self.max_norm)
        };
        let mut v = mean.to_vec();
        clip_norm(&mut v, self.max_norm);
        [v[0], v[1]]
    }
}

impl ActionSampler for PushTSurrogate {
    fn sample_actions(
        &self,
        s: &StateVec,
        k: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<ActionVec>> {
        check_dim("push-t state", 5, s.dim())?;
        let mean = self.mean_action(s);
        match self.mode {
            SamplingMode::Deterministic => Ok((0..k)
                .map(|j| {
                    let o = self.probes[j % self.probes.len()];
                    let mut a = vec![mean[0] + self.sigma * o[0], mean[1] + self.sigma * o[1]];
                    clip_norm(&mut a, self.max_norm);
                    ActionVec::new(a)
                })
                .collect()),
            SamplingMode::Stochastic => {
                let noise = gaussian(self.sigma)?;
                Ok((0..k)
                    .map(|_| perturb(mean, &noise, self.max_norm, rng))
                    .collect())
            }
        }
    }
}

impl CostToGo for PushTSurrogate {
    fn cost_to_go(&self, s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
        check_dim("push-t state", 5, s.dim())?;
        let pose = object_pose(s);
        let pusher = pusher_position(s);
        let w = &self.weights;
        let pose_err = w.position * length(sub(pose.position(), self.goal.position()))
            + w.angle * wrap_angle(pose.theta - self.goal.theta).abs();
        let contact = self.pusher_radius + w.contact_margin;
        actions
            .iter()
            .map(|a| {
                check_dim("push-t action", 2, a.dim())?;
                let next = [pusher[0] + a[0], pusher[1] + a[1]];
                let gap = (self.surface_distance(next, &pose) - contact).max(0.0);
                Ok(pose_err + w.reach * gap)
            })
            .collect()
    }
}
