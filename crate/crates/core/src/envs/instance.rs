//! Seeded problem instances and their text serialization.
//!
//! Instance files are TOML:
//!
//! ```toml
//! task = "PushTObs"          # NavShelf | PushTFixed | PushTRand | PushTObs
//! seed = 7
//!
//! [world]
//! kind = "PushT"             # or "Nav"
//! pusher = [x, y]            # PushT: initial pusher centre (m)
//! object = { x, y, theta }   # PushT: initial T pose (m, rad)
//! # start = [x, y]           # Nav: start position (m)
//!
//! [world.env]                # every field of Nav2DWorld / PushT2DWorld
//! ...
//! ```

use std::path::Path as FsPath;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Environment, GridHeuristic, Nav2DWorld, Problem, PushT2DWorld, TPose, TShape};
use crate::envs::pusht::pack_state;
use crate::error::{Error, Result};
use crate::geometry::{Point, Pose2, Rect};
use crate::vector::StateVec;

const MAX_TRIES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    NavShelf,
    PushTFixed,
    PushTRand,
    PushTObs,
}

impl Task {
    pub fn parse(s: &str) -> Result<Task> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "navshelf" => Ok(Task::NavShelf),
            "pushtfixed" => Ok(Task::PushTFixed),
            "pushtrand" => Ok(Task::PushTRand),
            "pushtobs" => Ok(Task::PushTObs),
            _ => Err(Error::Config(format!("unknown task '{s}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::NavShelf => "NavShelf",
            Task::PushTFixed => "PushTFixed",
            Task::PushTRand => "PushTRand",
            Task::PushTObs => "PushTObs",
        }
    }
}

/// Constants of the shelf navigation analog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NavShelfParams {
    pub bounds: Rect,
    pub start: Point,
    pub max_action_norm: f64,
    pub goal_radius: f64,
    /// Cell size used to confirm goals are reachable.
    pub reach_cell: f64,
}

impl Default for NavShelfParams {
    fn default() -> Self {
        NavShelfParams {
            bounds: Rect::new(0.0, 0.0, 2.0, 2.0),
            start: [0.125, 0.125],
            max_action_norm: 0.1,
            goal_radius: 0.1,
            reach_cell: 0.05,
        }
    }
}

impl NavShelfParams {
    /// Shelf unit open towards -x: four boards, a back wall, and a free-standing post.
    pub fn obstacles(&self) -> Vec<Rect> {
        let mut obs: Vec<Rect> = [0.40, 0.80, 1.20, 1.60]
            .iter()
            .map(|&y| Rect::new(0.60, y, 1.60, y + 0.04))
            .collect();
        obs.push(Rect::new(1.60, 0.40, 1.64, 1.64));
        obs.push(Rect::new(0.20, 0.85, 0.35, 1.15));
        obs
    }
}

/// Constants of the push-T analogs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PushTParams {
    pub table: Rect,
    pub shape: TShape,
    pub pusher_radius: f64,
    pub kappa_t: f64,
    pub kappa_r: f64,
    pub substep: f64,
    pub max_action_norm: f64,
    /// Added to every edge cost, as a fraction of `max_action_norm`.
    pub cost_floor_fraction: f64,
    pub goal_coverage: f64,
    pub fixed_goal: TPose,
    /// Initial object positions are drawn from this box.
    pub start_region: Rect,
    /// Initial (and random goal) orientations are drawn from [-max, max].
    pub max_start_angle: f64,
    /// The pusher starts within this distance of the object centroid.
    pub pusher_spawn_radius: f64,
    /// Two blocks used by the obstacle variant. The gap between them is off to one
    /// side of the straight route from the start region to the goal.
    pub obstacle_blocks: Vec<Rect>,
}

impl Default for PushTParams {
    fn default() -> Self {
        PushTParams {
            table: Rect::new(-0.5, -0.5, 0.5, 0.5),
            shape: TShape {
                stem_w: 0.06,
                stem_h: 0.18,
                bar_w: 0.24,
                bar_h: 0.06,
            },
            pusher_radius: 0.015,
            kappa_t: 1.0,
            kappa_r: 20.0,
            substep: 0.005,
            max_action_norm: 0.05,
            cost_floor_fraction: 0.01,
            goal_coverage: 0.9,
            fixed_goal: Pose2::new(0.0, -0.2, 0.0),
            start_region: Rect::new(-0.25, 0.12, 0.25, 0.25),
            max_start_angle: 0.5,
            pusher_spawn_radius: 0.2,
            obstacle_blocks: vec![
                Rect::new(-0.5, -0.06, 0.07, 0.06),
                Rect::new(0.33, -0.06, 0.5, 0.06),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum World {
    Nav {
        start: Point,
        env: Nav2DWorld,
    },
    PushT {
        pusher: Point,
        object: TPose,
        env: PushT2DWorld,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub task: Task,
    pub seed: u64,
    pub world: World,
}

impl Instance {
    pub fn id(&self) -> String {
        format!("{}-{}", self.task.name(), self.seed)
    }

    pub fn start_state(&self) -> StateVec {
        match &self.world {
            World::Nav { start, .. } => StateVec::new(start.to_vec()),
            World::PushT { pusher, object, .. } => pack_state(*pusher, object),
        }
    }

    pub fn environment(&self) -> Arc<dyn Environment> {
        match &self.world {
            World::Nav { env, .. } => Arc::new(env.clone()),
            World::PushT { env, .. } => Arc::new(env.clone()),
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::new(self.environment(), self.start_state())
    }

    pub fn nav(&self) -> Option<&Nav2DWorld> {
        match &self.world {
            World::Nav { env, .. } => Some(env),
            _ => None,
        }
    }

    pub fn pusht(&self) -> Option<&PushT2DWorld> {
        match &self.world {
            World::PushT { env, .. } => Some(env),
            _ => None,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Validation(format!("serializing instance: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map(|s| text[..s.start].matches('\n').count() + 1)
                .unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// Generates the instance of `task` for `seed` with default constants.
pub fn generate(task: Task, seed: u64) -> Result<Instance> {
    generate_with(task, seed, &NavShelfParams::default(), &PushTParams::default())
}

pub fn generate_with(
    task: Task,
    seed: u64,
    nav: &NavShelfParams,
    pusht: &PushTParams,
) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let world = match task {
        Task::NavShelf => gen_nav(nav, &mut rng)?,
        Task::PushTFixed | Task::PushTRand | Task::PushTObs => gen_pusht(task, pusht, &mut rng)?,
    };
    Ok(Instance { task, seed, world })
}

fn gen_nav(p: &NavShelfParams, rng: &mut ChaCha8Rng) -> Result<World> {
    let mut env = Nav2DWorld {
        bounds: p.bounds,
        obstacles: p.obstacles(),
        goal_center: p.start,
        goal_radius: p.goal_radius,
        max_action_norm: p.max_action_norm,
    };
    if !env.point_free(p.start) {
        return Err(Error::Generation("NavShelf start is not free".into()));
    }
    let margin = p.goal_radius;
    for _ in 0..MAX_TRIES {
        let g = [
            rng.random_range(p.bounds.min[0] + margin..p.bounds.max[0] - margin),
            rng.random_range(p.bounds.min[1] + margin..p.bounds.max[1] - margin),
        ];
        if !env.point_free(g) || crate::geometry::length(crate::geometry::sub(g, p.start)) < 0.5 {
            continue;
        }
        env.goal_center = g;
        let Ok(h) = GridHeuristic::new(&env, p.reach_cell) else {
            continue;
        };
        if h.query(p.start).is_finite() {
            return Ok(World::Nav {
                start: p.start,
                env,
            });
        }
    }
    Err(Error::Generation(format!(
        "no reachable NavShelf goal after {MAX_TRIES} tries"
    )))
}

fn sample_pose(rng: &mut ChaCha8Rng, region: &Rect, max_angle: f64) -> TPose {
    Pose2::new(
        rng.random_range(region.min[0]..=region.max[0]),
        rng.random_range(region.min[1]..=region.max[1]),
        rng.random_range(-max_angle..=max_angle),
    )
}

fn gen_pusht(task: Task, p: &PushTParams, rng: &mut ChaCha8Rng) -> Result<World> {
    let mut env = PushT2DWorld {
        table: p.table,
        shape: p.shape,
        pusher_radius: p.pusher_radius,
        goal: p.fixed_goal,
        obstacles: if task == Task::PushTObs {
            p.obstacle_blocks.clone()
        } else {
            Vec::new()
        },
        kappa_t: p.kappa_t,
        kappa_r: p.kappa_r,
        substep: p.substep,
        max_action_norm: p.max_action_norm,
        cost_floor: p.cost_floor_fraction * p.max_action_norm,
        goal_coverage: p.goal_coverage,
    };
    p.shape.validate()?;
    let placeable = |env: &PushT2DWorld, pose: &TPose| {
        env.object_in_table(pose) && !env.object_hits_obstacle(pose)
    };
    if task == Task::PushTRand {
        let goal_region = Rect::new(
            p.table.min[0] + 0.15,
            p.table.min[1] + 0.15,
            p.table.max[0] - 0.15,
            p.table.max[1] - 0.15,
        );
        env.goal = (0..MAX_TRIES)
            .map(|_| sample_pose(rng, &goal_region, p.max_start_angle))
            .find(|g| placeable(&env, g))
            .ok_or_else(|| Error::Generation("no valid random goal pose".into()))?;
    }
    for _ in 0..MAX_TRIES {
        let object = sample_pose(rng, &p.start_region, p.max_start_angle);
        if !placeable(&env, &object) || env.coverage_of(&object) >= p.goal_coverage {
            continue;
        }
        for _ in 0..100 {
            let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r: f64 = rng.random_range(0.0..p.pusher_spawn_radius);
            let pusher = [object.x + r * ang.cos(), object.y + r * ang.sin()];
            let state = pack_state(pusher, &object);
            if env.valid_state(&state)
                && env.pusher_object_distance(pusher, &object) > p.pusher_radius + 0.005
            {
                return Ok(World::PushT {
                    pusher,
                    object,
                    env,
                });
            }
        }
    }
    Err(Error::Generation(format!(
        "no valid {} start after {MAX_TRIES} tries",
        task.name()
    )))
}
