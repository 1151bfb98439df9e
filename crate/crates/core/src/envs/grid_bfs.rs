//! Hand-crafted cost-to-go for Nav2D: 8-connected shortest distance over a free-cell
//! grid, flooded outward from the goal cell.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::Nav2DWorld;
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Clone, Debug)]
pub struct GridHeuristic {
    origin: Point,
    cell_size: f64,
    nx: usize,
    ny: usize,
    free: Vec<bool>,
    dist: Vec<f64>,
}

const NEIGHBOURS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

impl GridHeuristic {
    /// A cell is free when its centre lies in free space. Diagonal moves must not cut
    /// a blocked corner.
    pub fn new(world: &Nav2DWorld, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::Config(format!("cell size must be positive, got {cell_size}")));
        }
        let origin = world.bounds.min;
        let nx = (world.bounds.width() / cell_size).ceil().max(1.0) as usize;
        let ny = (world.bounds.height() / cell_size).ceil().max(1.0) as usize;
        let mut free = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let c = [
                    origin[0] + (i as f64 + 0.5) * cell_size,
                    origin[1] + (j as f64 + 0.5) * cell_size,
                ];
                free[j * nx + i] = world.point_free(c);
            }
        }
        let mut h = GridHeuristic {
            origin,
            cell_size,
            nx,
            ny,
            free,
            dist: vec![f64::INFINITY; nx * ny],
        };
        let goal = h
            .cell_of(world.goal_center)
            .filter(|&(i, j)| h.is_free(i, j))
            .ok_or_else(|| {
                Error::Config(format!(
                    "goal cell at {:?} is blocked or outside the grid",
                    world.goal_center
                ))
            })?;
        h.flood(goal);
        Ok(h)
    }

    fn flood(&mut self, goal: (usize, usize)) {
        // Two edge weights, so a plain FIFO is not exact; order by distance instead.
        let mut heap = BinaryHeap::new();
        let g = self.index(goal.0, goal.1);
        self.dist[g] = 0.0;
        heap.push(Reverse((OrdF64(0.0), g)));
        while let Some(Reverse((OrdF64(d), idx))) = heap.pop() {
            if d > self.dist[idx] {
                continue;
            }
            let (i, j) = (idx % self.nx, idx / self.nx);
            let next: Vec<_> = self.neighbours(i, j).collect();
            for (ni, nj, w) in next {
                let n = self.index(ni, nj);
                let nd = d + w;
                if nd < self.dist[n] {
                    self.dist[n] = nd;
                    heap.push(Reverse((OrdF64(nd), n)));
                }
            }
        }
    }

    /// Free neighbours of a free cell with their edge lengths.
    pub fn neighbours(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        NEIGHBOURS.iter().filter_map(move |&(di, dj)| {
            let ni = i as i64 + di;
            let nj = j as i64 + dj;
            if ni < 0 || nj < 0 || ni >= self.nx as i64 || nj >= self.ny as i64 {
                return None;
            }
            let (ni, nj) = (ni as usize, nj as usize);
            if !self.is_free(ni, nj) {
                return None;
            }
            if di != 0 && dj != 0 && !(self.is_free(ni, j) && self.is_free(i, nj)) {
                return None;
            }
            let w = if di != 0 && dj != 0 {
                self.cell_size * std::f64::consts::SQRT_2
            } else {
                self.cell_size
            };
            Some((ni, nj, w))
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn is_free(&self, i: usize, j: usize) -> bool {
        self.free[self.index(i, j)]
    }

    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let fi = ((p[0] - self.origin[0]) / self.cell_size).floor();
        let fj = ((p[1] - self.origin[1]) / self.cell_size).floor();
        if fi < 0.0 || fj < 0.0 {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        // Points on the far boundary belong to the last cell.
        let i = if i == self.nx && p[0] <= self.origin[0] + self.nx as f64 * self.cell_size { i - 1 } else { i };
        let j = if j == self.ny && p[1] <= self.origin[1] + self.ny as f64 * self.cell_size { j - 1 } else { j };
        (i < self.nx && j < self.ny).then_some((i, j))
    }

    pub fn cell_value(&self, i: usize, j: usize) -> f64 {
        self.dist[self.index(i, j)]
    }

    /// Distance-to-goal of the cell containing `p`; +inf if blocked, unreachable or
    /// off-grid.
    pub fn query(&self, p: Point) -> f64 {
        self.cell_of(p)
            .map(|(i, j)| self.cell_value(i, j))
            .unwrap_or(f64::INFINITY)
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

#[derive(Clone, Copy)]
struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
