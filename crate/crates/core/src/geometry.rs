//! Planar geometry on convex polygons and axis-aligned rectangles.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn length(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Axis-aligned rectangle, closed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect {
            min: [x0.min(x1), y0.min(y1)],
            max: [x0.max(x1), y0.max(y1)],
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn to_polygon(&self) -> Vec<Point> {
        vec![
            self.min,
            [self.max[0], self.min[1]],
            self.max,
            [self.min[0], self.max[1]],
        ]
    }

    /// Whether the closed segment `p0`-`p1` touches the rectangle (Liang-Barsky).
    pub fn intersects_segment(&self, p0: Point, p1: Point) -> bool {
        let d = sub(p1, p0);
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for axis in 0..2 {
            let checks = [
                (-d[axis], p0[axis] - self.min[axis]),
                (d[axis], self.max[axis] - p0[axis]),
            ];
            for (p, q) in checks {
                if p == 0.0 {
                    if q < 0.0 {
                        return false;
                    }
                } else {
                    let r = q / p;
                    if p < 0.0 {
                        t0 = t0.max(r);
                    } else {
                        t1 = t1.min(r);
                    }
                    if t0 > t1 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Signed area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..n {
        a += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * a
}

pub fn area(poly: &[Point]) -> f64 {
    signed_area(poly).abs()
}

pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let a = signed_area(poly);
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let w = cross(p, q);
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

/// Sutherland-Hodgman clip of `subject` by the convex counter-clockwise polygon `clip`.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let edge = sub(b, a);
        let input = std::mem::take(&mut out);
        let n = input.len();
        for j in 0..n {
            let s = input[j];
            let e = input[(j + 1) % n];
            let ds = cross(edge, sub(s, a));
            let de = cross(edge, sub(e, a));
            let s_in = ds >= 0.0;
            let e_in = de >= 0.0;
            if s_in != e_in {
                let t = ds / (ds - de);
                out.push(add(s, scale(sub(e, s), t)));
            }
            if e_in {
                out.push(e);
            }
        }
    }
    out
}

pub fn intersection_area(a: &[Point], b: &[Point]) -> f64 {
    area(&clip_convex(a, b))
}

/// Point-in-convex-polygon (closed) for counter-clockwise vertices.
pub fn contains_point(poly: &[Point], p: Point) -> bool {
    let n = poly.len();
    (0..n).all(|i| cross(sub(poly[(i + 1) % n], poly[i]), sub(p, poly[i])) >= 0.0)
}

pub fn closest_point_on_segment(a: Point, b: Point, p: Point) -> Point {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return a;
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    add(a, scale(ab, t))
}

/// Signed distance from `p` to a convex counter-clockwise polygon (negative inside),
/// with the closest point on the boundary.
pub fn signed_distance(poly: &[Point], p: Point) -> (f64, Point) {
    let n = poly.len();
    let mut best = f64::INFINITY;
    let mut best_pt = poly[0];
    for i in 0..n {
        let c = closest_point_on_segment(poly[i], poly[(i + 1) % n], p);
        let d = length(sub(p, c));
        if d < best {
            best = d;
            best_pt = c;
        }
    }
    if contains_point(poly, p) {
        (-best, best_pt)
    } else {
        (best, best_pt)
    }
}

fn project(poly: &[Point], axis: Point) -> (f64, f64) {
    poly.iter()
        .map(|&p| dot(p, axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// Separating-axis test for two convex polygons; touching counts as intersecting.
pub fn convex_intersect(a: &[Point], b: &[Point]) -> bool {
    for poly in [a, b] {
        let n = poly.len();
        for i in 0..n {
            let e = sub(poly[(i + 1) % n], poly[i]);
            let axis = [-e[1], e[0]];
            let (a0, a1) = project(a, axis);
            let (b0, b1) = project(b, axis);
            if a1 < b0 || b1 < a0 {
                return false;
            }
        }
    }
    true
}

/// Largest `t >= 0` with `origin + t * dir` inside the convex polygon, if the ray hits it.
pub fn ray_exit(poly: &[Point], origin: Point, dir: Point) -> Option<f64> {
    let n = poly.len();
    let mut t_enter = 0.0_f64;
    let mut t_exit = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let e = sub(poly[(i + 1) % n], a);
        // Inside means cross(e, p - a) >= 0; along the ray this is num + t * den >= 0.
        let num = cross(e, sub(origin, a));
        let den = cross(e, dir);
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let t = -num / den;
            if den > 0.0 {
                t_enter = t_enter.max(t);
            } else {
                t_exit = t_exit.min(t);
            }
        }
    }
    if t_enter <= t_exit && t_exit.is_finite() {
        Some(t_exit)
    } else {
        None
    }
}

/// Rigid planar transform: rotate by `theta`, then translate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2 { x, y, theta }
    }

    pub fn position(&self) -> Point {
        [self.x, self.y]
    }

    pub fn apply(&self, p: Point) -> Point {
        let (s, c) = self.theta.sin_cos();
        [c * p[0] - s * p[1] + self.x, s * p[0] + c * p[1] + self.y]
    }

    pub fn apply_all(&self, poly: &[Point]) -> Vec<Point> {
        poly.iter().map(|&p| self.apply(p)).collect()
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let p = self.apply(other.position());
        Pose2::new(p[0], p[1], self.theta + other.theta)
    }
}
