//! Continuous state and action vectors.

use std::f64::consts::PI;
use std::ops::Index;

use serde::{Deserialize, Serialize};

/// A point in the continuous state space of an environment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVec(pub Vec<f64>);

/// A continuous action. For both analog environments this is a displacement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionVec(pub Vec<f64>);

macro_rules! vec_common {
    ($t:ident) => {
        impl $t {
            pub fn new(values: Vec<f64>) -> Self {
                $t(values)
            }

            pub fn zeros(dim: usize) -> Self {
                $t(vec![0.0; dim])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }

            pub fn norm(&self) -> f64 {
                norm(&self.0)
            }
        }

        impl Index<usize> for $t {
            type Output = f64;

            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl From<Vec<f64>> for $t {
            fn from(v: Vec<f64>) -> Self {
                $t(v)
            }
        }
    };
}

vec_common!(StateVec);
vec_common!(ActionVec);

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Scales `v` down so that its Euclidean norm does not exceed `max_norm`.
pub fn clip_norm(v: &mut [f64], max_norm: f64) {
    let n = norm(v);
    if n > max_norm && n > 0.0 {
        let s = max_norm / n;
        v.iter_mut().for_each(|x| *x *= s);
    }
}

/// Reduces an angle to (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}
