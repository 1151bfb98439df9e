//! Dense feed-forward inference and the SAC-style actor/critic adapters built on it.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{ActionSampler, CostToGo, SamplingMode};
use crate::error::{check_dim, Error, Result};
use crate::vector::{clip_norm, ActionVec, StateVec};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }

    #[inline]
    fn apply(&self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }
}

/// Affine map followed by an activation. `weights` is row-major, `output_dim x input_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub input_dim: usize,
    pub output_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(
        input_dim: usize,
        output_dim: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        let layer = Layer {
            input_dim,
            output_dim,
            weights,
            bias,
            activation,
        };
        layer.validate()?;
        Ok(layer)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim("layer weights", self.input_dim * self.output_dim, self.weights.len())?;
        check_dim("layer bias", self.output_dim, self.bias.len())?;
        if self.weights.iter().chain(&self.bias).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite layer parameter".into()));
        }
        Ok(())
    }

    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.input_dim).zip(&self.bias) {
            let mut acc = *b;
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            out.push(self.activation.apply(acc));
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("layer input", self.input_dim, x.len())?;
        let mut out = Vec::with_capacity(self.output_dim);
        self.forward_into(x, &mut out);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let mlp = Mlp { layers };
        mlp.validate()?;
        Ok(mlp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Validation("network has no layers".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            layer
                .validate()
                .map_err(|e| Error::Validation(format!("layer {i}: {e}")))?;
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].output_dim != pair[1].input_dim {
                return Err(Error::Validation(format!(
                    "layer {i} output_dim {} does not match layer {} input_dim {}",
                    pair[0].output_dim,
                    i + 1,
                    pair[1].input_dim
                )));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("network input", self.input_dim(), x.len())?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Layer-major evaluation of a batch: every layer is applied to all rows before the
    /// next layer runs.
    pub fn forward_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        for x in xs {
            check_dim("network input", self.input_dim(), x.len())?;
        }
        let mut cur: Vec<Vec<f64>> = xs.to_vec();
        for layer in &self.layers {
            cur = cur
                .iter()
                .map(|x| {
                    let mut out = Vec::with_capacity(layer.output_dim);
                    layer.forward_into(x, &mut out);
                    out
                })
                .collect();
        }
        Ok(cur)
    }
}

/// Gaussian policy head on top of the trunk, squashed by tanh into the action box.
#[derive(Clone, Debug, PartialEq)]
pub struct ActorHead {
    pub mean: Layer,
    pub log_std: Layer,
    pub scale: Vec<f64>,
    pub offset: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpWeights {
    pub trunk: Mlp,
    pub head: Option<ActorHead>,
}

impl MlpWeights {
    pub fn validate(&self) -> Result<()> {
        self.trunk.validate()?;
        if let Some(head) = &self.head {
            let n = self.trunk.layers.len();
            for (i, layer) in [(n, &head.mean), (n + 1, &head.log_std)] {
                layer
                    .validate()
                    .map_err(|e| Error::Validation(format!("layer {i}: {e}")))?;
                if layer.input_dim != self.trunk.output_dim() {
                    return Err(Error::Validation(format!(
                        "layer {} output_dim {} does not match layer {i} input_dim {}",
                        n - 1,
                        self.trunk.output_dim(),
                        layer.input_dim
                    )));
                }
            }
            let m = head.mean.output_dim;
            check_dim("log_std head", m, head.log_std.output_dim)?;
            check_dim("action scale", m, head.scale.len())?;
            check_dim("action offset", m, head.offset.len())?;
            if head.scale.iter().chain(&head.offset).any(|v| !v.is_finite()) {
                return Err(Error::Validation("non-finite action scale/offset".into()));
            }
        }
        Ok(())
    }
}

/// Tanh-squashed Gaussian actor.
#[derive(Clone, Debug)]
pub struct MlpActor {
    weights: MlpWeights,
    mode: SamplingMode,
    /// Standard-normal offsets used in deterministic mode.
    probe_offsets: Vec<Vec<f64>>,
    max_norm: Option<f64>,
}

impl MlpActor {
    pub fn new(weights: MlpWeights) -> Result<Self> {
        weights.validate()?;
        if weights.head.is_none() {
            return Err(Error::Validation("actor weights need a policy head".into()));
        }
        Ok(MlpActor {
            weights,
            mode: SamplingMode::Stochastic,
            probe_offsets: Vec::new(),
            max_norm: None,
        })
    }

    pub fn deterministic(mut self, offsets: Vec<Vec<f64>>) -> Result<Self> {
        let m = self.action_dim();
        if offsets.is_empty() {
            return Err(Error::Config("deterministic mode needs probe offsets".into()));
        }
        for o in &offsets {
            check_dim("probe offset", m, o.len())?;
        }
        self.mode = SamplingMode::Deterministic;
        self.probe_offsets = offsets;
        Ok(self)
    }

    /// Scales actions down to the environment's maximum norm.
    pub fn with_max_norm(mut self, max_norm: f64) -> Self {
        self.max_norm = Some(max_norm);
        self
    }

    fn head(&self) -> &ActorHead {
        self.weights.head.as_ref().expect("validated in new")
    }

    pub fn action_dim(&self) -> usize {
        self.head().mean.output_dim
    }

    /// Mean and clamped log standard deviation of the pre-squash Gaussian.
    pub fn distribution(&self, s: &StateVec) -> Result<(Vec<f64>, Vec<f64>)> {
        let h = self.weights.trunk.forward(s.as_slice())?;
        let head = self.head();
        let mean = head.mean.forward(&h)?;
        let log_std: Vec<f64> = head
            .log_std
            .forward(&h)?
            .into_iter()
            .map(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect();
        if mean.iter().chain(&log_std).any(|v| !v.is_finite()) {
            return Err(Error::ModelFault(format!(
                "non-finite actor output at state {:?}",
                s.as_slice()
            )));
        }
        Ok((mean, log_std))
    }

    fn squash(&self, mean: &[f64], log_std: &[f64], z: &[f64]) -> ActionVec {
        let head = self.head();
        let mut a: Vec<f64> = (0..mean.len())
            .map(|i| head.scale[i] * (mean[i] + log_std[i].exp() * z[i]).tanh() + head.offset[i])
            .collect();
        if let Some(max) = self.max_norm {
            clip_norm(&mut a, max);
        }
        ActionVec::new(a)
    }
}

impl ActionSampler for MlpActor {
    fn sample_actions(
        &self,
        s: &StateVec,
        k: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<ActionVec>> {
        let (mean, log_std) = self.distribution(s)?;
        let m = mean.len();
        let actions: Vec<ActionVec> = match self.mode {
            SamplingMode::Stochastic => (0..k)
                .map(|_| {
                    let z: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
                    self.squash(&mean, &log_std, &z)
                })
                .collect(),
            SamplingMode::Deterministic => (0..k)
                .map(|j| {
                    let z = &self.probe_offsets[j % self.probe_offsets.len()];
                    self.squash(&mean, &log_std, z)
                })
                .collect(),
        };
        if actions.iter().any(|a| !a.is_finite()) {
            return Err(Error::ModelFault("non-finite sampled action".into()));
        }
        Ok(actions)
    }
}

/// Q-network adapter: returns `max(0, -Q(s, a))` for each action.
#[derive(Clone, Debug)]
pub struct MlpCritic {
    weights: MlpWeights,
}

impl MlpCritic {
    pub fn new(weights: MlpWeights) -> Result<Self> {
        weights.validate()?;
        check_dim("critic output", 1, weights.trunk.output_dim())?;
        Ok(MlpCritic { weights })
    }

    pub fn raw_q(&self, s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
        let inputs: Vec<Vec<f64>> = actions
            .iter()
            .map(|a| [s.as_slice(), a.as_slice()].concat())
            .collect();
        Ok(self
            .weights
            .trunk
            .forward_batch(&inputs)?
            .into_iter()
            .map(|o| o[0])
            .collect())
    }
}

impl CostToGo for MlpCritic {
    fn cost_to_go(&self, s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
        if actions.is_empty() {
            return Err(Error::ContractViolation("empty action batch".into()));
        }
        let q = self.raw_q(s, actions)?;
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::ModelFault("non-finite critic output".into()));
        }
        Ok(q.into_iter().map(|v| (-v).max(0.0)).collect())
    }
}
