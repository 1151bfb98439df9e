//! Fits an MLP critic to the push-T surrogate: a fixed random ReLU layer followed by a
//! ridge-regressed linear output.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use pachs_core::envs::{pack_state, Instance, TPose};
use pachs_core::models::{
    save_weights, Activation, CostToGo, Layer, Mlp, MlpCritic, MlpWeights, PushTSurrogate,
};
use pachs_core::{ActionVec, StateVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::BenchConfig;
use crate::error::{BenchError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DistillOptions {
    pub hidden: usize,
    pub samples: usize,
    pub ridge: f64,
    pub seed: u64,
    /// Input/output pairs written next to the weights for regression tests.
    pub probe_pairs: usize,
}

impl Default for DistillOptions {
    fn default() -> Self {
        DistillOptions {
            hidden: 64,
            samples: 4000,
            ridge: 1e-3,
            seed: 0,
            probe_pairs: 5,
        }
    }
}

pub struct DistillFit {
    pub weights: MlpWeights,
    pub rms_error: f64,
    /// `(state ++ action, raw network output)` for the first probe samples.
    pub probes: Vec<(Vec<f64>, f64)>,
}

fn sample_input(inst: &Instance, rng: &mut ChaCha8Rng) -> (StateVec, ActionVec) {
    let env = inst.pusht().expect("push-T instance");
    let t = env.table;
    let pose = TPose::new(
        rng.random_range(t.min[0] * 0.6..t.max[0] * 0.6),
        rng.random_range(t.min[1] * 0.6..t.max[1] * 0.6),
        rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
    );
    let r = rng.random_range(0.0..0.25);
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let pusher = [pose.x + r * phi.cos(), pose.y + r * phi.sin()];
    let m = env.max_action_norm;
    let (ar, aphi) = (m * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
    (
        pack_state(pusher, &pose),
        ActionVec::new(vec![ar * aphi.cos(), ar * aphi.sin()]),
    )
}

fn features(layer: &Layer, s: &StateVec, a: &ActionVec) -> Result<Vec<f64>> {
    let mut x = s.as_slice().to_vec();
    x.extend_from_slice(a.as_slice());
    Ok(layer.forward(&x)?)
}

/// Samples states around the instance, labels them with the surrogate critic and fits
/// the output layer. Writes the weight file to `out`; if `probe_pairs > 0` also writes
/// `<out>.pairs` with one `inputs... output` line per probe.
pub fn distill_pusht_critic(
    inst: &Instance,
    cfg: &BenchConfig,
    opts: &DistillOptions,
    out: &Path,
) -> Result<DistillFit> {
    let env = inst
        .pusht()
        .ok_or_else(|| BenchError::Config("distill needs a push-T instance".into()))?;
    if opts.hidden == 0 || opts.samples < opts.hidden {
        return Err(BenchError::Config("distill needs hidden >= 1 and samples >= hidden".into()));
    }
    let surrogate = PushTSurrogate::new(env, cfg.pusht.critic, cfg.pusht.sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let input_dim = 7;
    // Inputs are O(0.5); scale the random projection so ReLU units see O(1) activations.
    let scale = 4.0;
    let w0: Vec<f64> = (0..opts.hidden * input_dim)
        .map(|_| scale * rng.random_range(-1.0..1.0))
        .collect();
    let b0: Vec<f64> = (0..opts.hidden).map(|_| rng.random_range(-1.0..1.0)).collect();
    let hidden = Layer::new(input_dim, opts.hidden, w0, b0, Activation::Relu)?;

    let n = opts.samples;
    let cols = opts.hidden + 1;
    let mut h = DMatrix::<f64>::zeros(n, cols);
    let mut y = DVector::<f64>::zeros(n);
    let mut inputs = Vec::with_capacity(n);
    for i in 0..n {
        let (s, a) = sample_input(inst, &mut rng);
        let q = surrogate.cost_to_go(&s, std::slice::from_ref(&a))?[0];
        let f = features(&hidden, &s, &a)?;
        for (j, v) in f.iter().enumerate() {
            h[(i, j)] = *v;
        }
        h[(i, opts.hidden)] = 1.0;
        y[i] = -q;
        inputs.push((s, a));
    }
    let mut gram = h.transpose() * &h;
    for j in 0..cols {
        gram[(j, j)] += opts.ridge * n as f64;
    }
    let rhs = h.transpose() * &y;
    let chol = gram
        .cholesky()
        .ok_or_else(|| BenchError::Config("ridge system is not positive definite".into()))?;
    let beta = chol.solve(&rhs);
    let residual = &h * &beta - &y;
    let rms_error = (residual.norm_squared() / n as f64).sqrt();

    let output = Layer::new(
        opts.hidden,
        1,
        beta.as_slice()[..opts.hidden].to_vec(),
        vec![beta[opts.hidden]],
        Activation::Identity,
    )?;
    let weights = MlpWeights {
        trunk: Mlp::new(vec![hidden, output])?,
        head: None,
    };
    save_weights(&weights, out)?;

    let critic = MlpCritic::new(weights.clone())?;
    let mut probes = Vec::new();
    let mut text = String::new();
    for (s, a) in inputs.iter().take(opts.probe_pairs) {
        let raw = critic.raw_q(s, std::slice::from_ref(a))?[0];
        let mut x = s.as_slice().to_vec();
        x.extend_from_slice(a.as_slice());
        for v in &x {
            write!(text, "{v:.16e} ").expect("string write");
        }
        writeln!(text, "{raw:.16e}").expect("string write");
        probes.push((x, raw));
    }
    if opts.probe_pairs > 0 {
        let pairs = out.with_extension("pairs");
        std::fs::write(&pairs, text).map_err(|e| BenchError::io(&pairs, e))?;
    }
    Ok(DistillFit {
        weights,
        rms_error,
        probes,
    })
}
