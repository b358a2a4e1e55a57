//! Feed-forward binary classifiers trained with binary cross-entropy and
//! Adam: an early-fusion MLP and a mid-fusion architecture with view-specific
//! stacks feeding a shared layer. All gradients are exact analytic
//! derivatives, including through the seeded dropout masks.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::seeding::derive;

const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// One hidden stack on the concatenated features.
    Early,
    /// Per-view stacks, concatenation, one shared hidden layer.
    Mid,
}

/// Architecture and training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub architecture: Architecture,
    /// Input width per view; a single entry for the early architecture.
    pub view_dims: Vec<usize>,
    /// Hidden layers per view stack (mid) or in the whole stack (early).
    pub layers_per_stack: usize,
    /// Hidden width, shared by every hidden layer.
    pub width: usize,
    pub dropout_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.view_dims.is_empty() || self.view_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig("empty view dimensions".into()));
        }
        if self.architecture == Architecture::Early && self.view_dims.len() != 1 {
            return Err(Error::InvalidConfig(
                "early fusion takes a single input block".into(),
            ));
        }
        if self.layers_per_stack == 0 || self.width == 0 || self.epochs == 0 || self.batch_size == 0
        {
            return Err(Error::InvalidConfig(
                "layers, width, epochs and batch size must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig(format!(
                "dropout rate must lie in [0,1), got {}",
                self.dropout_rate
            )));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// One dense layer; weights are `input x output`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Linear {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl Linear {
    fn affine(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.w.a);
        for mut row in z.rows_mut() {
            for (v, b) in row.iter_mut().zip(&self.b) {
                *v += b;
            }
        }
        z
    }
}

/// Trained (or freshly initialized) network parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NnModel {
    pub config: MlpConfig,
    /// One stack per view (a single stack for early fusion).
    pub view_stacks: Vec<Vec<Linear>>,
    /// Shared hidden layer after concatenation; mid fusion only.
    pub shared: Option<Linear>,
    /// Final `width -> 1` layer feeding the sigmoid.
    pub output: Linear,
}

/// Gradients in the same layout as the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub view_stacks: Vec<Vec<Linear>>,
    pub shared: Option<Linear>,
    pub output: Linear,
}

fn he_layer(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Linear {
    let std = (2.0 / fan_in as f64).sqrt();
    let w = Matrix::from_fn(fan_in, fan_out, |_, _| {
        let z: f64 = rng.sample(StandardNormal);
        z * std
    });
    Linear {
        w,
        b: vec![0.0; fan_out],
    }
}

/// He-initialized model: weights ~ N(0, 2/fan_in), biases zero.
/// Deterministic given `seed`.
pub fn init_model(config: &MlpConfig, seed: u64) -> Result<NnModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = config.width;
    let mut view_stacks = Vec::new();
    for &dv in &config.view_dims {
        let mut stack = Vec::new();
        let mut fan_in = dv;
        for _ in 0..config.layers_per_stack {
            stack.push(he_layer(&mut rng, fan_in, w));
            fan_in = w;
        }
        view_stacks.push(stack);
    }
    let shared = match config.architecture {
        Architecture::Early => None,
        Architecture::Mid => Some(he_layer(&mut rng, config.view_dims.len() * w, w)),
    };
    let output = he_layer(&mut rng, w, 1);
    Ok(NnModel {
        config: config.clone(),
        view_stacks,
        shared,
        output,
    })
}

impl NnModel {
    pub fn parameter_count(&self) -> usize {
        let lin = |l: &Linear| l.w.rows() * l.w.cols() + l.b.len();
        self.view_stacks
            .iter()
            .flatten()
            .map(lin)
            .sum::<usize>()
            + self.shared.as_ref().map_or(0, lin)
            + lin(&self.output)
    }

    fn layers(&self) -> Vec<&Linear> {
        let mut all: Vec<&Linear> = self.view_stacks.iter().flatten().collect();
        if let Some(s) = &self.shared {
            all.push(s);
        }
        all.push(&self.output);
        all
    }

    fn layers_mut(&mut self) -> Vec<&mut Linear> {
        let mut all: Vec<&mut Linear> = self.view_stacks.iter_mut().flatten().collect();
        if let Some(s) = &mut self.shared {
            all.push(s);
        }
        all.push(&mut self.output);
        all
    }

    fn check_inputs(&self, inputs: &[Matrix]) -> Result<usize> {
        if inputs.len() != self.config.view_dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} input blocks for {} views",
                inputs.len(),
                self.config.view_dims.len()
            )));
        }
        let n = inputs[0].rows();
        for (x, &dv) in inputs.iter().zip(&self.config.view_dims) {
            if x.cols() != dv || x.rows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "input block {}x{} does not match view dim {dv}",
                    x.rows(),
                    x.cols()
                )));
            }
        }
        Ok(n)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct LayerCache {
    z: Array2<f64>,
    out: Array2<f64>,
    mask: Option<Array2<f64>>,
}

struct ForwardCache {
    stacks: Vec<Vec<LayerCache>>,
    concat: Array2<f64>,
    shared: Option<LayerCache>,
    head_input: Array2<f64>,
    probs: Vec<f64>,
}

// linear -> ReLU -> (inverted) dropout
fn run_layer(
    layer: &Linear,
    x: &Array2<f64>,
    rate: f64,
    train_mode: bool,
    rng: &mut ChaCha8Rng,
) -> LayerCache {
    let z = layer.affine(x);
    let mut out = z.mapv(|v| v.max(0.0));
    let mask = if train_mode && rate > 0.0 {
        let keep = 1.0 - rate;
        let m = Array2::from_shape_fn(out.dim(), |_| {
            if rng.random::<f64>() < keep {
                1.0 / keep
            } else {
                0.0
            }
        });
        out *= &m;
        Some(m)
    } else {
        None
    };
    LayerCache { z, out, mask }
}

fn forward_cached(
    model: &NnModel,
    inputs: &[Matrix],
    train_mode: bool,
    dropout_seed: u64,
) -> Result<ForwardCache> {
    let n = model.check_inputs(inputs)?;
    let rate = model.config.dropout_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(dropout_seed);
    let mut stacks = Vec::new();
    let mut stack_outs = Vec::new();
    for (view, stack) in model.view_stacks.iter().enumerate() {
        let mut caches = Vec::new();
        let mut act = inputs[view].a.clone();
        for layer in stack {
            let cache = run_layer(layer, &act, rate, train_mode, &mut rng);
            act = cache.out.clone();
            caches.push(cache);
        }
        stack_outs.push(act);
        stacks.push(caches);
    }
    let w = model.config.width;
    let concat = if stack_outs.len() == 1 {
        stack_outs.pop().expect("one stack")
    } else {
        let mut c = Array2::zeros((n, stack_outs.len() * w));
        for (v, s) in stack_outs.iter().enumerate() {
            c.slice_mut(ndarray::s![.., v * w..(v + 1) * w]).assign(s);
        }
        c
    };
    let (shared, head_input) = match &model.shared {
        Some(layer) => {
            let cache = run_layer(layer, &concat, rate, train_mode, &mut rng);
            let out = cache.out.clone();
            (Some(cache), out)
        }
        None => (None, concat.clone()),
    };
    let z_out = model.output.affine(&head_input);
    let probs: Vec<f64> = (0..n).map(|i| sigmoid(z_out[(i, 0)])).collect();
    Ok(ForwardCache {
        stacks,
        concat,
        shared,
        head_input,
        probs,
    })
}

/// Output probabilities in (0,1). Dropout is applied (inverted scaling)
/// only in train mode; inference is deterministic.
pub fn forward(
    model: &NnModel,
    inputs: &[Matrix],
    train_mode: bool,
    dropout_seed: u64,
) -> Result<Vec<f64>> {
    Ok(forward_cached(model, inputs, train_mode, dropout_seed)?.probs)
}

/// Mean binary cross-entropy with probabilities clamped to
/// `[1e-12, 1 - 1e-12]`.
pub fn bce_loss(probs: &[f64], y: &[f64]) -> f64 {
    let n = probs.len() as f64;
    probs
        .iter()
        .zip(y)
        .map(|(&p, &t)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum::<f64>()
        / n
}

// backward through dropout and ReLU
fn backprop_activation(delta: &mut Array2<f64>, cache: &LayerCache) {
    if let Some(mask) = &cache.mask {
        *delta *= mask;
    }
    ndarray::Zip::from(&mut *delta)
        .and(&cache.z)
        .for_each(|d, &z| {
            if z <= 0.0 {
                *d = 0.0;
            }
        });
}

fn layer_grads(input: &Array2<f64>, delta: &Array2<f64>) -> Linear {
    let dw = input.t().dot(delta);
    let db: Vec<f64> = delta.sum_axis(ndarray::Axis(0)).to_vec();
    Linear {
        w: Matrix::from_array(dw),
        b: db,
    }
}

/// Loss and exact analytic gradients on one batch; `y` takes values in
/// {0,1}. Deterministic given `dropout_seed`.
pub fn loss_and_gradients(
    model: &NnModel,
    inputs: &[Matrix],
    y: &[f64],
    dropout_seed: u64,
) -> Result<(f64, Gradients)> {
    let n = model.check_inputs(inputs)?;
    if y.len() != n || n == 0 {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: n,
        });
    }
    let cache = forward_cached(model, inputs, true, dropout_seed)?;
    let loss = bce_loss(&cache.probs, y);

    // d(BCE)/d(z_out) = (p - y)/B, through the sigmoid
    let mut delta = Array2::zeros((n, 1));
    for i in 0..n {
        delta[(i, 0)] = (cache.probs[i] - y[i]) / n as f64;
    }
    let g_output = layer_grads(&cache.head_input, &delta);
    let mut delta = delta.dot(&model.output.w.a.t());

    let g_shared = match (&model.shared, &cache.shared) {
        (Some(layer), Some(sc)) => {
            backprop_activation(&mut delta, sc);
            let g = layer_grads(&cache.concat, &delta);
            delta = delta.dot(&layer.w.a.t());
            Some(g)
        }
        _ => None,
    };

    let w = model.config.width;
    let views = model.view_stacks.len();
    let mut g_stacks = Vec::with_capacity(views);
    for (v, stack) in model.view_stacks.iter().enumerate() {
        let mut d = if views == 1 {
            delta.clone()
        } else {
            delta.slice(ndarray::s![.., v * w..(v + 1) * w]).to_owned()
        };
        let caches = &cache.stacks[v];
        let mut g_stack = vec![
            Linear {
                w: Matrix::zeros(0, 0),
                b: vec![]
            };
            stack.len()
        ];
        for li in (0..stack.len()).rev() {
            backprop_activation(&mut d, &caches[li]);
            let input = if li == 0 {
                &inputs[v].a
            } else {
                &caches[li - 1].out
            };
            g_stack[li] = layer_grads(input, &d);
            if li > 0 {
                d = d.dot(&stack[li].w.a.t());
            }
        }
        g_stacks.push(g_stack);
    }
    Ok((
        loss,
        Gradients {
            view_stacks: g_stacks,
            shared: g_shared,
            output: g_output,
        },
    ))
}

/// Adam optimizer state (first/second moments per parameter tensor).
#[derive(Debug, Clone)]
pub struct AdamState {
    t: u64,
    m: Vec<Linear>,
    v: Vec<Linear>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    pub fn new(model: &NnModel) -> AdamState {
        let zero_like = |l: &Linear| Linear {
            w: Matrix::zeros(l.w.rows(), l.w.cols()),
            b: vec![0.0; l.b.len()],
        };
        let m: Vec<Linear> = model.layers().into_iter().map(zero_like).collect();
        AdamState {
            t: 0,
            v: m.clone(),
            m,
        }
    }

    /// One bias-corrected Adam update applied in place.
    pub fn step(&mut self, model: &mut NnModel, grads: &Gradients, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        let mut g_all: Vec<&Linear> = grads.view_stacks.iter().flatten().collect();
        if let Some(s) = &grads.shared {
            g_all.push(s);
        }
        g_all.push(&grads.output);
        for (((layer, g), m), v) in model
            .layers_mut()
            .into_iter()
            .zip(g_all)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            ndarray::Zip::from(&mut layer.w.a)
                .and(&mut m.w.a)
                .and(&mut v.w.a)
                .and(&g.w.a)
                .for_each(|p, m, v, &g| {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let mh = *m / bc1;
                    let vh = *v / bc2;
                    *p -= lr * mh / (vh.sqrt() + ADAM_EPS);
                });
            for i in 0..layer.b.len() {
                m.b[i] = ADAM_BETA1 * m.b[i] + (1.0 - ADAM_BETA1) * g.b[i];
                v.b[i] = ADAM_BETA2 * v.b[i] + (1.0 - ADAM_BETA2) * g.b[i] * g.b[i];
                let mh = m.b[i] / bc1;
                let vh = v.b[i] / bc2;
                layer.b[i] -= lr * mh / (vh.sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Trains with mini-batch Adam; per-epoch shuffles and per-batch dropout
/// masks all derive from `seed`. Returns the model and the per-epoch mean
/// training loss.
pub fn train_with_trace(
    config: &MlpConfig,
    inputs: &[Matrix],
    y: &[f64],
    seed: u64,
) -> Result<(NnModel, Vec<f64>)> {
    let mut model = init_model(config, derive(seed, &[0]))?;
    let n = model.check_inputs(inputs)?;
    if y.len() != n || n == 0 {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: n,
        });
    }
    let mut adam = AdamState::new(&model);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..config.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[1, epoch as u64]));
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (bi, batch) in order.chunks(config.batch_size).enumerate() {
            let batch_inputs: Vec<Matrix> = inputs
                .iter()
                .map(|x| x.select_rows(batch))
                .collect::<Result<_>>()?;
            let batch_y: Vec<f64> = batch.iter().map(|&i| y[i]).collect();
            let dropout_seed = derive(seed, &[2, epoch as u64, bi as u64]);
            let (loss, grads) = loss_and_gradients(&model, &batch_inputs, &batch_y, dropout_seed)?;
            adam.step(&mut model, &grads, config.learning_rate);
            total += loss * batch.len() as f64;
        }
        epoch_losses.push(total / n as f64);
    }
    Ok((model, epoch_losses))
}

/// Trains and returns only the model; see [`train_with_trace`].
pub fn train(config: &MlpConfig, inputs: &[Matrix], y: &[f64], seed: u64) -> Result<NnModel> {
    Ok(train_with_trace(config, inputs, y, seed)?.0)
}

/// Eval-mode probabilities (no dropout).
pub fn predict_probabilities(model: &NnModel, inputs: &[Matrix]) -> Result<Vec<f64>> {
    forward(model, inputs, false, 0)
}

/// 0/1 labels with the `p >= 0.5 -> 1` tie rule.
pub fn predict_labels(model: &NnModel, inputs: &[Matrix]) -> Result<Vec<usize>> {
    Ok(predict_probabilities(model, inputs)?
        .into_iter()
        .map(crate::fusion::threshold_probability)
        .collect())
}
