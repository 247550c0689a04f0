//! The denoising networks: multipath filter modules and plain stacks.
//!
//! Four architectures share one graph representation:
//!
//! * `deepfilter` — six multipath modules (widths 64, 64, 32, 32, 16, 16)
//!   where every even-numbered module dilates its kernels with rate 3, then
//!   a single-channel K=9 linear head.
//! * `multibranch` — the same graph with every dilation rate at 0.
//! * `vanilla-l` / `vanilla-nl` — plain K=9 convolution stacks over the same
//!   widths, all-linear or all-ReLU, with the same linear head.
//!
//! A multipath module (the MKLANL filter module) runs 8 convolutions in
//! parallel over its full input: kernels 3, 5, 9, 15, each once with linear
//! and once with ReLU activation, every branch producing N/8 channels. The
//! branch outputs concatenate to N channels in a fixed, documented order:
//! linear k3, k5, k9, k15, then relu k3, k5, k9, k15. Checkpoints depend on
//! this order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::activation::{activation_inplace, relu_mask_from_output};
use crate::nn::conv::{conv1d_backward_into, conv1d_into, ConvGrads, ConvParams};
use crate::nn::Activation;
use crate::tensor::Tensor;

/// Kernel sizes of the multipath module's branches.
pub const MKLANL_KERNELS: [usize; 4] = [3, 5, 9, 15];

/// Module widths of the standard models, first to last.
pub const STANDARD_WIDTHS: [usize; 6] = [64, 64, 32, 32, 16, 16];

/// Beat length every standard model is built for.
pub const BEAT_LEN: usize = 512;

/// Which architecture a graph implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    DeepFilter,
    VanillaL,
    VanillaNl,
    MultiBranch,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::DeepFilter,
        ModelKind::VanillaL,
        ModelKind::VanillaNl,
        ModelKind::MultiBranch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::DeepFilter => "deepfilter",
            ModelKind::VanillaL => "vanilla-l",
            ModelKind::VanillaNl => "vanilla-nl",
            ModelKind::MultiBranch => "multibranch",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deepfilter" => Ok(ModelKind::DeepFilter),
            "vanilla-l" => Ok(ModelKind::VanillaL),
            "vanilla-nl" => Ok(ModelKind::VanillaNl),
            "multibranch" => Ok(ModelKind::MultiBranch),
            other => Err(Error::Config(format!(
                "unknown model kind {other:?}; expected one of deepfilter, vanilla-l, vanilla-nl, multibranch"
            ))),
        }
    }
}

/// Hyperparameters of one multipath module.
#[derive(Debug, Clone, Copy)]
pub struct MklanlConfig {
    /// Total output channels N, split evenly over the 8 branches.
    pub total_filters: usize,
    /// Dilation rate applied to every branch kernel.
    pub dilation_rate: usize,
}

/// One multipath module: 8 parallel convolutions in fixed order.
#[derive(Debug, Clone)]
pub struct MklanlLayer {
    name: String,
    branches: Vec<(ConvParams, Activation)>,
}

impl MklanlLayer {
    fn out_channels(&self) -> usize {
        self.branches.iter().map(|(c, _)| c.out_channels()).sum()
    }

    pub fn branches(&self) -> &[(ConvParams, Activation)] {
        &self.branches
    }
}

/// A plain convolution layer with its activation.
#[derive(Debug, Clone)]
pub struct ConvLayer {
    name: String,
    conv: ConvParams,
    act: Activation,
}

/// One step of a model graph.
#[derive(Debug, Clone)]
pub enum Layer {
    Conv(ConvLayer),
    Mklanl(MklanlLayer),
}

impl Layer {
    /// Plain convolution layer.
    pub fn conv(name: &str, conv: ConvParams, act: Activation) -> Layer {
        Layer::Conv(ConvLayer {
            name: name.to_string(),
            conv,
            act,
        })
    }

    fn in_channels(&self) -> usize {
        match self {
            Layer::Conv(l) => l.conv.in_channels(),
            Layer::Mklanl(l) => l.branches[0].0.in_channels(),
        }
    }

    fn out_channels(&self) -> usize {
        match self {
            Layer::Conv(l) => l.conv.out_channels(),
            Layer::Mklanl(l) => l.out_channels(),
        }
    }

    fn parameter_count(&self) -> usize {
        match self {
            Layer::Conv(l) => l.conv.parameter_count(),
            Layer::Mklanl(l) => l.branches.iter().map(|(c, _)| c.parameter_count()).sum(),
        }
    }
}

/// Build one multipath module over `in_channels` input channels.
///
/// `total_filters` must divide evenly over the 8 branches.
pub fn build_mklanl(config: &MklanlConfig, in_channels: usize, name: &str) -> Result<MklanlLayer> {
    let n = config.total_filters;
    if n == 0 || n % 8 != 0 {
        return Err(Error::Config(format!(
            "multipath module needs a filter count divisible by 8, got {n}"
        )));
    }
    let per_branch = n / 8;
    let mut branches = Vec::with_capacity(8);
    for act in [Activation::Linear, Activation::Relu] {
        for k in MKLANL_KERNELS {
            branches.push((
                ConvParams::new(in_channels, per_branch, k, config.dilation_rate)?,
                act,
            ));
        }
    }
    Ok(MklanlLayer {
        name: name.to_string(),
        branches,
    })
}

/// An ordered stack of layers with named parameters.
#[derive(Debug, Clone)]
pub struct ModelGraph {
    kind: ModelKind,
    layers: Vec<Layer>,
    input_len: usize,
}

/// Per-layer activations retained by a training-mode forward pass.
#[derive(Debug)]
pub struct ForwardCache {
    /// `acts[0]` is the input; `acts[i+1]` is layer i's post-activation output.
    acts: Vec<Tensor>,
}

impl ForwardCache {
    pub fn output(&self) -> &Tensor {
        self.acts.last().expect("cache always holds the input")
    }
}

/// Parameter gradients in the graph's parameter order.
#[derive(Debug, Clone)]
pub struct Gradients(pub Vec<Vec<f64>>);

impl ModelGraph {
    /// Assemble a graph from explicit layers; parameters start at zero.
    /// Adjacent channel counts must match and the head contract (single
    /// output channel) is the caller's responsibility.
    pub fn from_layers(kind: ModelKind, layers: Vec<Layer>, input_len: usize) -> ModelGraph {
        assert!(!layers.is_empty());
        for w in layers.windows(2) {
            assert_eq!(
                w[0].out_channels(),
                w[1].in_channels(),
                "adjacent layer channel counts must match"
            );
        }
        ModelGraph {
            kind,
            layers,
            input_len,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    /// Total learnable values: Σ over convolutions of C_out·C_in·K + C_out.
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Layer::parameter_count).sum()
    }

    /// Stable parameter names, e.g. `module2.relu_k9.weight`, `head.bias`.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv(l) => {
                    names.push(format!("{}.weight", l.name));
                    names.push(format!("{}.bias", l.name));
                }
                Layer::Mklanl(l) => {
                    for (conv, act) in &l.branches {
                        let b = format!("{}.{}_k{}", l.name, act.name(), conv.kernel());
                        names.push(format!("{b}.weight"));
                        names.push(format!("{b}.bias"));
                    }
                }
            }
        }
        names
    }

    /// Parameter vectors in the same order as [`param_names`](Self::param_names).
    pub fn params(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv(l) => {
                    out.push(&l.conv.weight);
                    out.push(&l.conv.bias);
                }
                Layer::Mklanl(l) => {
                    for (conv, _) in &l.branches {
                        out.push(&conv.weight);
                        out.push(&conv.bias);
                    }
                }
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out: Vec<&mut Vec<f64>> = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(l) => {
                    out.push(&mut l.conv.weight);
                    out.push(&mut l.conv.bias);
                }
                Layer::Mklanl(l) => {
                    for (conv, _) in &mut l.branches {
                        out.push(&mut conv.weight);
                        out.push(&mut conv.bias);
                    }
                }
            }
        }
        out
    }

    /// Shape of each parameter: weights `(C_out, C_in, K)`, biases `(C_out,)`.
    pub fn param_dims(&self) -> Vec<Vec<u64>> {
        let mut dims = Vec::new();
        let mut push_conv = |c: &ConvParams| {
            dims.push(vec![
                c.out_channels() as u64,
                c.in_channels() as u64,
                c.kernel() as u64,
            ]);
            dims.push(vec![c.out_channels() as u64]);
        };
        for layer in &self.layers {
            match layer {
                Layer::Conv(l) => push_conv(&l.conv),
                Layer::Mklanl(l) => l.branches.iter().for_each(|(c, _)| push_conv(c)),
            }
        }
        dims
    }

    /// Glorot-uniform weights (±sqrt(6/(fan_in+fan_out))), zero biases,
    /// drawn in parameter order from a stream cipher seeded with `seed`.
    pub fn init_glorot(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init_conv = |conv: &mut ConvParams, rng: &mut ChaCha8Rng| {
            let fan_in = (conv.in_channels() * conv.kernel()) as f64;
            let fan_out = (conv.out_channels() * conv.kernel()) as f64;
            let limit = (6.0 / (fan_in + fan_out)).sqrt();
            for w in conv.weight.iter_mut() {
                *w = rng.gen_range(-limit..limit);
            }
            conv.bias.fill(0.0);
        };
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(l) => init_conv(&mut l.conv, &mut rng),
                Layer::Mklanl(l) => l
                    .branches
                    .iter_mut()
                    .for_each(|(c, _)| init_conv(c, &mut rng)),
            }
        }
    }

    fn check_input(&self, batch: &Tensor) -> Result<()> {
        let (b, c, l) = batch.shape();
        if b == 0 || c != self.layers[0].in_channels() || l != self.input_len {
            return Err(Error::ShapeMismatch {
                context: "model forward",
                expected: format!(
                    "(B >= 1, {}, {})",
                    self.layers[0].in_channels(),
                    self.input_len
                ),
                got: format!("{:?}", batch.shape()),
            });
        }
        Ok(())
    }

    fn layer_forward(&self, layer: &Layer, input: &Tensor) -> Tensor {
        let (b, _, l) = input.shape();
        let mut out = Tensor::zeros(b, layer.out_channels(), l);
        match layer {
            Layer::Conv(cl) => {
                conv1d_into(input, &cl.conv, &mut out, 0);
                activation_inplace(out.data_mut(), cl.act);
            }
            Layer::Mklanl(ml) => {
                let mut offset = 0;
                for (conv, act) in &ml.branches {
                    conv1d_into(input, conv, &mut out, offset);
                    if *act == Activation::Relu {
                        for bi in 0..b {
                            for c in offset..offset + conv.out_channels() {
                                activation_inplace(out.channel_mut(bi, c), Activation::Relu);
                            }
                        }
                    }
                    offset += conv.out_channels();
                }
            }
        }
        out
    }

    /// Inference pass: `(B, 1, L)` in, `(B, 1, L)` out.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor> {
        self.check_input(batch)?;
        let mut x = self.layer_forward(&self.layers[0], batch);
        for layer in &self.layers[1..] {
            x = self.layer_forward(layer, &x);
        }
        Ok(x)
    }

    /// Forward pass that retains every layer's output for [`backward`](Self::backward).
    pub fn forward_train(&self, batch: &Tensor) -> Result<ForwardCache> {
        self.check_input(batch)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(batch.clone());
        for layer in &self.layers {
            let y = self.layer_forward(layer, acts.last().unwrap());
            acts.push(y);
        }
        Ok(ForwardCache { acts })
    }

    /// Backpropagate `upstream` (gradient of the loss in the output) through
    /// the cached forward pass. Returns parameter gradients in parameter
    /// order and the gradient at the input.
    pub fn backward(&self, cache: &ForwardCache, upstream: &Tensor) -> Result<(Gradients, Tensor)> {
        let out_shape = cache.output().shape();
        if upstream.shape() != out_shape {
            return Err(Error::ShapeMismatch {
                context: "model backward",
                expected: format!("{out_shape:?}"),
                got: format!("{:?}", upstream.shape()),
            });
        }
        let mut delta = upstream.clone();
        // Gradients collected walking backward, then reversed into layer order.
        let mut rev: Vec<Vec<Vec<f64>>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.acts[i];
            let output = &cache.acts[i + 1];
            let (bsz, _, _) = input.shape();
            let mut dx = Tensor::zeros(bsz, layer.in_channels(), input.len());
            let mut layer_grads: Vec<Vec<f64>> = Vec::new();
            match layer {
                Layer::Conv(cl) => {
                    if cl.act == Activation::Relu {
                        relu_mask_from_output(delta.data_mut(), output.data());
                    }
                    let mut grads = ConvGrads {
                        weight: vec![0.0; cl.conv.weight.len()],
                        bias: vec![0.0; cl.conv.bias.len()],
                    };
                    conv1d_backward_into(input, &cl.conv, &delta, 0, &mut dx, &mut grads);
                    layer_grads.push(grads.weight);
                    layer_grads.push(grads.bias);
                }
                Layer::Mklanl(ml) => {
                    let mut offset = 0;
                    for (conv, act) in &ml.branches {
                        if *act == Activation::Relu {
                            for bi in 0..bsz {
                                for c in offset..offset + conv.out_channels() {
                                    relu_mask_from_output(
                                        delta.channel_mut(bi, c),
                                        output.channel(bi, c),
                                    );
                                }
                            }
                        }
                        let mut grads = ConvGrads {
                            weight: vec![0.0; conv.weight.len()],
                            bias: vec![0.0; conv.bias.len()],
                        };
                        conv1d_backward_into(input, conv, &delta, offset, &mut dx, &mut grads);
                        layer_grads.push(grads.weight);
                        layer_grads.push(grads.bias);
                        offset += conv.out_channels();
                    }
                }
            }
            rev.push(layer_grads);
            delta = dx;
        }
        let mut flat = Vec::new();
        for layer_grads in rev.into_iter().rev() {
            flat.extend(layer_grads);
        }
        Ok((Gradients(flat), delta))
    }
}

/// Build a standard model over 512-sample beats.
pub fn build_model(kind: ModelKind, seed: u64) -> ModelGraph {
    build_model_custom(kind, &STANDARD_WIDTHS, BEAT_LEN, seed)
        .expect("standard widths are always valid")
}

/// Build a model with custom module widths and input length; used for
/// reduced-size verification graphs. Multipath widths must divide by 8.
pub fn build_model_custom(
    kind: ModelKind,
    widths: &[usize],
    input_len: usize,
    seed: u64,
) -> Result<ModelGraph> {
    if widths.is_empty() {
        return Err(Error::Config("model needs at least one module".into()));
    }
    let mut layers = Vec::with_capacity(widths.len() + 1);
    let mut in_ch = 1;
    for (i, &n) in widths.iter().enumerate() {
        let idx = i + 1;
        match kind {
            ModelKind::DeepFilter | ModelKind::MultiBranch => {
                // Dilation 3 on every second module, matching the published
                // graph; the multibranch ablation zeroes all dilation rates.
                let r = if kind == ModelKind::DeepFilter && idx % 2 == 0 {
                    3
                } else {
                    0
                };
                let cfg = MklanlConfig {
                    total_filters: n,
                    dilation_rate: r,
                };
                layers.push(Layer::Mklanl(build_mklanl(&cfg, in_ch, &format!("module{idx}"))?));
            }
            ModelKind::VanillaL | ModelKind::VanillaNl => {
                let act = if kind == ModelKind::VanillaNl {
                    Activation::Relu
                } else {
                    Activation::Linear
                };
                layers.push(Layer::conv(
                    &format!("conv{idx}"),
                    ConvParams::new(in_ch, n, 9, 0)?,
                    act,
                ));
            }
        }
        in_ch = n;
    }
    layers.push(Layer::conv(
        "head",
        ConvParams::new(in_ch, 1, 9, 0)?,
        Activation::Linear,
    ));
    let mut graph = ModelGraph::from_layers(kind, layers, input_len);
    graph.init_glorot(seed);
    Ok(graph)
}
