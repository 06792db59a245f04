//! Dense layer library sufficient to express the seven line-recognizer
//! architectures: stacks of 3x3 convolutions (ReLU), max pooling,
//! a bidirectional LSTM stage, optional dropout, and a softmax projection
//! head over the codec.
//!
//! A network runs in two phases. The image phase operates on `[H, W, C]`
//! tensors; its result is flattened column-wise into a `[T, F]` sequence
//! (time = width, features = height x channels) for the sequence phase and
//! the projection head. `forward` records a [`Trace`] holding every
//! intermediate needed for an exact reverse pass, so `backward` cannot be
//! called without a prior forward by construction.

pub mod adam;
pub mod lstm;
pub mod ops;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ctc::CtcVariant;
use crate::error::{Error, Result};
use crate::probs::ProbMatrix;
use crate::tensor::Tensor;

use lstm::{blstm_backward, blstm_with_cache, BlstmCache, BlstmParams, LstmDirParams};
use ops::{
    conv2d, conv2d_backward, dropout_backward, dropout_forward, maxpool, maxpool_backward,
    project_backward, project_softmax, relu_backward, relu_inplace,
};

pub use adam::{adam_step, AdamConfig, AdamOutcome, AdamState};

/// Canonical line-image height used by the presets.
pub const INPUT_HEIGHT: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    Conv {
        filters: usize,
        /// `(kh, kw)`; 3x3 unless overridden.
        kernel: (usize, usize),
        /// Only `(1, 1)` is supported (equal padding keeps extents).
        stride: (usize, usize),
    },
    /// Stride equals the kernel. `kernel_w` acts on the time (width) axis.
    MaxPool { kernel_h: usize, kernel_w: usize },
    Blstm { hidden: usize },
    Dropout { rate: f64 },
}

impl LayerSpec {
    pub fn conv(filters: usize) -> LayerSpec {
        LayerSpec::Conv {
            filters,
            kernel: (3, 3),
            stride: (1, 1),
        }
    }

    /// Pool written in time x height order, as the architecture tables read:
    /// `pool(2, 2)` halves both axes, `pool(1, 2)` halves only the height.
    pub fn pool_time_height(time: usize, height: usize) -> LayerSpec {
        LayerSpec::MaxPool {
            kernel_h: height,
            kernel_w: time,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Preset id 1-7, if this spec came from the preset table.
    pub id: Option<u8>,
    pub layers: Vec<LayerSpec>,
    /// Output classes including the blank.
    pub classes: usize,
    pub variant: CtcVariant,
    pub input_height: usize,
}

impl NetworkSpec {
    /// The seven preset architectures:
    ///
    /// 1. LSTM 100
    /// 2. CNN 40, Pool 2x2, LSTM 100
    /// 3. CNN 40, Pool 2x2, CNN 60, Pool 2x2, LSTM 100
    /// 4. CNN 40, Pool 2x2, CNN 60, Pool 1x2, LSTM 100
    /// 5. network 3 with no-merge CTC semantics
    /// 6. network 3 plus dropout 0.5
    /// 7. CNN 40, Pool 2x2, CNN 60, Pool 2x2, LSTM 200, dropout 0.5
    pub fn preset(id: u8, classes: usize) -> Result<NetworkSpec> {
        let layers = Self::preset_layers(id)?;
        let variant = if id == 5 {
            CtcVariant::NoMerge
        } else {
            CtcVariant::Merge
        };
        let spec = NetworkSpec {
            id: Some(id),
            layers,
            classes,
            variant,
            input_height: INPUT_HEIGHT,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn preset_layers(id: u8) -> Result<Vec<LayerSpec>> {
        use LayerSpec as L;
        let deep = |hidden: usize, dropout: bool| {
            let mut v = vec![
                L::conv(40),
                L::pool_time_height(2, 2),
                L::conv(60),
                L::pool_time_height(2, 2),
                L::Blstm { hidden },
            ];
            if dropout {
                v.push(L::Dropout { rate: 0.5 });
            }
            v
        };
        Ok(match id {
            1 => vec![L::Blstm { hidden: 100 }],
            2 => vec![
                L::conv(40),
                L::pool_time_height(2, 2),
                L::Blstm { hidden: 100 },
            ],
            3 | 5 => deep(100, false),
            4 => vec![
                L::conv(40),
                L::pool_time_height(2, 2),
                L::conv(60),
                L::pool_time_height(1, 2),
                L::Blstm { hidden: 100 },
            ],
            6 => deep(100, true),
            7 => deep(200, true),
            other => return Err(Error::config(format!("unknown network id {other}"))),
        })
    }

    /// A spec with arbitrary layers (used for reduced-size test networks).
    pub fn custom(
        layers: Vec<LayerSpec>,
        classes: usize,
        variant: CtcVariant,
        input_height: usize,
    ) -> Result<NetworkSpec> {
        let spec = NetworkSpec {
            id: None,
            layers,
            classes,
            variant,
            input_height,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::config(
                "network needs at least one real class besides the blank",
            ));
        }
        if self.input_height == 0 {
            return Err(Error::config("input height must be positive"));
        }
        let mut in_seq_phase = false;
        for layer in &self.layers {
            match layer {
                LayerSpec::Conv {
                    filters,
                    kernel,
                    stride,
                } => {
                    if in_seq_phase {
                        return Err(Error::config(
                            "conv/pool layers must precede the recurrent stage",
                        ));
                    }
                    if *filters == 0 {
                        return Err(Error::config("conv needs at least one filter"));
                    }
                    if kernel.0 % 2 == 0 || kernel.1 % 2 == 0 {
                        return Err(Error::config(format!(
                            "conv kernel {}x{} must be odd",
                            kernel.0, kernel.1
                        )));
                    }
                    if *stride != (1, 1) {
                        return Err(Error::config("conv stride must be 1"));
                    }
                }
                LayerSpec::MaxPool { kernel_h, kernel_w } => {
                    if in_seq_phase {
                        return Err(Error::config(
                            "conv/pool layers must precede the recurrent stage",
                        ));
                    }
                    if !(1..=2).contains(kernel_h) || !(1..=2).contains(kernel_w) {
                        return Err(Error::config(format!(
                            "pool kernel extents must be 1 or 2, got {kernel_h}x{kernel_w}"
                        )));
                    }
                }
                LayerSpec::Blstm { hidden } => {
                    in_seq_phase = true;
                    if *hidden == 0 {
                        return Err(Error::config("blstm needs a positive hidden size"));
                    }
                }
                LayerSpec::Dropout { rate } => {
                    in_seq_phase = true;
                    if !(0.0..1.0).contains(rate) {
                        return Err(Error::config(format!("dropout rate {rate} not in [0, 1)")));
                    }
                }
            }
        }
        if let Some(id) = self.id {
            let expected = Self::preset_layers(id)?;
            if self.layers != expected {
                return Err(Error::config(format!(
                    "network id {id} does not match its preset layer stack"
                )));
            }
            if (id == 5) != (self.variant == CtcVariant::NoMerge) {
                return Err(Error::config(
                    "only network 5 disables merging of repeated labels",
                ));
            }
        }
        Ok(())
    }

    /// Product of time-axis pool strides.
    pub fn time_downsample_factor(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                LayerSpec::MaxPool { kernel_w, .. } => *kernel_w,
                _ => 1,
            })
            .product()
    }

    /// Number of output frames for an input of `width` columns.
    pub fn frames_for_width(&self, width: usize) -> usize {
        let mut w = width;
        for layer in &self.layers {
            if let LayerSpec::MaxPool { kernel_w, .. } = layer {
                w = w.div_ceil(*kernel_w);
            }
        }
        w
    }
}

enum ImageLayer {
    Conv { weights: Tensor, bias: Tensor },
    Pool { kernel: (usize, usize) },
}

enum SeqLayer {
    Blstm(BlstmParams),
    Dropout { rate: f64 },
}

pub struct Network {
    spec: NetworkSpec,
    image_layers: Vec<ImageLayer>,
    seq_layers: Vec<SeqLayer>,
    proj_weights: Tensor,
    proj_bias: Tensor,
}

#[derive(Clone, Copy, Debug)]
pub enum ForwardMode {
    Inference,
    /// Dropout active; masks derive deterministically from the seed.
    Train { dropout_seed: u64 },
}

enum ImageStep {
    Conv { pre: Tensor, out: Tensor },
    Pool { out: Tensor, argmax: Vec<usize> },
}

impl ImageStep {
    fn out(&self) -> &Tensor {
        match self {
            ImageStep::Conv { out, .. } => out,
            ImageStep::Pool { out, .. } => out,
        }
    }
}

enum SeqStep {
    Blstm { out: Tensor, cache: BlstmCache },
    Dropout { out: Tensor, mask: Vec<f64> },
}

impl SeqStep {
    fn out(&self) -> &Tensor {
        match self {
            SeqStep::Blstm { out, .. } => out,
            SeqStep::Dropout { out, .. } => out,
        }
    }
}

/// Recorded forward pass: owns every intermediate activation plus the pool
/// argmax maps and dropout masks needed for the exact reverse pass.
pub struct Trace {
    input: Tensor,
    image_steps: Vec<ImageStep>,
    seq_input: Tensor,
    seq_steps: Vec<SeqStep>,
}

/// Parameter gradients in [`Network::param_tensors`] order plus the
/// gradient with respect to the input image.
pub struct Gradients {
    pub tensors: Vec<Tensor>,
    pub dinput: Tensor,
}

fn glorot(rng: &mut ChaCha8Rng, shape: &[usize], fan_in: usize, fan_out: usize) -> Tensor {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let len: usize = shape.iter().product();
    Tensor::from_vec(
        shape,
        (0..len).map(|_| rng.gen_range(-bound..bound)).collect(),
    )
    .expect("shape/volume constructed consistently")
}

fn lstm_dir_init(rng: &mut ChaCha8Rng, features: usize, hidden: usize) -> LstmDirParams {
    let g4 = 4 * hidden;
    let wx = glorot(rng, &[features, g4], features, g4);
    let wh = glorot(rng, &[hidden, g4], hidden, g4);
    let mut b = Tensor::zeros(&[g4]);
    // Forget-gate bias of 1 keeps early cell states alive.
    for j in hidden..2 * hidden {
        b.data_mut()[j] = 1.0;
    }
    LstmDirParams { wx, wh, b }
}

impl Network {
    /// Builds a network with freshly initialized weights: Glorot-uniform
    /// matrices, zero biases, LSTM forget-gate bias 1.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Network> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut image_layers = Vec::new();
        let mut seq_layers = Vec::new();
        let (mut h, mut c) = (spec.input_height, 1usize);
        let mut features: Option<usize> = None;
        for layer in &spec.layers {
            match layer {
                LayerSpec::Conv {
                    filters, kernel, ..
                } => {
                    let (kh, kw) = *kernel;
                    let fan = kh * kw;
                    let weights =
                        glorot(&mut rng, &[kh, kw, c, *filters], fan * c, fan * filters);
                    image_layers.push(ImageLayer::Conv {
                        weights,
                        bias: Tensor::zeros(&[*filters]),
                    });
                    c = *filters;
                }
                LayerSpec::MaxPool { kernel_h, kernel_w } => {
                    image_layers.push(ImageLayer::Pool {
                        kernel: (*kernel_h, *kernel_w),
                    });
                    h = h.div_ceil(*kernel_h);
                }
                LayerSpec::Blstm { hidden } => {
                    let f = features.unwrap_or(h * c);
                    seq_layers.push(SeqLayer::Blstm(BlstmParams {
                        fwd: lstm_dir_init(&mut rng, f, *hidden),
                        bwd: lstm_dir_init(&mut rng, f, *hidden),
                    }));
                    features = Some(2 * hidden);
                }
                LayerSpec::Dropout { rate } => {
                    if features.is_none() {
                        features = Some(h * c);
                    }
                    seq_layers.push(SeqLayer::Dropout { rate: *rate });
                }
            }
        }
        let f = features.unwrap_or(h * c);
        let proj_weights = glorot(&mut rng, &[f, spec.classes], f, spec.classes);
        let proj_bias = Tensor::zeros(&[spec.classes]);
        Ok(Network {
            spec,
            image_layers,
            seq_layers,
            proj_weights,
            proj_bias,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    /// Named parameter tensors in canonical order (the order used by the
    /// optimizer state, gradient vectors, and the model file).
    pub fn param_tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        let mut conv_idx = 0;
        for layer in &self.image_layers {
            if let ImageLayer::Conv { weights, bias } = layer {
                out.push((format!("conv{conv_idx}.weight"), weights));
                out.push((format!("conv{conv_idx}.bias"), bias));
                conv_idx += 1;
            }
        }
        let mut blstm_idx = 0;
        for layer in &self.seq_layers {
            if let SeqLayer::Blstm(p) = layer {
                for (dir, d) in [("fwd", &p.fwd), ("bwd", &p.bwd)] {
                    out.push((format!("blstm{blstm_idx}.{dir}.wx"), &d.wx));
                    out.push((format!("blstm{blstm_idx}.{dir}.wh"), &d.wh));
                    out.push((format!("blstm{blstm_idx}.{dir}.bias"), &d.b));
                }
                blstm_idx += 1;
            }
        }
        out.push(("proj.weight".into(), &self.proj_weights));
        out.push(("proj.bias".into(), &self.proj_bias));
        out
    }

    pub fn param_tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = Vec::new();
        let mut conv_idx = 0;
        for layer in &mut self.image_layers {
            if let ImageLayer::Conv { weights, bias } = layer {
                out.push((format!("conv{conv_idx}.weight"), weights));
                out.push((format!("conv{conv_idx}.bias"), bias));
                conv_idx += 1;
            }
        }
        let mut blstm_idx = 0;
        for layer in &mut self.seq_layers {
            if let SeqLayer::Blstm(p) = layer {
                for (dir, d) in [("fwd", &mut p.fwd), ("bwd", &mut p.bwd)] {
                    out.push((format!("blstm{blstm_idx}.{dir}.wx"), &mut d.wx));
                    out.push((format!("blstm{blstm_idx}.{dir}.wh"), &mut d.wh));
                    out.push((format!("blstm{blstm_idx}.{dir}.bias"), &mut d.b));
                }
                blstm_idx += 1;
            }
        }
        out.push(("proj.weight".into(), &mut self.proj_weights));
        out.push(("proj.bias".into(), &mut self.proj_bias));
        out
    }

    /// Rounds every parameter to `f32` precision, the precision the model
    /// file stores. A freshly trained model is finalized through this so a
    /// save/load roundtrip is exact.
    pub fn quantize_params_f32(&mut self) {
        for (_, t) in self.param_tensors_mut() {
            t.quantize_f32();
        }
    }

    /// Column-major flatten: `[H, W, C]` image to `[T=W, F=H*C]` sequence.
    fn to_sequence(img: &Tensor) -> Tensor {
        let (h, w, c) = (img.shape()[0], img.shape()[1], img.shape()[2]);
        let f = h * c;
        let mut seq = Tensor::zeros(&[w, f]);
        let sd = seq.data_mut();
        let id = img.data();
        for y in 0..h {
            for x in 0..w {
                let src = (y * w + x) * c;
                let dst = x * f + y * c;
                sd[dst..dst + c].copy_from_slice(&id[src..src + c]);
            }
        }
        seq
    }

    fn from_sequence(dseq: &Tensor, img_shape: &[usize]) -> Tensor {
        let (h, w, c) = (img_shape[0], img_shape[1], img_shape[2]);
        let f = h * c;
        let mut dimg = Tensor::zeros(img_shape);
        let dd = dimg.data_mut();
        let sd = dseq.data();
        for y in 0..h {
            for x in 0..w {
                let dst = (y * w + x) * c;
                let src = x * f + y * c;
                dd[dst..dst + c].copy_from_slice(&sd[src..src + c]);
            }
        }
        dimg
    }

    /// Forward pass over one line image. Returns the per-frame posterior
    /// and the trace consumed by [`Network::backward`].
    pub fn forward(&self, image: &Tensor, mode: ForwardMode) -> Result<(ProbMatrix, Trace)> {
        let shape = image.shape();
        if shape.len() != 3 {
            return Err(Error::shape(format!(
                "line image must be [H, W, C], got {shape:?}"
            )));
        }
        if shape[0] != self.spec.input_height {
            return Err(Error::shape(format!(
                "line image height {} does not match network input height {}",
                shape[0], self.spec.input_height
            )));
        }
        if shape[1] == 0 {
            return Err(Error::shape("line image has zero width"));
        }

        let mut image_steps: Vec<ImageStep> = Vec::with_capacity(self.image_layers.len());
        for (idx, layer) in self.image_layers.iter().enumerate() {
            let input = if idx == 0 {
                image
            } else {
                image_steps[idx - 1].out()
            };
            let step = match layer {
                ImageLayer::Conv { weights, bias } => {
                    let pre = conv2d(input, weights, bias.data())?;
                    let mut out = pre.clone();
                    relu_inplace(&mut out);
                    ImageStep::Conv { pre, out }
                }
                ImageLayer::Pool { kernel } => {
                    let (out, argmax) = maxpool(input, *kernel)?;
                    ImageStep::Pool { out, argmax }
                }
            };
            image_steps.push(step);
        }
        let seq_input =
            Self::to_sequence(image_steps.last().map_or(image, |s| s.out()));

        let mut seq_steps: Vec<SeqStep> = Vec::with_capacity(self.seq_layers.len());
        for (idx, layer) in self.seq_layers.iter().enumerate() {
            let input = if idx == 0 {
                &seq_input
            } else {
                seq_steps[idx - 1].out()
            };
            let step = match layer {
                SeqLayer::Blstm(p) => {
                    let (out, cache) = blstm_with_cache(input, p)?;
                    SeqStep::Blstm { out, cache }
                }
                SeqLayer::Dropout { rate } => match mode {
                    ForwardMode::Train { dropout_seed } => {
                        let layer_seed = dropout_seed
                            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(idx as u64 + 1));
                        let (out, mask) = dropout_forward(input, *rate, layer_seed)?;
                        SeqStep::Dropout { out, mask }
                    }
                    ForwardMode::Inference => SeqStep::Dropout {
                        out: input.clone(),
                        mask: Vec::new(),
                    },
                },
            };
            seq_steps.push(step);
        }

        let proj_input = seq_steps.last().map_or(&seq_input, |s| s.out());
        let probs = project_softmax(proj_input, &self.proj_weights, self.proj_bias.data())?;
        Ok((
            probs,
            Trace {
                input: image.clone(),
                image_steps,
                seq_input,
                seq_steps,
            },
        ))
    }

    /// Exact reverse-mode gradients for every parameter and the input,
    /// given the loss gradient with respect to the projection logits.
    pub fn backward(&self, trace: &Trace, dlogits: &[f64]) -> Result<Gradients> {
        let proj_input = trace
            .seq_steps
            .last()
            .map_or(&trace.seq_input, |s| s.out());
        let frames = proj_input.shape()[0];
        if dlogits.len() != frames * self.spec.classes {
            return Err(Error::shape(format!(
                "dlogits has {} values, expected {}x{}",
                dlogits.len(),
                frames,
                self.spec.classes
            )));
        }
        let (mut dseq, dproj_w, dproj_b) =
            project_backward(proj_input, &self.proj_weights, dlogits);

        let mut seq_grads: Vec<Option<lstm::BlstmGrads>> = Vec::new();
        for _ in &self.seq_layers {
            seq_grads.push(None);
        }
        for (idx, layer) in self.seq_layers.iter().enumerate().rev() {
            let input = if idx == 0 {
                &trace.seq_input
            } else {
                trace.seq_steps[idx - 1].out()
            };
            match (layer, &trace.seq_steps[idx]) {
                (SeqLayer::Blstm(p), SeqStep::Blstm { cache, .. }) => {
                    let (dx, grads) = blstm_backward(input, p, cache, &dseq);
                    seq_grads[idx] = Some(grads);
                    dseq = dx;
                }
                (SeqLayer::Dropout { .. }, SeqStep::Dropout { mask, .. }) => {
                    if !mask.is_empty() {
                        dseq = dropout_backward(&dseq, mask);
                    }
                }
                _ => return Err(Error::config("trace does not match network layers")),
            }
        }

        let last_img_shape = trace
            .image_steps
            .last()
            .map_or(trace.input.shape(), |s| s.out().shape());
        let mut dimg = Self::from_sequence(&dseq, last_img_shape);

        let mut image_grads: Vec<Option<(Tensor, Vec<f64>)>> = Vec::new();
        for _ in &self.image_layers {
            image_grads.push(None);
        }
        for (idx, layer) in self.image_layers.iter().enumerate().rev() {
            let input = if idx == 0 {
                &trace.input
            } else {
                trace.image_steps[idx - 1].out()
            };
            match (layer, &trace.image_steps[idx]) {
                (ImageLayer::Conv { weights, .. }, ImageStep::Conv { pre, .. }) => {
                    let dpre = relu_backward(pre, &dimg);
                    let (dx, dw, db) = conv2d_backward(input, weights, &dpre)?;
                    image_grads[idx] = Some((dw, db));
                    dimg = dx;
                }
                (ImageLayer::Pool { .. }, ImageStep::Pool { argmax, .. }) => {
                    dimg = maxpool_backward(input.shape(), argmax, &dimg);
                }
                _ => return Err(Error::config("trace does not match network layers")),
            }
        }

        // Assemble in param_tensors order.
        let mut tensors = Vec::new();
        for g in image_grads.into_iter().flatten() {
            let (dw, db) = g;
            let db_len = db.len();
            tensors.push(dw);
            tensors.push(Tensor::from_vec(&[db_len], db)?);
        }
        for g in seq_grads.into_iter().flatten() {
            for dir in [g.fwd, g.bwd] {
                tensors.push(dir.dwx);
                tensors.push(dir.dwh);
                tensors.push(dir.db);
            }
        }
        tensors.push(dproj_w);
        let dproj_b_len = dproj_b.len();
        tensors.push(Tensor::from_vec(&[dproj_b_len], dproj_b)?);
        Ok(Gradients {
            tensors,
            dinput: dimg,
        })
    }
}
