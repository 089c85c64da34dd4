//! CRNN with bidirectional GRU and self-attention, followed by an activity
//! branch (sigmoid) and a DOA branch (tanh).

use rand::Rng;

use crate::autodiff::checkpoint::Record;
use crate::autodiff::{BatchNormState, Graph, GruDirection, Mode, Var};
use crate::error::{Result, SeldError};
use crate::kv::KvMap;
use crate::rng::SeldRng;
use crate::tensor::Tensor;

/// Output frames per second of the network (100 ms hop).
pub const OUTPUT_FRAME_HOP: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub num_classes: usize,
    pub input_frames: usize,
    pub freq_bins: usize,
    pub in_channels: usize,
    pub conv_filters: Vec<usize>,
    /// `(time, frequency)` pooling after every conv layer but the first.
    pub pool_kernels: Vec<(usize, usize)>,
    pub gru_hidden: usize,
    pub d_k: usize,
    pub fc_width: usize,
    pub dropout_conv: f64,
    pub dropout_rnn: f64,
    pub dropout_fc: f64,
    /// Divides filter counts, GRU hidden size and fc width (d_k floored at 8).
    pub scale_factor: usize,
    pub bn_momentum: f64,
    pub bn_eps: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            num_classes: 14,
            input_frames: 600,
            freq_bins: 64,
            in_channels: 7,
            conv_filters: vec![64, 64, 128, 128, 256, 256],
            pool_kernels: vec![(5, 2), (1, 2), (1, 2), (1, 2), (1, 2)],
            gru_hidden: 256,
            d_k: 64,
            fc_width: 512,
            dropout_conv: 0.5,
            dropout_rnn: 0.1,
            dropout_fc: 0.25,
            scale_factor: 1,
            bn_momentum: 0.9,
            bn_eps: 1e-3,
        }
    }
}

impl ModelConfig {
    /// Reduced-width preset for CPU experiments, without dropout.
    pub fn desk(num_classes: usize, in_channels: usize) -> Self {
        ModelConfig {
            num_classes,
            input_frames: 100,
            in_channels,
            scale_factor: 8,
            dropout_conv: 0.0,
            dropout_rnn: 0.0,
            dropout_fc: 0.0,
            ..Self::default()
        }
    }

    pub fn filters(&self) -> Vec<usize> {
        self.conv_filters.iter().map(|f| (f / self.scale_factor).max(1)).collect()
    }

    pub fn hidden(&self) -> usize {
        (self.gru_hidden / self.scale_factor).max(1)
    }

    pub fn fc(&self) -> usize {
        (self.fc_width / self.scale_factor).max(1)
    }

    pub fn key_dim(&self) -> usize {
        (self.d_k / self.scale_factor).max(8.min(self.d_k))
    }

    pub fn time_pool(&self) -> usize {
        self.pool_kernels.iter().map(|k| k.0).product()
    }

    pub fn freq_pool(&self) -> usize {
        self.pool_kernels.iter().map(|k| k.1).product()
    }

    pub fn output_frames(&self, input_frames: usize) -> usize {
        input_frames / self.time_pool()
    }

    /// Width of one step of the sequence fed to the GRU.
    pub fn sequence_width(&self) -> usize {
        self.freq_bins / self.freq_pool() * self.filters().last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.conv_filters.is_empty() || self.pool_kernels.len() + 1 != self.conv_filters.len() {
            return Err(SeldError::config("need exactly one pool kernel per conv layer after the first"));
        }
        if self.scale_factor == 0 || self.num_classes == 0 || self.in_channels == 0 {
            return Err(SeldError::config("scale_factor, num_classes and in_channels must be positive"));
        }
        if self.pool_kernels.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(SeldError::config("pool kernels must be positive"));
        }
        if self.input_frames % self.time_pool() != 0 {
            return Err(SeldError::config(format!(
                "input_frames {} not divisible by temporal pooling {}",
                self.input_frames,
                self.time_pool()
            )));
        }
        if self.freq_bins % self.freq_pool() != 0 {
            return Err(SeldError::config(format!(
                "freq_bins {} not divisible by frequency pooling {}",
                self.freq_bins,
                self.freq_pool()
            )));
        }
        for (name, r) in [("conv", self.dropout_conv), ("rnn", self.dropout_rnn), ("fc", self.dropout_fc)] {
            if !(0.0..1.0).contains(&r) {
                return Err(SeldError::config(format!("dropout_{name} must be in [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::new();
        kv.set("num_classes", self.num_classes);
        kv.set("input_frames", self.input_frames);
        kv.set("freq_bins", self.freq_bins);
        kv.set("in_channels", self.in_channels);
        kv.set_list("conv_filters", &self.conv_filters);
        let pools: Vec<String> = self.pool_kernels.iter().map(|(a, b)| format!("{a}x{b}")).collect();
        kv.set_list("pool_kernels", &pools);
        kv.set("gru_hidden", self.gru_hidden);
        kv.set("d_k", self.d_k);
        kv.set("fc_width", self.fc_width);
        kv.set("dropout_conv", self.dropout_conv);
        kv.set("dropout_rnn", self.dropout_rnn);
        kv.set("dropout_fc", self.dropout_fc);
        kv.set("scale_factor", self.scale_factor);
        kv.set("bn_momentum", self.bn_momentum);
        kv.set("bn_eps", self.bn_eps);
        kv
    }

    /// Missing keys fall back to `base`.
    pub fn from_kv(kv: &KvMap, base: &ModelConfig) -> Result<Self> {
        let pool_kernels = match kv.get_list::<String>("pool_kernels")? {
            None => base.pool_kernels.clone(),
            Some(items) => items
                .iter()
                .map(|s| {
                    let (a, b) = s
                        .split_once('x')
                        .ok_or_else(|| SeldError::config(format!("pool kernel '{s}' is not AxB")))?;
                    let p = |v: &str| v.parse::<usize>().map_err(|_| SeldError::config(format!("bad pool kernel '{s}'")));
                    Ok((p(a)?, p(b)?))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let cfg = ModelConfig {
            num_classes: kv.get_or("num_classes", base.num_classes)?,
            input_frames: kv.get_or("input_frames", base.input_frames)?,
            freq_bins: kv.get_or("freq_bins", base.freq_bins)?,
            in_channels: kv.get_or("in_channels", base.in_channels)?,
            conv_filters: kv.get_list("conv_filters")?.unwrap_or_else(|| base.conv_filters.clone()),
            pool_kernels,
            gru_hidden: kv.get_or("gru_hidden", base.gru_hidden)?,
            d_k: kv.get_or("d_k", base.d_k)?,
            fc_width: kv.get_or("fc_width", base.fc_width)?,
            dropout_conv: kv.get_or("dropout_conv", base.dropout_conv)?,
            dropout_rnn: kv.get_or("dropout_rnn", base.dropout_rnn)?,
            dropout_fc: kv.get_or("dropout_fc", base.dropout_fc)?,
            scale_factor: kv.get_or("scale_factor", base.scale_factor)?,
            bn_momentum: kv.get_or("bn_momentum", base.bn_momentum)?,
            bn_eps: kv.get_or("bn_eps", base.bn_eps)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Spatial shape after every block for a single input of `config.input_frames` frames.
pub fn intermediate_shapes(config: &ModelConfig) -> Result<Vec<(String, Vec<usize>)>> {
    config.validate()?;
    let filters = config.filters();
    let (mut t, mut f) = (config.input_frames, config.freq_bins);
    let mut shapes = vec![("input".to_string(), vec![t, f, config.in_channels])];
    for (i, &c) in filters.iter().enumerate() {
        shapes.push((format!("conv{}", i + 1), vec![t, f, c]));
        if i > 0 {
            let (kt, kf) = config.pool_kernels[i - 1];
            t /= kt;
            f /= kf;
            shapes.push((format!("pool{i}"), vec![t, f, c]));
        }
    }
    let width = config.sequence_width();
    let h = config.hidden();
    shapes.push(("reshape".into(), vec![t, width]));
    shapes.push(("bigru".into(), vec![t, 2 * h]));
    shapes.push(("attention".into(), vec![t, 2 * h]));
    shapes.push(("activity".into(), vec![t, config.num_classes]));
    shapes.push(("doa".into(), vec![t, config.num_classes, 3]));
    Ok(shapes)
}

/// Per-item network output on the 100 ms grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub frames: usize,
    pub classes: usize,
    /// `frames × classes`, values in (0, 1).
    pub activity: Vec<f64>,
    /// `frames × classes × 3`, values in (−1, 1), not renormalized.
    pub doa: Vec<f64>,
}

impl Predictions {
    pub fn zeros(frames: usize, classes: usize) -> Self {
        Predictions { frames, classes, activity: vec![0.0; frames * classes], doa: vec![0.0; frames * classes * 3] }
    }

    pub fn activity_at(&self, t: usize, c: usize) -> f64 {
        self.activity[t * self.classes + c]
    }

    pub fn doa_at(&self, t: usize, c: usize) -> [f64; 3] {
        let i = (t * self.classes + c) * 3;
        [self.doa[i], self.doa[i + 1], self.doa[i + 2]]
    }

    /// Appends `other`'s frames after ours.
    pub fn extend(&mut self, other: &Predictions, frames: usize) {
        debug_assert_eq!(self.classes, other.classes);
        self.activity.extend_from_slice(&other.activity[..frames * other.classes]);
        self.doa.extend_from_slice(&other.doa[..frames * other.classes * 3]);
        self.frames += frames;
    }
}

/// Graph handles of one forward pass.
pub struct ForwardOutput {
    /// `[N, T/5, Y]`
    pub activity: Var,
    /// `[N, T/5, Y, 3]`
    pub doa: Var,
}

impl ForwardOutput {
    pub fn predictions(&self, g: &Graph) -> Vec<Predictions> {
        let act = g.value(self.activity);
        let doa = g.value(self.doa);
        let (n, t, y) = (act.shape()[0], act.shape()[1], act.shape()[2]);
        (0..n)
            .map(|i| Predictions {
                frames: t,
                classes: y,
                activity: act.data()[i * t * y..(i + 1) * t * y].to_vec(),
                doa: doa.data()[i * t * y * 3..(i + 1) * t * y * 3].to_vec(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeldModel {
    pub config: ModelConfig,
    pub names: Vec<String>,
    pub params: Vec<Tensor>,
    pub batch_norms: Vec<BatchNormState>,
}

fn glorot(rng: &mut SeldRng, shape: &[usize], fan_in: usize, fan_out: usize) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Tensor::from_fn(shape, |_| rng.gen_range(-limit..limit))
}

/// `[H, 3H]` matrix whose three `H × H` gate blocks are each orthogonal.
fn orthogonal_gates(rng: &mut SeldRng, h: usize) -> Tensor {
    let mut out = Tensor::zeros(&[h, 3 * h]);
    for gate in 0..3 {
        // Gram-Schmidt on Gaussian-ish columns
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(h);
        while cols.len() < h {
            let mut v: Vec<f64> = (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-6 {
                v.iter_mut().for_each(|a| *a /= norm);
                cols.push(v);
            }
        }
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                out.set(&[i, gate * h + j], v);
            }
        }
    }
    out
}

struct ParamIndex {
    conv: Vec<[usize; 4]>,
    gru: [usize; 6],
    attn: [usize; 2],
    sed: [usize; 6],
    doa: [usize; 6],
}

impl SeldModel {
    pub fn new(config: ModelConfig, rng: &mut SeldRng) -> Result<Self> {
        config.validate()?;
        let mut names = Vec::new();
        let mut params = Vec::new();
        let mut push = |name: String, t: Tensor| {
            names.push(name);
            params.push(t);
        };
        let filters = config.filters();
        let mut cin = config.in_channels;
        for (i, &cout) in filters.iter().enumerate() {
            push(format!("conv{}.kernel", i + 1), glorot(rng, &[3, 3, cin, cout], 9 * cin, 9 * cout));
            push(format!("conv{}.bias", i + 1), Tensor::zeros(&[cout]));
            push(format!("bn{}.gamma", i + 1), Tensor::ones(&[cout]));
            push(format!("bn{}.beta", i + 1), Tensor::zeros(&[cout]));
            cin = cout;
        }
        let din = config.sequence_width();
        let h = config.hidden();
        for dir in ["fwd", "bwd"] {
            push(format!("gru.{dir}.wx"), glorot(rng, &[din, 3 * h], din, 3 * h));
            push(format!("gru.{dir}.wh"), orthogonal_gates(rng, h));
            push(format!("gru.{dir}.b"), Tensor::zeros(&[3 * h]));
        }
        let dk = config.key_dim();
        push("attn.wq".into(), glorot(rng, &[2 * h, dk], 2 * h, dk));
        push("attn.wk".into(), glorot(rng, &[2 * h, dk], 2 * h, dk));
        let fc = config.fc();
        for (branch, out) in [("sed", config.num_classes), ("doa", 3 * config.num_classes)] {
            let dims = [(2 * h, fc), (fc, fc), (fc, out)];
            for (j, &(a, b)) in dims.iter().enumerate() {
                push(format!("{branch}.fc{}.w", j + 1), glorot(rng, &[a, b], a, b));
                push(format!("{branch}.fc{}.b", j + 1), Tensor::zeros(&[b]));
            }
        }
        let batch_norms = filters.iter().map(|&c| BatchNormState::new(c)).collect();
        Ok(SeldModel { config, names, params, batch_norms })
    }

    pub fn num_parameters(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    fn index(&self) -> ParamIndex {
        let nconv = self.config.conv_filters.len();
        let conv = (0..nconv).map(|i| [4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3]).collect();
        let g = 4 * nconv;
        let a = g + 6;
        let s = a + 2;
        let d = s + 6;
        ParamIndex {
            conv,
            gru: [g, g + 1, g + 2, g + 3, g + 4, g + 5],
            attn: [a, a + 1],
            sed: [s, s + 1, s + 2, s + 3, s + 4, s + 5],
            doa: [d, d + 1, d + 2, d + 3, d + 4, d + 5],
        }
    }

    /// Adds every parameter to the graph, tracked when `track` is set.
    pub fn bind(&self, g: &mut Graph, track: bool) -> Vec<Var> {
        self.params.iter().map(|p| g.leaf(p.clone(), track)).collect()
    }

    /// Forward pass over `input: [N, T, F, C]` with parameters bound as `params`.
    pub fn forward_with(
        config: &ModelConfig,
        g: &mut Graph,
        input: Var,
        params: &[Var],
        batch_norms: &mut [BatchNormState],
        mode: Mode,
        rng: &mut SeldRng,
    ) -> Result<ForwardOutput> {
        let xs = g.shape(input).to_vec();
        if xs.len() != 4 || xs[2] != config.freq_bins || xs[3] != config.in_channels {
            return Err(SeldError::shape(format!(
                "model expects [N, T, {}, {}], got {xs:?}",
                config.freq_bins, config.in_channels
            )));
        }
        if xs[1] % config.time_pool() != 0 {
            return Err(SeldError::shape(format!("{} input frames not divisible by {}", xs[1], config.time_pool())));
        }
        let probe = SeldModel { config: config.clone(), names: vec![], params: vec![], batch_norms: vec![] };
        let idx = probe.index();
        let n = xs[0];
        let mut x = input;
        for (i, ids) in idx.conv.iter().enumerate() {
            x = g.conv2d(x, params[ids[0]], params[ids[1]])?;
            x = g.batch_norm(x, params[ids[2]], params[ids[3]], &mut batch_norms[i], mode, config.bn_momentum, config.bn_eps)?;
            x = g.relu(x);
            if i > 0 {
                let (kt, kf) = config.pool_kernels[i - 1];
                x = g.max_pool(x, kt, kf)?;
                x = g.dropout(x, config.dropout_conv, mode, rng)?;
            }
        }
        // [N, T', F', C] -> [N, T', C, F'] -> [N, T', C·F'] (channel-major)
        let s = g.shape(x).to_vec();
        let steps = s[1];
        let x = g.reshape(x, &[n * steps, s[2], s[3]])?;
        let x = g.transpose_last2(x)?;
        let x = g.reshape(x, &[n, steps, s[2] * s[3]])?;

        let p = &idx.gru;
        let z = g.gru_bidirectional(
            x,
            GruDirection { wx: params[p[0]], wh: params[p[1]], b: params[p[2]] },
            GruDirection { wx: params[p[3]], wh: params[p[4]], b: params[p[5]] },
        )?;
        let z = g.dropout(z, config.dropout_rnn, mode, rng)?;
        let z = g.self_attention(z, params[idx.attn[0]], params[idx.attn[1]])?;

        let branch = |g: &mut Graph, ids: &[usize; 6], rng: &mut SeldRng| -> Result<Var> {
            let mut h = z;
            for layer in 0..2 {
                h = g.dense(h, params[ids[2 * layer]], Some(params[ids[2 * layer + 1]]))?;
                h = g.relu(h);
                h = g.dropout(h, config.dropout_fc, mode, rng)?;
            }
            g.dense(h, params[ids[4]], Some(params[ids[5]]))
        };
        let sed = branch(g, &idx.sed, rng)?;
        let activity = g.sigmoid(sed);
        let doa = branch(g, &idx.doa, rng)?;
        let doa = g.tanh(doa);
        let doa = g.reshape(doa, &[n, steps, config.num_classes, 3])?;
        Ok(ForwardOutput { activity, doa })
    }

    /// Forward pass with this model's parameters; running statistics are
    /// updated in train mode. Returns the bound parameter handles as well.
    pub fn forward(
        &mut self,
        g: &mut Graph,
        input: &Tensor,
        mode: Mode,
        rng: &mut SeldRng,
    ) -> Result<(ForwardOutput, Vec<Var>)> {
        let params = self.bind(g, mode == Mode::Train);
        let x = g.constant(input.clone());
        let out = Self::forward_with(&self.config, g, x, &params, &mut self.batch_norms, mode, rng)?;
        Ok((out, params))
    }

    /// Inference on `[N, T, F, C]` input.
    pub fn predict(&self, input: &Tensor) -> Result<Vec<Predictions>> {
        let mut g = Graph::new();
        let params = self.bind(&mut g, false);
        let x = g.constant(input.clone());
        let mut bn = self.batch_norms.clone();
        let mut rng = crate::rng::seeded(0);
        let out = Self::forward_with(&self.config, &mut g, x, &params, &mut bn, Mode::Infer, &mut rng)?;
        Ok(out.predictions(&g))
    }

    /// Parameters and batch-norm running statistics as named records.
    pub fn records(&self) -> Vec<Record> {
        let mut out: Vec<Record> = self
            .names
            .iter()
            .zip(&self.params)
            .map(|(n, p)| Record::new(n.clone(), p.clone()))
            .collect();
        for (i, bn) in self.batch_norms.iter().enumerate() {
            let c = bn.running_mean.len();
            out.push(Record::new(format!("bn{}.running_mean", i + 1), Tensor::new(&[c], bn.running_mean.clone()).expect("shape")));
            out.push(Record::new(format!("bn{}.running_var", i + 1), Tensor::new(&[c], bn.running_var.clone()).expect("shape")));
            out.push(Record::new(format!("bn{}.updates", i + 1), Tensor::scalar(bn.updates as f64)));
        }
        out
    }

    /// Restores from records written by [`SeldModel::records`]; extra records are ignored.
    pub fn from_records(config: ModelConfig, records: &[Record]) -> Result<Self> {
        let mut model = SeldModel::new(config, &mut crate::rng::seeded(0))?;
        let find = |name: &str| -> Result<&Tensor> {
            records
                .iter()
                .find(|r| r.name == name)
                .map(|r| &r.tensor)
                .ok_or_else(|| SeldError::Format(format!("checkpoint lacks {name}")))
        };
        for (name, p) in model.names.iter().zip(model.params.iter_mut()) {
            let t = find(name)?;
            if t.shape() != p.shape() {
                return Err(SeldError::Format(format!(
                    "{name}: checkpoint shape {:?}, model expects {:?}",
                    t.shape(),
                    p.shape()
                )));
            }
            *p = t.clone();
        }
        for (i, bn) in model.batch_norms.iter_mut().enumerate() {
            let mean = find(&format!("bn{}.running_mean", i + 1))?;
            let var = find(&format!("bn{}.running_var", i + 1))?;
            if mean.len() != bn.running_mean.len() || var.len() != bn.running_var.len() {
                return Err(SeldError::Format(format!("bn{} running stats have the wrong size", i + 1)));
            }
            bn.running_mean = mean.data().to_vec();
            bn.running_var = var.data().to_vec();
            bn.updates = find(&format!("bn{}.updates", i + 1))?.item() as u64;
        }
        Ok(model)
    }
}
