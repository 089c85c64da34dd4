use rand::Rng;

use super::graph::{Graph, Var};
use super::linalg::{axpy, dot, gemm_a_bt_acc, gemm_acc, gemm_at_b_acc};
use crate::error::{Result, SeldError};
use crate::tensor::Tensor;

/// Whether layers behave as during training (batch statistics, dropout) or inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Running statistics of one batch-norm layer.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchNormState {
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub updates: u64,
}

impl BatchNormState {
    pub fn new(channels: usize) -> Self {
        BatchNormState {
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            updates: 0,
        }
    }

    pub fn is_initialized(&self) -> bool {
        self.updates > 0
    }
}

fn same_shape(a: &Tensor, b: &Tensor, op: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(SeldError::shape(format!("{op}: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::new(a.shape(), data).expect("same shape")
}

impl Graph {
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape(self.value(a), self.value(b), "add")?;
        let out = zip_map(self.value(a), self.value(b), |x, y| x + y);
        Ok(self.push(
            out,
            &[a, b],
            Box::new(|args| vec![Some(args.grad.clone()), Some(args.grad.clone())]),
        ))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape(self.value(a), self.value(b), "mul")?;
        let out = zip_map(self.value(a), self.value(b), |x, y| x * y);
        Ok(self.push(
            out,
            &[a, b],
            Box::new(|args| {
                let ga = args.needs[0].then(|| zip_map(args.grad, args.inputs[1], |g, y| g * y));
                let gb = args.needs[1].then(|| zip_map(args.grad, args.inputs[0], |g, x| g * x));
                vec![ga, gb]
            }),
        ))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let out = self.value(x).map(|v| v * factor);
        self.push(out, &[x], Box::new(move |args| vec![Some(args.grad.map(|g| g * factor))]))
    }

    /// Sum of all elements, as a rank-0 tensor.
    pub fn sum(&mut self, x: Var) -> Var {
        let out = Tensor::scalar(self.value(x).sum());
        let shape = self.shape(x).to_vec();
        self.push(
            out,
            &[x],
            Box::new(move |args| vec![Some(Tensor::full(&shape, args.grad.item()))]),
        )
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let out = self.value(x).clone().reshaped(shape)?;
        let orig = self.shape(x).to_vec();
        Ok(self.push(
            out,
            &[x],
            Box::new(move |args| vec![Some(args.grad.clone().reshaped(&orig).expect("same size"))]),
        ))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = self.value(x).map(|v| v.max(0.0));
        self.push(
            out,
            &[x],
            Box::new(|args| {
                vec![Some(zip_map(args.grad, args.output, |g, y| if y > 0.0 { g } else { 0.0 }))]
            }),
        )
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let out = self.value(x).map(sigmoid);
        self.push(
            out,
            &[x],
            Box::new(|args| vec![Some(zip_map(args.grad, args.output, |g, y| g * y * (1.0 - y)))]),
        )
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let out = self.value(x).map(f64::tanh);
        self.push(
            out,
            &[x],
            Box::new(|args| vec![Some(zip_map(args.grad, args.output, |g, y| g * (1.0 - y * y)))]),
        )
    }

    /// Softmax along `axis`.
    pub fn softmax(&mut self, x: Var, axis: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() {
            return Err(SeldError::shape(format!("softmax axis {axis} out of range for {shape:?}")));
        }
        let len = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let xv = self.value(x).data();
        let mut out = vec![0.0; xv.len()];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * len * inner + i;
                let max = (0..len).map(|k| xv[base + k * inner]).fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for k in 0..len {
                    let e = (xv[base + k * inner] - max).exp();
                    out[base + k * inner] = e;
                    total += e;
                }
                for k in 0..len {
                    out[base + k * inner] /= total;
                }
            }
        }
        let out = Tensor::new(&shape, out)?;
        Ok(self.push(
            out,
            &[x],
            Box::new(move |args| {
                let y = args.output.data();
                let g = args.grad.data();
                let mut dx = vec![0.0; y.len()];
                for o in 0..outer {
                    for i in 0..inner {
                        let base = o * len * inner + i;
                        let s: f64 = (0..len).map(|k| g[base + k * inner] * y[base + k * inner]).sum();
                        for k in 0..len {
                            let idx = base + k * inner;
                            dx[idx] = y[idx] * (g[idx] - s);
                        }
                    }
                }
                vec![Some(Tensor::new(args.output.shape(), dx).expect("shape"))]
            }),
        ))
    }

    /// Swaps the last two axes.
    pub fn transpose_last2(&mut self, x: Var) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if shape.len() < 2 {
            return Err(SeldError::shape("transpose needs rank >= 2"));
        }
        let r = shape.len();
        let (a, b) = (shape[r - 2], shape[r - 1]);
        let mut out_shape = shape.clone();
        out_shape.swap(r - 2, r - 1);
        let out = Tensor::new(&out_shape, transpose_batched(self.value(x).data(), a, b))?;
        Ok(self.push(
            out,
            &[x],
            Box::new(move |args| {
                vec![Some(Tensor::new(&shape, transpose_batched(args.grad.data(), b, a)).expect("shape"))]
            }),
        ))
    }

    /// Affine map on the last axis: `x · weights + bias`.
    pub fn dense(&mut self, x: Var, weights: Var, bias: Option<Var>) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        let ws = self.shape(weights).to_vec();
        if ws.len() != 2 || xs.last() != Some(&ws[0]) {
            return Err(SeldError::shape(format!("dense: input {xs:?} with weights {ws:?}")));
        }
        let (din, dout) = (ws[0], ws[1]);
        if let Some(b) = bias {
            if self.shape(b) != [dout] {
                return Err(SeldError::shape(format!("dense: bias {:?}, want [{dout}]", self.shape(b))));
            }
        }
        let rows = self.value(x).len() / din;
        let mut out = vec![0.0; rows * dout];
        if let Some(b) = bias {
            let bv = self.value(b).data();
            for r in 0..rows {
                out[r * dout..(r + 1) * dout].copy_from_slice(bv);
            }
        }
        gemm_acc(self.value(x).data(), self.value(weights).data(), &mut out, rows, din, dout);
        let mut out_shape = xs.clone();
        *out_shape.last_mut().unwrap() = dout;
        let out = Tensor::new(&out_shape, out)?;
        let mut inputs = vec![x, weights];
        inputs.extend(bias);
        Ok(self.push(
            out,
            &inputs,
            Box::new(move |args| {
                let g = args.grad.data();
                let dx = args.needs[0].then(|| {
                    let mut dx = vec![0.0; rows * din];
                    gemm_a_bt_acc(g, args.inputs[1].data(), &mut dx, rows, dout, din);
                    Tensor::new(&xs, dx).expect("shape")
                });
                let dw = args.needs[1].then(|| {
                    let mut dw = vec![0.0; din * dout];
                    gemm_at_b_acc(args.inputs[0].data(), g, &mut dw, rows, din, dout);
                    Tensor::new(&[din, dout], dw).expect("shape")
                });
                let mut grads = vec![dx, dw];
                if args.inputs.len() == 3 {
                    grads.push(args.needs[2].then(|| {
                        let mut db = vec![0.0; dout];
                        for r in 0..rows {
                            axpy(1.0, &g[r * dout..(r + 1) * dout], &mut db);
                        }
                        Tensor::new(&[dout], db).expect("shape")
                    }));
                }
                grads
            }),
        ))
    }

    /// Batched matrix product `[B, M, K] · [B, K, N] -> [B, M, N]`.
    pub fn bmm(&mut self, a: Var, b: Var) -> Result<Var> {
        let sa = self.shape(a).to_vec();
        let sb = self.shape(b).to_vec();
        if sa.len() != 3 || sb.len() != 3 || sa[0] != sb[0] || sa[2] != sb[1] {
            return Err(SeldError::shape(format!("bmm: {sa:?} x {sb:?}")));
        }
        let (bs, m, k, n) = (sa[0], sa[1], sa[2], sb[2]);
        let mut out = vec![0.0; bs * m * n];
        {
            let av = self.value(a).data();
            let bv = self.value(b).data();
            for i in 0..bs {
                gemm_acc(
                    &av[i * m * k..(i + 1) * m * k],
                    &bv[i * k * n..(i + 1) * k * n],
                    &mut out[i * m * n..(i + 1) * m * n],
                    m,
                    k,
                    n,
                );
            }
        }
        let out = Tensor::new(&[bs, m, n], out)?;
        Ok(self.push(
            out,
            &[a, b],
            Box::new(move |args| {
                let g = args.grad.data();
                let av = args.inputs[0].data();
                let bv = args.inputs[1].data();
                let da = args.needs[0].then(|| {
                    let mut da = vec![0.0; bs * m * k];
                    for i in 0..bs {
                        gemm_a_bt_acc(
                            &g[i * m * n..(i + 1) * m * n],
                            &bv[i * k * n..(i + 1) * k * n],
                            &mut da[i * m * k..(i + 1) * m * k],
                            m,
                            n,
                            k,
                        );
                    }
                    Tensor::new(&[bs, m, k], da).expect("shape")
                });
                let db = args.needs[1].then(|| {
                    let mut db = vec![0.0; bs * k * n];
                    for i in 0..bs {
                        gemm_at_b_acc(
                            &av[i * m * k..(i + 1) * m * k],
                            &g[i * m * n..(i + 1) * m * n],
                            &mut db[i * k * n..(i + 1) * k * n],
                            m,
                            k,
                            n,
                        );
                    }
                    Tensor::new(&[bs, k, n], db).expect("shape")
                });
                vec![da, db]
            }),
        ))
    }

    /// 3×3 convolution with stride 1 and SAME zero padding on `[N, H, W, Cin]`
    /// input; kernels are laid out `[3, 3, Cin, Cout]`.
    pub fn conv2d(&mut self, x: Var, kernels: Var, bias: Var) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        let ks = self.shape(kernels).to_vec();
        if xs.len() != 4 || ks.len() != 4 || ks[0] != 3 || ks[1] != 3 {
            return Err(SeldError::shape(format!("conv2d: input {xs:?}, kernels {ks:?}")));
        }
        if xs[3] != ks[2] {
            return Err(SeldError::shape(format!(
                "conv2d: input has {} channels, kernels expect {}",
                xs[3], ks[2]
            )));
        }
        if self.shape(bias) != [ks[3]] {
            return Err(SeldError::shape(format!("conv2d: bias {:?}", self.shape(bias))));
        }
        let dims = ConvDims { n: xs[0], h: xs[1], w: xs[2], cin: xs[3], cout: ks[3] };
        let out = conv_forward(self.value(x).data(), self.value(kernels).data(), self.value(bias).data(), dims);
        let out = Tensor::new(&[dims.n, dims.h, dims.w, dims.cout], out)?;
        Ok(self.push(
            out,
            &[x, kernels, bias],
            Box::new(move |args| {
                let (dx, dk) = conv_backward(
                    args.inputs[0].data(),
                    args.inputs[1].data(),
                    args.grad.data(),
                    dims,
                    args.needs[0],
                    args.needs[1],
                );
                let db = args.needs[2].then(|| {
                    let mut db = vec![0.0; dims.cout];
                    for row in args.grad.data().chunks_exact(dims.cout) {
                        axpy(1.0, row, &mut db);
                    }
                    Tensor::new(&[dims.cout], db).expect("shape")
                });
                vec![
                    dx.map(|d| Tensor::new(&[dims.n, dims.h, dims.w, dims.cin], d).expect("shape")),
                    dk.map(|d| Tensor::new(&[3, 3, dims.cin, dims.cout], d).expect("shape")),
                    db,
                ]
            }),
        ))
    }

    /// Non-overlapping max pooling over the two spatial axes of `[N, H, W, C]`.
    /// Gradient flows to the first maximal element of each window.
    pub fn max_pool(&mut self, x: Var, kh: usize, kw: usize) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        if xs.len() != 4 {
            return Err(SeldError::shape(format!("max_pool expects [N,H,W,C], got {xs:?}")));
        }
        let (n, h, w, c) = (xs[0], xs[1], xs[2], xs[3]);
        if kh == 0 || kw == 0 || h % kh != 0 || w % kw != 0 {
            return Err(SeldError::shape(format!("max_pool: {h}x{w} not divisible by {kh}x{kw}")));
        }
        let (oh, ow) = (h / kh, w / kw);
        let xv = self.value(x).data();
        let mut out = vec![f64::NEG_INFINITY; n * oh * ow * c];
        let mut argmax = vec![0usize; out.len()];
        for b in 0..n {
            for i in 0..oh {
                for j in 0..ow {
                    let obase = ((b * oh + i) * ow + j) * c;
                    for di in 0..kh {
                        for dj in 0..kw {
                            let ibase = ((b * h + i * kh + di) * w + j * kw + dj) * c;
                            for ch in 0..c {
                                let v = xv[ibase + ch];
                                if v > out[obase + ch] {
                                    out[obase + ch] = v;
                                    argmax[obase + ch] = ibase + ch;
                                }
                            }
                        }
                    }
                }
            }
        }
        let out = Tensor::new(&[n, oh, ow, c], out)?;
        Ok(self.push(
            out,
            &[x],
            Box::new(move |args| {
                let mut dx = Tensor::zeros(&xs);
                let d = dx.data_mut();
                for (&src, &g) in argmax.iter().zip(args.grad.data()) {
                    d[src] += g;
                }
                vec![Some(dx)]
            }),
        ))
    }

    /// Batch normalization over every axis but the last (channel) one.
    ///
    /// In train mode the batch statistics normalize the input and are folded
    /// into `state` (the first update copies them); infer mode reads `state`.
    #[allow(clippy::too_many_arguments)]
    pub fn batch_norm(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        state: &mut BatchNormState,
        mode: Mode,
        momentum: f64,
        eps: f64,
    ) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        let c = *xs.last().ok_or_else(|| SeldError::shape("batch_norm on scalar"))?;
        if self.shape(gamma) != [c] || self.shape(beta) != [c] || state.running_mean.len() != c {
            return Err(SeldError::shape(format!("batch_norm: {c} channels, parameter size mismatch")));
        }
        let xv = self.value(x).data();
        let m = xv.len() / c;
        let gv = self.value(gamma).data().to_vec();
        let bv = self.value(beta).data();

        let (mean, inv_std) = match mode {
            Mode::Train => {
                let mut mean = vec![0.0; c];
                for row in xv.chunks_exact(c) {
                    axpy(1.0, row, &mut mean);
                }
                mean.iter_mut().for_each(|v| *v /= m as f64);
                let mut var = vec![0.0; c];
                for row in xv.chunks_exact(c) {
                    for ch in 0..c {
                        let d = row[ch] - mean[ch];
                        var[ch] += d * d;
                    }
                }
                var.iter_mut().for_each(|v| *v /= m as f64);
                if state.updates == 0 {
                    state.running_mean.copy_from_slice(&mean);
                    state.running_var.copy_from_slice(&var);
                } else {
                    for ch in 0..c {
                        state.running_mean[ch] = momentum * state.running_mean[ch] + (1.0 - momentum) * mean[ch];
                        state.running_var[ch] = momentum * state.running_var[ch] + (1.0 - momentum) * var[ch];
                    }
                }
                state.updates += 1;
                let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
                (mean, inv_std)
            }
            Mode::Infer => {
                if !state.is_initialized() {
                    return Err(SeldError::UninitializedRunningStats);
                }
                let inv_std = state.running_var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
                (state.running_mean.clone(), inv_std)
            }
        };

        let mut xhat = vec![0.0; xv.len()];
        let mut out = vec![0.0; xv.len()];
        for (r, row) in xv.chunks_exact(c).enumerate() {
            for ch in 0..c {
                let h = (row[ch] - mean[ch]) * inv_std[ch];
                xhat[r * c + ch] = h;
                out[r * c + ch] = gv[ch] * h + bv[ch];
            }
        }
        let out = Tensor::new(&xs, out)?;
        Ok(self.push(
            out,
            &[x, gamma, beta],
            Box::new(move |args| {
                let g = args.grad.data();
                let mut dgamma = vec![0.0; c];
                let mut dbeta = vec![0.0; c];
                for r in 0..m {
                    for ch in 0..c {
                        dgamma[ch] += g[r * c + ch] * xhat[r * c + ch];
                        dbeta[ch] += g[r * c + ch];
                    }
                }
                let dx = args.needs[0].then(|| {
                    let mut dx = vec![0.0; m * c];
                    match mode {
                        Mode::Train => {
                            // dxhat = g·γ; dx = inv_std/M · (M·dxhat − Σdxhat − xhat·Σ(dxhat·xhat))
                            let mf = m as f64;
                            for r in 0..m {
                                for ch in 0..c {
                                    let i = r * c + ch;
                                    let sum_dxhat = dbeta[ch] * gv[ch];
                                    let sum_dxhat_xhat = dgamma[ch] * gv[ch];
                                    dx[i] = inv_std[ch] / mf
                                        * (mf * g[i] * gv[ch] - sum_dxhat - xhat[i] * sum_dxhat_xhat);
                                }
                            }
                        }
                        Mode::Infer => {
                            for r in 0..m {
                                for ch in 0..c {
                                    dx[r * c + ch] = g[r * c + ch] * gv[ch] * inv_std[ch];
                                }
                            }
                        }
                    }
                    Tensor::new(&xs, dx).expect("shape")
                });
                vec![
                    dx,
                    Some(Tensor::new(&[c], dgamma).expect("shape")),
                    Some(Tensor::new(&[c], dbeta).expect("shape")),
                ]
            }),
        ))
    }

    /// Inverted dropout: in train mode each element is zeroed with
    /// probability `rate` and survivors are scaled by `1/(1-rate)`.
    pub fn dropout<R: Rng + ?Sized>(&mut self, x: Var, rate: f64, mode: Mode, rng: &mut R) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(SeldError::config(format!("dropout rate {rate} outside [0, 1)")));
        }
        if mode == Mode::Infer || rate == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 / (1.0 - rate);
        let mask: Vec<f64> = (0..self.value(x).len())
            .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
            .collect();
        let out = Tensor::new(
            self.shape(x),
            self.value(x).data().iter().zip(&mask).map(|(v, m)| v * m).collect(),
        )?;
        Ok(self.push(
            out,
            &[x],
            Box::new(move |args| {
                let dx = args.grad.data().iter().zip(&mask).map(|(g, m)| g * m).collect();
                vec![Some(Tensor::new(args.grad.shape(), dx).expect("shape"))]
            }),
        ))
    }

    /// `Σ w·(pred − target)²` against a constant target, optional per-element weights.
    pub fn squared_error_sum(&mut self, pred: Var, target: &Tensor, weights: Option<&Tensor>) -> Result<Var> {
        same_shape(self.value(pred), target, "squared_error_sum")?;
        if let Some(w) = weights {
            same_shape(target, w, "squared_error_sum weights")?;
        }
        let target = target.clone();
        let weights = weights.cloned();
        let p = self.value(pred).data();
        let total: f64 = p
            .iter()
            .zip(target.data())
            .enumerate()
            .map(|(i, (a, b))| weights.as_ref().map_or(1.0, |w| w.data()[i]) * (a - b) * (a - b))
            .sum();
        Ok(self.push(
            Tensor::scalar(total),
            &[pred],
            Box::new(move |args| {
                let g = args.grad.item();
                let d = args.inputs[0]
                    .data()
                    .iter()
                    .zip(target.data())
                    .enumerate()
                    .map(|(i, (a, b))| 2.0 * g * weights.as_ref().map_or(1.0, |w| w.data()[i]) * (a - b))
                    .collect();
                vec![Some(Tensor::new(target.shape(), d).expect("shape"))]
            }),
        ))
    }

    /// `−Σ [y·ln p + (1−y)·ln(1−p)]` with `p` clamped to `[eps, 1−eps]`.
    pub fn binary_cross_entropy_sum(&mut self, pred: Var, target: &Tensor, eps: f64) -> Result<Var> {
        same_shape(self.value(pred), target, "binary_cross_entropy_sum")?;
        let target = target.clone();
        let total: f64 = self
            .value(pred)
            .data()
            .iter()
            .zip(target.data())
            .map(|(&p, &y)| {
                let p = p.clamp(eps, 1.0 - eps);
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            })
            .sum();
        Ok(self.push(
            Tensor::scalar(total),
            &[pred],
            Box::new(move |args| {
                let g = args.grad.item();
                let d = args.inputs[0]
                    .data()
                    .iter()
                    .zip(target.data())
                    .map(|(&p, &y)| {
                        if p < eps || p > 1.0 - eps {
                            0.0
                        } else {
                            g * (-(y / p) + (1.0 - y) / (1.0 - p))
                        }
                    })
                    .collect();
                vec![Some(Tensor::new(target.shape(), d).expect("shape"))]
            }),
        ))
    }
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn transpose_batched(x: &[f64], a: usize, b: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    let block = a * b;
    for (src, dst) in x.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
        for i in 0..a {
            for j in 0..b {
                dst[j * a + i] = src[i * b + j];
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
struct ConvDims {
    n: usize,
    h: usize,
    w: usize,
    cin: usize,
    cout: usize,
}

fn conv_taps(i: usize, extent: usize) -> impl Iterator<Item = (usize, usize)> {
    // (kernel offset, source index) pairs that stay inside the padded border
    (0..3usize).filter_map(move |k| {
        let src = i + k;
        (src >= 1 && src - 1 < extent).then(|| (k, src - 1))
    })
}

fn conv_forward(x: &[f64], k: &[f64], bias: &[f64], d: ConvDims) -> Vec<f64> {
    let mut out = vec![0.0; d.n * d.h * d.w * d.cout];
    for b in 0..d.n {
        for i in 0..d.h {
            for j in 0..d.w {
                let obase = ((b * d.h + i) * d.w + j) * d.cout;
                let orow = &mut out[obase..obase + d.cout];
                orow.copy_from_slice(bias);
                for (ki, si) in conv_taps(i, d.h) {
                    for (kj, sj) in conv_taps(j, d.w) {
                        let xbase = ((b * d.h + si) * d.w + sj) * d.cin;
                        let kbase = (ki * 3 + kj) * d.cin * d.cout;
                        for ci in 0..d.cin {
                            let xv = x[xbase + ci];
                            if xv == 0.0 {
                                continue;
                            }
                            axpy(xv, &k[kbase + ci * d.cout..kbase + (ci + 1) * d.cout], orow);
                        }
                    }
                }
            }
        }
    }
    out
}

fn conv_backward(
    x: &[f64],
    k: &[f64],
    g: &[f64],
    d: ConvDims,
    need_dx: bool,
    need_dk: bool,
) -> (Option<Vec<f64>>, Option<Vec<f64>>) {
    let mut dx = need_dx.then(|| vec![0.0; x.len()]);
    let mut dk = need_dk.then(|| vec![0.0; k.len()]);
    for b in 0..d.n {
        for i in 0..d.h {
            for j in 0..d.w {
                let obase = ((b * d.h + i) * d.w + j) * d.cout;
                let grow = &g[obase..obase + d.cout];
                for (ki, si) in conv_taps(i, d.h) {
                    for (kj, sj) in conv_taps(j, d.w) {
                        let xbase = ((b * d.h + si) * d.w + sj) * d.cin;
                        let kbase = (ki * 3 + kj) * d.cin * d.cout;
                        for ci in 0..d.cin {
                            let kr = kbase + ci * d.cout..kbase + (ci + 1) * d.cout;
                            if let Some(dx) = dx.as_mut() {
                                dx[xbase + ci] += dot(grow, &k[kr.clone()]);
                            }
                            if let Some(dk) = dk.as_mut() {
                                let xv = x[xbase + ci];
                                if xv != 0.0 {
                                    axpy(xv, grow, &mut dk[kr]);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    (dx, dk)
}
