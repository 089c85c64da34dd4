//! Finite-difference checks over every graph op and the whole model, shared
//! by the `grad-check` command and the tests.

use rand::Rng;

use crate::autodiff::gradcheck::{check_gradients, GradCheckReport};
use crate::autodiff::{BatchNormState, Graph, GruDirection, Mode, Var};
use crate::error::Result;
use crate::model::{ModelConfig, SeldModel};
use crate::rng::seeded;
use crate::tensor::Tensor;

pub const STEP: f64 = 1e-6;

fn random(shape: &[usize], seed: u64) -> Tensor {
    let mut rng = seeded(seed);
    Tensor::from_fn(shape, |_| rng.gen_range(-1.0..1.0))
}

fn probe(g: &mut Graph, y: Var, seed: u64) -> Result<Var> {
    let w = g.constant(random(g.shape(y), seed ^ 0x5eed));
    let p = g.mul(y, w)?;
    Ok(g.sum(p))
}

/// One report per op family, on small random inputs.
pub fn op_suite(seed: u64) -> Result<Vec<(&'static str, GradCheckReport)>> {
    let s = seed.wrapping_mul(1000);
    let x4 = random(&[2, 3, 4, 2], s);
    let x2 = random(&[3, 5], s + 1);
    let mut out = Vec::new();

    out.push(("conv2d", check_gradients(&[x4.clone(), random(&[3, 3, 2, 3], s + 2), random(&[3], s + 3)], STEP, None, |g, v| {
        let y = g.conv2d(v[0], v[1], v[2])?;
        probe(g, y, s)
    })?));
    out.push(("max_pool", check_gradients(std::slice::from_ref(&x4), STEP, None, |g, v| {
        let y = g.max_pool(v[0], 1, 2)?;
        probe(g, y, s)
    })?));
    for (name, mode) in [("batch_norm_train", Mode::Train), ("batch_norm_infer", Mode::Infer)] {
        out.push((name, check_gradients(&[x4.clone(), random(&[2], s + 4), random(&[2], s + 5)], STEP, None, |g, v| {
            let mut st = BatchNormState::new(2);
            st.running_mean = vec![0.1, -0.2];
            st.running_var = vec![0.8, 1.3];
            st.updates = 1;
            let y = g.batch_norm(v[0], v[1], v[2], &mut st, mode, 0.9, 1e-3)?;
            probe(g, y, s)
        })?));
    }
    out.push(("relu", check_gradients(std::slice::from_ref(&x2), STEP, None, |g, v| {
        let y = g.relu(v[0]);
        probe(g, y, s)
    })?));
    out.push(("sigmoid", check_gradients(std::slice::from_ref(&x2), STEP, None, |g, v| {
        let y = g.sigmoid(v[0]);
        probe(g, y, s)
    })?));
    out.push(("tanh", check_gradients(std::slice::from_ref(&x2), STEP, None, |g, v| {
        let y = g.tanh(v[0]);
        probe(g, y, s)
    })?));
    out.push(("add_mul_scale", check_gradients(&[x2.clone(), random(&[3, 5], s + 6)], STEP, None, |g, v| {
        let a = g.mul(v[0], v[1])?;
        let b = g.add(a, v[0])?;
        let y = g.scale(b, 0.7);
        probe(g, y, s)
    })?));
    out.push(("softmax", check_gradients(std::slice::from_ref(&x2), STEP, None, |g, v| {
        let a = g.softmax(v[0], 0)?;
        let b = g.softmax(v[0], 1)?;
        let y = g.add(a, b)?;
        probe(g, y, s)
    })?));
    out.push(("reshape_transpose", check_gradients(&[random(&[2, 3, 4], s + 7)], STEP, None, |g, v| {
        let a = g.transpose_last2(v[0])?;
        let y = g.reshape(a, &[8, 3])?;
        probe(g, y, s)
    })?));
    out.push(("dense", check_gradients(&[x2.clone(), random(&[5, 4], s + 8), random(&[4], s + 9)], STEP, None, |g, v| {
        let y = g.dense(v[0], v[1], Some(v[2]))?;
        probe(g, y, s)
    })?));
    out.push(("bmm", check_gradients(&[random(&[2, 3, 4], s + 10), random(&[2, 4, 2], s + 11)], STEP, None, |g, v| {
        let y = g.bmm(v[0], v[1])?;
        probe(g, y, s)
    })?));
    out.push(("dropout", check_gradients(std::slice::from_ref(&x2), STEP, None, |g, v| {
        let y = g.dropout(v[0], 0.4, Mode::Train, &mut seeded(s + 12))?;
        probe(g, y, s)
    })?));
    let (din, h) = (3, 2);
    let mut gru_in = vec![random(&[2, 4, din], s + 13)];
    for d in 0..2 {
        gru_in.push(random(&[din, 3 * h], s + 14 + 3 * d).map(|v| 0.5 * v));
        gru_in.push(random(&[h, 3 * h], s + 15 + 3 * d).map(|v| 0.5 * v));
        gru_in.push(random(&[3 * h], s + 16 + 3 * d).map(|v| 0.2 * v));
    }
    out.push(("bigru", check_gradients(&gru_in, STEP, None, |g, v| {
        let fwd = GruDirection { wx: v[1], wh: v[2], b: v[3] };
        let bwd = GruDirection { wx: v[4], wh: v[5], b: v[6] };
        let y = g.gru_bidirectional(v[0], fwd, bwd)?;
        probe(g, y, s)
    })?));
    out.push((
        "self_attention",
        check_gradients(&[random(&[2, 4, 5], s + 20), random(&[5, 3], s + 21), random(&[5, 3], s + 22)], STEP, None, |g, v| {
            let y = g.self_attention(v[0], v[1], v[2])?;
            probe(g, y, s)
        })?,
    ));
    let target = random(&[3, 5], s + 23).map(|v| if v > 0.0 { 1.0 } else { 0.0 });
    out.push(("binary_cross_entropy", check_gradients(std::slice::from_ref(&x2), STEP, None, |g, v| {
        let p = g.sigmoid(v[0]);
        g.binary_cross_entropy_sum(p, &target, 1e-7)
    })?));
    let mask = random(&[3, 5], s + 24).map(|v| if v > 0.0 { 1.0 } else { 0.0 });
    out.push(("squared_error", check_gradients(std::slice::from_ref(&x2), STEP, None, |g, v| {
        let a = g.squared_error_sum(v[0], &target, None)?;
        let b = g.squared_error_sum(v[0], &target, Some(&mask))?;
        g.add(a, b)
    })?));
    Ok(out)
}

/// Desk-scale model (no dropout) under a squared-error probe loss, with up
/// to `per_tensor` entries probed in every parameter tensor and the input.
pub fn model_check(seed: u64, frames: usize, batch: usize, per_tensor: Option<usize>) -> Result<GradCheckReport> {
    let cfg = ModelConfig {
        input_frames: frames,
        dropout_conv: 0.0,
        dropout_rnn: 0.0,
        dropout_fc: 0.0,
        ..ModelConfig::desk(4, 7)
    };
    let model = SeldModel::new(cfg.clone(), &mut seeded(seed))?;
    let out_t = cfg.output_frames(frames);
    let act_target = random(&[batch, out_t, 4], seed + 1).map(|v| 0.5 * (v + 1.0));
    let doa_target = random(&[batch, out_t, 4, 3], seed + 2);
    let mut inputs = model.params.clone();
    inputs.push(random(&[batch, frames, cfg.freq_bins, cfg.in_channels], seed + 3));
    let n = model.params.len();
    check_gradients(&inputs, STEP, per_tensor, |g, vars| {
        let mut bn = model.batch_norms.clone();
        let out = SeldModel::forward_with(&cfg, g, vars[n], &vars[..n], &mut bn, Mode::Train, &mut seeded(0))?;
        let a = g.squared_error_sum(out.activity, &act_target, None)?;
        let d = g.squared_error_sum(out.doa, &doa_target, None)?;
        g.add(a, d)
    })
}
