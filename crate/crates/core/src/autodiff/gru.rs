//! Bidirectional GRU as a single fused graph op with hand-written
//! backpropagation through time.
//!
//! Cell (gate blocks ordered update `z`, reset `r`, candidate `n`):
//!
//! ```text
//! z  = σ(x·Wx_z + h·Wh_z + b_z)
//! r  = σ(x·Wx_r + h·Wh_r + b_r)
//! n  = tanh(x·Wx_n + (r⊙h)·Wh_n + b_n)
//! h' = z⊙h + (1−z)⊙n
//! ```

use super::graph::{Graph, Var};
use super::linalg::{gemm_a_bt_acc, gemm_acc, gemm_at_b_acc};
use super::ops::sigmoid;
use crate::error::{Result, SeldError};
use crate::tensor::Tensor;

/// Parameter handles for one direction: `wx: [Din, 3H]`, `wh: [H, 3H]`, `b: [3H]`.
#[derive(Clone, Copy, Debug)]
pub struct GruDirection {
    pub wx: Var,
    pub wh: Var,
    pub b: Var,
}

struct StepCache {
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    n: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Dims {
    batch: usize,
    steps: usize,
    din: usize,
    hidden: usize,
}

/// `h[N×H] · wh[:, off..off+H]` accumulated into `out[N×H]`.
fn mul_block(h: &[f64], wh: &[f64], off: usize, hidden: usize, out: &mut [f64]) {
    let cols = 3 * hidden;
    for (hrow, orow) in h.chunks_exact(hidden).zip(out.chunks_exact_mut(hidden)) {
        for (p, &hv) in hrow.iter().enumerate() {
            if hv == 0.0 {
                continue;
            }
            let wrow = &wh[p * cols + off..p * cols + off + hidden];
            for (o, &w) in orow.iter_mut().zip(wrow) {
                *o += hv * w;
            }
        }
    }
}

/// `g[N×H] · wh[:, off..off+H]ᵀ` accumulated into `out[N×H]`.
fn mul_block_t(g: &[f64], wh: &[f64], off: usize, hidden: usize, out: &mut [f64]) {
    let cols = 3 * hidden;
    for (grow, orow) in g.chunks_exact(hidden).zip(out.chunks_exact_mut(hidden)) {
        for (p, o) in orow.iter_mut().enumerate() {
            let wrow = &wh[p * cols + off..p * cols + off + hidden];
            *o += grow.iter().zip(wrow).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

/// `a[N×H]ᵀ · g[N×H]` accumulated into the `off` column block of `dwh[H×3H]`.
fn outer_block(a: &[f64], g: &[f64], off: usize, hidden: usize, dwh: &mut [f64]) {
    let cols = 3 * hidden;
    for (arow, grow) in a.chunks_exact(hidden).zip(g.chunks_exact(hidden)) {
        for (p, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let drow = &mut dwh[p * cols + off..p * cols + off + hidden];
            for (d, &gv) in drow.iter_mut().zip(grow) {
                *d += av * gv;
            }
        }
    }
}

fn time_index(step: usize, steps: usize, reverse: bool) -> usize {
    if reverse {
        steps - 1 - step
    } else {
        step
    }
}

/// Runs one direction; returns per-time hidden states `[N, T, H]` and the step caches
/// in processing order.
fn run_direction(x: &[f64], wx: &[f64], wh: &[f64], b: &[f64], d: Dims, reverse: bool) -> (Vec<f64>, Vec<StepCache>) {
    let h3 = 3 * d.hidden;
    let rows = d.batch * d.steps;
    let mut xproj = vec![0.0; rows * h3];
    for r in 0..rows {
        xproj[r * h3..(r + 1) * h3].copy_from_slice(b);
    }
    gemm_acc(x, wx, &mut xproj, rows, d.din, h3);

    let nh = d.batch * d.hidden;
    let mut states = vec![0.0; d.batch * d.steps * d.hidden];
    let mut caches = Vec::with_capacity(d.steps);
    let mut h = vec![0.0; nh];
    for s in 0..d.steps {
        let t = time_index(s, d.steps, reverse);
        let mut az = vec![0.0; nh];
        let mut ar = vec![0.0; nh];
        mul_block(&h, wh, 0, d.hidden, &mut az);
        mul_block(&h, wh, d.hidden, d.hidden, &mut ar);
        let mut z = vec![0.0; nh];
        let mut r = vec![0.0; nh];
        let mut rh = vec![0.0; nh];
        for bi in 0..d.batch {
            let xp = &xproj[(bi * d.steps + t) * h3..(bi * d.steps + t + 1) * h3];
            for k in 0..d.hidden {
                let i = bi * d.hidden + k;
                z[i] = sigmoid(az[i] + xp[k]);
                r[i] = sigmoid(ar[i] + xp[d.hidden + k]);
                rh[i] = r[i] * h[i];
            }
        }
        let mut an = vec![0.0; nh];
        mul_block(&rh, wh, 2 * d.hidden, d.hidden, &mut an);
        let mut n = vec![0.0; nh];
        let mut h_new = vec![0.0; nh];
        for bi in 0..d.batch {
            let xp = &xproj[(bi * d.steps + t) * h3..(bi * d.steps + t + 1) * h3];
            for k in 0..d.hidden {
                let i = bi * d.hidden + k;
                n[i] = (an[i] + xp[2 * d.hidden + k]).tanh();
                h_new[i] = z[i] * h[i] + (1.0 - z[i]) * n[i];
            }
            let dst = (bi * d.steps + t) * d.hidden;
            states[dst..dst + d.hidden].copy_from_slice(&h_new[bi * d.hidden..(bi + 1) * d.hidden]);
        }
        caches.push(StepCache { h_prev: std::mem::replace(&mut h, h_new), z, r, n });
    }
    (states, caches)
}

struct DirectionGrads {
    dx: Vec<f64>,
    dwx: Vec<f64>,
    dwh: Vec<f64>,
    db: Vec<f64>,
}

/// Backpropagation through time for one direction. `gout` is the full
/// `[N, T, 2H]` output gradient; `half` selects this direction's columns.
fn backprop_direction(
    x: &[f64],
    wx: &[f64],
    wh: &[f64],
    caches: &[StepCache],
    gout: &[f64],
    half: usize,
    d: Dims,
    reverse: bool,
) -> DirectionGrads {
    let hd = d.hidden;
    let h3 = 3 * hd;
    let nh = d.batch * hd;
    let mut dxproj = vec![0.0; d.batch * d.steps * h3];
    let mut dwh = vec![0.0; hd * h3];
    let mut dh = vec![0.0; nh];
    for s in (0..d.steps).rev() {
        let t = time_index(s, d.steps, reverse);
        let c = &caches[s];
        for bi in 0..d.batch {
            let src = (bi * d.steps + t) * 2 * hd + half * hd;
            for k in 0..hd {
                dh[bi * hd + k] += gout[src + k];
            }
        }
        let mut dh_prev = vec![0.0; nh];
        let mut da_z = vec![0.0; nh];
        let mut da_r = vec![0.0; nh];
        let mut da_n = vec![0.0; nh];
        for i in 0..nh {
            let dz = dh[i] * (c.h_prev[i] - c.n[i]);
            let dn = dh[i] * (1.0 - c.z[i]);
            dh_prev[i] = dh[i] * c.z[i];
            da_n[i] = dn * (1.0 - c.n[i] * c.n[i]);
            da_z[i] = dz * c.z[i] * (1.0 - c.z[i]);
        }
        let mut drh = vec![0.0; nh];
        mul_block_t(&da_n, wh, 2 * hd, hd, &mut drh);
        let rh: Vec<f64> = c.r.iter().zip(&c.h_prev).map(|(r, h)| r * h).collect();
        outer_block(&rh, &da_n, 2 * hd, hd, &mut dwh);
        for i in 0..nh {
            let dr = drh[i] * c.h_prev[i];
            dh_prev[i] += drh[i] * c.r[i];
            da_r[i] = dr * c.r[i] * (1.0 - c.r[i]);
        }
        outer_block(&c.h_prev, &da_z, 0, hd, &mut dwh);
        outer_block(&c.h_prev, &da_r, hd, hd, &mut dwh);
        mul_block_t(&da_z, wh, 0, hd, &mut dh_prev);
        mul_block_t(&da_r, wh, hd, hd, &mut dh_prev);
        for bi in 0..d.batch {
            let dst = (bi * d.steps + t) * h3;
            for k in 0..hd {
                let i = bi * hd + k;
                dxproj[dst + k] = da_z[i];
                dxproj[dst + hd + k] = da_r[i];
                dxproj[dst + 2 * hd + k] = da_n[i];
            }
        }
        dh = dh_prev;
    }
    let rows = d.batch * d.steps;
    let mut dwx = vec![0.0; d.din * h3];
    gemm_at_b_acc(x, &dxproj, &mut dwx, rows, d.din, h3);
    let mut db = vec![0.0; h3];
    for row in dxproj.chunks_exact(h3) {
        for (a, b) in db.iter_mut().zip(row) {
            *a += b;
        }
    }
    let mut dx = vec![0.0; rows * d.din];
    gemm_a_bt_acc(&dxproj, wx, &mut dx, rows, h3, d.din);
    DirectionGrads { dx, dwx, dwh, db }
}

impl Graph {
    /// Bidirectional GRU over `seq: [N, T, Din]` with zero initial states.
    /// Output `[N, T, 2H]`: forward states in the first `H` features, backward
    /// states in the last `H`.
    pub fn gru_bidirectional(&mut self, seq: Var, fwd: GruDirection, bwd: GruDirection) -> Result<Var> {
        let xs = self.shape(seq).to_vec();
        if xs.len() != 3 {
            return Err(SeldError::shape(format!("gru expects [N, T, D], got {xs:?}")));
        }
        let whs = self.shape(fwd.wh).to_vec();
        if whs.len() != 2 || whs[1] != 3 * whs[0] {
            return Err(SeldError::shape(format!("gru recurrent weights {whs:?}")));
        }
        let hidden = whs[0];
        let d = Dims { batch: xs[0], steps: xs[1], din: xs[2], hidden };
        for dir in [fwd, bwd] {
            if self.shape(dir.wx) != [d.din, 3 * hidden]
                || self.shape(dir.wh) != [hidden, 3 * hidden]
                || self.shape(dir.b) != [3 * hidden]
            {
                return Err(SeldError::shape("gru parameter shapes disagree"));
            }
        }
        let x = self.value(seq).data();
        let (fs, fcache) = run_direction(
            x,
            self.value(fwd.wx).data(),
            self.value(fwd.wh).data(),
            self.value(fwd.b).data(),
            d,
            false,
        );
        let (bs, bcache) = run_direction(
            x,
            self.value(bwd.wx).data(),
            self.value(bwd.wh).data(),
            self.value(bwd.b).data(),
            d,
            true,
        );
        let mut out = vec![0.0; d.batch * d.steps * 2 * hidden];
        for row in 0..d.batch * d.steps {
            out[row * 2 * hidden..row * 2 * hidden + hidden].copy_from_slice(&fs[row * hidden..(row + 1) * hidden]);
            out[row * 2 * hidden + hidden..(row + 1) * 2 * hidden]
                .copy_from_slice(&bs[row * hidden..(row + 1) * hidden]);
        }
        let out = Tensor::new(&[d.batch, d.steps, 2 * hidden], out)?;
        let inputs = [seq, fwd.wx, fwd.wh, fwd.b, bwd.wx, bwd.wh, bwd.b];
        Ok(self.push(
            out,
            &inputs,
            Box::new(move |args| {
                let x = args.inputs[0].data();
                let g = args.grad.data();
                let f = backprop_direction(x, args.inputs[1].data(), args.inputs[2].data(), &fcache, g, 0, d, false);
                let b = backprop_direction(x, args.inputs[4].data(), args.inputs[5].data(), &bcache, g, 1, d, true);
                let mut dx = f.dx;
                for (a, v) in dx.iter_mut().zip(&b.dx) {
                    *a += v;
                }
                let h3 = 3 * d.hidden;
                let t = |shape: &[usize], v: Vec<f64>| Some(Tensor::new(shape, v).expect("shape"));
                vec![
                    t(&[d.batch, d.steps, d.din], dx),
                    t(&[d.din, h3], f.dwx),
                    t(&[d.hidden, h3], f.dwh),
                    t(&[h3], f.db),
                    t(&[d.din, h3], b.dwx),
                    t(&[d.hidden, h3], b.dwh),
                    t(&[h3], b.db),
                ]
            }),
        ))
    }
}
