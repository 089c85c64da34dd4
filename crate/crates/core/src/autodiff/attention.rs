use super::graph::{Graph, Var};
use crate::error::{Result, SeldError};

impl Graph {
    /// Single-head scaled dot-product self-attention with `Q = Z·Wq`,
    /// `K = Z·Wk` and unprojected values `V = Z`:
    /// `softmax(Q·Kᵀ/√d_k)·Z`, softmax over the time axis.
    ///
    /// Accepts `[T, D]` or batched `[N, T, D]` sequences.
    pub fn self_attention(&mut self, z: Var, wq: Var, wk: Var) -> Result<Var> {
        let zs = self.shape(z).to_vec();
        let (batched, z3) = match zs.len() {
            3 => (true, z),
            2 => (false, self.reshape(z, &[1, zs[0], zs[1]])?),
            _ => return Err(SeldError::shape(format!("self_attention expects [N,T,D], got {zs:?}"))),
        };
        let dk = *self.shape(wq).last().unwrap_or(&0);
        if self.shape(wk) != self.shape(wq) || dk == 0 {
            return Err(SeldError::shape("self_attention projections disagree"));
        }
        let q = self.dense(z3, wq, None)?;
        let k = self.dense(z3, wk, None)?;
        let kt = self.transpose_last2(k)?;
        let scores = self.bmm(q, kt)?;
        let scores = self.scale(scores, 1.0 / (dk as f64).sqrt());
        let weights = self.softmax(scores, 2)?;
        let out = self.bmm(weights, z3)?;
        if batched {
            Ok(out)
        } else {
            self.reshape(out, &zs)
        }
    }
}
