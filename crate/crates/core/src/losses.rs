//! Weighted CE+MSE and homogeneous MSE multitask losses.
//!
//! Both are sums over classes (and coordinates) averaged over batch × frames.

use std::fmt;
use std::str::FromStr;

use crate::autodiff::{Graph, Var};
use crate::error::{Result, SeldError};
use crate::kv::KvMap;
use crate::tensor::Tensor;

pub const CE_CLIP_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    CePlusMse,
    MseOnly,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::CePlusMse => "ce_mse",
            LossKind::MseOnly => "mse",
        })
    }
}

impl FromStr for LossKind {
    type Err = SeldError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ce_mse" => Ok(LossKind::CePlusMse),
            "mse" => Ok(LossKind::MseOnly),
            other => Err(SeldError::config(format!("unknown loss kind '{other}' (ce_mse|mse)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    pub kind: LossKind,
    pub w_ce: f64,
    pub w_mse: f64,
    pub ce_clip_eps: f64,
    /// Restrict the DOA term to active (frame, class) cells.
    pub masked_doa: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig::mse_only()
    }
}

impl LossConfig {
    pub fn ce_mse(w_ce: f64, w_mse: f64) -> Self {
        LossConfig { kind: LossKind::CePlusMse, w_ce, w_mse, ce_clip_eps: CE_CLIP_EPS, masked_doa: false }
    }

    pub fn mse_only() -> Self {
        LossConfig { kind: LossKind::MseOnly, w_ce: 1.0, w_mse: 1.0, ce_clip_eps: CE_CLIP_EPS, masked_doa: false }
    }

    /// Weights actually applied to the (sed, doa) terms.
    pub fn term_weights(&self) -> (f64, f64) {
        match self.kind {
            LossKind::CePlusMse => (self.w_ce, self.w_mse),
            LossKind::MseOnly => (1.0, 1.0),
        }
    }

    /// Short label such as `ce1_mse1000` or `mse`.
    pub fn label(&self) -> String {
        match self.kind {
            LossKind::CePlusMse => format!("ce{}_mse{}", self.w_ce, self.w_mse),
            LossKind::MseOnly => "mse".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("w_ce", self.w_ce), ("w_mse", self.w_mse)] {
            if !w.is_finite() || w < 0.0 {
                return Err(SeldError::config(format!("{name} must be finite and nonnegative")));
            }
        }
        if !(self.ce_clip_eps > 0.0 && self.ce_clip_eps < 0.5) {
            return Err(SeldError::config("ce_clip_eps must be in (0, 0.5)"));
        }
        Ok(())
    }

    pub fn write_kv(&self, kv: &mut KvMap) {
        kv.set("loss", self.kind);
        kv.set("w_ce", self.w_ce);
        kv.set("w_mse", self.w_mse);
        kv.set("ce_clip_eps", self.ce_clip_eps);
        kv.set("masked_doa", self.masked_doa);
    }

    pub fn from_kv(kv: &KvMap, base: &LossConfig) -> Result<Self> {
        let cfg = LossConfig {
            kind: kv.get_or("loss", base.kind)?,
            w_ce: kv.get_or("w_ce", base.w_ce)?,
            w_mse: kv.get_or("w_mse", base.w_mse)?,
            ce_clip_eps: kv.get_or("ce_clip_eps", base.ce_clip_eps)?,
            masked_doa: kv.get_or("masked_doa", base.masked_doa)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub sed_term: f64,
    pub doa_term: f64,
}

/// Graph handles of the loss; `total` is what gets differentiated.
#[derive(Clone, Copy, Debug)]
pub struct LossVars {
    pub total: Var,
    pub sed: Var,
    pub doa: Var,
}

impl LossVars {
    pub fn breakdown(&self, g: &Graph) -> LossBreakdown {
        LossBreakdown {
            total: g.value(self.total).item(),
            sed_term: g.value(self.sed).item(),
            doa_term: g.value(self.doa).item(),
        }
    }
}

fn check_activity_targets(t: &Tensor) -> Result<()> {
    match t.data().iter().find(|&&y| y != 0.0 && y != 1.0) {
        Some(y) => Err(SeldError::invalid(format!("activity target {y} outside {{0, 1}}"))),
        None => Ok(()),
    }
}

fn normalizer(g: &Graph, activity: Var) -> Result<f64> {
    let s = g.shape(activity);
    if s.len() != 3 {
        return Err(SeldError::shape(format!("activity must be [N, T, Y], got {s:?}")));
    }
    Ok((s[0] * s[1]) as f64)
}

fn doa_term(g: &mut Graph, doa: Var, act_target: &Tensor, doa_target: &Tensor, cfg: &LossConfig) -> Result<Var> {
    if cfg.masked_doa {
        let mask: Vec<f64> = act_target.data().iter().flat_map(|&a| [a; 3]).collect();
        let mask = Tensor::new(doa_target.shape(), mask)?;
        g.squared_error_sum(doa, doa_target, Some(&mask))
    } else {
        g.squared_error_sum(doa, doa_target, None)
    }
}

/// Loss per `cfg.kind`. `activity` is `[N, T, Y]`, `doa` is `[N, T, Y, 3]`.
pub fn multitask_loss(
    g: &mut Graph,
    activity: Var,
    doa: Var,
    act_target: &Tensor,
    doa_target: &Tensor,
    cfg: &LossConfig,
) -> Result<LossVars> {
    match cfg.kind {
        LossKind::CePlusMse => ce_mse_loss(g, activity, doa, act_target, doa_target, cfg),
        LossKind::MseOnly => mse_loss(g, activity, doa, act_target, doa_target, cfg),
    }
}

pub fn ce_mse_loss(
    g: &mut Graph,
    activity: Var,
    doa: Var,
    act_target: &Tensor,
    doa_target: &Tensor,
    cfg: &LossConfig,
) -> Result<LossVars> {
    check_activity_targets(act_target)?;
    let norm = normalizer(g, activity)?;
    let ce = g.binary_cross_entropy_sum(activity, act_target, cfg.ce_clip_eps)?;
    let sed = g.scale(ce, 1.0 / norm);
    let d = doa_term(g, doa, act_target, doa_target, cfg)?;
    let doa = g.scale(d, 1.0 / norm);
    let a = g.scale(sed, cfg.w_ce);
    let b = g.scale(doa, cfg.w_mse);
    let total = g.add(a, b)?;
    Ok(LossVars { total, sed, doa })
}

pub fn mse_loss(
    g: &mut Graph,
    activity: Var,
    doa: Var,
    act_target: &Tensor,
    doa_target: &Tensor,
    cfg: &LossConfig,
) -> Result<LossVars> {
    let norm = normalizer(g, activity)?;
    let s = g.squared_error_sum(activity, act_target, None)?;
    let sed = g.scale(s, 1.0 / norm);
    let d = doa_term(g, doa, act_target, doa_target, cfg)?;
    let doa = g.scale(d, 1.0 / norm);
    let total = g.add(sed, doa)?;
    Ok(LossVars { total, sed, doa })
}
