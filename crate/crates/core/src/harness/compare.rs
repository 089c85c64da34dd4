//! Identical-seed training runs that differ only in the loss, with per-epoch
//! learning curves on a train and a test split.

use std::fmt::Write as _;

use crate::error::{Result, SeldError};
use crate::losses::{LossConfig, LossKind};
use crate::model::ModelConfig;

use super::config::TrainConfig;
use super::data::PreparedClip;
use super::eval::EvalSummary;
use super::train::{train, TrainData};

/// CE(1)+MSE(1), CE(1)+MSE(1000) and homogeneous MSE.
pub fn default_loss_configs() -> Vec<LossConfig> {
    vec![LossConfig::ce_mse(1.0, 1.0), LossConfig::ce_mse(1.0, 1000.0), LossConfig::mse_only()]
}

/// Standardized train/test clips for one seed.
pub struct SeedData {
    pub seed: u64,
    pub train: Vec<PreparedClip>,
    pub test: Vec<PreparedClip>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CurveStats {
    /// DOA term of the homogeneous MSE loss.
    pub mse_loss: f64,
    /// SED cross-entropy term.
    pub ce_loss: f64,
    pub doa_err: f64,
    pub sed_err: f64,
}

impl From<&EvalSummary> for CurveStats {
    fn from(s: &EvalSummary) -> Self {
        CurveStats {
            mse_loss: s.mse.doa_term,
            ce_loss: s.ce.sed_term,
            doa_err: s.frame.doa_error(),
            sed_err: s.frame.sed_error(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRun {
    pub loss: LossConfig,
    pub seed: u64,
    /// `(epoch, train, test)`
    pub curve: Vec<(usize, CurveStats, CurveStats)>,
}

impl ComparisonRun {
    pub fn last(&self) -> Option<&(usize, CurveStats, CurveStats)> {
        self.curve.last()
    }
}

pub fn compare_losses(
    data: &[SeedData],
    model_cfg: &ModelConfig,
    base: &TrainConfig,
    losses: &[LossConfig],
    parallel: bool,
    progress: &(dyn Fn(&str) + Sync),
) -> Result<Vec<ComparisonRun>> {
    let jobs: Vec<(&SeedData, LossConfig)> = data.iter().flat_map(|d| losses.iter().map(move |l| (d, *l))).collect();
    let run = |(d, loss): &(&SeedData, LossConfig)| -> Result<ComparisonRun> {
        let cfg = TrainConfig { loss: *loss, seed: d.seed, ..base.clone() };
        let td = TrainData {
            train: &d.train,
            val: None,
            monitors: vec![("train".into(), d.train.as_slice()), ("test".into(), d.test.as_slice())],
        };
        let mut curve = Vec::with_capacity(cfg.epochs);
        train(model_cfg, &cfg, &td, &mut |r| {
            curve.push((r.epoch, CurveStats::from(&r.monitors[0].1), CurveStats::from(&r.monitors[1].1)));
        })?;
        if let Some((e, tr, _)) = curve.last() {
            progress(&format!(
                "seed {} {}: epoch {e} train sed_err {:.3} doa_err {:.1}",
                d.seed,
                loss.label(),
                tr.sed_err,
                tr.doa_err
            ));
        }
        Ok(ComparisonRun { loss: *loss, seed: d.seed, curve })
    };
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return jobs.par_iter().map(run).collect();
    }
    let _ = parallel;
    jobs.iter().map(run).collect()
}

pub const COMPARISON_CSV_HEADER: &str = "config,seed,epoch,train_mse_loss,train_ce_loss,train_doa_err,train_sed_err,test_mse_loss,test_ce_loss,test_doa_err,test_sed_err";

pub fn comparison_csv(runs: &[ComparisonRun]) -> String {
    let mut s = String::new();
    writeln!(s, "{COMPARISON_CSV_HEADER}").unwrap();
    for r in runs {
        for (e, a, b) in &r.curve {
            writeln!(
                s,
                "{},{},{e},{:.6e},{:.6e},{:.4},{:.6},{:.6e},{:.6e},{:.4},{:.6}",
                r.loss.label(),
                r.seed,
                a.mse_loss,
                a.ce_loss,
                a.doa_err,
                a.sed_err,
                b.mse_loss,
                b.ce_loss,
                b.doa_err,
                b.sed_err
            )
            .unwrap();
        }
    }
    s
}

/// Final-epoch comparison of homogeneous MSE against CE(1)+MSE(1000).
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    /// `(seed, mse sed_err, ce sed_err, mse doa_err, ce doa_err)` on the train split.
    pub per_seed: Vec<(u64, f64, f64, f64, f64)>,
    pub sed_wins: usize,
    pub doa_comparable: usize,
}

impl Verdict {
    /// Majority of seeds show lower SED error for MSE and DOA errors within 2x.
    pub fn holds(&self) -> bool {
        let need = self.per_seed.len() / 2 + 1;
        self.sed_wins >= need && self.doa_comparable >= need
    }
}

pub fn directional_verdict(runs: &[ComparisonRun]) -> Result<Verdict> {
    let is_mse = |l: &LossConfig| l.kind == LossKind::MseOnly;
    let is_ce1000 = |l: &LossConfig| l.kind == LossKind::CePlusMse && l.w_ce == 1.0 && l.w_mse == 1000.0;
    let mut seeds: Vec<u64> = runs.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let mut v = Verdict { per_seed: Vec::new(), sed_wins: 0, doa_comparable: 0 };
    for seed in seeds {
        let pick = |f: &dyn Fn(&LossConfig) -> bool| {
            runs.iter()
                .find(|r| r.seed == seed && f(&r.loss))
                .and_then(|r| r.last())
                .map(|x| x.1)
                .ok_or_else(|| SeldError::invalid(format!("seed {seed} lacks a required configuration")))
        };
        let (m, c) = (pick(&is_mse)?, pick(&is_ce1000)?);
        if m.sed_err < c.sed_err {
            v.sed_wins += 1;
        }
        let (lo, hi) = if m.doa_err < c.doa_err { (m.doa_err, c.doa_err) } else { (c.doa_err, m.doa_err) };
        if hi < 2.0 * lo {
            v.doa_comparable += 1;
        }
        v.per_seed.push((seed, m.sed_err, c.sed_err, m.doa_err, c.doa_err));
    }
    Ok(v)
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// 2x2 panel SVG of seed-averaged curves: DOA MSE loss, DOA error, SED CE
/// loss and SED error. Solid lines are train, dashed are test.
pub fn comparison_svg(runs: &[ComparisonRun]) -> String {
    let mut labels: Vec<String> = Vec::new();
    for r in runs {
        if !labels.contains(&r.loss.label()) {
            labels.push(r.loss.label());
        }
    }
    let panels: [(&str, fn(&CurveStats) -> f64); 4] = [
        ("DOA MSE loss", |s| s.mse_loss),
        ("DOA error (deg)", |s| s.doa_err),
        ("SED CE loss", |s| s.ce_loss),
        ("SED error", |s| s.sed_err),
    ];
    let (pw, ph) = (420.0, 280.0);
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        2.0 * pw + 20.0,
        2.0 * ph + 60.0
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (p, (title, get)) in panels.iter().enumerate() {
        let ox = 10.0 + (p % 2) as f64 * pw;
        let oy = 10.0 + (p / 2) as f64 * ph;
        // seed-averaged series per (label, split)
        let mut series: Vec<(usize, bool, Vec<(f64, f64)>)> = Vec::new();
        for (li, label) in labels.iter().enumerate() {
            let group: Vec<&ComparisonRun> = runs.iter().filter(|r| &r.loss.label() == label).collect();
            let len = group.iter().map(|r| r.curve.len()).min().unwrap_or(0);
            for test in [false, true] {
                let pts = (0..len)
                    .map(|i| {
                        let vals: Vec<f64> = group
                            .iter()
                            .map(|r| {
                                let (_, a, b) = &r.curve[i];
                                get(if test { b } else { a })
                            })
                            .filter(|v| v.is_finite())
                            .collect();
                        (group[0].curve[i].0 as f64, vals.iter().sum::<f64>() / vals.len().max(1) as f64)
                    })
                    .collect();
                series.push((li, test, pts));
            }
        }
        let all = series.iter().flat_map(|s| s.2.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in all {
            if y.is_finite() {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if x0 > x1 {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        y0 = y0.min(0.0);
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let (l, r, t, b) = (ox + 50.0, ox + pw - 15.0, oy + 25.0, oy + ph - 35.0);
        let sx = |x: f64| l + (x - x0) / (x1 - x0) * (r - l);
        let sy = |y: f64| b - (y - y0) / (y1 - y0) * (b - t);
        writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{title}</text>"#, (l + r) / 2.0, oy + 15.0).unwrap();
        writeln!(svg, r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#444"/>"##, r - l, b - t).unwrap();
        for k in 0..=4 {
            let yv = y0 + (y1 - y0) * k as f64 / 4.0;
            let xv = x0 + (x1 - x0) * k as f64 / 4.0;
            writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, sy(yv) + 4.0, tick(yv)).unwrap();
            writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, sx(xv), b + 14.0, xv.round()).unwrap();
        }
        writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">epoch</text>"#, (l + r) / 2.0, b + 28.0).unwrap();
        for (li, test, pts) in &series {
            let path: Vec<String> =
                pts.iter().filter(|p| p.1.is_finite()).map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
            let dash = if *test { r#" stroke-dasharray="5,3""# } else { "" };
            writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                COLORS[li % COLORS.len()],
                path.join(" ")
            )
            .unwrap();
        }
    }
    let ly = 2.0 * ph + 35.0;
    for (li, label) in labels.iter().enumerate() {
        let x = 20.0 + li as f64 * 170.0;
        writeln!(svg, r#"<line x1="{x}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/>"#, x + 25.0, COLORS[li % COLORS.len()]).unwrap();
        writeln!(svg, r#"<text x="{}" y="{}">{label}</text>"#, x + 30.0, ly + 4.0).unwrap();
    }
    writeln!(svg, r#"<text x="{}" y="{}">solid: train, dashed: test</text>"#, 20.0 + labels.len() as f64 * 170.0, ly + 4.0).unwrap();
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(0.01..10_000.0).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}
