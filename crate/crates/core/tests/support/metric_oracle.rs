//! Direct implementation of the segment metric rules with exhaustive
//! matching, used as a reference for `metrics::evaluate`.

#![allow(dead_code)]

use seld_core::metrics::{MetricReport, SegmentEvents};

pub struct OracleResult {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub s: usize,
    pub d: usize,
    pub i: usize,
    pub nref: usize,
    pub pairs: usize,
    pub le_sum: f64,
    /// false when two optimal matchings disagree on the TP count
    pub unique: bool,
}

fn deg(a: [f64; 3], b: [f64; 3]) -> f64 {
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    ((a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees()
}

/// All injective maps from the smaller side into the larger, as (ref, pred) pairs.
fn matchings(r: usize, p: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(i: usize, r: usize, p: usize, used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if cur.len() == r.min(p) {
            out.push(cur.clone());
            return;
        }
        if i == r {
            return;
        }
        for j in 0..p {
            if !used[j] {
                used[j] = true;
                cur.push((i, j));
                rec(i + 1, r, p, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
        if r - i > r.min(p) - cur.len() {
            rec(i + 1, r, p, used, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, r, p, &mut vec![false; p], &mut Vec::new(), &mut out);
    out
}

pub fn oracle(reference: &[SegmentEvents], pred: &[SegmentEvents]) -> OracleResult {
    let mut o = OracleResult { tp: 0, fp: 0, fn_: 0, s: 0, d: 0, i: 0, nref: 0, pairs: 0, le_sum: 0.0, unique: true };
    for (rs, ps) in reference.iter().zip(pred) {
        o.nref += rs.entries.len();
        let mut fp = 0;
        let mut fn_ = 0;
        for class in 0..16 {
            let r: Vec<[f64; 3]> = rs.entries.iter().filter(|e| e.0 == class).map(|e| e.1).collect();
            let p: Vec<[f64; 3]> = ps.entries.iter().filter(|e| e.0 == class).map(|e| e.1).collect();
            if r.is_empty() && p.is_empty() {
                continue;
            }
            let mut best: Option<(f64, usize, usize, f64)> = None;
            for m in matchings(r.len(), p.len()) {
                let errs: Vec<f64> = m.iter().map(|&(i, j)| deg(r[i], p[j])).collect();
                let total: f64 = errs.iter().sum();
                let tp = errs.iter().filter(|&&e| e <= 20.0).count();
                match best {
                    Some((bt, btp, _, _)) if (total - bt).abs() < 1e-9 => {
                        if btp != tp {
                            o.unique = false;
                        }
                    }
                    Some((bt, _, _, _)) if total > bt => {}
                    _ => best = Some((total, tp, m.len(), total)),
                }
            }
            let (_, tp, pairs, sum) = best.unwrap_or((0.0, 0, 0, 0.0));
            o.tp += tp;
            o.pairs += pairs;
            o.le_sum += sum;
            fp += p.len() - tp;
            fn_ += r.len() - tp;
        }
        o.fp += fp;
        o.fn_ += fn_;
        o.s += fp.min(fn_);
        o.d += fn_.saturating_sub(fp);
        o.i += fp.saturating_sub(fn_);
    }
    o
}

/// Compares counts exactly and LE within 1e-9.
pub fn agrees(report: &MetricReport, o: &OracleResult) -> bool {
    let c = &report.counts;
    let le = if o.pairs == 0 { 180.0 } else { o.le_sum / o.pairs as f64 };
    c.tp == o.tp
        && c.fp == o.fp
        && c.fn_ == o.fn_
        && c.substitutions == o.s
        && c.deletions == o.d
        && c.insertions == o.i
        && c.references == o.nref
        && c.loc_pairs == o.pairs
        && (report.le_cd - le).abs() < 1e-9
        && (report.er20 - (o.s + o.d + o.i) as f64 / o.nref as f64).abs() < 1e-12
        && (report.lr_cd - o.pairs as f64 / o.nref as f64).abs() < 1e-12
}

pub fn direction_grid() -> Vec<[f64; 3]> {
    let az = |d: f64| [d.to_radians().cos(), d.to_radians().sin(), 0.0];
    vec![az(0.0), az(10.0), az(25.0), [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// Every 1-segment configuration over 2 classes with ≤1 entry per class
/// per side drawn from the 5-direction grid, plus every 2-segment
/// configuration over a 2-direction grid.
pub fn exhaustive_cases() -> Vec<(Vec<SegmentEvents>, Vec<SegmentEvents>)> {
    let grid = direction_grid();
    let mut cases = Vec::new();
    let seg = |choice: &[usize], dirs: &[[f64; 3]]| -> SegmentEvents {
        SegmentEvents {
            entries: choice
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(class, &k)| (class, dirs[k - 1]))
                .collect(),
        }
    };
    let opts = grid.len() + 1;
    for code in 0..opts.pow(4) {
        let d: Vec<usize> = (0..4).map(|k| code / opts.pow(k) % opts).collect();
        cases.push((vec![seg(&d[0..2], &grid)], vec![seg(&d[2..4], &grid)]));
    }
    let small = [grid[0], grid[2]];
    for code in 0..3usize.pow(8) {
        let d: Vec<usize> = (0..8).map(|k| code / 3usize.pow(k as u32) % 3).collect();
        cases.push((
            vec![seg(&d[0..2], &small), seg(&d[2..4], &small)],
            vec![seg(&d[4..6], &small), seg(&d[6..8], &small)],
        ));
    }
    cases
}
