//! Central finite-difference gradient checking.

use super::graph::{Graph, Var};
use crate::error::Result;
use crate::tensor::Tensor;

/// Gradients smaller than this are compared on an absolute scale.
pub const REL_ERR_FLOOR: f64 = 1e-5;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_err: f64,
    /// (input index, element index, analytic, numeric) of the worst entry.
    pub worst: Option<(usize, usize, f64, f64)>,
}

impl GradCheckReport {
    pub fn merge(&mut self, other: &GradCheckReport, input_offset: usize) {
        self.checked += other.checked;
        if self.worst.is_none() || other.max_rel_err > self.max_rel_err {
            self.max_rel_err = other.max_rel_err;
            self.worst = other.worst.map(|(i, e, a, n)| (i + input_offset, e, a, n));
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERR_FLOOR)
}

/// Indices to probe in a tensor of `len` elements: all of them when
/// `max_entries` is `None` or covers the tensor, otherwise an even stride.
pub fn probe_indices(len: usize, max_entries: Option<usize>) -> Vec<usize> {
    match max_entries {
        Some(k) if k < len && k > 0 => {
            let stride = len as f64 / k as f64;
            (0..k).map(|i| ((i as f64 + 0.5) * stride) as usize).collect()
        }
        _ => (0..len).collect(),
    }
}

/// Compares the reverse-mode gradient of a scalar function of `inputs` with
/// central differences of step `step`. `build` must construct the same
/// computation every call (fixed randomness).
pub fn check_gradients<F>(inputs: &[Tensor], step: f64, max_entries: Option<usize>, build: F) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph, &[Var]) -> Result<Var>,
{
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.param(t.clone())).collect();
    let loss = build(&mut g, &vars)?;
    g.backward(loss)?;
    let analytic: Vec<Tensor> = vars
        .iter()
        .zip(inputs)
        .map(|(&v, t)| g.grad(v).cloned().unwrap_or_else(|| Tensor::zeros(t.shape())))
        .collect();
    drop(g);

    let eval = |probe: &[Tensor]| -> Result<f64> {
        let mut g = Graph::new();
        let vars: Vec<Var> = probe.iter().map(|t| g.constant(t.clone())).collect();
        let loss = build(&mut g, &vars)?;
        Ok(g.value(loss).item())
    };

    let mut report = GradCheckReport::default();
    let mut probe = inputs.to_vec();
    for (i, input) in inputs.iter().enumerate() {
        for e in probe_indices(input.len(), max_entries) {
            let orig = input.data()[e];
            probe[i].data_mut()[e] = orig + step;
            let plus = eval(&probe)?;
            probe[i].data_mut()[e] = orig - step;
            let minus = eval(&probe)?;
            probe[i].data_mut()[e] = orig;
            let numeric = (plus - minus) / (2.0 * step);
            let a = analytic[i].data()[e];
            let err = relative_error(a, numeric);
            report.checked += 1;
            if report.worst.is_none() || err > report.max_rel_err {
                report.max_rel_err = err;
                report.worst = Some((i, e, a, numeric));
            }
        }
    }
    Ok(report)
}
