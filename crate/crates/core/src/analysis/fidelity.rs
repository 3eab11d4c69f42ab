use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub value: f64,
    pub domain: Domain,
    pub bin_count: usize,
    /// Number of negative inputs set to zero before normalizing.
    pub clamped: usize,
}

/// Bhattacharyya coefficient `Σ √(p_j q_j)` of the two inputs after each is
/// clamped at zero and normalized to unit sum.
pub fn classical_fidelity(p: &[f64], q: &[f64], domain: Domain) -> Result<FidelityReport> {
    if p.len() != q.len() {
        return Err(Error::GridMismatch);
    }
    if p.iter().chain(q).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite fidelity input".into()));
    }
    let clamped = p.iter().chain(q).filter(|&&v| v < 0.0).count();
    let pos = |v: &f64| v.max(0.0);
    let sp: f64 = p.iter().map(pos).sum();
    let sq: f64 = q.iter().map(pos).sum();
    if !(sp > 0.0 && sq > 0.0) {
        return Err(Error::ZeroMass);
    }
    let value: f64 = p.iter().zip(q).map(|(a, b)| (pos(a) * pos(b)).sqrt()).sum::<f64>() / (sp * sq).sqrt();
    Ok(FidelityReport {
        value: value.min(1.0),
        domain,
        bin_count: p.len(),
        clamped,
    })
}

/// Samples of a density on a uniform axis: `values[j]` sits at `x0 + j·step`
/// and stands for the cell of width `step` around it.
#[derive(Debug, Clone, Copy)]
pub struct Binned<'a> {
    pub x0: f64,
    pub step: f64,
    pub values: &'a [f64],
}

/// Redistributes cell masses onto cells of width `step` starting at `edge`.
fn rebin(src: &Binned<'_>, edge: f64, step: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (j, &v) in src.values.iter().enumerate() {
        let mass = v * src.step;
        let a = src.x0 + (j as f64 - 0.5) * src.step;
        let b = a + src.step;
        let first = (((a - edge) / step).floor().max(0.0)) as usize;
        let last = ((((b - edge) / step).ceil()) as usize).min(n);
        for (k, o) in out.iter_mut().enumerate().take(last).skip(first) {
            let lo = a.max(edge + k as f64 * step);
            let hi = b.min(edge + (k + 1) as f64 * step);
            if hi > lo {
                *o += mass * (hi - lo) / src.step;
            }
        }
    }
    out
}

/// Fidelity after mass-conserving rebinning of both inputs onto the coarser
/// step over the union of their spans.
pub fn rebinned_fidelity(p: Binned<'_>, q: Binned<'_>, domain: Domain) -> Result<FidelityReport> {
    if !(p.step > 0.0 && q.step > 0.0) || p.values.is_empty() || q.values.is_empty() {
        return Err(Error::Data(
            "rebinning needs non-empty inputs with positive steps".into(),
        ));
    }
    let step = p.step.max(q.step);
    let lo = (p.x0 - p.step / 2.0).min(q.x0 - q.step / 2.0);
    let hi_p = p.x0 + (p.values.len() as f64 - 0.5) * p.step;
    let hi_q = q.x0 + (q.values.len() as f64 - 0.5) * q.step;
    let n = (((hi_p.max(hi_q) - lo) / step) - 1e-9).ceil().max(1.0) as usize;
    let clamp = |v: &[f64]| v.iter().map(|x| x.max(0.0)).collect::<Vec<_>>();
    let (pc, qc) = (clamp(p.values), clamp(q.values));
    let clamped = p.values.iter().chain(q.values).filter(|&&v| v < 0.0).count();
    let rp = rebin(&Binned { values: &pc, ..p }, lo, step, n);
    let rq = rebin(&Binned { values: &qc, ..q }, lo, step, n);
    let mut report = classical_fidelity(&rp, &rq, domain)?;
    report.clamped = clamped;
    Ok(report)
}
