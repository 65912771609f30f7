//! Evaluation metrics, the per-iteration cost model and CSV output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::driver::Method;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// RFVD value reported once `F_t` is within rounding of `F*`.
pub const RFVD_FLOOR: f64 = -16.0;

/// One row of a run's trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub f: f64,
    pub rfvd: f64,
    pub kkt: f64,
    pub alpha: f64,
    pub s_size: usize,
    pub nnz_pct: f64,
    pub comp_model: f64,
    pub comm_model: f64,
    pub tau_ls: usize,
    pub wall_ms: f64,
}

pub const CSV_HEADER: &str =
    "t,F,rfvd,kkt,alpha,S_size,nnz_pct,comp_model,comm_model,tau_ls,wall_ms";

/// `log10((F_t - F*) / F*)`, floored at -16 once the gap is below rounding.
pub fn rfvd<T: Scalar>(f_t: T, f_star: T) -> Result<T> {
    if !(f_star > T::zero()) {
        return Err(Error::Domain(format!(
            "reference objective must be positive, got {f_star}"
        )));
    }
    if f_t <= f_star * (T::one() + T::of(1e-16)) {
        return Ok(T::of(RFVD_FLOOR));
    }
    Ok(((f_t - f_star) / f_star).log10().max(T::of(RFVD_FLOOR)))
}

/// Area under the precision-recall curve.
///
/// Examples are ranked by descending score; equal scores enter the ranking
/// together. The staircase is integrated as `sum (R_i - R_{i-1}) P_i`.
pub fn auprc<T: Scalar>(scores: &[T], labels: &[T]) -> Result<T> {
    if scores.len() != labels.len() {
        return Err(Error::Contract(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let positives = labels.iter().filter(|&&c| c > T::zero()).count();
    if positives == 0 {
        return Err(Error::Domain(
            "AUPRC needs at least one positive label".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let total_pos = T::of_usize(positives);
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = T::zero();
    let mut area = T::zero();
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] > T::zero() {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let recall = T::of_usize(tp) / total_pos;
        let precision = T::of_usize(tp) / T::of_usize(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(area)
}

/// Inputs to the per-iteration cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub nz: f64,
    pub n: f64,
    pub m: f64,
    pub nodes: f64,
    /// Variables updated per iteration, summed over nodes.
    pub s_size: f64,
    pub beta: f64,
    pub tau_ls: f64,
    pub k: f64,
    /// Sparsity skew of greedily selected columns, `1 <= q <= m / |S|`.
    pub q: f64,
}

/// Method-dependent unit counts for the four steps of one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl Method {
    pub fn step_coefficients(self, k: f64, q: f64, tau_ls: f64) -> StepCoefficients {
        let (c1, c2, c3, c4, c5) = match self {
            Method::Hydra => (0.0, 1.0, 1.0, 0.0, 1.0),
            Method::Grock => (1.0, q, 1.0, 0.0, q),
            Method::PcdR => (0.0, 1.0, tau_ls, tau_ls, 1.0),
            Method::PcdS => (1.0, q, tau_ls, tau_ls, q),
            Method::DbcdR => (0.0, k, tau_ls, tau_ls, 1.0),
            Method::DbcdS => (1.0, k * q, tau_ls, tau_ls, q),
        };
        StepCoefficients { c1, c2, c3, c4, c5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub comp: f64,
    pub comm: f64,
}

/// Computation and communication units of one outer iteration.
///
/// Computation: `c1 nz/P + c2 (nz/P)(|S|/m) + c3 |S| + c4 n + c5 (nz/P)(|S|/m)`.
/// Communication: `c4 beta log2 P + beta n log2 P`.
pub fn cost_estimate(method: Method, params: &CostParams) -> Result<CostEstimate> {
    let p = params;
    let counts = [p.nz, p.n, p.m, p.nodes, p.s_size, p.beta, p.tau_ls, p.k];
    if counts.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain("cost parameters must be non-negative".into()));
    }
    if p.nodes < 1.0 || p.m <= 0.0 {
        return Err(Error::Domain("cost model needs P >= 1 and m > 0".into()));
    }
    if !(p.q >= 1.0) {
        return Err(Error::Domain(format!(
            "sparsity skew q must be >= 1, got {}",
            p.q
        )));
    }
    let c = method.step_coefficients(p.k, p.q, p.tau_ls);
    let per_node = p.nz / p.nodes;
    let frac = p.s_size / p.m;
    let comp = c.c1 * per_node
        + c.c2 * per_node * frac
        + c.c3 * p.s_size
        + c.c4 * p.n
        + c.c5 * per_node * frac;
    let log_p = p.nodes.log2();
    let comm = c.c4 * p.beta * log_p + p.beta * p.n * log_p;
    Ok(CostEstimate { comp, comm })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsvOptions {
    /// Write measured wall time; otherwise the column is zero so reruns are
    /// byte-identical.
    pub timing: bool,
}

fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

/// Header plus one row per record.
pub fn write_csv<W: Write>(
    records: &[IterationRecord],
    opts: CsvOptions,
    mut out: W,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Contract("cannot write an empty trajectory".into()));
    }
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            fmt_float(r.f),
            fmt_float(r.rfvd),
            fmt_float(r.kkt),
            fmt_float(r.alpha),
            r.s_size,
            fmt_float(r.nnz_pct),
            fmt_float(r.comp_model),
            fmt_float(r.comm_model),
            r.tau_ls,
            fmt_float(if opts.timing { r.wall_ms } else { 0.0 }),
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[IterationRecord], opts: CsvOptions, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Contract("cannot write an empty trajectory".into()));
    }
    write_csv(records, opts, BufWriter::new(File::create(path)?))
}
