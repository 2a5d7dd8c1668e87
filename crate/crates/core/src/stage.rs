//! The [`Stage`] atom, cascade composition and exact power accounting.
//!
//! Stage lists are always ordered source-first: index 0 is the device
//! closest to the signal source, the last entry feeds the sink.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::{linear_to_db, LinearRatio, Power};

/// Round-off allowance below W = 1 that is snapped back to exactly 1.
const UNITY_SLACK: f64 = 1e-12;

/// A two-port on the signal path, reduced to its waste factor and power gain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    label: String,
    w: f64,
    g: f64,
}

impl Stage {
    /// Fails when `w < 1` or `g` is not a positive finite number.
    pub fn new(label: impl Into<String>, w: f64, g: f64) -> Result<Self> {
        let w = check_waste(w)?;
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::NonPositiveGain(g));
        }
        Ok(Self {
            label: label.into(),
            w,
            g,
        })
    }

    /// A passive element with power loss `loss` (linear, ≥ 1): W = L, G = 1/L.
    pub fn passive(label: impl Into<String>, loss: LinearRatio) -> Result<Self> {
        let l = loss.value();
        if !l.is_finite() {
            return Err(Error::NonPositiveGain(0.0));
        }
        Stage::new(label, l, 1.0 / l)
    }

    /// A lossless element: W = 1.
    pub fn ideal(label: impl Into<String>, g: f64) -> Result<Self> {
        Stage::new(label, 1.0, g)
    }

    pub fn from_db(label: impl Into<String>, wf_db: f64, gain_db: f64) -> Result<Self> {
        Stage::new(
            label,
            LinearRatio::from_db(wf_db).value(),
            LinearRatio::from_db(gain_db).value(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Waste Figure in dB.
    pub fn wf_db(&self) -> f64 {
        linear_to_db(self.w)
    }

    pub fn gain_db(&self) -> f64 {
        linear_to_db(self.g)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// This stage followed (sink-side) by `next`.
    pub fn then(&self, next: &Stage) -> Stage {
        Stage {
            label: format!("{} > {}", self.label, next.label),
            w: next.w + (self.w - 1.0) / next.g,
            g: self.g * next.g,
        }
    }
}

pub(crate) fn check_waste(w: f64) -> Result<f64> {
    if w.is_nan() {
        return Err(Error::WasteBelowUnity(w));
    }
    if w >= 1.0 {
        Ok(w)
    } else if w >= 1.0 - UNITY_SLACK {
        Ok(1.0)
    } else {
        Err(Error::WasteBelowUnity(w))
    }
}

/// Composite stage of a source-first cascade.
///
/// W = W_N + Σ_{i<N} (W_i − 1) / Π_{j>i} G_j and G = Π G_i.
pub fn cascade(stages: &[Stage]) -> Result<Stage> {
    let (first, rest) = stages
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("cascade of zero stages".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, s| acc.then(s)))
}

/// Power wasted by a device or cascade delivering `p_signal`: (W − 1)·P.
pub fn wasted_power(w: LinearRatio, p_signal: Power) -> Result<Power> {
    let w = check_waste(w.value())?;
    Ok(Power::raw((w - 1.0) * p_signal.watts()))
}

/// Total consumption: W·P_signal + P_non-path.
pub fn total_consumed_power(w: LinearRatio, p_signal: Power, p_non_path: Power) -> Result<Power> {
    let w = check_waste(w.value())?;
    Ok(Power::raw(w * p_signal.watts() + p_non_path.watts()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageFlow {
    pub label: String,
    pub p_in_w: f64,
    pub p_out_w: f64,
    /// Signal-path power drawn by this stage alone: W·P_out − P_in.
    pub p_consumed_w: f64,
    /// (W − 1)·P_out.
    pub p_wasted_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeTotals {
    pub w: f64,
    pub g: f64,
    pub wf_db: f64,
    pub p_source_out_w: f64,
    pub p_signal_w: f64,
    pub p_consumed_path_w: f64,
    pub p_wasted_w: f64,
}

/// Rounding residue of a passive stage (W·G = 1) reads as exactly zero.
fn snap_zero(x: f64, scale: f64) -> f64 {
    if x.abs() <= 1e-12 * scale {
        0.0
    } else {
        x
    }
}

/// Stage-by-stage power ledger of a cascade driven by a known source power.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeReport {
    pub stages: Vec<StageFlow>,
    pub totals: CascadeTotals,
}

/// Push `p_source_out` through the cascade and account for every watt.
///
/// The composite W in the report is derived purely from the ledger
/// (consumed path power over delivered power), never from [`cascade`].
pub fn power_flow(stages: &[Stage], p_source_out: Power) -> Result<CascadeReport> {
    if stages.is_empty() {
        return Err(Error::InvalidArgument("power flow through zero stages".into()));
    }
    let p_src = p_source_out.watts();
    if p_src <= 0.0 {
        return Err(Error::NonPositive {
            what: "source output power",
            value: p_src,
        });
    }

    let mut flows = Vec::with_capacity(stages.len());
    let mut p_in = p_src;
    for s in stages {
        let p_out = p_in * s.g;
        flows.push(StageFlow {
            label: s.label.clone(),
            p_in_w: p_in,
            p_out_w: p_out,
            p_consumed_w: snap_zero(s.w * p_out - p_in, p_in),
            p_wasted_w: (s.w - 1.0) * p_out,
        });
        p_in = p_out;
    }

    let p_signal = p_in;
    let consumed: f64 = p_src + flows.iter().map(|f| f.p_consumed_w).sum::<f64>();
    let wasted: f64 = flows.iter().map(|f| f.p_wasted_w).sum();
    let w = consumed / p_signal;
    Ok(CascadeReport {
        stages: flows,
        totals: CascadeTotals {
            w,
            g: p_signal / p_src,
            wf_db: linear_to_db(w),
            p_source_out_w: p_src,
            p_signal_w: p_signal,
            p_consumed_path_w: consumed,
            p_wasted_w: wasted,
        },
    })
}
