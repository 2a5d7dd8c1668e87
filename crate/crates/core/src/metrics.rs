//! Standards-body energy-efficiency ratios, their W counterparts and the
//! W-based strategy quadrants.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stage::Stage;
use crate::units::Power;

fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64> {
    if !(den > 0.0 && den.is_finite()) {
        return Err(Error::NonPositive { what, value: den });
    }
    if !(num >= 0.0 && num.is_finite()) {
        return Err(Error::InvalidArgument(format!("numerator must be finite and ≥ 0, got {num}")));
    }
    Ok(num / den)
}

/// Data volume per energy, GB/Wh.
pub fn ee_bs(data_volume_gb: f64, energy_wh: f64) -> Result<f64> {
    ratio(data_volume_gb, energy_wh, "base-station energy")
}

/// Output signal energy over total RU energy.
pub fn ee_ru(signal_energy_wh: f64, total_energy_wh: f64) -> Result<f64> {
    ratio(signal_energy_wh, total_energy_wh, "RU energy")
}

pub fn ee_site(e_bs_wh: f64, e_site_wh: f64) -> Result<f64> {
    ratio(e_bs_wh, e_site_wh, "site energy")
}

pub fn ee_network(useful_output: f64, e_network_wh: f64) -> Result<f64> {
    ratio(useful_output, e_network_wh, "network energy")
}

/// Steady-state power split of one piece of equipment over a time window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquipmentReading {
    pub data_volume_gb: Option<f64>,
    pub p_signal: Power,
    pub p_non_signal: Power,
    pub p_non_path: Power,
    pub duration_h: f64,
}

impl EquipmentReading {
    pub fn new(
        p_signal: Power,
        p_non_signal: Power,
        p_non_path: Power,
        duration_h: f64,
    ) -> Result<Self> {
        if !(duration_h > 0.0 && duration_h.is_finite()) {
            return Err(Error::NonPositive { what: "duration", value: duration_h });
        }
        Ok(Self {
            data_volume_gb: None,
            p_signal,
            p_non_signal,
            p_non_path,
            duration_h,
        })
    }

    pub fn with_data_volume(mut self, gb: f64) -> Self {
        self.data_volume_gb = Some(gb);
        self
    }

    pub fn p_consumed_path(&self) -> Power {
        self.p_signal + self.p_non_signal
    }

    pub fn p_consumed_total(&self) -> Power {
        self.p_consumed_path() + self.p_non_path
    }

    pub fn energy_wh(&self) -> f64 {
        self.p_consumed_total().watts() * self.duration_h
    }

    pub fn ee_ru(&self) -> Result<f64> {
        ee_ru(self.p_signal.watts() * self.duration_h, self.energy_wh())
    }

    pub fn ee_bs(&self) -> Result<f64> {
        let dv = self
            .data_volume_gb
            .ok_or_else(|| Error::InvalidArgument("reading has no data volume".into()))?;
        ee_bs(dv, self.energy_wh())
    }

    /// P_consumed,path / P_signal.
    pub fn waste_factor(&self) -> Result<f64> {
        let w = ratio(self.p_consumed_path().watts(), self.p_signal.watts(), "signal power")?;
        crate::stage::check_waste(w)
    }
}

/// A base station described by its fixed energy and a per-GB path energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BsReading {
    pub non_path_wh: f64,
    pub path_wh_per_gb: f64,
    pub data_volume_gb: f64,
}

impl BsReading {
    pub fn energy_wh(&self) -> f64 {
        self.non_path_wh + self.path_wh_per_gb * self.data_volume_gb
    }

    pub fn ee_bs(&self) -> Result<f64> {
        ee_bs(self.data_volume_gb, self.energy_wh())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyFigure {
    /// Data rate against W.
    RateW,
    /// Consumed power against W.
    PowerW,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateWAction {
    Optimal,
    OptimizeScheduledPower,
    DeployEfficientHardwareSmallerCells,
    IncreasePowerBandwidthCA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerWAction {
    Optimal,
    ShutdownEfficientCooling,
    OptimizeScheduledPower,
    DeployEfficientHardware,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyQuadrant {
    RateW(RateWAction),
    PowerW(PowerWAction),
}

/// `axis1_high` is rate for [`StrategyFigure::RateW`] and consumed power for
/// [`StrategyFigure::PowerW`]. Thresholds are the caller's.
pub fn classify_strategy(axis1_high: bool, w_high: bool, figure: StrategyFigure) -> StrategyQuadrant {
    match figure {
        StrategyFigure::RateW => StrategyQuadrant::RateW(match (axis1_high, w_high) {
            (true, false) => RateWAction::Optimal,
            (true, true) => RateWAction::OptimizeScheduledPower,
            (false, true) => RateWAction::DeployEfficientHardwareSmallerCells,
            (false, false) => RateWAction::IncreasePowerBandwidthCA,
        }),
        StrategyFigure::PowerW => StrategyQuadrant::PowerW(match (axis1_high, w_high) {
            (true, false) => PowerWAction::ShutdownEfficientCooling,
            (true, true) => PowerWAction::OptimizeScheduledPower,
            (false, true) => PowerWAction::DeployEfficientHardware,
            (false, false) => PowerWAction::Optimal,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EeSweepRow {
    pub p_signal_w: f64,
    pub ee_ru: f64,
    pub wf_db: f64,
}

/// EE and WF of one RU across output power levels.
pub fn ee_vs_wf_sweep(ru: &Stage, p_non_path: Power, p_signal_grid: &[Power]) -> Result<Vec<EeSweepRow>> {
    if p_signal_grid.is_empty() {
        return Err(Error::InvalidArgument("empty signal-power grid".into()));
    }
    p_signal_grid
        .iter()
        .map(|p| {
            let s = p.watts();
            if s <= 0.0 {
                return Err(Error::NonPositive { what: "signal power", value: s });
            }
            Ok(EeSweepRow {
                p_signal_w: s,
                ee_ru: s / (ru.w() * s + p_non_path.watts()),
                wf_db: ru.wf_db(),
            })
        })
        .collect()
}
