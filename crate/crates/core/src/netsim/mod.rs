//! Seeded Monte-Carlo simulation of a distributed multi-user MIMO downlink.
//!
//! One drop places BSs and UEs, assigns serving sets, runs per-link power
//! control to an SNR target, composes per-UE parallel W and the system W
//! through an imaginary sink that sums every UE output, and reports power
//! per km².

mod campaign;
mod drop;
mod layout;
mod power;
mod rng;
mod serving;

pub use campaign::{
    run_campaign, write_aggregate_csv, write_drops_csv, AggregateRow, Campaign, CampaignGrid, DropRow,
};
pub use drop::{evaluate_drop, evaluate_drop_traced, evaluate_links, DropTrace, LinkSpec, LinkTrace, UeTrace};
pub use layout::{generate_layout, Layout, Point, MAX_PLACEMENT_ATTEMPTS};
pub use power::{power_control, PowerPlan};
pub use rng::Streams;
pub use serving::assign_serving_sets;

use serde::Serialize;

use crate::channel::{noise_power_dbm, ApertureAntenna, PathLossModel};
use crate::error::{Error, Result};
use crate::units::{db_to_linear, Power};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AntennaMode {
    /// 0 dBi at both ends.
    Omni,
    /// Aperture gain at both ends.
    Directional,
}

impl AntennaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AntennaMode::Omni => "omni",
            AntennaMode::Directional => "directional",
        }
    }
}

impl std::str::FromStr for AntennaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omni" => Ok(AntennaMode::Omni),
            "directional" => Ok(AntennaMode::Directional),
            other => Err(Error::InvalidArgument(format!(
                "unknown antenna mode '{other}' (expected omni or directional)"
            ))),
        }
    }
}

/// How a UE's required receive power is split across its serving links.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    /// Same transmit power on every serving link.
    Equal,
    /// Transmit power proportional to link gain 1/L.
    ProportionalToGain,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub n_ue: usize,
    pub n_bs: usize,
    pub region_radius_m: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub min_bs_separation_m: f64,
    pub serving_radius_m: f64,
    pub bandwidth_hz: f64,
    pub target_snr_db: f64,
    pub ue_noise_figure_db: f64,
    pub per_link_cap_dbm: f64,
    pub per_bs_budget_dbm: f64,
    pub w_bs: f64,
    pub g_bs_db: f64,
    pub w_ue: f64,
    pub g_ue_db: f64,
    pub p_non_path_bs_w: f64,
    pub p_non_path_ue_w: f64,
    pub frequency_ghz: f64,
    pub antenna_mode: AntennaMode,
    /// Overrides for the frequency preset.
    pub ple: Option<f64>,
    pub shadow_sigma_db: Option<f64>,
    pub bs_antenna: ApertureAntenna,
    pub ue_antenna: ApertureAntenna,
    /// Serve UEs outside every coverage disk from the nearest BS; when off
    /// they are left unserved.
    pub nearest_bs_fallback: bool,
    pub allocation: Allocation,
    /// Divide non-path power by the area as well as the signal-path power.
    pub scale_non_path_by_area: bool,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            n_ue: 1024,
            n_bs: 20,
            region_radius_m: 1000.0,
            bs_height_m: 15.0,
            ue_height_m: 1.5,
            min_bs_separation_m: 200.0,
            serving_radius_m: 200.0,
            bandwidth_hz: 400e6,
            target_snr_db: 10.0,
            ue_noise_figure_db: 5.0,
            per_link_cap_dbm: 10.0,
            per_bs_budget_dbm: 50.0,
            w_bs: 15.0,
            g_bs_db: 30.0,
            w_ue: 33.0,
            g_ue_db: 11.0,
            p_non_path_bs_w: 140.0,
            p_non_path_ue_w: 1.0,
            frequency_ghz: 28.0,
            antenna_mode: AntennaMode::Directional,
            ple: None,
            shadow_sigma_db: None,
            bs_antenna: ApertureAntenna::base_station(),
            ue_antenna: ApertureAntenna::user_equipment(),
            nearest_bs_fallback: true,
            allocation: Allocation::Equal,
            scale_non_path_by_area: true,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let positive = |what: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::NonPositive { what, value: v })
            }
        };
        if self.n_ue == 0 {
            return Err(Error::InvalidArgument("n_ue must be ≥ 1".into()));
        }
        if self.n_bs == 0 {
            return Err(Error::InvalidArgument("n_bs must be ≥ 1".into()));
        }
        positive("region radius", self.region_radius_m)?;
        positive("serving radius", self.serving_radius_m)?;
        positive("bandwidth", self.bandwidth_hz)?;
        positive("frequency", self.frequency_ghz)?;
        positive("UE gain", db_to_linear(self.g_ue_db))?;
        positive("BS gain", db_to_linear(self.g_bs_db))?;
        if !(self.min_bs_separation_m >= 0.0 && self.min_bs_separation_m < 2.0 * self.region_radius_m) {
            return Err(Error::InvalidArgument(format!(
                "min BS separation must lie in [0, 2·region radius), got {}",
                self.min_bs_separation_m
            )));
        }
        if !(self.bs_height_m >= 0.0 && self.ue_height_m >= 0.0) {
            return Err(Error::InvalidArgument("antenna heights must be ≥ 0".into()));
        }
        crate::stage::check_waste(self.w_bs)?;
        crate::stage::check_waste(self.w_ue)?;
        if !(self.p_non_path_bs_w >= 0.0 && self.p_non_path_ue_w >= 0.0) {
            return Err(Error::InvalidArgument("non-path powers must be ≥ 0".into()));
        }
        self.path_loss_model()?;
        Ok(())
    }

    pub fn path_loss_model(&self) -> Result<PathLossModel> {
        let f_hz = self.frequency_ghz * 1e9;
        match (self.ple, self.shadow_sigma_db) {
            (Some(n), Some(s)) => PathLossModel::new(f_hz, n, s),
            (ple, sigma) => {
                let preset = PathLossModel::preset(self.frequency_ghz)?;
                PathLossModel::new(f_hz, ple.unwrap_or(preset.ple()), sigma.unwrap_or(preset.sigma_db()))
            }
        }
    }

    /// Total antenna gain G_tx + G_rx in dB for the current mode.
    pub fn antenna_gains_db(&self) -> (f64, f64) {
        match self.antenna_mode {
            AntennaMode::Omni => (0.0, 0.0),
            AntennaMode::Directional => {
                let f = self.frequency_ghz * 1e9;
                (
                    crate::channel::aperture_gain(&self.bs_antenna, f),
                    crate::channel::aperture_gain(&self.ue_antenna, f),
                )
            }
        }
    }

    pub fn noise_dbm(&self) -> Result<f64> {
        noise_power_dbm(self.bandwidth_hz, self.ue_noise_figure_db)
    }

    pub fn target_rx_power(&self) -> Result<Power> {
        Ok(Power::from_dbm(self.noise_dbm()? + self.target_snr_db))
    }

    pub fn area_km2(&self) -> f64 {
        std::f64::consts::PI * self.region_radius_m * self.region_radius_m / 1e6
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SnrStats {
    pub mean_db: f64,
    pub p5_db: f64,
    pub frac_meeting_target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DropResult {
    pub w_first_stage: f64,
    pub w_system: f64,
    pub wf_system_db: f64,
    /// G_UE·ΣP_R, watts.
    pub p_out_w: f64,
    /// W_System·P_out, watts.
    pub p_signal_path_w: f64,
    pub p_non_path_w: f64,
    pub p_total_w: f64,
    pub p_signal_path_per_km2_w: f64,
    pub p_non_path_per_km2_w: f64,
    pub p_total_per_km2_w: f64,
    pub snr: SnrStats,
    pub n_served_ue: usize,
    pub n_links: usize,
    pub n_capped_links: usize,
    pub n_clamped_links: usize,
}
