//! TOML configuration. Keys are snake_case with unit suffixes; unknown keys
//! are rejected. Every section is optional and falls back to the reference
//! component values and simulation setup.

use std::path::Path;

use serde::Deserialize;
use wf_core::channel::{effective_channel, path_loss, ApertureAntenna, PathLossModel};
use wf_core::components::{DeviceSpec, LnaModel, PaModel, RuSpec, UeSpec};
use wf_core::netsim::{Allocation, AntennaMode, CampaignGrid, Scenario};
use wf_core::{Power, Stage};

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub ru: Option<RuSection>,
    pub ue: Option<UeSection>,
    pub channel: Option<ChannelSection>,
    pub scenario: Option<ScenarioSection>,
    pub sweep: Option<SweepSection>,
    #[serde(default, rename = "stage")]
    pub stages: Vec<StageEntry>,
    pub cascade: Option<CascadeSection>,
    pub metrics: Option<MetricsSection>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

fn core(e: wf_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuSection {
    pub dac_efficiency: f64,
    pub mixer_conversion_loss_db: f64,
    pub mixer_insertion_loss_db: f64,
    pub phase_shifter_insertion_loss_db: f64,
    pub phase_shifter_reflection_loss_db: Option<f64>,
    pub phase_shifter_vswr: Option<f64>,
    pub pa_pae: f64,
    pub pa_gain_db: f64,
    pub pa_quiescent_w: f64,
    pub antenna_radiation_efficiency: f64,
    pub antenna_vswr: f64,
    pub include_mismatch: bool,
    pub n_tx: u32,
    pub lo_power_w: Option<f64>,
}

impl Default for RuSection {
    fn default() -> Self {
        Self {
            dac_efficiency: 0.91,
            mixer_conversion_loss_db: 8.2,
            mixer_insertion_loss_db: 0.0,
            phase_shifter_insertion_loss_db: 3.5,
            phase_shifter_reflection_loss_db: Some(14.0),
            phase_shifter_vswr: Some(1.5),
            pa_pae: 0.48,
            pa_gain_db: 50.0,
            pa_quiescent_w: 0.0,
            antenna_radiation_efficiency: 0.6,
            antenna_vswr: 1.5,
            include_mismatch: true,
            n_tx: 1,
            lo_power_w: None,
        }
    }
}

fn watts(w: f64) -> Result<Power, CliError> {
    Power::from_watts(w).map_err(core)
}

impl RuSection {
    pub fn spec(&self) -> Result<RuSpec, CliError> {
        Ok(RuSpec {
            dac: DeviceSpec::Dac { efficiency: self.dac_efficiency },
            mixer: DeviceSpec::Mixer {
                conversion_loss_db: self.mixer_conversion_loss_db,
                insertion_loss_db: self.mixer_insertion_loss_db,
            },
            phase_shifter: DeviceSpec::PhaseShifter {
                insertion_loss_db: self.phase_shifter_insertion_loss_db,
                reflection_loss_db: self.phase_shifter_reflection_loss_db,
                vswr: self.phase_shifter_vswr,
            },
            pa: DeviceSpec::PowerAmplifier {
                model: PaModel::Pae { pae: self.pa_pae, gain_db: self.pa_gain_db },
                quiescent: watts(self.pa_quiescent_w)?,
            },
            antenna: DeviceSpec::Antenna {
                radiation_efficiency: self.antenna_radiation_efficiency,
                vswr: self.antenna_vswr,
                include_mismatch: self.include_mismatch,
            },
            n_tx: self.n_tx,
            lo_power: self.lo_power_w.map(watts).transpose()?,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UeSection {
    pub antenna_radiation_efficiency: f64,
    pub antenna_vswr: f64,
    pub include_mismatch: bool,
    pub lna_gain_db: f64,
    pub lna_quiescent_w: f64,
    pub phase_shifter_insertion_loss_db: f64,
    pub phase_shifter_reflection_loss_db: Option<f64>,
    pub phase_shifter_vswr: Option<f64>,
    pub mixer_conversion_loss_db: f64,
    pub mixer_insertion_loss_db: f64,
    pub adc_fom_j: Option<f64>,
    pub adc_sample_rate_hz: Option<f64>,
    pub adc_bits: Option<u32>,
    pub n_rx: u32,
    pub lo_power_w: Option<f64>,
}

impl Default for UeSection {
    fn default() -> Self {
        Self {
            antenna_radiation_efficiency: 0.7,
            antenna_vswr: 1.5,
            include_mismatch: true,
            lna_gain_db: 20.0,
            lna_quiescent_w: 0.0,
            phase_shifter_insertion_loss_db: 6.0,
            phase_shifter_reflection_loss_db: None,
            phase_shifter_vswr: None,
            mixer_conversion_loss_db: 6.7,
            mixer_insertion_loss_db: 0.0,
            adc_fom_j: None,
            adc_sample_rate_hz: None,
            adc_bits: None,
            n_rx: 1,
            lo_power_w: None,
        }
    }
}

impl UeSection {
    pub fn spec(&self) -> Result<UeSpec, CliError> {
        let adc = match (self.adc_fom_j, self.adc_sample_rate_hz, self.adc_bits) {
            (None, None, None) => None,
            (Some(fom), Some(sample_rate_hz), Some(bits)) => Some(DeviceSpec::Adc { fom, sample_rate_hz, bits }),
            _ => {
                return Err(CliError::Config(
                    "[ue] adc_fom_j, adc_sample_rate_hz and adc_bits must be given together".into(),
                ))
            }
        };
        Ok(UeSpec {
            antenna: DeviceSpec::Antenna {
                radiation_efficiency: self.antenna_radiation_efficiency,
                vswr: self.antenna_vswr,
                include_mismatch: self.include_mismatch,
            },
            lna: DeviceSpec::Lna {
                gain_db: self.lna_gain_db,
                model: LnaModel::IdealW1,
                quiescent: watts(self.lna_quiescent_w)?,
            },
            phase_shifter: DeviceSpec::PhaseShifter {
                insertion_loss_db: self.phase_shifter_insertion_loss_db,
                reflection_loss_db: self.phase_shifter_reflection_loss_db,
                vswr: self.phase_shifter_vswr,
            },
            mixer: DeviceSpec::Mixer {
                conversion_loss_db: self.mixer_conversion_loss_db,
                insertion_loss_db: self.mixer_insertion_loss_db,
            },
            adc,
            n_rx: self.n_rx,
            lo_power: self.lo_power_w.map(watts).transpose()?,
        })
    }
}

/// Either a fixed effective loss or a CI path-loss link.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub effective_loss_db: Option<f64>,
    pub frequency_ghz: Option<f64>,
    pub ple: Option<f64>,
    pub distance_m: Option<f64>,
    pub shadow_db: Option<f64>,
    pub tx_gain_db: Option<f64>,
    pub rx_gain_db: Option<f64>,
}

impl ChannelSection {
    pub fn stage(&self) -> Result<Stage, CliError> {
        let link_keys = self.frequency_ghz.is_some()
            || self.ple.is_some()
            || self.distance_m.is_some()
            || self.shadow_db.is_some();
        let ch = match (self.effective_loss_db, link_keys) {
            (Some(_), true) => {
                return Err(CliError::Config(
                    "[channel] effective_loss_db excludes frequency_ghz, ple, distance_m and shadow_db".into(),
                ))
            }
            (Some(l), false) => effective_channel(l, self.tx_gain_db.unwrap_or(0.0), self.rx_gain_db.unwrap_or(0.0)),
            (None, _) => {
                let f = self
                    .frequency_ghz
                    .ok_or_else(|| CliError::Config("[channel] needs effective_loss_db or frequency_ghz".into()))?;
                let d = self
                    .distance_m
                    .ok_or_else(|| CliError::Config("[channel] frequency_ghz needs distance_m".into()))?;
                let model = match self.ple {
                    Some(n) => PathLossModel::new(f * 1e9, n, 0.0),
                    None => PathLossModel::preset(f),
                }
                .map_err(core)?;
                let pl = path_loss(&model, d, self.shadow_db.unwrap_or(0.0));
                effective_channel(pl, self.tx_gain_db.unwrap_or(0.0), self.rx_gain_db.unwrap_or(0.0))
            }
        };
        Ok(ch.stage)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub n_ue: Option<usize>,
    pub n_bs: Option<usize>,
    pub region_radius_m: Option<f64>,
    pub bs_height_m: Option<f64>,
    pub ue_height_m: Option<f64>,
    pub min_bs_separation_m: Option<f64>,
    pub serving_radius_m: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub target_snr_db: Option<f64>,
    pub ue_noise_figure_db: Option<f64>,
    pub per_link_cap_dbm: Option<f64>,
    pub per_bs_budget_dbm: Option<f64>,
    pub w_bs: Option<f64>,
    pub g_bs_db: Option<f64>,
    pub w_ue: Option<f64>,
    pub g_ue_db: Option<f64>,
    pub p_non_path_bs_w: Option<f64>,
    pub p_non_path_ue_w: Option<f64>,
    pub frequency_ghz: Option<f64>,
    pub antenna_mode: Option<String>,
    pub ple: Option<f64>,
    pub shadow_sigma_db: Option<f64>,
    pub bs_antenna_efficiency: Option<f64>,
    pub bs_antenna_area_m2: Option<f64>,
    pub ue_antenna_efficiency: Option<f64>,
    pub ue_antenna_area_m2: Option<f64>,
    pub nearest_bs_fallback: Option<bool>,
    pub allocation: Option<String>,
    pub scale_non_path_by_area: Option<bool>,
    pub seed: Option<u64>,
}

fn aperture(eff: Option<f64>, area: Option<f64>, base: ApertureAntenna) -> Result<ApertureAntenna, CliError> {
    ApertureAntenna::new(eff.unwrap_or(base.efficiency()), area.unwrap_or(base.physical_area_m2())).map_err(core)
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if let Some(v) = $src.$field { $dst.$field = v; } )*
    };
}

impl ScenarioSection {
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let mut s = Scenario::default();
        overlay!(s, self;
            n_ue, n_bs, region_radius_m, bs_height_m, ue_height_m, min_bs_separation_m,
            serving_radius_m, bandwidth_hz, target_snr_db, ue_noise_figure_db, per_link_cap_dbm,
            per_bs_budget_dbm, w_bs, g_bs_db, w_ue, g_ue_db, p_non_path_bs_w, p_non_path_ue_w,
            frequency_ghz, nearest_bs_fallback, scale_non_path_by_area, seed,
        );
        s.ple = self.ple;
        s.shadow_sigma_db = self.shadow_sigma_db;
        if let Some(m) = &self.antenna_mode {
            s.antenna_mode = m.parse().map_err(core)?;
        }
        if let Some(a) = &self.allocation {
            s.allocation = match a.as_str() {
                "equal" => Allocation::Equal,
                "proportional_to_gain" => Allocation::ProportionalToGain,
                other => {
                    return Err(CliError::Config(format!(
                        "[scenario] allocation '{other}' (expected equal or proportional_to_gain)"
                    )))
                }
            };
        }
        let bs = ApertureAntenna::base_station();
        let ue = ApertureAntenna::user_equipment();
        s.bs_antenna = aperture(self.bs_antenna_efficiency, self.bs_antenna_area_m2, bs)?;
        s.ue_antenna = aperture(self.ue_antenna_efficiency, self.ue_antenna_area_m2, ue)?;
        Ok(s)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub wf_c_start_db: f64,
    pub wf_c_stop_db: f64,
    pub wf_c_step_db: f64,
    pub frequencies_ghz: Vec<f64>,
    pub antenna_modes: Vec<String>,
    pub n_bs: Vec<usize>,
    /// Negative disables the omni override.
    pub omni_per_link_cap_dbm: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let g = CampaignGrid::default();
        Self {
            wf_c_start_db: 60.0,
            wf_c_stop_db: 120.0,
            wf_c_step_db: 1.0,
            frequencies_ghz: g.frequencies_ghz,
            antenna_modes: g.antenna_modes.iter().map(|m| m.as_str().to_string()).collect(),
            n_bs: g.n_bs,
            omni_per_link_cap_dbm: g.omni_per_link_cap_dbm.unwrap_or(-1.0),
        }
    }
}

impl SweepSection {
    pub fn wf_c_grid(&self) -> Result<Vec<f64>, CliError> {
        let (a, b, h) = (self.wf_c_start_db, self.wf_c_stop_db, self.wf_c_step_db);
        if !(h > 0.0 && b >= a && a >= 0.0) {
            return Err(CliError::Config(format!(
                "[sweep] needs 0 ≤ wf_c_start_db ≤ wf_c_stop_db and wf_c_step_db > 0 (got {a}, {b}, {h})"
            )));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| a + k as f64 * h).collect())
    }

    pub fn grid(&self, base: Scenario, n_seeds: u64, base_seed: u64) -> Result<CampaignGrid, CliError> {
        let modes = self
            .antenna_modes
            .iter()
            .map(|m| m.parse::<AntennaMode>().map_err(core))
            .collect::<Result<_, _>>()?;
        Ok(CampaignGrid {
            base,
            frequencies_ghz: self.frequencies_ghz.clone(),
            antenna_modes: modes,
            n_bs: self.n_bs.clone(),
            n_seeds,
            base_seed,
            omni_per_link_cap_dbm: (self.omni_per_link_cap_dbm >= 0.0).then_some(self.omni_per_link_cap_dbm),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageEntry {
    pub label: String,
    pub w: Option<f64>,
    pub wf_db: Option<f64>,
    pub g: Option<f64>,
    pub gain_db: Option<f64>,
    /// Passive stage: W = L, G = 1/L.
    pub loss_db: Option<f64>,
}

impl StageEntry {
    pub fn stage(&self) -> Result<Stage, CliError> {
        let bad = |m: &str| CliError::Config(format!("[[stage]] '{}': {m}", self.label));
        if let Some(l) = self.loss_db {
            if self.w.is_some() || self.wf_db.is_some() || self.g.is_some() || self.gain_db.is_some() {
                return Err(bad("loss_db excludes w, wf_db, g and gain_db"));
            }
            return Stage::from_db(&self.label, l, -l).map_err(|e| bad(&e.to_string()));
        }
        let w = match (self.w, self.wf_db) {
            (Some(w), None) => w,
            (None, Some(db)) => wf_core::units::db_to_linear(db),
            (None, None) => return Err(bad("needs w, wf_db or loss_db")),
            _ => return Err(bad("give either w or wf_db, not both")),
        };
        let g = match (self.g, self.gain_db) {
            (Some(g), None) => g,
            (None, Some(db)) => wf_core::units::db_to_linear(db),
            (None, None) => return Err(bad("needs g or gain_db")),
            _ => return Err(bad("give either g or gain_db, not both")),
        };
        Stage::new(&self.label, w, g).map_err(|e| bad(&e.to_string()))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSection {
    pub source_power_w: Option<f64>,
    pub source_power_dbm: Option<f64>,
}

impl CascadeSection {
    pub fn source_power(&self) -> Result<Power, CliError> {
        match (self.source_power_w, self.source_power_dbm) {
            (Some(w), None) => watts(w),
            (None, Some(dbm)) => Ok(Power::from_dbm(dbm)),
            (None, None) => Ok(Power::from_dbm(0.0)),
            _ => Err(CliError::Config("[cascade] give source_power_w or source_power_dbm, not both".into())),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    #[serde(default)]
    pub bs: Vec<BsEntry>,
    #[serde(default)]
    pub ru: Vec<RuEntry>,
    #[serde(default)]
    pub strategy: Vec<StrategyEntry>,
    pub ee_sweep: Option<EeSweepEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsEntry {
    pub name: String,
    pub non_path_wh: f64,
    pub path_wh_per_gb: f64,
    pub data_volume_gb: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuEntry {
    pub name: String,
    pub p_signal_w: f64,
    pub p_non_signal_w: f64,
    pub p_non_path_w: f64,
    #[serde(default = "one_hour")]
    pub duration_h: f64,
}

fn one_hour() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyEntry {
    pub name: String,
    /// `rate_w` or `power_w`.
    pub figure: String,
    pub axis_high: bool,
    pub w_high: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EeSweepEntry {
    pub w: f64,
    pub p_non_path_w: f64,
    pub p_signal_w: Vec<f64>,
}

pub fn ru_or_default(doc: &ConfigDocument) -> Result<RuSpec, CliError> {
    match &doc.ru {
        Some(r) => r.spec(),
        None => RuSection::default().spec(),
    }
}

pub fn ue_or_default(doc: &ConfigDocument) -> Result<UeSpec, CliError> {
    match &doc.ue {
        Some(u) => u.spec(),
        None => UeSection::default().spec(),
    }
}

pub fn scenario_or_default(doc: &ConfigDocument) -> Result<Scenario, CliError> {
    match &doc.scenario {
        Some(s) => s.scenario(),
        None => Ok(Scenario::default()),
    }
}
