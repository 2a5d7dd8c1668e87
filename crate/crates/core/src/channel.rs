//! Close-in (CI) path loss with a 1 m anchor, aperture antenna gain and the
//! effective-channel stage.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stage::Stage;
use crate::units::{db_to_linear, Power};

pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathLossModel {
    frequency_hz: f64,
    ple: f64,
    sigma_db: f64,
}

impl PathLossModel {
    pub const REFERENCE_DISTANCE_M: f64 = 1.0;

    pub fn new(frequency_hz: f64, ple: f64, sigma_db: f64) -> Result<Self> {
        if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
            return Err(Error::NonPositive { what: "frequency", value: frequency_hz });
        }
        if !(ple > 0.0 && ple.is_finite()) {
            return Err(Error::NonPositive { what: "path-loss exponent", value: ple });
        }
        if !(sigma_db >= 0.0 && sigma_db.is_finite()) {
            return Err(Error::InvalidArgument(format!("shadowing sigma must be ≥ 0 dB, got {sigma_db}")));
        }
        Ok(Self { frequency_hz, ple, sigma_db })
    }

    /// LOS presets for 3.5, 17 and 28 GHz. Any other frequency is rejected.
    pub fn preset(frequency_ghz: f64) -> Result<Self> {
        let (ple, sigma) = match frequency_ghz {
            f if (f - 3.5).abs() < 1e-9 => (1.82, 4.89),
            f if (f - 17.0).abs() < 1e-9 => (2.00, 6.60),
            f if (f - 28.0).abs() < 1e-9 => (2.02, 8.98),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "no path-loss preset for {other} GHz (available: 3.5, 17, 28)"
                )))
            }
        };
        Self::new(frequency_ghz * 1e9, ple, sigma)
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }
    pub fn ple(&self) -> f64 {
        self.ple
    }
    pub fn sigma_db(&self) -> f64 {
        self.sigma_db
    }
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }
}

/// Free-space loss at 1 m, 20·log10(4πf/c).
pub fn fspl_1m(frequency_hz: f64) -> f64 {
    20.0 * (4.0 * PI * frequency_hz / SPEED_OF_LIGHT).log10()
}

/// CI path loss in dB. Distances below 1 m are clamped to 1 m.
pub fn path_loss(model: &PathLossModel, distance_m: f64, shadow_db: f64) -> f64 {
    let d = distance_m.max(PathLossModel::REFERENCE_DISTANCE_M);
    fspl_1m(model.frequency_hz) + 10.0 * model.ple * d.log10() + shadow_db
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApertureAntenna {
    efficiency: f64,
    physical_area_m2: f64,
}

impl ApertureAntenna {
    pub fn new(efficiency: f64, physical_area_m2: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::OutOfUnitInterval { what: "aperture efficiency", value: efficiency });
        }
        if !(physical_area_m2 > 0.0 && physical_area_m2.is_finite()) {
            return Err(Error::NonPositive { what: "aperture area", value: physical_area_m2 });
        }
        Ok(Self { efficiency, physical_area_m2 })
    }

    /// 1 m² panel, 80 % aperture efficiency.
    pub fn base_station() -> Self {
        Self { efficiency: 0.8, physical_area_m2: 1.0 }
    }

    /// 3 cm × 3 cm panel, 80 % aperture efficiency.
    pub fn user_equipment() -> Self {
        Self { efficiency: 0.8, physical_area_m2: 9e-4 }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn physical_area_m2(&self) -> f64 {
        self.physical_area_m2
    }

    pub fn effective_area_m2(&self) -> f64 {
        self.efficiency * self.physical_area_m2
    }
}

/// 10·log10(4π·A_e/λ²) in dBi.
pub fn aperture_gain(antenna: &ApertureAntenna, frequency_hz: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / frequency_hz;
    10.0 * (4.0 * PI * antenna.effective_area_m2() / (lambda * lambda)).log10()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveChannel {
    pub stage: Stage,
    pub effective_loss_db: f64,
    /// Set when antenna gains exceeded the path loss and W was clamped to 1.
    pub clamped: bool,
}

/// Channel stage with W = 1/G = 10^((PL − G_tx − G_rx)/10).
pub fn effective_channel(pl_db: f64, g_tx_db: f64, g_rx_db: f64) -> EffectiveChannel {
    let effective_loss_db = pl_db - g_tx_db - g_rx_db;
    let clamped = effective_loss_db < 0.0;
    let w = if clamped { 1.0 } else { db_to_linear(effective_loss_db) };
    let stage = Stage::new("channel", w, 1.0 / w).expect("effective loss ≥ 0 dB gives W ≥ 1");
    EffectiveChannel { stage, effective_loss_db, clamped }
}

/// Thermal noise power −174 + 10·log10(BW) + NF, in dBm.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::NonPositive { what: "bandwidth", value: bandwidth_hz });
    }
    Ok(THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

pub fn noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> Result<Power> {
    noise_power_dbm(bandwidth_hz, noise_figure_db).map(Power::from_dbm)
}

/// 3-D distance between a point at horizontal range `horizontal_m` and a height offset.
pub fn distance_3d(horizontal_m: f64, height_diff_m: f64) -> f64 {
    horizontal_m.hypot(height_diff_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{stage_of, DeviceSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn fspl_examples() {
        assert!((fspl_1m(3.5e9) - 43.32).abs() < 5e-3);
        assert!((fspl_1m(28e9) - 61.38).abs() < 5e-3);
        // λ = 4π m
        assert!(fspl_1m(SPEED_OF_LIGHT / (4.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn path_loss_examples() {
        let m28 = PathLossModel::preset(28.0).unwrap();
        assert_eq!(path_loss(&m28, 1.0, 0.0), fspl_1m(28e9));
        assert!((path_loss(&m28, 100.0, 0.0) - 101.78).abs() < 5e-3);
        let m35 = PathLossModel::preset(3.5).unwrap();
        assert!((path_loss(&m35, 100.0, 0.0) - 79.72).abs() < 5e-3);
        assert_eq!(path_loss(&m35, 0.2, 0.0), path_loss(&m35, 1.0, 0.0));
        assert_eq!(path_loss(&m35, 10.0, 3.0) - path_loss(&m35, 10.0, 0.0), 3.0);
    }

    #[test]
    fn aperture_gain_table() {
        let bs = ApertureAntenna::base_station();
        let ue = ApertureAntenna::user_equipment();
        let cases = [
            (3.5e9, 0.90, 31.36),
            (17e9, 14.63, 45.09),
            (28e9, 18.97, 49.42),
        ];
        for (f, g_ue, g_bs) in cases {
            assert!((aperture_gain(&ue, f) - g_ue).abs() < 5e-3, "{f}");
            assert!((aperture_gain(&bs, f) - g_bs).abs() < 5e-3, "{f}");
        }
    }

    #[test]
    fn effective_channel_examples() {
        let c = effective_channel(100.0, 20.0, 10.0);
        assert!(((c.stage.w() - 1e7) / 1e7).abs() < 1e-12);
        assert!(!c.clamped);
        let omni = effective_channel(87.5, 0.0, 0.0);
        assert!(((omni.stage.w() - db_to_linear(87.5)) / omni.stage.w()).abs() < 1e-12);

        let m = PathLossModel::preset(28.0).unwrap();
        let pl = path_loss(&m, 100.0, 0.0);
        let c = effective_channel(
            pl,
            aperture_gain(&ApertureAntenna::base_station(), 28e9),
            aperture_gain(&ApertureAntenna::user_equipment(), 28e9),
        );
        assert!((c.effective_loss_db - 33.39).abs() < 0.01);

        let c = effective_channel(40.0, 30.0, 20.0);
        assert!(c.clamped);
        assert_eq!(c.stage.w(), 1.0);
        assert_eq!(c.stage.g(), 1.0);
    }

    #[test]
    fn noise_examples() {
        assert!((noise_power_dbm(400e6, 5.0).unwrap() + 82.98).abs() < 5e-3);
        assert_eq!(noise_power_dbm(1.0, 0.0).unwrap(), -174.0);
        assert!((noise_power_dbm(20e6, 9.0).unwrap() + 91.99).abs() < 5e-3);
        assert!(noise_power_dbm(0.0, 5.0).is_err());
    }

    #[test]
    fn invalid_models() {
        assert!(PathLossModel::new(0.0, 2.0, 0.0).is_err());
        assert!(PathLossModel::new(1e9, 0.0, 0.0).is_err());
        assert!(PathLossModel::new(1e9, 2.0, -1.0).is_err());
        assert!(PathLossModel::preset(5.0).is_err());
        assert!(ApertureAntenna::new(0.0, 1.0).is_err());
        assert!(ApertureAntenna::new(0.5, 0.0).is_err());
    }

    #[test]
    fn shadowing_draws_are_zero_mean() {
        let sigma = 8.98;
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| normal.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * sigma / (n as f64).sqrt());
    }

    proptest! {
        #[test]
        fn matches_generic_passive(pl in 0.0f64..200.0, gt in 0.0f64..50.0, gr in 0.0f64..20.0) {
            prop_assume!(pl - gt - gr >= 0.0);
            let c = effective_channel(pl, gt, gr);
            let p = stage_of(&DeviceSpec::GenericPassive { loss_db: pl - gt - gr }).unwrap();
            prop_assert!(((c.stage.w() - p.stage.w()) / p.stage.w()).abs() < 1e-12);
            prop_assert!(((c.stage.g() - p.stage.g()) / p.stage.g()).abs() < 1e-12);
        }

        #[test]
        fn gain_scales_with_frequency(f1 in 1e8f64..1e11, k in 1.01f64..20.0, eta in 0.1f64..1.0, a in 1e-4f64..4.0) {
            let ant = ApertureAntenna::new(eta, a).unwrap();
            let d = aperture_gain(&ant, f1 * k) - aperture_gain(&ant, f1);
            prop_assert!((d - 20.0 * k.log10()).abs() < 1e-9);
        }

        #[test]
        fn path_loss_monotone(d1 in 1.0f64..5000.0, dd in 0.001f64..1000.0, n in 1.0f64..5.0) {
            let m = PathLossModel::new(17e9, n, 0.0).unwrap();
            prop_assert!(path_loss(&m, d1 + dd, 0.0) > path_loss(&m, d1, 0.0));
        }
    }
}
