//! Datasheet-level device models, radio unit (RU) and user equipment (UE)
//! composition, and the end-to-end RU → channel → UE link.
//!
//! Antenna stages carry only their efficiency as gain (G = 1/W ≤ 1). Directive
//! gain belongs to the channel, see [`crate::channel::effective_channel`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel::{combine_branches, Branch, CombiningMode};
use crate::stage::{cascade, Stage};
use crate::units::{db_to_linear, linear_to_db, Power};

/// Reflection coefficient magnitude from VSWR.
pub fn reflection_coefficient(vswr: f64) -> Result<f64> {
    if !(vswr >= 1.0) || !vswr.is_finite() {
        return Err(Error::InvalidArgument(format!("VSWR must be finite and ≥ 1, got {vswr}")));
    }
    Ok((vswr - 1.0) / (vswr + 1.0))
}

/// Mismatch loss −10·log10(1 − |Γ|²) in dB.
pub fn mismatch_loss_db(vswr: f64) -> Result<f64> {
    let gamma = reflection_coefficient(vswr)?;
    Ok(-linear_to_db(1.0 - gamma * gamma))
}

/// −20·log10|Γ| in dB (a return loss; infinite for a perfect match).
pub fn reflection_loss_db(vswr: f64) -> Result<f64> {
    let gamma = reflection_coefficient(vswr)?;
    Ok(-20.0 * gamma.log10())
}

#[derive(Clone, Debug, PartialEq)]
pub enum PaModel {
    /// Power-added efficiency P_out/(P_DC + P_in) and datasheet gain.
    Pae { pae: f64, gain_db: f64 },
    Measured { p_dc: Power, p_in: Power, p_out: Power },
}

#[derive(Clone, Debug, PartialEq)]
pub enum LnaModel {
    /// W = 1: an ideally efficient high-gain amplifier.
    IdealW1,
    /// W = 1/(FoM·SNR_in·(F − 1)·N_in), from P_LNA = G/(FoM·(F − 1)).
    FigureOfMerit {
        /// LNA figure of merit, 1/W.
        fom: f64,
        noise_factor: f64,
        snr_in: f64,
        input_noise: Power,
    },
}

/// One component, parameterised the way datasheets report it.
#[derive(Clone, Debug, PartialEq)]
pub enum DeviceSpec {
    Mixer {
        conversion_loss_db: f64,
        insertion_loss_db: f64,
    },
    /// Total loss is reflection loss plus insertion loss, both in dB. When
    /// `reflection_loss_db` is absent it is derived from `vswr` as −20·log10|Γ|.
    PhaseShifter {
        insertion_loss_db: f64,
        reflection_loss_db: Option<f64>,
        vswr: Option<f64>,
    },
    Antenna {
        radiation_efficiency: f64,
        vswr: f64,
        include_mismatch: bool,
    },
    PowerAmplifier {
        model: PaModel,
        quiescent: Power,
    },
    Lna {
        gain_db: f64,
        model: LnaModel,
        quiescent: Power,
    },
    Dac {
        efficiency: f64,
    },
    /// Walden figure of merit in J per conversion step.
    Adc {
        fom: f64,
        sample_rate_hz: f64,
        bits: u32,
    },
    GenericActive {
        p_dc: Power,
        p_in: Power,
        p_out: Power,
    },
    GenericPassive {
        loss_db: f64,
    },
}

/// A device reduced to its signal-path stage and its off-path draw.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviceStage {
    pub stage: Stage,
    pub non_path: Power,
}

fn unit_interval(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(Error::OutOfUnitInterval { what, value })
    }
}

fn non_negative_db(what: &str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidArgument(format!("{what} must be ≥ 0 dB, got {value}")))
    }
}

fn positive_power(what: &'static str, p: Power) -> Result<f64> {
    let w = p.watts();
    if w > 0.0 {
        Ok(w)
    } else {
        Err(Error::NonPositive { what, value: w })
    }
}

fn passive_db(label: &str, loss_db: f64) -> Result<Stage> {
    let l = db_to_linear(loss_db);
    Stage::new(label, l, 1.0 / l)
}

fn active(label: &str, p_dc: Power, p_in: Power, p_out: Power) -> Result<Stage> {
    let dc = positive_power("P_DC", p_dc)?;
    let pin = positive_power("P_in", p_in)?;
    let pout = positive_power("P_out", p_out)?;
    if pout >= dc + pin {
        return Err(Error::InvalidArgument(format!(
            "{label}: P_out ({pout} W) must be below P_DC + P_in ({} W)",
            dc + pin
        )));
    }
    Stage::new(label, (dc + pin) / pout, pout / pin)
}

impl DeviceSpec {
    pub fn label(&self) -> &'static str {
        match self {
            DeviceSpec::Mixer { .. } => "mixer",
            DeviceSpec::PhaseShifter { .. } => "phase_shifter",
            DeviceSpec::Antenna { .. } => "antenna",
            DeviceSpec::PowerAmplifier { .. } => "pa",
            DeviceSpec::Lna { .. } => "lna",
            DeviceSpec::Dac { .. } => "dac",
            DeviceSpec::Adc { .. } => "adc",
            DeviceSpec::GenericActive { .. } => "active",
            DeviceSpec::GenericPassive { .. } => "passive",
        }
    }

    /// Total phase-shifter loss in dB.
    fn phase_shifter_loss_db(
        insertion_loss_db: f64,
        reflection_loss_db: Option<f64>,
        vswr: Option<f64>,
    ) -> Result<f64> {
        let ins = non_negative_db("phase shifter insertion loss", insertion_loss_db)?;
        let refl = match (reflection_loss_db, vswr) {
            (Some(r), _) => non_negative_db("phase shifter reflection loss", r)?,
            (None, Some(v)) => {
                let r = self::reflection_loss_db(v)?;
                if !r.is_finite() {
                    return Err(Error::InvalidArgument(
                        "phase shifter reflection loss from VSWR = 1 is unbounded; give reflection_loss_db".into(),
                    ));
                }
                r
            }
            (None, None) => 0.0,
        };
        Ok(refl + ins)
    }
}

/// Convert a datasheet spec into its stage and non-path power.
pub fn stage_of(spec: &DeviceSpec) -> Result<DeviceStage> {
    let label = spec.label();
    let mut non_path = Power::ZERO;
    let stage = match spec {
        DeviceSpec::Mixer {
            conversion_loss_db,
            insertion_loss_db,
        } => {
            let con = non_negative_db("mixer conversion loss", *conversion_loss_db)?;
            let ins = non_negative_db("mixer insertion loss", *insertion_loss_db)?;
            passive_db(label, con + ins)?
        }
        DeviceSpec::PhaseShifter {
            insertion_loss_db,
            reflection_loss_db,
            vswr,
        } => passive_db(
            label,
            DeviceSpec::phase_shifter_loss_db(*insertion_loss_db, *reflection_loss_db, *vswr)?,
        )?,
        DeviceSpec::Antenna {
            radiation_efficiency,
            vswr,
            include_mismatch,
        } => {
            let eta_rad = unit_interval("antenna radiation efficiency", *radiation_efficiency)?;
            let gamma = reflection_coefficient(*vswr)?;
            let eta = if *include_mismatch {
                eta_rad * (1.0 - gamma * gamma)
            } else {
                eta_rad
            };
            Stage::new(label, 1.0 / eta, eta)?
        }
        DeviceSpec::PowerAmplifier { model, quiescent } => {
            non_path = *quiescent;
            match model {
                PaModel::Pae { pae, gain_db } => {
                    let pae = unit_interval("PAE", *pae)?;
                    Stage::new(label, 1.0 / pae, db_to_linear(*gain_db))?
                }
                PaModel::Measured { p_dc, p_in, p_out } => active(label, *p_dc, *p_in, *p_out)?,
            }
        }
        DeviceSpec::Lna {
            gain_db,
            model,
            quiescent,
        } => {
            non_path = *quiescent;
            let g = db_to_linear(*gain_db);
            match model {
                LnaModel::IdealW1 => Stage::ideal(label, g)?,
                LnaModel::FigureOfMerit {
                    fom,
                    noise_factor,
                    snr_in,
                    input_noise,
                } => {
                    if !(*fom > 0.0 && *snr_in > 0.0 && *noise_factor > 1.0) {
                        return Err(Error::InvalidArgument(format!(
                            "LNA figure-of-merit model needs FoM > 0, SNR_in > 0 and F > 1 (got {fom}, {snr_in}, {noise_factor})"
                        )));
                    }
                    let n_in = positive_power("LNA input noise", *input_noise)?;
                    let w = 1.0 / (fom * snr_in * (noise_factor - 1.0) * n_in);
                    Stage::new(label, w, g)?
                }
            }
        }
        DeviceSpec::Dac { efficiency } => {
            let eta = unit_interval("DAC efficiency", *efficiency)?;
            Stage::new(label, 1.0 / eta, 1.0)?
        }
        DeviceSpec::Adc {
            fom,
            sample_rate_hz,
            bits,
        } => {
            if !(*fom > 0.0 && *sample_rate_hz > 0.0 && *bits >= 1) {
                return Err(Error::InvalidArgument(format!(
                    "ADC needs FoM > 0, f_s > 0 and at least one bit (got {fom}, {sample_rate_hz}, {bits})"
                )));
            }
            non_path = Power::from_watts(fom * sample_rate_hz * 2f64.powi(*bits as i32))?;
            Stage::ideal(label, 1.0)?
        }
        DeviceSpec::GenericActive { p_dc, p_in, p_out } => active(label, *p_dc, *p_in, *p_out)?,
        DeviceSpec::GenericPassive { loss_db } => {
            passive_db(label, non_negative_db("passive loss", *loss_db)?)?
        }
    };
    Ok(DeviceStage { stage, non_path })
}

/// W of an amplifier from Walker's PAE#2 = (P_out − P_in)/P_DC:
/// W = (1/PAE#2)·(1 + P_in/P_DC)·(1 − 1/G).
pub fn pae_from_walker(pae2: f64, p_in: Power, p_dc: Power, gain: f64) -> Result<f64> {
    let pae2 = unit_interval("PAE#2", pae2)?;
    let dc = positive_power("P_DC", p_dc)?;
    if !(gain > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Walker PAE needs gain > 1, got {gain}"
        )));
    }
    let w = (1.0 / pae2) * (1.0 + p_in.watts() / dc) * (1.0 - 1.0 / gain);
    crate::stage::check_waste(w)
}

/// Radio unit: DAC → mixer → N_TX identical (phase shifter → PA → antenna).
#[derive(Clone, Debug, PartialEq)]
pub struct RuSpec {
    pub dac: DeviceSpec,
    pub mixer: DeviceSpec,
    pub phase_shifter: DeviceSpec,
    pub pa: DeviceSpec,
    pub antenna: DeviceSpec,
    pub n_tx: u32,
    /// Local-oscillator draw, counted as non-path power.
    pub lo_power: Option<Power>,
}

/// User equipment: N_RX identical (antenna → LNA → phase shifter) → mixer → ADC.
#[derive(Clone, Debug, PartialEq)]
pub struct UeSpec {
    pub antenna: DeviceSpec,
    pub lna: DeviceSpec,
    pub phase_shifter: DeviceSpec,
    pub mixer: DeviceSpec,
    pub adc: Option<DeviceSpec>,
    pub n_rx: u32,
    pub lo_power: Option<Power>,
}

impl RuSpec {
    /// Component values of the reference radio unit. `include_mismatch`
    /// toggles the antenna VSWR term.
    pub fn reference(include_mismatch: bool) -> Self {
        Self {
            dac: DeviceSpec::Dac { efficiency: 0.91 },
            mixer: DeviceSpec::Mixer {
                conversion_loss_db: 8.2,
                insertion_loss_db: 0.0,
            },
            phase_shifter: DeviceSpec::PhaseShifter {
                insertion_loss_db: 3.5,
                reflection_loss_db: Some(14.0),
                vswr: Some(1.5),
            },
            pa: DeviceSpec::PowerAmplifier {
                model: PaModel::Pae {
                    pae: 0.48,
                    gain_db: 50.0,
                },
                quiescent: Power::ZERO,
            },
            antenna: DeviceSpec::Antenna {
                radiation_efficiency: 0.6,
                vswr: 1.5,
                include_mismatch,
            },
            n_tx: 1,
            lo_power: None,
        }
    }

    /// Stages along one transmit chain, source-first.
    pub fn chain(&self) -> Result<Vec<DeviceStage>> {
        [&self.dac, &self.mixer, &self.phase_shifter, &self.pa, &self.antenna]
            .into_iter()
            .map(stage_of)
            .collect()
    }
}

impl UeSpec {
    pub fn reference(include_mismatch: bool) -> Self {
        Self {
            antenna: DeviceSpec::Antenna {
                radiation_efficiency: 0.7,
                vswr: 1.5,
                include_mismatch,
            },
            lna: DeviceSpec::Lna {
                gain_db: 20.0,
                model: LnaModel::IdealW1,
                quiescent: Power::ZERO,
            },
            phase_shifter: DeviceSpec::PhaseShifter {
                insertion_loss_db: 6.0,
                reflection_loss_db: None,
                vswr: None,
            },
            mixer: DeviceSpec::Mixer {
                conversion_loss_db: 6.7,
                insertion_loss_db: 0.0,
            },
            adc: None,
            n_rx: 1,
            lo_power: None,
        }
    }

    /// Stages along one receive chain, source-first (ADC excluded: it is an
    /// ideal wire on the signal path).
    pub fn chain(&self) -> Result<Vec<DeviceStage>> {
        [&self.antenna, &self.lna, &self.phase_shifter, &self.mixer]
            .into_iter()
            .map(stage_of)
            .collect()
    }
}

/// Reduce `n` identical chains to the W of the parallel group (equal
/// received power per chain, non-coherent).
fn identical_parallel(chain: &Stage, n: u32) -> Result<Stage> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one parallel chain".into()));
    }
    let branches: Vec<Branch> = (0..n)
        .map(|_| Branch::new(chain.clone(), 1.0))
        .collect::<Result<_>>()?;
    let w = combine_branches(&branches, CombiningMode::NonCoherent)?;
    Stage::new(chain.label(), w.value(), chain.g())
}

fn stages(devs: &[DeviceStage]) -> Vec<Stage> {
    devs.iter().map(|d| d.stage.clone()).collect()
}

pub fn build_ru(spec: &RuSpec) -> Result<DeviceStage> {
    let devs = spec.chain()?;
    let s = stages(&devs);
    let front = cascade(&s[..2])?;
    let parallel = identical_parallel(&cascade(&s[2..])?, spec.n_tx)?;
    // W_RU = W_M∥ + (W_0 − 1)/G_M∥
    let w = parallel.w() + (front.w() - 1.0) / parallel.g();
    let stage = Stage::new("ru", w, front.g() * parallel.g())?;

    let per_chain: f64 = devs[2..].iter().map(|d| d.non_path.watts()).sum();
    let shared: f64 = devs[..2].iter().map(|d| d.non_path.watts()).sum();
    let lo = spec.lo_power.map_or(0.0, Power::watts);
    let non_path = Power::from_watts(shared + per_chain * f64::from(spec.n_tx) + lo)?;
    Ok(DeviceStage { stage, non_path })
}

pub fn build_ue(spec: &UeSpec) -> Result<DeviceStage> {
    let devs = spec.chain()?;
    let s = stages(&devs);
    let parallel = identical_parallel(&cascade(&s[..3])?, spec.n_rx)?;
    let mixer = &s[3];
    // W_UE = W_mix + (W_M∥ − 1)/G_mix
    let w = mixer.w() + (parallel.w() - 1.0) / mixer.g();
    let stage = Stage::new("ue", w, parallel.g() * mixer.g())?;

    let per_chain: f64 = devs[..3].iter().map(|d| d.non_path.watts()).sum();
    let adc = match &spec.adc {
        Some(a) => stage_of(a)?.non_path.watts(),
        None => 0.0,
    };
    let lo = spec.lo_power.map_or(0.0, Power::watts);
    let non_path =
        Power::from_watts(per_chain * f64::from(spec.n_rx) + devs[3].non_path.watts() + adc + lo)?;
    Ok(DeviceStage { stage, non_path })
}

/// RU → channel → UE:
/// W = W_UE + (W_C − 1)/G_UE + (W_RU − 1)/(G_C·G_UE).
pub fn end_to_end(ru: &Stage, channel: &Stage, ue: &Stage) -> Result<Stage> {
    let w = ue.w() + (channel.w() - 1.0) / ue.g() + (ru.w() - 1.0) / (channel.g() * ue.g());
    Stage::new("system", w, ru.g() * channel.g() * ue.g())
}
