use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::drop::evaluate_drop;
use super::{AntennaMode, DropResult, Scenario};
use crate::error::{Error, Result};
use crate::units::linear_to_db;

/// Cartesian grid of drops. Seeds run `base_seed .. base_seed + n_seeds`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignGrid {
    pub base: Scenario,
    pub frequencies_ghz: Vec<f64>,
    pub antenna_modes: Vec<AntennaMode>,
    pub n_bs: Vec<usize>,
    pub n_seeds: u64,
    pub base_seed: u64,
    /// Per-link cap used for omni cells instead of `base.per_link_cap_dbm`.
    pub omni_per_link_cap_dbm: Option<f64>,
}

impl Default for CampaignGrid {
    fn default() -> Self {
        Self {
            base: Scenario::default(),
            frequencies_ghz: vec![3.5, 17.0, 28.0],
            antenna_modes: vec![AntennaMode::Omni, AntennaMode::Directional],
            n_bs: vec![1, 5, 10, 15, 20],
            n_seeds: 20,
            base_seed: 0,
            omni_per_link_cap_dbm: Some(30.0),
        }
    }
}

impl CampaignGrid {
    fn cells(&self) -> Vec<(f64, AntennaMode, usize)> {
        let mut cells = Vec::new();
        for &f in &self.frequencies_ghz {
            for &m in &self.antenna_modes {
                for &n in &self.n_bs {
                    cells.push((f, m, n));
                }
            }
        }
        cells
    }

    pub fn scenario(&self, frequency_ghz: f64, mode: AntennaMode, n_bs: usize, seed: u64) -> Scenario {
        let mut s = Scenario {
            frequency_ghz,
            antenna_mode: mode,
            n_bs,
            seed,
            ..self.base.clone()
        };
        if let (AntennaMode::Omni, Some(cap)) = (mode, self.omni_per_link_cap_dbm) {
            s.per_link_cap_dbm = cap;
        }
        s
    }

    fn validate(&self) -> Result<()> {
        if self.frequencies_ghz.is_empty() || self.antenna_modes.is_empty() || self.n_bs.is_empty() {
            return Err(Error::InvalidArgument("campaign grid has an empty axis".into()));
        }
        if self.n_seeds == 0 {
            return Err(Error::InvalidArgument("need at least one seed".into()));
        }
        for (f, m, n) in self.cells() {
            self.scenario(f, m, n, self.base_seed).validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DropRow {
    pub frequency_ghz: f64,
    pub antenna_mode: AntennaMode,
    pub n_bs: usize,
    pub seed: u64,
    pub result: DropResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub frequency_ghz: f64,
    pub antenna_mode: AntennaMode,
    pub n_bs: usize,
    pub n_seeds: u64,
    /// dB of the seed-mean linear W.
    pub wf_mean_db: f64,
    /// Sample standard deviation of per-seed WF in dB.
    pub wf_std_db: f64,
    pub p_total_mean_kw_per_km2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Campaign {
    pub drops: Vec<DropRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl Campaign {
    pub fn aggregate(&self, frequency_ghz: f64, mode: AntennaMode, n_bs: usize) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|a| a.frequency_ghz == frequency_ghz && a.antenna_mode == mode && a.n_bs == n_bs)
    }
}

fn aggregate(rows: &[DropRow]) -> AggregateRow {
    let n = rows.len() as f64;
    let mean_w = rows.iter().map(|r| r.result.w_system).sum::<f64>() / n;
    let db: Vec<f64> = rows.iter().map(|r| r.result.wf_system_db).collect();
    let mean_db = db.iter().sum::<f64>() / n;
    let std = if rows.len() > 1 {
        (db.iter().map(|x| (x - mean_db).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let first = &rows[0];
    AggregateRow {
        frequency_ghz: first.frequency_ghz,
        antenna_mode: first.antenna_mode,
        n_bs: first.n_bs,
        n_seeds: rows.len() as u64,
        wf_mean_db: linear_to_db(mean_w),
        wf_std_db: std,
        p_total_mean_kw_per_km2: rows.iter().map(|r| r.result.p_total_per_km2_w).sum::<f64>() / n / 1e3,
    }
}

/// Run every drop of the grid on `jobs` worker threads (default: all
/// cores). Row order is the grid order and does not depend on `jobs`.
pub fn run_campaign(grid: &CampaignGrid, jobs: Option<usize>) -> Result<Campaign> {
    grid.validate()?;
    let tasks: Vec<(f64, AntennaMode, usize, u64)> = grid
        .cells()
        .into_iter()
        .flat_map(|(f, m, n)| (0..grid.n_seeds).map(move |k| (f, m, n, grid.base_seed + k)))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::InvalidArgument("jobs must be ≥ 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let drops: Vec<DropRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(f, m, n, seed)| {
                evaluate_drop(&grid.scenario(f, m, n, seed)).map(|result| DropRow {
                    frequency_ghz: f,
                    antenna_mode: m,
                    n_bs: n,
                    seed,
                    result,
                })
            })
            .collect::<Result<_>>()
    })?;

    let aggregates = drops.chunks(grid.n_seeds as usize).map(aggregate).collect();
    Ok(Campaign { drops, aggregates })
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

pub fn write_drops_csv<W: Write>(campaign: &Campaign, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "frequency_ghz",
        "antenna_mode",
        "n_bs",
        "seed",
        "wf_system_db",
        "p_total_kw_per_km2",
        "p_nonpath_kw_per_km2",
        "mean_snr_db",
        "frac_ue_meeting_target",
    ])?;
    for d in &campaign.drops {
        let r = &d.result;
        w.write_record([
            d.frequency_ghz.to_string(),
            d.antenna_mode.as_str().to_string(),
            d.n_bs.to_string(),
            d.seed.to_string(),
            num(r.wf_system_db),
            num(r.p_total_per_km2_w / 1e3),
            num(r.p_non_path_per_km2_w / 1e3),
            num(r.snr.mean_db),
            num(r.snr.frac_meeting_target),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(campaign: &Campaign, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "frequency_ghz",
        "antenna_mode",
        "n_bs",
        "n_seeds",
        "wf_mean_db",
        "wf_std_db",
        "p_total_mean_kw_per_km2",
    ])?;
    for a in &campaign.aggregates {
        w.write_record([
            a.frequency_ghz.to_string(),
            a.antenna_mode.as_str().to_string(),
            a.n_bs.to_string(),
            a.n_seeds.to_string(),
            num(a.wf_mean_db),
            num(a.wf_std_db),
            num(a.p_total_mean_kw_per_km2),
        ])?;
    }
    w.flush()?;
    Ok(())
}
