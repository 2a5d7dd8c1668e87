use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::layout::{generate_layout, Layout};
use super::power::power_control;
use super::rng::Streams;
use super::serving::assign_serving_sets;
use super::{DropResult, Scenario, SnrStats};
use crate::channel::{distance_3d, effective_channel, path_loss};
use crate::error::Result;
use crate::parallel::{combine_branches, mino_compose, mino_first_stage, Branch, CombiningMode};
use crate::stage::Stage;
use crate::units::{db_to_linear, linear_to_db, LinearRatio, Power};

/// One serving link as seen by the evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinkSpec {
    pub bs: usize,
    /// Path loss minus antenna gains, dB.
    pub effective_loss_db: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinkTrace {
    pub ue: usize,
    pub bs: usize,
    pub effective_loss_db: f64,
    pub w_channel: f64,
    pub clamped: bool,
    pub p_tx_w: f64,
    pub p_rx_w: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UeTrace {
    /// None when the UE has no links.
    pub w_parallel: Option<f64>,
    pub p_rx_w: f64,
    pub snr_db: Option<f64>,
}

/// Everything needed to audit a drop bottom-up.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DropTrace {
    pub links: Vec<LinkTrace>,
    pub ues: Vec<UeTrace>,
}

fn links_for_layout(scenario: &Scenario, layout: &Layout) -> Result<Vec<Vec<LinkSpec>>> {
    let model = scenario.path_loss_model()?;
    let (g_tx, g_rx) = scenario.antenna_gains_db();
    let dh = scenario.bs_height_m - scenario.ue_height_m;
    let sets = assign_serving_sets(layout, scenario.serving_radius_m, scenario.nearest_bs_fallback);
    let streams = Streams::new(scenario.seed);
    Ok(layout
        .ue
        .iter()
        .zip(&sets)
        .enumerate()
        .map(|(u, (pos, set))| {
            let mut rng = streams.shadowing(u);
            let z: Vec<f64> = (0..layout.bs.len())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            set.iter()
                .map(|&b| {
                    let d = distance_3d(layout.bs[b].distance(pos), dh);
                    let pl = path_loss(&model, d, model.sigma_db() * z[b]);
                    LinkSpec { bs: b, effective_loss_db: pl - g_tx - g_rx }
                })
                .collect()
        })
        .collect())
}

/// Evaluate explicit links: `ue_links[u]` are UE `u`'s serving links. The
/// scenario supplies device W/G, power limits, noise and non-path power;
/// its `n_ue` is replaced by `ue_links.len()`.
pub fn evaluate_links(scenario: &Scenario, ue_links: &[Vec<LinkSpec>]) -> Result<(DropResult, DropTrace)> {
    let channels: Vec<Vec<_>> = ue_links
        .iter()
        .map(|ue| ue.iter().map(|l| effective_channel(l.effective_loss_db, 0.0, 0.0)).collect())
        .collect();
    let loss: Vec<Vec<(usize, f64)>> = ue_links
        .iter()
        .zip(&channels)
        .map(|(ue, ch)| ue.iter().zip(ch).map(|(l, c)| (l.bs, c.stage.w())).collect())
        .collect();

    let noise_w = Power::from_dbm(scenario.noise_dbm()?).watts();
    let target_w = scenario.target_rx_power()?.watts();
    let plan = power_control(
        &loss,
        scenario.n_bs,
        target_w,
        Power::from_dbm(scenario.per_link_cap_dbm).watts(),
        Power::from_dbm(scenario.per_bs_budget_dbm).watts(),
        noise_w,
        scenario.allocation,
    );

    let bs = Stage::new("bs", scenario.w_bs, db_to_linear(scenario.g_bs_db))?;
    let mut links = Vec::new();
    let mut ues = Vec::with_capacity(ue_links.len());
    let mut received = Vec::new();
    let mut w_parallel = Vec::new();
    for (u, ue) in ue_links.iter().enumerate() {
        let rx = &plan.p_rx[u];
        let p_rx: f64 = rx.iter().sum();
        let mut branches = Vec::with_capacity(ue.len());
        for (k, l) in ue.iter().enumerate() {
            let ch = &channels[u][k];
            // W_C + (W_BS − 1)/G_C
            branches.push(Branch::new(bs.then(&ch.stage), rx[k])?);
            links.push(LinkTrace {
                ue: u,
                bs: l.bs,
                effective_loss_db: l.effective_loss_db,
                w_channel: ch.stage.w(),
                clamped: ch.clamped,
                p_tx_w: plan.p_tx[u][k],
                p_rx_w: rx[k],
            });
        }
        let w_par = if p_rx > 0.0 {
            let w = combine_branches(&branches, CombiningMode::NonCoherent)?.value();
            received.push(Power::from_watts(p_rx)?);
            w_parallel.push(w);
            Some(w)
        } else {
            None
        };
        ues.push(UeTrace { w_parallel: w_par, p_rx_w: p_rx, snr_db: plan.snr_db[u] });
    }

    let g_ue = db_to_linear(scenario.g_ue_db);
    let w1 = mino_first_stage(&received, &w_parallel)?;
    let w_sys = mino_compose(w1, LinearRatio::new(scenario.w_ue)?, LinearRatio::new(g_ue)?)?.value();
    let p_rx_total: f64 = received.iter().map(|p| p.watts()).sum();
    let p_out = g_ue * p_rx_total;
    let p_signal_path = w_sys * p_out;
    let p_non_path =
        scenario.n_bs as f64 * scenario.p_non_path_bs_w + ue_links.len() as f64 * scenario.p_non_path_ue_w;
    let area = scenario.area_km2();
    let signal_km2 = p_signal_path / area;
    let non_path_km2 = if scenario.scale_non_path_by_area { p_non_path / area } else { p_non_path };

    let result = DropResult {
        w_first_stage: w1.value(),
        w_system: w_sys,
        wf_system_db: linear_to_db(w_sys),
        p_out_w: p_out,
        p_signal_path_w: p_signal_path,
        p_non_path_w: p_non_path,
        p_total_w: p_signal_path + p_non_path,
        p_signal_path_per_km2_w: signal_km2,
        p_non_path_per_km2_w: non_path_km2,
        p_total_per_km2_w: signal_km2 + non_path_km2,
        snr: snr_stats(&plan.snr_db, scenario.target_snr_db),
        n_served_ue: received.len(),
        n_links: links.len(),
        n_capped_links: plan.n_capped_links,
        n_clamped_links: links.iter().filter(|l| l.clamped).count(),
    };
    Ok((result, DropTrace { links, ues }))
}

/// Mean and 5th percentile over served UEs; the target fraction counts
/// unserved UEs as failing.
fn snr_stats(snr_db: &[Option<f64>], target_db: f64) -> SnrStats {
    let mut served: Vec<f64> = snr_db.iter().flatten().copied().collect();
    if served.is_empty() {
        return SnrStats { mean_db: f64::NAN, p5_db: f64::NAN, frac_meeting_target: 0.0 };
    }
    served.sort_by(f64::total_cmp);
    let mean_db = served.iter().sum::<f64>() / served.len() as f64;
    let rank = ((0.05 * served.len() as f64).ceil() as usize).clamp(1, served.len());
    let meeting = served.iter().filter(|&&s| s >= target_db - 1e-9).count();
    SnrStats {
        mean_db,
        p5_db: served[rank - 1],
        frac_meeting_target: meeting as f64 / snr_db.len() as f64,
    }
}

pub fn evaluate_drop_traced(scenario: &Scenario) -> Result<(DropResult, DropTrace)> {
    scenario.validate()?;
    let layout = generate_layout(scenario)?;
    let links = links_for_layout(scenario, &layout)?;
    evaluate_links(scenario, &links)
}

pub fn evaluate_drop(scenario: &Scenario) -> Result<DropResult> {
    evaluate_drop_traced(scenario).map(|(r, _)| r)
}
