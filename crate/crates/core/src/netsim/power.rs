use serde::Serialize;

use super::Allocation;
use crate::units::linear_to_db;

/// Per-UE, per-serving-link transmit and receive powers (watts), in the same
/// order as the input links.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerPlan {
    pub p_tx: Vec<Vec<f64>>,
    pub p_rx: Vec<Vec<f64>>,
    /// None for a UE without links.
    pub snr_db: Vec<Option<f64>>,
    pub n_capped_links: usize,
}

/// `links[u]` lists `(bs, L)` with L the linear effective loss. Each UE's
/// links first share the required receive power `target_rx_w` (non-coherent
/// sum), then each link is clipped to `per_link_cap_w`, then any BS above
/// `per_bs_budget_w` has all its links scaled down by the same factor.
pub fn power_control(
    links: &[Vec<(usize, f64)>],
    n_bs: usize,
    target_rx_w: f64,
    per_link_cap_w: f64,
    per_bs_budget_w: f64,
    noise_w: f64,
    allocation: Allocation,
) -> PowerPlan {
    let mut n_capped_links = 0;
    let mut p_tx: Vec<Vec<f64>> = links
        .iter()
        .map(|ue| {
            let weights: Vec<f64> = ue
                .iter()
                .map(|&(_, l)| match allocation {
                    Allocation::Equal => 1.0,
                    Allocation::ProportionalToGain => 1.0 / l,
                })
                .collect();
            // Σ c·w_i/L_i = target
            let denom: f64 = ue.iter().zip(&weights).map(|(&(_, l), w)| w / l).sum();
            let c = target_rx_w / denom;
            weights
                .iter()
                .map(|w| {
                    let p = c * w;
                    if p > per_link_cap_w {
                        n_capped_links += 1;
                        per_link_cap_w
                    } else {
                        p
                    }
                })
                .collect()
        })
        .collect();

    let mut load = vec![0.0; n_bs];
    for (ue, tx) in links.iter().zip(&p_tx) {
        for (&(b, _), p) in ue.iter().zip(tx) {
            load[b] += p;
        }
    }
    let scale: Vec<f64> = load
        .iter()
        .map(|&l| if l > per_bs_budget_w { per_bs_budget_w / l } else { 1.0 })
        .collect();
    for (ue, tx) in links.iter().zip(p_tx.iter_mut()) {
        for (&(b, _), p) in ue.iter().zip(tx.iter_mut()) {
            *p *= scale[b];
        }
    }

    let p_rx: Vec<Vec<f64>> = links
        .iter()
        .zip(&p_tx)
        .map(|(ue, tx)| ue.iter().zip(tx).map(|(&(_, l), p)| p / l).collect())
        .collect();
    let snr_db = p_rx
        .iter()
        .map(|rx| (!rx.is_empty()).then(|| linear_to_db(rx.iter().sum::<f64>() / noise_w)))
        .collect();
    PowerPlan { p_tx, p_rx, snr_db, n_capped_links }
}
