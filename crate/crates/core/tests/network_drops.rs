use wf_core::netsim::{evaluate_drop_traced, AntennaMode, CampaignGrid, Scenario};
use wf_core::units::db_to_linear;

fn bottom_up(s: &Scenario, trace: &wf_core::netsim::DropTrace) -> f64 {
    let g_ue = db_to_linear(s.g_ue_db);
    let links: f64 = trace
        .links
        .iter()
        .map(|l| l.p_rx_w + (l.w_channel - 1.0) * l.p_rx_w + (s.w_bs - 1.0) * l.p_tx_w)
        .sum();
    links + trace.ues.iter().map(|u| (s.w_ue * g_ue - 1.0) * u.p_rx_w).sum::<f64>()
}

#[test]
fn conservation_on_every_grid_cell() {
    let grid = CampaignGrid { base: Scenario { n_ue: 128, ..Scenario::default() }, ..CampaignGrid::default() };
    for &f in &grid.frequencies_ghz {
        for &m in &grid.antenna_modes {
            for &n in &grid.n_bs {
                for seed in 0..2 {
                    let s = grid.scenario(f, m, n, seed);
                    let (r, t) = evaluate_drop_traced(&s).unwrap();
                    let rel = (bottom_up(&s, &t) - r.p_signal_path_w).abs() / r.p_signal_path_w;
                    assert!(rel < 1e-9, "{f} {m:?} {n} {seed}: {rel}");
                    assert!(r.w_system >= s.w_ue);
                }
            }
        }
    }
}

#[test]
fn common_random_numbers_across_modes() {
    let s = Scenario { n_ue: 64, n_bs: 4, seed: 77, ..Scenario::default() };
    let (_, dir) = evaluate_drop_traced(&s).unwrap();
    let (_, omni) = evaluate_drop_traced(&Scenario { antenna_mode: AntennaMode::Omni, ..s }).unwrap();
    assert_eq!(dir.links.len(), omni.links.len());
    let gains = 49.42 + 18.97;
    for (d, o) in dir.links.iter().zip(&omni.links) {
        assert_eq!((d.ue, d.bs), (o.ue, o.bs));
        assert!((o.effective_loss_db - d.effective_loss_db - gains).abs() < 0.01);
    }
}
