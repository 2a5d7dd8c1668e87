//! Waste factor of parallel structures.
//!
//! A group of parallel cascades feeding one combining point is reduced to a
//! single W referenced to the combined power at that point. Branch weights
//! are received powers (any common scale): only their ratios matter.
//!
//! Equal-gain combining is not a separate mode; callers express it through
//! the branch weights.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stage::{check_waste, Stage};
use crate::units::{LinearRatio, Power};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CombiningMode {
    /// Powers add; phases are independent.
    NonCoherent,
    /// Perfectly phase-aligned amplitudes add; power is |Σ√P|².
    Coherent,
}

/// One parallel cascade and its relative received power at the combiner.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub stage: Stage,
    pub weight: f64,
}

impl Branch {
    pub fn new(stage: Stage, weight: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "branch weight must be finite and non-negative, got {weight}"
            )));
        }
        Ok(Self { stage, weight })
    }
}

/// Combined power of parallel contributions with the given weights.
fn combined(weights: impl Iterator<Item = f64> + Clone, mode: CombiningMode) -> f64 {
    match mode {
        CombiningMode::NonCoherent => weights.sum(),
        CombiningMode::Coherent => {
            let amp: f64 = weights.map(f64::sqrt).sum();
            amp * amp
        }
    }
}

/// W of a parallel group at the input of the combining stage.
///
/// Non-coherent: Σγ·W / Σγ. Coherent: Σγ·W / |Σ√γ|², which can fall below
/// every branch W (and below 1) because of combining gain.
pub fn combine_branches(branches: &[Branch], mode: CombiningMode) -> Result<LinearRatio> {
    if branches.is_empty() {
        return Err(Error::InvalidArgument("no branches to combine".into()));
    }
    let weights = branches.iter().map(|b| b.weight);
    if weights.clone().all(|g| g == 0.0) {
        return Err(Error::AllZeroWeights);
    }
    let consumed: f64 = branches
        .iter()
        .filter(|b| b.weight > 0.0)
        .map(|b| b.weight * b.stage.w())
        .sum();
    LinearRatio::new(consumed / combined(weights, mode))
}

/// MISO: a parallel group followed by a single terminal stage.
///
/// W = W_terminal + (W_parallel − 1)/G_terminal; the gain is the terminal
/// gain, referenced to the combined input power. Fails with
/// [`Error::WasteBelowUnity`] if coherent combining gain pushes the
/// composite below the W = 1 floor.
pub fn miso_compose(branches: &[Branch], mode: CombiningMode, terminal: &Stage) -> Result<Stage> {
    let w_par = combine_branches(branches, mode)?.value();
    let w = terminal.w() + (w_par - 1.0) / terminal.g();
    Stage::new(format!("miso > {}", terminal.label()), w, terminal.g())
}

/// Gain of parallel receivers seen by a downstream combiner.
///
/// Non-coherent: ΣP·G / ΣP. Coherent: |Σ√(P·G)|² / ΣP.
pub fn parallel_gain(
    received: &[Power],
    gains: &[LinearRatio],
    mode: CombiningMode,
) -> Result<LinearRatio> {
    check_lengths("received powers", received.len(), "gains", gains.len())?;
    let total_in: f64 = received.iter().map(|p| p.watts()).sum();
    if total_in <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    let out = received
        .iter()
        .zip(gains)
        .map(|(p, g)| p.watts() * g.value());
    LinearRatio::new(combined(out, mode) / total_in)
}

/// Received power at each of N outputs from M transmitters.
///
/// `channel_w[i][j]` is the waste factor (loss) from transmitter `i` to
/// output `j`; `+inf` marks a link that delivers nothing.
pub fn received_power_matrix(
    tx_powers: &[Power],
    channel_w: &[Vec<f64>],
    mode: CombiningMode,
) -> Result<Vec<Power>> {
    check_lengths("tx powers", tx_powers.len(), "channel rows", channel_w.len())?;
    let n_out = channel_w.first().map_or(0, Vec::len);
    if n_out == 0 {
        return Err(Error::InvalidArgument("channel matrix has no outputs".into()));
    }
    for row in channel_w {
        check_lengths("channel row", row.len(), "first channel row", n_out)?;
        for &w in row {
            check_waste(w)?;
        }
    }
    Ok((0..n_out)
        .map(|j| {
            let parts = tx_powers
                .iter()
                .zip(channel_w)
                .map(move |(p, row)| p.watts() / row[j]);
            Power::raw(combined(parts, mode))
        })
        .collect())
}

/// First-stage W of an M-input N-output system: Σ P_j·W_∥,j / Σ P_j.
///
/// Outputs receiving no power drop out.
pub fn mino_first_stage(received: &[Power], w_parallel: &[f64]) -> Result<LinearRatio> {
    check_lengths("received powers", received.len(), "parallel W", w_parallel.len())?;
    let total: f64 = received.iter().map(|p| p.watts()).sum();
    if total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    let consumed: f64 = received
        .iter()
        .zip(w_parallel)
        .filter(|(p, _)| p.watts() > 0.0)
        .map(|(p, w)| p.watts() * w)
        .sum();
    LinearRatio::new(consumed / total)
}

/// W of the full M-input N-output system terminating into one path:
/// W = W_N∥ + (W¹ − 1)/G_N∥.
pub fn mino_compose(
    first_stage_w: LinearRatio,
    rx_w: LinearRatio,
    rx_g: LinearRatio,
) -> Result<LinearRatio> {
    let w1 = check_waste(first_stage_w.value())?;
    LinearRatio::new(rx_w.value() + (w1 - 1.0) / rx_g.value())
}

/// Intermediate values of a full M-input N-output evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct MinoBreakdown {
    pub received: Vec<Power>,
    /// Per-output W of the transmitters plus channels.
    pub w_parallel: Vec<f64>,
    pub w_first_stage: f64,
    pub rx_w: f64,
    pub rx_g: f64,
    pub w: f64,
}

/// Evaluate an M-input N-output system end to end.
///
/// Transmitter `i` (stage `tx[i]`, output `tx_powers[i]`) reaches output `j`
/// over a channel of loss `channel_w[i][j]`; each output `j` feeds receiver
/// `rx[j]`. `input_mode` governs combining at the receiver inputs and
/// `output_mode` the combination of receiver outputs into the sink. Each
/// output's parallel W uses that output's own per-link received powers as
/// branch weights.
pub fn mino_system(
    tx_powers: &[Power],
    tx: &[Stage],
    channel_w: &[Vec<f64>],
    rx: &[Stage],
    input_mode: CombiningMode,
    output_mode: CombiningMode,
) -> Result<MinoBreakdown> {
    check_lengths("tx powers", tx_powers.len(), "tx stages", tx.len())?;
    let received = received_power_matrix(tx_powers, channel_w, input_mode)?;
    check_lengths("receivers", rx.len(), "channel outputs", received.len())?;

    let mut w_parallel = Vec::with_capacity(rx.len());
    for j in 0..rx.len() {
        let mut branches = Vec::with_capacity(tx.len());
        for (i, t) in tx.iter().enumerate() {
            let loss = channel_w[i][j];
            if !loss.is_finite() {
                continue;
            }
            let link = t.then(&Stage::new("channel", loss, 1.0 / loss)?);
            branches.push(Branch::new(link, tx_powers[i].watts() / loss)?);
        }
        w_parallel.push(match combine_branches(&branches, input_mode) {
            Ok(w) => w.value(),
            Err(Error::AllZeroWeights) | Err(Error::InvalidArgument(_)) => 1.0,
            Err(e) => return Err(e),
        });
    }
    let w1 = mino_first_stage(&received, &w_parallel)?;

    let rx_branches = rx
        .iter()
        .zip(&received)
        .map(|(s, p)| Branch::new(s.clone(), p.watts() * s.g()))
        .collect::<Result<Vec<_>>>()?;
    let rx_w = combine_branches(&rx_branches, output_mode)?;
    let rx_gains: Vec<LinearRatio> = rx.iter().map(|s| LinearRatio::new(s.g())).collect::<Result<_>>()?;
    let rx_g = parallel_gain(&received, &rx_gains, output_mode)?;
    let w = mino_compose(w1, rx_w, rx_g)?;
    Ok(MinoBreakdown {
        received,
        w_parallel,
        w_first_stage: w1.value(),
        rx_w: rx_w.value(),
        rx_g: rx_g.value(),
        w: w.value(),
    })
}

fn check_lengths(left: &'static str, left_len: usize, right: &'static str, right_len: usize) -> Result<()> {
    if left_len == 0 {
        return Err(Error::InvalidArgument(format!("{left} is empty")));
    }
    if left_len != right_len {
        return Err(Error::LengthMismatch {
            left,
            left_len,
            right,
            right_len,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stage::{cascade, power_flow};
    use proptest::prelude::*;

    const NC: CombiningMode = CombiningMode::NonCoherent;
    const CO: CombiningMode = CombiningMode::Coherent;

    fn st(w: f64, g: f64) -> Stage {
        Stage::new("s", w, g).unwrap()
    }
    fn br(w: f64, gamma: f64) -> Branch {
        Branch::new(st(w, 1.0), gamma).unwrap()
    }
    fn pw(w: f64) -> Power {
        Power::from_watts(w).unwrap()
    }
    fn lr(v: f64) -> LinearRatio {
        LinearRatio::new(v).unwrap()
    }
    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Energy-accounting oracle: consumed power of each branch delivering
    /// weight γ is γ·W; divide by the combined delivered power.
    fn noncoherent_oracle(ws: &[f64], gammas: &[f64]) -> f64 {
        let consumed: f64 = ws.iter().zip(gammas).map(|(w, g)| w * g).sum();
        consumed / gammas.iter().sum::<f64>()
    }

    #[test]
    fn noncoherent_weighted_mean() {
        let w = combine_branches(&[br(3.0, 1.0), br(6.0, 0.5)], NC).unwrap().value();
        assert!(rel(w, 4.0) < 1e-12);
        assert!(rel(w, noncoherent_oracle(&[3.0, 6.0], &[1.0, 0.5])) < 1e-12);
    }

    #[test]
    fn identical_branches_keep_their_w() {
        let w = combine_branches(&[br(7.5, 0.3), br(7.5, 0.3)], NC).unwrap().value();
        assert!(rel(w, 7.5) < 1e-12);
    }

    #[test]
    fn coherent_gain_quadruples_power() {
        let w = combine_branches(&[br(3.0, 1.0), br(3.0, 1.0)], CO).unwrap().value();
        assert!(rel(w, 1.5) < 1e-12);
    }

    #[test]
    fn zero_weight_groups() {
        assert!(matches!(
            combine_branches(&[br(3.0, 0.0), br(6.0, 0.0)], NC),
            Err(Error::AllZeroWeights)
        ));
        // a dead branch is kept but contributes nothing
        let w = combine_branches(&[br(3.0, 0.0), br(6.0, 2.0)], NC).unwrap().value();
        assert!(rel(w, 6.0) < 1e-12);
        assert!(Branch::new(st(2.0, 1.0), -1.0).is_err());
    }

    #[test]
    fn miso_with_terminal() {
        // W_parallel = 4 from the weighted-mean example
        let branches = [br(3.0, 1.0), br(6.0, 0.5)];
        let s = miso_compose(&branches, NC, &st(2.0, 10.0)).unwrap();
        assert!(rel(s.w(), 2.3) < 1e-12);
        assert_eq!(s.g(), 10.0);
        // the group as a pseudo-stage through the power-flow ledger
        let r = power_flow(&[st(4.0, 1.0), st(2.0, 10.0)], pw(1.0)).unwrap();
        assert!(rel(r.totals.w, s.w()) < 1e-12);

        let t = miso_compose(&branches, NC, &st(1.0, 1.0)).unwrap();
        assert!(rel(t.w(), 4.0) < 1e-12);
    }

    #[test]
    fn single_branch_miso_is_a_cascade() {
        let b = st(5.0, 0.01);
        let term = st(3.0, 20.0);
        for mode in [NC, CO] {
            let m = miso_compose(&[Branch::new(b.clone(), 0.7).unwrap()], mode, &term).unwrap();
            let c = cascade(&[b.clone(), term.clone()]).unwrap();
            assert!(rel(m.w(), c.w()) < 1e-12);
        }
    }

    #[test]
    fn coherent_miso_below_floor_is_an_error() {
        let branches = [br(1.0, 1.0), br(1.0, 1.0)];
        assert!(matches!(
            miso_compose(&branches, CO, &st(1.0, 1.0)),
            Err(Error::WasteBelowUnity(_))
        ));
    }

    #[test]
    fn parallel_gain_examples() {
        let g = parallel_gain(&[pw(1.0), pw(1.0)], &[lr(6.0), lr(6.0)], NC).unwrap();
        assert!(rel(g.value(), 6.0) < 1e-12);
        let g = parallel_gain(&[pw(1.0), pw(1.0)], &[lr(4.0), lr(4.0)], CO).unwrap();
        assert!(rel(g.value(), 8.0) < 1e-12);
        let g = parallel_gain(&[pw(2.0), pw(1.0)], &[lr(10.0), lr(1.0)], NC).unwrap();
        assert!(rel(g.value(), 7.0) < 1e-12);
        assert!(matches!(
            parallel_gain(&[pw(1.0)], &[lr(1.0), lr(2.0)], NC),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            parallel_gain(&[pw(0.0)], &[lr(1.0)], NC),
            Err(Error::AllZeroWeights)
        ));
    }

    #[test]
    fn received_power_examples() {
        let p = received_power_matrix(&[pw(1.0)], &[vec![100.0]], NC).unwrap();
        assert!(rel(p[0].watts(), 0.01) < 1e-12);

        let m = [vec![100.0], vec![100.0]];
        let nc = received_power_matrix(&[pw(1.0), pw(1.0)], &m, NC).unwrap();
        let co = received_power_matrix(&[pw(1.0), pw(1.0)], &m, CO).unwrap();
        assert!(rel(nc[0].watts(), 0.02) < 1e-12);
        assert!(rel(co[0].watts(), 0.04) < 1e-12);

        let dead = received_power_matrix(&[pw(1.0), pw(5.0)], &[vec![10.0], vec![f64::INFINITY]], NC).unwrap();
        assert!(rel(dead[0].watts(), 0.1) < 1e-12);

        assert!(received_power_matrix(&[pw(1.0)], &[vec![0.5]], NC).is_err());
        assert!(matches!(
            received_power_matrix(&[pw(1.0)], &[vec![2.0], vec![2.0]], NC),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mino_first_stage_examples() {
        assert!(rel(mino_first_stage(&[pw(2.0), pw(2.0)], &[4.0, 4.0]).unwrap().value(), 4.0) < 1e-12);
        assert!(rel(mino_first_stage(&[pw(3.0), pw(1.0)], &[2.0, 6.0]).unwrap().value(), 3.0) < 1e-12);
        assert!(rel(mino_first_stage(&[pw(3.0), pw(0.0)], &[2.0, 1e9]).unwrap().value(), 2.0) < 1e-12);
        assert!(mino_first_stage(&[pw(0.0)], &[2.0]).is_err());
    }

    #[test]
    fn mino_compose_examples() {
        let w = mino_compose(lr(1.0), lr(33.0), lr(12.59)).unwrap();
        assert_eq!(w.value(), 33.0);
        let w = mino_compose(lr(3.5e6), lr(33.0), lr(12.59)).unwrap().value();
        assert!(rel(w, 33.0 + (3.5e6 - 1.0) / 12.59) < 1e-12);
        assert!((w - 2.78e5).abs() / 2.78e5 < 2e-3);
    }

    #[test]
    fn identical_receivers_collapse() {
        // equal-W receivers: W_N∥ = W_UE and G_N∥ = G_UE whatever the split
        let rx = [st(33.0, 12.59), st(33.0, 12.59), st(33.0, 12.59)];
        let tx = [st(15.0, 1000.0), st(15.0, 1000.0)];
        let ch = [vec![1e7, 3e8, 2e6], vec![5e9, 1e6, 4e7]];
        let b = mino_system(&[pw(0.1), pw(0.02)], &tx, &ch, &rx, NC, NC).unwrap();
        assert!(rel(b.rx_w, 33.0) < 1e-12);
        assert!(rel(b.rx_g, 12.59) < 1e-12);
    }

    /// Hand expansion of the two-input two-output system.
    fn two_by_two_by_hand(
        pt: [f64; 2],
        wt: [f64; 2],
        wc: [[f64; 2]; 2],
        wr: [f64; 2],
        gr: [f64; 2],
        coherent: bool,
    ) -> f64 {
        let mut pr = [0.0; 2];
        let mut w2 = [0.0; 2];
        for j in 0..2 {
            let g1 = pt[0] / wc[0][j];
            let g2 = pt[1] / wc[1][j];
            let casc1 = wc[0][j] + (wt[0] - 1.0) / (1.0 / wc[0][j]);
            let casc2 = wc[1][j] + (wt[1] - 1.0) / (1.0 / wc[1][j]);
            let num = g1 * casc1 + g2 * casc2;
            if coherent {
                pr[j] = (g1.sqrt() + g2.sqrt()).powi(2);
                w2[j] = num / pr[j];
            } else {
                pr[j] = g1 + g2;
                w2[j] = num / pr[j];
            }
        }
        let w1 = (pr[0] * w2[0] + pr[1] * w2[1]) / (pr[0] + pr[1]);
        let (wpar, gpar) = if coherent {
            let o = [pr[0] * gr[0], pr[1] * gr[1]];
            let amp = (o[0].sqrt() + o[1].sqrt()).powi(2);
            ((o[0] * wr[0] + o[1] * wr[1]) / amp, amp / (pr[0] + pr[1]))
        } else {
            let o = [pr[0] * gr[0], pr[1] * gr[1]];
            ((o[0] * wr[0] + o[1] * wr[1]) / (o[0] + o[1]), (o[0] + o[1]) / (pr[0] + pr[1]))
        };
        wpar + (w1 - 1.0) / gpar
    }

    proptest! {
        #[test]
        fn scale_invariance(
            ws in prop::collection::vec(1.0f64..1e4, 1..6),
            gs in prop::collection::vec(1e-3f64..1.0, 6),
            k in 1e-6f64..1e6,
        ) {
            for mode in [NC, CO] {
                let a: Vec<Branch> = ws.iter().zip(&gs).map(|(w, g)| br(*w, *g)).collect();
                let b: Vec<Branch> = ws.iter().zip(&gs).map(|(w, g)| br(*w, g * k)).collect();
                let wa = combine_branches(&a, mode).unwrap().value();
                let wb = combine_branches(&b, mode).unwrap().value();
                prop_assert!(rel(wa, wb) < 1e-12);
            }
        }

        #[test]
        fn noncoherent_within_branch_range(
            ws in prop::collection::vec(1.0f64..1e4, 1..6),
            gs in prop::collection::vec(1e-3f64..1.0, 6),
        ) {
            let b: Vec<Branch> = ws.iter().zip(&gs).map(|(w, g)| br(*w, *g)).collect();
            let w = combine_branches(&b, NC).unwrap().value();
            let lo = ws.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ws.iter().cloned().fold(0.0, f64::max);
            prop_assert!(w >= lo * (1.0 - 1e-12) && w <= hi * (1.0 + 1e-12));
            prop_assert!(rel(w, noncoherent_oracle(&ws, &gs[..ws.len()])) < 1e-12);
        }

        #[test]
        fn coherent_never_exceeds_noncoherent(
            w in 1.0f64..1e4,
            gs in prop::collection::vec(1e-3f64..1.0, 1..6),
        ) {
            let b: Vec<Branch> = gs.iter().map(|g| br(w, *g)).collect();
            let nc = combine_branches(&b, NC).unwrap().value();
            let co = combine_branches(&b, CO).unwrap().value();
            if gs.len() == 1 {
                prop_assert!(rel(co, nc) < 1e-12);
            } else {
                prop_assert!(co < nc);
            }
        }

        #[test]
        fn two_by_two_matches_hand_expansion(
            pt in prop::array::uniform2(1e-3f64..10.0),
            wt in prop::array::uniform2(1.0f64..50.0),
            wc in prop::array::uniform2(prop::array::uniform2(1.0f64..1e9)),
            wr in prop::array::uniform2(1.0f64..50.0),
            gr in prop::array::uniform2(1e-2f64..1e3),
        ) {
            let p = [pw(pt[0]), pw(pt[1])];
            let tx = [st(wt[0], 100.0), st(wt[1], 100.0)];
            let rx = [st(wr[0], gr[0]), st(wr[1], gr[1])];
            let ch = [wc[0].to_vec(), wc[1].to_vec()];
            for (mode, coherent) in [(NC, false), (CO, true)] {
                let b = mino_system(&p, &tx, &ch, &rx, mode, mode).unwrap();
                let hand = two_by_two_by_hand(pt, wt, wc, wr, gr, coherent);
                prop_assert!(rel(b.w, hand) < 1e-12, "{} vs {}", b.w, hand);
            }
        }
    }
}
