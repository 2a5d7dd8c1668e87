use rand::Rng;
use serde::Serialize;

use super::rng::Streams;
use super::Scenario;
use crate::error::{Error, Result};

pub const MAX_PLACEMENT_ATTEMPTS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Layout {
    pub bs: Vec<Point>,
    pub ue: Vec<Point>,
}

fn uniform_in_disk<R: Rng>(rng: &mut R, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    Point { x: r * theta.cos(), y: r * theta.sin() }
}

/// BSs by sequential rejection sampling under the separation constraint,
/// UEs uniform in the disk. The first k BSs do not depend on `n_bs`.
pub fn generate_layout(scenario: &Scenario) -> Result<Layout> {
    let streams = Streams::new(scenario.seed);
    let mut rng = streams.bs_placement();
    let mut bs: Vec<Point> = Vec::with_capacity(scenario.n_bs);
    let mut attempts = 0u64;
    while bs.len() < scenario.n_bs {
        if attempts >= MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::PlacementInfeasible {
                attempts,
                placed: bs.len(),
                wanted: scenario.n_bs,
            });
        }
        attempts += 1;
        let p = uniform_in_disk(&mut rng, scenario.region_radius_m);
        if bs.iter().all(|q| q.distance(&p) >= scenario.min_bs_separation_m) {
            bs.push(p);
        }
    }

    let mut rng = streams.ue_placement();
    let ue = (0..scenario.n_ue)
        .map(|_| uniform_in_disk(&mut rng, scenario.region_radius_m))
        .collect();
    Ok(Layout { bs, ue })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separation_holds() {
        for seed in 0..10 {
            let s = Scenario { n_bs: 20, seed, ..Scenario::default() };
            let l = generate_layout(&s).unwrap();
            assert_eq!(l.bs.len(), 20);
            assert_eq!(l.ue.len(), 1024);
            for (i, a) in l.bs.iter().enumerate() {
                assert!(a.x.hypot(a.y) <= 1000.0);
                for b in &l.bs[i + 1..] {
                    assert!(a.distance(b) >= 200.0);
                }
            }
            assert!(l.ue.iter().all(|u| u.x.hypot(u.y) <= 1000.0));
        }
    }

    #[test]
    fn deterministic_with_prefix_property() {
        let s = Scenario { n_bs: 15, seed: 9, ..Scenario::default() };
        let a = generate_layout(&s).unwrap();
        assert_eq!(a, generate_layout(&s).unwrap());
        let more = generate_layout(&Scenario { n_bs: 20, ..s.clone() }).unwrap();
        assert_eq!(a.bs[..], more.bs[..15]);
        assert_eq!(a.ue, more.ue);
        let single = generate_layout(&Scenario { n_bs: 1, ..s }).unwrap();
        assert_eq!(single.bs[0], a.bs[0]);
    }

    #[test]
    fn infeasible_placement_errors() {
        let s = Scenario { n_bs: 200, n_ue: 1, min_bs_separation_m: 900.0, ..Scenario::default() };
        assert!(matches!(generate_layout(&s), Err(Error::PlacementInfeasible { .. })));
    }

    #[test]
    fn ue_density_is_uniform_in_area() {
        let s = Scenario { n_ue: 20_000, n_bs: 1, ..Scenario::default() };
        let l = generate_layout(&s).unwrap();
        let inner = l.ue.iter().filter(|u| u.x.hypot(u.y) < 500.0).count() as f64 / 20_000.0;
        // a quarter of the area; binomial sd ≈ 0.003
        assert!((inner - 0.25).abs() < 0.015, "{inner}");
    }
}
