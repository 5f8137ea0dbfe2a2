//! Consensus diagnostics against brute-force and closed-form oracles.

use std::collections::BTreeSet;

use imitanet_core::analysis::{
    energy, hull_generators, leader_classes, leader_partition, max_min_condition, product_decay_bound,
    two_strategy_reduction, verify_product_decay, FreeEnd,
};
use imitanet_core::dynamics::{kappa_matrix, run, SimConfig};
use imitanet_core::rng::stream;
use imitanet_core::{Game, Network, StrategyProfile};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

const HUBS: [usize; 2] = [0, 33];

/// Karate Club with both hubs at `(hub, 1-hub)` and everyone else at `(rest, 1-rest)`.
fn karate_profile(hub: f64, rest: f64) -> StrategyProfile {
    let rows: Vec<Vec<f64>> =
        (0..34).map(|i| if HUBS.contains(&i) { vec![hub, 1.0 - hub] } else { vec![rest, 1.0 - rest] }).collect();
    StrategyProfile::from_rows(&rows).unwrap()
}

#[test]
fn stag_hunt_e1_leaders_reduce_to_five_sixths() {
    let net = Network::karate_club();
    let red = two_strategy_reduction(&net, &Game::stag_hunt(), &HUBS, 1.0, FreeEnd::Lower).unwrap();
    let t = red.threshold.unwrap();
    assert!((t - 5.0 / 6.0).abs() < 1e-12);
    assert_eq!(red.holds_below, Some(false));
    // 16(3a - 1) against 24.
    assert_eq!(red.lhs_active.unwrap().0, [-16.0, 48.0, 0.0]);
    assert_eq!(red.rhs_active.unwrap().0, [24.0, 0.0, 0.0]);
    assert!(!red.holds_at(5.0 / 6.0 - 1e-6));
    assert!(red.holds_at(5.0 / 6.0 + 1e-6));
}

#[test]
fn stag_hunt_e2_leaders_threshold_from_generators() {
    // With A = [[2,-1],[-1,2]]: lhs = 16 <e2, A(b,1-b)> = 16(2 - 3b), rhs = 12 <e2, A e2> = 24.
    let net = Network::karate_club();
    let red = two_strategy_reduction(&net, &Game::stag_hunt(), &HUBS, 0.0, FreeEnd::Upper).unwrap();
    let t = red.threshold.unwrap();
    assert!((t - 1.0 / 6.0).abs() < 1e-12, "threshold {t}");
    assert_eq!(red.holds_below, Some(true));
    assert_eq!(red.lhs_active.unwrap().0, [32.0, -48.0, 0.0]);
}

#[test]
fn reduction_agrees_with_profile_level_condition() {
    let net = Network::karate_club();
    let game = Game::stag_hunt();
    let up = two_strategy_reduction(&net, &game, &HUBS, 1.0, FreeEnd::Lower).unwrap();
    let down = two_strategy_reduction(&net, &game, &HUBS, 0.0, FreeEnd::Upper).unwrap();
    for k in 0..=50 {
        let u = k as f64 / 50.0;
        let rec = max_min_condition(&net, &game, &karate_profile(1.0, u), &HUBS).unwrap();
        assert!((rec.lhs - up.lhs(u)).abs() < 1e-12 && (rec.rhs - up.rhs(u)).abs() < 1e-12, "u = {u}");
        let rec = max_min_condition(&net, &game, &karate_profile(0.0, u), &HUBS).unwrap();
        assert!((rec.lhs - down.lhs(u)).abs() < 1e-12 && (rec.rhs - down.rhs(u)).abs() < 1e-12, "u = {u}");
    }
}

#[test]
fn analyze_style_checks_at_hull_floor() {
    let net = Network::karate_club();
    let game = Game::stag_hunt();
    let holds = max_min_condition(&net, &game, &karate_profile(1.0, 0.9), &HUBS).unwrap();
    assert!(holds.holds && holds.singleton_strategies && holds.all_reach_maximal);
    let fails = max_min_condition(&net, &game, &karate_profile(1.0, 0.8), &HUBS).unwrap();
    assert!(!fails.holds);
}

/// Brute-force optimum over a 200-point grid of the coordinate-1 hull.
fn grid_sides(net: &Network, game: &Game, x: &StrategyProfile, maximal: &[usize]) -> (f64, f64) {
    let lo = (0..x.players()).map(|i| x.row(i)[0]).fold(f64::INFINITY, f64::min);
    let hi = (0..x.players()).map(|i| x.row(i)[0]).fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<[f64; 2]> = (0..200)
        .map(|k| {
            let y = lo + (hi - lo) * k as f64 / 199.0;
            [y, 1.0 - y]
        })
        .collect();
    let mut lhs = f64::INFINITY;
    for &i in maximal {
        for y in &pts {
            lhs = lhs.min(net.degree(i) as f64 * game.bilinear(x.row(i), y));
        }
    }
    let mut rhs = f64::NEG_INFINITY;
    for j in (0..net.n()).filter(|j| !maximal.contains(j)) {
        for y in &pts {
            for z in &pts {
                rhs = rhs.max(net.degree(j) as f64 * game.bilinear(y, z));
            }
        }
    }
    (lhs, rhs)
}

#[test]
fn generator_enumeration_matches_grid_search() {
    for seed in 0..40 {
        let mut rng = stream(seed, 2);
        let n = rng.gen_range(3..9);
        let net = Network::erdos_renyi(n, 0.6, &mut rng).unwrap();
        let rows: Vec<Vec<f64>> = (0..2).map(|_| (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let game = Game::from_rows(&rows).unwrap();
        let x = StrategyProfile::random(n, 2, &mut rng).unwrap();
        let maximal = vec![rng.gen_range(0..n)];
        let rec = max_min_condition(&net, &game, &x, &maximal).unwrap();
        let (glhs, grhs) = grid_sides(&net, &game, &x, &maximal);
        // The grid includes both hull endpoints, so it hits the generator optimum.
        let scale = 1.0 + glhs.abs().max(grhs.abs());
        assert!((rec.lhs - glhs).abs() < 1e-9 * scale, "seed {seed}: {} vs {glhs}", rec.lhs);
        if grhs.is_finite() {
            assert!(rec.rhs >= grhs - 1e-9 * scale, "seed {seed}");
        }
    }
}

#[test]
fn generators_are_distinct_rows() {
    let x = karate_profile(1.0, 0.3);
    assert_eq!(hull_generators(&x).len(), 2);
}

fn random_k(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(dim, dim);
    for r in 0..dim.saturating_sub(1) {
        let cols: Vec<usize> = (r + 1..dim).filter(|_| rng.gen_bool(0.7)).collect();
        if cols.is_empty() || rng.gen_bool(0.1) {
            continue;
        }
        let raw: Vec<f64> = cols.iter().map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum::<f64>() / rng.gen_range(0.5..1.0);
        for (c, v) in cols.iter().zip(raw) {
            k[(r, *c)] = v / total;
        }
    }
    k
}

#[test]
fn bare_products_are_exactly_zero() {
    for seed in 0..100 {
        let mut rng = stream(seed, 3);
        let dim = rng.gen_range(1..8);
        let family: Vec<DMatrix<f64>> = (0..dim).map(|_| random_k(dim, &mut rng)).collect();
        let mut p = DMatrix::identity(dim, dim);
        for k in &family {
            p = k * p;
        }
        assert!(p.iter().all(|&v| v == 0.0), "seed {seed}");
        let r = verify_product_decay(&family, 0.5).unwrap();
        assert_eq!(r.nilpotent, Some(true));
    }
}

#[test]
fn random_families_respect_the_bound() {
    for seed in 0..100 {
        let mut rng = stream(seed, 4);
        let dim = 4;
        let t_len = 50;
        let family: Vec<DMatrix<f64>> = (0..t_len).map(|_| random_k(dim, &mut rng)).collect();
        let r = verify_product_decay(&family, 0.5).unwrap();
        let bound = r.bound.expect("0.5 > 5/50");
        assert!(r.norm <= bound, "seed {seed}: {} > {bound}", r.norm);
        assert!(r.ok);
    }
}

#[test]
fn bound_is_not_asserted_below_the_proviso() {
    let family = vec![DMatrix::zeros(3, 3); 10];
    let r = verify_product_decay(&family, 0.3).unwrap();
    assert_eq!(r.bound, None);
}

#[test]
fn bound_eventually_decreases() {
    let vals: Vec<f64> = (20..200).map(|t| product_decay_bound(0.3, 4, t).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn pd_on_karate_tripartitions() {
    let net = Network::karate_club();
    let game = Game::prisoners_dilemma(3.0, -1.0, 5.0, 2.0).unwrap();
    let x = StrategyProfile::random(34, 2, &mut stream(3, 0)).unwrap();
    let cfg = SimConfig { horizon: 20_000, ..SimConfig::default() };
    let traj = run(&net, &game, &x, &cfg).unwrap();
    let classes = leader_classes(&leader_partition(traj.final_graph()));
    let keys: BTreeSet<Vec<usize>> = classes.iter().map(|(s, _)| s.iter().copied().collect()).collect();
    assert_eq!(keys, BTreeSet::from([vec![0], vec![33], vec![0, 33]]));
    assert!(!traj.consensus);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_non_negative_and_vanishes_with_kappa(seed in any::<u64>()) {
        let mut rng = stream(seed, 5);
        let n = rng.gen_range(2..10);
        let m = rng.gen_range(2..4);
        let net = Network::erdos_renyi(n, 0.5, &mut rng).unwrap();
        let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let game = Game::from_rows(&rows).unwrap();
        let x = StrategyProfile::random(n, m, &mut rng).unwrap();
        let e = energy(&net, &game, &x).unwrap();
        prop_assert!(e >= 0.0);
        let k = kappa_matrix(&net, &game, &x, 0.0).unwrap();
        let mut coincide = true;
        for i in 0..n {
            for j in 0..n {
                if k[(i, j)] > 0.0 {
                    let d = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    coincide &= d < 1e-12;
                }
            }
        }
        prop_assert_eq!(e == 0.0, coincide);
    }
}
