mod common;

use matchplan::market::{plan_is_feasible, InstanceBuilder, MarketInstance, PlatformDesign, Side};
use matchplan::sim::{run_simulation, SimulationConfig};
use matchplan::submodular::{
    build_feasible_region, continuous_greedy, dependent_rounding, greedy_matroid_intersection, local_search,
    multilinear_estimate, submodular_policy, ContinuousGreedyOptions, Element, FeasibleRegion, M2Mode,
    MatchValueOracle, Matroid, SetFunction, SubmodularAlgorithm, SubmodularOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn design(label: &str) -> PlatformDesign {
    label.parse().unwrap()
}

fn full_two_by_two(p: f64, q: f64) -> MarketInstance {
    let mut b = InstanceBuilder::new(&["i1", "i2"], &["j1", "j2"], 2, 1);
    for i in ["i1", "i2"] {
        for j in ["j1", "j2"] {
            b = b.pair(i, j, p, q);
        }
    }
    b.build().unwrap()
}

fn partitions(region: &FeasibleRegion) -> usize {
    region.matroids.iter().filter(|m| matches!(m, Matroid::Partition(_))).count()
}

#[test]
fn region_shapes_follow_the_design() {
    let inst = full_two_by_two(0.5, 0.5);
    let one = build_feasible_region(&inst, &design("one-i:none"));
    assert_eq!((one.matroids.len(), partitions(&one)), (1, 1));
    assert!(one.ground.iter().all(|e| matches!(e, Element::Arc { viewer, .. } if inst.side(*viewer) == Side::I)));

    let two = build_feasible_region(&inst, &design("two:none"));
    assert_eq!((two.matroids.len(), partitions(&two)), (2, 2));
    assert_eq!(two.ground.len(), 8);

    let mixed = build_feasible_region(&inst, &design("two:first"));
    assert_eq!((mixed.matroids.len(), partitions(&mixed)), (3, 3));
    assert_eq!(mixed.ground.len(), 12);

    let laminar = build_feasible_region(&inst, &design("one-i:first"));
    assert_eq!(laminar.matroids.len(), 2);
    match &laminar.matroids[0] {
        Matroid::Laminar(m) => assert!(m.is_laminar()),
        other => panic!("expected a laminar matroid, got {other:?}"),
    }
}

#[test]
fn region_forbids_seeing_each_other_twice() {
    let inst = full_two_by_two(0.5, 0.5);
    let region = build_feasible_region(&inst, &design("two:none"));
    let ij = region.ground.iter().position(|e| *e == Element::Arc { viewer: 0, profile: 2 }).unwrap();
    let ji = region.ground.iter().position(|e| *e == Element::Arc { viewer: 2, profile: 0 }).unwrap();
    assert!(!region.is_independent(&[ij, ji]));
}

#[test]
fn multilinear_estimates() {
    let f = |s: &[usize]| s.iter().map(|&e| [1.0, 2.0, 4.0][e]).sum::<f64>().min(5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let integral = multilinear_estimate(&f, &[1.0, 0.0, 1.0], 100, &mut rng);
    assert_eq!((integral.mean, integral.std_error), (5.0, 0.0));
    assert_eq!(multilinear_estimate(&f, &[0.0; 3], 50, &mut rng).mean, 0.0);

    let z = [0.3, 0.6, 0.5];
    let mut exact = 0.0;
    for mask in 0..8usize {
        let set: Vec<usize> = (0..3).filter(|k| mask >> k & 1 == 1).collect();
        let p: f64 = (0..3).map(|k| if mask >> k & 1 == 1 { z[k] } else { 1.0 - z[k] }).product();
        exact += p * f(&set);
    }
    let est = multilinear_estimate(&f, &z, 20_000, &mut rng);
    assert!((est.mean - exact).abs() <= 3.0 * est.std_error, "{est:?} vs {exact}");
}

#[test]
fn continuous_greedy_saturates_a_single_edge() {
    let inst = InstanceBuilder::new(&["i"], &["j"], 2, 1).pair("i", "j", 0.7, 0.4).build().unwrap();
    let point = continuous_greedy(&inst, &design("one-i:none"), &ContinuousGreedyOptions::default()).unwrap();
    assert_eq!(point.arcs, vec![(0, 1)]);
    assert!((point.z[0] - 0.7).abs() < 1e-12);
}

#[test]
fn continuous_greedy_solves_the_modular_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        // Responders can keep everyone who likes them, so their value is linear.
        let inst = common::random_small_instance(&mut rng, 2, 3, 2).with_side_capacity(Side::J, 3);
        let d = design("one-i:none");
        let opts = ContinuousGreedyOptions { steps: 50, samples: 8, ..ContinuousGreedyOptions::default() };
        let point = continuous_greedy(&inst, &d, &opts).unwrap();
        let weight = |(v, u): (usize, usize)| inst.phi(1, v, u) * inst.phi(2, u, v);
        let value: f64 = point.arcs.iter().zip(&point.display).map(|(&a, &y)| weight(a) * y).sum();
        let mut lp_opt = 0.0;
        for i in inst.users_of(Side::I) {
            let mut w: Vec<f64> = point.arcs.iter().filter(|a| a.0 == i).map(|&a| weight(a)).collect();
            w.sort_by(|a, b| b.total_cmp(a));
            lp_opt += w.iter().take(inst.capacity(i)).sum::<f64>();
        }
        assert!((value - lp_opt).abs() <= lp_opt / opts.steps as f64 + 1e-9, "{value} vs {lp_opt}");
        for i in inst.users_of(Side::I) {
            let load: f64 = point.arcs.iter().zip(&point.display).filter(|(a, _)| a.0 == i).map(|(_, y)| y).sum();
            assert!(load <= inst.capacity(i) as f64 + 1e-12);
        }
    }
}

#[test]
fn continuous_greedy_needs_one_directional_sequential() {
    let inst = full_two_by_two(0.5, 0.5);
    assert!(continuous_greedy(&inst, &design("two:none"), &ContinuousGreedyOptions::default()).is_err());
}

fn marginal_rates(v: &[f64], trials: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut hits = vec![0usize; v.len()];
    for _ in 0..trials {
        let out = dependent_rounding(v, rng);
        assert!(out.iter().filter(|&&b| b).count() as f64 <= v.iter().sum::<f64>().ceil());
        for (h, b) in hits.iter_mut().zip(out) {
            *h += b as usize;
        }
    }
    hits.into_iter().map(|h| h as f64 / trials as f64).collect()
}

#[test]
fn rounding_halves() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        assert_eq!(dependent_rounding(&[0.5, 0.5], &mut rng).iter().filter(|&&b| b).count(), 1);
    }
    for r in marginal_rates(&[0.5, 0.5], 10_000, &mut rng) {
        assert!((r - 0.5).abs() <= 0.02);
    }
}

#[test]
fn rounding_three_way() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v = [0.3, 0.3, 0.4];
    for (r, x) in marginal_rates(&v, 10_000, &mut rng).into_iter().zip(v) {
        assert!((r - x).abs() <= 0.02);
    }
    assert_eq!(dependent_rounding(&[0.0, 1.0, 1.0], &mut rng), vec![false, true, true]);
}

/// Best value over every independent set, by enumeration.
fn exhaustive_best(f: &dyn SetFunction, region: &FeasibleRegion) -> f64 {
    let n = region.ground.len();
    (0..1usize << n)
        .map(|mask| (0..n).filter(|k| mask >> k & 1 == 1).collect::<Vec<_>>())
        .filter(|s| region.is_independent(s))
        .map(|s| f.value(&s))
        .fold(0.0, f64::max)
}

#[test]
fn greedy_is_optimal_for_modular_functions_over_one_matroid() {
    let inst = InstanceBuilder::new(&["i1", "i2"], &["j1", "j2", "j3"], 2, 2)
        .pair("i1", "j1", 0.9, 0.1)
        .pair("i1", "j2", 0.2, 0.8)
        .pair("i1", "j3", 0.6, 0.6)
        .pair("i2", "j1", 0.5, 0.5)
        .pair("i2", "j3", 0.4, 0.7)
        .build()
        .unwrap()
        .with_side_capacity(Side::I, 1);
    let region = build_feasible_region(&inst, &design("one-i:none"));
    let weights: Vec<f64> = (0..region.ground.len()).map(|k| 0.1 + k as f64 * 0.37 % 1.0).collect();
    let f = |s: &[usize]| s.iter().map(|&e| weights[e]).sum::<f64>();
    let best = exhaustive_best(&f, &region);
    assert!((f.value(&greedy_matroid_intersection(&f, &region)) - best).abs() < 1e-12);
    assert!((f.value(&local_search(&f, &region, 0.1).unwrap()) - best).abs() < 1e-12);
}

#[test]
fn empty_ground_set_gives_the_empty_set() {
    let inst = InstanceBuilder::new(&["i1"], &["j1"], 2, 1).build().unwrap();
    let region = build_feasible_region(&inst, &design("two:first"));
    let f = |s: &[usize]| s.len() as f64;
    assert!(greedy_matroid_intersection(&f, &region).is_empty());
    assert!(local_search(&f, &region, 0.1).unwrap().is_empty());
}

#[test]
fn greedy_and_local_search_guarantees_on_small_markets() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut done = 0;
    while done < 25 {
        let inst = common::random_small_instance(&mut rng, 2, 2, 2);
        let d = PlatformDesign::GRID[2 + done % 2];
        let region = build_feasible_region(&inst, &d);
        if region.ground.len() > 12 {
            continue;
        }
        let oracle = MatchValueOracle::new(&inst, &region.ground, M2Mode::Exact);
        let best = exhaustive_best(&oracle, &region);
        let greedy = greedy_matroid_intersection(&oracle, &region);
        let ls = local_search(&oracle, &region, 0.1).unwrap();
        assert!(region.is_independent(&greedy) && region.is_independent(&ls));
        let r = region.rank_count() as f64;
        assert!(oracle.value(&greedy) >= best / (r + 1.0) - 1e-9);
        assert!(oracle.value(&ls) >= best / (r + 0.1) - 1e-9);
        assert!(oracle.value(&ls) >= oracle.value(&greedy) - 1e-12);
        done += 1;
    }
}

#[test]
fn exact_and_sampled_oracles_agree() {
    let inst = full_two_by_two(0.6, 0.7);
    let region = build_feasible_region(&inst, &design("two:none"));
    let exact = MatchValueOracle::new(&inst, &region.ground, M2Mode::Exact);
    let sampled = MatchValueOracle::new(&inst, &region.ground, M2Mode::MonteCarlo { samples: 20_000, seed: 4 });
    let set = [0, 3, 5];
    assert!((exact.value(&set) - sampled.value(&set)).abs() < 0.03);
    for e in 0..region.ground.len() {
        let g = exact.gain(&[0], e);
        let mut with: Vec<usize> = vec![0];
        if e != 0 {
            with.push(e);
        }
        assert!((g - (exact.value(&with) - exact.value(&[0]))).abs() < 1e-12);
    }
}

#[test]
fn submodular_policies_emit_feasible_plans() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let options = SubmodularOptions::default();
    for k in 0..12 {
        let inst = common::random_small_instance(&mut rng, 2, 3, 2);
        for d in PlatformDesign::GRID {
            for alg in [SubmodularAlgorithm::Greedy, SubmodularAlgorithm::LocalSearch] {
                let policy = submodular_policy(&inst, d, alg, &options).unwrap();
                assert!(plan_is_feasible(policy.first_period_plan().unwrap(), &inst.initial_state(), &d, &inst));
                let config = SimulationConfig { replications: 50, master_seed: k, ..SimulationConfig::default() };
                run_simulation(&inst, &policy, &config).unwrap();
            }
        }
        let d = design("one-i:none");
        let policy = submodular_policy(&inst, d, SubmodularAlgorithm::ContinuousGreedyRounded, &options).unwrap();
        let config = SimulationConfig { replications: 50, master_seed: k, ..SimulationConfig::default() };
        run_simulation(&inst, &policy, &config).unwrap();
    }
}

#[test]
fn global_greedy_uses_mutual_pairs_only_when_allowed() {
    let inst = InstanceBuilder::new(&["i1"], &["j1"], 2, 1)
        .like_at(1, "i1", "j1", 0.8)
        .like_at(1, "j1", "i1", 0.8)
        .like_at(2, "i1", "j1", 0.1)
        .like_at(2, "j1", "i1", 0.1)
        .build()
        .unwrap();
    let options = SubmodularOptions::default();
    let none = submodular_policy(&inst, design("two:none"), SubmodularAlgorithm::Greedy, &options).unwrap();
    let first = submodular_policy(&inst, design("two:first"), SubmodularAlgorithm::Greedy, &options).unwrap();
    assert!(none.first_period_plan().unwrap().w.is_empty());
    assert_eq!(first.first_period_plan().unwrap().w, [(0, 1)].into_iter().collect());
    assert!(first.first_period_plan().unwrap().x.is_empty());
}
