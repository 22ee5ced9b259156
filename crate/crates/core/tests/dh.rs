mod common;

use matchplan::baselines::local_greedy_policy;
use matchplan::dh::{
    build_dh_relaxation, dh_fractional_policy, dh_integral_policy, dh_multi_period_onedir_rounded,
    dh_multi_period_policy, solve_dh_relaxation, RelaxationForm,
};
use matchplan::market::{plan_is_feasible, InstanceBuilder, MarketInstance, PlatformDesign, Side};
use matchplan::oracles::{dp_optimal, exact_policy_value};
use matchplan::sim::{generate_instance, run_simulation, GeneratorKind, SimulationConfig, SyntheticParams};
use matchplan::{Execution, Policy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn design(label: &str) -> PlatformDesign {
    label.parse().unwrap()
}

fn simulate(inst: &MarketInstance, policy: &dyn Policy, reps: usize, seed: u64) -> (f64, f64) {
    let config = SimulationConfig { replications: reps, master_seed: seed, execution: Execution::Parallel };
    let r = run_simulation(inst, policy, &config).unwrap();
    (r.mean(), r.std_error())
}

#[test]
fn mixed_design_model_has_mutual_and_two_sided_displays() {
    let inst = InstanceBuilder::new(&["i1"], &["j1"], 2, 1).pair("i1", "j1", 0.5, 0.5).build().unwrap();
    let model = build_dh_relaxation(&inst, &design("two:first"), RelaxationForm::TwoPeriod).unwrap();
    assert!(!model.w_vars.is_empty());
    let viewers: Vec<usize> = model.x_vars.iter().map(|&((v, _), _)| v).collect();
    assert!(viewers.contains(&0) && viewers.contains(&1));
}

#[test]
fn one_directional_model_has_only_side_i_initiations() {
    let inst = InstanceBuilder::new(&["i1", "i2"], &["j1"], 2, 1)
        .pair("i1", "j1", 0.5, 0.5)
        .pair("i2", "j1", 0.4, 0.9)
        .build()
        .unwrap();
    let model = build_dh_relaxation(&inst, &design("one-i:none"), RelaxationForm::TwoPeriod).unwrap();
    assert!(model.w_vars.is_empty());
    assert!(model.x_vars.iter().all(|&((v, _), _)| inst.side(v) == Side::I));
}

#[test]
fn single_pair_hand_solve() {
    let inst = InstanceBuilder::new(&["i"], &["j"], 2, 1).pair("i", "j", 1.0, 0.5).build().unwrap();
    let sol = solve_dh_relaxation(&inst, &design("one-i:none"), RelaxationForm::TwoPeriod).unwrap();
    assert!((sol.objective_value - 0.5).abs() < 1e-9);
    assert_eq!(sol.x, [(0, 1)].into_iter().collect());
    // j receives i's like with certainty; the objective weighs that display by φ_{j,i}.
    assert!((sol.y[&(1, 0)] - 1.0).abs() < 1e-9);
}

#[test]
fn dh_beats_local_greedy_on_the_greedy_trap() {
    let kind = GeneratorKind::GreedyAdversarial { n: 4, epsilon: 0.1 };
    let inst = generate_instance(&kind, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let d = inst.design().unwrap();
    let dh = exact_policy_value(&dh_integral_policy(&inst, d).unwrap(), &inst).unwrap().total;
    let lg = exact_policy_value(&local_greedy_policy(&inst, d), &inst).unwrap().total;
    assert!((dh - 3.7).abs() < 1e-9, "dh {dh}");
    assert!((lg - 1.0).abs() < 1e-9, "greedy {lg}");
}

#[test]
fn first_period_plan_is_feasible_and_meets_the_guarantee() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let bound = 1.0 - (-1.0f64).exp();
    for k in 0..30 {
        let inst = common::random_small_instance(&mut rng, 2, 2, 2);
        let d = PlatformDesign::GRID[k % 4];
        let policy = dh_integral_policy(&inst, d).unwrap();
        assert!(plan_is_feasible(policy.first_period_plan(), &inst.initial_state(), &d, &inst));
        let value = exact_policy_value(&policy, &inst).unwrap().total;
        assert!(value >= bound * dp_optimal(&inst, &d).unwrap() - 1e-9);
    }
}

#[test]
fn horizon_other_than_two_is_rejected() {
    let inst = InstanceBuilder::new(&["i"], &["j"], 3, 1).pair("i", "j", 0.5, 0.5).build().unwrap();
    assert!(matches!(dh_integral_policy(&inst, design("two:none")), Err(matchplan::Error::UnsupportedHorizon { .. })));
}

#[test]
fn fractional_matches_integral_when_the_lp_is_integral() {
    // Deterministic likes and slack capacities make every relaxation vertex integral.
    let inst = InstanceBuilder::new(&["i1", "i2"], &["j1", "j2"], 2, 2)
        .pair("i1", "j1", 1.0, 1.0)
        .pair("i2", "j2", 1.0, 0.0)
        .pair("i1", "j2", 0.0, 1.0)
        .build()
        .unwrap();
    let d = design("two:first");
    let integral = dh_integral_policy(&inst, d).unwrap();
    let fractional = dh_fractional_policy(&inst, d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let plan = fractional.start().plan(&inst.initial_state(), &mut rng).unwrap();
    assert_eq!(&plan, integral.first_period_plan());
}

#[test]
fn fractional_tracks_integral_on_five_by_five_markets() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let params = SyntheticParams { n_i: 5, n_j: 5, capacity: 2, ..SyntheticParams::default() };
    let (mut sum_int, mut sum_frac, mut var) = (0.0, 0.0, 0.0);
    for k in 0..50 {
        let inst = generate_instance(&GeneratorKind::Synthetic(params.clone()), &mut rng).unwrap();
        let d = PlatformDesign::GRID[k % 4];
        // Capacities are asserted every period by the simulator's feasibility check.
        let (a, sa) = simulate(&inst, &dh_integral_policy(&inst, d).unwrap(), 200, k as u64);
        let (b, sb) = simulate(&inst, &dh_fractional_policy(&inst, d).unwrap(), 200, k as u64);
        sum_int += a;
        sum_frac += b;
        var += sa * sa + sb * sb;
    }
    let slack = 0.15 * sum_int + 3.0 * var.sqrt();
    assert!((sum_int - sum_frac).abs() <= slack, "integral {sum_int:.3} fractional {sum_frac:.3}");
}

#[test]
fn multi_period_model_agrees_with_two_period_when_capacity_is_slack() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut compared = 0;
    while compared < 15 {
        let inst = common::random_small_instance(&mut rng, 2, 3, 1).with_side_capacity(Side::I, 3).with_side_capacity(Side::J, 3);
        if !inst.is_time_homogeneous() {
            continue;
        }
        let d = PlatformDesign::GRID[compared % 4];
        let two = solve_dh_relaxation(&inst, &d, RelaxationForm::TwoPeriod).unwrap().objective_value;
        let multi = solve_dh_relaxation(&inst, &d, RelaxationForm::MultiPeriod).unwrap().objective_value;
        assert!((two - multi).abs() < 1e-9, "two-period {two} multi-period {multi}");
        compared += 1;
    }
}

#[test]
fn multi_period_commitments_are_shown_by_the_horizon() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 20 {
        let inst = common::random_small_instance(&mut rng, 3, 2, 2);
        let d = PlatformDesign::GRID[checked % 4];
        let policy = dh_multi_period_policy(&inst, d).unwrap();
        let committed = &policy.relaxation().x;
        let load_ok = inst.users().all(|u| committed.iter().filter(|&&(v, _)| v == u).count() <= inst.capacity(u) * 3);
        if !load_ok {
            continue;
        }
        let mut episode = policy.start();
        let mut state = inst.initial_state();
        let mut shown = std::collections::BTreeSet::new();
        let mut dropped = std::collections::BTreeSet::new();
        while state.period <= inst.horizon() {
            let plan = episode.plan(&state, &mut rng).unwrap();
            assert!(plan_is_feasible(&plan, &state, &d, &inst));
            shown.extend(plan.x.iter().copied());
            let likes = matchplan::market::sample_likes(&plan, &inst, state.period, &mut rng);
            let (next, _) = matchplan::market::transition(&state, &inst, &plan, &likes).unwrap();
            for &(v, p) in committed {
                if state.potentials[v].contains(p) && !next.potentials[v].contains(p) && !plan.x.contains(&(v, p)) {
                    dropped.insert((v, p));
                }
            }
            state = next;
        }
        for arc in committed {
            assert!(shown.contains(arc) || dropped.contains(arc), "commitment {arc:?} never shown");
        }
        checked += 1;
    }
}

fn homogeneous_one_sided(rng: &mut ChaCha8Rng) -> MarketInstance {
    loop {
        let inst = common::random_small_instance(rng, 3, 3, 2);
        if inst.is_time_homogeneous() {
            return inst;
        }
    }
}

#[test]
fn rounded_commitments_respect_budgets_and_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for _ in 0..6 {
        let inst = homogeneous_one_sided(&mut rng);
        let policy = dh_multi_period_onedir_rounded(&inst, Side::I).unwrap();
        let frac = policy.fractional_x().clone();
        let trials = 10_000;
        let mut hits: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
        for _ in 0..trials {
            let chosen = policy.sample_commitments(&mut rng);
            for u in inst.users_of(Side::I) {
                assert!(chosen.iter().filter(|a| a.0 == u).count() <= inst.capacity(u) * inst.horizon());
            }
            for arc in chosen {
                *hits.entry(arc).or_default() += 1;
            }
        }
        for (arc, v) in &frac {
            let rate = hits.get(arc).copied().unwrap_or(0) as f64 / trials as f64;
            assert!((rate - v).abs() <= 0.02, "arc {arc:?}: {rate} vs {v}");
        }
    }
}

#[test]
fn integral_lp_rounds_to_itself() {
    let inst = InstanceBuilder::new(&["i1"], &["j1", "j2"], 2, 1)
        .pair("i1", "j1", 1.0, 1.0)
        .pair("i1", "j2", 1.0, 0.5)
        .build()
        .unwrap();
    let policy = dh_multi_period_onedir_rounded(&inst, Side::I).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let expected: std::collections::BTreeSet<_> =
        policy.fractional_x().iter().filter(|(_, &v)| v > 0.5).map(|(&a, _)| a).collect();
    assert!(policy.fractional_x().values().all(|&v| v < 1e-9 || v > 1.0 - 1e-9));
    for _ in 0..50 {
        assert_eq!(policy.sample_commitments(&mut rng), expected);
    }
}

#[test]
fn multi_period_statistical_guarantee_on_tiny_markets() {
    let mut rng = ChaCha8Rng::seed_from_u64(333);
    let bound = 1.0 - (-1.0f64).exp();
    for k in 0..8 {
        let inst = loop {
            let inst = common::random_small_instance(&mut rng, 3, 2, 1);
            if inst.n_i() == 2 && inst.n_j() == 2 {
                break inst;
            }
        };
        let d = PlatformDesign::GRID[k % 4];
        let policy = dh_multi_period_policy(&inst, d).unwrap();
        let (mean, se) = simulate(&inst, &policy, 2_000, k as u64);
        assert!(mean + 3.0 * se >= bound * policy.relaxation().objective_value - 1e-9);
    }
}
