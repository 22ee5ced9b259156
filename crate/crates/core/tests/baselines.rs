mod common;

use matchplan::baselines::{local_greedy_policy, perfect_matching_policy};
use matchplan::dh::dh_integral_policy;
use matchplan::market::{InstanceBuilder, MarketInstance, PlatformDesign, Side};
use matchplan::oracles::exact_policy_value;
use matchplan::sim::{generate_instance, run_simulation, GeneratorKind, SimulationConfig};
use matchplan::Policy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generated(kind: GeneratorKind) -> MarketInstance {
    generate_instance(&kind, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
}

fn first_plan(policy: &dyn Policy, inst: &MarketInstance) -> matchplan::market::DisplayPlan {
    policy.start().plan(&inst.initial_state(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
}

#[test]
fn every_side_i_user_chases_j1_in_the_greedy_trap() {
    let inst = generated(GeneratorKind::GreedyAdversarial { n: 4, epsilon: 0.1 });
    let d = inst.design().unwrap();
    let policy = local_greedy_policy(&inst, d);
    let plan = first_plan(&policy, &inst);
    let j1 = inst.index_of("j1").unwrap();
    for i in inst.users_of(Side::I) {
        assert!(plan.x.contains(&(i, j1)) || plan.w.contains(&(i, j1)), "user {i}");
    }
    assert!((exact_policy_value(&policy, &inst).unwrap().total - 1.0).abs() < 1e-9);
}

#[test]
fn backlog_member_beats_a_slightly_weaker_fresh_pair() {
    let inst = InstanceBuilder::new(&["i1"], &["j1", "j2"], 2, 1)
        .pair("i1", "j1", 0.9, 0.5)
        .pair("i1", "j2", 0.9, 0.9)
        .backlog("i1", "j1")
        .build()
        .unwrap();
    let d: PlatformDesign = "two:none".parse().unwrap();
    let plan = first_plan(&local_greedy_policy(&inst, d), &inst);
    let (i1, j1) = (inst.index_of("i1").unwrap(), inst.index_of("j1").unwrap());
    assert!(plan.x.contains(&(i1, j1)));
    assert_eq!(plan.load(i1), 1);
}

#[test]
fn no_potentials_means_no_displays() {
    let inst = InstanceBuilder::new(&["i1"], &["j1"], 2, 1).build().unwrap();
    for d in PlatformDesign::GRID {
        assert!(first_plan(&local_greedy_policy(&inst, d), &inst).is_empty());
        assert!(first_plan(&perfect_matching_policy(&inst, d), &inst).is_empty());
    }
}

#[test]
fn perfect_matching_trap_and_the_cross_schedule() {
    let (n, p, q) = (3, 0.5, 0.5);
    let inst = generated(GeneratorKind::PmAdversarial { n, p, q });
    let d = inst.design().unwrap();
    let pm = exact_policy_value(&perfect_matching_policy(&inst, d), &inst).unwrap().total;
    assert!((pm - 4.0 * p * q).abs() < 1e-9);
    let alt = exact_policy_value(&common::CrossSchedule { design: d, n }, &inst).unwrap().total;
    let formula = 2.0 * p * q + 2.0 * q * (1.0 - (1.0f64 - p).powi(n as i32));
    assert!((alt - formula).abs() < 1e-9);

    let config = SimulationConfig { replications: 4_000, master_seed: 9, ..SimulationConfig::default() };
    let dh = run_simulation(&inst, &dh_integral_policy(&inst, d).unwrap(), &config).unwrap();
    assert!(dh.mean() + 3.0 * dh.std_error() >= formula * (1.0 - (-1.0f64).exp()));
}

/// Best Σβ over pair sets that respect every capacity, by enumeration.
fn best_mutual_value(inst: &MarketInstance) -> f64 {
    let pairs = inst.potential_pairs();
    let mut best: f64 = 0.0;
    for mask in 0..1usize << pairs.len() {
        let mut load = vec![0; inst.n_users()];
        let mut value = 0.0;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                load[i] += 1;
                load[j] += 1;
                value += inst.beta(1, i, j);
            }
        }
        if inst.users().all(|u| load[u] <= inst.capacity(u)) {
            best = best.max(value);
        }
    }
    best
}

#[test]
fn single_period_without_backlog_is_pure_mutual_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let d: PlatformDesign = "two:both".parse().unwrap();
    for _ in 0..40 {
        let inst = common::random_small_instance(&mut rng, 1, 3, 2);
        let policy = perfect_matching_policy(&inst, d);
        let plan = first_plan(&policy, &inst);
        assert!(plan.x.is_empty());
        let value = exact_policy_value(&policy, &inst).unwrap().total;
        assert!((value - best_mutual_value(&inst)).abs() < 1e-9);
    }
}

#[test]
fn baseline_plans_are_feasible_on_random_markets() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for k in 0..40 {
        let inst = common::random_small_instance(&mut rng, 2, 3, 2);
        let d = PlatformDesign::GRID[k % 4];
        // The exact evaluator rejects any infeasible plan in any branch.
        exact_policy_value(&local_greedy_policy(&inst, d), &inst).unwrap();
        exact_policy_value(&perfect_matching_policy(&inst, d), &inst).unwrap();
    }
}
