use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use skyfleet::energy::{leg_energy, route_energy};
use skyfleet::env::run_episode;
use skyfleet::experiments::{combined_cost, gini, MethodId, Setup};
use skyfleet::learning::{clipped_surrogate, masked_softmax, ActionMode, FlightRangeController, LearningConfig};
use skyfleet::model::{
    euclidean_distance, generate_synthetic, load_requests, write_requests, DroneSpec, EnvironmentConstants, Point2D,
    RunConfig, ScenarioConfig,
};
use skyfleet::planner::{select_plans, PartitionInstance, PlanOption};
use skyfleet::segmentation::kmeans;

fn point() -> impl Strategy<Value = Point2D> {
    (0.0..10_000.0f64, 0.0..10_000.0f64).prop_map(|(x, y)| Point2D::new(x, y))
}

fn small_run(seed: u64) -> RunConfig {
    let mut rc = RunConfig::default();
    rc.scenario.rng_seed = seed;
    rc.scenario.num_depots = 6;
    rc.scenario.num_drones = 3;
    rc.scenario.num_windows = 5;
    rc.scenario.requests_per_window = 12;
    rc.scenario.k_neighbors = 2;
    rc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality(a in point(), b in point(), c in point()) {
        prop_assert!(euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-9);
    }

    #[test]
    fn softmax_is_a_distribution(logits in prop::collection::vec(-50.0..50.0f64, 1..8), bits in any::<u8>()) {
        let mut mask: Vec<bool> = (0..logits.len()).map(|i| bits >> (i % 8) & 1 == 1).collect();
        mask[0] = true;
        let p = masked_softmax(&logits, &mask).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (x, m) in p.iter().zip(&mask) {
            if !m {
                prop_assert_eq!(*x, 0.0);
            }
        }
    }

    #[test]
    fn clip_bound(ratio in 0.0..5.0f64, adv in -10.0..10.0f64, eps in 0.01..0.9f64) {
        let s = clipped_surrogate(ratio, adv, eps);
        prop_assert!(s.abs() <= (ratio * adv).abs().max((1.0 + eps) * adv.abs()) + 1e-12);
    }

    #[test]
    fn energy_increases_with_mass(a in 0.0..2.5f64, b in 0.0..2.5f64, d in 1.0..5_000.0f64) {
        prop_assume!((a - b).abs() > 1e-6);
        let (spec, consts) = (DroneSpec::default(), EnvironmentConstants::default());
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(leg_energy(&spec, &consts, hi, d).unwrap() > leg_energy(&spec, &consts, lo, d).unwrap());
    }

    #[test]
    fn route_energy_is_sum_of_legs(stops in prop::collection::vec((point(), 0.05..0.6f64), 1..5), depot in point()) {
        let (spec, consts) = (DroneSpec::default(), EnvironmentConstants::default());
        let mut route = vec![(depot, 0.0)];
        route.extend(stops.iter().copied());
        route.push((depot, 0.0));
        let mut carried: f64 = stops.iter().map(|s| s.1).sum();
        let mut expected = 0.0;
        for w in route.windows(2) {
            expected += leg_energy(&spec, &consts, carried.max(0.0), w[0].0.distance(&w[1].0)).unwrap();
            carried -= w[1].1;
        }
        let got = route_energy(&spec, &consts, &route).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn leg_energy_depends_only_on_distance(p in point(), q in point(), shift in point(), angle in 0.0..6.28f64) {
        let (spec, consts) = (DroneSpec::default(), EnvironmentConstants::default());
        let rot = |v: Point2D| Point2D::new(
            v.x * angle.cos() - v.y * angle.sin() + shift.x,
            v.x * angle.sin() + v.y * angle.cos() + shift.y,
        );
        let a = leg_energy(&spec, &consts, 0.7, p.distance(&q)).unwrap();
        let b = leg_energy(&spec, &consts, 0.7, rot(p).distance(&rot(q))).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn kmeans_objective_never_rises(points in prop::collection::vec(point(), 20..200), n in 1usize..8, seed in any::<u64>()) {
        let fit = kmeans(&points, n, seed).unwrap();
        for w in fit.objective_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        prop_assert_eq!(&kmeans(&points, n, seed).unwrap().centers, &fit.centers);
        for (p, &l) in points.iter().zip(&fit.labels) {
            let best = fit.centers.iter().map(|c| p.distance(c)).fold(f64::INFINITY, f64::min);
            prop_assert!(p.distance(&fit.centers[l]) <= best + 1e-9);
        }
    }

    #[test]
    fn gini_in_unit_interval(v in prop::collection::vec(0.0..100.0f64, 0..20)) {
        let g = gini(&v);
        prop_assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn combined_cost_in_range(points in prop::collection::vec((0.0..500.0f64, 0.0..10.0f64), 1..6)) {
        let (costs, _) = combined_cost(&points);
        prop_assert!(costs.iter().all(|c| (0.0..=2.0).contains(c)));
    }

    #[test]
    fn selection_is_a_valid_partition(
        plans in prop::collection::vec(
            prop::collection::vec((prop::collection::btree_set(1u64..7, 0..4), 0.0..50.0f64), 1..8),
            1..4,
        ),
    ) {
        let universe: BTreeSet<u64> = plans.iter().flatten().flat_map(|(c, _)| c.iter().copied()).collect();
        let inst = PartitionInstance {
            universe: universe.into_iter().collect(),
            plans: plans
                .iter()
                .map(|l| l.iter().map(|(c, cost)| PlanOption::new(c.iter().copied().collect(), *cost)).collect())
                .collect(),
        };
        if let Ok(sel) = select_plans(&inst) {
            prop_assert_eq!(sel.choice.len(), inst.num_drones());
            prop_assert_eq!(inst.evaluate(&sel.choice), Some(sel.cost));
            prop_assert_eq!(select_plans(&inst).unwrap(), sel);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generation_is_pure_and_valid(seed in any::<u64>(), per_window in 1usize..30) {
        let scenario = ScenarioConfig { rng_seed: seed, ..ScenarioConfig::default() };
        let a = generate_synthetic(&scenario, 2.5, 4, per_window).unwrap();
        let b = generate_synthetic(&scenario, 2.5, 4, per_window).unwrap();
        prop_assert_eq!(&a, &b);
        for r in &a {
            prop_assert!(r.validate(&scenario, 2.5).is_ok());
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_requests(&path, &a).unwrap();
        let mut back = load_requests(&path, &scenario, 2.5).unwrap();
        let mut orig = a.clone();
        orig.sort_by_key(|r| (r.demand_window, r.id));
        back.sort_by_key(|r| (r.demand_window, r.id));
        prop_assert_eq!(back, orig);
    }

    #[test]
    fn episodes_keep_invariants(seed in 0u64..1_000) {
        let rc = small_run(seed);
        let setup = Setup::new(&rc).unwrap();
        let day = setup.eval_day(0);
        let mut env = setup.environment(MethodId::MarOps, &day).unwrap();
        let mut c = FlightRangeController::for_env(&env, &LearningConfig::default(), seed).with_mode(ActionMode::Uniform);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = run_episode(&mut env, &mut c, &mut rng).unwrap();
        prop_assert_eq!(out.metrics.violations.total(), 0);
        prop_assert!(out.metrics.delivered_count <= day.len());
        let by_drone = |u: usize| out.trace.iter().filter(move |r| r.drone == u).collect::<Vec<_>>();
        for u in 0..rc.scenario.num_drones {
            let rows = by_drone(u);
            for w in rows.windows(2) {
                prop_assert_eq!(w[0].end_depot, w[1].start_depot);
            }
            prop_assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.battery_after)));
        }
    }
}
