use adcell::harness::{
    gen_half_tight, gen_integrality_gap, gen_random_instance, monte_carlo, within_three_sigma,
    McOptions, McPolicy, ScenarioSampler,
};
use adcell::lp::{build_lp, solve_lp, LpMode, Variant};
use adcell::oracle::{expected_offline_opt_exact, online_opt_exact};
use adcell::rational::{ratio, to_f64};
use adcell::sampling::trial_rng;

#[test]
fn budget_allocator_on_four_query_gap() {
    let inst = gen_integrality_gap(4).unwrap();
    let exact = ratio(175, 256);
    assert_eq!(expected_offline_opt_exact(&inst).unwrap(), exact);
    let report = monte_carlo(&inst, McPolicy::Ipb, McOptions::new(100_000, 17)).unwrap();
    assert!(within_three_sigma(
        report.mean_revenue,
        to_f64(&exact),
        report.std_error
    ));
    assert!(report.mean_revenue >= 1.0 - (-1.0f64).exp() - 3.0 * report.std_error);
}

#[test]
fn capacity_allocator_matches_the_knapsack_value() {
    let inst = gen_half_tight(&ratio(1, 10)).unwrap();
    let report = monte_carlo(&inst, McPolicy::Ipc, McOptions::new(100_000, 23)).unwrap();
    assert!(
        within_three_sigma(report.mean_revenue, 0.99, report.std_error),
        "mean {} se {}",
        report.mean_revenue,
        report.std_error
    );
}

#[test]
fn expectation_program_of_the_half_tight_instance() {
    let inst = gen_half_tight(&ratio(1, 10)).unwrap();
    let lp = build_lp(&inst, Variant::C, LpMode::Expectation).unwrap();
    assert_eq!(solve_lp(&lp).unwrap().objective_value, ratio(9, 5));
}

#[test]
fn online_sandwich_on_small_instances() {
    for seed in 0..6u64 {
        let inst = gen_random_instance(2, 5, 2, 5, 6, seed).unwrap();
        let online = to_f64(&online_opt_exact(&inst).unwrap());
        let offline = to_f64(&expected_offline_opt_exact(&inst).unwrap());
        let lp = solve_lp(&build_lp(&inst, Variant::BC, LpMode::Expectation).unwrap())
            .unwrap()
            .objective_value;
        assert!(online <= offline + 1e-12);
        assert!(offline <= to_f64(&lp) + 1e-12);
        for policy in [McPolicy::Ipb, McPolicy::Ipbc] {
            let report = monte_carlo(&inst, policy, McOptions::new(20_000, seed)).unwrap();
            assert!(
                report.mean_revenue <= online + 3.0 * report.std_error,
                "seed {seed} {policy}: {} above the online optimum {online}",
                report.mean_revenue
            );
        }
    }
}

#[test]
fn offline_rounding_clears_its_bound() {
    for seed in 0..4u64 {
        let inst = gen_random_instance(3, 7, 2, 5, 7, 40 + seed).unwrap();
        let report =
            monte_carlo(&inst, McPolicy::OfflineRound, McOptions::new(2_000, seed)).unwrap();
        assert_eq!(report.violations, 0);
        let margin = report.bound_margin.unwrap();
        let se = report.bound_margin_std_error.unwrap();
        assert!(margin >= -3.0 * se, "seed {seed}: margin {margin} se {se}");
    }
}

#[test]
fn reports_are_reproducible() {
    let inst = gen_random_instance(2, 6, 2, 5, 6, 3).unwrap();
    for policy in [
        McPolicy::Ipb,
        McPolicy::Ipc,
        McPolicy::Ipbc,
        McPolicy::OfflineRound,
    ] {
        let a = monte_carlo(&inst, policy, McOptions::new(500, 8)).unwrap();
        let b = monte_carlo(&inst, policy, McOptions::new(500, 8)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn arrival_frequencies_match_probabilities() {
    let inst = gen_random_instance(2, 8, 3, 5, 6, 12).unwrap();
    let sampler = ScenarioSampler::new(&inst).unwrap();
    let trials = 50_000;
    let mut counts = vec![0u32; inst.num_queries()];
    for t in 0..trials {
        let s = sampler.sample(&mut trial_rng(99, t));
        for (j, &hit) in s.arrived.iter().enumerate() {
            counts[j] += u32::from(hit);
        }
    }
    for (j, q) in inst.queries.iter().enumerate() {
        let p = to_f64(&q.prob);
        let freq = f64::from(counts[j]) / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            within_three_sigma(freq, p, se.max(1e-12)),
            "query {j}: {freq} vs {p}"
        );
    }
}
