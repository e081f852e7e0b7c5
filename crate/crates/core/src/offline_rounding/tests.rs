use num_traits::{One, Zero};
use proptest::prelude::*;

use super::*;
use crate::harness::{
    gen_random_instance, sample_scenario, solve_realized, uniform_feasible_point,
};
use crate::model::{exclusivity_groups, fractional_revenue, Advertiser, Customer, Query};
use crate::rational::{int, ratio};
use crate::sampling::trial_rng;

fn unit_cycle() -> Instance {
    Instance::new(
        vec![
            Advertiser { budget: int(10) },
            Advertiser { budget: int(10) },
        ],
        vec![
            Query::new(0, 1, int(1), [(0, int(1)), (1, int(1))]),
            Query::new(1, 1, int(1), [(0, int(1)), (1, int(1))]),
        ],
        vec![Customer { capacity: 2 }, Customer { capacity: 2 }],
    )
}

fn halves(inst: &Instance) -> FractionalAssignment {
    let mut y = FractionalAssignment::new();
    for (i, j, _) in inst.edges() {
        y.set(i, j, ratio(1, 2));
    }
    y
}

#[test]
fn ratio_bound_examples() {
    let equal = Instance::new(
        vec![Advertiser { budget: int(3) }],
        vec![Query::new(0, 1, int(1), [(0, int(3))])],
        vec![Customer { capacity: 1 }],
    );
    assert_eq!(approx_ratio_bound(&equal).unwrap(), ratio(3, 4));
    let tenth = Instance::new(
        vec![Advertiser { budget: int(10) }],
        vec![Query::new(0, 1, int(1), [(0, int(1))])],
        vec![Customer { capacity: 1 }],
    );
    assert_eq!(approx_ratio_bound(&tenth).unwrap(), ratio(39, 40));
    let single = Instance::new(
        vec![Advertiser { budget: int(4) }],
        vec![
            Query::new(0, 1, int(1), [(0, int(1))]),
            Query::new(0, 2, int(1), [(0, int(2))]),
        ],
        vec![Customer { capacity: 2 }],
    );
    assert_eq!(approx_ratio_bound(&single).unwrap(), ratio(7, 8));
    let over = Instance::new(
        vec![Advertiser { budget: int(1) }],
        vec![Query::new(0, 1, int(1), [(0, int(2))])],
        vec![Customer { capacity: 1 }],
    );
    assert!(matches!(
        approx_ratio_bound(&over),
        Err(RoundingError::BidExceedsBudget {
            advertiser: 0,
            query: 0,
            ..
        })
    ));
}

#[test]
fn forest_input_is_unchanged() {
    let inst = unit_cycle();
    let mut y = FractionalAssignment::new();
    y.set(0, 0, ratio(1, 2));
    y.set(1, 0, ratio(1, 2));
    y.set(1, 1, ratio(1, 3));
    assert_eq!(forestify(&inst, &y).unwrap(), y);
}

#[test]
fn symmetric_four_cycle() {
    let inst = unit_cycle();
    let y = halves(&inst);
    assert!(!support_forest(&inst, &y).is_acyclic());
    let z = forestify(&inst, &y).unwrap();
    assert_eq!(fractional_revenue(&inst, &z).unwrap(), int(2));
    assert!(support_forest(&inst, &z).is_acyclic());
    assert!(z.iter().any(|(_, _, v)| v.is_one()) || z.len() < 4);
    assert_eq!(z.payments(&inst), y.payments(&inst));
}

#[test]
fn unequal_bids_reverse_the_cycle() {
    // Bids (2, 1, 1, 1) around the cycle a0 q0 a1 q1: the forward
    // orientation would lose spend at a0, so the reverse one is used.
    let inst = Instance::new(
        vec![
            Advertiser { budget: int(10) },
            Advertiser { budget: int(10) },
        ],
        vec![
            Query::new(0, 1, int(1), [(0, int(2)), (1, int(1))]),
            Query::new(1, 1, int(1), [(0, int(1)), (1, int(1))]),
        ],
        vec![Customer { capacity: 2 }, Customer { capacity: 2 }],
    );
    let y = halves(&inst);
    let before = fractional_revenue(&inst, &y).unwrap();
    assert_eq!(before, ratio(5, 2));
    let z = forestify(&inst, &y).unwrap();
    assert_eq!(fractional_revenue(&inst, &z).unwrap(), before);
    assert_eq!(z.payments(&inst), y.payments(&inst));
    assert!(support_forest(&inst, &z).is_acyclic());
    // Reversed: x[0,1] empties, x[1,1] fills, and x[0,0] rises by half as
    // much to keep a0's spend while q0's total drops.
    assert_eq!(z.get(0, 1), int(0));
    assert_eq!(z.get(1, 1), int(1));
    assert_eq!(z.get(1, 0), int(0));
    assert_eq!(z.get(0, 0), ratio(3, 4));
}

#[test]
fn integral_solution_is_returned_as_is() {
    let inst = unit_cycle();
    let mut y = FractionalAssignment::new();
    y.set(0, 0, int(1));
    y.set(1, 1, int(1));
    let s = Scenario::all_arrived(2);
    let (x, trace) = round_offline(&inst, &s, &y, &mut trial_rng(0, 0)).unwrap();
    assert!(trace.is_empty());
    assert_eq!(x.advertiser_of(0), Some(0));
    assert_eq!(x.advertiser_of(1), Some(1));
}

#[test]
fn shared_query_between_two_leaf_advertisers() {
    let inst = Instance::new(
        vec![Advertiser { budget: int(5) }, Advertiser { budget: int(5) }],
        vec![Query::new(0, 1, int(1), [(0, int(1)), (1, int(1))])],
        vec![Customer { capacity: 1 }],
    );
    let mut y = FractionalAssignment::new();
    y.set(0, 0, ratio(1, 2));
    y.set(1, 0, ratio(1, 2));
    let s = Scenario::all_arrived(1);
    let mut seen = [false; 2];
    for seed in 0..40 {
        let (x, trace) = round_offline(&inst, &s, &y, &mut trial_rng(seed, 0)).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.steps[0].case, CaseLabel::TwoLeafAdvertisers);
        let i = x.advertiser_of(0).expect("query is assigned");
        seen[i] = true;
        x.check(&inst, Some(&s)).unwrap();
    }
    assert_eq!(seen, [true, true]);
}

#[test]
fn linked_trees_keep_the_shared_capacity() {
    // Two single-edge trees whose queries belong to one full customer.
    let inst = Instance::new(
        vec![Advertiser { budget: int(5) }, Advertiser { budget: int(5) }],
        vec![
            Query::new(0, 1, int(1), [(0, int(1))]),
            Query::new(0, 2, int(1), [(1, int(2))]),
        ],
        vec![Customer { capacity: 1 }],
    );
    let mut y = FractionalAssignment::new();
    y.set(0, 0, ratio(1, 2));
    y.set(1, 1, ratio(1, 2));
    let s = Scenario::all_arrived(2);
    for seed in 0..20 {
        let (x, trace) = round_offline(&inst, &s, &y, &mut trial_rng(seed, 0)).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.steps[0].case, CaseLabel::LinkedPath);
        assert_eq!(x.len(), 1, "exactly the capacity is used");
    }
}

#[test]
fn trace_round_trips_through_jsonl() {
    let inst = unit_cycle();
    let y = halves(&inst);
    let s = Scenario::all_arrived(2);
    let (_, trace) = round_offline(&inst, &s, &y, &mut trial_rng(1, 0)).unwrap();
    assert_eq!(trace.steps[0].case, CaseLabel::CycleBreak);
    let text = trace.to_jsonl();
    assert_eq!(text.lines().count(), trace.len());
    assert_eq!(RoundingTrace::from_jsonl(&text).unwrap(), trace);
    assert!(text.contains("\"case\":\"cycle-break\""));
}

#[test]
fn infeasible_start_is_rejected() {
    let inst = unit_cycle();
    let mut y = FractionalAssignment::new();
    y.set(0, 0, ratio(2, 3));
    y.set(1, 0, ratio(2, 3));
    let s = Scenario::all_arrived(2);
    assert!(matches!(
        OfflineRounder::new(&inst, &s, &y),
        Err(RoundingError::Infeasible(_))
    ));
}

fn check_run(inst: &Instance, scenario: &Scenario, y: &FractionalAssignment, seed: u64) {
    let rounder = OfflineRounder::new(inst, scenario, y).unwrap();
    assert!(support_forest(inst, &rounder.forest_solution()).is_acyclic());
    let (x, trace) = rounder.round(&mut trial_rng(seed, 0)).unwrap();
    x.check(inst, Some(scenario)).unwrap();
    let mut payments = y.payments(inst);
    for step in &trace.steps {
        assert!(
            !step.fixed.is_empty() || !step.tightened.is_empty(),
            "step without progress: {step:?}"
        );
        if step.branch == Branch::Deterministic {
            assert_eq!(step.payments, payments, "deterministic step moved a spend");
        }
        payments = step.payments.clone();
    }
    assert_eq!(payments, x.payments(inst));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rounding_completes_from_optimal_and_interior_points(
        m in 1usize..5,
        n in 1usize..9,
        s in 1usize..4,
        bid_scale in 1u32..6,
        budget_scale in 1u32..8,
        seed in 0u64..1_000_000,
    ) {
        let inst = gen_random_instance(m, n, s, bid_scale, budget_scale, seed).unwrap();
        let scenario = sample_scenario(&inst, &mut trial_rng(seed, 1)).unwrap();
        let (y_star, _) = solve_realized(&inst, &scenario).unwrap().unwrap();
        check_run(&inst, &scenario, &y_star, seed);

        let interior = uniform_feasible_point(&inst, &scenario).unwrap();
        let mut mixed = FractionalAssignment::new();
        for (i, j, _) in inst.edges() {
            let v = (y_star.get(i, j) + interior.get(i, j)) / int(2);
            mixed.set(i, j, v);
        }
        check_run(&inst, &scenario, &mixed, seed);
    }

    #[test]
    fn forestify_keeps_spend_and_breaks_cycles(
        m in 2usize..5,
        n in 2usize..9,
        seed in 0u64..1_000_000,
    ) {
        let inst = gen_random_instance(m, n, 2, 5, 9, seed).unwrap();
        let mut arrived = vec![false; n];
        for group in exclusivity_groups(&inst) {
            arrived[group[0]] = true;
        }
        let y = uniform_feasible_point(&inst, &Scenario { arrived }).unwrap();
        let z = forestify(&inst, &y).unwrap();
        prop_assert_eq!(z.payments(&inst), y.payments(&inst));
        prop_assert!(support_forest(&inst, &z).is_acyclic());
        for (_, _, v) in z.iter() {
            prop_assert!(!v.is_zero());
        }
    }
}
