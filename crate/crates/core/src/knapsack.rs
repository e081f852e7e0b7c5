//! Stochastic uniform knapsack: unit-size items arrive in time-ordered
//! partitions, at most one per partition, and each must be taken or
//! skipped on the spot. The optimal online rule comes from a backward
//! dynamic program over (partition, remaining capacity).

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, in_unit_interval, Rational};

pub const DEFAULT_CAPACITY_LIMIT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackItem {
    pub value: Rational,
    pub prob: Rational,
    pub partition: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnapsackInstance {
    pub capacity: u32,
    pub items: Vec<KnapsackItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KnapsackError {
    #[error("capacity {capacity} exceeds the table limit {limit}")]
    CapacityTooLarge { capacity: u32, limit: u32 },
    #[error("item {index}: {reason}")]
    InvalidItem { index: usize, reason: String },
    #[error("partition {partition} has total probability {total} > 1")]
    PartitionMass { partition: i64, total: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Take,
    Skip,
}

/// Expected value-to-go table. Row `t` (0-based) is the value before
/// partition `t` is revealed; row `u` is the terminal all-zero row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackPolicy {
    /// `table[t][r]`, `t` in `0..=u`, `r` in `0..=capacity`.
    pub table: Vec<Vec<Rational>>,
    /// Partition labels in increasing order; index `t` labels row `t`.
    pub partitions: Vec<i64>,
}

impl KnapsackPolicy {
    pub fn capacity(&self) -> usize {
        self.table.first().map_or(0, |row| row.len() - 1)
    }

    pub fn num_partitions(&self) -> usize {
        self.partitions.len()
    }

    pub fn value(&self, t: usize, r: usize) -> &Rational {
        &self.table[t][r]
    }

    /// Value of the whole process at full capacity.
    pub fn expected_value(&self) -> &Rational {
        &self.table[0][self.capacity()]
    }

    /// Row index of a partition label.
    pub fn partition_index(&self, label: i64) -> Option<usize> {
        self.partitions.binary_search(&label).ok()
    }
}

/// Fills the value table for partitions given as lists of (mass, value)
/// pairs. Shared with the online allocators, where one "item" is an
/// (advertiser, query) pair.
pub(crate) fn fill_table(
    partitions: &[Vec<(Rational, Rational)>],
    capacity: usize,
) -> Vec<Vec<Rational>> {
    let u = partitions.len();
    let mut table = vec![vec![Rational::zero(); capacity + 1]; u + 1];
    for t in (0..u).rev() {
        let mass: Rational = partitions[t].iter().map(|(p, _)| p).sum();
        let rest = Rational::one() - &mass;
        for r in 1..=capacity {
            let skip = table[t + 1][r].clone();
            let mut acc = &rest * &skip;
            for (p, v) in &partitions[t] {
                let take = v + &table[t + 1][r - 1];
                acc += p * if take >= skip { take } else { skip.clone() };
            }
            table[t][r] = acc;
        }
    }
    table
}

/// Take iff there is room and `value + E[t+1][r-1] >= E[t+1][r]`.
pub(crate) fn decide_on(table: &[Vec<Rational>], t: usize, r: usize, value: &Rational) -> Decision {
    if r == 0 || t + 1 >= table.len() {
        return Decision::Skip;
    }
    if value + &table[t + 1][r - 1] >= table[t + 1][r] {
        Decision::Take
    } else {
        Decision::Skip
    }
}

impl KnapsackInstance {
    pub fn validate(&self) -> Result<(), KnapsackError> {
        let mut mass: BTreeMap<i64, Rational> = BTreeMap::new();
        for (index, item) in self.items.iter().enumerate() {
            if !in_unit_interval(&item.prob) {
                return Err(KnapsackError::InvalidItem {
                    index,
                    reason: format!("probability {} outside [0, 1]", format_rational(&item.prob)),
                });
            }
            if item.value.is_negative() {
                return Err(KnapsackError::InvalidItem {
                    index,
                    reason: format!("negative value {}", format_rational(&item.value)),
                });
            }
            *mass.entry(item.partition).or_insert_with(Rational::zero) += &item.prob;
        }
        for (partition, total) in mass {
            if total > Rational::one() {
                return Err(KnapsackError::PartitionMass {
                    partition,
                    total: format_rational(&total),
                });
            }
        }
        Ok(())
    }

    pub fn total_prob(&self) -> Rational {
        self.items.iter().map(|i| &i.prob).sum()
    }

    /// True when `sum p_j <= C`, the load under which the half bound holds.
    pub fn load_within_capacity(&self) -> bool {
        self.total_prob() <= Rational::from_integer(self.capacity.into())
    }

    fn grouped(&self) -> (Vec<i64>, Vec<Vec<(Rational, Rational)>>) {
        let mut by_partition: BTreeMap<i64, Vec<(Rational, Rational)>> = BTreeMap::new();
        for item in &self.items {
            by_partition
                .entry(item.partition)
                .or_default()
                .push((item.prob.clone(), item.value.clone()));
        }
        by_partition.into_iter().unzip()
    }
}

pub fn knapsack_dp(ki: &KnapsackInstance) -> Result<KnapsackPolicy, KnapsackError> {
    knapsack_dp_with_limit(ki, DEFAULT_CAPACITY_LIMIT)
}

pub fn knapsack_dp_with_limit(
    ki: &KnapsackInstance,
    limit: u32,
) -> Result<KnapsackPolicy, KnapsackError> {
    if ki.capacity > limit {
        return Err(KnapsackError::CapacityTooLarge {
            capacity: ki.capacity,
            limit,
        });
    }
    ki.validate()?;
    let (partitions, groups) = ki.grouped();
    Ok(KnapsackPolicy {
        table: fill_table(&groups, ki.capacity as usize),
        partitions,
    })
}

/// Decision at 0-based partition row `t` with `r` slots left.
pub fn knapsack_decide(policy: &KnapsackPolicy, t: usize, r: usize, value: &Rational) -> Decision {
    decide_on(&policy.table, t, r, value)
}

/// `sum_j p_j v_j`.
pub fn knapsack_oe(ki: &KnapsackInstance) -> Rational {
    ki.items.iter().map(|i| &i.prob * &i.value).sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedOnline {
    pub value: Rational,
    /// Set when `sum p_j > C`; the value is still exact, only the half
    /// bound against `knapsack_oe` is no longer guaranteed.
    pub load_warning: Option<String>,
}

pub fn knapsack_expected_online(ki: &KnapsackInstance) -> Result<ExpectedOnline, KnapsackError> {
    let policy = knapsack_dp(ki)?;
    let load_warning = (!ki.load_within_capacity()).then(|| {
        format!(
            "total probability {} exceeds capacity {}",
            format_rational(&ki.total_prob()),
            ki.capacity
        )
    });
    Ok(ExpectedOnline {
        value: policy.expected_value().clone(),
        load_warning,
    })
}

/// Replaces every partition by a single item with the partition's total
/// probability and the probability-weighted mean value.
pub fn merge_partitions(ki: &KnapsackInstance) -> KnapsackInstance {
    let mut merged: BTreeMap<i64, (Rational, Rational)> = BTreeMap::new();
    for item in &ki.items {
        let e = merged
            .entry(item.partition)
            .or_insert_with(|| (Rational::zero(), Rational::zero()));
        e.0 += &item.prob;
        e.1 += &item.prob * &item.value;
    }
    KnapsackInstance {
        capacity: ki.capacity,
        items: merged
            .into_iter()
            .map(|(partition, (p, pv))| KnapsackItem {
                value: if p.is_zero() {
                    Rational::zero()
                } else {
                    pv / &p
                },
                prob: p,
                partition,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn item(value: Rational, prob: Rational, partition: i64) -> KnapsackItem {
        KnapsackItem {
            value,
            prob,
            partition,
        }
    }

    fn two_halves() -> KnapsackInstance {
        KnapsackInstance {
            capacity: 1,
            items: vec![item(int(1), ratio(1, 2), 1), item(int(1), ratio(1, 2), 2)],
        }
    }

    fn tenth() -> KnapsackInstance {
        KnapsackInstance {
            capacity: 1,
            items: vec![item(int(1), ratio(9, 10), 1), item(int(9), ratio(1, 10), 2)],
        }
    }

    #[test]
    fn single_item() {
        let ki = KnapsackInstance {
            capacity: 1,
            items: vec![item(int(1), ratio(1, 2), 0)],
        };
        assert_eq!(*knapsack_dp(&ki).unwrap().value(0, 1), ratio(1, 2));
    }

    #[test]
    fn two_half_items() {
        let policy = knapsack_dp(&two_halves()).unwrap();
        assert_eq!(*policy.value(1, 1), ratio(1, 2));
        assert_eq!(*policy.value(0, 1), ratio(3, 4));
        assert_eq!(knapsack_decide(&policy, 0, 1, &int(1)), Decision::Take);
        assert_eq!(knapsack_oe(&two_halves()), int(1));
        assert_eq!(
            knapsack_expected_online(&two_halves()).unwrap().value,
            ratio(3, 4)
        );
    }

    #[test]
    fn tenth_instance() {
        let policy = knapsack_dp(&tenth()).unwrap();
        assert_eq!(*policy.value(1, 1), ratio(9, 10));
        assert_eq!(*policy.value(0, 1), ratio(99, 100));
        assert_eq!(knapsack_decide(&policy, 0, 1, &int(1)), Decision::Take);
        assert_eq!(knapsack_oe(&tenth()), ratio(9, 5));
        let online = knapsack_expected_online(&tenth()).unwrap();
        assert_eq!(online.value, ratio(99, 100));
        assert!(online.load_warning.is_none());
    }

    #[test]
    fn no_room_means_skip_and_ties_take() {
        let policy = knapsack_dp(&two_halves()).unwrap();
        assert_eq!(knapsack_decide(&policy, 0, 0, &int(100)), Decision::Skip);
        // value 1/2 + E[1][0] = 1/2 equals E[1][1] = 1/2
        assert_eq!(knapsack_decide(&policy, 0, 1, &ratio(1, 2)), Decision::Take);
        assert_eq!(knapsack_decide(&policy, 0, 1, &ratio(1, 3)), Decision::Skip);
    }

    #[test]
    fn deterministic_item_hits_upper_bound() {
        let ki = KnapsackInstance {
            capacity: 1,
            items: vec![item(int(5), int(1), 0)],
        };
        assert_eq!(knapsack_expected_online(&ki).unwrap().value, int(5));
        assert_eq!(knapsack_oe(&ki), int(5));
        assert_eq!(knapsack_oe(&KnapsackInstance::default()), int(0));
    }

    #[test]
    fn overload_is_only_a_warning() {
        let ki = KnapsackInstance {
            capacity: 1,
            items: vec![item(int(1), int(1), 0), item(int(1), int(1), 1)],
        };
        let online = knapsack_expected_online(&ki).unwrap();
        assert_eq!(online.value, int(1));
        assert!(online.load_warning.is_some());
    }

    #[test]
    fn rejects_bad_input() {
        let big = KnapsackInstance {
            capacity: 65,
            items: vec![],
        };
        assert!(matches!(
            knapsack_dp(&big),
            Err(KnapsackError::CapacityTooLarge { .. })
        ));
        assert!(knapsack_dp_with_limit(&big, 100).is_ok());
        let heavy = KnapsackInstance {
            capacity: 1,
            items: vec![item(int(1), ratio(2, 3), 0), item(int(1), ratio(2, 3), 0)],
        };
        assert!(matches!(
            knapsack_dp(&heavy),
            Err(KnapsackError::PartitionMass { .. })
        ));
    }

    fn arb_instance() -> impl Strategy<Value = KnapsackInstance> {
        (
            1u32..4,
            proptest::collection::vec((0i64..6, 1i64..4, 0i64..10), 0..8),
        )
            .prop_map(|(capacity, raw)| {
                let mut mass: BTreeMap<i64, i64> = BTreeMap::new();
                let mut items = Vec::new();
                for (partition, num, value) in raw {
                    // probabilities in sixths, kept within one per partition
                    let used = mass.entry(partition).or_insert(0);
                    if *used + num > 6 {
                        continue;
                    }
                    *used += num;
                    items.push(item(int(value), ratio(num, 6), partition));
                }
                KnapsackInstance { capacity, items }
            })
    }

    proptest! {
        #[test]
        fn table_satisfies_recursion(ki in arb_instance()) {
            let policy = knapsack_dp(&ki).unwrap();
            let (_, groups) = ki.grouped();
            let u = groups.len();
            for t in 0..u {
                prop_assert!(policy.value(t, 0).is_zero());
                for r in 1..=policy.capacity() {
                    let next = &policy.table[t + 1];
                    let mass: Rational = groups[t].iter().map(|(p, _)| p).sum();
                    let mut expect = (Rational::one() - mass) * &next[r];
                    for (p, v) in &groups[t] {
                        let take = v + &next[r - 1];
                        expect += p * take.max(next[r].clone());
                    }
                    prop_assert_eq!(policy.value(t, r), &expect);
                }
            }
            prop_assert!(policy.table[u].iter().all(|v| v.is_zero()));
        }

        #[test]
        fn monotone_with_decreasing_marginals(ki in arb_instance()) {
            let policy = knapsack_dp(&ki).unwrap();
            for row in &policy.table {
                for r in 1..row.len() {
                    prop_assert!(row[r - 1] <= row[r]);
                    let scaled = Rational::new((r as i64 - 1).into(), (r as i64).into()) * &row[r];
                    prop_assert!(row[r - 1] >= scaled);
                }
            }
        }

        #[test]
        fn half_bound_under_load(ki in arb_instance()) {
            prop_assume!(ki.load_within_capacity());
            let online = knapsack_expected_online(&ki).unwrap().value;
            let oe = knapsack_oe(&ki);
            prop_assert!(&oe / Rational::from_integer(2.into()) <= online);
            prop_assert!(online <= oe);
        }

        #[test]
        fn merging_partitions_never_helps(ki in arb_instance()) {
            let merged = merge_partitions(&ki);
            prop_assert_eq!(knapsack_oe(&merged), knapsack_oe(&ki));
            let before = knapsack_dp(&ki).unwrap().expected_value().clone();
            let after = knapsack_dp(&merged).unwrap().expected_value().clone();
            prop_assert!(after <= before);
        }
    }
}
