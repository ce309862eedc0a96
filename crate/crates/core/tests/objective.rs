mod common;

use common::{family, instance, log_nsw, weight_mode};
use nsw_core::generate::random_partial_allocation;
use nsw_core::{brute_force_opt, complete_with_leftovers, nsw_log, ratio, Allocation, ApproxRatio, ItemSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Every complete allocation, enumerated independently of the oracle.
fn all_allocations(n: usize, m: usize) -> Vec<Vec<ItemSet>> {
    let mut out = Vec::new();
    let total = (n as u64).pow(m as u32);
    for code in 0..total {
        let mut bundles = vec![ItemSet::new(); n];
        let mut c = code;
        for j in (0..m).rev() {
            bundles[(c % n as u64) as usize].insert(j);
            c /= n as u64;
        }
        out.push(bundles);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_matches_independent_enumeration(
        family in family(), mode in weight_mode(), n in 1usize..=3, m in 0usize..=6, seed in any::<u64>(),
    ) {
        let inst = instance(family, n, m, mode, seed);
        let opt = brute_force_opt(&inst).unwrap();
        let best = all_allocations(n, m).iter().map(|b| log_nsw(&inst, b)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(opt.enumerated, (n as u128).pow(m as u32));
        if best == f64::NEG_INFINITY {
            prop_assert!(!opt.opt_log.is_finite());
        } else {
            prop_assert!((opt.opt_log.value() - best).abs() <= 1e-12 * best.abs().max(1.0));
        }
        prop_assert_eq!(ratio(&inst, &opt.argmax).unwrap(), ApproxRatio::Finite(1.0));
    }

    #[test]
    fn optimum_survives_rescaling(
        family in family(), mode in weight_mode(), n in 1usize..=3, m in 1usize..=6, seed in any::<u64>(),
        agent_pick in any::<usize>(), lambda in prop::sample::select(vec![0.5, 3.0, 1000.0, 1e-3]),
    ) {
        let inst = instance(family, n, m, mode, seed);
        let agent = agent_pick % n;
        let scaled = inst.with_scaled_valuation(agent, lambda);
        let a = brute_force_opt(&inst).unwrap();
        let b = brute_force_opt(&scaled).unwrap();
        // The optimum moves by exactly w·log λ and the scaled argmax is still
        // optimal for the original instance.
        if a.opt_log.is_finite() {
            let shift = inst.weight(agent) * lambda.ln();
            prop_assert!((b.opt_log.value() - a.opt_log.value() - shift).abs() < 1e-9);
            let back = nsw_log(&inst, &b.argmax).unwrap().value();
            prop_assert!((back - a.opt_log.value()).abs() < 1e-9);
        } else {
            prop_assert!(!b.opt_log.is_finite());
        }
    }

    #[test]
    fn leftovers_complete_and_never_hurt(
        family in family(), mode in weight_mode(), n in 1usize..=4, m in 0usize..=9, seed in any::<u64>(),
    ) {
        let inst = instance(family, n, m, mode, seed);
        let partial = random_partial_allocation(n, m, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        let done = complete_with_leftovers(&inst, &partial).unwrap();
        prop_assert!(done.is_complete(m));
        for (before, after) in partial.bundles().iter().zip(done.bundles()) {
            prop_assert!(before.is_subset(after));
        }
        prop_assert!(nsw_log(&inst, &done).unwrap() >= nsw_log(&inst, &partial).unwrap());
        // Each leftover went to a highest singleton bidder, smallest index first.
        for j in inst.all_items().difference(&partial.allocated()).iter() {
            let bids: Vec<f64> = (0..n).map(|i| inst.valuation(i).value(&ItemSet::singleton(j))).collect();
            let top = bids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(done.holder(j), bids.iter().position(|&b| b == top));
        }
    }
}

#[test]
fn leftovers_worked_example() {
    let inst = nsw_core::Instance::symmetric(
        vec![
            nsw_core::Valuation::additive(vec![4.0, 1.0, 1.0, 1.0]).unwrap(),
            nsw_core::Valuation::additive(vec![1.0, 3.0, 1.0, 1.0]).unwrap(),
        ],
        4,
    );
    let partial = Allocation::new(vec![ItemSet::singleton(0), ItemSet::singleton(1)]).unwrap();
    let done = complete_with_leftovers(&inst, &partial).unwrap();
    assert_eq!(done.bundle(0), &ItemSet::from([0, 2, 3]));
    assert_eq!(done.bundle(1), &ItemSet::singleton(1));
}
