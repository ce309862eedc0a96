mod common;

use common::{endowed, family, favorite, subsets};
use nsw_core::generate::random_valuation;
use nsw_core::valuation::endow;
use nsw_core::{check_submodular, CheckMode, Family, ItemSet, Valuation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn draw(family: Family, m: usize, seed: u64) -> Valuation {
    random_valuation(family, m, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A random nonempty universe the valuation values positively.
fn universe(v: &Valuation, m: usize, mask: u64) -> Option<ItemSet> {
    let all: Vec<usize> = (0..m).collect();
    let j = ItemSet::from_mask(&all, mask);
    (v.value(&j) > 0.0).then_some(j)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn endowed_ratio_diminishes(family in family(), m in 1usize..=8, seed in any::<u64>(), mask in any::<u64>()) {
        let v = draw(family, m, seed);
        let Some(j_set) = universe(&v, m, mask) else { return Ok(()) };
        let (fav, offset) = favorite(&v, &j_set);
        let lib = endow(&v, &j_set).unwrap();
        prop_assert_eq!(lib.favorite(), fav);
        prop_assert_eq!(lib.offset(), offset);

        let all = subsets(&j_set);
        for t in &all {
            let vt = endowed(&v, offset, t);
            for s in all.iter().filter(|s| s.is_subset(t)) {
                let vs = endowed(&v, offset, s);
                for j in j_set.iter() {
                    let lhs = endowed(&v, offset, &t.with(j)) * vs;
                    let rhs = endowed(&v, offset, &s.with(j)) * vt;
                    prop_assert!(lhs <= rhs * (1.0 + 1e-12), "S={s:?} T={t:?} j={j}");
                }
            }
        }
    }

    #[test]
    fn endowed_marginals_bounded(family in family(), m in 1usize..=8, seed in any::<u64>(), mask in any::<u64>()) {
        let v = draw(family, m, seed);
        let Some(j_set) = universe(&v, m, mask) else { return Ok(()) };
        let (_, offset) = favorite(&v, &j_set);
        for r in subsets(&j_set) {
            let vr = endowed(&v, offset, &r);
            let total: f64 = r.iter().map(|k| vr - endowed(&v, offset, &r.without(k))).sum();
            for j in r.iter() {
                let lhs = endowed(&v, offset, &r.without(j));
                prop_assert!(lhs >= total - 1e-9 * vr.max(1.0), "R={r:?} j={j}: {lhs} < {total}");
            }
        }
    }

    #[test]
    fn generated_valuations_pass_checker(family in family(), m in 0usize..=10, seed in any::<u64>()) {
        let v = draw(family, m, seed);
        let found = check_submodular(&v, &ItemSet::full(m), CheckMode::Exhaustive).unwrap();
        prop_assert!(found.is_empty(), "{found:?}");
    }

    #[test]
    fn tabulated_family_is_equivalent(family in family(), m in 0usize..=6, seed in any::<u64>()) {
        let v = draw(family, m, seed);
        let items: Vec<usize> = (0..m).collect();
        let table = (0u64..1 << m).map(|mask| v.value(&ItemSet::from_mask(&items, mask))).collect();
        let t = Valuation::explicit_table(m, table).unwrap();
        prop_assert!(check_submodular(&t, &ItemSet::full(m), CheckMode::Exhaustive).unwrap().is_empty());
        for s in subsets(&ItemSet::full(m)) {
            prop_assert_eq!(t.value(&s), v.value(&s));
        }
    }

    #[test]
    fn eval_is_deterministic(family in family(), m in 1usize..=8, seed in any::<u64>(), mask in any::<u64>()) {
        let v = draw(family, m, seed);
        let items: Vec<usize> = (0..m).collect();
        let s = ItemSet::from_mask(&items, mask);
        prop_assert_eq!(v.eval(&s).unwrap().to_bits(), v.eval(&s).unwrap().to_bits());
    }
}

#[test]
fn complementarity_is_detected() {
    // v({0,1}) = 3 > v({0}) + v({1}) = 2.
    let v = Valuation::explicit_table(2, vec![0.0, 1.0, 1.0, 3.0]).unwrap();
    let found = check_submodular(&v, &ItemSet::full(2), CheckMode::Exhaustive).unwrap();
    assert!(!found.is_empty());
    let sampled = check_submodular(&v, &ItemSet::full(2), CheckMode::Sampled { trials: 200, seed: 3 }).unwrap();
    assert!(!sampled.is_empty());
}
