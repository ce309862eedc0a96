#![allow(dead_code)]

use nsw_core::generate::random_instance;
use nsw_core::{Family, Instance, ItemSet, Valuation, WeightMode};
use proptest::prelude::*;

pub fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

pub fn weight_mode() -> impl Strategy<Value = WeightMode> {
    prop::sample::select(vec![WeightMode::Symmetric, WeightMode::Asymmetric])
}

pub fn instance(family: Family, n: usize, m: usize, mode: WeightMode, seed: u64) -> Instance {
    random_instance(family, n, m, mode, seed).expect("n >= 1")
}

/// Favorite item (smallest index among maximizers) and its value, computed
/// without the library's endowment code.
pub fn favorite(v: &Valuation, universe: &ItemSet) -> (usize, f64) {
    let mut best: Option<(usize, f64)> = None;
    for j in universe.iter() {
        let x = v.value(&ItemSet::singleton(j));
        if best.is_none_or(|(_, b)| x > b) {
            best = Some((j, x));
        }
    }
    best.expect("nonempty universe")
}

pub fn endowed(v: &Valuation, offset: f64, s: &ItemSet) -> f64 {
    offset + v.value(s)
}

/// All subsets of `universe`.
pub fn subsets(universe: &ItemSet) -> Vec<ItemSet> {
    let items: Vec<usize> = universe.iter().collect();
    (0u64..1 << items.len()).map(|mask| ItemSet::from_mask(&items, mask)).collect()
}

/// `w_i · log v_i(S_i)` summed, straight from the definition.
pub fn log_nsw(inst: &Instance, bundles: &[ItemSet]) -> f64 {
    bundles
        .iter()
        .enumerate()
        .map(|(i, b)| inst.weight(i) * inst.valuation(i).value(b).ln())
        .sum()
}
