//! Seeded random instances with integer parameters in `[0, 100]`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance, Weight};
use crate::itemset::ItemSet;
use crate::scalar::Scalar;
use crate::valuation::Valuation;

/// Closed valuation families the generator can draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Additive,
    BudgetAdditive,
    Coverage,
    PartitionMatroidRank,
}

impl Family {
    pub const ALL: [Family; 4] = [Self::Additive, Self::BudgetAdditive, Self::Coverage, Self::PartitionMatroidRank];

    pub fn name(self) -> &'static str {
        match self {
            Self::Additive => "additive",
            Self::BudgetAdditive => "budget_additive",
            Self::Coverage => "coverage",
            Self::PartitionMatroidRank => "partition_matroid_rank",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::Format(format!("unknown valuation family {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WeightMode {
    /// `w_i = 1/n`.
    Symmetric,
    /// `w_i = k_i / Σ k` with `k_i` uniform in `1..=10`.
    Asymmetric,
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Self::Symmetric),
            "asymmetric" => Ok(Self::Asymmetric),
            _ => Err(Error::Format(format!("unknown weight mode {s:?}"))),
        }
    }
}

pub fn random_valuation<T: Scalar, R: Rng>(family: Family, m: usize, rng: &mut R) -> Valuation<T> {
    let int = |rng: &mut R, lo: u32, hi: u32| T::of(f64::from(rng.gen_range(lo..=hi)));
    let built = match family {
        Family::Additive => Valuation::additive((0..m).map(|_| int(rng, 0, 100)).collect()),
        Family::BudgetAdditive => {
            let values = (0..m).map(|_| int(rng, 0, 100)).collect();
            Valuation::budget_additive(values, int(rng, 1, 100))
        }
        Family::Coverage => {
            let ground = m.max(1);
            let weights = (0..ground).map(|_| int(rng, 0, 100)).collect();
            let covers = (0..m).map(|_| (0..ground).filter(|_| rng.gen_bool(0.4)).collect()).collect();
            Valuation::coverage(covers, weights)
        }
        Family::PartitionMatroidRank => {
            let classes = (m / 2).max(1);
            let class_of = (0..m).map(|_| rng.gen_range(0..classes)).collect();
            let capacities = (0..classes).map(|_| rng.gen_range(1..=3)).collect();
            Valuation::partition_matroid_rank(class_of, capacities, int(rng, 1, 100))
        }
    };
    built.expect("generated parameters are in range")
}

pub fn random_weights<R: Rng>(n: usize, mode: WeightMode, rng: &mut R) -> Vec<Weight> {
    match mode {
        WeightMode::Symmetric => vec![Weight::new(1, n as u64); n],
        WeightMode::Asymmetric => {
            let ks: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=10)).collect();
            let total: u64 = ks.iter().sum();
            ks.into_iter().map(|k| Weight::new(k, total)).collect()
        }
    }
}

/// Deterministic in `seed`.
pub fn random_instance<T: Scalar>(family: Family, n: usize, m: usize, mode: WeightMode, seed: u64) -> Result<Instance<T>> {
    random_instance_with(family, n, m, mode, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_instance_with<T: Scalar, R: Rng>(family: Family, n: usize, m: usize, mode: WeightMode, rng: &mut R) -> Result<Instance<T>> {
    if n == 0 {
        return Err(Error::Precondition("an instance needs at least one agent".into()));
    }
    let weights = random_weights(n, mode, rng);
    let valuations = (0..n).map(|_| random_valuation(family, m, rng)).collect();
    Ok(Instance::with_weights(valuations, weights, m))
}

/// Each item goes to a uniform agent or stays unallocated, with equal odds.
pub fn random_partial_allocation<R: Rng>(n: usize, m: usize, rng: &mut R) -> Allocation {
    let mut bundles = vec![ItemSet::new(); n];
    for j in 0..m {
        let slot = rng.gen_range(0..=n);
        if slot < n {
            bundles[slot].insert(j);
        }
    }
    Allocation::new(bundles).expect("each item is placed once")
}
