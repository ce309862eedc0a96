//! Valuation oracles: closed submodular families, explicit tables, the endowed
//! wrapper used by local search, and submodularity checkers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::scalar::Scalar;

/// Largest item universe an explicit table may cover.
pub const MAX_TABLE_ITEMS: usize = 20;

/// Largest universe `check_submodular` will enumerate exhaustively.
pub const MAX_EXHAUSTIVE_ITEMS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValuationKind {
    Additive,
    BudgetAdditive,
    Coverage,
    PartitionMatroidRank,
    ExplicitTable,
}

impl ValuationKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Additive => "additive",
            Self::BudgetAdditive => "budget_additive",
            Self::Coverage => "coverage",
            Self::PartitionMatroidRank => "partition_matroid_rank",
            Self::ExplicitTable => "explicit_table",
        }
    }
}

/// A monotone set function with `v(∅) = 0` over items `0..num_items`.
///
/// Immutable once built. The closed families are submodular by construction;
/// an explicit table is only checked for shape and sign here and must be
/// validated with [`check_submodular`].
#[derive(Clone, Debug, PartialEq)]
pub enum Valuation<T> {
    Additive {
        values: Vec<T>,
    },
    /// `min(cap, Σ values)`.
    BudgetAdditive {
        values: Vec<T>,
        cap: T,
    },
    /// Total weight of the ground elements covered by the chosen items.
    Coverage {
        covers: Vec<Vec<usize>>,
        ground_weights: Vec<T>,
    },
    /// `scale · Σ_c min(capacity_c, |S ∩ class_c|)`.
    PartitionMatroidRank {
        class_of: Vec<usize>,
        capacities: Vec<usize>,
        scale: T,
    },
    /// `table[mask]` where bit `j` of `mask` marks item `j`.
    ExplicitTable {
        num_items: usize,
        table: Vec<T>,
    },
}

fn check_param<T: Scalar>(x: T, what: &str) -> Result<()> {
    if x.is_finite() && x >= T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidValuation(format!("{what} must be finite and nonnegative, got {x}")))
    }
}

impl<T: Scalar> Valuation<T> {
    pub fn additive(values: Vec<T>) -> Result<Self> {
        for &x in &values {
            check_param(x, "item value")?;
        }
        Ok(Self::Additive { values })
    }

    pub fn budget_additive(values: Vec<T>, cap: T) -> Result<Self> {
        for &x in &values {
            check_param(x, "item value")?;
        }
        check_param(cap, "budget cap")?;
        Ok(Self::BudgetAdditive { values, cap })
    }

    pub fn coverage(covers: Vec<Vec<usize>>, ground_weights: Vec<T>) -> Result<Self> {
        for &x in &ground_weights {
            check_param(x, "ground weight")?;
        }
        for cover in &covers {
            if let Some(&u) = cover.iter().find(|&&u| u >= ground_weights.len()) {
                return Err(Error::InvalidValuation(format!(
                    "ground element {u} out of range ({} elements)",
                    ground_weights.len()
                )));
            }
        }
        Ok(Self::Coverage { covers, ground_weights })
    }

    pub fn partition_matroid_rank(class_of: Vec<usize>, capacities: Vec<usize>, scale: T) -> Result<Self> {
        check_param(scale, "scale")?;
        if let Some(&c) = class_of.iter().find(|&&c| c >= capacities.len()) {
            return Err(Error::InvalidValuation(format!(
                "class {c} out of range ({} classes)",
                capacities.len()
            )));
        }
        Ok(Self::PartitionMatroidRank { class_of, capacities, scale })
    }

    pub fn explicit_table(num_items: usize, table: Vec<T>) -> Result<Self> {
        if num_items > MAX_TABLE_ITEMS {
            return Err(Error::InvalidValuation(format!(
                "explicit tables support at most {MAX_TABLE_ITEMS} items, got {num_items}"
            )));
        }
        if table.len() != 1 << num_items {
            return Err(Error::InvalidValuation(format!(
                "explicit table over {num_items} items needs {} entries, got {}",
                1usize << num_items,
                table.len()
            )));
        }
        for &x in &table {
            check_param(x, "table entry")?;
        }
        if table[0] != T::zero() {
            return Err(Error::InvalidValuation("explicit table must have v(∅) = 0".into()));
        }
        Ok(Self::ExplicitTable { num_items, table })
    }

    pub fn kind(&self) -> ValuationKind {
        match self {
            Self::Additive { .. } => ValuationKind::Additive,
            Self::BudgetAdditive { .. } => ValuationKind::BudgetAdditive,
            Self::Coverage { .. } => ValuationKind::Coverage,
            Self::PartitionMatroidRank { .. } => ValuationKind::PartitionMatroidRank,
            Self::ExplicitTable { .. } => ValuationKind::ExplicitTable,
        }
    }

    /// Size of the item universe this valuation is defined over.
    pub fn num_items(&self) -> usize {
        match self {
            Self::Additive { values } | Self::BudgetAdditive { values, .. } => values.len(),
            Self::Coverage { covers, .. } => covers.len(),
            Self::PartitionMatroidRank { class_of, .. } => class_of.len(),
            Self::ExplicitTable { num_items, .. } => *num_items,
        }
    }

    /// `v(S)`, rejecting items outside the universe.
    pub fn eval(&self, s: &ItemSet) -> Result<T> {
        let universe = self.num_items();
        if s.bound() > universe {
            let item = s.iter().find(|&j| j >= universe).unwrap_or(universe);
            return Err(Error::UnknownItem { item, universe });
        }
        Ok(self.value(s))
    }

    /// `v(S)` for a set already known to lie inside the universe.
    pub fn value(&self, s: &ItemSet) -> T {
        debug_assert!(s.bound() <= self.num_items());
        match self {
            Self::Additive { values } => s.iter().fold(T::zero(), |acc, j| acc + values[j]),
            Self::BudgetAdditive { values, cap } => {
                let total = s.iter().fold(T::zero(), |acc, j| acc + values[j]);
                total.min(*cap)
            }
            Self::Coverage { covers, ground_weights } => {
                let mut covered = vec![false; ground_weights.len()];
                for j in s.iter() {
                    for &u in &covers[j] {
                        covered[u] = true;
                    }
                }
                covered
                    .iter()
                    .zip(ground_weights)
                    .filter(|(c, _)| **c)
                    .fold(T::zero(), |acc, (_, &w)| acc + w)
            }
            Self::PartitionMatroidRank { class_of, capacities, scale } => {
                let mut counts = vec![0usize; capacities.len()];
                for j in s.iter() {
                    counts[class_of[j]] += 1;
                }
                let rank: usize = counts.iter().zip(capacities).map(|(&c, &cap)| c.min(cap)).sum();
                *scale * T::of_usize(rank)
            }
            Self::ExplicitTable { table, .. } => {
                let mask = s.iter().fold(0usize, |m, j| m | 1 << j);
                table[mask]
            }
        }
    }

    pub fn value_of_item(&self, item: usize) -> T {
        self.value(&ItemSet::singleton(item))
    }

    /// Multiplies every value by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Self {
        match self {
            Self::Additive { values } => Self::Additive {
                values: values.iter().map(|&x| x * factor).collect(),
            },
            Self::BudgetAdditive { values, cap } => Self::BudgetAdditive {
                values: values.iter().map(|&x| x * factor).collect(),
                cap: *cap * factor,
            },
            Self::Coverage { covers, ground_weights } => Self::Coverage {
                covers: covers.clone(),
                ground_weights: ground_weights.iter().map(|&x| x * factor).collect(),
            },
            Self::PartitionMatroidRank { class_of, capacities, scale } => Self::PartitionMatroidRank {
                class_of: class_of.clone(),
                capacities: capacities.clone(),
                scale: *scale * factor,
            },
            Self::ExplicitTable { num_items, table } => Self::ExplicitTable {
                num_items: *num_items,
                table: table.iter().map(|&x| x * factor).collect(),
            },
        }
    }
}

/// `v̄(S) = v(favorite) + v(S)`: a valuation shifted by the value of the
/// agent's favorite item, so that `v̄(∅) > 0`.
#[derive(Clone, Debug)]
pub struct EndowedValuation<'a, T> {
    base: &'a Valuation<T>,
    favorite: usize,
    offset: T,
}

impl<'a, T: Scalar> EndowedValuation<'a, T> {
    pub fn base(&self) -> &'a Valuation<T> {
        self.base
    }

    pub fn favorite(&self) -> usize {
        self.favorite
    }

    /// `v(favorite) = v̄(∅)`.
    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn value(&self, s: &ItemSet) -> T {
        self.offset + self.base.value(s)
    }
}

/// Picks the favorite item of `v` in `universe` (smallest index among the
/// maximizers) and returns the endowed valuation.
pub fn endow<'a, T: Scalar>(v: &'a Valuation<T>, universe: &ItemSet) -> Result<EndowedValuation<'a, T>> {
    if universe.bound() > v.num_items() {
        let item = universe.iter().find(|&j| j >= v.num_items()).unwrap_or(0);
        return Err(Error::UnknownItem { item, universe: v.num_items() });
    }
    let mut best: Option<(usize, T)> = None;
    for j in universe.iter() {
        let x = v.value_of_item(j);
        if best.is_none_or(|(_, b)| x > b) {
            best = Some((j, x));
        }
    }
    match best {
        Some((favorite, offset)) if offset > T::zero() => Ok(EndowedValuation { base: v, favorite, offset }),
        _ => Err(Error::AgentNotEndowable),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `v(S) + v(T) < v(S∪T) + v(S∩T)`.
    Submodularity,
    /// `S ⊆ T` but `v(S) > v(T)`.
    Monotonicity,
    /// `v(∅) ≠ 0`.
    NonzeroEmpty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetViolation {
    pub kind: ViolationKind,
    pub s: ItemSet,
    pub t: ItemSet,
}

#[derive(Clone, Copy, Debug)]
pub enum CheckMode {
    /// Every pair of subsets; the universe may have at most
    /// [`MAX_EXHAUSTIVE_ITEMS`] items.
    Exhaustive,
    Sampled { trials: usize, seed: u64 },
}

/// Searches for violations of submodularity and monotonicity of `v` over
/// subsets of `universe`. An empty result means the check passed.
pub fn check_submodular<T: Scalar>(v: &Valuation<T>, universe: &ItemSet, mode: CheckMode) -> Result<Vec<SetViolation>> {
    let items: Vec<usize> = universe.iter().collect();
    if universe.bound() > v.num_items() {
        let item = items.iter().copied().find(|&j| j >= v.num_items()).unwrap_or(0);
        return Err(Error::UnknownItem { item, universe: v.num_items() });
    }
    let k = items.len();
    let mut out = Vec::new();
    if v.value(&ItemSet::new()) != T::zero() {
        out.push(SetViolation {
            kind: ViolationKind::NonzeroEmpty,
            s: ItemSet::new(),
            t: ItemSet::new(),
        });
    }
    match mode {
        CheckMode::Exhaustive => {
            if k > MAX_EXHAUSTIVE_ITEMS {
                return Err(Error::Precondition(format!(
                    "exhaustive check supports at most {MAX_EXHAUSTIVE_ITEMS} items, got {k}"
                )));
            }
            let table: Vec<T> = (0..1u64 << k).map(|mask| v.value(&ItemSet::from_mask(&items, mask))).collect();
            let slack = tolerance(&table);
            let full = (1u64 << k) - 1;
            for s in 0..=full {
                for pos in 0..k {
                    let t = s | 1 << pos;
                    if t != s && table[s as usize] > table[t as usize] + slack {
                        out.push(SetViolation {
                            kind: ViolationKind::Monotonicity,
                            s: ItemSet::from_mask(&items, s),
                            t: ItemSet::from_mask(&items, t),
                        });
                    }
                }
            }
            for s in 0..=full {
                for t in s + 1..=full {
                    let lhs = table[s as usize] + table[t as usize];
                    let rhs = table[(s | t) as usize] + table[(s & t) as usize];
                    if lhs + slack < rhs {
                        out.push(SetViolation {
                            kind: ViolationKind::Submodularity,
                            s: ItemSet::from_mask(&items, s),
                            t: ItemSet::from_mask(&items, t),
                        });
                    }
                }
            }
        }
        CheckMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draw = |rng: &mut ChaCha8Rng| -> ItemSet { items.iter().copied().filter(|_| rng.gen_bool(0.5)).collect() };
            for _ in 0..trials {
                let s = draw(&mut rng);
                let t = draw(&mut rng);
                let (vs, vt) = (v.value(&s), v.value(&t));
                let (vu, vi) = (v.value(&s.union(&t)), v.value(&s.intersection(&t)));
                let slack = tolerance(&[vs, vt, vu, vi]);
                if vs + vt + slack < vu + vi {
                    out.push(SetViolation {
                        kind: ViolationKind::Submodularity,
                        s: s.clone(),
                        t: t.clone(),
                    });
                }
                if vi > vs + slack || vs > vu + slack {
                    let (a, b) = if vi > vs + slack { (s.intersection(&t), s) } else { (s.clone(), s.union(&t)) };
                    out.push(SetViolation {
                        kind: ViolationKind::Monotonicity,
                        s: a,
                        t: b,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Absolute slack for comparing sums of values that went through float
/// addition in different orders.
fn tolerance<T: Scalar>(values: &[T]) -> T {
    let scale = values.iter().fold(T::one(), |m, &x| m.max(x.abs()));
    T::epsilon() * T::of(64.0) * scale
}
