//! NSW instances, allocations, and the log-domain objective.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::LogNsw;
use crate::itemset::ItemSet;
use crate::scalar::Scalar;
use crate::valuation::{check_submodular, CheckMode, Valuation, ValuationKind, MAX_EXHAUSTIVE_ITEMS};

/// Agent weight as an exact fraction.
pub type Weight = Ratio<u64>;

/// Agents with weights, an ordered item universe, and one valuation per agent.
///
/// Construction does not validate; call [`Instance::validate`] (the solvers do).
#[derive(Clone, Debug)]
pub struct Instance<T> {
    agent_ids: Vec<String>,
    weights: Vec<Weight>,
    item_ids: Vec<String>,
    valuations: Vec<Valuation<T>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationIssue {
    NoAgents,
    WeightSum { num: String, den: String },
    ZeroWeight { agent: String },
    DuplicateAgent(String),
    DuplicateItem(String),
    ValuationCount { expected: usize, found: usize },
    DomainMismatch { agent: String, expected: usize, found: usize },
    NotSubmodular { agent: String },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoAgents => f.write_str("instance has no agents"),
            Self::WeightSum { num, den } => write!(f, "weights sum to {num}/{den}, not 1"),
            Self::ZeroWeight { agent } => write!(f, "agent {agent} has a zero weight"),
            Self::DuplicateAgent(id) => write!(f, "duplicate agent id {id:?}"),
            Self::DuplicateItem(id) => write!(f, "duplicate item id {id:?}"),
            Self::ValuationCount { expected, found } => {
                write!(f, "expected {expected} valuations, found {found}")
            }
            Self::DomainMismatch { agent, expected, found } => write!(
                f,
                "valuation of agent {agent} covers {found} items but the instance has {expected}"
            ),
            Self::NotSubmodular { agent } => {
                write!(f, "valuation of agent {agent} is not monotone submodular")
            }
        }
    }
}

impl<T: Scalar> Instance<T> {
    pub fn new(agent_ids: Vec<String>, weights: Vec<Weight>, item_ids: Vec<String>, valuations: Vec<Valuation<T>>) -> Self {
        Self { agent_ids, weights, item_ids, valuations }
    }

    /// Equal weights `1/n`, agents named `a1..`, items named `g1..`.
    pub fn symmetric(valuations: Vec<Valuation<T>>, num_items: usize) -> Self {
        let n = valuations.len() as u64;
        let weights = vec![Weight::new(1, n.max(1)); valuations.len()];
        Self::with_weights(valuations, weights, num_items)
    }

    /// Agents named `a1..`, items named `g1..`.
    pub fn with_weights(valuations: Vec<Valuation<T>>, weights: Vec<Weight>, num_items: usize) -> Self {
        let agent_ids = (1..=valuations.len()).map(|i| format!("a{i}")).collect();
        let item_ids = (1..=num_items).map(|j| format!("g{j}")).collect();
        Self::new(agent_ids, weights, item_ids, valuations)
    }

    pub fn num_agents(&self) -> usize {
        self.agent_ids.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn agent_ids(&self) -> &[String] {
        &self.agent_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn valuations(&self) -> &[Valuation<T>] {
        &self.valuations
    }

    pub fn valuation(&self, agent: usize) -> &Valuation<T> {
        &self.valuations[agent]
    }

    /// Weight of `agent` as a float.
    pub fn weight(&self, agent: usize) -> T {
        let w = self.weights[agent];
        T::of(*w.numer() as f64) / T::of(*w.denom() as f64)
    }

    pub fn all_items(&self) -> ItemSet {
        ItemSet::full(self.num_items())
    }

    pub fn is_symmetric(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }

    /// `n · w_max`, exactly.
    pub fn n_times_max_weight(&self) -> Ratio<u64> {
        let w_max = self.weights.iter().copied().max().unwrap_or_else(Ratio::zero);
        w_max * self.num_agents() as u64
    }

    /// Returns the same instance with agent `agent`'s valuation scaled by `factor`.
    pub fn with_scaled_valuation(&self, agent: usize, factor: T) -> Self {
        let mut out = self.clone();
        out.valuations[agent] = self.valuations[agent].scaled(factor);
        out
    }

    /// Lists every structural problem: weight sum, id uniqueness, valuation
    /// domains, and submodularity of explicit tables.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let n = self.num_agents();
        let m = self.num_items();
        if n == 0 {
            issues.push(ValidationIssue::NoAgents);
        }
        let mut seen = HashSet::new();
        for id in &self.agent_ids {
            if !seen.insert(id) {
                issues.push(ValidationIssue::DuplicateAgent(id.clone()));
            }
        }
        let mut seen = HashSet::new();
        for id in &self.item_ids {
            if !seen.insert(id) {
                issues.push(ValidationIssue::DuplicateItem(id.clone()));
            }
        }
        let mut sum = BigRational::zero();
        for (id, w) in self.agent_ids.iter().zip(&self.weights) {
            if w.is_zero() {
                issues.push(ValidationIssue::ZeroWeight { agent: id.clone() });
            }
            sum += BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom()));
        }
        if self.weights.len() != n {
            issues.push(ValidationIssue::ValuationCount { expected: n, found: self.weights.len() });
        }
        if n > 0 && !sum.is_one() {
            issues.push(ValidationIssue::WeightSum {
                num: sum.numer().to_string(),
                den: sum.denom().to_string(),
            });
        }
        if self.valuations.len() != n {
            issues.push(ValidationIssue::ValuationCount { expected: n, found: self.valuations.len() });
        }
        for (id, v) in self.agent_ids.iter().zip(&self.valuations) {
            if v.num_items() != m {
                issues.push(ValidationIssue::DomainMismatch {
                    agent: id.clone(),
                    expected: m,
                    found: v.num_items(),
                });
                continue;
            }
            if v.kind() == ValuationKind::ExplicitTable {
                let mode = if m <= MAX_EXHAUSTIVE_ITEMS {
                    CheckMode::Exhaustive
                } else {
                    CheckMode::Sampled { trials: 20_000, seed: 0 }
                };
                let clean = check_submodular(v, &self.all_items(), mode).map(|x| x.is_empty()).unwrap_or(false);
                if !clean {
                    issues.push(ValidationIssue::NotSubmodular { agent: id.clone() });
                }
            }
        }
        issues
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let issues = self.validate();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(issues))
        }
    }
}

/// Pairwise-disjoint bundles, one per agent. Items in no bundle are unallocated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Allocation {
    bundles: Vec<ItemSet>,
}

impl Allocation {
    pub fn new(bundles: Vec<ItemSet>) -> Result<Self> {
        let mut seen = ItemSet::new();
        for b in &bundles {
            if let Some(j) = b.intersection(&seen).first() {
                return Err(Error::OverlappingBundles(j));
            }
            seen = seen.union(b);
        }
        Ok(Self { bundles })
    }

    pub fn empty(num_agents: usize) -> Self {
        Self { bundles: vec![ItemSet::new(); num_agents] }
    }

    pub fn num_agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundle(&self, agent: usize) -> &ItemSet {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn into_bundles(self) -> Vec<ItemSet> {
        self.bundles
    }

    /// Union of all bundles.
    pub fn allocated(&self) -> ItemSet {
        self.bundles.iter().fold(ItemSet::new(), |acc, b| acc.union(b))
    }

    pub fn is_complete(&self, num_items: usize) -> bool {
        self.allocated() == ItemSet::full(num_items)
    }

    /// Agent holding `item`, if any.
    pub fn holder(&self, item: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(item))
    }

    pub(crate) fn check_against<T: Scalar>(&self, inst: &Instance<T>) -> Result<()> {
        if self.num_agents() != inst.num_agents() {
            return Err(Error::BundleCount {
                expected: inst.num_agents(),
                found: self.num_agents(),
            });
        }
        let m = inst.num_items();
        if let Some(j) = self.allocated().iter().find(|&j| j >= m) {
            return Err(Error::UnknownItem { item: j, universe: m });
        }
        Ok(())
    }
}

/// `Σ_i w_i · log v_i(S_i)`; negative infinity when some bundle is worth zero.
pub fn nsw_log<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> Result<LogNsw<T>> {
    alloc.check_against(inst)?;
    Ok(nsw_log_unchecked(inst, alloc.bundles()))
}

pub(crate) fn nsw_log_unchecked<T: Scalar>(inst: &Instance<T>, bundles: &[ItemSet]) -> LogNsw<T> {
    let mut total = T::zero();
    for (i, b) in bundles.iter().enumerate() {
        let v = inst.valuation(i).value(b);
        if v <= T::zero() {
            return LogNsw::NegInfinity;
        }
        total = total + inst.weight(i) * v.ln();
    }
    LogNsw::Finite(total)
}

/// Gives every unallocated item to the agent valuing it most as a singleton
/// (smallest agent index on ties). Monotonicity makes this never lower NSW.
pub fn complete_with_leftovers<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> Result<Allocation> {
    alloc.check_against(inst)?;
    let mut bundles = alloc.bundles().to_vec();
    if bundles.is_empty() {
        return Ok(alloc.clone());
    }
    let leftovers = inst.all_items().difference(&alloc.allocated());
    for j in leftovers.iter() {
        let mut best = 0;
        let mut best_value = inst.valuation(0).value_of_item(j);
        for i in 1..inst.num_agents() {
            let x = inst.valuation(i).value_of_item(j);
            if x > best_value {
                best = i;
                best_value = x;
            }
        }
        bundles[best].insert(j);
    }
    Allocation::new(bundles)
}
