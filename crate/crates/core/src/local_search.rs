//! Single-item exchange local search over endowed valuations, item prices
//! derived from a local optimum, and exhaustive checkers for the bounds those
//! prices satisfy.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::itemset::ItemSet;
use crate::scalar::Scalar;
use crate::valuation::{endow, EndowedValuation, MAX_EXHAUSTIVE_ITEMS};

/// Slack used by the bound checkers (never by the search itself).
pub const CHECK_TOLERANCE: f64 = 1e-9;

/// `(1 + eps)^(1/m) - 1`, computed as `expm1(log1p(eps) / m)`.
pub fn epsilon_bar<T: Scalar>(eps: T, m: usize) -> T {
    (eps.ln_1p() / T::of_usize(m.max(1))).exp_m1()
}

/// Upper bound on accepted swaps: `log m / log(1 + eps_bar) + 1`.
pub fn swap_bound<T: Scalar>(m: usize, eps_bar: T) -> T {
    T::of_usize(m.max(1)).ln() / eps_bar.ln_1p() + T::one()
}

/// The local-search universe `J` with the agents that value it (`Ā`) and
/// their endowed valuations.
#[derive(Clone, Debug)]
pub struct LocalSearchProblem<'a, T> {
    inst: &'a Instance<T>,
    universe: ItemSet,
    endowed: Vec<Option<EndowedValuation<'a, T>>>,
}

impl<'a, T: Scalar> LocalSearchProblem<'a, T> {
    pub fn new(inst: &'a Instance<T>, universe: ItemSet) -> Result<Self> {
        if let Some(j) = universe.iter().find(|&j| j >= inst.num_items()) {
            return Err(Error::UnknownItem { item: j, universe: inst.num_items() });
        }
        let mut endowed = Vec::with_capacity(inst.num_agents());
        for v in inst.valuations() {
            if v.value(&universe) > T::zero() {
                endowed.push(Some(endow(v, &universe)?));
            } else {
                endowed.push(None);
            }
        }
        Ok(Self { inst, universe, endowed })
    }

    pub fn instance(&self) -> &'a Instance<T> {
        self.inst
    }

    pub fn universe(&self) -> &ItemSet {
        &self.universe
    }

    pub fn is_active(&self, agent: usize) -> bool {
        self.endowed[agent].is_some()
    }

    /// Agents of `Ā` in index order.
    pub fn active_agents(&self) -> Vec<usize> {
        (0..self.endowed.len()).filter(|&i| self.is_active(i)).collect()
    }

    pub fn endowed(&self, agent: usize) -> Option<&EndowedValuation<'a, T>> {
        self.endowed[agent].as_ref()
    }

    /// Favorite item `ℓ(i)` of each agent (`None` outside `Ā`).
    pub fn favorites(&self) -> Vec<Option<usize>> {
        self.endowed.iter().map(|e| e.as_ref().map(EndowedValuation::favorite)).collect()
    }

    fn endowed_value(&self, agent: usize, s: &ItemSet) -> T {
        self.endowed[agent]
            .as_ref()
            .expect("endowed value requested for an agent outside the active set")
            .value(s)
    }

    /// Log of the potential factor gained by moving `item` from `from` to `to`.
    pub fn log_gain(&self, bundles: &[ItemSet], from: usize, item: usize, to: usize) -> T {
        let (ri, rk) = (&bundles[from], &bundles[to]);
        let wi = self.inst.weight(from);
        let wk = self.inst.weight(to);
        wi * (self.endowed_value(from, &ri.without(item)).ln() - self.endowed_value(from, ri).ln())
            + wk * (self.endowed_value(to, &rk.with(item)).ln() - self.endowed_value(to, rk).ln())
    }

    /// `Σ_{i∈Ā} w_i log v̄_i(R_i)`.
    pub fn potential(&self, bundles: &[ItemSet]) -> T {
        self.active_agents()
            .into_iter()
            .fold(T::zero(), |acc, i| acc + self.inst.weight(i) * self.endowed_value(i, &bundles[i]).ln())
    }

    /// Checks that `bundles` partitions `J` over `Ā` (or is empty when `Ā` is).
    pub fn check_partition(&self, bundles: &[ItemSet]) -> Result<()> {
        if bundles.len() != self.inst.num_agents() {
            return Err(Error::BundleCount { expected: self.inst.num_agents(), found: bundles.len() });
        }
        let mut seen = ItemSet::new();
        for (i, b) in bundles.iter().enumerate() {
            if let Some(j) = b.intersection(&seen).first() {
                return Err(Error::OverlappingBundles(j));
            }
            if !b.is_subset(&self.universe) {
                return Err(Error::Precondition(format!("bundle of agent {i} leaves the local-search universe")));
            }
            if !b.is_empty() && !self.is_active(i) {
                return Err(Error::Precondition(format!("agent {i} has no value on the universe but holds items")));
            }
            seen = seen.union(b);
        }
        // With no active agent nobody values J and it stays unallocated.
        let must_cover = self.endowed.iter().any(Option::is_some);
        if let Some(j) = self.universe.difference(&seen).first().filter(|_| must_cover) {
            return Err(Error::Precondition(format!("item {j} of the universe is unallocated")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapRecord<T> {
    pub iteration: usize,
    pub from: usize,
    pub item: usize,
    pub to: usize,
    pub log_gain: T,
    /// Potential after the swap.
    pub potential: T,
}

/// Evidence from the final scan that no improving swap remains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalOptCertificate<T> {
    pub triples_checked: usize,
    /// Largest log-gain seen in the final scan, if any triple exists.
    pub max_log_gain: Option<T>,
    /// `log(1 + eps_bar)`.
    pub threshold: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalSearchOutcome<T> {
    pub bundles: Vec<ItemSet>,
    pub eps_bar: T,
    pub swaps: usize,
    pub trace: Vec<SwapRecord<T>>,
    pub certificate: LocalOptCertificate<T>,
}

/// First-improvement local search: starts with all of `J` at the smallest
/// agent of `Ā` and repeatedly performs the first swap, in (from, item, to)
/// index order, whose log-gain strictly exceeds `log(1 + eps_bar)`.
pub fn local_search<T: Scalar>(problem: &LocalSearchProblem<'_, T>, eps_bar: T) -> Result<LocalSearchOutcome<T>> {
    if !(eps_bar >= T::zero()) {
        return Err(Error::Precondition(format!("eps_bar must be nonnegative, got {eps_bar}")));
    }
    let inst = problem.instance();
    let n = inst.num_agents();
    let threshold = eps_bar.ln_1p();
    let active = problem.active_agents();
    let mut bundles = vec![ItemSet::new(); n];
    let mut trace = Vec::new();
    let Some(&first) = active.first() else {
        return Ok(LocalSearchOutcome {
            bundles,
            eps_bar,
            swaps: 0,
            trace,
            certificate: LocalOptCertificate { triples_checked: 0, max_log_gain: None, threshold },
        });
    };
    bundles[first] = problem.universe().clone();
    let limit = if eps_bar > T::zero() {
        swap_bound(inst.num_items(), eps_bar).to_f64_lossy().floor() as usize + 1
    } else {
        usize::MAX
    };
    let mut potential = problem.potential(&bundles);
    loop {
        let mut found = None;
        let mut checked = 0;
        let mut max_gain: Option<T> = None;
        'scan: for &i in &active {
            for j in bundles[i].iter() {
                for &k in &active {
                    if k == i {
                        continue;
                    }
                    checked += 1;
                    let gain = problem.log_gain(&bundles, i, j, k);
                    if gain > threshold {
                        found = Some((i, j, k, gain));
                        break 'scan;
                    }
                    max_gain = Some(max_gain.map_or(gain, |g| g.max(gain)));
                }
            }
        }
        let Some((i, j, k, gain)) = found else {
            return Ok(LocalSearchOutcome {
                bundles,
                eps_bar,
                swaps: trace.len(),
                trace,
                certificate: LocalOptCertificate { triples_checked: checked, max_log_gain: max_gain, threshold },
            });
        };
        bundles[i].remove(j);
        bundles[k].insert(j);
        potential = potential + gain;
        trace.push(SwapRecord {
            iteration: trace.len() + 1,
            from: i,
            item: j,
            to: k,
            log_gain: gain,
            potential,
        });
        if trace.len() > limit {
            return Err(Error::Internal(format!("local search exceeded its swap bound of {limit}")));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalOptViolation<T> {
    pub from: usize,
    pub to: usize,
    pub item: usize,
    pub log_gain: T,
}

/// Every `(i, k, j ∈ R_i)` whose swap would raise the potential by more than
/// a factor `1 + eps_bar`. Empty iff `bundles` is an `eps_bar`-local optimum.
pub fn verify_local_opt<T: Scalar>(problem: &LocalSearchProblem<'_, T>, bundles: &[ItemSet], eps_bar: T) -> Result<Vec<LocalOptViolation<T>>> {
    problem.check_partition(bundles)?;
    let threshold = eps_bar.ln_1p();
    let active = problem.active_agents();
    let mut out = Vec::new();
    for &i in &active {
        for j in bundles[i].iter() {
            for &k in active.iter().filter(|&&k| k != i) {
                let log_gain = problem.log_gain(bundles, i, j, k);
                if log_gain > threshold {
                    out.push(LocalOptViolation { from: i, to: k, item: j, log_gain });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PriceVariant {
    /// `p_j = w_i log(v̄_i(R_i) / v̄_i(R_i − j))`.
    Asymmetric,
    /// `p_j = v̄_i(R_i) / v̄_i(R_i − j) − 1`.
    Symmetric,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriceVector<T> {
    pub variant: PriceVariant,
    pub prices: BTreeMap<usize, T>,
}

impl<T: Scalar> PriceVector<T> {
    pub fn get(&self, item: usize) -> T {
        self.prices[&item]
    }

    /// `p(S)`.
    pub fn total(&self, s: &ItemSet) -> T {
        s.iter().fold(T::zero(), |acc, j| acc + self.get(j))
    }
}

/// Prices of every item of `J`, charged by the item's holder.
pub fn prices<T: Scalar>(problem: &LocalSearchProblem<'_, T>, bundles: &[ItemSet], variant: PriceVariant) -> Result<PriceVector<T>> {
    problem.check_partition(bundles)?;
    let inst = problem.instance();
    let mut prices = BTreeMap::new();
    for (i, b) in bundles.iter().enumerate() {
        for j in b.iter() {
            let ratio = problem.endowed_value(i, b) / problem.endowed_value(i, &b.without(j));
            let p = match variant {
                PriceVariant::Asymmetric => inst.weight(i) * ratio.ln(),
                PriceVariant::Symmetric => ratio - T::one(),
            };
            prices.insert(j, p);
        }
    }
    Ok(PriceVector { variant, prices })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgentSpending<T> {
    pub agent: usize,
    pub spending: T,
    pub budget: T,
    /// `budget - spending`; negative means violated.
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpendingReport<T> {
    pub variant: PriceVariant,
    pub agents: Vec<AgentSpending<T>>,
    pub total: T,
    pub total_budget: T,
    /// Agents over budget (beyond tolerance).
    pub violations: Vec<usize>,
    pub total_violated: bool,
}

impl<T> SpendingReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && !self.total_violated
    }
}

/// Spending `p(R_i)` against its budget: `w_i` (asymmetric prices) or `1`
/// (symmetric prices), and `p(J)` against `1` or `|Ā|` respectively.
pub fn spending_report<T: Scalar>(problem: &LocalSearchProblem<'_, T>, prices: &PriceVector<T>, bundles: &[ItemSet]) -> SpendingReport<T> {
    let inst = problem.instance();
    let tol = T::of(CHECK_TOLERANCE);
    let active = problem.active_agents();
    let mut agents = Vec::new();
    let mut violations = Vec::new();
    let mut total = T::zero();
    for &i in &active {
        let spending = prices.total(&bundles[i]);
        let budget = match prices.variant {
            PriceVariant::Asymmetric => inst.weight(i),
            PriceVariant::Symmetric => T::one(),
        };
        if spending > budget + tol {
            violations.push(i);
        }
        total = total + spending;
        agents.push(AgentSpending { agent: i, spending, budget, margin: budget - spending });
    }
    let total_budget = match prices.variant {
        PriceVariant::Asymmetric => T::one(),
        PriceVariant::Symmetric => T::of_usize(active.len()),
    };
    SpendingReport {
        variant: prices.variant,
        agents,
        total,
        total_budget,
        violations,
        total_violated: total > total_budget + tol,
    }
}

/// Like [`spending_report`], failing with `LemmaViolation` on any overspend.
pub fn check_spending<T: Scalar>(problem: &LocalSearchProblem<'_, T>, prices: &PriceVector<T>, bundles: &[ItemSet]) -> Result<SpendingReport<T>> {
    let report = spending_report(problem, prices, bundles);
    if let Some(&i) = report.violations.first() {
        let a = report.agents.iter().find(|a| a.agent == i).expect("violating agent is reported");
        return Err(Error::LemmaViolation(format!(
            "agent {i} spends {} over budget {}",
            a.spending, a.budget
        )));
    }
    if report.total_violated {
        return Err(Error::LemmaViolation(format!(
            "total spending {} exceeds {}",
            report.total, report.total_budget
        )));
    }
    Ok(report)
}

/// A checked inequality `lhs ≤ rhs` that failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundViolation<T> {
    pub agent: usize,
    pub items: ItemSet,
    pub lhs: T,
    pub rhs: T,
}

fn exceeds<T: Scalar>(lhs: T, rhs: T) -> bool {
    lhs > rhs * (T::one() + T::of(CHECK_TOLERANCE)) + T::of(CHECK_TOLERANCE)
}

/// For every `k ∈ Ā` and `j ∈ J`:
/// `v̄_k(R_k + j) / v̄_k(R_k) ≤ (1 + eps_bar)^(1/w_k) · exp(p_j / w_k)`
/// with asymmetric prices.
pub fn verify_single_item_bound<T: Scalar>(problem: &LocalSearchProblem<'_, T>, bundles: &[ItemSet], eps_bar: T) -> Result<Vec<BoundViolation<T>>> {
    let p = prices(problem, bundles, PriceVariant::Asymmetric)?;
    let inst = problem.instance();
    let mut out = Vec::new();
    for k in problem.active_agents() {
        let wk = inst.weight(k);
        let base = problem.endowed_value(k, &bundles[k]);
        for j in problem.universe().iter() {
            let lhs = problem.endowed_value(k, &bundles[k].with(j)) / base;
            let rhs = (eps_bar.ln_1p() / wk + p.get(j) / wk).exp();
            if exceeds(lhs, rhs) {
                out.push(BoundViolation { agent: k, items: ItemSet::singleton(j), lhs, rhs });
            }
        }
    }
    Ok(out)
}

/// Equal weights only. For `k ∈ Ā` and `j` held by another agent:
/// `v̄_k(R_k + j) / v̄_k(R_k) ≤ (1 + ε̂)(1 + p_j)` with symmetric prices and
/// `ε̂ = (1 + eps_bar)^n − 1`; also `p_j ≤ 1` for every item.
pub fn verify_symmetric_item_bound<T: Scalar>(problem: &LocalSearchProblem<'_, T>, bundles: &[ItemSet], eps_bar: T) -> Result<Vec<BoundViolation<T>>> {
    let inst = problem.instance();
    if !inst.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let p = prices(problem, bundles, PriceVariant::Symmetric)?;
    let one_plus_hat = (eps_bar.ln_1p() * T::of_usize(inst.num_agents())).exp();
    let mut out = Vec::new();
    for (&j, &pj) in &p.prices {
        if exceeds(pj, T::one()) {
            let holder = bundles.iter().position(|b| b.contains(j)).unwrap_or(0);
            out.push(BoundViolation { agent: holder, items: ItemSet::singleton(j), lhs: pj, rhs: T::one() });
        }
    }
    for k in problem.active_agents() {
        let base = problem.endowed_value(k, &bundles[k]);
        for j in problem.universe().difference(&bundles[k]).iter() {
            let lhs = problem.endowed_value(k, &bundles[k].with(j)) / base;
            let rhs = one_plus_hat * (T::one() + p.get(j));
            if exceeds(lhs, rhs) {
                out.push(BoundViolation { agent: k, items: ItemSet::singleton(j), lhs, rhs });
            }
        }
    }
    Ok(out)
}

fn enumerate_subsets(universe: &ItemSet) -> Result<Vec<ItemSet>> {
    let items: Vec<usize> = universe.iter().collect();
    if items.len() > MAX_EXHAUSTIVE_ITEMS {
        return Err(Error::Precondition(format!(
            "subset enumeration supports at most {MAX_EXHAUSTIVE_ITEMS} items, got {}",
            items.len()
        )));
    }
    Ok((0..1u64 << items.len()).map(|mask| ItemSet::from_mask(&items, mask)).collect())
}

/// For every `i ∈ Ā` and every `S ⊆ J` (exhaustive, `|J| ≤ 12`):
/// `v_i(S) / max(v_i(R_i), v_i(ℓ(i))) ≤ −1 + 2(1 + eps_bar)^(|S|/w_i) · exp(p(S)/w_i)`
/// with asymmetric prices.
pub fn verify_log_price_bound<T: Scalar>(problem: &LocalSearchProblem<'_, T>, bundles: &[ItemSet], eps_bar: T) -> Result<Vec<BoundViolation<T>>> {
    let p = prices(problem, bundles, PriceVariant::Asymmetric)?;
    let inst = problem.instance();
    let subsets = enumerate_subsets(problem.universe())?;
    let mut out = Vec::new();
    for i in problem.active_agents() {
        let v = inst.valuation(i);
        let wi = inst.weight(i);
        let denom = v.value(&bundles[i]).max(problem.endowed[i].as_ref().map_or(T::zero(), |e| e.offset()));
        for s in &subsets {
            let lhs = v.value(s) / denom;
            let exponent = T::of_usize(s.len()) * eps_bar.ln_1p() / wi + p.total(s) / wi;
            let rhs = T::of(2.0) * exponent.exp() - T::one();
            if exceeds(lhs, rhs) {
                out.push(BoundViolation { agent: i, items: s.clone(), lhs, rhs });
            }
        }
    }
    Ok(out)
}

/// Equal weights only. For every `i ∈ Ā` and `S ⊆ J` (exhaustive):
/// `v_i(S) / max(v_i(R_i), v_i(ℓ(i))) ≤ 1 + 2 Σ_{j∈S} (2ε̂ + p_j)` with
/// symmetric prices.
pub fn verify_symmetric_price_bound<T: Scalar>(problem: &LocalSearchProblem<'_, T>, bundles: &[ItemSet], eps_bar: T) -> Result<Vec<BoundViolation<T>>> {
    let inst = problem.instance();
    if !inst.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let p = prices(problem, bundles, PriceVariant::Symmetric)?;
    let eps_hat = (eps_bar.ln_1p() * T::of_usize(inst.num_agents())).exp_m1();
    let two = T::of(2.0);
    let subsets = enumerate_subsets(problem.universe())?;
    let mut out = Vec::new();
    for i in problem.active_agents() {
        let v = inst.valuation(i);
        let denom = v.value(&bundles[i]).max(problem.endowed[i].as_ref().map_or(T::zero(), |e| e.offset()));
        for s in &subsets {
            let lhs = v.value(s) / denom;
            let rhs = T::one() + two * (two * eps_hat * T::of_usize(s.len()) + p.total(s));
            if exceeds(lhs, rhs) {
                out.push(BoundViolation { agent: i, items: s.clone(), lhs, rhs });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Valuation;

    fn e1() -> Instance<f64> {
        Instance::symmetric(
            vec![
                Valuation::additive(vec![4.0, 1.0, 1.0, 1.0]).unwrap(),
                Valuation::additive(vec![1.0, 3.0, 1.0, 1.0]).unwrap(),
            ],
            4,
        )
    }

    // J = {c, d}
    fn j_cd() -> ItemSet {
        ItemSet::from([2, 3])
    }

    #[test]
    fn epsilon_bar_values() {
        // (1.1)^(1/4) - 1 via an independent route: Newton iteration on x^4 = 1.1.
        let mut x = 1.0f64;
        for _ in 0..60 {
            x -= (x.powi(4) - 1.1) / (4.0 * x.powi(3));
        }
        let got = epsilon_bar(0.1f64, 4);
        assert!((got - (x - 1.0)).abs() < 1e-15);
        assert!((got - 0.0241137).abs() < 1e-7);
        assert!((epsilon_bar(0.37f64, 1) - 0.37).abs() < 1e-15);
        assert!((epsilon_bar(3.0f64, 2) - 1.0).abs() < 1e-15);
        for (eps, m) in [(0.1f64, 7), (1e-6, 1000), (2.0, 3)] {
            let eb = epsilon_bar(eps, m);
            let back = (1.0 + eb).powi(m as i32);
            assert!(((back - (1.0 + eps)) / (1.0 + eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn e1_local_search_trace() {
        let inst = e1();
        let problem = LocalSearchProblem::new(&inst, j_cd()).unwrap();
        let eb = epsilon_bar(0.1, 4);
        let out = local_search(&problem, eb).unwrap();
        assert_eq!(out.bundles, vec![ItemSet::singleton(3), ItemSet::singleton(2)]);
        assert_eq!(out.swaps, 1);
        let first = &out.trace[0];
        assert_eq!((first.from, first.item, first.to), (0, 2, 1));
        assert!((first.log_gain.exp() - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(verify_local_opt(&problem, &out.bundles, eb).unwrap().is_empty());
        assert!(out.certificate.max_log_gain.unwrap() <= out.certificate.threshold);
        assert_eq!(out.certificate.triples_checked, 2);
    }

    #[test]
    fn single_active_agent_keeps_everything() {
        let inst = Instance::symmetric(
            vec![
                Valuation::additive(vec![1.0, 1.0, 1.0]).unwrap(),
                Valuation::additive(vec![1.0, 0.0, 0.0]).unwrap(),
            ],
            3,
        );
        let problem = LocalSearchProblem::new(&inst, ItemSet::from([1, 2])).unwrap();
        assert_eq!(problem.active_agents(), vec![0]);
        let out = local_search(&problem, 0.01).unwrap();
        assert_eq!(out.swaps, 0);
        assert_eq!(out.bundles[0], ItemSet::from([1, 2]));
        assert!(verify_local_opt(&problem, &out.bundles, 0.01).unwrap().is_empty());
    }

    #[test]
    fn empty_universe() {
        let inst = e1();
        let problem = LocalSearchProblem::new(&inst, ItemSet::new()).unwrap();
        let out = local_search(&problem, 0.01).unwrap();
        assert_eq!(out.swaps, 0);
        assert!(out.bundles.iter().all(ItemSet::is_empty));
    }

    #[test]
    fn verify_flags_non_optimum() {
        let inst = e1();
        let problem = LocalSearchProblem::new(&inst, j_cd()).unwrap();
        let bundles = vec![j_cd(), ItemSet::new()];
        let found = verify_local_opt(&problem, &bundles, epsilon_bar(0.1, 4)).unwrap();
        assert!(found.iter().any(|v| (v.from, v.to, v.item) == (0, 1, 2)));
    }

    #[test]
    fn verify_rejects_non_partition() {
        let inst = e1();
        let problem = LocalSearchProblem::new(&inst, j_cd()).unwrap();
        assert!(verify_local_opt(&problem, &[ItemSet::singleton(2), ItemSet::new()], 0.1).is_err());
        assert!(prices(&problem, &[ItemSet::singleton(2), ItemSet::new()], PriceVariant::Symmetric).is_err());
    }

    #[test]
    fn e1_prices_and_spending() {
        let inst = e1();
        let problem = LocalSearchProblem::new(&inst, j_cd()).unwrap();
        let bundles = vec![ItemSet::singleton(3), ItemSet::singleton(2)];
        let asym = prices(&problem, &bundles, PriceVariant::Asymmetric).unwrap();
        let half_ln2 = 0.5 * 2f64.ln();
        assert!((asym.get(2) - half_ln2).abs() < 1e-12);
        assert!((asym.get(3) - half_ln2).abs() < 1e-12);
        assert!((half_ln2 - 0.3466).abs() < 1e-4);
        let report = check_spending(&problem, &asym, &bundles).unwrap();
        assert!((report.total - 2.0 * half_ln2).abs() < 1e-12);
        assert!(report.agents.iter().all(|a| a.margin > 0.0));

        let sym = prices(&problem, &bundles, PriceVariant::Symmetric).unwrap();
        assert!((sym.get(2) - 1.0).abs() < 1e-12);
        let report = check_spending(&problem, &sym, &bundles).unwrap();
        assert!(report.agents.iter().all(|a| (a.spending - 1.0).abs() < 1e-12));
    }

    #[test]
    fn empty_bundle_spends_nothing() {
        let inst = e1();
        let problem = LocalSearchProblem::new(&inst, j_cd()).unwrap();
        let bundles = vec![j_cd(), ItemSet::new()];
        let p = prices(&problem, &bundles, PriceVariant::Asymmetric).unwrap();
        let report = spending_report(&problem, &p, &bundles);
        assert_eq!(report.agents[1].spending, 0.0);
    }

    #[test]
    fn overspending_is_reported() {
        // Hand-made prices exceeding the budget.
        let inst = e1();
        let problem = LocalSearchProblem::new(&inst, j_cd()).unwrap();
        let bundles = vec![ItemSet::singleton(3), ItemSet::singleton(2)];
        let p = PriceVector { variant: PriceVariant::Asymmetric, prices: BTreeMap::from([(2, 0.1), (3, 0.7)]) };
        assert!(matches!(check_spending(&problem, &p, &bundles), Err(Error::LemmaViolation(_))));
    }

    #[test]
    fn e1_bounds_hold_at_optimum() {
        let inst = e1();
        let problem = LocalSearchProblem::new(&inst, j_cd()).unwrap();
        let eb = epsilon_bar(0.1, 4);
        let out = local_search(&problem, eb).unwrap();
        assert!(verify_single_item_bound(&problem, &out.bundles, eb).unwrap().is_empty());
        assert!(verify_symmetric_item_bound(&problem, &out.bundles, eb).unwrap().is_empty());
        assert!(verify_log_price_bound(&problem, &out.bundles, eb).unwrap().is_empty());
        assert!(verify_symmetric_price_bound(&problem, &out.bundles, eb).unwrap().is_empty());
    }

    #[test]
    fn single_item_price_is_w_log_two() {
        let inst = e1();
        let problem = LocalSearchProblem::new(&inst, ItemSet::singleton(2)).unwrap();
        let bundles = vec![ItemSet::singleton(2), ItemSet::new()];
        let p = prices(&problem, &bundles, PriceVariant::Asymmetric).unwrap();
        assert!((p.get(2) - 0.5 * 2f64.ln()).abs() < 1e-12);
    }
}
