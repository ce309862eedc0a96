//! Turning an efficient allocation into a complete ½-EFX allocation while
//! losing at most a factor 2 of Nash social welfare.
//!
//! [`make_fair_or_efficient`] either shrinks the set of allocated items
//! without lowering NSW, or returns a ½-EFX partial allocation keeping half of
//! the NSW. [`guarantee_half_efx`] iterates it, repairs agents that prefer a
//! single unallocated item, and hands out the rest with the envy-cycle
//! procedure. Only subadditivity of the valuations is used.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::LogNsw;
use crate::instance::{nsw_log_unchecked, Allocation, Instance};
use crate::itemset::ItemSet;
use crate::matching::{solve_lex_assignment, EdgeSet};
use crate::scalar::Scalar;

/// Agent `envious` values `S_owner − item` at more than twice its own bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EfxViolation {
    pub envious: usize,
    pub owner: usize,
    pub item: usize,
}

/// Every `(i, k, j ∈ S_k)` with `v_i(S_i) < ½ v_i(S_k − j)`. Unallocated items
/// are ignored.
pub fn half_efx_check<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> Result<Vec<EfxViolation>> {
    alloc.check_against(inst)?;
    Ok(half_efx_violations(inst, alloc.bundles()))
}

fn half_efx_violations<T: Scalar>(inst: &Instance<T>, bundles: &[ItemSet]) -> Vec<EfxViolation> {
    let two = T::of(2.0);
    let mut out = Vec::new();
    for (i, own) in bundles.iter().enumerate() {
        let v = inst.valuation(i);
        let mine = two * v.value(own);
        for (k, other) in bundles.iter().enumerate() {
            if k == i {
                continue;
            }
            for j in other.iter() {
                if mine < v.value(&other.without(j)) {
                    out.push(EfxViolation { envious: i, owner: k, item: j });
                }
            }
        }
    }
    out
}

/// Agent × bundle graph whose perfect matchings are ½-EFX reallocations.
///
/// `(i, S_i)` is an edge when `v_i(S_i) ≥ ½ M_i`, and `(i, S_k)` when
/// `v_i(S_k) > 2 v_i(S_i)` and `v_i(S_k) ≥ M_i`, where
/// `M_i = max_{ℓ, j ∈ S_ℓ} v_i(S_ℓ − j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityGraph {
    pub edges: EdgeSet,
}

impl FeasibilityGraph {
    pub fn build<T: Scalar>(inst: &Instance<T>, bundles: &[ItemSet]) -> Self {
        let n = bundles.len();
        let two = T::of(2.0);
        let mut edges = EdgeSet::new(n, n);
        for i in 0..n {
            let v = inst.valuation(i);
            let best_minus_one = bundles
                .iter()
                .flat_map(|b| b.iter().map(move |j| b.without(j)))
                .map(|s| v.value(&s))
                .fold(T::zero(), T::max);
            let own = v.value(&bundles[i]);
            if two * own >= best_minus_one {
                edges.insert(i, i);
            }
            for (k, b) in bundles.iter().enumerate() {
                let x = v.value(b);
                if k != i && x > two * own && x >= best_minus_one {
                    edges.insert(i, k);
                }
            }
        }
        Self { edges }
    }

    /// Every agent has at least one edge.
    pub fn min_degree(&self) -> usize {
        (0..self.edges.rows()).map(|i| self.edges.degree(i)).min().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FairnessTag {
    /// Fewer items allocated, NSW not lower.
    SupportShrunk,
    /// ½-EFX, NSW at least half.
    HalfEfx,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FairnessOutcome {
    pub tag: FairnessTag,
    pub allocation: Allocation,
}

/// One round of fair-or-efficient repair on a partial allocation `t`.
///
/// Bundles are trimmed one item at a time while their owner keeps at least
/// half of the original value. Each round matches agents to bundles in the
/// feasibility graph, preferring (a) every trimmed bundle matched, then
/// (b) agents keeping their own bundle, then (c) size. A perfect matching
/// gives a ½-EFX outcome; otherwise either another item is trimmed or an
/// alternating path yields an allocation with smaller support and no lower NSW.
///
/// The NSW guarantees need equal weights; with unequal weights the result is
/// still either ½-EFX or of smaller support.
pub fn make_fair_or_efficient<T: Scalar>(inst: &Instance<T>, t: &Allocation) -> Result<FairnessOutcome> {
    t.check_against(inst)?;
    let out = fair_or_efficient_step(inst, t)?;
    if cfg!(debug_assertions) && inst.is_symmetric() {
        if let Some(broken) = contract_failure(inst, t, &out) {
            return Err(Error::LemmaViolation(broken));
        }
    }
    Ok(out)
}

/// Describes how `out` breaks the fair-or-efficient contract for input `t`.
pub fn contract_failure<T: Scalar>(inst: &Instance<T>, t: &Allocation, out: &FairnessOutcome) -> Option<String> {
    let tol = T::of(1e-9);
    let before = nsw_log_unchecked(inst, t.bundles());
    let after = nsw_log_unchecked(inst, out.allocation.bundles());
    match out.tag {
        FairnessTag::SupportShrunk => {
            let (old, new) = (t.allocated(), out.allocation.allocated());
            if !(new.is_subset(&old) && new.len() < old.len()) {
                return Some("support did not shrink".into());
            }
            if let LogNsw::Finite(b) = before {
                if after.value() < b - tol {
                    return Some(format!("log NSW fell from {b} to {after}"));
                }
            }
        }
        FairnessTag::HalfEfx => {
            if !half_efx_violations(inst, out.allocation.bundles()).is_empty() {
                return Some("outcome is not ½-EFX".into());
            }
            if let LogNsw::Finite(b) = before {
                if after.value() < b - T::of(2.0).ln() - tol {
                    return Some(format!("log NSW fell from {b} to {after}, more than log 2"));
                }
            }
        }
    }
    None
}

fn fair_or_efficient_step<T: Scalar>(inst: &Instance<T>, t: &Allocation) -> Result<FairnessOutcome> {
    let n = inst.num_agents();
    let original = t.bundles();
    if original.iter().any(ItemSet::is_empty) {
        return Ok(FairnessOutcome { tag: FairnessTag::HalfEfx, allocation: Allocation::empty(n) });
    }
    let two = T::of(2.0);
    let mut s = original.to_vec();
    let identity: Vec<Option<usize>> = (0..n).map(Some).collect();
    for _ in 0..=inst.num_items() {
        let graph = FeasibilityGraph::build(inst, &s);
        if let Some(i) = (0..n).find(|&i| graph.edges.degree(i) == 0) {
            return Err(Error::LemmaViolation(format!("agent {i} has no edge in the feasibility graph")));
        }
        let trimmed: Vec<bool> = (0..n).map(|i| s[i] != original[i]).collect();
        let rho = solve_lex_assignment::<T>(&graph.edges, &trimmed, &identity)?;
        let Some(first_unmatched) = rho.iter().position(Option::is_none) else {
            let bundles = rho.iter().map(|b| s[b.expect("perfect matching")].clone()).collect();
            return Ok(FairnessOutcome { tag: FairnessTag::HalfEfx, allocation: Allocation::new(bundles)? });
        };

        let v1 = inst.valuation(first_unmatched);
        let mut best: Option<(usize, usize, T)> = None;
        for (k, b) in s.iter().enumerate() {
            for g in b.iter() {
                let x = v1.value(&b.without(g));
                if best.is_none_or(|(_, _, y)| x > y) {
                    best = Some((k, g, x));
                }
            }
        }
        let (h, g, _) = best.ok_or_else(|| Error::Internal("unmatched agent but every bundle is empty".into()))?;
        let trimmed_h = s[h].without(g);
        if two * inst.valuation(h).value(&trimmed_h) >= inst.valuation(h).value(&original[h]) {
            s[h] = trimmed_h;
            continue;
        }

        // Alternating path: own bundle, then the agent ρ matched to it, until
        // S_h or a bundle ρ leaves unmatched.
        let mut owner_in_rho = vec![None; n];
        for (agent, b) in rho.iter().enumerate() {
            if let Some(b) = b {
                owner_in_rho[*b] = Some(agent);
            }
        }
        let mut path = vec![first_unmatched];
        let ends_at_h = loop {
            let last = *path.last().expect("path is nonempty");
            if last == h {
                break true;
            }
            match owner_in_rho[last] {
                Some(next) if !path.contains(&next) => path.push(next),
                Some(_) => return Err(Error::Internal("alternating path revisited an agent".into())),
                None => break false,
            }
        };
        let mut r: Vec<Option<ItemSet>> = vec![None; n];
        r[first_unmatched] = Some(trimmed_h.clone());
        for f in 1..path.len() {
            r[path[f]] = Some(s[path[f - 1]].clone());
        }
        if !ends_at_h {
            r[h] = Some(original[h].difference(&trimmed_h));
        }
        let bundles = r.into_iter().enumerate().map(|(i, b)| b.unwrap_or_else(|| original[i].clone())).collect();
        let allocation = Allocation::new(bundles).map_err(|e| Error::Internal(format!("path reallocation overlaps: {e}")))?;
        return Ok(FairnessOutcome { tag: FairnessTag::SupportShrunk, allocation });
    }
    Err(Error::Internal("fair-or-efficient loop exceeded the item count".into()))
}

/// What the envy-cycle procedure did.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EnvyCycleLog {
    pub rotations: usize,
    /// Envy-edge counts before and after each rotation.
    pub edges_around_rotations: Vec<(usize, usize)>,
    /// Envy edges gained by each item handout.
    pub edges_added_per_item: Vec<usize>,
}

/// Edges `(i, k)` with `v_i(T_i) < v_i(T_k)`.
pub fn envy_edges<T: Scalar>(inst: &Instance<T>, bundles: &[ItemSet]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..bundles.len() {
        let v = inst.valuation(i);
        let own = v.value(&bundles[i]);
        for (k, b) in bundles.iter().enumerate() {
            if k != i && own < v.value(b) {
                out.push((i, k));
            }
        }
    }
    out
}

/// A directed cycle found by depth-first search from the smallest start.
fn find_cycle(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    // 0 = unseen, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack = Vec::new();
    fn dfs(u: usize, adj: &[Vec<usize>], state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        state[u] = 1;
        stack.push(u);
        for &w in &adj[u] {
            if state[w] == 1 {
                let pos = stack.iter().position(|&x| x == w).expect("on-stack node is in the stack");
                return Some(stack[pos..].to_vec());
            }
            if state[w] == 0 {
                if let Some(c) = dfs(w, adj, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[u] = 2;
        None
    }
    (0..n).find_map(|s| if state[s] == 0 { dfs(s, &adj, &mut state, &mut stack) } else { None })
}

/// Allocates the items of `u` one at a time to an unenvied agent, first
/// rotating bundles along envy cycles until none remain. Requires
/// `v_i(T_i) ≥ v_i(j)` for every agent `i` and `j ∈ u`.
pub fn envy_cycle_complete<T: Scalar>(inst: &Instance<T>, t: &Allocation, u: &ItemSet) -> Result<Allocation> {
    envy_cycle_complete_logged(inst, t, u).map(|(a, _)| a)
}

pub fn envy_cycle_complete_logged<T: Scalar>(inst: &Instance<T>, t: &Allocation, u: &ItemSet) -> Result<(Allocation, EnvyCycleLog)> {
    t.check_against(inst)?;
    let n = inst.num_agents();
    if let Some(j) = u.iter().find(|&j| j >= inst.num_items()) {
        return Err(Error::UnknownItem { item: j, universe: inst.num_items() });
    }
    if let Some(j) = u.intersection(&t.allocated()).first() {
        return Err(Error::Precondition(format!("item {j} is both allocated and pending")));
    }
    for i in 0..n {
        let v = inst.valuation(i);
        let own = v.value(t.bundle(i));
        if let Some(j) = u.iter().find(|&j| own < v.value_of_item(j)) {
            return Err(Error::Precondition(format!("agent {i} prefers pending item {j} to its bundle")));
        }
    }
    let mut bundles = t.bundles().to_vec();
    let mut log = EnvyCycleLog::default();
    let rotation_limit = n * n * (u.len() + 1) + n;
    for j in u.iter() {
        loop {
            let edges = envy_edges(inst, &bundles);
            let Some(cycle) = find_cycle(n, &edges) else { break };
            let old = bundles.clone();
            for (pos, &agent) in cycle.iter().enumerate() {
                let next = cycle[(pos + 1) % cycle.len()];
                bundles[agent] = old[next].clone();
            }
            log.rotations += 1;
            log.edges_around_rotations.push((edges.len(), envy_edges(inst, &bundles).len()));
            if log.rotations > rotation_limit {
                return Err(Error::Internal("envy-cycle rotations did not terminate".into()));
            }
        }
        let edges = envy_edges(inst, &bundles);
        let mut envied = vec![false; n];
        for &(_, k) in &edges {
            envied[k] = true;
        }
        let source = envied
            .iter()
            .position(|e| !e)
            .ok_or_else(|| Error::Internal("acyclic envy graph without a source".into()))?;
        bundles[source].insert(j);
        let after = envy_edges(inst, &bundles).len();
        log.edges_added_per_item.push(after.saturating_sub(edges.len()));
    }
    Ok((Allocation::new(bundles)?, log))
}

/// What [`guarantee_half_efx_logged`] did on the way.
#[derive(Clone, Debug, Serialize)]
pub struct HalfEfxRun {
    pub allocation: Allocation,
    pub fair_or_efficient_calls: usize,
    pub singleton_swaps: usize,
    pub envy_cycle: EnvyCycleLog,
}

/// Complete ½-EFX allocation with NSW at least half that of `s`. Equal
/// weights only.
pub fn guarantee_half_efx<T: Scalar>(inst: &Instance<T>, s: &Allocation) -> Result<Allocation> {
    guarantee_half_efx_logged(inst, s).map(|r| r.allocation)
}

pub fn guarantee_half_efx_logged<T: Scalar>(inst: &Instance<T>, s: &Allocation) -> Result<HalfEfxRun> {
    if !inst.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    s.check_against(inst)?;
    let n = inst.num_agents();
    let m = inst.num_items();
    let mut current = s.clone();
    let mut calls = 0;
    loop {
        calls += 1;
        if calls > m + 1 {
            return Err(Error::Internal("fair-or-efficient was called more than m + 1 times".into()));
        }
        let outcome = make_fair_or_efficient(inst, &current)?;
        current = outcome.allocation;
        if outcome.tag == FairnessTag::HalfEfx {
            break;
        }
    }

    let mut bundles = current.into_bundles();
    let mut pending = inst.all_items().difference(&bundles.iter().fold(ItemSet::new(), |a, b| a.union(b)));
    let mut swaps = 0;
    loop {
        let found = (0..n).find_map(|i| {
            let v = inst.valuation(i);
            let own = v.value(&bundles[i]);
            pending.iter().find(|&j| own < v.value_of_item(j)).map(|j| (i, j))
        });
        let Some((i, j)) = found else { break };
        let old = std::mem::replace(&mut bundles[i], ItemSet::singleton(j));
        pending = pending.union(&old).without(j);
        swaps += 1;
        if swaps > n * m {
            return Err(Error::Internal("singleton swaps exceeded n·m".into()));
        }
    }
    let (allocation, envy_cycle) = envy_cycle_complete_logged(inst, &Allocation::new(bundles)?, &pending)?;
    Ok(HalfEfxRun { allocation, fair_or_efficient_calls: calls, singleton_swaps: swaps, envy_cycle })
}
