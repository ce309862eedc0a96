//! The three-phase NSW algorithm (matching, local search, rematching) and its
//! approximation guarantees.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::{ExtendedReal, LogNsw};
use crate::instance::{complete_with_leftovers, nsw_log, Allocation, Instance};
use crate::itemset::ItemSet;
use crate::local_search::{
    epsilon_bar, local_search, prices, spending_report, swap_bound, verify_local_opt, LocalOptCertificate,
    LocalOptViolation, LocalSearchProblem, PriceVariant, SpendingReport, SwapRecord,
};
use crate::matching::{solve_assignment, ScoreTable};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize)]
pub struct Certificates<T> {
    /// Violations of local optimality found by an exhaustive rescan.
    pub local_opt_violations: Vec<LocalOptViolation<T>>,
    pub local_opt: LocalOptCertificate<T>,
    pub asymmetric_spending: SpendingReport<T>,
    pub symmetric_spending: SpendingReport<T>,
    /// `log m / log(1 + eps_bar) + 1`.
    pub swap_bound: T,
}

impl<T: Scalar> Certificates<T> {
    pub fn passed(&self, swaps: usize) -> bool {
        self.local_opt_violations.is_empty()
            && self.asymmetric_spending.passed()
            && self.symmetric_spending.passed()
            && T::of_usize(swaps) <= self.swap_bound
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GuaranteeFactors<T> {
    /// `4 + eps`, present only for equal weights.
    pub symmetric: Option<T>,
    /// `(n·w_max + 2 + eps)·e`.
    pub asymmetric: T,
    /// `(φ(n·w_max) + eps)·e`.
    pub asymmetric_strong: T,
}

impl<T: Scalar> GuaranteeFactors<T> {
    /// Tightest applicable factor.
    pub fn best(&self) -> T {
        let asym = self.asymmetric.min(self.asymmetric_strong);
        self.symmetric.map_or(asym, |s| s.min(asym))
    }
}

/// Everything the pipeline computed, phase by phase.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport<T> {
    /// Complete allocation returned to the caller.
    pub allocation: Allocation,
    pub log_nsw: LogNsw<T>,
    pub eps: T,
    /// False when no item matching with positive value covers every agent;
    /// then every allocation has NSW zero and the remaining fields are empty.
    pub phase1_feasible: bool,
    /// Phase 1 item of each agent.
    pub tau: Vec<Option<usize>>,
    pub matched_items: ItemSet,
    pub local_items: ItemSet,
    pub favorites: Vec<Option<usize>>,
    pub eps_bar: T,
    /// Phase 2 bundles over the local items.
    pub local_bundles: Vec<ItemSet>,
    pub swaps: usize,
    pub trace: Vec<SwapRecord<T>>,
    /// Phase 3 item of each agent.
    pub sigma: Vec<Option<usize>>,
    pub guarantee: GuaranteeFactors<T>,
    pub certificates: Option<Certificates<T>>,
}

/// Approximates the (weighted) Nash social welfare optimum.
///
/// Phase 1 matches one item to each agent maximizing `Σ w_i log v_i(j)`.
/// Phase 2 runs [`local_search`] on the remaining items with
/// `eps_bar = (1 + eps)^(1/m) − 1`. Phase 3 rematches the Phase 1 items given
/// the Phase 2 bundles. Unallocated items are then handed out by
/// [`complete_with_leftovers`].
pub fn solve_nsw<T: Scalar>(inst: &Instance<T>, eps: T) -> Result<SolveReport<T>> {
    inst.ensure_valid()?;
    if !(eps > T::zero()) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let n = inst.num_agents();
    let m = inst.num_items();
    let guarantee = guarantee_factor(inst, eps);
    let eps_bar = epsilon_bar(eps, m);

    let phase1 = ScoreTable::from_fn(n, m, |i, j| item_score(inst, i, &ItemSet::singleton(j)));
    let tau = match solve_assignment(&phase1, false)? {
        a if a.total.is_finite() => a.matching,
        a => {
            let mut bundles = vec![ItemSet::new(); n];
            bundles[0] = inst.all_items();
            let allocation = Allocation::new(bundles)?;
            let log_nsw = nsw_log(inst, &allocation)?;
            return Ok(SolveReport {
                allocation,
                log_nsw,
                eps,
                phase1_feasible: false,
                tau: a.matching,
                matched_items: ItemSet::new(),
                local_items: ItemSet::new(),
                favorites: vec![None; n],
                eps_bar,
                local_bundles: vec![ItemSet::new(); n],
                swaps: 0,
                trace: Vec::new(),
                sigma: vec![None; n],
                guarantee,
                certificates: None,
            });
        }
    };
    let matched: ItemSet = tau.iter().flatten().copied().collect();
    let local = inst.all_items().difference(&matched);

    let problem = LocalSearchProblem::new(inst, local.clone())?;
    let outcome = local_search(&problem, eps_bar)?;
    let bundles = &outcome.bundles;

    let certificates = Certificates {
        local_opt_violations: verify_local_opt(&problem, bundles, eps_bar)?,
        local_opt: outcome.certificate.clone(),
        asymmetric_spending: spending_report(&problem, &prices(&problem, bundles, PriceVariant::Asymmetric)?, bundles),
        symmetric_spending: spending_report(&problem, &prices(&problem, bundles, PriceVariant::Symmetric)?, bundles),
        swap_bound: swap_bound(m, eps_bar),
    };

    let matched_list: Vec<usize> = matched.iter().collect();
    let phase3 = ScoreTable::from_fn(n, matched_list.len(), |i, c| item_score(inst, i, &bundles[i].with(matched_list[c])));
    let rematch = solve_assignment(&phase3, true)?;
    if !rematch.total.is_finite() {
        return Err(Error::Internal("rematching lost the perfect matching found in phase 1".into()));
    }
    let sigma: Vec<Option<usize>> = rematch.matching.iter().map(|c| c.map(|c| matched_list[c])).collect();
    let mut final_bundles = bundles.clone();
    for (i, j) in sigma.iter().enumerate() {
        if let Some(j) = j {
            final_bundles[i].insert(*j);
        }
    }
    let allocation = complete_with_leftovers(inst, &Allocation::new(final_bundles)?)?;
    let log_nsw = nsw_log(inst, &allocation)?;
    Ok(SolveReport {
        allocation,
        log_nsw,
        eps,
        phase1_feasible: true,
        tau,
        matched_items: matched,
        local_items: local,
        favorites: problem.favorites(),
        eps_bar,
        local_bundles: outcome.bundles,
        swaps: outcome.swaps,
        trace: outcome.trace,
        sigma,
        guarantee,
        certificates: Some(certificates),
    })
}

fn item_score<T: Scalar>(inst: &Instance<T>, agent: usize, s: &ItemSet) -> ExtendedReal<T> {
    ExtendedReal::ln_of(inst.valuation(agent).value(s)).scale(inst.weight(agent))
}

/// `φ(ν) = sup_{x∈(0,1]} 2^(1−x) (1 + ν/x)^x`.
///
/// The log of the objective is concave in `x`, so golden-section search on
/// `[0, 1]` finds the supremum; the limit `2` at `x → 0+` and the endpoint
/// `x = 1` are compared explicitly.
pub fn phi<T: Scalar>(nu: T) -> T {
    let ln2 = T::of(2.0).ln();
    let log_obj = |x: T| -> T {
        if x <= T::zero() {
            ln2
        } else {
            (T::one() - x) * ln2 + x * (nu / x).ln_1p()
        }
    };
    let inv_phi = T::of((5f64.sqrt() - 1.0) / 2.0);
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (log_obj(a), log_obj(b));
    for _ in 0..200 {
        if hi - lo <= T::epsilon() {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = log_obj(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = log_obj(a);
        }
    }
    let best = [fa, fb, log_obj(lo), log_obj(hi), log_obj(T::one()), ln2]
        .into_iter()
        .fold(T::neg_infinity(), T::max);
    best.exp()
}

/// Approximation factors guaranteed for `inst` at accuracy `eps`.
///
/// The factors use `eps` as given. Strictly, reaching them requires running
/// the search with a somewhat smaller accuracy; callers who need the bound
/// exactly should pass a smaller `eps` to [`solve_nsw`].
pub fn guarantee_factor<T: Scalar>(inst: &Instance<T>, eps: T) -> GuaranteeFactors<T> {
    let r = inst.n_times_max_weight();
    let nu = T::of(*r.numer() as f64) / T::of(*r.denom() as f64);
    let e = T::one().exp();
    GuaranteeFactors {
        symmetric: inst.is_symmetric().then(|| T::of(4.0) + eps),
        asymmetric: (nu + T::of(2.0) + eps) * e,
        asymmetric_strong: (phi(nu) + eps) * e,
    }
}
