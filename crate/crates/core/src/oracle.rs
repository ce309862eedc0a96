//! Exhaustive NSW optimum for small instances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::LogNsw;
use crate::instance::{nsw_log, nsw_log_unchecked, Allocation, Instance};
use crate::itemset::ItemSet;
use crate::scalar::Scalar;

/// Default cap on `n^m`.
pub const DEFAULT_SIZE_GUARD: u128 = 100_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct OptResult<T: Scalar> {
    pub opt_log: LogNsw<T>,
    /// Lexicographically smallest optimal assignment, reading item 0 first.
    pub argmax: Allocation,
    pub enumerated: u128,
}

/// `n^m`, saturating.
pub fn search_space(inst_agents: usize, inst_items: usize) -> u128 {
    let mut size: u128 = 1;
    for _ in 0..inst_items {
        size = size.saturating_mul(inst_agents as u128);
    }
    size
}

pub fn brute_force_opt<T: Scalar>(inst: &Instance<T>) -> Result<OptResult<T>> {
    brute_force_opt_with_guard(inst, DEFAULT_SIZE_GUARD)
}

/// Enumerates all `n^m` complete allocations.
pub fn brute_force_opt_with_guard<T: Scalar>(inst: &Instance<T>, guard: u128) -> Result<OptResult<T>> {
    inst.ensure_valid()?;
    let n = inst.num_agents();
    let m = inst.num_items();
    let size = search_space(n, m);
    if size > guard {
        return Err(Error::SizeGuard { size, guard });
    }
    let mut owner = vec![0usize; m];
    let mut bundles = vec![ItemSet::new(); n];
    bundles[0] = inst.all_items();
    let mut best = nsw_log_unchecked(inst, &bundles);
    let mut best_bundles = bundles.clone();
    let mut enumerated: u128 = 1;
    loop {
        // Odometer step with the last item as the fastest digit.
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(OptResult { opt_log: best, argmax: Allocation::new(best_bundles)?, enumerated });
            }
            pos -= 1;
            bundles[owner[pos]].remove(pos);
            owner[pos] = (owner[pos] + 1) % n;
            bundles[owner[pos]].insert(pos);
            if owner[pos] != 0 {
                break;
            }
        }
        enumerated += 1;
        let value = nsw_log_unchecked(inst, &bundles);
        if value > best {
            best = value;
            best_bundles.clone_from(&bundles);
        }
    }
}

/// `NSW(opt) / NSW(alloc)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ApproxRatio<T> {
    Finite(T),
    /// The allocation has zero NSW while the optimum is positive.
    Infinite,
}

impl<T: Scalar> ApproxRatio<T> {
    pub fn value(&self) -> T {
        match self {
            Self::Finite(x) => *x,
            Self::Infinite => T::infinity(),
        }
    }

    pub fn from_logs(opt: LogNsw<T>, alg: LogNsw<T>) -> Self {
        match (opt, alg) {
            (LogNsw::NegInfinity, LogNsw::NegInfinity) => Self::Finite(T::one()),
            (_, LogNsw::NegInfinity) => Self::Infinite,
            (LogNsw::NegInfinity, LogNsw::Finite(_)) => Self::Finite(T::zero()),
            (LogNsw::Finite(o), LogNsw::Finite(a)) => Self::Finite((o - a).exp()),
        }
    }
}

pub fn ratio<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> Result<ApproxRatio<T>> {
    let alg = nsw_log(inst, alloc)?;
    let opt = brute_force_opt(inst)?;
    Ok(ApproxRatio::from_logs(opt.opt_log, alg))
}
