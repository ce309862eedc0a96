use thiserror::Error;

use crate::instance::ValidationIssue;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown item index {item} (universe has {universe} items)")]
    UnknownItem { item: usize, universe: usize },

    #[error("agent has zero value on the local-search universe and cannot be endowed")]
    AgentNotEndowable,

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("bundles overlap on item {0}")]
    OverlappingBundles(usize),

    #[error("allocation has {found} bundles but the instance has {expected} agents")]
    BundleCount { expected: usize, found: usize },

    #[error("invalid instance: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<ValidationIssue>),

    #[error("no assignment covers all {rows} rows with {cols} columns")]
    Infeasible { rows: usize, cols: usize },

    #[error("lemma violation: {0}")]
    LemmaViolation(String),

    #[error("internal invariant breached: {0}")]
    Internal(String),

    #[error("enumeration of {size} allocations exceeds the size guard {guard}")]
    SizeGuard { size: u128, guard: u128 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("operation requires equal agent weights")]
    NotSymmetric,

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
