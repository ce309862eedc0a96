//! Approximate maximum Nash social welfare for indivisible goods under
//! submodular valuations, with optional ½-EFX post-processing.
//!
//! The solver is generic over the float type ([`Scalar`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix it to `f64`.
//!
//! ```
//! use nsw_core::{solve_nsw, Instance, Valuation};
//!
//! let inst = Instance::symmetric(
//!     vec![
//!         Valuation::additive(vec![4.0, 1.0, 1.0, 1.0]).unwrap(),
//!         Valuation::additive(vec![1.0, 3.0, 1.0, 1.0]).unwrap(),
//!     ],
//!     4,
//! );
//! let report = solve_nsw(&inst, 0.1).unwrap();
//! assert!((report.log_nsw.value() - 20f64.sqrt().ln()).abs() < 1e-12);
//! ```

pub mod efx;
pub mod error;
pub mod extended;
pub mod generate;
pub mod instance;
pub mod io;
pub mod itemset;
pub mod local_search;
pub mod matching;
pub mod oracle;
pub mod pipeline;
pub mod scalar;
pub mod valuation;

pub use efx::{
    envy_cycle_complete, guarantee_half_efx, half_efx_check, make_fair_or_efficient, EfxViolation, FairnessOutcome,
    FairnessTag, FeasibilityGraph,
};
pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use generate::{Family, WeightMode};
pub use instance::{complete_with_leftovers, nsw_log, Allocation, ValidationIssue, Weight};
pub use itemset::ItemSet;
pub use local_search::{epsilon_bar, swap_bound, PriceVariant};
pub use oracle::{brute_force_opt, brute_force_opt_with_guard, ratio, ApproxRatio};
pub use pipeline::{guarantee_factor, phi, solve_nsw};
pub use scalar::Scalar;
pub use valuation::{check_submodular, CheckMode, ValuationKind};

pub type Instance = instance::Instance<f64>;
pub type Valuation = valuation::Valuation<f64>;
pub type LogNsw = extended::LogNsw<f64>;
pub type SolveReport = pipeline::SolveReport<f64>;
pub type OptResult = oracle::OptResult<f64>;
pub type GuaranteeFactors = pipeline::GuaranteeFactors<f64>;
pub type Certificates = pipeline::Certificates<f64>;
