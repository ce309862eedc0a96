//! Batch runs over random instances, written as CSV.
//!
//! A configuration looks like
//!
//! ```json
//! {
//!   "families": ["additive", "coverage"],
//!   "agents": [2, 3],
//!   "items": [4, 6],
//!   "weights": "symmetric",
//!   "eps": 0.1,
//!   "seeds": [1, 2, 3],
//!   "trials": 5,
//!   "exact": true,
//!   "efx": false
//! }
//! ```
//!
//! Every `(family, seed, trial)` triple yields one instance. Its size is
//! drawn uniformly from the inclusive `agents` and `items` ranges by a
//! ChaCha8 stream keyed on `seed` and `trial`, so a given triple always
//! produces the same instance regardless of which other families are listed.

use std::io::Write;

use nsw_core::efx::guarantee_half_efx;
use nsw_core::generate::random_instance_with;
use nsw_core::{brute_force_opt_with_guard, half_efx_check, solve_nsw, ApproxRatio, Family, Instance, WeightMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::args::ExperimentArgs;
use crate::{read_file, size_guard, write_file, CliError, CliResult};

pub const HEADER: [&str; 11] =
    ["instance_id", "n", "m", "family", "eps", "alg_log_nsw", "opt_log_nsw", "ratio", "bound", "swaps", "efx_pass"];

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub families: Vec<String>,
    pub agents: [usize; 2],
    pub items: [usize; 2],
    #[serde(default = "default_weights")]
    pub weights: String,
    pub eps: f64,
    pub seeds: Vec<u64>,
    pub trials: u32,
    #[serde(default = "default_true")]
    pub exact: bool,
    #[serde(default)]
    pub efx: bool,
}

fn default_weights() -> String {
    "symmetric".into()
}

/// A config with every name parsed and every range checked.
#[derive(Clone, Debug)]
pub struct Plan {
    pub families: Vec<Family>,
    pub agents: (usize, usize),
    pub items: (usize, usize),
    pub mode: WeightMode,
    pub eps: f64,
    pub seeds: Vec<u64>,
    pub trials: u32,
    pub exact: bool,
    pub efx: bool,
}

impl ExperimentConfig {
    pub fn plan(&self) -> CliResult<Plan> {
        let usage = |m: String| CliError::Usage(m);
        let families = self
            .families
            .iter()
            .map(|f| f.parse::<Family>().map_err(|e| usage(e.to_string())))
            .collect::<CliResult<Vec<_>>>()?;
        let mode: WeightMode = self.weights.parse().map_err(|e: nsw_core::Error| usage(e.to_string()))?;
        let [nlo, nhi] = self.agents;
        let [mlo, mhi] = self.items;
        if nlo == 0 || nlo > nhi {
            return Err(usage(format!("agents range {:?} must satisfy 1 <= lo <= hi", self.agents)));
        }
        if mlo > mhi {
            return Err(usage(format!("items range {:?} must satisfy lo <= hi", self.items)));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(usage(format!("eps must be positive, got {}", self.eps)));
        }
        if self.efx && mode != WeightMode::Symmetric {
            return Err(usage("efx requires symmetric weights".into()));
        }
        Ok(Plan {
            families,
            agents: (nlo, nhi),
            items: (mlo, mhi),
            mode,
            eps: self.eps,
            seeds: self.seeds.clone(),
            trials: self.trials,
            exact: self.exact,
            efx: self.efx,
        })
    }
}

/// One CSV row before formatting.
#[derive(Clone, Debug)]
pub struct Row {
    pub key: (usize, u64, u32),
    pub instance_id: String,
    pub n: usize,
    pub m: usize,
    pub family: Family,
    pub eps: f64,
    pub alg_log_nsw: f64,
    pub opt_log_nsw: Option<f64>,
    pub ratio: Option<ApproxRatio<f64>>,
    pub bound: f64,
    pub swaps: usize,
    pub efx_pass: Option<bool>,
}

impl Row {
    pub fn exceeds_bound(&self) -> bool {
        self.ratio.is_some_and(|r| r.value() > self.bound * (1.0 + 1e-12))
    }

    fn record(&self) -> [String; 11] {
        [
            self.instance_id.clone(),
            self.n.to_string(),
            self.m.to_string(),
            self.family.name().to_string(),
            self.eps.to_string(),
            fmt_f64(self.alg_log_nsw),
            self.opt_log_nsw.map(fmt_f64).unwrap_or_default(),
            self.ratio.map(|r| fmt_f64(r.value())).unwrap_or_default(),
            fmt_f64(self.bound),
            self.swaps.to_string(),
            self.efx_pass.map(|b| b.to_string()).unwrap_or_default(),
        ]
    }
}

fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        x.to_string()
    }
}

/// The instance for one `(family, seed, trial)` triple.
pub fn trial_instance(plan: &Plan, family: Family, seed: u64, trial: u32) -> CliResult<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(trial));
    let n = rng.gen_range(plan.agents.0..=plan.agents.1);
    let m = rng.gen_range(plan.items.0..=plan.items.1);
    Ok(random_instance_with(family, n, m, plan.mode, &mut rng)?)
}

enum Outcome {
    Row(Box<Row>),
    Skipped(String),
}

fn run_trial(plan: &Plan, guard: u128, key: (usize, u64, u32)) -> CliResult<Outcome> {
    let (fi, seed, trial) = key;
    let family = plan.families[fi];
    let instance_id = format!("{}-s{seed}-t{trial}", family.name());
    let inst = trial_instance(plan, family, seed, trial)?;
    let report = solve_nsw(&inst, plan.eps)?;
    let (opt_log_nsw, ratio) = if plan.exact {
        match brute_force_opt_with_guard(&inst, guard) {
            Ok(opt) => (Some(opt.opt_log.value()), Some(ApproxRatio::from_logs(opt.opt_log, report.log_nsw))),
            Err(e @ nsw_core::Error::SizeGuard { .. }) => return Ok(Outcome::Skipped(format!("{instance_id}: {e}"))),
            Err(e) => return Err(e.into()),
        }
    } else {
        (None, None)
    };
    let efx_pass = if plan.efx {
        let fair = guarantee_half_efx(&inst, &report.allocation)?;
        Some(fair.is_complete(inst.num_items()) && half_efx_check(&inst, &fair)?.is_empty())
    } else {
        None
    };
    Ok(Outcome::Row(Box::new(Row {
        key,
        instance_id,
        n: inst.num_agents(),
        m: inst.num_items(),
        family,
        eps: plan.eps,
        alg_log_nsw: report.log_nsw.value(),
        opt_log_nsw,
        ratio,
        bound: report.guarantee.best(),
        swaps: report.swaps,
        efx_pass,
    })))
}

/// Runs every trial, returning sorted rows and skip warnings.
pub fn run_plan(plan: &Plan, guard: u128) -> CliResult<(Vec<Row>, Vec<String>)> {
    let keys: Vec<(usize, u64, u32)> = (0..plan.families.len())
        .flat_map(|f| plan.seeds.iter().flat_map(move |&s| (0..plan.trials).map(move |t| (f, s, t))))
        .collect();
    let outcomes = keys.par_iter().map(|&k| run_trial(plan, guard, k)).collect::<CliResult<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Row(r) => rows.push(*r),
            Outcome::Skipped(w) => warnings.push(w),
        }
    }
    rows.sort_by_key(|r| r.key);
    Ok((rows, warnings))
}

/// CSV text for `rows`, with a `# max ratio <family> <r>` footer line per
/// family that has at least one exact ratio.
pub fn render_csv(rows: &[Row]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    let mut text = String::from_utf8(w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?)
        .expect("csv output is utf-8");
    let mut seen: Vec<Family> = Vec::new();
    for r in rows {
        if !seen.contains(&r.family) {
            seen.push(r.family);
        }
    }
    for fam in seen {
        let max = rows
            .iter()
            .filter(|r| r.family == fam)
            .filter_map(|r| r.ratio.map(|x| x.value()))
            .fold(None::<f64>, |acc, x| Some(acc.map_or(x, |a| a.max(x))));
        if let Some(max) = max {
            text.push_str(&format!("# max ratio {} {}\n", fam.name(), fmt_f64(max)));
        }
    }
    Ok(text)
}

pub fn cmd_experiment(a: &ExperimentArgs, out: &mut impl Write) -> CliResult<()> {
    let config: ExperimentConfig = serde_json::from_str(&read_file(&a.config)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
    let plan = config.plan()?;
    let (rows, warnings) = run_plan(&plan, size_guard()?)?;
    for w in &warnings {
        eprintln!("warning: skipped {w}");
    }
    let text = render_csv(&rows)?;
    match &a.out {
        Some(p) => write_file(p, &text)?,
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    if a.verify {
        let bad: Vec<&str> = rows
            .iter()
            .filter(|r| r.exceeds_bound() || r.efx_pass == Some(false))
            .map(|r| r.instance_id.as_str())
            .collect();
        if !bad.is_empty() {
            return Err(CliError::Lemma(format!("guarantee violated on {}", bad.join(", "))));
        }
    }
    Ok(())
}
