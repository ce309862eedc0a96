//! Command implementations behind the `nsw` binary.

pub mod args;
pub mod experiment;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use nsw_core::efx::guarantee_half_efx_logged;
use nsw_core::generate::random_instance;
use nsw_core::io::{allocation_from_json, allocation_to_json, instance_from_json, instance_to_json, named_bundles};
use nsw_core::local_search::{
    verify_log_price_bound, verify_single_item_bound, verify_symmetric_item_bound, verify_symmetric_price_bound,
    LocalSearchProblem,
};
use nsw_core::oracle::DEFAULT_SIZE_GUARD;
use nsw_core::valuation::MAX_EXHAUSTIVE_ITEMS;
use nsw_core::{
    brute_force_opt_with_guard, half_efx_check, nsw_log, solve_nsw, Allocation, ApproxRatio, Family, Instance, OptResult,
    SolveReport, WeightMode,
};
use serde_json::{json, Value};

use crate::args::{Cli, Command, EfxArgs, ExactArgs, GenArgs, SolveArgs, VerifyArgs};

/// Environment variable overriding the enumeration cap `n^m`.
pub const SIZE_GUARD_VAR: &str = "NSW_SIZE_GUARD";

#[derive(Debug)]
pub enum CliError {
    Core(nsw_core::Error),
    Io { path: PathBuf, source: std::io::Error },
    Csv(csv::Error),
    Usage(String),
    /// One or more certificate checks failed.
    Lemma(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Core(e) => write!(f, "{e}"),
            Self::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Self::Csv(e) => write!(f, "csv: {e}"),
            Self::Usage(m) => f.write_str(m),
            Self::Lemma(m) => write!(f, "lemma violation: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nsw_core::Error> for CliError {
    fn from(e: nsw_core::Error) -> Self {
        match e {
            nsw_core::Error::LemmaViolation(m) => Self::Lemma(m),
            other => Self::Core(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Csv(e)
    }
}

impl CliError {
    /// 2 for lemma violations, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Lemma(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> ExitCode {
    let out = std::io::stdout();
    let mut out = out.lock();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a, &mut out),
        Command::Solve(a) => cmd_solve(&a, &mut out),
        Command::Efx(a) => cmd_efx(&a, &mut out),
        Command::Exact(a) => cmd_exact(&a, &mut out),
        Command::Experiment(a) => experiment::cmd_experiment(&a, &mut out),
        Command::Verify(a) => cmd_verify(&a, &mut out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn line(out: &mut impl Write, s: &str) -> CliResult<()> {
    writeln!(out, "{s}").map_err(stdout_err)
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io { path: PathBuf::from("<stdout>"), source: e }
}

pub fn load_instance(path: &Path) -> CliResult<Instance> {
    Ok(instance_from_json(&read_file(path)?)?)
}

/// The enumeration cap, from `NSW_SIZE_GUARD` when set.
pub fn size_guard() -> CliResult<u128> {
    match std::env::var(SIZE_GUARD_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SIZE_GUARD_VAR} must be a nonnegative integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_SIZE_GUARD),
    }
}

fn check_eps(eps: f64) -> CliResult<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--eps must be a positive number, got {eps}")))
    }
}

pub fn cmd_gen(a: &GenArgs, out: &mut impl Write) -> CliResult<()> {
    let family: Family = a.family.parse().map_err(|e: nsw_core::Error| CliError::Usage(e.to_string()))?;
    let mode: WeightMode = a.weights.parse().map_err(|e: nsw_core::Error| CliError::Usage(e.to_string()))?;
    if a.agents == 0 {
        return Err(CliError::Usage("an instance needs at least one agent (-n >= 1)".into()));
    }
    let inst: Instance = random_instance(family, a.agents, a.items, mode, a.seed)?;
    let text = instance_to_json(&inst) + "\n";
    match &a.out {
        Some(p) => write_file(p, &text),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}

fn fmt_bundles(inst: &Instance, alloc: &Allocation) -> String {
    named_bundles(inst, alloc)
        .into_iter()
        .map(|(a, items)| format!("{a}: {{{}}}", items.join(", ")))
        .collect::<Vec<_>>()
        .join("; ")
}

fn fmt_log(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn ratio_value(r: ApproxRatio<f64>) -> Value {
    match r {
        ApproxRatio::Finite(x) => json!(x),
        ApproxRatio::Infinite => json!("inf"),
    }
}

/// One named pass/fail line of a verification run.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: Option<bool>,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed: Some(passed), detail: detail.into() }
    }

    fn skipped(name: &'static str, why: impl Into<String>) -> Self {
        Self { name, passed: None, detail: why.into() }
    }

    fn to_json(&self) -> Value {
        json!({
            "check": self.name,
            "status": match self.passed { Some(true) => "pass", Some(false) => "fail", None => "skipped" },
            "detail": self.detail,
        })
    }
}

/// Lemma checks on a solver run, plus the ratio and ½-EFX checks when the
/// optimum or a fair allocation is supplied.
pub fn certificate_checks(
    inst: &Instance,
    report: &SolveReport,
    opt: Option<&OptResult>,
    fair: Option<&Allocation>,
) -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    match &report.certificates {
        None => checks.push(Check::skipped("local search", "no allocation gives every agent positive value")),
        Some(c) => {
            checks.push(Check::new(
                "local optimality",
                c.local_opt_violations.is_empty(),
                format!("{} improving swaps", c.local_opt_violations.len()),
            ));
            checks.push(Check::new(
                "asymmetric spending",
                c.asymmetric_spending.passed(),
                format!("p(J) = {:.6} (budget {})", c.asymmetric_spending.total, c.asymmetric_spending.total_budget),
            ));
            checks.push(Check::new(
                "symmetric spending",
                c.symmetric_spending.passed(),
                format!("p(J) = {:.6} (budget {})", c.symmetric_spending.total, c.symmetric_spending.total_budget),
            ));
            checks.push(Check::new(
                "swap bound",
                report.swaps as f64 <= c.swap_bound,
                format!("{} swaps, bound {:.3}", report.swaps, c.swap_bound),
            ));
            let problem = LocalSearchProblem::new(inst, report.local_items.clone())?;
            let r = &report.local_bundles;
            let found = verify_single_item_bound(&problem, r, report.eps_bar)?;
            checks.push(Check::new("single-item price bound", found.is_empty(), format!("{} violations", found.len())));
            if inst.is_symmetric() {
                let found = verify_symmetric_item_bound(&problem, r, report.eps_bar)?;
                checks.push(Check::new("symmetric single-item bound", found.is_empty(), format!("{} violations", found.len())));
            }
            if report.local_items.len() <= MAX_EXHAUSTIVE_ITEMS {
                let found = verify_log_price_bound(&problem, r, report.eps_bar)?;
                checks.push(Check::new("log-price set bound", found.is_empty(), format!("{} violations", found.len())));
                if inst.is_symmetric() {
                    let found = verify_symmetric_price_bound(&problem, r, report.eps_bar)?;
                    checks.push(Check::new("symmetric price set bound", found.is_empty(), format!("{} violations", found.len())));
                }
            } else {
                checks.push(Check::skipped("set bounds", format!("more than {MAX_EXHAUSTIVE_ITEMS} local items")));
            }
        }
    }
    if let Some(opt) = opt {
        let r = ApproxRatio::from_logs(opt.opt_log, report.log_nsw);
        let bound = report.guarantee.best();
        checks.push(Check::new(
            "approximation ratio",
            r.value() <= bound * (1.0 + 1e-12),
            format!("ratio {} vs guarantee {bound:.6}", ratio_value(r)),
        ));
    }
    if let Some(fair) = fair {
        let complete = fair.is_complete(inst.num_items());
        checks.push(Check::new("fair allocation complete", complete, ""));
        let found = half_efx_check(inst, fair)?;
        checks.push(Check::new("½-EFX", found.is_empty(), format!("{} violations", found.len())));
        let after = nsw_log(inst, fair)?.value();
        let before = report.log_nsw.value();
        checks.push(Check::new(
            "fair NSW at least half",
            before == f64::NEG_INFINITY || after >= before - 2f64.ln() - 1e-9,
            format!("log NSW {} -> {}", fmt_log(before), fmt_log(after)),
        ));
    }
    Ok(checks)
}

fn print_checks(checks: &[Check], out: &mut impl Write) -> CliResult<()> {
    for c in checks {
        let tag = match c.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        let sep = if c.detail.is_empty() { "" } else { " - " };
        writeln!(out, "{}: {tag}{sep}{}", c.name, c.detail).map_err(stdout_err)?;
    }
    Ok(())
}

fn failed_checks(checks: &[Check]) -> Option<String> {
    let failed: Vec<&str> = checks.iter().filter(|c| c.passed == Some(false)).map(|c| c.name).collect();
    (!failed.is_empty()).then(|| failed.join(", "))
}

fn write_trace(inst: &Instance, report: &SolveReport, path: &Path) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "from", "item", "to", "log_gain"])?;
    for s in &report.trace {
        w.write_record([
            s.iteration.to_string(),
            inst.agent_ids()[s.from].clone(),
            inst.item_ids()[s.item].clone(),
            inst.agent_ids()[s.to].clone(),
            s.log_gain.to_string(),
        ])?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn named_opt(inst: &Instance, ids: &[String], choice: &[Option<usize>]) -> Value {
    let pairs: serde_json::Map<String, Value> = inst
        .agent_ids()
        .iter()
        .zip(choice)
        .map(|(a, j)| (a.clone(), j.map_or(Value::Null, |j| json!(ids[j]))))
        .collect();
    Value::Object(pairs)
}

pub fn cmd_solve(a: &SolveArgs, out: &mut impl Write) -> CliResult<()> {
    check_eps(a.eps)?;
    let inst = load_instance(&a.instance)?;
    let report = solve_nsw(&inst, a.eps)?;
    let mut lines = Vec::new();
    if report.phase1_feasible {
        lines.push(format!("NSW = {} (log {})", report.log_nsw.exp(), fmt_log(report.log_nsw.value())));
    } else {
        lines.push("NSW = 0 (no allocation gives every agent positive value)".to_string());
    }
    lines.push(format!("allocation: {}", fmt_bundles(&inst, &report.allocation)));
    match &report.certificates {
        Some(c) => lines.push(format!("swaps: {} (bound {:.3})", report.swaps, c.swap_bound)),
        None => lines.push(format!("swaps: {}", report.swaps)),
    }
    let g = &report.guarantee;
    match g.symmetric {
        Some(s) => lines.push(format!("guarantee: {s} (equal weights)")),
        None => lines.push(format!("guarantee: {:.6} (weighted; {:.6} and {:.6})", g.best(), g.asymmetric, g.asymmetric_strong)),
    }
    for l in lines.drain(..) {
        line(out, &l)?;
    }

    let item_ids = inst.item_ids().to_vec();
    let mut doc = json!({
        "format_version": 1,
        "eps": a.eps,
        "eps_bar": report.eps_bar,
        "phase1_feasible": report.phase1_feasible,
        "log_nsw": report.log_nsw,
        "nsw": report.log_nsw.exp(),
        "allocation": named_bundles(&inst, &report.allocation),
        "tau": named_opt(&inst, &item_ids, &report.tau),
        "sigma": named_opt(&inst, &item_ids, &report.sigma),
        "swaps": report.swaps,
        "guarantee": report.guarantee,
    });

    let mut opt = None;
    if a.exact {
        let o = brute_force_opt_with_guard(&inst, size_guard()?)?;
        let r = ApproxRatio::from_logs(o.opt_log, report.log_nsw);
        let within = r.value() <= report.guarantee.best() * (1.0 + 1e-12);
        line(out, &format!(
            "OPT NSW = {} (log {}); ratio {} {} guarantee {:.6}",
            o.opt_log.exp(),
            fmt_log(o.opt_log.value()),
            ratio_value(r),
            if within { "within" } else { "EXCEEDS" },
            report.guarantee.best()
        ))?;
        doc["exact"] = json!({
            "opt_log_nsw": o.opt_log,
            "ratio": ratio_value(r),
            "within_guarantee": within,
            "argmax": named_bundles(&inst, &o.argmax),
            "enumerated": o.enumerated.to_string(),
        });
        opt = Some(o);
    }

    let mut fair = None;
    if a.efx {
        let run = guarantee_half_efx_logged(&inst, &report.allocation)?;
        let pass = half_efx_check(&inst, &run.allocation)?.is_empty();
        let fair_log = nsw_log(&inst, &run.allocation)?;
        line(out, &format!("½-EFX: {}", if pass { "PASS" } else { "FAIL" }))?;
        line(out, &format!("fair allocation: {} (NSW {})", fmt_bundles(&inst, &run.allocation), fair_log.exp()))?;
        doc["efx"] = json!({
            "pass": pass,
            "log_nsw": fair_log,
            "allocation": named_bundles(&inst, &run.allocation),
            "fair_or_efficient_calls": run.fair_or_efficient_calls,
            "singleton_swaps": run.singleton_swaps,
            "envy_cycle_rotations": run.envy_cycle.rotations,
        });
        fair = Some(run.allocation);
    }

    let mut failure = None;
    if a.verify {
        let checks = certificate_checks(&inst, &report, opt.as_ref(), fair.as_ref())?;
        print_checks(&checks, out)?;
        doc["checks"] = Value::Array(checks.iter().map(Check::to_json).collect());
        doc["certificates"] = serde_json::to_value(&report.certificates).map_err(nsw_core::Error::from)?;
        failure = failed_checks(&checks);
    }

    if let Some(path) = &a.trace {
        write_trace(&inst, &report, path)?;
    }
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&doc).map_err(nsw_core::Error::from)? + "\n";
        write_file(path, &text)?;
    }
    match failure {
        Some(f) => Err(CliError::Lemma(f)),
        None => Ok(()),
    }
}

pub fn cmd_efx(a: &EfxArgs, out: &mut impl Write) -> CliResult<()> {
    check_eps(a.eps)?;
    let inst = load_instance(&a.instance)?;
    inst.ensure_valid()?;
    let start = match &a.alloc {
        Some(p) => allocation_from_json(&inst, &read_file(p)?)?,
        None => solve_nsw(&inst, a.eps)?.allocation,
    };
    let run = guarantee_half_efx_logged(&inst, &start)?;
    let pass = half_efx_check(&inst, &run.allocation)?.is_empty();
    let before = nsw_log(&inst, &start)?;
    let after = nsw_log(&inst, &run.allocation)?;
    writeln!(out, "input: {} (NSW {})", fmt_bundles(&inst, &start), before.exp()).map_err(stdout_err)?;
    writeln!(out, "output: {} (NSW {})", fmt_bundles(&inst, &run.allocation), after.exp()).map_err(stdout_err)?;
    writeln!(out, "½-EFX: {}", if pass { "PASS" } else { "FAIL" }).map_err(stdout_err)?;
    if let Some(p) = &a.out {
        write_file(p, &(allocation_to_json(&inst, &run.allocation) + "\n"))?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Lemma("fair allocation is not ½-EFX".into()))
    }
}

pub fn cmd_exact(a: &ExactArgs, out: &mut impl Write) -> CliResult<()> {
    let inst = load_instance(&a.instance)?;
    let opt = brute_force_opt_with_guard(&inst, size_guard()?)?;
    writeln!(out, "OPT NSW = {} (log {})", opt.opt_log.exp(), fmt_log(opt.opt_log.value())).map_err(stdout_err)?;
    writeln!(out, "argmax: {}", fmt_bundles(&inst, &opt.argmax)).map_err(stdout_err)?;
    writeln!(out, "enumerated: {}", opt.enumerated).map_err(stdout_err)?;
    if let Some(p) = &a.out {
        write_file(p, &(allocation_to_json(&inst, &opt.argmax) + "\n"))?;
    }
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut impl Write) -> CliResult<()> {
    check_eps(a.eps)?;
    let inst = load_instance(&a.instance)?;
    let report = solve_nsw(&inst, a.eps)?;
    let opt = if a.exact { Some(brute_force_opt_with_guard(&inst, size_guard()?)?) } else { None };
    let fair = if a.efx { Some(guarantee_half_efx_logged(&inst, &report.allocation)?.allocation) } else { None };
    let checks = certificate_checks(&inst, &report, opt.as_ref(), fair.as_ref())?;
    print_checks(&checks, out)?;
    match failed_checks(&checks) {
        Some(f) => Err(CliError::Lemma(f)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_violations_exit_two() {
        assert_eq!(CliError::from(nsw_core::Error::LemmaViolation("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(nsw_core::Error::NotSymmetric).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
    }

    #[test]
    fn failed_checks_are_named() {
        let checks =
            vec![Check::new("a", true, ""), Check::skipped("b", "why"), Check::new("c", false, ""), Check::new("d", false, "")];
        assert_eq!(failed_checks(&checks).as_deref(), Some("c, d"));
        assert_eq!(failed_checks(&checks[..2]), None);
    }
}
