//! Command-line front end. Exit codes: 0 success, 1 invalid input,
//! 2 enumeration size guard, 3 invariant violation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::harness::{
    gen_half_tight, gen_integrality_gap, gen_random_instance, monte_carlo, prepare_realized,
    sample_scenario, HarnessError, McOptions, McPolicy, ScenarioSampler, MIN_TRIALS,
};
use crate::lp::{build_lp, solve_lp, LpError, LpMode, LpStatus, Variant};
use crate::model::{
    exclusivity_groups, fractional_revenue, Instance, ModelError, MoneyScale, Scenario,
};
use crate::offline_rounding::{approx_ratio_bound, forestify, support_forest, RoundingError};
use crate::online::{prepare, stream_from_scenario, OnlineError, OnlinePolicy};
use crate::oracle::{
    enumerate_scenarios, expected_offline_opt_exact, offline_opt_exact, online_opt_exact,
    OracleError,
};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};
use crate::sampling::trial_rng;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    SizeGuard(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::SizeGuard(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::Internal(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::SizeGuard { .. } => CliError::SizeGuard(e.to_string()),
            OracleError::Model(m) => m.into(),
        }
    }
}

impl From<RoundingError> for CliError {
    fn from(e: RoundingError) -> Self {
        match e {
            RoundingError::Stuck { .. }
            | RoundingError::StepCap(_)
            | RoundingError::InvariantViolation(_)
            | RoundingError::Internal(_) => CliError::Invariant(e.to_string()),
            RoundingError::Lp(l) => l.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<OnlineError> for CliError {
    fn from(e: OnlineError) -> Self {
        match e {
            OnlineError::Lp(l) => l.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Rounding(r) => r.into(),
            HarnessError::Oracle(o) => o.into(),
            HarnessError::Lp(l) => l.into(),
            HarnessError::Online(o) => o.into(),
            HarnessError::InfeasibleRealization(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "adcell",
    version,
    about = "Budgeted and capacitated ad allocation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated instance (or a sampled scenario) as JSON.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Solve an LP relaxation exactly.
    Lp(LpArgs),
    /// Round the realized relaxation of one scenario.
    SolveOffline(SolveOfflineArgs),
    /// Monte Carlo evaluation of a policy.
    Simulate(SimulateArgs),
    /// Exact reference values by enumeration.
    Oracle(OracleArgs),
    /// Run every invariant check on one instance.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct OutputArg {
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// One advertiser, `n` unit queries of probability 1/n.
    IntegralityGap {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Two-query instance where the optimal online policy earns about half
    /// the offline optimum.
    HalfTight {
        #[arg(long, value_parser = parse_rational_arg)]
        eps: Rational,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Seeded random instance with bids at most the budgets.
    Random {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Number of customers.
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 5)]
        bid_scale: u32,
        #[arg(long, default_value_t = 10)]
        budget_scale: u32,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Sample arrivals for an instance.
    Scenario {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    B,
    C,
    Bc,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::B => Variant::B,
            VariantArg::C => Variant::C,
            VariantArg::Bc => Variant::BC,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Expectation,
    Realized,
}

#[derive(Debug, Args)]
struct LpArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "bc")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "expectation")]
    mode: ModeArg,
    /// Scenario JSON, required for the realized mode.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Print the program in text form instead of solving it.
    #[arg(long)]
    dump: bool,
}

#[derive(Debug, Args)]
struct SolveOfflineArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Write the rounding steps as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    policy: McPolicy,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    /// Add exact oracle values when the instance is small enough.
    #[arg(long)]
    oracle: bool,
    /// Print a CSV header and row instead of JSON.
    #[arg(long)]
    csv: bool,
    /// Also write one CSV row per trial here.
    #[arg(long)]
    trials_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Offline,
    ExpectedOffline,
    Online,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    which: Which,
    /// Scenario JSON for `offline`; every query arrives when omitted and
    /// no two queries are exclusive.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = MIN_TRIALS)]
    trials: u64,
}

fn parse_rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    Ok(Instance::from_json(&read_text(path)?)?.validated()?)
}

fn read_scenario(path: &Path, inst: &Instance) -> Result<Scenario, CliError> {
    let s: Scenario = serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    s.check(inst)?;
    Ok(s)
}

fn emit(out: &mut dyn Write, target: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match target {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => writeln!(out, "{text}").map_err(|e| CliError::Input(e.to_string())),
    }
}

fn say(out: &mut dyn Write, text: impl AsRef<str>) -> Result<(), CliError> {
    writeln!(out, "{}", text.as_ref()).map_err(|e| CliError::Input(e.to_string()))
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values serialize")
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Gen { what } => gen(what, out),
        Command::Lp(args) => lp(args, out),
        Command::SolveOffline(args) => solve_offline(args, out),
        Command::Simulate(args) => simulate(args, out),
        Command::Oracle(args) => oracle(args, out),
        Command::Verify(args) => verify(args, out),
    }
}

fn gen(what: GenCommand, out: &mut dyn Write) -> Result<(), CliError> {
    let (text, target) = match what {
        GenCommand::IntegralityGap { n, out: o } => (gen_integrality_gap(n)?.to_json(), o.output),
        GenCommand::HalfTight { eps, out: o } => (gen_half_tight(&eps)?.to_json(), o.output),
        GenCommand::Random {
            m,
            n,
            s,
            bid_scale,
            budget_scale,
            seed,
            out: o,
        } => (
            gen_random_instance(m, n, s, bid_scale, budget_scale, seed)?.to_json(),
            o.output,
        ),
        GenCommand::Scenario {
            input,
            seed,
            out: o,
        } => {
            let inst = read_instance(&input)?;
            let s = sample_scenario(&inst, &mut trial_rng(seed, 0))?;
            (
                serde_json::to_string(&s).expect("scenarios serialize"),
                o.output,
            )
        }
    };
    emit(out, &target, &text)
}

fn lp(args: LpArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = read_instance(&args.input)?;
    let scenario = match (args.mode, &args.scenario) {
        (ModeArg::Expectation, _) => None,
        (ModeArg::Realized, Some(path)) => Some(read_scenario(path, &inst)?),
        (ModeArg::Realized, None) => {
            return Err(CliError::Input("--mode realized needs --scenario".into()));
        }
    };
    let mode = match &scenario {
        Some(s) => LpMode::Realized(s),
        None => LpMode::Expectation,
    };
    let program = build_lp(&inst, args.variant.into(), mode)?;
    if args.dump {
        return say(out, program.to_text());
    }
    let sol = solve_lp(&program)?;
    if sol.status != LpStatus::Optimal {
        return say(out, pretty(&json!({ "status": "infeasible" })));
    }
    let solution: Vec<_> = sol
        .assignment(&program)
        .iter()
        .map(|(i, j, v)| json!({ "advertiser": i, "query": j, "value": format_rational(v) }))
        .collect();
    say(
        out,
        pretty(&json!({
            "status": "optimal",
            "objective": format_rational(&sol.objective_value),
            "solution": solution,
        })),
    )
}

fn solve_offline(args: SolveOfflineArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = read_instance(&args.input)?;
    let scenario = read_scenario(&args.scenario, &inst)?;
    let bound = approx_ratio_bound(&inst)?;
    let program = build_lp(&inst, Variant::BC, LpMode::Realized(&scenario))?;
    let sol = solve_lp(&program)?;
    if sol.status != LpStatus::Optimal {
        return Err(CliError::Invariant("realized program is infeasible".into()));
    }
    let (assignment, trace) = crate::offline_rounding::round_offline(
        &inst,
        &scenario,
        &sol.assignment(&program),
        &mut trial_rng(args.seed, 0),
    )?;
    assignment
        .check(&inst, Some(&scenario))
        .map_err(|e| CliError::Invariant(e.to_string()))?;
    if let Some(path) = &args.trace {
        fs::write(path, trace.to_jsonl())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let money = MoneyScale::new(&inst)?;
    let revenue = money.to_rational(money.revenue(&assignment));
    let ratio = if sol.objective_value == Rational::from_integer(0.into()) {
        None
    } else {
        Some(to_f64(&(&revenue / &sol.objective_value)))
    };
    let assigned: Vec<_> = assignment
        .assigned
        .iter()
        .map(|(j, i)| json!({ "query": j, "advertiser": i }))
        .collect();
    say(
        out,
        pretty(&json!({
            "revenue": format_rational(&revenue),
            "realized_lp": format_rational(&sol.objective_value),
            "ratio": ratio,
            "approx_bound": format_rational(&bound),
            "steps": trace.len(),
            "assignment": assigned,
        })),
    )
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = read_instance(&args.input)?;
    let options = McOptions {
        trials: args.trials,
        seed: args.seed,
        jobs: args.jobs,
        with_oracle: args.oracle,
        keep_trials: args.trials_csv.is_some(),
    };
    let report = monte_carlo(&inst, args.policy, options)?;
    if let Some(path) = &args.trials_csv {
        fs::write(path, report.trials_csv())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    if args.csv {
        say(out, crate::harness::McReport::CSV_HEADER)?;
        return say(out, report.to_csv_row());
    }
    let mut value = serde_json::to_value(&report).expect("reports serialize");
    if let Some(obj) = value.as_object_mut() {
        obj.remove("per_trial");
    }
    say(out, pretty(&value))
}

fn oracle(args: OracleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = read_instance(&args.input)?;
    let value = match args.which {
        Which::Offline => {
            let scenario = match &args.scenario {
                Some(path) => read_scenario(path, &inst)?,
                None => {
                    let s = Scenario::all_arrived(inst.num_queries());
                    s.check(&inst).map_err(|_| {
                        CliError::Input("instance has exclusive queries; pass --scenario".into())
                    })?;
                    s
                }
            };
            offline_opt_exact(&inst, &scenario)?.0
        }
        Which::ExpectedOffline => expected_offline_opt_exact(&inst)?,
        Which::Online => online_opt_exact(&inst)?,
    };
    say(out, format_rational(&value))
}

struct Checks<'a> {
    out: &'a mut dyn Write,
    failures: Vec<String>,
}

impl Checks<'_> {
    fn record(&mut self, name: &str, result: Result<String, String>) -> Result<(), CliError> {
        match result {
            Ok(note) if note.is_empty() => say(self.out, format!("ok    {name}")),
            Ok(note) => say(self.out, format!("ok    {name} ({note})")),
            Err(detail) => {
                self.failures.push(name.to_string());
                say(self.out, format!("FAIL  {name}: {detail}"))
            }
        }
    }
}

fn verify(args: VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Input("--trials must be positive".into()));
    }
    let inst = read_instance(&args.input)?;
    let sampler = ScenarioSampler::new(&inst)?;
    let mut checks = Checks {
        out,
        failures: Vec::new(),
    };

    // Expectation program against the mean realized optimum.
    let dominance = (|| -> Result<String, String> {
        let program =
            build_lp(&inst, Variant::BC, LpMode::Expectation).map_err(|e| e.to_string())?;
        let expectation = solve_lp(&program)
            .map_err(|e| e.to_string())?
            .objective_value;
        let scenarios = match enumerate_scenarios(&inst) {
            Ok(s) => s,
            Err(OracleError::SizeGuard { .. }) => return Ok("skipped: too many scenarios".into()),
            Err(e) => return Err(e.to_string()),
        };
        let mut mean = Rational::from_integer(0.into());
        for (s, p) in scenarios {
            let realized =
                build_lp(&inst, Variant::BC, LpMode::Realized(&s)).map_err(|e| e.to_string())?;
            mean += p * solve_lp(&realized)
                .map_err(|e| e.to_string())?
                .objective_value;
        }
        if mean <= expectation {
            Ok(format!(
                "{} <= {}",
                format_rational(&mean),
                format_rational(&expectation)
            ))
        } else {
            Err(format!(
                "{} > {}",
                format_rational(&mean),
                format_rational(&expectation)
            ))
        }
    })();
    checks.record("expectation LP dominates realized LP mean", dominance)?;

    let bound = approx_ratio_bound(&inst);
    checks.record(
        "bids within budgets",
        bound
            .as_ref()
            .map(format_rational)
            .map_err(|e| e.to_string()),
    )?;

    let mut forest_issue = None;
    let mut rounding_issue = None;
    let mut rounded = 0u64;
    for t in 0..args.trials {
        let mut rng = trial_rng(args.seed, t);
        let scenario = sampler.sample(&mut rng);
        let prepared = match prepare_realized(&inst, &scenario) {
            Ok(Some(p)) => p,
            Ok(None) => {
                rounding_issue.get_or_insert(format!("trial {t}: realized program infeasible"));
                continue;
            }
            Err(e) => {
                rounding_issue.get_or_insert(format!("trial {t}: {e}"));
                continue;
            }
        };
        let (rounder, lp_value) = prepared;
        if forest_issue.is_none() {
            let program = build_lp(&inst, Variant::BC, LpMode::Realized(&scenario))?;
            let y = solve_lp(&program)?.assignment(&program);
            match forestify(&inst, &y) {
                Ok(z) => {
                    let same = fractional_revenue(&inst, &z).ok() == Some(lp_value.clone());
                    if !same || !support_forest(&inst, &z).is_acyclic() {
                        forest_issue = Some(format!("trial {t}: objective or acyclicity lost"));
                    }
                }
                Err(e) => forest_issue = Some(format!("trial {t}: {e}")),
            }
        }
        match rounder.round(&mut rng) {
            Ok((x, _)) => {
                if let Err(e) = x.check(&inst, Some(&scenario)) {
                    rounding_issue.get_or_insert(format!("trial {t}: {e}"));
                }
                rounded += 1;
            }
            Err(e) => {
                rounding_issue.get_or_insert(format!("trial {t}: {e}"));
            }
        }
    }
    checks.record(
        "forestify keeps the objective and leaves a forest",
        forest_issue.map_or(Ok(String::new()), Err),
    )?;
    checks.record(
        "rounding keeps assignment and capacity rows",
        rounding_issue.map_or(Ok(format!("{rounded} runs")), Err),
    )?;

    let groups = exclusivity_groups(&inst);
    for policy in [OnlinePolicy::Ipb, OnlinePolicy::Ipc, OnlinePolicy::Ipbc] {
        let result = (|| -> Result<String, String> {
            let (allocator, _) = prepare(&inst, policy).map_err(|e| e.to_string())?;
            for t in 0..args.trials {
                let mut rng = trial_rng(args.seed, t);
                let scenario = sampler.sample(&mut rng);
                let stream = stream_from_scenario(&inst, &scenario);
                debug_assert_eq!(stream.len(), groups.len());
                let log = allocator
                    .run(&inst, &stream, &mut rng)
                    .map_err(|e| e.to_string())?;
                log.assignment
                    .check(&inst, Some(&scenario))
                    .map_err(|e| format!("trial {t}: {e}"))?;
            }
            Ok(String::new())
        })();
        checks.record(
            &format!("{policy:?} allocations respect arrivals and capacities").to_lowercase(),
            result,
        )?;
    }

    if checks.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "{} check(s) failed: {}",
            checks.failures.len(),
            checks.failures.join(", ")
        )))
    }
}
