use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use achlioptas_core::analysis::{domination_check, run_experiment, ComparisonReport, DominationReport, ExperimentConfig};
use achlioptas_core::dynamics::{integrate, limit_constants_with, system_for, LimitConstants, LimitOptions};
use achlioptas_core::rules::{lexicographic, Applicability, Builtin, RuleDocument, RuleError, RuleSignature, RuleSpec};
use achlioptas_core::simulator::{write_runs, write_snapshots, ProcessState, RunOptions, RunRecord, RunStatus};
use anyhow::Context;
use serde::Serialize;

use crate::error::CliError;
use crate::rule_args::{guarded, RuleArgs, RuleSummary};
use crate::settings::{ExperimentArgs, Settings};
use crate::{CompareArgs, SimulateArgs};

const TOOL: &str = env!("CARGO_PKG_NAME");
const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code when any run hit the round cap.
const EXIT_TIMEOUT: u8 = 4;

type CmdResult = Result<ExitCode, CliError>;

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, B: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a C,
    resolved_rule: RuleSummary,
    /// K' the rule was extended to by the applicability check.
    extended_to: Option<u32>,
    #[serde(flatten)]
    body: B,
}

fn envelope<'a, C: Serialize, B: Serialize>(
    config: &'a C,
    rule: &RuleSpec,
    extended_to: Option<u32>,
    body: B,
) -> Envelope<'a, C, B> {
    Envelope {
        tool: TOOL,
        version: VERSION,
        config,
        resolved_rule: RuleSummary::of(rule),
        extended_to,
        body,
    }
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = writer(out)?;
    serde_json::to_writer_pretty(&mut w, value).context("writing JSON")?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn set_name(set: &[u32]) -> String {
    let items: Vec<String> = set.iter().map(u32::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn rule_info(args: &RuleArgs, json: bool) -> CmdResult {
    let rule = args.resolve()?;
    let sig = rule.signature();
    let guard = rule.applicability_guard();
    let verdict = match &guard {
        Ok(Applicability::Applicable) => "applicable".to_string(),
        Ok(Applicability::ExtendTo(k)) => format!("extend to K'={k}"),
        Err(RuleError::Degenerate) => "degenerate".to_string(),
        Err(e) => return Err(e.clone().into()),
    };
    if json {
        #[derive(Serialize)]
        struct Info<'a> {
            #[serde(flatten)]
            signature: &'a RuleSignature,
            applicability: &'a str,
        }
        let info = Info {
            signature: &sig,
            applicability: &verdict,
        };
        write_json(None, &envelope(args, &rule, None, info))?;
    } else {
        println!("rule: {} (K = {}, ell = {})", rule.name(), rule.k(), rule.ell());
        println!("  k  ext_k");
        for (i, e) in sig.ext_per_size.iter().enumerate() {
            println!("{:>3}  {e}", i + 1);
        }
        println!("ext = {}", sig.ext);
        println!("slow = {}", set_name(&sig.slow));
        println!("fast = {}", set_name(&sig.fast));
        println!("degenerate = {}", sig.degenerate);
        println!("applicability: {verdict}");
    }
    if let Ok(Applicability::ExtendTo(k)) = guard {
        eprintln!("warning: ext ≥ 2K+2; extend to K′={k}");
    }
    Ok(ExitCode::SUCCESS)
}

fn constants_for(rule: &RuleSpec, dt: f64, t_cap: f64) -> Result<LimitConstants, CliError> {
    let sys = system_for(rule)?;
    let opts = LimitOptions {
        dt,
        t_cap,
        ..Default::default()
    };
    limit_constants_with(rule, &sys, opts).map_err(|e| match CliError::from(e) {
        CliError::Degenerate(_) => CliError::Degenerate(rule.name().to_string()),
        other => other,
    })
}

pub fn constants(args: &RuleArgs, dt: f64, t_cap: f64, out: Option<&Path>) -> CmdResult {
    let (rule, extended_to) = guarded(args.resolve()?)?;
    let consts = constants_for(&rule, dt, t_cap)?;
    #[derive(Serialize)]
    struct Cfg<'a> {
        #[serde(flatten)]
        rule: &'a RuleArgs,
        dt: f64,
        t_cap: f64,
    }
    let cfg = Cfg { rule: args, dt, t_cap };
    write_json(out, &envelope(&cfg, &rule, extended_to, &consts))?;
    if !consts.converged {
        eprintln!("warning: constants did not converge by t = {}", consts.t_final);
    }
    Ok(ExitCode::SUCCESS)
}

pub fn ode(args: &RuleArgs, t_max: f64, dt: f64, every: usize, out: Option<&Path>) -> CmdResult {
    let rule = args.resolve()?;
    let sys = system_for(&rule)?;
    let traj = integrate(&sys, t_max, dt)?;
    let w = writer(out)?;
    traj.write_csv(w, every).context("writing trajectory")?;
    eprintln!("{} ({}), step {:e}", rule.name(), sys.provenance(), traj.step_size);
    Ok(ExitCode::SUCCESS)
}

fn write_tables(dir: &Path, records: &[RunRecord]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let runs = dir.join("runs.csv");
    let snaps = dir.join("snapshots.csv");
    write_runs(BufWriter::new(File::create(&runs)?), records).context("writing runs.csv")?;
    write_snapshots(BufWriter::new(File::create(&snaps)?), records).context("writing snapshots.csv")?;
    Ok(())
}

fn timeout_code(records: &[RunRecord]) -> ExitCode {
    if records.iter().any(|r| r.status == RunStatus::TimedOut) {
        ExitCode::from(EXIT_TIMEOUT)
    } else {
        ExitCode::SUCCESS
    }
}

pub fn simulate(a: SimulateArgs) -> CmdResult {
    let rule = a.rule.resolve()?;
    let mut state = ProcessState::new(&rule, a.n, a.seed).map_err(|e| CliError::Config(e.to_string()))?;
    if !(0.0..1.0).contains(&a.giant_epsilon) {
        return Err(CliError::Config(format!("giant epsilon {} not in [0, 1)", a.giant_epsilon)));
    }
    let mut snapshots: Vec<u64> = a.snapshot_times.iter().map(|t| (t * a.n as f64).round() as u64).collect();
    snapshots.extend(&a.snapshot_rounds);
    let record = state.run(&RunOptions {
        snapshots,
        round_cap: a.round_cap,
        stop_after: a.stop_after,
        giant_epsilon: a.giant_epsilon,
    });
    let records = [record];
    if let Some(dir) = &a.out_dir {
        write_tables(dir, &records)?;
    }
    #[derive(Serialize)]
    struct Cfg<'a> {
        #[serde(flatten)]
        rule: &'a RuleArgs,
        n: u64,
        seed: u64,
        snapshot_times: &'a [f64],
        snapshot_rounds: &'a [u64],
        round_cap: Option<u64>,
        stop_after: Option<u64>,
        giant_epsilon: f64,
    }
    let cfg = Cfg {
        rule: &a.rule,
        n: a.n,
        seed: a.seed,
        snapshot_times: &a.snapshot_times,
        snapshot_rounds: &a.snapshot_rounds,
        round_cap: a.round_cap,
        stop_after: a.stop_after,
        giant_epsilon: a.giant_epsilon,
    };
    #[derive(Serialize)]
    struct Body<'a> {
        record: &'a RunRecord,
    }
    write_json(None, &envelope(&cfg, &rule, None, Body { record: &records[0] }))?;
    Ok(timeout_code(&records))
}

#[derive(Serialize)]
struct ExperimentBody {
    runs: usize,
    timeouts: usize,
    comparison: Option<ComparisonReport>,
    note: Option<String>,
}

pub fn experiment(a: ExperimentArgs) -> CmdResult {
    let settings: Settings = a.resolve()?;
    let requested = settings.rule.resolve()?;
    // The process does not depend on K, so the guard's extension only changes
    // what is tracked and which constants apply.
    let (rule, extended_to, degenerate) = match guarded(requested.clone()) {
        Ok((r, k)) => (r, k, false),
        Err(CliError::Degenerate(_)) => (requested, None, true),
        Err(e) => return Err(e),
    };
    let mut cfg = ExperimentConfig::new(rule.clone(), settings.n, settings.runs, settings.seed);
    cfg.snapshot_times = settings.snapshot_times.clone();
    cfg.snapshot_rounds = settings.snapshot_rounds.clone();
    cfg.giant_epsilon = settings.giant_epsilon;
    cfg.round_cap = settings.round_cap;
    let records = run_experiment(&cfg, settings.workers)?;
    if let Some(dir) = &settings.out_dir {
        write_tables(dir, &records)?;
    }
    let timeouts = records.iter().filter(|r| r.status == RunStatus::TimedOut).count();

    let (comparison, note) = if degenerate {
        (None, Some("degenerate rule: no limit law to compare against".to_string()))
    } else {
        let consts = constants_for(&rule, settings.dt, 80.0)?;
        let traj = match settings.snapshot_times.iter().copied().reduce(f64::max) {
            Some(t_max) => Some(integrate(&system_for(&rule)?, t_max, settings.dt)?),
            None => None,
        };
        let report = ComparisonReport::build(
            &records,
            &consts,
            traj.as_ref().map(|t| (t, settings.snapshot_times.as_slice())),
        )?;
        (Some(report), None)
    };
    let body = ExperimentBody {
        runs: records.len(),
        timeouts,
        comparison,
        note,
    };
    let report_path: Option<PathBuf> = settings.out_dir.as_ref().map(|d| d.join("report.json"));
    write_json(report_path.as_deref(), &envelope(&settings, &rule, extended_to, body))?;
    if degenerate {
        eprintln!("{}", CliError::Degenerate(rule.name().to_string()));
        return Ok(ExitCode::from(3));
    }
    Ok(timeout_code(&records))
}

fn against_rule(arg: &str, ell: usize) -> Result<RuleSpec, CliError> {
    if arg.ends_with(".json") {
        let text = fs::read_to_string(arg).map_err(|e| CliError::Config(format!("reading {arg}: {e}")))?;
        return Ok(RuleDocument::from_json(&text)?.into_rule()?);
    }
    let b: Builtin = arg.parse()?;
    let ell = if b.is_parametric() { Some(ell) } else { None };
    Ok(b.build(None, ell)?)
}

pub fn compare(a: CompareArgs) -> CmdResult {
    let lex = lexicographic(a.lex_k.unwrap_or(a.ell as u32 / 2), a.ell)?;
    let other = against_rule(&a.against, a.ell)?;
    if a.runs == 0 {
        return Err(CliError::Config("runs must be at least 1".into()));
    }
    if a.checkpoints.iter().any(|c| !(*c > 0.0)) {
        return Err(CliError::Config("checkpoints must be positive".into()));
    }
    let rounds: Vec<u64> = a.checkpoints.iter().map(|c| (c * a.n as f64).round() as u64).collect();
    let report: DominationReport = domination_check(&lex, &other, a.n, &rounds, a.runs, a.seed, a.workers)?;
    #[derive(Serialize)]
    struct Cfg<'a> {
        ell: usize,
        lex_k: u32,
        against: &'a str,
        n: u64,
        runs: usize,
        seed: u64,
        checkpoints: &'a [f64],
        workers: Option<usize>,
    }
    let cfg = Cfg {
        ell: a.ell,
        lex_k: lex.k(),
        against: &a.against,
        n: a.n,
        runs: a.runs,
        seed: a.seed,
        checkpoints: &a.checkpoints,
        workers: a.workers,
    };
    #[derive(Serialize)]
    struct Body<'a> {
        holds: bool,
        domination: &'a DominationReport,
    }
    let body = Body {
        holds: report.holds(),
        domination: &report,
    };
    write_json(a.out.as_deref(), &envelope(&cfg, &lex, None, body))?;
    Ok(ExitCode::SUCCESS)
}
