use std::fs;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use ring_cdc::allgather::{allgather_lower_bound, allgather_ncl_formula, build_allgather, memory_sharing_envelope};
use ring_cdc::alltoall::{alltoall_formulas, build_alltoall, build_alltoall_appendix_c};
use ring_cdc::baselines::{build_fragouli, build_uncoded, uncode, BaselinePlan};
use ring_cdc::goldens::check_goldens;
use ring_cdc::rational::{parse_ratio, render_float, render_ratio};
use ring_cdc::sim::{closure_oracle, ledger_csv, Problem, Requirement, SimOptions, SimOutcome};
use ring_cdc::sweep::{run_sweep, sweep_csv, PlacementKind, SchemeKind, SweepSpec};
use ring_cdc::{Placement, RingTopology, Schedule, SchemeError};

#[derive(Parser)]
#[command(name = "ring-cdc", version, about = "Simulate coded data exchange on ring networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, simulate and report one scheme as JSON.
    Run(RunArgs),
    /// One CSV row per (n, r, d) triple.
    Sweep(SweepArgs),
    /// Replay the worked examples against their reference tables.
    Goldens,
    /// Shorthand for `run --problem allgather`.
    Allgather(SchemeArgs),
    /// Shorthand for `run --problem alltoall`.
    Alltoall(SchemeArgs),
    /// Print every closed form that applies to a triple.
    Bounds(BoundsArgs),
    /// Run a reference scheme.
    Baseline(BaselineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Allgather,
    Alltoall,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Allgather => Problem::AllGather,
            ProblemArg::Alltoall => Problem::AllToAll,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlacementArg {
    Cyclic,
    AppendixC,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Coded,
    Uncoded,
    Fragouli,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineScheme {
    Fragouli,
    Uncoded,
}

#[derive(Args, Clone)]
struct SchemeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, value_enum, default_value = "cyclic")]
    placement: PlacementArg,
    /// Also certify decodability with the order-free closure oracle.
    #[arg(long)]
    check_oracle: bool,
    /// Write the transmission ledger CSV here.
    #[arg(long, value_name = "PATH")]
    emit_ledger: Option<String>,
    /// Track real payload bytes and check every decode.
    #[arg(long)]
    verify_payloads: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long, value_enum, default_value = "coded")]
    scheme: SchemeArg,
    #[command(flatten)]
    common: SchemeArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// Ring sizes: `50`, `8..20` or `8,12,16`.
    #[arg(long)]
    n: String,
    #[arg(long, default_value_t = 1)]
    r_min: usize,
    /// Defaults to each ring size.
    #[arg(long)]
    r_max: Option<usize>,
    /// Broadcast distances, same syntax as `--n`.
    #[arg(long, default_value = "1")]
    d: String,
    #[arg(long, value_enum, default_value = "cyclic")]
    placement: PlacementArg,
    #[arg(long, value_enum, default_value = "coded")]
    scheme: SchemeArg,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<String>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long)]
    n: usize,
    /// Integer or fractional load, e.g. `3` or `3/2`.
    #[arg(long)]
    r: String,
    #[arg(long)]
    d: usize,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long, value_enum)]
    scheme: BaselineScheme,
    #[arg(long, value_enum, default_value = "allgather")]
    problem: ProblemArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long)]
    check_oracle: bool,
    #[arg(long, value_name = "PATH")]
    emit_ledger: Option<String>,
}

/// Bad parameters map to exit code 2, failed verification to 1.
enum Failure {
    Usage(anyhow::Error),
    Verify(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Verify(e)
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn scheme_failure(e: SchemeError) -> Failure {
    match e {
        SchemeError::Sim(_) | SchemeError::ChainBroken { .. } | SchemeError::RoundCapExceeded { .. } => {
            Failure::Verify(e.into())
        }
        other => Failure::Usage(other.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a.problem.into(), a.scheme, &a.common),
        Command::Allgather(a) => cmd_run(Problem::AllGather, SchemeArg::Coded, &a),
        Command::Alltoall(a) => cmd_run(Problem::AllToAll, SchemeArg::Coded, &a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Goldens => cmd_goldens(),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Baseline(a) => cmd_baseline(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Verify(e)) => {
            eprintln!("verification failed: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn build(problem: Problem, scheme: SchemeArg, a: &SchemeArgs) -> Result<BaselinePlan, Failure> {
    let appendix = a.placement == PlacementArg::AppendixC;
    if appendix && (problem != Problem::AllToAll || a.d != 1) {
        return Err(usage(anyhow::anyhow!(
            "the appendix-c placement is only defined for alltoall with d = 1"
        )));
    }
    let wrap = |topo: RingTopology, placement: Placement, schedule: Schedule| BaselinePlan {
        topo,
        placement,
        problem,
        schedule,
    };
    let plan = match (problem, scheme) {
        (_, SchemeArg::Fragouli) => {
            if problem != Problem::AllGather || a.r != 1 || a.d != 1 {
                return Err(usage(anyhow::anyhow!("fragouli needs allgather with r = 1, d = 1")));
            }
            build_fragouli(a.n).map_err(scheme_failure)?
        }
        (Problem::AllToAll, _) if appendix => {
            let p = build_alltoall_appendix_c(a.n, a.r).map_err(scheme_failure)?;
            let schedule = match scheme {
                SchemeArg::Uncoded => uncode(&p.schedule),
                _ => p.schedule,
            };
            wrap(p.topo, p.placement, schedule)
        }
        (_, SchemeArg::Uncoded) => build_uncoded(problem, a.n, a.r, a.d).map_err(scheme_failure)?,
        (Problem::AllGather, _) => {
            let p = build_allgather(a.n, a.r, a.d).map_err(scheme_failure)?;
            wrap(p.topo, p.placement, p.schedule)
        }
        (Problem::AllToAll, _) => {
            let p = build_alltoall(a.n, a.r, a.d).map_err(scheme_failure)?;
            wrap(p.topo, p.placement, p.schedule)
        }
    };
    Ok(plan)
}

fn execute(plan: &BaselinePlan, check_oracle: bool, verify: bool, emit: Option<&str>) -> Result<SimOutcome, Failure> {
    let opts = if verify {
        SimOptions::verified()
    } else {
        SimOptions::default()
    };
    let out = plan.run_with(opts).map_err(scheme_failure)?;
    if let Some(path) = emit {
        fs::write(path, ledger_csv(&out.ledger))
            .with_context(|| format!("writing ledger to {path}"))
            .map_err(usage)?;
    }
    println!("{}", out.report.to_json());
    if !out.report.complete {
        return Err(Failure::Verify(anyhow::anyhow!(
            "{}",
            out.report.failure.clone().unwrap_or_default()
        )));
    }
    if check_oracle {
        let req = Requirement::new(plan.problem, plan.topo.n());
        let verdict = closure_oracle(&plan.topo, &plan.placement, &out.ledger, &req);
        if !verdict.complete {
            let (node, missing) = verdict.deficits.iter().next().expect("deficit present");
            bail_verify(format!(
                "closure oracle: node {node} lacks {} labels",
                missing.len()
            ))?;
        }
        eprintln!("closure oracle: complete");
    }
    Ok(out)
}

fn bail_verify(msg: String) -> Result<(), Failure> {
    Err(Failure::Verify(anyhow::anyhow!(msg)))
}

fn cmd_run(problem: Problem, scheme: SchemeArg, a: &SchemeArgs) -> Result<(), Failure> {
    let plan = build(problem, scheme, a)?;
    execute(&plan, a.check_oracle, a.verify_payloads, a.emit_ledger.as_deref())?;
    Ok(())
}

fn cmd_baseline(a: &BaselineArgs) -> Result<(), Failure> {
    let scheme = match a.scheme {
        BaselineScheme::Fragouli => SchemeArg::Fragouli,
        BaselineScheme::Uncoded => SchemeArg::Uncoded,
    };
    let common = SchemeArgs {
        n: a.n,
        r: a.r,
        d: a.d,
        placement: PlacementArg::Cyclic,
        check_oracle: a.check_oracle,
        emit_ledger: a.emit_ledger.clone(),
        verify_payloads: false,
    };
    cmd_run(a.problem.into(), scheme, &common)
}

/// `"50"`, `"8..20"` (inclusive) or `"8,12,16"`; an empty string is an empty list.
fn parse_list(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().context("range start")?;
        let b: usize = b.trim().trim_start_matches('=').parse().context("range end")?;
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<usize>().with_context(|| format!("bad number {x:?}")))
        .collect()
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    let scheme = match a.scheme {
        SchemeArg::Coded => SchemeKind::Coded,
        SchemeArg::Uncoded => SchemeKind::Uncoded,
        SchemeArg::Fragouli => return Err(usage(anyhow::anyhow!("sweeps support coded and uncoded schemes"))),
    };
    let spec = SweepSpec {
        problem: a.problem.into(),
        ns: parse_list(&a.n).map_err(usage)?,
        r_min: a.r_min,
        r_max: a.r_max.unwrap_or(usize::MAX),
        ds: parse_list(&a.d).map_err(usage)?,
        placement: match a.placement {
            PlacementArg::Cyclic => PlacementKind::Cyclic,
            PlacementArg::AppendixC => PlacementKind::AppendixC,
        },
        scheme,
    };
    let rows = run_sweep(&spec);
    let csv = sweep_csv(&rows);
    match &a.output {
        Some(path) => fs::write(path, &csv)
            .with_context(|| format!("writing {path}"))
            .map_err(usage)?,
        None => print!("{csv}"),
    }
    if let Some(bad) = rows.iter().find(|r| !r.complete) {
        bail_verify(format!("n={} r={} d={} did not complete", bad.n, bad.r, bad.d))?;
    }
    Ok(())
}

fn cmd_goldens() -> Result<(), Failure> {
    let checks = check_goldens().map_err(scheme_failure)?;
    let mut ok = true;
    for c in &checks {
        if c.matches() {
            println!("{}: identical", c.name);
        } else {
            ok = false;
            println!("{}: differs\n{}", c.name, c.diff());
        }
    }
    if ok {
        Ok(())
    } else {
        bail_verify("golden tables differ".to_string())
    }
}

fn line(name: &str, value: Option<Rational64>) {
    match value {
        Some(v) => println!("{name:<18} {:<12} {}", render_ratio(v), render_float(v)),
        None => println!("{name:<18} n/a"),
    }
}

fn cmd_bounds(a: &BoundsArgs) -> Result<(), Failure> {
    RingTopology::new(a.n, a.d).map_err(usage)?;
    let r_real = parse_ratio(&a.r)
        .ok_or_else(|| anyhow::anyhow!("bad load {:?}", a.r))
        .map_err(usage)?;
    if r_real < Rational64::from_integer(1) || r_real > Rational64::from_integer(a.n as i64) {
        return Err(usage(anyhow::anyhow!("load must lie in 1..={}", a.n)));
    }
    let r_int = r_real.is_integer().then(|| *r_real.numer() as usize);
    match a.problem {
        ProblemArg::Allgather => {
            line("achievable", r_int.map(|r| allgather_ncl_formula(a.n, r, a.d)));
            line(
                "lower_bound",
                Some(match r_int {
                    Some(r) => allgather_lower_bound(a.n, r, a.d),
                    None => (Rational64::from_integer(a.n as i64) - r_real) / Rational64::from_integer(2 * a.d as i64),
                }),
            );
            line("memory_sharing", memory_sharing_envelope(a.n, a.d, r_real));
            line("uncoded", r_int.map(|r| allgather_ncl_formula(a.n, r, a.d) * 2));
        }
        ProblemArg::Alltoall => {
            let Some(r) = r_int else {
                return Err(usage(anyhow::anyhow!("alltoall bounds need an integer load")));
            };
            let f = alltoall_formulas(a.n, r, a.d);
            line("achievable_exact", Some(f.ach_exact));
            line("closed_form", Some(f.closed_form));
            line("lb_cyclic", f.lb_cyclic);
            line("lb_arbitrary_d1", f.lb_arbitrary_d1);
            line("lb_arbitrary", f.lb_arbitrary);
            line("appendix_c", f.appendix_c);
            line("uncoded", Some(f.uncoded));
        }
    }
    Ok(())
}
