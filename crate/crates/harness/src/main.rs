use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cupgame::emptiers::{Oracle, OracleConfig, OracleEmptier};
use cupgame::CupState;
use cupgame_harness::config::{parse_rational, ExperimentConfig, SEED_ENV};
use cupgame_harness::csvout::{backlog_csv, write_atomic};
use cupgame_harness::curve::{log_spaced, run_curve};
use cupgame_harness::run::run_experiment;
use cupgame_harness::suites::{run_suite, SuiteOptions, SUITES};
use cupgame_harness::sweep::run_sweep;
use serde_json::json;

#[derive(Parser)]
#[command(name = "cupgame", version, about = "Variable-processor cup game experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one game from a config file and print a JSON summary.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `output.trace_json`.
        #[arg(long)]
        trace_json: Option<PathBuf>,
        /// Overrides `output.backlog_csv`.
        #[arg(long)]
        backlog_csv: Option<PathBuf>,
    },
    /// Run the cross product of the config's `[sweep]` ranges.
    Sweep {
        config: PathBuf,
        /// Overrides `output.sweep_csv`; stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite (or `all`) and print a JSON report.
    Verify {
        suite: String,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        length: Option<usize>,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        /// Debug builds only.
        #[arg(long)]
        inject_failure: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measured backlog against b(t) for t = 2^lo ..= 2^hi.
    Curve {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        lo: u32,
        #[arg(long, default_value_t = 20)]
        hi: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact game value from a start state on a discretized move grid.
    Oracle {
        /// Comma-separated fills, e.g. `1,1/2,0`.
        #[arg(long)]
        fills: String,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value = "1/2")]
        grid: String,
        #[arg(long, default_value = "standard")]
        variant: String,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, value_enum, default_value_t = EmptierChoice::Both)]
        emptier: EmptierChoice,
        #[arg(long, default_value_t = 5_000_000)]
        max_nodes: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EmptierChoice {
    Free,
    Greedy,
    Both,
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    emit(None, format!("{}\n", serde_json::to_string_pretty(v)?).as_bytes())
}

fn load(path: &PathBuf) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path)?.with_env_overrides()
}

fn simulate(
    config: &PathBuf,
    seed: Option<u64>,
    trace_json: Option<PathBuf>,
    backlog: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = run_experiment(&cfg, cfg.seed)?;
    if let Some(p) = trace_json.or(cfg.output.trace_json.clone()) {
        write_atomic(&p, serde_json::to_string_pretty(&out.trace.to_json())?.as_bytes())?;
    }
    if let Some(p) = backlog.or(cfg.output.backlog_csv.clone()) {
        write_atomic(&p, &backlog_csv(&out.trace)?)?;
    }
    print_json(&out.summary(&cfg))?;
    Ok(())
}

fn sweep(config: &PathBuf, out: Option<PathBuf>) -> Result<()> {
    let cfg = load(config)?;
    let res = run_sweep(&cfg)?;
    let failed = res.rows.iter().filter(|r| r.status != "ok").count();
    emit(out.or(cfg.output.sweep_csv.clone()).as_ref(), &res.to_csv()?)?;
    eprintln!("{} runs, {failed} failed", res.rows.len());
    Ok(())
}

fn verify(suite: &str, opts: &SuiteOptions, out: Option<PathBuf>) -> Result<bool> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut reports = Vec::new();
    for name in names {
        let r = run_suite(name, opts)?;
        eprintln!(
            "{}: {} ({} checks, {} violations, {:.1}s)",
            r.suite,
            if r.passed { "pass" } else { "FAIL" },
            r.checks,
            r.violations,
            r.elapsed_s
        );
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    let body = json!({ "passed": passed, "suites": reports });
    emit(out.as_ref(), format!("{}\n", serde_json::to_string_pretty(&body)?).as_bytes())?;
    Ok(passed)
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    fills: &str,
    t: usize,
    grid: &str,
    variant: &str,
    epsilon: Option<String>,
    emptier: EmptierChoice,
    max_nodes: usize,
) -> Result<()> {
    let cfg_text = format!(
        "variant = {variant:?}\nn = 1\nrounds = 1\n{}[filler]\nname = \"hold\"\n",
        epsilon.map(|e| format!("epsilon = {e:?}\n")).unwrap_or_default()
    );
    let variant = ExperimentConfig::from_toml_str(&cfg_text)?.game_variant()?;
    let fills = fills
        .split(',')
        .map(parse_rational)
        .collect::<Result<Vec<_>>>()
        .context("parsing --fills")?;
    let state = CupState::new(fills, variant)?;
    let cfg = OracleConfig::new(parse_rational(grid)?, t, max_nodes)?;
    let modes: &[(&str, OracleEmptier)] = match emptier {
        EmptierChoice::Free => &[("free", OracleEmptier::Free)],
        EmptierChoice::Greedy => &[("greedy", OracleEmptier::Greedy)],
        EmptierChoice::Both => &[("free", OracleEmptier::Free), ("greedy", OracleEmptier::Greedy)],
    };
    let mut out = serde_json::Map::new();
    out.insert("state".into(), json!(state.fills().iter().map(|v| v.to_ratio_string()).collect::<Vec<_>>()));
    out.insert("t".into(), json!(t));
    for (name, mode) in modes {
        let mut o = Oracle::new(cfg.clone(), *mode)?;
        let best = o.best_move(&state, t)?;
        let value = match &best {
            Some((_, v)) => v.clone(),
            None => o.value(&state, 0)?,
        };
        out.insert(
            (*name).into(),
            json!({
                "value": value.to_ratio_string(),
                "value_float": value.to_f64(),
                "first_move": best.map(|(mv, _)| json!({
                    "p": mv.p(),
                    "additions": mv.additions().iter().map(|a| a.to_ratio_string()).collect::<Vec<_>>(),
                })),
                "nodes": o.nodes(),
            }),
        );
    }
    if let (Some(f), Some(g)) = (out.get("free"), out.get("greedy")) {
        let same = f["value"] == g["value"];
        out.insert("greedy_optimal".into(), json!(same));
    }
    print_json(&out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Simulate { config, seed, trace_json, backlog_csv } => {
            simulate(&config, seed, trace_json, backlog_csv)?
        }
        Cmd::Sweep { config, out } => sweep(&config, out)?,
        Cmd::Verify { suite, iterations, length, seed, inject_failure, out } => {
            let opts = SuiteOptions { iterations, length, seed, inject_failure };
            return verify(&suite, &opts, out);
        }
        Cmd::Curve { n, lo, hi, out } => {
            let curve = run_curve(n, &log_spaced(lo, hi)?)?;
            emit(out.as_ref(), &curve.to_csv()?)?;
        }
        Cmd::Oracle { fills, t, grid, variant, epsilon, emptier, max_nodes } => {
            if t > 6 {
                bail!("horizon {t} is too deep for exhaustive search (max 6)");
            }
            oracle(&fills, t, &grid, &variant, epsilon, emptier, max_nodes)?
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
