//! Cross-product sweeps, run in parallel, written as one CSV.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{build_id, ExperimentConfig, StrategySpec};
use crate::csvout::{rational_cells, SWEEP_SCHEMA};
use crate::registry::main_plan;
use crate::run::run_experiment;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub run: usize,
    pub n: usize,
    pub k: Option<usize>,
    pub rounds_cap: usize,
    pub seed: u64,
    pub filler: String,
    pub emptier: String,
    pub rounds_used: Option<usize>,
    pub final_backlog: Option<String>,
    pub final_backlog_float: Option<f64>,
    pub max_backlog: Option<String>,
    pub max_backlog_float: Option<f64>,
    pub plan_backlog: Option<String>,
    pub plan_rounds: Option<usize>,
    pub wall_time_s: f64,
    pub status: String,
    pub error: String,
}

pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub config_hash: String,
}

/// Sets `k` on the first `main` filler found, looking through wrappers.
fn set_k(spec: &mut StrategySpec, k: usize) -> bool {
    if spec.name == "main" {
        if !spec.params.is_object() {
            spec.params = Value::Object(Default::default());
        }
        spec.params["k"] = k.into();
        return true;
    }
    if let Some(inner) = spec.params.get("inner").cloned() {
        if let Ok(mut inner) = serde_json::from_value::<StrategySpec>(inner) {
            if set_k(&mut inner, k) {
                spec.params["inner"] = serde_json::to_value(inner).unwrap();
                return true;
            }
        }
    }
    false
}

fn find_main(spec: &StrategySpec) -> Option<&Value> {
    if spec.name == "main" {
        return Some(&spec.params);
    }
    None
}

/// Every configuration of the sweep, in a fixed order.
pub fn expand(cfg: &ExperimentConfig) -> Result<Vec<(ExperimentConfig, Option<usize>, u64)>> {
    let s = &cfg.sweep;
    for (name, empty) in [
        ("n", s.n.as_ref().is_some_and(Vec::is_empty)),
        ("k", s.k.as_ref().is_some_and(Vec::is_empty)),
        ("rounds", s.rounds.as_ref().is_some_and(Vec::is_empty)),
        ("seeds", s.seeds.as_ref().is_some_and(Vec::is_empty)),
    ] {
        if empty {
            bail!("sweep range '{name}' is empty");
        }
    }
    let ns = s.n.clone().unwrap_or_else(|| vec![cfg.n]);
    let rounds = s.rounds.clone().unwrap_or_else(|| vec![cfg.rounds]);
    let seeds = s.seeds.clone().unwrap_or_else(|| vec![cfg.seed]);
    let ks: Vec<Option<usize>> = match &s.k {
        None => vec![None],
        Some(v) => v.iter().copied().map(Some).collect(),
    };
    if ns.contains(&0) || rounds.contains(&0) {
        bail!("sweep values of n and rounds must be positive");
    }
    let mut out = Vec::new();
    for &n in &ns {
        for &k in &ks {
            for &t in &rounds {
                for &seed in &seeds {
                    for rep in 0..cfg.repetitions {
                        let mut c = cfg.clone();
                        c.n = n;
                        c.rounds = t;
                        c.sweep = Default::default();
                        if let Some(k) = k {
                            if !set_k(&mut c.filler, k) {
                                bail!("sweep over k needs a 'main' filler");
                            }
                        }
                        out.push((c, k, seed + rep as u64));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn run_one(i: usize, cfg: &ExperimentConfig, k: Option<usize>, seed: u64) -> SweepRow {
    let mut row = SweepRow {
        run: i,
        n: cfg.n,
        k,
        rounds_cap: cfg.rounds,
        seed,
        filler: cfg.filler.name.clone(),
        emptier: cfg.emptier.name.clone(),
        rounds_used: None,
        final_backlog: None,
        final_backlog_float: None,
        max_backlog: None,
        max_backlog_float: None,
        plan_backlog: None,
        plan_rounds: None,
        wall_time_s: 0.0,
        status: "ok".into(),
        error: String::new(),
    };
    if let Some(p) = find_main(&cfg.filler) {
        if let Ok(plan) = main_plan(cfg.n, p) {
            row.plan_backlog = Some(plan.target_backlog().to_ratio_string());
            row.plan_rounds = Some(plan.target_rounds());
        }
    }
    match run_experiment(cfg, seed) {
        Ok(out) => {
            let fin = out.final_backlog();
            let max = out.trace.max_backlog();
            row.filler = out.filler.clone();
            row.emptier = out.emptier.clone();
            row.rounds_used = Some(
                out.filler_report
                    .get("rounds_used")
                    .and_then(Value::as_u64)
                    .map(|v| v as usize)
                    .unwrap_or(out.rounds()),
            );
            row.final_backlog = Some(fin.to_ratio_string());
            row.final_backlog_float = Some(fin.to_f64());
            row.max_backlog = Some(max.to_ratio_string());
            row.max_backlog_float = Some(max.to_f64());
            row.wall_time_s = out.wall_time;
        }
        Err(e) => {
            row.status = "error".into();
            row.error = format!("{e:#}");
        }
    }
    row
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let jobs = expand(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .enumerate()
            .map(|(i, (c, k, seed))| run_one(i, c, *k, *seed))
            .collect::<Vec<_>>()
    });
    Ok(SweepResult { rows, config_hash: cfg.hash() })
}

impl SweepResult {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "schema", "run", "n", "k", "rounds_cap", "seed", "filler", "emptier", "rounds_used",
            "final_backlog", "final_backlog_float", "max_backlog", "max_backlog_float",
            "plan_backlog", "plan_rounds", "status", "error", "config_hash", "build_id",
            "wall_time_s",
        ])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            let fin = r.final_backlog.as_deref().map(|s| s.parse().unwrap());
            let [fb, ff] = fin.as_ref().map(rational_cells).unwrap_or_default();
            w.write_record([
                SWEEP_SCHEMA.to_string(),
                r.run.to_string(),
                r.n.to_string(),
                opt(r.k.map(|k| k.to_string())),
                r.rounds_cap.to_string(),
                r.seed.to_string(),
                r.filler.clone(),
                r.emptier.clone(),
                opt(r.rounds_used.map(|v| v.to_string())),
                fb,
                ff,
                opt(r.max_backlog.clone()),
                opt(r.max_backlog_float.map(|v| v.to_string())),
                opt(r.plan_backlog.clone()),
                opt(r.plan_rounds.map(|v| v.to_string())),
                r.status.clone(),
                r.error.clone(),
                self.config_hash.clone(),
                build_id(),
                format!("{:.6}", r.wall_time_s),
            ])?;
        }
        Ok(w.into_inner()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(&format!(
            r#"
            n = 256
            rounds = 100000
            stop_when_done = true
            [filler]
            name = "main"
            params = {{ k = 8 }}
            {extra}
            "#
        ))
        .unwrap()
    }

    #[test]
    fn rounds_grow_with_k_and_rerun_matches() {
        let c = cfg("[sweep]\nk = [8, 16]");
        let a = run_sweep(&c).unwrap();
        assert_eq!(a.rows.len(), 2);
        assert!(a.rows.iter().all(|r| r.status == "ok"));
        assert!(a.rows[0].rounds_used <= a.rows[1].rounds_used);
        let b = run_sweep(&c).unwrap();
        let strip = |r: &SweepRow| SweepRow { wall_time_s: 0.0, ..r.clone() };
        assert_eq!(a.rows.iter().map(strip).collect::<Vec<_>>(), b.rows.iter().map(strip).collect::<Vec<_>>());
    }

    #[test]
    fn failures_become_rows() {
        let c = cfg("[sweep]\nk = [8, 1000]");
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.rows[1].status, "error");
        assert!(!r.rows[1].error.is_empty());
    }

    #[test]
    fn empty_range_is_an_error() {
        assert!(run_sweep(&cfg("[sweep]\nk = []")).is_err());
    }
}
