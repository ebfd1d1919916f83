//! Strategy construction by name and JSON parameters.

use anyhow::{bail, Context, Result};
use cupgame::emptiers::{GreedyEmptier, OracleConfig, OracleEmptier, OracleFiller, ProportionalEmptier, TiePolicy};
use cupgame::fillers::{
    ChangeLimited, HoldFiller, MainFiller, MainFillerPlan, RandomFiller, WarmupFiller, WlogFiller,
};
use cupgame::{EmptierStrategy, FillerStrategy, Rational};
use serde_json::Value;

use crate::config::{parse_rational, StrategySpec};

pub const FILLERS: &[&str] =
    &["hold", "warmup", "random", "main", "change-limited", "wlog", "oracle"];
pub const EMPTIERS: &[&str] = &["greedy", "proportional"];

fn get_usize(p: &Value, key: &str) -> Result<Option<usize>> {
    match p.get(key) {
        None => Ok(None),
        Some(v) => Ok(Some(
            v.as_u64().with_context(|| format!("parameter '{key}' must be a nonnegative integer"))?
                as usize,
        )),
    }
}

fn need_usize(p: &Value, key: &str) -> Result<usize> {
    get_usize(p, key)?.with_context(|| format!("missing parameter '{key}'"))
}

/// Accepts `"num/den"` strings or JSON numbers.
fn get_rational(p: &Value, key: &str) -> Result<Option<Rational>> {
    match p.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => parse_rational(s).map(Some),
        Some(Value::Number(x)) if x.is_i64() => Ok(Some(Rational::from_integer(x.as_i64().unwrap()))),
        Some(other) => bail!("parameter '{key}' must be a rational string, got {other}"),
    }
}

fn inner_spec(p: &Value) -> Result<StrategySpec> {
    let inner = p.get("inner").context("missing parameter 'inner'")?;
    serde_json::from_value(inner.clone()).context("parameter 'inner' must be {name, params}")
}

pub fn tie_policy(p: &Value, seed: u64) -> Result<TiePolicy> {
    Ok(match p.get("tie").and_then(Value::as_str).unwrap_or("lowest") {
        "lowest" => TiePolicy::LowestIndex,
        "highest" => TiePolicy::HighestIndex,
        "random" => TiePolicy::Random { seed },
        other => bail!("unknown tie policy '{other}'"),
    })
}

/// The main filler's plan from `k`, `c` (default 1) and `width` (default 1).
pub fn main_plan(n: usize, p: &Value) -> Result<MainFillerPlan> {
    let k = need_usize(p, "k")?;
    let c = get_rational(p, "c")?.unwrap_or_else(Rational::one);
    let width = get_usize(p, "width")?.unwrap_or(1);
    Ok(MainFillerPlan::with_width(n, k, c, width)?)
}

pub fn build_filler(spec: &StrategySpec, n: usize, seed: u64) -> Result<Box<dyn FillerStrategy>> {
    let p = &spec.params;
    Ok(match spec.name.as_str() {
        "hold" => Box::new(HoldFiller),
        "warmup" => Box::new(WarmupFiller::new()),
        "random" => {
            let grid = get_rational(p, "grid")?.unwrap_or_else(Rational::half);
            Box::new(RandomFiller::new(n, seed, grid)?)
        }
        "main" => Box::new(MainFiller::from_plan(main_plan(n, p)?)),
        "change-limited" => {
            let gap = get_usize(p, "gap")?.unwrap_or(n);
            Box::new(ChangeLimited::new(build_filler(&inner_spec(p)?, n, seed)?, gap)?)
        }
        "wlog" => {
            let eps = get_rational(p, "epsilon")?.context("missing parameter 'epsilon'")?;
            Box::new(WlogFiller::new(build_filler(&inner_spec(p)?, n, seed)?, eps)?)
        }
        "oracle" => {
            let grid = get_rational(p, "grid")?.unwrap_or_else(Rational::half);
            let horizon = need_usize(p, "horizon")?;
            let budget = get_usize(p, "max_nodes")?.unwrap_or(1_000_000);
            let mode = match p.get("emptier").and_then(Value::as_str).unwrap_or("greedy") {
                "greedy" => OracleEmptier::Greedy,
                "free" => OracleEmptier::Free,
                other => bail!("unknown oracle emptier '{other}'"),
            };
            Box::new(OracleFiller::new(OracleConfig::new(grid, horizon, budget)?, mode)?)
        }
        other => bail!("unknown filler '{other}' (known: {})", FILLERS.join(", ")),
    })
}

pub fn build_emptier(spec: &StrategySpec, seed: u64) -> Result<Box<dyn EmptierStrategy>> {
    Ok(match spec.name.as_str() {
        "greedy" => Box::new(GreedyEmptier::new(tie_policy(&spec.params, seed)?)),
        "proportional" => Box::new(ProportionalEmptier::new(seed)),
        other => bail!("unknown emptier '{other}' (known: {})", EMPTIERS.join(", ")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn builds_nested_strategies() {
        let spec = StrategySpec::new(
            "wlog",
            json!({"epsilon": "1/4", "inner": {"name": "random", "params": {"grid": "1/4"}}}),
        );
        assert!(build_filler(&spec, 8, 1).unwrap().name().starts_with("wlog(random"));
        let spec = StrategySpec::new("change-limited", json!({"inner": {"name": "main", "params": {"k": 8}}}));
        assert!(build_filler(&spec, 64, 1).is_ok());
    }

    #[test]
    fn reports_unknown_names() {
        let err = build_filler(&StrategySpec::new("nope", json!({})), 4, 0).err().unwrap();
        assert!(err.to_string().contains("unknown filler"));
        assert!(build_emptier(&StrategySpec::new("greedy", json!({"tie": "sideways"})), 0).is_err());
        assert!(build_filler(&StrategySpec::new("main", json!({})), 64, 0).is_err());
    }
}
