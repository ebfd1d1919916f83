//! A single checked game run.

use std::time::Instant;

use anyhow::{bail, Result};
use cupgame::{
    normalize_filler_move, validate_filler_move, CupState, EmptierStrategy, FillerStrategy,
    GameTrace, PostFill, Rational, RecordLevel, RoundRecord, VariantKind,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{build_id, ExperimentConfig};
use crate::registry::{build_emptier, build_filler};

/// How many times each per-round invariant was checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CheckCounts {
    pub sorted: usize,
    pub conservation: usize,
    pub greedy_order: usize,
}

pub struct RunOutcome {
    pub trace: GameTrace,
    pub filler: String,
    pub emptier: String,
    pub filler_report: Value,
    pub checks: CheckCounts,
    pub wall_time: f64,
    pub seed: u64,
}

impl RunOutcome {
    pub fn rounds(&self) -> usize {
        self.trace.rounds_played()
    }

    pub fn final_backlog(&self) -> Rational {
        self.trace.final_state.backlog()
    }

    pub fn summary(&self, cfg: &ExperimentConfig) -> Value {
        let fin = self.final_backlog();
        let max = self.trace.max_backlog();
        json!({
            "filler": self.filler,
            "emptier": self.emptier,
            "variant": cfg.variant,
            "n": cfg.n,
            "seed": self.seed,
            "rounds": self.rounds(),
            "final_backlog": fin.to_ratio_string(),
            "final_backlog_float": fin.to_f64(),
            "max_backlog": max.to_ratio_string(),
            "max_backlog_float": max.to_f64(),
            "filler_report": self.filler_report,
            "checks": self.checks,
            "wall_time_s": self.wall_time,
            "config_hash": cfg.hash(),
            "build_id": build_id(),
        })
    }
}

/// Stop rules for [`play_checked`].
#[derive(Debug, Clone, Default)]
pub struct StopRule {
    pub max_rounds: usize,
    pub target: Option<Rational>,
    pub when_done: bool,
}

/// Plays until a stop rule fires, checking sortedness, conservation of
/// water, and (for greedy emptiers) the greedy selection order every round.
pub fn play_checked(
    initial: CupState,
    filler: &mut dyn FillerStrategy,
    emptier: &mut dyn EmptierStrategy,
    stop: &StopRule,
    record: RecordLevel,
    check_greedy: bool,
) -> Result<(GameTrace, CheckCounts)> {
    let mut checks = CheckCounts::default();
    let mut trace = GameTrace {
        initial_state: initial.clone(),
        rounds: Vec::new(),
        seed: None,
        record_level: record,
        backlogs: Vec::new(),
        final_state: initial.clone(),
    };
    let mut state = initial;
    let unit = state.variant().unit();
    for round in 1..=stop.max_rounds {
        if stop.when_done && filler.is_done() {
            break;
        }
        if stop.target.as_ref().is_some_and(|t| state.backlog() >= *t) {
            break;
        }
        let mv = filler.next_move(&state)?;
        validate_filler_move(&state, &mv)?;
        let mv = normalize_filler_move(&state, &mv);
        let post = PostFill::build(&state, &mv);
        let em = emptier.choose(&post, &mv)?;
        let next = post.empty(&em)?;
        let post_state = post.to_state();

        if !next.fills().windows(2).all(|w| w[0] >= w[1]) {
            bail!("round {round}: state not sorted");
        }
        checks.sorted += 1;
        let removed: Rational = em
            .indices()
            .iter()
            .map(|&i| {
                let v = post_state.fill(i).clone();
                if state.variant().kind == VariantKind::NegativeFill {
                    unit.clone()
                } else {
                    v.min(unit.clone()).max(Rational::zero())
                }
            })
            .sum();
        if next.total() != state.total() + Rational::from(mv.p()) - removed {
            bail!("round {round}: water not conserved");
        }
        checks.conservation += 1;
        if check_greedy {
            let min_sel = em.indices().iter().map(|&i| post_state.fill(i).clone()).min();
            let max_unsel = (0..next.n())
                .filter(|&i| !em.contains(i))
                .map(|i| post_state.fill(i).clone())
                .max();
            if let (Some(a), Some(b)) = (min_sel, max_unsel) {
                if a < b {
                    bail!("round {round}: greedy skipped a fuller cup");
                }
            }
            checks.greedy_order += 1;
        }

        trace.backlogs.push(next.backlog());
        if record == RecordLevel::Full {
            trace.rounds.push(RoundRecord {
                round_index: round,
                filler_move: mv,
                emptier_move: em,
                state_after: next.clone(),
            });
        }
        state = next;
    }
    trace.final_state = state;
    Ok((trace, checks))
}

pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<RunOutcome> {
    let variant = cfg.game_variant()?;
    let mut filler = build_filler(&cfg.filler, cfg.n, seed)?;
    let mut emptier = build_emptier(&cfg.emptier, seed)?;
    let stop = StopRule { max_rounds: cfg.rounds, target: cfg.target()?, when_done: cfg.stop_when_done };
    let start = Instant::now();
    let (trace, checks) = play_checked(
        CupState::zeros(cfg.n, variant)?,
        filler.as_mut(),
        emptier.as_mut(),
        &stop,
        cfg.record_level,
        cfg.emptier.name == "greedy",
    )?;
    Ok(RunOutcome {
        trace: trace.with_seed(seed),
        filler: filler.name(),
        emptier: emptier.name(),
        filler_report: filler.report(),
        checks,
        wall_time: start.elapsed().as_secs_f64(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warmup_run_hits_target() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            variant = "standard"
            n = 8
            rounds = 512
            target_backlog = "7/2"
            [filler]
            name = "warmup"
            "#,
        )
        .unwrap();
        let out = run_experiment(&cfg, 0).unwrap();
        assert!(out.final_backlog() >= cupgame::rat(7, 2));
        assert!(out.rounds() <= 512);
        assert_eq!(out.checks.greedy_order, out.rounds());
        out.trace.replay_check().unwrap();
    }
}
