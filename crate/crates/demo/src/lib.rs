//! Browser bindings. Each export returns a JSON string; the plain Rust
//! functions underneath are what the tests exercise.

use cupgame::emptiers::GreedyEmptier;
use cupgame::fillers::{MainFiller, MainFillerPlan, RandomFiller, WarmupFiller};
use cupgame::stonegame::{bound_b_of_t, enumerate_valid_moves, phi, psi};
use cupgame::{
    apply_stone_move, play_round, CupState, FillerStrategy, GameVariant, Rational, StoneMove,
    StoneState,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_N: usize = 4096;
const MAX_ROUNDS: usize = 2_000_000;

fn err(msg: impl std::fmt::Display) -> String {
    msg.to_string()
}

fn filler_for(name: &str, n: usize, k: usize, seed: u64) -> Result<(Box<dyn FillerStrategy>, GameVariant), String> {
    Ok(match name {
        "warmup" => (Box::new(WarmupFiller::new()), GameVariant::standard()),
        "random" => (Box::new(RandomFiller::new(n, seed, Rational::half()).map_err(err)?), GameVariant::negative_fill()),
        "main" => (Box::new(MainFiller::new(n, k, Rational::one()).map_err(err)?), GameVariant::negative_fill()),
        other => return Err(format!("unknown filler '{other}'")),
    })
}

/// Plays `filler` against greedy and reports the backlog after every round
/// (thinned to about `points` samples) plus the final fills.
pub fn simulate_json(filler: &str, n: usize, rounds: usize, k: usize, seed: u64, points: usize) -> Result<Value, String> {
    if n == 0 || n > MAX_N || rounds > MAX_ROUNDS {
        return Err(format!("need 1 <= n <= {MAX_N} and rounds <= {MAX_ROUNDS}"));
    }
    let (mut f, variant) = filler_for(filler, n, k, seed)?;
    let mut g = GreedyEmptier::default();
    let mut state = CupState::zeros(n, variant).map_err(err)?;
    let mut backlogs = Vec::new();
    let mut max = Rational::zero();
    let mut played = 0;
    for t in 1..=rounds {
        if f.is_done() {
            break;
        }
        state = play_round(&state, f.as_mut(), &mut g).map_err(err)?.0;
        let b = state.backlog();
        if b > max {
            max = b.clone();
        }
        backlogs.push(b.to_f64());
        played = t;
    }
    let every = backlogs.len().div_ceil(points.max(1)).max(1);
    let series: Vec<Value> = backlogs
        .iter()
        .enumerate()
        .filter(|&(i, _)| (i + 1) % every == 0 || i + 1 == backlogs.len())
        .map(|(i, b)| json!([i + 1, b]))
        .collect();
    Ok(json!({
        "filler": f.name(),
        "rounds": played,
        "max_backlog": max.to_ratio_string(),
        "final_backlog": state.backlog().to_ratio_string(),
        "series": series,
        "fills": state.fills().iter().map(Rational::to_f64).collect::<Vec<_>>(),
        "report": f.report(),
    }))
}

/// For each feasible `k`, the rounds the lower-bound filler needed and the
/// backlog it reached, next to `b(t)` at that many rounds.
pub fn tradeoff_json(n: usize) -> Result<Value, String> {
    if !(4..=1024).contains(&n) {
        return Err("need 4 <= n <= 1024".into());
    }
    let mut rows = Vec::new();
    let mut k = 1;
    while k <= n {
        if let Ok(plan) = MainFillerPlan::new(n, k, Rational::one()) {
            let mut f = MainFiller::from_plan(plan);
            let mut g = GreedyEmptier::default();
            let mut state = CupState::zeros(n, GameVariant::negative_fill()).map_err(err)?;
            let mut max = Rational::zero();
            while !f.is_done() {
                state = play_round(&state, &mut f, &mut g).map_err(err)?.0;
                max = max.max(state.backlog());
            }
            let t = f.rounds_used().max(1);
            rows.push(json!({
                "k": k,
                "rounds": t,
                "backlog": max.to_f64(),
                "bound": bound_b_of_t(n, t as f64).map_err(err)?.to_f64(),
            }));
        }
        k *= 2;
    }
    Ok(json!({ "n": n, "rows": rows }))
}

/// An interactive stone game, optionally with checkpoints.
#[wasm_bindgen]
pub struct StoneGame {
    state: StoneState,
    moves: usize,
}

impl StoneGame {
    pub fn create(n: usize, checkpoint: i64) -> Result<StoneGame, String> {
        if n == 0 || n > 256 {
            return Err("need 1 <= n <= 256".into());
        }
        let l = (checkpoint > 0).then_some(checkpoint);
        Ok(StoneGame { state: StoneState::zeros(n, l).map_err(err)?, moves: 0 })
    }

    pub fn play(&mut self, k: i64, q: usize) -> Result<(), String> {
        self.state = apply_stone_move(&self.state, StoneMove::new(k, q)).map_err(err)?;
        self.moves += 1;
        Ok(())
    }

    pub fn snapshot(&self) -> Value {
        json!({
            "positions": self.state.positions(),
            "moves": self.moves,
            "phi": phi(&self.state).to_string(),
            "psi": psi(&self.state).to_string(),
            "valid": enumerate_valid_moves(&self.state),
        })
    }
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate(filler: &str, n: usize, rounds: usize, k: usize, seed: u64) -> Result<String, JsError> {
    to_js(simulate_json(filler, n, rounds, k, seed, 400))
}

#[wasm_bindgen]
pub fn tradeoff(n: usize) -> Result<String, JsError> {
    to_js(tradeoff_json(n))
}

#[wasm_bindgen]
impl StoneGame {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, checkpoint: i64) -> Result<StoneGame, JsError> {
        Self::create(n, checkpoint).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = "move")]
    pub fn play_js(&mut self, k: i64, q: usize) -> Result<(), JsError> {
        self.play(k, q).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = "state")]
    pub fn state_js(&self) -> String {
        self.snapshot().to_string()
    }
}
