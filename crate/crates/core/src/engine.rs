//! Round composition, whole-game driver, and trace export.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{GameError, Result};
use crate::game::{
    normalize_filler_move, validate_filler_move, CupState, EmptierMove, FillerMove, GameVariant,
    PostFill,
};
use crate::rational::Rational;

/// A filler that observes the full sorted state each round.
pub trait FillerStrategy: Send {
    fn name(&self) -> String;

    fn next_move(&mut self, state: &CupState) -> Result<FillerMove>;

    /// Set once the strategy has reached its goal and only holds the state.
    fn is_done(&self) -> bool {
        false
    }

    /// Strategy-specific counters for summaries.
    fn report(&self) -> Value {
        Value::Null
    }
}

/// An emptier choosing `p` cups of the (normalized) post-fill state.
pub trait EmptierStrategy: Send {
    fn name(&self) -> String;

    fn choose(&mut self, post: &PostFill, mv: &FillerMove) -> Result<EmptierMove>;
}

impl<F: FillerStrategy + ?Sized> FillerStrategy for Box<F> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn next_move(&mut self, state: &CupState) -> Result<FillerMove> {
        (**self).next_move(state)
    }
    fn is_done(&self) -> bool {
        (**self).is_done()
    }
    fn report(&self) -> Value {
        (**self).report()
    }
}

impl<E: EmptierStrategy + ?Sized> EmptierStrategy for Box<E> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn choose(&mut self, post: &PostFill, mv: &FillerMove) -> Result<EmptierMove> {
        (**self).choose(post, mv)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round_index: usize,
    pub filler_move: FillerMove,
    pub emptier_move: EmptierMove,
    pub state_after: CupState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordLevel {
    #[default]
    Full,
    BacklogOnly,
}

/// Applies one already-chosen filler move and lets the emptier respond.
pub fn play_moves(
    state: &CupState,
    mv: &FillerMove,
    emptier: &mut dyn EmptierStrategy,
) -> Result<(FillerMove, EmptierMove, CupState)> {
    validate_filler_move(state, mv)?;
    let mv = normalize_filler_move(state, mv);
    let post = PostFill::build(state, &mv);
    let em = emptier.choose(&post, &mv)?;
    let next = post.empty(&em)?;
    Ok((mv, em, next))
}

/// One round: filler move, automatic normalization, emptier move.
pub fn play_round(
    state: &CupState,
    filler: &mut dyn FillerStrategy,
    emptier: &mut dyn EmptierStrategy,
) -> Result<(CupState, RoundRecord)> {
    let mv = filler.next_move(state)?;
    let (mv, em, next) = play_moves(state, &mv, emptier)?;
    let rec = RoundRecord {
        round_index: 0,
        filler_move: mv,
        emptier_move: em,
        state_after: next.clone(),
    };
    Ok((next, rec))
}

/// A game in progress, advanced one round at a time.
pub struct Game<'a> {
    state: CupState,
    filler: &'a mut dyn FillerStrategy,
    emptier: &'a mut dyn EmptierStrategy,
    rounds: usize,
}

/// What a single step produced.
#[derive(Debug, Clone)]
pub struct Step {
    pub filler_move: FillerMove,
    pub emptier_move: EmptierMove,
}

impl<'a> Game<'a> {
    pub fn new(
        initial: CupState,
        filler: &'a mut dyn FillerStrategy,
        emptier: &'a mut dyn EmptierStrategy,
    ) -> Self {
        Game { state: initial, filler, emptier, rounds: 0 }
    }

    pub fn state(&self) -> &CupState {
        &self.state
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn filler(&self) -> &dyn FillerStrategy {
        self.filler
    }

    pub fn step(&mut self) -> Result<Step> {
        let mv = self.filler.next_move(&self.state)?;
        let (mv, em, next) = play_moves(&self.state, &mv, self.emptier)?;
        self.state = next;
        self.rounds += 1;
        Ok(Step { filler_move: mv, emptier_move: em })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameTrace {
    pub initial_state: CupState,
    pub rounds: Vec<RoundRecord>,
    pub seed: Option<u64>,
    pub record_level: RecordLevel,
    /// Backlog after every round, kept at every record level.
    pub backlogs: Vec<Rational>,
    pub final_state: CupState,
}

/// Plays `t` rounds.
pub fn run_game(
    initial: CupState,
    filler: &mut dyn FillerStrategy,
    emptier: &mut dyn EmptierStrategy,
    t: usize,
    record_level: RecordLevel,
) -> Result<GameTrace> {
    let mut trace = GameTrace {
        initial_state: initial.clone(),
        rounds: Vec::new(),
        seed: None,
        record_level,
        backlogs: Vec::with_capacity(t),
        final_state: initial.clone(),
    };
    let mut game = Game::new(initial, filler, emptier);
    for i in 0..t {
        let step = game.step()?;
        trace.backlogs.push(game.state().backlog());
        if record_level == RecordLevel::Full {
            trace.rounds.push(RoundRecord {
                round_index: i + 1,
                filler_move: step.filler_move,
                emptier_move: step.emptier_move,
                state_after: game.state().clone(),
            });
        }
    }
    trace.final_state = game.state().clone();
    Ok(trace)
}

impl GameTrace {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn rounds_played(&self) -> usize {
        self.backlogs.len()
    }

    pub fn max_backlog(&self) -> Rational {
        self.backlogs
            .iter()
            .cloned()
            .fold(self.initial_state.backlog(), Rational::max)
    }

    /// Re-applies every recorded move from the initial state and checks each
    /// recorded state. Only meaningful for full traces.
    pub fn replay_check(&self) -> Result<()> {
        let mut state = self.initial_state.clone();
        for rec in &self.rounds {
            validate_filler_move(&state, &rec.filler_move)?;
            let mv = normalize_filler_move(&state, &rec.filler_move);
            let next = PostFill::build(&state, &mv).empty(&rec.emptier_move)?;
            if next != rec.state_after {
                return Err(GameError::Defect(format!(
                    "replay diverged at round {}",
                    rec.round_index
                )));
            }
            state = next;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let strs = |v: Vec<Rational>| -> Vec<String> {
            v.iter().map(Rational::to_ratio_string).collect()
        };
        let rounds: Vec<Value> = if self.record_level == RecordLevel::Full {
            self.rounds
                .iter()
                .map(|r| {
                    json!({
                        "p": r.filler_move.p(),
                        "additions": strs(r.filler_move.additions()),
                        "emptied_indices": r.emptier_move.indices(),
                        "backlog": r.state_after.backlog().to_ratio_string(),
                    })
                })
                .collect()
        } else {
            Vec::new()
        };
        json!({
            "variant": self.initial_state.variant(),
            "initial": strs(self.initial_state.fills()),
            "seed": self.seed,
            "record_level": self.record_level,
            "rounds": rounds,
            "final": strs(self.final_state.fills()),
        })
    }

    /// Rebuilds a full trace from its JSON form by replaying the moves.
    pub fn from_json(v: &Value) -> Result<GameTrace> {
        let bad = |m: &str| GameError::InvalidState(format!("trace json: {m}"));
        let variant: GameVariant = serde_json::from_value(v["variant"].clone())
            .map_err(|e| bad(&e.to_string()))?;
        let parse_list = |x: &Value| -> Result<Vec<Rational>> {
            x.as_array()
                .ok_or_else(|| bad("expected array"))?
                .iter()
                .map(|s| {
                    s.as_str()
                        .ok_or_else(|| bad("expected string"))?
                        .parse::<Rational>()
                        .map_err(|e| bad(&e.to_string()))
                })
                .collect()
        };
        let initial = CupState::new(parse_list(&v["initial"])?, variant)?;
        let mut state = initial.clone();
        let mut rounds = Vec::new();
        let mut backlogs = Vec::new();
        for (i, r) in v["rounds"].as_array().ok_or_else(|| bad("rounds"))?.iter().enumerate() {
            let p = r["p"].as_u64().ok_or_else(|| bad("p"))? as usize;
            let mv = FillerMove::new(p, parse_list(&r["additions"])?);
            let idx: Vec<usize> = serde_json::from_value(r["emptied_indices"].clone())
                .map_err(|e| bad(&e.to_string()))?;
            let em = EmptierMove::from_indices(idx)?;
            validate_filler_move(&state, &mv)?;
            let mv = normalize_filler_move(&state, &mv);
            state = PostFill::build(&state, &mv).empty(&em)?;
            backlogs.push(state.backlog());
            rounds.push(RoundRecord {
                round_index: i + 1,
                filler_move: mv,
                emptier_move: em,
                state_after: state.clone(),
            });
        }
        Ok(GameTrace {
            initial_state: initial,
            rounds,
            seed: v["seed"].as_u64(),
            record_level: RecordLevel::Full,
            backlogs,
            final_state: state,
        })
    }

    /// Backlog series as CSV with columns `round,backlog_num,backlog_den`.
    pub fn backlog_csv(&self) -> String {
        let mut out = String::from("round,backlog_num,backlog_den\n");
        for (i, b) in self.backlogs.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, b.numer(), b.denom()));
        }
        out
    }
}
