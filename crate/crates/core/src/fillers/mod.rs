//! Filler strategies.

mod lower;

pub use lower::{
    flat_split_move, force_upward, AdvancedPhase, Branch, MainFiller, MainFillerPlan, PhaseStep,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::emptiers::wlog_transform;
use crate::engine::FillerStrategy;
use crate::error::{GameError, Result};
use crate::game::{CupState, FillerMove, VariantKind};
use crate::rational::Rational;

/// `p = n` with one unit in every cup; a no-op against greedy.
pub fn hold_state_move(n: usize) -> FillerMove {
    FillerMove::hold(n)
}

pub struct HoldFiller;

impl FillerStrategy for HoldFiller {
    fn name(&self) -> String {
        "hold".into()
    }

    fn next_move(&mut self, state: &CupState) -> Result<FillerMove> {
        Ok(FillerMove::hold(state.n()))
    }

    fn is_done(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WarmupStep {
    Move(FillerMove),
    /// Fills are strictly decreasing half-integers, so the backlog is at least `(n-1)/2`.
    Done { backlog: Rational },
}

/// The standard-game warmup rule: split the first tied pair of cups.
pub fn warmup_move(state: &CupState) -> Result<WarmupStep> {
    if state.variant().kind != VariantKind::Standard {
        return Err(GameError::Precondition("warmup filler plays the standard game".into()));
    }
    if !state.is_half_integral() {
        return Err(GameError::Precondition("warmup needs half-integer fills".into()));
    }
    let mut start = 0;
    for (_, c) in state.runs() {
        if *c >= 2 {
            return Ok(WarmupStep::Move(FillerMove::prefix(state.n(), start, 2)));
        }
        start += c;
    }
    Ok(WarmupStep::Done { backlog: state.backlog() })
}

#[derive(Default)]
pub struct WarmupFiller {
    done: bool,
    rounds: usize,
}

impl WarmupFiller {
    pub fn new() -> Self {
        WarmupFiller::default()
    }
}

impl FillerStrategy for WarmupFiller {
    fn name(&self) -> String {
        "warmup".into()
    }

    fn next_move(&mut self, state: &CupState) -> Result<FillerMove> {
        if !self.done {
            match warmup_move(state)? {
                WarmupStep::Move(mv) => {
                    self.rounds += 1;
                    return Ok(mv);
                }
                WarmupStep::Done { .. } => self.done = true,
            }
        }
        Ok(FillerMove::hold(state.n()))
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn report(&self) -> Value {
        json!({ "active_rounds": self.rounds, "done": self.done })
    }
}

/// Uniform `p` and a random grid-quantized addition vector each round.
pub struct RandomFiller {
    n: usize,
    quanta: usize,
    grid: Rational,
    rng: ChaCha8Rng,
    seed: u64,
}

impl RandomFiller {
    pub fn new(n: usize, seed: u64, grid: Rational) -> Result<Self> {
        if !grid.is_positive() || grid > Rational::one() {
            return Err(GameError::Precondition(format!("grid {grid} outside (0, 1]")));
        }
        let quanta = (Rational::one() / &grid)
            .to_i64()
            .ok_or_else(|| GameError::Precondition(format!("grid {grid} must be 1/integer")))?
            as usize;
        Ok(RandomFiller { n, quanta, grid, rng: ChaCha8Rng::seed_from_u64(seed), seed })
    }
}

impl FillerStrategy for RandomFiller {
    fn name(&self) -> String {
        format!("random-{}", self.seed)
    }

    fn next_move(&mut self, state: &CupState) -> Result<FillerMove> {
        if state.n() != self.n {
            return Err(GameError::Precondition("random filler built for another n".into()));
        }
        let p = self.rng.gen_range(1..=self.n);
        let mut q = vec![0usize; self.n];
        if p == self.n {
            q.fill(self.quanta);
        } else {
            let mut left = p * self.quanta;
            while left > 0 {
                let i = self.rng.gen_range(0..self.n);
                if q[i] < self.quanta {
                    q[i] += 1;
                    left -= 1;
                }
            }
        }
        let adds = q.into_iter().map(|c| &self.grid * Rational::from(c)).collect();
        Ok(FillerMove::new(p, adds))
    }
}

/// Applies the resource-augmentation rewrite to an inner filler's moves.
pub struct WlogFiller<F> {
    inner: F,
    epsilon: Rational,
}

impl<F: FillerStrategy> WlogFiller<F> {
    pub fn new(inner: F, epsilon: Rational) -> Result<Self> {
        if !epsilon.is_positive() || epsilon > Rational::half() {
            return Err(GameError::Precondition(format!("epsilon {epsilon} outside (0, 1/2]")));
        }
        Ok(WlogFiller { inner, epsilon })
    }
}

impl<F: FillerStrategy> FillerStrategy for WlogFiller<F> {
    fn name(&self) -> String {
        format!("wlog({})", self.inner.name())
    }

    fn next_move(&mut self, state: &CupState) -> Result<FillerMove> {
        let mv = self.inner.next_move(state)?;
        wlog_transform(&mv, &self.epsilon, state.n())
    }

    fn is_done(&self) -> bool {
        self.inner.is_done()
    }

    fn report(&self) -> Value {
        self.inner.report()
    }
}

/// Replays a fixed list of moves, then holds.
pub struct ScriptedFiller {
    moves: std::collections::VecDeque<FillerMove>,
}

impl ScriptedFiller {
    pub fn new(moves: Vec<FillerMove>) -> Self {
        ScriptedFiller { moves: moves.into() }
    }
}

impl FillerStrategy for ScriptedFiller {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn next_move(&mut self, state: &CupState) -> Result<FillerMove> {
        Ok(self.moves.pop_front().unwrap_or_else(|| FillerMove::hold(state.n())))
    }

    fn is_done(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Forces `p` to change by at most one at a time, with `gap` rounds at each
/// intermediate value. The padding rounds put one unit into each of the `i`
/// fullest cups, which greedy removes again.
pub struct ChangeLimited<F> {
    inner: F,
    gap: usize,
    current_p: Option<usize>,
    pending: Option<FillerMove>,
    skip_target: usize,
    skips_left_at_level: usize,
    skip_rounds: usize,
    inner_rounds: usize,
}

impl<F: FillerStrategy> ChangeLimited<F> {
    pub fn new(inner: F, gap: usize) -> Result<Self> {
        if gap == 0 {
            return Err(GameError::Precondition("gap must be at least 1".into()));
        }
        Ok(ChangeLimited {
            inner,
            gap,
            current_p: None,
            pending: None,
            skip_target: 0,
            skips_left_at_level: 0,
            skip_rounds: 0,
            inner_rounds: 0,
        })
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    fn skip(&mut self, n: usize) -> FillerMove {
        self.skips_left_at_level -= 1;
        self.skip_rounds += 1;
        FillerMove::prefix(n, self.current_p.unwrap(), 0)
    }
}

/// One unit into each of the `i` fullest cups.
pub fn skip_move(n: usize, i: usize) -> FillerMove {
    FillerMove::prefix(n, i, 0)
}

impl<F: FillerStrategy> FillerStrategy for ChangeLimited<F> {
    fn name(&self) -> String {
        format!("change-limited({}, gap={})", self.inner.name(), self.gap)
    }

    fn next_move(&mut self, state: &CupState) -> Result<FillerMove> {
        let n = state.n();
        loop {
            if self.skips_left_at_level > 0 {
                return Ok(self.skip(n));
            }
            if let Some(target) = self.pending.as_ref().map(FillerMove::p) {
                let cur = self.current_p.unwrap();
                if cur == target {
                    self.inner_rounds += 1;
                    return Ok(self.pending.take().unwrap());
                }
                let next = if target > cur { cur + 1 } else { cur - 1 };
                self.current_p = Some(next);
                self.skip_target = target;
                self.skips_left_at_level = self.gap;
                continue;
            }
            let mv = self.inner.next_move(state)?;
            match self.current_p {
                None => {
                    self.current_p = Some(mv.p());
                    self.inner_rounds += 1;
                    return Ok(mv);
                }
                Some(p) if p == mv.p() => {
                    self.inner_rounds += 1;
                    return Ok(mv);
                }
                Some(_) => self.pending = Some(mv),
            }
        }
    }

    fn is_done(&self) -> bool {
        self.pending.is_none() && self.skips_left_at_level == 0 && self.inner.is_done()
    }

    fn report(&self) -> Value {
        json!({
            "gap": self.gap,
            "skip_rounds": self.skip_rounds,
            "inner_rounds": self.inner_rounds,
            "inner": self.inner.report(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameVariant;
    use crate::rational::rat;

    fn r(v: i64) -> Rational {
        Rational::from_integer(v)
    }

    #[test]
    fn warmup_examples() {
        let v = GameVariant::standard();
        let s = CupState::zeros(2, v.clone()).unwrap();
        match warmup_move(&s).unwrap() {
            WarmupStep::Move(m) => {
                assert_eq!(m.p(), 1);
                assert_eq!(m.additions(), vec![rat(1, 2), rat(1, 2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let s = CupState::new(vec![r(1), rat(1, 2), rat(1, 2)], v.clone()).unwrap();
        match warmup_move(&s).unwrap() {
            WarmupStep::Move(m) => {
                assert_eq!(m.p(), 2);
                assert_eq!(m.additions(), vec![r(1), rat(1, 2), rat(1, 2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let s = CupState::new(vec![r(1), rat(1, 2), r(0)], v.clone()).unwrap();
        assert_eq!(warmup_move(&s).unwrap(), WarmupStep::Done { backlog: r(1) });
        let s = CupState::new(vec![rat(1, 3)], v).unwrap();
        assert!(warmup_move(&s).is_err());
    }

    #[test]
    fn hold_move_shape() {
        let m = hold_state_move(3);
        assert_eq!(m.p(), 3);
        assert_eq!(m.additions(), vec![r(1), r(1), r(1)]);
    }

    #[test]
    fn random_filler_rejects_bad_grid() {
        assert!(RandomFiller::new(4, 1, rat(2, 3)).is_err());
        assert!(RandomFiller::new(4, 1, r(0)).is_err());
    }

    #[test]
    fn change_limited_inserts_skips() {
        let inner = ScriptedFiller::new(vec![
            FillerMove::prefix(4, 1, 0),
            FillerMove::prefix(4, 3, 0),
        ]);
        let mut f = ChangeLimited::new(inner, 2).unwrap();
        let s = CupState::zeros(4, GameVariant::negative_fill()).unwrap();
        let ps: Vec<usize> = (0..6).map(|_| f.next_move(&s).unwrap().p()).collect();
        assert_eq!(ps, vec![1, 2, 2, 3, 3, 3]);
        assert!(ChangeLimited::new(HoldFiller, 0).is_err());
    }
}
