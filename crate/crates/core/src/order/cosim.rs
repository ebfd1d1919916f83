//! Carrying a negative-fill cup game over to stone games.
//!
//! Twice the stone positions majorize the cup fills, and a checkpointed stone
//! state dominates the plain one, so both stone maxima bound the cup backlog.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{majorization_transfer, majorizes, SortedSeq};
use crate::emptiers::GreedyEmptier;
use crate::engine::play_moves;
use crate::error::{GameError, Result};
use crate::game::{normalize_filler_move, validate_filler_move, CupState, FillerMove, GameVariant};
use crate::rational::Rational;
use crate::stonegame::{apply_stone_move, StoneMove, StoneState};

/// The move on `x` mirroring `mv` on a state `y` that `x` dominates, or
/// `None` when `x` is unaffected.
pub fn stone_transfer(x: &StoneState, y: &StoneState, mv: StoneMove) -> Result<Option<StoneMove>> {
    if x.n() != y.n() || x.positions().iter().zip(y.positions()).any(|(a, b)| a < b) {
        return Err(GameError::Precondition("x does not dominate y".into()));
    }
    let (s, e) = y.range_of(mv.k);
    if mv.q == 0 || e - s < 2 * mv.q {
        return Err(GameError::Precondition(format!("move at {} invalid on y", mv.k)));
    }
    let last_raised = s + mv.q - 1;
    let r = x.positions().partition_point(|&v| v > mv.k);
    if r > last_raised {
        return Ok(None);
    }
    if x.positions()[r..e].iter().any(|&v| v != mv.k) {
        return Err(GameError::Defect(format!("x not flat at {} over [{r}, {e})", mv.k)));
    }
    Ok(Some(StoneMove::new(mv.k, last_raised - r + 1)))
}

/// Level and count of the doubled stone move covering one round of the cup
/// game on a state of even integers: the level is the fill of the `p`-th
/// fullest cup and the count is half its tie block. `None` when the block
/// is a single cup.
pub fn stone_cover_move(x: &CupState, mv: &FillerMove) -> Result<Option<(Rational, usize)>> {
    validate_filler_move(x, mv)?;
    let two = Rational::from_integer(2);
    if x.iter().any(|v| !(v / &two).is_integer()) {
        return Err(GameError::Precondition("cover move needs even-integer fills".into()));
    }
    let k = x.fill(mv.p() - 1).clone();
    let count = x.count_at(&k) / 2;
    if count == 0 {
        return Ok(None);
    }
    Ok(Some((k, count)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoSimReport {
    pub rounds: usize,
    pub stone_moves: Vec<StoneMove>,
    pub checkpoint_moves: Vec<StoneMove>,
    pub cases: BTreeMap<String, usize>,
    pub max_cup_backlog: Rational,
    pub max_stone: i64,
    pub max_checkpoint_stone: i64,
}

/// Runs a negative-fill cup game against greedy while maintaining the plain
/// and checkpointed stone states, checking the invariants every round.
pub struct CoSimulation {
    cups: CupState,
    stones: StoneState,
    checkpointed: StoneState,
    report: CoSimReport,
    greedy: GreedyEmptier,
}

fn doubled(s: &StoneState) -> CupState {
    let fills = s.positions().iter().map(|&x| Rational::from_integer(2 * x)).collect();
    CupState::new(fills, GameVariant::negative_fill()).expect("nonempty stone state")
}

impl CoSimulation {
    pub fn new(n: usize, spacing: i64) -> Result<Self> {
        Ok(CoSimulation {
            cups: CupState::zeros(n, GameVariant::negative_fill())?,
            stones: StoneState::zeros(n, None)?,
            checkpointed: StoneState::zeros(n, Some(spacing))?,
            report: CoSimReport::default(),
            greedy: GreedyEmptier::default(),
        })
    }

    pub fn cups(&self) -> &CupState {
        &self.cups
    }

    pub fn stones(&self) -> &StoneState {
        &self.stones
    }

    pub fn checkpointed(&self) -> &StoneState {
        &self.checkpointed
    }

    pub fn report(&self) -> &CoSimReport {
        &self.report
    }

    pub fn step(&mut self, mv: &FillerMove) -> Result<()> {
        let z = doubled(&self.stones);
        let t = majorization_transfer(&z, &self.cups, mv)?;
        for c in t.cases {
            *self.report.cases.entry(c).or_insert(0) += 1;
        }
        let cover = stone_cover_move(&z, &normalize_filler_move(&z, &t.mv))?;
        let (_, _, next) = play_moves(&self.cups, mv, &mut self.greedy)?;
        self.cups = next;
        if let Some((k, count)) = cover {
            let k = (k / Rational::from_integer(2)).to_i64().unwrap();
            let smv = StoneMove::new(k, count);
            if let Some(wmv) = stone_transfer(&self.checkpointed, &self.stones, smv)? {
                self.checkpointed = apply_stone_move(&self.checkpointed, wmv)?;
                self.report.checkpoint_moves.push(wmv);
            }
            self.stones = apply_stone_move(&self.stones, smv)?;
            self.report.stone_moves.push(smv);
        }
        self.report.rounds += 1;
        self.check()
    }

    fn check(&mut self) -> Result<()> {
        let z = SortedSeq::new(doubled(&self.stones).fills());
        if !majorizes(&z, &SortedSeq::new(self.cups.fills()))? {
            return Err(GameError::Defect(format!(
                "round {}: doubled stones stopped majorizing the cups",
                self.report.rounds
            )));
        }
        let w = self.checkpointed.positions();
        if w.iter().zip(self.stones.positions()).any(|(a, b)| a < b) {
            return Err(GameError::Defect(format!(
                "round {}: checkpointed stones stopped dominating",
                self.report.rounds
            )));
        }
        let b = self.cups.backlog();
        if b > self.report.max_cup_backlog {
            self.report.max_cup_backlog = b;
        }
        self.report.max_stone = self.report.max_stone.max(self.stones.max());
        self.report.max_checkpoint_stone = self.report.max_checkpoint_stone.max(self.checkpointed.max());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn transfer_examples() {
        let y = StoneState::new(vec![0, 0, 0, 0], None).unwrap();
        let x = StoneState::new(vec![1, 0, 0, 0], None).unwrap();
        assert_eq!(
            stone_transfer(&x, &y, StoneMove::new(0, 2)).unwrap(),
            Some(StoneMove::new(0, 1))
        );
        let x = StoneState::new(vec![1, 1, 0, 0], None).unwrap();
        assert_eq!(stone_transfer(&x, &y, StoneMove::new(0, 2)).unwrap(), None);
        assert!(stone_transfer(&y, &x, StoneMove::new(0, 1)).is_err());
    }

    #[test]
    fn cover_move_examples() {
        let x = CupState::zeros(2, GameVariant::negative_fill()).unwrap();
        let mv = FillerMove::new(1, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(stone_cover_move(&x, &mv).unwrap(), Some((Rational::zero(), 1)));
        let x = CupState::new(vec![rat(2, 1), Rational::zero()], GameVariant::negative_fill()).unwrap();
        assert_eq!(stone_cover_move(&x, &mv).unwrap(), None);
        let odd = CupState::new(vec![rat(1, 1), rat(-1, 1)], GameVariant::negative_fill()).unwrap();
        assert!(stone_cover_move(&odd, &mv).is_err());
    }

    #[test]
    fn cosim_short_game() {
        let mut sim = CoSimulation::new(4, 2).unwrap();
        for _ in 0..6 {
            sim.step(&FillerMove::prefix(4, 0, 4)).unwrap();
        }
        assert_eq!(sim.report().rounds, 6);
        assert!(Rational::from_integer(2 * sim.stones().max()) >= sim.report().max_cup_backlog);
    }
}
