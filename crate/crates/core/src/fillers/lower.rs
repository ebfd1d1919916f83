//! The lower-bound filler: symmetric half-unit splits, chip-firing phases,
//! and the chained amplification plan.

use serde::Serialize;
use serde_json::{json, Value};

use crate::emptiers::{greedy_empty, TiePolicy};
use crate::engine::FillerStrategy;
use crate::error::{GameError, Result};
use crate::game::{apply_filler_move, CupState, FillerMove, VariantKind};
use crate::rational::Rational;

fn half_steps(j: i64) -> Rational {
    Rational::new(j, 2)
}

/// Unchecked split: ones on every cup above `level`, halves on `2q` cups at it.
fn split_at(state: &CupState, level: &Rational, q: usize) -> Option<FillerMove> {
    if q == 0 || state.count_at(level) < 2 * q {
        return None;
    }
    Some(FillerMove::prefix(state.n(), state.count_above(level), 2 * q))
}

/// Moves `q` cups at `level` up by 1/2 and `q` others down by 1/2, against a
/// greedy emptier in the negative-fill game.
pub fn flat_split_move(state: &CupState, level: &Rational, q: usize) -> Result<FillerMove> {
    if state.variant().kind != VariantKind::NegativeFill {
        return Err(GameError::Precondition("flat split is defined for the negative-fill game".into()));
    }
    if !state.is_half_integral() || !level.is_half_integer() {
        return Err(GameError::Precondition("flat split needs half-integer fills".into()));
    }
    if q == 0 {
        return Err(GameError::Precondition("flat split needs q >= 1".into()));
    }
    split_at(state, level, q).ok_or_else(|| {
        GameError::Precondition(format!(
            "need {} cups at level {level}, found {}",
            2 * q,
            state.count_at(level)
        ))
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhaseStep {
    Move { mv: FillerMove, level: Rational },
    Done,
}

/// One chip-firing phase on a block of `m` cups starting at `base`.
///
/// The block is tracked as a histogram over offsets `j/2`, `-k <= j <= k`.
/// The real state may hold other cups at the same levels; the block only
/// needs to be a sub-multiset of it.
#[derive(Debug, Clone)]
pub struct AdvancedPhase {
    base: Rational,
    k: usize,
    m: usize,
    chunk: usize,
    hist: Vec<usize>,
    pending: Option<i64>,
    steps: usize,
}

impl AdvancedPhase {
    pub fn new(base: Rational, k: usize, m: usize) -> Result<Self> {
        if k == 0 || m == 0 || m % (4 * k) != 0 {
            return Err(GameError::Precondition(format!("4k must divide m (k={k}, m={m})")));
        }
        if !base.is_half_integer() {
            return Err(GameError::Precondition("phase base must be a half-integer".into()));
        }
        let mut hist = vec![0; 2 * k + 1];
        hist[k] = m;
        Ok(AdvancedPhase { base, k, m, chunk: m / (4 * k), hist, pending: None, steps: 0 })
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Most steps a phase can take.
    pub fn step_bound(&self) -> usize {
        8 * self.k.pow(3)
    }

    fn count(&self, j: i64) -> usize {
        self.hist[(j + self.k as i64) as usize]
    }

    pub fn level(&self, j: i64) -> Rational {
        &self.base + half_steps(j)
    }

    /// `(level, count)` for every occupied level, highest first.
    pub fn counts(&self) -> Vec<(Rational, usize)> {
        let k = self.k as i64;
        (-k..=k).rev().filter(|&j| self.count(j) > 0).map(|j| (self.level(j), self.count(j))).collect()
    }

    /// Cups the phase guarantees at `base + k/2` once done.
    pub fn top_count(&self) -> usize {
        self.count(self.k as i64)
    }

    /// Block potential centred at `base`: sum of squared offsets.
    pub fn phi(&self) -> Rational {
        let k = self.k as i64;
        (-k..=k)
            .map(|j| Rational::new(j * j, 4) * Rational::from(self.count(j)))
            .sum()
    }

    /// Exact per-step potential gain.
    pub fn phi_gain(&self) -> Rational {
        Rational::new(self.m as i64, 8 * self.k as i64)
    }

    pub fn is_done(&self) -> bool {
        self.pending.is_none() && self.pick().is_none()
    }

    /// Symmetry, divisibility and range. Only meaningful between paired steps.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.k as i64;
        let total: usize = self.hist.iter().sum();
        if total != self.m {
            return Err(GameError::Defect(format!("block lost cups: {total} != {}", self.m)));
        }
        for j in -k..=k {
            if self.count(j) % self.chunk != 0 {
                return Err(GameError::Defect(format!("count at offset {j}/2 not a multiple of {}", self.chunk)));
            }
            if self.pending.is_none() && self.count(j) != self.count(-j) {
                return Err(GameError::Defect(format!("asymmetric counts at offset ±{j}/2")));
            }
        }
        Ok(())
    }

    /// Every block level is present in the real state at least as often.
    pub fn consistent_with(&self, state: &CupState) -> bool {
        self.counts().iter().all(|(lvl, c)| state.count_at(lvl) >= *c)
    }

    fn pick(&self) -> Option<i64> {
        let k = self.k as i64;
        (0..k).find(|&j| self.count(j) >= 2 * self.chunk)
    }

    /// Next split. The histogram advances as if the emptier plays greedily.
    pub fn step(&mut self, state: &CupState) -> Result<PhaseStep> {
        let j = match self.pending.take() {
            Some(j) => j,
            None => match self.pick() {
                Some(j) => {
                    if j != 0 {
                        self.pending = Some(-j);
                    }
                    j
                }
                None => return Ok(PhaseStep::Done),
            },
        };
        if self.steps >= self.step_bound() {
            return Err(GameError::Defect(format!(
                "phase exceeded {} steps",
                self.step_bound()
            )));
        }
        let level = self.level(j);
        let mv = split_at(state, &level, self.chunk).ok_or_else(|| {
            GameError::Precondition(format!(
                "state has {} cups at {level}, block needs {}",
                state.count_at(&level),
                2 * self.chunk
            ))
        })?;
        let at = |j: i64| (j + self.k as i64) as usize;
        self.hist[at(j)] -= 2 * self.chunk;
        self.hist[at(j + 1)] += self.chunk;
        self.hist[at(j - 1)] += self.chunk;
        self.steps += 1;
        Ok(PhaseStep::Move { mv, level })
    }
}

/// Plays one phase against greedy on a copy of `state` and returns its moves.
pub fn force_upward(state: &CupState, base: &Rational, k: usize, m: usize) -> Result<Vec<FillerMove>> {
    let mut phase = AdvancedPhase::new(base.clone(), k, m)?;
    if state.count_at(base) < m {
        return Err(GameError::Precondition(format!(
            "need {m} cups at {base}, found {}",
            state.count_at(base)
        )));
    }
    let mut cur = state.clone();
    let mut out = Vec::new();
    loop {
        match phase.step(&cur)? {
            PhaseStep::Done => break,
            PhaseStep::Move { mv, .. } => {
                let post = apply_filler_move(&cur, &mv)?;
                let em = greedy_empty(&post, mv.p(), TiePolicy::LowestIndex);
                cur = crate::game::apply_emptier_move(&post, &em, mv.p())?;
                if !phase.consistent_with(&cur) {
                    return Err(GameError::Precondition(
                        "greedy response left the block; is this the negative-fill game?".into(),
                    ));
                }
                out.push(mv);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// Chained chip-firing phases.
    Amplify,
    /// One half-unit split per round on `2^k` cups.
    Halving,
}

/// Parameters of the lower-bound construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MainFillerPlan {
    pub n: usize,
    pub k: usize,
    pub c: Rational,
    pub branch: Branch,
    /// `ceil(k / (c ln(n/k)))`.
    pub k_prime: usize,
    /// The divisor `c ln(n/k)`, rounded up.
    pub h: usize,
    /// Width of each phase; a phase lifts its block by `phase_k / 2`.
    pub phase_k: usize,
    pub n_prime: usize,
    /// Number of phases.
    pub r: usize,
    /// Backlog the construction is certain to reach.
    pub guaranteed_backlog: Rational,
    /// Upper bound on active rounds.
    pub round_bound: usize,
}

impl MainFillerPlan {
    pub fn new(n: usize, k: usize, c: Rational) -> Result<Self> {
        Self::with_width(n, k, c, 1)
    }

    /// Like `new`, with phases of width `mult * k'`.
    pub fn with_width(n: usize, k: usize, c: Rational, mult: usize) -> Result<Self> {
        if !c.is_positive() {
            return Err(GameError::Precondition("c must be positive".into()));
        }
        if n < 2 || k == 0 || mult == 0 {
            return Err(GameError::Precondition("need n >= 2, k >= 1".into()));
        }
        if Rational::from(k) > &c * Rational::from(n) {
            return Err(GameError::Precondition(format!("k = {k} exceeds c*n = {}", &c * Rational::from(n))));
        }
        let cf = c.to_f64();
        let ln_ratio = (n as f64 / k as f64).ln();
        let divisor = cf * ln_ratio;
        let h = divisor.ceil().max(1.0) as usize;
        if (k as f64) < cf * (n as f64).ln() {
            if k >= usize::BITS as usize - 1 || (1usize << k) > n {
                return Err(GameError::Precondition(format!("halving branch needs 2^{k} <= {n}")));
            }
            let k_prime = if divisor > 0.0 { (k as f64 / divisor - 1e-9).ceil() as usize } else { k };
            return Ok(MainFillerPlan {
                n,
                k,
                c,
                branch: Branch::Halving,
                k_prime,
                h,
                phase_k: 1,
                n_prime: 1 << k,
                r: k,
                guaranteed_backlog: Rational::new(k as i64, 2),
                round_bound: k,
            });
        }
        if divisor <= 0.0 {
            return Err(GameError::Precondition("k = n leaves no room to amplify".into()));
        }
        let k_prime = ((k as f64 / divisor - 1e-9).ceil() as usize).max(2);
        let phase_k = mult * k_prime;
        if 4 * phase_k > n {
            return Err(GameError::Precondition(format!(
                "infeasible plan: 4 * {phase_k} cups exceed n = {n}"
            )));
        }
        let mut r = 0;
        let mut n_prime = phase_k;
        while n_prime * 4 <= n {
            n_prime *= 4;
            r += 1;
        }
        Ok(MainFillerPlan {
            n,
            k,
            c,
            branch: Branch::Amplify,
            k_prime,
            h,
            phase_k,
            n_prime,
            r,
            guaranteed_backlog: Rational::new((r * phase_k) as i64, 2),
            round_bound: 8 * r * phase_k.pow(3) + k,
        })
    }

    /// The backlog target `r k'` quoted alongside the construction.
    pub fn target_backlog(&self) -> Rational {
        match self.branch {
            Branch::Amplify => Rational::from(self.r * self.k_prime),
            Branch::Halving => Rational::from(self.k),
        }
    }

    /// The round budget `8 r k'^3 + k` quoted alongside the construction.
    pub fn target_rounds(&self) -> usize {
        match self.branch {
            Branch::Amplify => 8 * self.r * self.k_prime.pow(3) + self.k,
            Branch::Halving => self.k,
        }
    }
}

#[derive(Debug, Clone)]
enum Stage {
    Start,
    Amplify { index: usize, phase: AdvancedPhase },
    Halving { round: usize, base: Rational },
    Finished,
    Derailed(String),
}

/// The full lower-bound strategy. Built for the negative-fill game; in other
/// variants it stops (and holds) once the state stops tracking its plan.
#[derive(Debug, Clone)]
pub struct MainFiller {
    plan: MainFillerPlan,
    stage: Stage,
    rounds_used: usize,
    phase_steps: Vec<usize>,
    achieved: Option<Rational>,
    check_invariants: bool,
}

impl MainFiller {
    pub fn new(n: usize, k: usize, c: Rational) -> Result<Self> {
        Ok(Self::from_plan(MainFillerPlan::new(n, k, c)?))
    }

    pub fn from_plan(plan: MainFillerPlan) -> Self {
        MainFiller {
            plan,
            stage: Stage::Start,
            rounds_used: 0,
            phase_steps: Vec::new(),
            achieved: None,
            check_invariants: true,
        }
    }

    pub fn plan(&self) -> &MainFillerPlan {
        &self.plan
    }

    pub fn rounds_used(&self) -> usize {
        self.rounds_used
    }

    /// Backlog at the moment the plan completed.
    pub fn achieved_backlog(&self) -> Option<&Rational> {
        self.achieved.as_ref()
    }

    pub fn phase_steps(&self) -> &[usize] {
        &self.phase_steps
    }

    pub fn derailed(&self) -> Option<&str> {
        match &self.stage {
            Stage::Derailed(why) => Some(why),
            _ => None,
        }
    }

    fn highest_level_with(state: &CupState, count: usize) -> Option<Rational> {
        state.runs().iter().find(|r| r.1 >= count).map(|r| r.0.clone())
    }

    /// Outside the negative-fill game a mismatch is expected; inside it is a bug.
    fn fail(&mut self, state: &CupState, err: GameError) -> Result<FillerMove> {
        if state.variant().kind == VariantKind::NegativeFill {
            return Err(GameError::Defect(format!("lower-bound plan broke: {err}")));
        }
        self.stage = Stage::Derailed(err.to_string());
        Ok(FillerMove::hold(state.n()))
    }

    fn advance(&mut self, state: &CupState) -> Result<Option<FillerMove>> {
        let n = state.n();
        if n != self.plan.n {
            return Err(GameError::Precondition(format!("plan built for n = {}", self.plan.n)));
        }
        loop {
            match &mut self.stage {
                Stage::Finished | Stage::Derailed(_) => return Ok(None),
                Stage::Start => {
                    let need = self.plan.n_prime;
                    let Some(base) = Self::highest_level_with(state, need) else {
                        return Err(GameError::Precondition(format!("no level holds {need} cups")));
                    };
                    if !base.is_half_integer() {
                        return Err(GameError::Precondition("start level must be a half-integer".into()));
                    }
                    self.stage = match self.plan.branch {
                        Branch::Amplify => Stage::Amplify {
                            index: 1,
                            phase: AdvancedPhase::new(base, self.plan.phase_k, need)?,
                        },
                        Branch::Halving => Stage::Halving { round: 1, base },
                    };
                }
                Stage::Halving { round, base } => {
                    if *round > self.plan.k {
                        self.achieved = Some(state.backlog());
                        self.stage = Stage::Finished;
                        continue;
                    }
                    let level = base.clone() + Rational::new(*round as i64 - 1, 2);
                    let q = 1usize << (self.plan.k - *round);
                    *round += 1;
                    let mv = split_at(state, &level, q).ok_or_else(|| {
                        GameError::Precondition(format!("too few cups at {level}"))
                    })?;
                    return Ok(Some(mv));
                }
                Stage::Amplify { index, phase } => {
                    if !phase.consistent_with(state) {
                        return Err(GameError::Precondition("state no longer contains the block".into()));
                    }
                    if self.check_invariants {
                        phase.check_invariants()?;
                    }
                    match phase.step(state)? {
                        PhaseStep::Move { mv, .. } => return Ok(Some(mv)),
                        PhaseStep::Done => {
                            self.phase_steps.push(phase.steps());
                            if *index == self.plan.r {
                                self.achieved = Some(state.backlog());
                                self.stage = Stage::Finished;
                                continue;
                            }
                            let base = phase.level(phase.k() as i64);
                            let next = AdvancedPhase::new(base, phase.k(), phase.m() / 4)?;
                            *index += 1;
                            *phase = next;
                        }
                    }
                }
            }
        }
    }
}

impl FillerStrategy for MainFiller {
    fn name(&self) -> String {
        format!("main(n={}, k={})", self.plan.n, self.plan.k)
    }

    fn next_move(&mut self, state: &CupState) -> Result<FillerMove> {
        match self.advance(state) {
            Ok(Some(mv)) => {
                self.rounds_used += 1;
                Ok(mv)
            }
            Ok(None) => Ok(FillerMove::hold(state.n())),
            Err(GameError::Defect(m)) => Err(GameError::Defect(m)),
            Err(e) => self.fail(state, e),
        }
    }

    fn is_done(&self) -> bool {
        matches!(self.stage, Stage::Finished | Stage::Derailed(_))
    }

    fn report(&self) -> Value {
        json!({
            "plan": self.plan,
            "rounds_used": self.rounds_used,
            "phase_steps": self.phase_steps,
            "achieved_backlog": self.achieved.as_ref().map(Rational::to_ratio_string),
            "derailed": self.derailed(),
        })
    }
}
