//! Exhaustive sup-min game values on a discretized move grid.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::engine::FillerStrategy;
use crate::error::{GameError, Result};
use crate::game::{CupState, FillerMove, GameVariant};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Filler additions are multiples of this quantum.
    pub grid: Rational,
    pub horizon: usize,
    /// Budget on distinct (state, depth) evaluations.
    pub max_nodes: usize,
}

impl OracleConfig {
    pub fn new(grid: Rational, horizon: usize, max_nodes: usize) -> Result<Self> {
        let cfg = OracleConfig { grid, horizon, max_nodes };
        cfg.quanta()?;
        Ok(cfg)
    }

    fn quanta(&self) -> Result<usize> {
        if !self.grid.is_positive() {
            return Err(GameError::Precondition("oracle grid must be positive".into()));
        }
        let inv = Rational::one() / &self.grid;
        match inv.to_i64() {
            Some(g) if g >= 1 => Ok(g as usize),
            _ => Err(GameError::Precondition(format!(
                "oracle grid {} must be 1/integer",
                self.grid
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleEmptier {
    /// Minimizes over every p-subset.
    Free,
    /// Always empties the p fullest cups.
    Greedy,
}

/// Memoized game-tree evaluator.
pub struct Oracle {
    cfg: OracleConfig,
    mode: OracleEmptier,
    quanta: usize,
    memo: HashMap<(Vec<Rational>, usize), Rational>,
    moves: HashMap<usize, Vec<Vec<usize>>>,
    nodes: usize,
    variant: Option<GameVariant>,
}

/// One distinct filler option: processor count and post-fill values.
struct Candidate {
    p: usize,
    additions: Vec<Rational>,
    post: Vec<Rational>,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl Oracle {
    pub fn new(cfg: OracleConfig, mode: OracleEmptier) -> Result<Self> {
        let quanta = cfg.quanta()?;
        Ok(Oracle {
            cfg,
            mode,
            quanta,
            memo: HashMap::new(),
            moves: HashMap::new(),
            nodes: 0,
            variant: None,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// All quantum vectors over `n` cups with each entry in `0..=quanta`.
    fn quantum_vectors(&mut self, n: usize) -> &Vec<Vec<usize>> {
        let g = self.quanta;
        self.moves.entry(n).or_insert_with(|| {
            let mut out = vec![vec![]];
            for _ in 0..n {
                let mut next = Vec::with_capacity(out.len() * (g + 1));
                for v in &out {
                    for q in 0..=g {
                        let mut w = v.clone();
                        w.push(q);
                        next.push(w);
                    }
                }
                out = next;
            }
            out.retain(|v| {
                let s: usize = v.iter().sum();
                s > 0 && s % g == 0
            });
            out
        })
    }

    fn candidates(&mut self, fills: &[Rational]) -> Vec<Candidate> {
        let g = self.quanta;
        let grid = self.cfg.grid.clone();
        let vecs = self.quantum_vectors(fills.len()).clone();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for v in vecs {
            let p = v.iter().sum::<usize>() / g;
            let additions: Vec<Rational> =
                v.iter().map(|&q| &grid * Rational::from(q)).collect();
            let post: Vec<Rational> = fills.iter().zip(&additions).map(|(x, a)| x + a).collect();
            let mut key = post.clone();
            key.sort_by(|a, b| b.cmp(a));
            if seen.insert((p, key)) {
                out.push(Candidate { p, additions, post });
            }
        }
        out
    }

    fn after_empty(&self, post: &[Rational], chosen: &[usize]) -> Vec<Rational> {
        let v = self.variant.as_ref().unwrap();
        let mut out: Vec<Rational> = post.to_vec();
        for &i in chosen {
            out[i] = v.emptied(&out[i]);
        }
        out.sort_by(|a, b| b.cmp(a));
        out
    }

    fn response_value(&mut self, cand: &Candidate, t: usize) -> Result<Rational> {
        let n = cand.post.len();
        match self.mode {
            OracleEmptier::Greedy => {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| cand.post[b].cmp(&cand.post[a]));
                let next = self.after_empty(&cand.post, &order[..cand.p]);
                self.eval(next, t - 1)
            }
            OracleEmptier::Free => {
                let mut best: Option<Rational> = None;
                let mut seen = HashSet::new();
                for subset in combinations(n, cand.p) {
                    let next = self.after_empty(&cand.post, &subset);
                    if !seen.insert(next.clone()) {
                        continue;
                    }
                    let v = self.eval(next, t - 1)?;
                    best = Some(match best {
                        Some(b) => b.min(v),
                        None => v,
                    });
                }
                Ok(best.unwrap())
            }
        }
    }

    fn eval(&mut self, fills: Vec<Rational>, t: usize) -> Result<Rational> {
        if t == 0 {
            return Ok(fills[0].clone());
        }
        let key = (fills, t);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        self.nodes += 1;
        if self.nodes > self.cfg.max_nodes {
            return Err(GameError::Budget(format!(
                "oracle exceeded {} nodes",
                self.cfg.max_nodes
            )));
        }
        let mut best: Option<Rational> = None;
        for cand in self.candidates(&key.0) {
            let v = self.response_value(&cand, t)?;
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
        let v = best.unwrap();
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// Game value of `state` with `t` rounds left.
    pub fn value(&mut self, state: &CupState, t: usize) -> Result<Rational> {
        self.bind(state)?;
        self.eval(state.fills(), t)
    }

    /// A filler move attaining the value, with that value.
    pub fn best_move(&mut self, state: &CupState, t: usize) -> Result<Option<(FillerMove, Rational)>> {
        if t == 0 {
            return Ok(None);
        }
        self.bind(state)?;
        let fills = state.fills();
        let mut best: Option<(FillerMove, Rational)> = None;
        for cand in self.candidates(&fills) {
            let v = self.response_value(&cand, t)?;
            if best.as_ref().is_none_or(|b| v > b.1) {
                best = Some((FillerMove::new(cand.p, cand.additions.clone()), v));
            }
        }
        Ok(best)
    }

    fn bind(&mut self, state: &CupState) -> Result<()> {
        match &self.variant {
            Some(v) if v != state.variant() => Err(GameError::Precondition(
                "one oracle instance serves a single variant".into(),
            )),
            Some(_) => Ok(()),
            None => {
                self.variant = Some(state.variant().clone());
                Ok(())
            }
        }
    }
}

/// Optimal backlog after `cfg.horizon` rounds against a free emptier.
pub fn opt_oracle(state: &CupState, cfg: &OracleConfig) -> Result<Rational> {
    Oracle::new(cfg.clone(), OracleEmptier::Free)?.value(state, cfg.horizon)
}

/// Plays the oracle's best filler move for the remaining horizon.
pub struct OracleFiller {
    oracle: Oracle,
    remaining: usize,
}

impl OracleFiller {
    pub fn new(cfg: OracleConfig, mode: OracleEmptier) -> Result<Self> {
        let remaining = cfg.horizon;
        Ok(OracleFiller { oracle: Oracle::new(cfg, mode)?, remaining })
    }
}

impl FillerStrategy for OracleFiller {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn next_move(&mut self, state: &CupState) -> Result<FillerMove> {
        if self.remaining == 0 {
            return Ok(FillerMove::hold(state.n()));
        }
        let (mv, _) = self
            .oracle
            .best_move(state, self.remaining)?
            .ok_or_else(|| GameError::Defect("oracle returned no move".into()))?;
        self.remaining -= 1;
        Ok(mv)
    }

    fn is_done(&self) -> bool {
        self.remaining == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn horizon_zero_is_backlog() {
        let s = CupState::new(vec![rat(3, 2), rat(0, 1)], GameVariant::standard()).unwrap();
        let cfg = OracleConfig::new(rat(1, 2), 0, 100).unwrap();
        assert_eq!(opt_oracle(&s, &cfg).unwrap(), rat(3, 2));
    }

    #[test]
    fn one_round_two_cups() {
        let s = CupState::zeros(2, GameVariant::standard()).unwrap();
        let cfg = OracleConfig::new(rat(1, 2), 1, 1000).unwrap();
        assert_eq!(opt_oracle(&s, &cfg).unwrap(), rat(1, 2));
    }

    #[test]
    fn budget_error() {
        let s = CupState::zeros(3, GameVariant::negative_fill()).unwrap();
        let cfg = OracleConfig::new(rat(1, 2), 3, 2).unwrap();
        assert!(matches!(opt_oracle(&s, &cfg), Err(GameError::Budget(_))));
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(OracleConfig::new(rat(2, 3), 1, 10).is_err());
        assert!(OracleConfig::new(rat(0, 1), 1, 10).is_err());
    }
}
