//! Stone games: symmetric integer splits, optionally with checkpoints every
//! `ℓ` levels, plus the potentials used to bound them.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StoneState {
    positions: Vec<i64>,
    checkpoint: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StoneMove {
    pub k: i64,
    pub q: usize,
}

impl StoneMove {
    pub fn new(k: i64, q: usize) -> Self {
        StoneMove { k, q }
    }
}

impl StoneState {
    /// Plain stone game when `checkpoint` is `None`; otherwise the ℓ-variant,
    /// which keeps every position nonnegative.
    pub fn new(mut positions: Vec<i64>, checkpoint: Option<i64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(GameError::InvalidState("a stone state needs at least one stone".into()));
        }
        if let Some(l) = checkpoint {
            if l < 1 {
                return Err(GameError::InvalidVariant(format!("checkpoint spacing {l} < 1")));
            }
            if positions.iter().any(|&x| x < 0) {
                return Err(GameError::InvalidState("negative stone with checkpoints".into()));
            }
        }
        positions.sort_unstable_by(|a, b| b.cmp(a));
        Ok(StoneState { positions, checkpoint })
    }

    pub fn zeros(n: usize, checkpoint: Option<i64>) -> Result<Self> {
        Self::new(vec![0; n], checkpoint)
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn checkpoint(&self) -> Option<i64> {
        self.checkpoint
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn max(&self) -> i64 {
        self.positions[0]
    }

    /// Index range `[start, end)` holding level `k`.
    pub fn range_of(&self, k: i64) -> (usize, usize) {
        let start = self.positions.partition_point(|&x| x > k);
        let end = self.positions.partition_point(|&x| x >= k);
        (start, end)
    }

    pub fn count_at(&self, k: i64) -> usize {
        let (s, e) = self.range_of(k);
        e - s
    }

    /// Whether down-moves from `k` are suppressed.
    pub fn is_checkpoint(&self, k: i64) -> bool {
        self.checkpoint.is_some_and(|l| k >= 0 && k % l == 0)
    }
}

/// `q` stones `k -> k+1` and `q` stones `k -> k-1`, except that at a
/// checkpoint the lower half stays put.
pub fn apply_stone_move(state: &StoneState, mv: StoneMove) -> Result<StoneState> {
    let (s, e) = state.range_of(mv.k);
    if mv.q == 0 || e - s < 2 * mv.q {
        return Err(GameError::Precondition(format!(
            "need {} stones at {}, found {}",
            2 * mv.q,
            mv.k,
            e - s
        )));
    }
    let mut positions = state.positions.clone();
    for x in &mut positions[s..s + mv.q] {
        *x += 1;
    }
    if !state.is_checkpoint(mv.k) {
        for x in &mut positions[e - mv.q..e] {
            *x -= 1;
        }
    }
    Ok(StoneState { positions, checkpoint: state.checkpoint })
}

/// Every level holding at least two stones with the largest legal `q`,
/// highest level first.
pub fn enumerate_valid_moves(state: &StoneState) -> Vec<(i64, usize)> {
    let mut out = Vec::new();
    let p = &state.positions;
    let mut i = 0;
    while i < p.len() {
        let mut j = i;
        while j < p.len() && p[j] == p[i] {
            j += 1;
        }
        if j - i >= 2 {
            out.push((p[i], (j - i) / 2));
        }
        i = j;
    }
    out
}

pub fn phi(state: &StoneState) -> i128 {
    state.positions.iter().map(|&x| (x as i128) * (x as i128)).sum()
}

/// `n * Σ|x| + Σ_{i<j} |x_i - x_j|` for values sorted non-increasing.
fn psi_sorted(values: impl ExactSizeIterator<Item = i64>, n_weight: i128) -> i128 {
    let len = values.len() as i128;
    let mut abs_sum = 0i128;
    let mut pair_sum = 0i128;
    for (i, x) in values.enumerate() {
        let x = x as i128;
        abs_sum += x.abs();
        pair_sum += x * (len - 1 - 2 * i as i128);
    }
    n_weight * abs_sum + pair_sum
}

pub fn psi(state: &StoneState) -> i128 {
    psi_sorted(state.positions.iter().copied(), state.n() as i128)
}

/// `max(0, min(x - a*l, l))`.
pub fn f_al(x: i64, a: i64, l: i64) -> i64 {
    (x - a * l).clamp(0, l)
}

fn band_values(positions: &[i64], a: i64, l: i64, n_a: usize) -> impl ExactSizeIterator<Item = i64> + '_ {
    positions[..n_a].iter().map(move |&x| f_al(x, a, l))
}

/// Band potential over the `n_a` highest stones.
pub fn phi_a(state: &StoneState, a: i64, l: i64, n_a: usize) -> i128 {
    band_values(&state.positions, a, l, n_a).map(|f| (f as i128) * (f as i128)).sum()
}

pub fn psi_a(state: &StoneState, a: i64, l: i64, n_a: usize) -> i128 {
    psi_sorted(band_values(&state.positions, a, l, n_a), n_a as i128)
}

/// Highest occupied level `k` with a gap of two below it (or above it, for
/// negative levels), if any.
pub fn no_gaps_check(state: &StoneState) -> std::result::Result<(), i64> {
    let occupied = |k: i64| state.count_at(k) > 0;
    let mut levels: Vec<i64> = state.positions.clone();
    levels.dedup();
    for &k in &levels {
        if k >= 3 && !occupied(k - 1) && !occupied(k - 2) {
            return Err(k);
        }
    }
    if state.checkpoint.is_none() {
        for &k in levels.iter().rev() {
            if k <= -3 && !occupied(k + 1) && !occupied(k + 2) {
                return Err(k);
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    pub a: i64,
    /// Cups at or above `a*ℓ` in the final state.
    pub n_a: usize,
    pub steps: usize,
    pub phi_gain: i128,
    pub psi_gain: i128,
    pub sum_q_sq: i128,
    pub final_phi: i128,
    pub final_psi: i128,
    /// `(Σ q_t)^2 / Σ q_t^2`, a lower bound on `steps`.
    pub cs_bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub levels: Vec<LevelStats>,
    pub total_steps: usize,
    pub violations: Vec<String>,
}

impl LevelReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays an ℓ-variant trace and checks the per-band accounting: each step
/// changes only its own band's potentials, with `ΔΨ_a ≥ ΔΦ_a² / 2`.
pub fn level_report(initial: &StoneState, moves: &[StoneMove]) -> Result<LevelReport> {
    let l = initial
        .checkpoint
        .ok_or_else(|| GameError::Precondition("level report needs checkpoints".into()))?;
    let mut states = Vec::with_capacity(moves.len() + 1);
    states.push(initial.clone());
    for (t, mv) in moves.iter().enumerate() {
        let next = apply_stone_move(states.last().unwrap(), *mv)
            .map_err(|e| GameError::InvalidState(format!("step {}: {e}", t + 1)))?;
        states.push(next);
    }
    let fin = states.last().unwrap();
    let bands = (fin.max() / l + 1).max(1);
    let n_a: Vec<usize> = (0..bands).map(|a| fin.positions.partition_point(|&x| x >= a * l)).collect();
    let mut stats: Vec<LevelStats> = (0..bands)
        .map(|a| LevelStats {
            a,
            n_a: n_a[a as usize],
            steps: 0,
            phi_gain: 0,
            psi_gain: 0,
            sum_q_sq: 0,
            final_phi: phi_a(fin, a, l, n_a[a as usize]),
            final_psi: psi_a(fin, a, l, n_a[a as usize]),
            cs_bound: Rational::zero(),
        })
        .collect();
    let mut violations = Vec::new();
    let mut prev: Vec<(i128, i128)> = (0..bands)
        .map(|a| (phi_a(initial, a, l, n_a[a as usize]), psi_a(initial, a, l, n_a[a as usize])))
        .collect();
    for (t, mv) in moves.iter().enumerate() {
        let band = mv.k.div_euclid(l);
        let st = &states[t + 1];
        for a in 0..bands {
            let na = n_a[a as usize];
            let cur = (phi_a(st, a, l, na), psi_a(st, a, l, na));
            let (dphi, dpsi) = (cur.0 - prev[a as usize].0, cur.1 - prev[a as usize].1);
            if a == band {
                let s = &mut stats[a as usize];
                s.steps += 1;
                s.phi_gain += dphi;
                s.psi_gain += dpsi;
                s.sum_q_sq += dphi * dphi;
                if dphi <= 0 || 2 * dpsi < dphi * dphi {
                    violations.push(format!(
                        "step {}: band {a} dPhi={dphi} dPsi={dpsi}",
                        t + 1
                    ));
                }
            } else if dphi != 0 || dpsi != 0 {
                violations.push(format!("step {}: band {a} moved by a step in band {band}", t + 1));
            }
            prev[a as usize] = cur;
        }
        if band >= bands {
            violations.push(format!("step {}: band {band} beyond final state", t + 1));
        }
    }
    for s in &mut stats {
        let l128 = l as i128;
        let na = s.n_a as i128;
        if s.sum_q_sq > 0 {
            let num = s.phi_gain * s.phi_gain;
            s.cs_bound = Rational::from_bigints(num.into(), s.sum_q_sq.into());
            if (s.steps as i128) * s.sum_q_sq < num {
                violations.push(format!("band {}: {} steps below Cauchy-Schwarz bound", s.a, s.steps));
            }
        }
        if s.final_phi > na * l128 * l128 {
            violations.push(format!("band {}: final Phi_a {} > n_a l^2", s.a, s.final_phi));
        }
        if s.final_psi > 2 * na * na * l128 {
            violations.push(format!("band {}: final Psi_a {} > 2 n_a^2 l", s.a, s.final_psi));
        }
    }
    Ok(LevelReport { levels: stats, total_steps: moves.len(), violations })
}

/// The time-to-backlog curve `b(t)`, with base-2 logarithms.
pub fn bound_b_of_t(n: usize, t: f64) -> Result<Rational> {
    if n < 2 || t < 1.0 {
        return Err(GameError::Precondition("b(t) needs n >= 2 and t >= 1".into()));
    }
    let nf = n as f64;
    let n3 = nf.powi(3);
    let v = if t <= nf.log2() {
        t
    } else if t <= n3 {
        t.cbrt() * (n3 / t + 1.0).log2().powf(2.0 / 3.0)
    } else {
        nf
    };
    Ok(Rational::from_f64_dyadic(v, 32))
}

/// The inverse curve `t(b) = b + b^3 / log^2(n/b + 1)`, with base-2 logarithms.
pub fn bound_t_of_b(n: usize, b: f64) -> Result<Rational> {
    if n < 2 || b < 1.0 || b > n as f64 {
        return Err(GameError::Precondition("t(b) needs 1 <= b <= n".into()));
    }
    let lg = (n as f64 / b + 1.0).log2();
    Ok(Rational::from_f64_dyadic(b + b.powi(3) / (lg * lg), 32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(v: &[i64], l: Option<i64>) -> StoneState {
        StoneState::new(v.to_vec(), l).unwrap()
    }

    #[test]
    fn apply_examples() {
        let s = apply_stone_move(&st(&[0, 0, 0, 0], None), StoneMove::new(0, 2)).unwrap();
        assert_eq!(s.positions(), &[1, 1, -1, -1]);
        let s = apply_stone_move(&st(&[0, 0, 0, 0], Some(5)), StoneMove::new(0, 2)).unwrap();
        assert_eq!(s.positions(), &[1, 1, 0, 0]);
        let s = apply_stone_move(&st(&[2, 2, 1, 0], Some(2)), StoneMove::new(2, 1)).unwrap();
        assert_eq!(s.positions(), &[3, 2, 1, 0]);
        assert!(apply_stone_move(&st(&[1, 0], None), StoneMove::new(0, 1)).is_err());
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_valid_moves(&st(&[1, 0, 0, -1], None)), vec![(0, 1)]);
        assert!(enumerate_valid_moves(&st(&[3, 1, -1], None)).is_empty());
        assert_eq!(enumerate_valid_moves(&st(&[0, 0, 0, 0], None)), vec![(0, 2)]);
    }

    #[test]
    fn potentials() {
        let s = st(&[1, -1, 0, 0], None);
        assert_eq!(phi(&s), 2);
        assert_eq!(psi(&s), 14);
        let z = st(&[0; 4], None);
        let m = apply_stone_move(&z, StoneMove::new(0, 2)).unwrap();
        assert_eq!(phi(&m) - phi(&z), 4);
        assert_eq!(psi(&m) - psi(&z), 24);
    }

    #[test]
    fn band_potentials() {
        assert_eq!(f_al(7, 1, 5), 2);
        assert_eq!(f_al(3, 1, 5), 0);
        assert_eq!(f_al(12, 1, 5), 5);
        let z = st(&[0; 6], Some(3));
        for a in 1..4 {
            assert_eq!(phi_a(&z, a, 3, 6), 0);
            assert_eq!(psi_a(&z, a, 3, 6), 0);
        }
    }

    #[test]
    fn no_gaps_examples() {
        assert_eq!(no_gaps_check(&st(&[5, 4, 1, 0], Some(3))), Err(4));
        assert_eq!(no_gaps_check(&st(&[3, 2, 0], Some(3))), Ok(()));
        assert_eq!(no_gaps_check(&st(&[0, -1, -4], None)), Err(-4));
    }

    #[test]
    fn single_step_report() {
        let z = StoneState::zeros(4, Some(5)).unwrap();
        let rep = level_report(&z, &[StoneMove::new(0, 2)]).unwrap();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert_eq!(rep.levels[0].steps, 1);
        assert_eq!(rep.levels[0].cs_bound, Rational::one());
    }

    #[test]
    fn curve_examples() {
        assert_eq!(bound_b_of_t(16, 4.0).unwrap(), Rational::from(4));
        let n = 10usize;
        let at = bound_b_of_t(n, 1000.0).unwrap().to_f64();
        assert!((at - 10.0).abs() < 1e-6);
        assert_eq!(bound_b_of_t(n, 1001.0).unwrap(), Rational::from(10));
        assert!(bound_b_of_t(1, 3.0).is_err());
        assert!(bound_t_of_b(8, 9.0).is_err());
    }
}
