//! Emptier strategies: greedy with tie policies, proportional emptying, and
//! the exhaustive oracle for tiny instances.

mod oracle;

pub use oracle::{opt_oracle, Oracle, OracleConfig, OracleEmptier, OracleFiller};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::EmptierStrategy;
use crate::error::{GameError, Result};
use crate::game::{CupState, EmptierMove, FillerMove, PostFill};
use crate::rational::Rational;

/// How greedy chooses among equal-fill cups at the selection boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TiePolicy {
    #[default]
    LowestIndex,
    HighestIndex,
    Random { seed: u64 },
}

/// Greedy selection over a non-increasing sequence given as
/// `(value, start, count)` runs.
fn greedy_select<'a>(
    runs: impl Iterator<Item = (&'a Rational, usize, usize)>,
    p: usize,
    tie: TiePolicy,
    rng: Option<&mut ChaCha8Rng>,
) -> EmptierMove {
    let runs: Vec<_> = runs.collect();
    let mut em = EmptierMove::default();
    if p == 0 {
        return em;
    }
    // Locate the value of the p-th fullest cup and the block of cups sharing it.
    let mut covered = 0;
    let mut bi = 0;
    while covered + runs[bi].2 < p {
        covered += runs[bi].2;
        bi += 1;
    }
    let boundary = runs[bi].0;
    let mut lo = bi;
    while lo > 0 && runs[lo - 1].0 == boundary {
        lo -= 1;
    }
    let mut hi = bi;
    while hi + 1 < runs.len() && runs[hi + 1].0 == boundary {
        hi += 1;
    }
    let block_start = runs[lo].1;
    let block_len = runs[hi].1 + runs[hi].2 - block_start;
    let need = p - block_start;
    em.push_range(0, block_start);
    match tie {
        TiePolicy::LowestIndex => em.push_range(block_start, need),
        TiePolicy::HighestIndex => em.push_range(block_start + block_len - need, need),
        TiePolicy::Random { seed } => {
            let mut local;
            let rng = match rng {
                Some(r) => r,
                None => {
                    local = ChaCha8Rng::seed_from_u64(seed);
                    &mut local
                }
            };
            if need == block_len {
                em.push_range(block_start, need);
            } else {
                let mut picks = sample(rng, block_len, need).into_vec();
                picks.sort_unstable();
                for i in picks {
                    em.push_range(block_start + i, 1);
                }
            }
        }
    }
    em
}

/// The `p` fullest cups of a sorted post-fill state, ties resolved per policy.
pub fn greedy_empty(post: &CupState, p: usize, tie: TiePolicy) -> EmptierMove {
    assert!(p >= 1 && p <= post.n(), "greedy needs 1 <= p <= n");
    let mut start = 0;
    let runs = post.runs().iter().map(|(v, c)| {
        let r = (v, start, *c);
        start += c;
        r
    });
    greedy_select(runs, p, tie, None)
}

pub struct GreedyEmptier {
    tie: TiePolicy,
    rng: Option<ChaCha8Rng>,
}

impl GreedyEmptier {
    pub fn new(tie: TiePolicy) -> Self {
        let rng = match tie {
            TiePolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        GreedyEmptier { tie, rng }
    }
}

impl Default for GreedyEmptier {
    fn default() -> Self {
        GreedyEmptier::new(TiePolicy::LowestIndex)
    }
}

impl EmptierStrategy for GreedyEmptier {
    fn name(&self) -> String {
        match self.tie {
            TiePolicy::LowestIndex => "greedy".into(),
            TiePolicy::HighestIndex => "greedy-high".into(),
            TiePolicy::Random { seed } => format!("greedy-random-{seed}"),
        }
    }

    fn choose(&mut self, post: &PostFill, mv: &FillerMove) -> Result<EmptierMove> {
        let runs = post.segments().iter().map(|s| (&s.post, s.start, s.count));
        Ok(greedy_select(runs, mv.p(), self.tie, self.rng.as_mut()))
    }
}

fn check_q(segs: &[(Rational, usize)]) -> Result<usize> {
    let mut sum = Rational::zero();
    for (q, c) in segs {
        if q.is_negative() || *q > Rational::one() {
            return Err(GameError::Precondition(format!("probability {q} outside [0, 1]")));
        }
        sum += q * Rational::from(*c);
    }
    match sum.to_i64() {
        Some(p) if p >= 1 => Ok(p as usize),
        _ => Err(GameError::Precondition(format!(
            "probabilities sum to {sum}, expected a positive integer"
        ))),
    }
}

fn lcm_i128(a: i128, b: i128) -> Option<i128> {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    (a / x).checked_mul(b)
}

/// Circular-interval sampler over run-length encoded probabilities.
///
/// Lays intervals of length `q_j` end to end over `[0, p)`, draws `u` with
/// denominator `2^64`, and selects the intervals containing `u, u+1, ...`
/// modulo `p`. That point set equals `{frac(u) + m : 0 <= m < p}`.
pub fn proportional_sample_segments(
    segs: &[(Rational, usize)],
    rng: &mut impl Rng,
) -> Result<EmptierMove> {
    let p = check_q(segs)?;
    let k: u128 = rng.gen_range(0..((p as u128) << 64));
    let frac = (k & u64::MAX as u128) as i128;

    let mut lcm: i128 = 1;
    let mut fast = true;
    for (q, _) in segs {
        match q.as_small().and_then(|(_, d)| lcm_i128(lcm, d as i128)) {
            Some(l) if l < (1i128 << 40) => lcm = l,
            _ => {
                fast = false;
                break;
            }
        }
    }
    fast &= (p as i128).checked_mul(lcm).is_some_and(|v| v < (1i128 << 60));

    let mut em = EmptierMove::default();
    let mut start_idx = 0usize;
    if fast {
        // Everything scaled by lcm * 2^64 is integral and fits in i128.
        let unit: i128 = lcm << 64;
        let v = frac * lcm;
        let mut s: i128 = 0;
        for (q, c) in segs {
            let (qn, qd) = q.as_small().unwrap();
            let width = (qn as i128) * (lcm / qd as i128) << 64;
            if width > 0 {
                let end = s + width * *c as i128;
                let mut m = if s > v { (s - v + unit - 1) / unit } else { 0 };
                while (m as usize) < p {
                    let pt = v + m * unit;
                    if pt >= end {
                        break;
                    }
                    let j = ((pt - s) / width) as usize;
                    em.push_range(start_idx + j, 1);
                    m += 1;
                }
                s = end;
            }
            start_idx += c;
        }
    } else {
        let v = Rational::from_bigints(frac.into(), (num_bigint::BigInt::from(1u8)) << 64);
        let mut s = Rational::zero();
        for (q, c) in segs {
            if q.is_positive() {
                let end = &s + q * Rational::from(*c);
                let first = (&s - &v).ceil().max(Rational::zero());
                let mut m = first.to_i64().unwrap_or(0) as usize;
                while m < p {
                    let pt = &v + Rational::from(m);
                    if pt >= end {
                        break;
                    }
                    let j = ((pt - &s) / q).floor().to_i64().unwrap() as usize;
                    em.push_range(start_idx + j, 1);
                    m += 1;
                }
                s = end;
            }
            start_idx += c;
        }
    }
    if em.len() != p {
        return Err(GameError::Defect(format!(
            "proportional sampler produced {} indices for p={p}",
            em.len()
        )));
    }
    Ok(em)
}

/// Picks `p = Σq` distinct indices with `Pr[j selected] = q_j`.
pub fn proportional_sample(q: &[Rational], rng: &mut impl Rng) -> Result<EmptierMove> {
    let segs: Vec<(Rational, usize)> = q.iter().map(|x| (x.clone(), 1)).collect();
    proportional_sample_segments(&segs, rng)
}

/// Samples with probabilities equal to the filler's additions.
pub fn proportional_emptier_round(mv: &FillerMove, rng: &mut impl Rng) -> Result<EmptierMove> {
    proportional_sample_segments(mv.segments(), rng)
}

pub struct ProportionalEmptier {
    rng: ChaCha8Rng,
    seed: u64,
}

impl ProportionalEmptier {
    pub fn new(seed: u64) -> Self {
        ProportionalEmptier { rng: ChaCha8Rng::seed_from_u64(seed), seed }
    }
}

impl EmptierStrategy for ProportionalEmptier {
    fn name(&self) -> String {
        format!("proportional-{}", self.seed)
    }

    fn choose(&mut self, _post: &PostFill, mv: &FillerMove) -> Result<EmptierMove> {
        proportional_emptier_round(mv, &mut self.rng)
    }
}

/// Scales every addition by `1 - ε` and adds `εp/n` to every cup.
pub fn wlog_transform(mv: &FillerMove, epsilon: &Rational, n: usize) -> Result<FillerMove> {
    if !epsilon.is_positive() || *epsilon > Rational::half() {
        return Err(GameError::Precondition(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    if mv.n() != n {
        return Err(GameError::Precondition(format!(
            "move over {} cups, expected {n}",
            mv.n()
        )));
    }
    let keep = Rational::one() - epsilon;
    let floor = epsilon * Rational::from(mv.p()) / Rational::from(n);
    let segs = mv
        .segments()
        .iter()
        .map(|(a, c)| (&keep * a + &floor, *c))
        .collect();
    Ok(FillerMove::from_segments(mv.p(), segs))
}
