//! Game variants, cup states, and the two half-moves of a round.
//!
//! States, filler moves, and emptier moves are stored run-length encoded.
//! The constructive fillers only ever touch a handful of distinct levels, so
//! a round costs time proportional to the number of runs rather than `n`.
//! All indices are 0-based positions in non-increasing sorted order.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, MoveViolation, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariantKind {
    Standard,
    NegativeFill,
    Augmented,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameVariant {
    pub kind: VariantKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rational>,
}

impl GameVariant {
    pub fn standard() -> Self {
        GameVariant { kind: VariantKind::Standard, epsilon: None }
    }

    pub fn negative_fill() -> Self {
        GameVariant { kind: VariantKind::NegativeFill, epsilon: None }
    }

    /// Resource-augmented game; `epsilon` must lie in (0, 1].
    pub fn augmented(epsilon: Rational) -> Result<Self> {
        if !epsilon.is_positive() || epsilon > Rational::one() {
            return Err(GameError::InvalidVariant(format!(
                "augmentation epsilon {epsilon} outside (0, 1]"
            )));
        }
        Ok(GameVariant { kind: VariantKind::Augmented, epsilon: Some(epsilon) })
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.epsilon) {
            (VariantKind::Augmented, Some(e)) => GameVariant::augmented(e.clone()).map(|_| ()),
            (VariantKind::Augmented, None) => {
                Err(GameError::InvalidVariant("augmented variant needs epsilon".into()))
            }
            (_, Some(_)) => {
                Err(GameError::InvalidVariant("epsilon only applies to augmented".into()))
            }
            _ => Ok(()),
        }
    }

    /// Amount removed from each selected cup.
    pub fn unit(&self) -> Rational {
        match &self.epsilon {
            Some(e) if self.kind == VariantKind::Augmented => Rational::one() + e,
            _ => Rational::one(),
        }
    }

    pub fn allows_negative(&self) -> bool {
        self.kind == VariantKind::NegativeFill
    }

    /// Fill of a cup holding `x` after one emptying.
    pub fn emptied(&self, x: &Rational) -> Rational {
        let v = x - self.unit();
        if self.allows_negative() || !v.is_negative() {
            v
        } else {
            Rational::zero()
        }
    }
}

/// Merges adjacent equal values of a non-increasing run list, dropping empty runs.
pub(crate) fn merge_runs(runs: Vec<(Rational, usize)>) -> Vec<(Rational, usize)> {
    let mut out: Vec<(Rational, usize)> = Vec::with_capacity(runs.len());
    for (v, c) in runs {
        if c == 0 {
            continue;
        }
        match out.last_mut() {
            Some((lv, lc)) if *lv == v => *lc += c,
            _ => out.push((v, c)),
        }
    }
    out
}

/// Sorts `(value, count)` pairs non-increasing and merges equal values.
pub(crate) fn canonical_runs(mut runs: Vec<(Rational, usize)>) -> Vec<(Rational, usize)> {
    let sorted = runs.windows(2).all(|w| w[0].0 >= w[1].0);
    if !sorted {
        runs.sort_by(|a, b| b.0.cmp(&a.0));
    }
    merge_runs(runs)
}

/// A sorted multiset of cup fills.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CupState {
    runs: Vec<(Rational, usize)>,
    n: usize,
    variant: GameVariant,
}

impl CupState {
    pub fn new(fills: Vec<Rational>, variant: GameVariant) -> Result<Self> {
        let runs = fills.into_iter().map(|v| (v, 1)).collect();
        Self::from_runs(runs, variant)
    }

    pub fn zeros(n: usize, variant: GameVariant) -> Result<Self> {
        Self::from_runs(vec![(Rational::zero(), n)], variant)
    }

    /// Builds a state from `(value, count)` pairs in any order.
    pub fn from_runs(runs: Vec<(Rational, usize)>, variant: GameVariant) -> Result<Self> {
        variant.validate()?;
        let runs = canonical_runs(runs);
        let n: usize = runs.iter().map(|r| r.1).sum();
        if n == 0 {
            return Err(GameError::InvalidState("a state needs at least one cup".into()));
        }
        if !variant.allows_negative() && runs.last().is_some_and(|r| r.0.is_negative()) {
            return Err(GameError::InvalidState(format!(
                "negative fill {} in a {:?} game",
                runs.last().unwrap().0,
                variant.kind
            )));
        }
        Ok(CupState { runs, n, variant })
    }

    pub(crate) fn from_runs_unchecked(runs: Vec<(Rational, usize)>, variant: GameVariant) -> Self {
        let runs = canonical_runs(runs);
        let n = runs.iter().map(|r| r.1).sum();
        CupState { runs, n, variant }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> &GameVariant {
        &self.variant
    }

    /// Same fills under a different variant tag.
    pub fn with_variant(&self, variant: GameVariant) -> Result<Self> {
        Self::from_runs(self.runs.clone(), variant)
    }

    /// Distinct levels with their multiplicities, highest first.
    pub fn runs(&self) -> &[(Rational, usize)] {
        &self.runs
    }

    pub fn fills(&self) -> Vec<Rational> {
        self.iter().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.runs.iter().flat_map(|(v, c)| std::iter::repeat(v).take(*c))
    }

    pub fn fill(&self, index: usize) -> &Rational {
        let mut start = 0;
        for (v, c) in &self.runs {
            if index < start + c {
                return v;
            }
            start += c;
        }
        panic!("cup index {index} out of range for {} cups", self.n)
    }

    /// Maximum fill (not maximum absolute value).
    pub fn backlog(&self) -> Rational {
        self.runs[0].0.clone()
    }

    pub fn min_fill(&self) -> Rational {
        self.runs.last().unwrap().0.clone()
    }

    pub fn total(&self) -> Rational {
        self.runs.iter().map(|(v, c)| v * Rational::from(*c)).sum()
    }

    pub fn count_at(&self, level: &Rational) -> usize {
        self.runs.iter().find(|r| &r.0 == level).map_or(0, |r| r.1)
    }

    /// Number of cups strictly above `level`, which is also the first sorted
    /// index holding `level` when that level is present.
    pub fn count_above(&self, level: &Rational) -> usize {
        self.runs.iter().take_while(|r| &r.0 > level).map(|r| r.1).sum()
    }

    pub fn is_half_integral(&self) -> bool {
        self.runs.iter().all(|r| r.0.is_half_integer())
    }

    pub fn negated(&self) -> Self {
        let runs = self.runs.iter().rev().map(|(v, c)| (-v, *c)).collect();
        CupState { runs, n: self.n, variant: self.variant.clone() }
    }

    /// Sum of squared fills.
    pub fn sum_of_squares(&self) -> Rational {
        self.runs.iter().map(|(v, c)| v * v * Rational::from(*c)).sum()
    }
}

/// One filler half-move: `p` processors and per-cup additions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FillerMove {
    p: usize,
    n: usize,
    segs: Vec<(Rational, usize)>,
}

impl FillerMove {
    pub fn new(p: usize, additions: Vec<Rational>) -> Self {
        let n = additions.len();
        let segs = merge_runs(additions.into_iter().map(|a| (a, 1)).collect());
        FillerMove { p, n, segs }
    }

    /// Builds from `(amount, count)` segments listed in index order.
    pub fn from_segments(p: usize, segs: Vec<(Rational, usize)>) -> Self {
        let segs = merge_runs(segs);
        let n = segs.iter().map(|s| s.1).sum();
        FillerMove { p, n, segs }
    }

    /// 1 unit to the top `ones` cups, 1/2 to the next `halves`, nothing elsewhere.
    pub fn prefix(n: usize, ones: usize, halves: usize) -> Self {
        assert!(halves % 2 == 0, "half units must pair up into whole processors");
        assert!(ones + halves <= n, "prefix move longer than the state");
        let segs = vec![
            (Rational::one(), ones),
            (Rational::half(), halves),
            (Rational::zero(), n - ones - halves),
        ];
        FillerMove::from_segments(ones + halves / 2, segs)
    }

    /// `p = n` with every cup receiving 1.
    pub fn hold(n: usize) -> Self {
        FillerMove::prefix(n, n, 0)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn segments(&self) -> &[(Rational, usize)] {
        &self.segs
    }

    pub fn additions(&self) -> Vec<Rational> {
        self.segs
            .iter()
            .flat_map(|(a, c)| std::iter::repeat(a.clone()).take(*c))
            .collect()
    }

    pub fn addition(&self, index: usize) -> &Rational {
        let mut start = 0;
        for (a, c) in &self.segs {
            if index < start + c {
                return a;
            }
            start += c;
        }
        panic!("index {index} out of range for a move over {} cups", self.n)
    }

    pub fn total(&self) -> Rational {
        self.segs.iter().map(|(a, c)| a * Rational::from(*c)).sum()
    }

    pub fn is_hold(&self) -> bool {
        self.p == self.n && self.segs.len() == 1 && self.segs[0].0 == Rational::one()
    }
}

/// Cups selected for emptying, as disjoint ascending `(start, len)` ranges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EmptierMove {
    ranges: Vec<(usize, usize)>,
}

impl EmptierMove {
    /// Rejects repeated indices.
    pub fn from_indices(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(GameError::DuplicateEmptierIndex(w[0]));
            }
        }
        let mut m = EmptierMove::default();
        for i in indices {
            m.push_range(i, 1);
        }
        Ok(m)
    }

    pub fn from_ranges(ranges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut rs: Vec<(usize, usize)> = ranges.into_iter().filter(|r| r.1 > 0).collect();
        rs.sort_unstable();
        let mut m = EmptierMove::default();
        for (s, l) in rs {
            if let Some(&(ps, pl)) = m.ranges.last() {
                if s < ps + pl {
                    return Err(GameError::DuplicateEmptierIndex(s));
                }
            }
            m.push_range(s, l);
        }
        Ok(m)
    }

    /// Appends a range that starts at or after the end of the last one.
    pub(crate) fn push_range(&mut self, start: usize, len: usize) {
        if len == 0 {
            return;
        }
        if let Some(last) = self.ranges.last_mut() {
            debug_assert!(start >= last.0 + last.1);
            if last.0 + last.1 == start {
                last.1 += len;
                return;
            }
        }
        self.ranges.push((start, len));
    }

    pub fn ranges(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    pub fn indices(&self) -> Vec<usize> {
        self.ranges.iter().flat_map(|&(s, l)| s..s + l).collect()
    }

    pub fn len(&self) -> usize {
        self.ranges.iter().map(|r| r.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.ranges.iter().any(|&(s, l)| index >= s && index < s + l)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.ranges.last().map(|&(s, l)| s + l - 1)
    }
}

/// Checks the filler-move invariants against the state's size.
pub fn validate_filler_move(state: &CupState, mv: &FillerMove) -> Result<(), MoveViolation> {
    if mv.n != state.n() {
        return Err(MoveViolation::LengthMismatch { expected: state.n(), got: mv.n });
    }
    if mv.p < 1 || mv.p > mv.n {
        return Err(MoveViolation::ProcessorCount { p: mv.p, n: mv.n });
    }
    let mut start = 0;
    for (a, c) in &mv.segs {
        if a.is_negative() || *a > Rational::one() {
            return Err(MoveViolation::AdditionOutOfRange { index: start, value: a.clone() });
        }
        start += c;
    }
    let sum = mv.total();
    if sum != Rational::from(mv.p) {
        return Err(MoveViolation::SumMismatch { sum, p: mv.p });
    }
    Ok(())
}

/// Walks state runs and move segments together, yielding `(fill, addition, count)`.
fn aligned(state: &CupState, mv: &FillerMove) -> Vec<(Rational, Rational, usize)> {
    let mut out = Vec::with_capacity(state.runs.len() + mv.segs.len());
    let (mut i, mut j) = (0, 0);
    let (mut left_run, mut left_seg) = (
        state.runs.first().map_or(0, |r| r.1),
        mv.segs.first().map_or(0, |s| s.1),
    );
    while i < state.runs.len() && j < mv.segs.len() {
        let take = left_run.min(left_seg);
        out.push((state.runs[i].0.clone(), mv.segs[j].0.clone(), take));
        left_run -= take;
        left_seg -= take;
        if left_run == 0 {
            i += 1;
            left_run = state.runs.get(i).map_or(0, |r| r.1);
        }
        if left_seg == 0 {
            j += 1;
            left_seg = mv.segs.get(j).map_or(0, |s| s.1);
        }
    }
    out
}

/// Rewrites a valid move so the post-fill sequence is non-increasing by index.
///
/// Equivalent to repeatedly exchanging adjacent out-of-order post-fill values
/// while keeping the pre-fill values in place; the end result of that bubble
/// sort is the sorted post-fill sequence, so the new addition at `i` is
/// `sorted_post[i] - x[i]`.
pub fn normalize_filler_move(state: &CupState, mv: &FillerMove) -> FillerMove {
    let parts = aligned(state, mv);
    let posts: Vec<Rational> = parts.iter().map(|(x, a, _)| x + a).collect();
    if posts.windows(2).all(|w| w[0] >= w[1]) {
        return mv.clone();
    }
    let mut sorted: Vec<(Rational, usize)> =
        posts.into_iter().zip(parts.iter().map(|p| p.2)).collect();
    sorted.sort_by(|a, b| b.0.cmp(&a.0));
    // Re-align the sorted post-fill runs against the pre-fill runs.
    let post_state = FillerMove::from_segments(0, sorted);
    let segs = aligned(state, &post_state)
        .into_iter()
        .map(|(x, post, c)| (post - x, c))
        .collect();
    FillerMove::from_segments(mv.p, segs)
}

/// A post-fill configuration in sorted index order, kept aligned with the
/// pre-fill fills and additions so emptiers can see both.
#[derive(Debug, Clone)]
pub struct PostFill {
    segs: Vec<PostSegment>,
    n: usize,
    p: usize,
    variant: GameVariant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostSegment {
    pub fill: Rational,
    pub addition: Rational,
    pub post: Rational,
    pub start: usize,
    pub count: usize,
}

impl PostFill {
    /// Requires a validated, normalized move.
    pub fn build(state: &CupState, mv: &FillerMove) -> Self {
        let mut start = 0;
        let segs = aligned(state, mv)
            .into_iter()
            .map(|(fill, addition, count)| {
                let seg = PostSegment { post: &fill + &addition, fill, addition, start, count };
                start += count;
                seg
            })
            .collect();
        PostFill { segs, n: state.n(), p: mv.p, variant: state.variant().clone() }
    }

    pub fn segments(&self) -> &[PostSegment] {
        &self.segs
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn variant(&self) -> &GameVariant {
        &self.variant
    }

    pub fn to_state(&self) -> CupState {
        let runs = self.segs.iter().map(|s| (s.post.clone(), s.count)).collect();
        CupState::from_runs_unchecked(runs, self.variant.clone())
    }

    /// Applies the emptier's selection; validates its size and range.
    pub fn empty(&self, em: &EmptierMove) -> Result<CupState> {
        if em.len() != self.p {
            return Err(GameError::WrongEmptierSize { expected: self.p, got: em.len() });
        }
        if let Some(m) = em.max_index() {
            if m >= self.n {
                return Err(GameError::EmptierIndexOutOfRange { index: m, n: self.n });
            }
        }
        let mut runs = Vec::with_capacity(self.segs.len() * 2);
        let mut r = 0;
        for seg in &self.segs {
            let (s0, s1) = (seg.start, seg.start + seg.count);
            let mut hit = 0;
            while r < em.ranges.len() {
                let (rs, rl) = em.ranges[r];
                let re = rs + rl;
                if rs >= s1 {
                    break;
                }
                hit += re.min(s1) - rs.max(s0).min(re.min(s1));
                if re <= s1 {
                    r += 1;
                } else {
                    break;
                }
            }
            if hit > 0 {
                runs.push((self.variant.emptied(&seg.post), hit));
            }
            runs.push((seg.post.clone(), seg.count - hit));
        }
        Ok(CupState::from_runs_unchecked(runs, self.variant.clone()))
    }
}

/// Validates, normalizes, and applies the filler half-move.
pub fn apply_filler_move(state: &CupState, mv: &FillerMove) -> Result<CupState> {
    validate_filler_move(state, mv)?;
    let mv = normalize_filler_move(state, mv);
    Ok(PostFill::build(state, &mv).to_state())
}

/// Empties the selected cups of a sorted post-fill state.
pub fn apply_emptier_move(post: &CupState, em: &EmptierMove, p: usize) -> Result<CupState> {
    if em.len() != p {
        return Err(GameError::WrongEmptierSize { expected: p, got: em.len() });
    }
    let zero = FillerMove::from_segments(0, vec![(Rational::zero(), post.n())]);
    let mut pf = PostFill::build(post, &zero);
    pf.p = p;
    pf.empty(em)
}

/// Maximum fill of a state.
pub fn backlog(state: &CupState) -> Rational {
    state.backlog()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn r(v: i64) -> Rational {
        Rational::from_integer(v)
    }

    fn st(fills: &[Rational], v: GameVariant) -> CupState {
        CupState::new(fills.to_vec(), v).unwrap()
    }

    #[test]
    fn validate_examples() {
        let s = CupState::zeros(3, GameVariant::standard()).unwrap();
        let ok = FillerMove::new(2, vec![r(1), rat(1, 2), rat(1, 2)]);
        assert!(validate_filler_move(&s, &ok).is_ok());
        let bad_sum = FillerMove::new(2, vec![r(1), r(1), rat(1, 2)]);
        assert!(matches!(
            validate_filler_move(&s, &bad_sum),
            Err(MoveViolation::SumMismatch { .. })
        ));
        let bad_p = FillerMove::new(4, vec![r(1), r(1), r(1)]);
        assert!(matches!(
            validate_filler_move(&s, &bad_p),
            Err(MoveViolation::ProcessorCount { .. })
        ));
        let neg = FillerMove::new(1, vec![r(2), r(-1), r(0)]);
        assert!(matches!(
            validate_filler_move(&s, &neg),
            Err(MoveViolation::AdditionOutOfRange { .. })
        ));
    }

    #[test]
    fn apply_fill_examples() {
        let v = GameVariant::standard();
        let s = st(&[r(0), r(0)], v.clone());
        let out = apply_filler_move(&s, &FillerMove::new(1, vec![rat(1, 2), rat(1, 2)])).unwrap();
        assert_eq!(out.fills(), vec![rat(1, 2), rat(1, 2)]);
        let s = st(&[r(1), r(0)], v.clone());
        let out = apply_filler_move(&s, &FillerMove::new(1, vec![r(0), r(1)])).unwrap();
        assert_eq!(out.fills(), vec![r(1), r(1)]);
        let s = st(&[r(1), r(1), r(0)], v);
        let out = apply_filler_move(&s, &FillerMove::new(2, vec![r(1), rat(1, 2), rat(1, 2)]))
            .unwrap();
        assert_eq!(out.fills(), vec![r(2), rat(3, 2), rat(1, 2)]);
    }

    #[test]
    fn normalize_examples() {
        let v = GameVariant::negative_fill();
        let s = st(&[r(1), r(0)], v.clone());
        let m = FillerMove::new(1, vec![r(0), r(1)]);
        assert_eq!(normalize_filler_move(&s, &m), m);
        let s = st(&[r(2), r(0)], v.clone());
        assert_eq!(normalize_filler_move(&s, &m), m);
        let s = st(&[r(1), rat(1, 2)], v);
        let n = normalize_filler_move(&s, &m);
        assert_eq!(n.additions(), vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn empty_examples() {
        let post = st(&[rat(1, 2), r(2)], GameVariant::standard());
        let em = EmptierMove::from_indices(vec![0, 1]).unwrap();
        assert_eq!(apply_emptier_move(&post, &em, 2).unwrap().fills(), vec![r(1), r(0)]);
        let post = st(&[rat(1, 2), r(2)], GameVariant::negative_fill());
        assert_eq!(apply_emptier_move(&post, &em, 2).unwrap().fills(), vec![r(1), rat(-1, 2)]);
        let post = st(&[r(2)], GameVariant::augmented(rat(1, 2)).unwrap());
        let em = EmptierMove::from_indices(vec![0]).unwrap();
        assert_eq!(apply_emptier_move(&post, &em, 1).unwrap().fills(), vec![rat(1, 2)]);
        assert!(matches!(
            apply_emptier_move(&post, &em, 2),
            Err(GameError::WrongEmptierSize { .. })
        ));
    }

    #[test]
    fn backlog_examples() {
        let v = GameVariant::negative_fill();
        assert_eq!(backlog(&CupState::zeros(3, v.clone()).unwrap()), r(0));
        assert_eq!(backlog(&st(&[rat(3, 2), rat(1, 2), rat(-1, 2)], v.clone())), rat(3, 2));
        assert_eq!(backlog(&st(&[r(-1), r(-2)], v)), r(-1));
    }

    #[test]
    fn standard_rejects_negative_state() {
        assert!(CupState::new(vec![r(-1)], GameVariant::standard()).is_err());
        assert!(GameVariant::augmented(r(0)).is_err());
        assert!(GameVariant::augmented(r(2)).is_err());
    }

    #[test]
    fn emptier_ranges_merge_and_reject_duplicates() {
        let m = EmptierMove::from_indices(vec![3, 1, 2, 7]).unwrap();
        assert_eq!(m.ranges(), &[(1, 3), (7, 1)]);
        assert!(EmptierMove::from_indices(vec![1, 1]).is_err());
        assert!(EmptierMove::from_ranges([(0, 3), (2, 1)]).is_err());
    }

    #[test]
    fn prefix_move_shape() {
        let m = FillerMove::prefix(6, 2, 2);
        assert_eq!(m.p(), 3);
        assert_eq!(m.additions(), vec![r(1), r(1), rat(1, 2), rat(1, 2), r(0), r(0)]);
        assert!(FillerMove::hold(4).is_hold());
    }
}
