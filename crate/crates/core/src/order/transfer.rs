//! Moving a filler move from a state to a more spread-out one.

use super::{majorizes, perturbation_chain, SortedSeq};
use crate::error::{GameError, Result};
use crate::game::{normalize_filler_move, validate_filler_move, CupState, FillerMove, VariantKind};
use crate::rational::Rational;

/// A move for the majorizing state plus the cases used along the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub mv: FillerMove,
    /// One label per perturbation step, e.g. `"1"`, `"3b"`, `"4:3a"`.
    pub cases: Vec<String>,
}

type Vals = Vec<Rational>;

/// Sorted result of adding `a` and letting greedy empty the `p` fullest cups.
fn outcome(x: &[Rational], a: &[Rational], p: usize) -> Vals {
    let mut post: Vals = x.iter().zip(a).map(|(u, v)| u + v).collect();
    post.sort_by(|u, v| v.cmp(u));
    for v in &mut post[..p] {
        *v = &*v - Rational::one();
    }
    post.sort_by(|u, v| v.cmp(u));
    post
}

fn normalized(x: &[Rational], a: &[Rational]) -> Vals {
    let mut post: Vals = x.iter().zip(a).map(|(u, v)| u + v).collect();
    post.sort_by(|u, v| v.cmp(u));
    post.into_iter().zip(x).map(|(q, u)| q - u).collect()
}

fn mirror(v: &[Rational]) -> Vals {
    v.iter().rev().map(|x| -x).collect()
}

fn complement_rev(a: &[Rational]) -> Vals {
    a.iter().rev().map(|v| Rational::one() - v).collect()
}

/// Cases 2 and 3: the cup receiving the perturbation gets nothing on `y`.
fn zero_at_j(y: &[Rational], mut a: Vals, p: usize, j: usize, k: usize, eps: &Rational) -> (Vals, usize, String) {
    let n = y.len();
    if j >= p {
        return (a, p, "2".into());
    }
    let post = |i: usize| &y[i] + &a[i];
    let lowered = &post(k) - eps;
    let sub = if p < k {
        'a'
    } else if p == k {
        if k + 1 == n || lowered >= post(k + 1) {
            'b'
        } else {
            'c'
        }
    } else if p + 1 == n || lowered >= post(p + 1) {
        'd'
    } else {
        'e'
    };
    a[j] = Rational::one();
    (a, p + 1, format!("3{sub}"))
}

/// One perturbation step: `x` equals `y` except `x[j] = y[j] + eps` and
/// `x[k] = y[k] - eps` with `j < k`. `a` must be normalized on `y`.
fn single_step(
    y: &[Rational],
    mut a: Vals,
    p: usize,
    j: usize,
    k: usize,
    eps: &Rational,
) -> Result<(Vals, usize, String)> {
    let n = y.len();
    let mut y = y.to_vec();
    let mut eps = eps.clone();
    let mut label = String::new();
    loop {
        if p == n {
            label.push('n');
            return Ok((a, p, label));
        }
        if a[j].is_zero() {
            let (b, q, l) = zero_at_j(&y, a, p, j, k, &eps);
            label.push_str(&l);
            return Ok((b, q, label));
        }
        if a[k] == Rational::one() {
            let ym = mirror(&y);
            let am = complement_rev(&a);
            let (jm, km) = (n - 1 - k, n - 1 - j);
            debug_assert!(am[jm].is_zero());
            let (bm, pm, l) = zero_at_j(&ym, am, n - p, jm, km, &eps);
            label.push_str("4:");
            label.push_str(&l);
            if pm == n {
                return Ok((vec![Rational::one(); n], n, label));
            }
            return Ok((complement_rev(&bm), n - pm, label));
        }
        let e1 = a[j].clone().min(Rational::one() - &a[k]).min(eps.clone());
        a[j] = &a[j] - &e1;
        a[k] = &a[k] + &e1;
        if e1 == eps {
            label.push('1');
            return Ok((a, p, label));
        }
        label.push_str("1+");
        y[j] = &y[j] + &e1;
        y[k] = &y[k] - &e1;
        eps = eps - e1;
    }
}

/// Given `x` majorizing `y` and a filler move on `y`, builds a move on `x`
/// whose greedy outcome majorizes the greedy outcome on `y`.
///
/// Walks a perturbation chain from `y` to `x` and rewrites the move once per
/// step. The final majorization is re-checked.
pub fn majorization_transfer(x: &CupState, y: &CupState, move_y: &FillerMove) -> Result<Transfer> {
    for s in [x, y] {
        if s.variant().kind != VariantKind::NegativeFill {
            return Err(GameError::Precondition("majorization transfer needs negative fill".into()));
        }
    }
    validate_filler_move(y, move_y)?;
    let xs = SortedSeq::new(x.fills());
    let ys = SortedSeq::new(y.fills());
    let chain = perturbation_chain(&xs, &ys)?;
    let move_y = normalize_filler_move(y, move_y);
    let p0 = move_y.p();
    let mut w: Vals = ys.values().to_vec();
    let mut a = move_y.additions();
    let mut p = p0;
    let mut cases = Vec::with_capacity(chain.len());
    for step in &chain {
        let mut next = w.clone();
        step.apply(&mut next);
        let (b, q, label) = single_step(&w, a, p, step.to_index, step.from_index, &step.amount)?;
        a = normalized(&next, &b);
        p = q;
        w = next;
        cases.push(label);
    }
    let mv = FillerMove::new(p, a);
    validate_filler_move(x, &mv)?;
    let got = SortedSeq::new(outcome(xs.values(), &mv.additions(), p));
    let want = SortedSeq::new(outcome(ys.values(), &move_y.additions(), p0));
    if !majorizes(&got, &want)? {
        return Err(GameError::Defect("transferred move lost majorization".into()));
    }
    Ok(Transfer { mv, cases })
}

/// The mirrored round: cup `i` receives `1 - a_i` and `n - p` processors run.
/// The hold move maps to itself.
pub fn negate_round(mv: &FillerMove, n: usize) -> FillerMove {
    if mv.p() >= n {
        return FillerMove::hold(n);
    }
    let adds = mv.additions().iter().map(|a| Rational::one() - a).collect();
    FillerMove::new(n - mv.p(), adds)
}

/// [`negate_round`] re-indexed for the negated state, whose sorted order is reversed.
pub fn mirror_round(mv: &FillerMove) -> FillerMove {
    let n = mv.n();
    let neg = negate_round(mv, n);
    if neg.is_hold() {
        return neg;
    }
    let mut adds = neg.additions();
    adds.reverse();
    FillerMove::new(neg.p(), adds)
}
