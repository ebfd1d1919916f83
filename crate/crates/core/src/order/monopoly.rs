//! Weak monopolization: one state equals another up to a unit moved from a
//! low cup into a fuller one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{dominates, SortedSeq};
use crate::emptiers::{greedy_empty, TiePolicy};
use crate::error::{GameError, Result};
use crate::game::{apply_emptier_move, validate_filler_move, CupState, EmptierMove, FillerMove};
use crate::rational::Rational;

/// How `a` relates to `b`. Indices are sorted positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    Dominates,
    /// `a[a1] = b[b1] + unit`, `b[b2] = a[a2] + c` with `0 <= c <= unit`,
    /// `a[a1] > b[b2]`, and the remaining cups agree.
    Monopolizes { a1: usize, a2: usize, b1: usize, b2: usize, c: Rational },
}

impl Witness {
    /// Pairs every index of `a` with one of `b`: cup 1 to cup 1, cup 2 to
    /// cup 2, and the rest in sorted order.
    fn pairing(&self, n: usize) -> Vec<usize> {
        match self {
            Witness::Dominates => (0..n).collect(),
            Witness::Monopolizes { a1, a2, b1, b2, .. } => {
                let rest_b: Vec<usize> = (0..n).filter(|i| i != b1 && i != b2).collect();
                let mut out = vec![0; n];
                let mut it = rest_b.into_iter();
                for (i, slot) in out.iter_mut().enumerate() {
                    *slot = if i == *a1 {
                        *b1
                    } else if i == *a2 {
                        *b2
                    } else {
                        it.next().unwrap()
                    };
                }
                out
            }
        }
    }
}

fn counts(s: &CupState) -> BTreeMap<Rational, i64> {
    s.runs().iter().map(|(v, c)| (v.clone(), *c as i64)).collect()
}

fn first_index(s: &CupState, v: &Rational) -> usize {
    s.count_above(v)
}

/// Finds a labeling under which `a` weakly monopolizes `b`.
pub fn monopolization_witness(a: &CupState, b: &CupState) -> Result<Option<Witness>> {
    if a.n() != b.n() || a.variant() != b.variant() {
        return Err(GameError::Precondition("states differ in size or variant".into()));
    }
    if dominates(&SortedSeq::new(a.fills()), &SortedSeq::new(b.fills()))? {
        return Ok(Some(Witness::Dominates));
    }
    let unit = a.variant().unit();
    let ca = counts(a);
    let cb = counts(b);
    // diff = B - A as multisets.
    let mut diff: BTreeMap<Rational, i64> = cb.clone();
    for (v, c) in &ca {
        *diff.entry(v.clone()).or_insert(0) -= c;
    }
    diff.retain(|_, c| *c != 0);
    let deficit: i64 = diff.values().filter(|c| **c < 0).map(|c| -c).sum();
    if deficit > 2 {
        return Ok(None);
    }
    let values: Vec<&Rational> = ca.keys().rev().collect();
    for (i, v1) in values.iter().enumerate() {
        let b1 = *v1 - &unit;
        for v2 in &values[i + 1..] {
            let mut d = diff.clone();
            for v in [*v1, *v2] {
                *d.entry(v.clone()).or_insert(0) += 1;
            }
            if d.values().any(|c| *c < 0) {
                continue;
            }
            match d.get_mut(&b1) {
                Some(c) if *c > 0 => *c -= 1,
                _ => continue,
            }
            d.retain(|_, c| *c != 0);
            let Some((b2, _)) = d.iter().next() else { continue };
            let c = b2 - *v2;
            if c.is_negative() || c > unit || b2 >= *v1 {
                continue;
            }
            let ib1 = first_index(b, &b1);
            let mut ib2 = first_index(b, b2);
            if *b2 == b1 {
                ib2 += 1;
            }
            return Ok(Some(Witness::Monopolizes {
                a1: first_index(a, v1),
                a2: first_index(a, v2),
                b1: ib1,
                b2: ib2,
                c,
            }));
        }
    }
    Ok(None)
}

pub fn weakly_monopolizes(a: &CupState, b: &CupState) -> Result<bool> {
    Ok(monopolization_witness(a, b)?.is_some())
}

fn require_witness(a: &CupState, b: &CupState) -> Result<Witness> {
    monopolization_witness(a, b)?
        .ok_or_else(|| GameError::Precondition("a does not weakly monopolize b".into()))
}

fn post_fill(s: &CupState, adds: &[Rational]) -> Result<CupState> {
    let fills = s.iter().zip(adds).map(|(x, a)| x + a).collect();
    CupState::new(fills, s.variant().clone())
}

/// A filler move on `a` keeping weak monopolization over `b` after `move_b`.
pub fn transfer_filler_move(a: &CupState, b: &CupState, move_b: &FillerMove) -> Result<FillerMove> {
    let w = require_witness(a, b)?;
    validate_filler_move(b, move_b)?;
    let n = a.n();
    let add_b = move_b.additions();
    let pair = w.pairing(n);
    let mut add_a: Vec<Rational> = pair.iter().map(|&j| add_b[j].clone()).collect();
    if let Witness::Monopolizes { a1, a2, b1, b2, .. } = &w {
        let r = add_b[*b1].clone();
        let t = add_b[*b2].clone();
        let top_a = a.fill(*a1) + &r;
        let low_b = b.fill(*b2) + &t;
        if top_a <= low_b {
            let q = a.fill(*a1) - b.fill(*b2);
            let s = &t - &r - &q;
            add_a[*a1] = &r + &s;
            add_a[*a2] = &q + &r;
        }
    }
    let mv = FillerMove::new(move_b.p(), add_a);
    validate_filler_move(a, &mv)?;
    if !weakly_monopolizes(&post_fill(a, &mv.additions())?, &post_fill(b, &add_b)?)? {
        return Err(GameError::Defect("filler transfer lost monopolization".into()));
    }
    Ok(mv)
}

/// An emptier move on post-fill `b` answering greedy on post-fill `a`, so
/// that weak monopolization survives the emptying.
pub fn transfer_emptier_move(a: &CupState, b: &CupState, p: usize) -> Result<EmptierMove> {
    let w = require_witness(a, b)?;
    let n = a.n();
    if p < 1 || p > n {
        return Err(GameError::Precondition(format!("p={p} outside 1..={n}")));
    }
    let greedy = greedy_empty(a, p, TiePolicy::LowestIndex);
    let pair = w.pairing(n);
    let chosen: Vec<usize> = match &w {
        Witness::Dominates => greedy.indices(),
        Witness::Monopolizes { a1, a2, b2, .. } => {
            let (h1, h2) = (greedy.contains(*a1), greedy.contains(*a2));
            match (h1, h2) {
                (true, false) => greedy
                    .indices()
                    .into_iter()
                    .filter(|i| i != a1)
                    .map(|i| pair[i])
                    .chain(std::iter::once(*b2))
                    .collect(),
                (false, true) => {
                    return Err(GameError::Defect("greedy emptied cup 2 but not cup 1".into()))
                }
                _ => greedy.indices().into_iter().map(|i| pair[i]).collect(),
            }
        }
    };
    let em = EmptierMove::from_indices(chosen)?;
    let a2 = apply_emptier_move(a, &greedy, p)?;
    let b2 = apply_emptier_move(b, &em, p)?;
    if !weakly_monopolizes(&a2, &b2)? {
        return Err(GameError::Defect("emptier transfer lost monopolization".into()));
    }
    Ok(em)
}
