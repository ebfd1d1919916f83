//! Majorization, domination and monopolization, with the constructive
//! transfers between related states.

mod cosim;
mod monopoly;
mod transfer;

pub use cosim::{
    stone_cover_move, stone_transfer, CoSimReport, CoSimulation,
};
pub use monopoly::{
    monopolization_witness, transfer_emptier_move, transfer_filler_move, weakly_monopolizes,
    Witness,
};
pub use transfer::{majorization_transfer, mirror_round, negate_round, Transfer};

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::rational::Rational;

/// Values sorted non-increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SortedSeq(Vec<Rational>);

impl SortedSeq {
    pub fn new(mut values: Vec<Rational>) -> Self {
        values.sort_by(|a, b| b.cmp(a));
        SortedSeq(values)
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> Rational {
        self.0.iter().sum()
    }

    pub fn into_vec(self) -> Vec<Rational> {
        self.0
    }
}

impl From<Vec<Rational>> for SortedSeq {
    fn from(v: Vec<Rational>) -> Self {
        SortedSeq::new(v)
    }
}

fn same_len(x: &SortedSeq, y: &SortedSeq) -> Result<()> {
    if x.len() != y.len() {
        return Err(GameError::Precondition(format!(
            "sequences of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Equal sums and prefix-sum dominance.
pub fn majorizes(x: &SortedSeq, y: &SortedSeq) -> Result<bool> {
    same_len(x, y)?;
    let mut dx = Rational::zero();
    for (a, b) in x.values().iter().zip(y.values()) {
        dx = dx + (a - b);
        if dx.is_negative() {
            return Ok(false);
        }
    }
    Ok(dx.is_zero())
}

/// Pointwise dominance of the sorted sequences.
pub fn dominates(x: &SortedSeq, y: &SortedSeq) -> Result<bool> {
    same_len(x, y)?;
    Ok(x.values().iter().zip(y.values()).all(|(a, b)| a >= b))
}

/// Moves `amount` from index `from_index` up to the earlier index `to_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub to_index: usize,
    pub from_index: usize,
    pub amount: Rational,
}

impl Perturbation {
    pub fn apply(&self, v: &mut [Rational]) {
        v[self.to_index] = &v[self.to_index] + &self.amount;
        v[self.from_index] = &v[self.from_index] - &self.amount;
    }
}

/// Steps from `y` to `x`, each moving mass to a lower index by less than one
/// unit and keeping the sequence sorted.
///
/// Each raw step raises the first index where the sequences differ and lowers
/// the last cup of the tie block holding the first later deficit, by the
/// largest amount that keeps `y` sorted and still majorized by `x`.
pub fn perturbation_chain(x: &SortedSeq, y: &SortedSeq) -> Result<Vec<Perturbation>> {
    if !majorizes(x, y)? {
        return Err(GameError::Precondition("x does not majorize y".into()));
    }
    let n = x.len();
    let xs = x.values();
    let mut w: Vec<Rational> = y.values().to_vec();
    let mut out = Vec::new();
    let cap = 4 * n * n + 16;
    for _ in 0..cap {
        let Some(j) = (0..n).find(|&i| xs[i] != w[i]) else {
            return Ok(out);
        };
        let k = (j + 1..n)
            .find(|&i| w[i] > xs[i])
            .ok_or_else(|| GameError::Defect("no deficit after a surplus".into()))?;
        let mut ks = k;
        while ks + 1 < n && w[ks + 1] == w[k] {
            ks += 1;
        }
        let mut eps = (&xs[j] - &w[j]).min(&w[ks] - &xs[ks]);
        let mut prefix = Rational::zero();
        for m in 0..ks {
            prefix = prefix + (&xs[m] - &w[m]);
            if m >= j {
                eps = eps.min(prefix.clone());
            }
        }
        if ks + 1 < n {
            eps = eps.min(&w[ks] - &w[ks + 1]);
        }
        if !eps.is_positive() {
            return Err(GameError::Defect(format!("non-positive step {eps} at ({j}, {ks})")));
        }
        let pieces = if eps >= Rational::one() { eps.floor().to_i64().unwrap() + 1 } else { 1 };
        let piece = &eps / Rational::from_integer(pieces);
        for _ in 0..pieces {
            let p = Perturbation { to_index: j, from_index: ks, amount: piece.clone() };
            p.apply(&mut w);
            out.push(p);
        }
    }
    Err(GameError::Defect(format!("perturbation chain exceeded {cap} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn s(v: &[i64]) -> SortedSeq {
        SortedSeq::new(v.iter().map(|&x| Rational::from_integer(x)).collect())
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&s(&[2, 0, -2]), &s(&[1, 0, -1])).unwrap());
        assert!(!majorizes(&s(&[1, 1]), &s(&[2, 0])).unwrap());
        assert!(majorizes(&s(&[3, 1]), &s(&[3, 1])).unwrap());
        assert!(majorizes(&s(&[1]), &s(&[1, 2])).is_err());
    }

    #[test]
    fn domination_examples() {
        assert!(dominates(&s(&[2, 1, 0]), &s(&[1, 1, 0])).unwrap());
        assert!(!dominates(&s(&[1, 1]), &s(&[2, 0])).unwrap());
    }

    #[test]
    fn chain_examples() {
        let ch = perturbation_chain(&s(&[2, 0]), &s(&[1, 1])).unwrap();
        assert_eq!(ch.len(), 2);
        assert!(ch.iter().all(|p| p.amount == rat(1, 2) && p.to_index == 0 && p.from_index == 1));
        assert!(perturbation_chain(&s(&[1, 1]), &s(&[1, 1])).unwrap().is_empty());
        assert!(perturbation_chain(&s(&[1, 1]), &s(&[2, 0])).is_err());
    }

    #[test]
    fn chain_needs_interior_steps() {
        let x = s(&[2, 0, 0, -2]);
        let y = s(&[1, 1, -1, -1]);
        let ch = perturbation_chain(&x, &y).unwrap();
        let mut w = y.values().to_vec();
        for p in &ch {
            p.apply(&mut w);
            assert!(w.windows(2).all(|t| t[0] >= t[1]));
            assert!(majorizes(&x, &SortedSeq::new(w.clone())).unwrap());
        }
        assert_eq!(w, x.values());
    }
}
