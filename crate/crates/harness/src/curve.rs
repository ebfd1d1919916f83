//! Measured backlog against the `b(t)` formula, and the greedy envelope.

use anyhow::{bail, Result};
use cupgame::emptiers::GreedyEmptier;
use cupgame::fillers::{MainFiller, MainFillerPlan};
use cupgame::stonegame::bound_b_of_t;
use cupgame::{CupState, GameVariant, Rational, RecordLevel};
use serde::Serialize;

use crate::csvout::{rational_cells, CURVE_SCHEMA};
use crate::run::{play_checked, StopRule};

/// Slack constant on the greedy envelope.
pub const ENVELOPE_C: f64 = 10.0;

/// `C' * min(b(t), sqrt(t) * ln n)`; the second term is `sqrt(t ln n)` with
/// an extra `sqrt(ln n)` of slack.
pub fn envelope(n: usize, t: usize) -> f64 {
    let ln = (n.max(2) as f64).ln();
    let b = bound_b_of_t(n.max(2), t.max(1) as f64).map(|r| r.to_f64()).unwrap_or(f64::INFINITY);
    ENVELOPE_C * b.min((t as f64).sqrt() * ln)
}

/// First round whose backlog exceeds the envelope, as `(t, backlog, bound)`.
/// `backlogs[i]` is the backlog after round `i + 1`.
pub fn envelope_violation(n: usize, backlogs: &[Rational]) -> Option<(usize, f64, f64)> {
    backlogs.iter().enumerate().find_map(|(i, b)| {
        let t = i + 1;
        let (b, bound) = (b.to_f64(), envelope(n, t));
        (b > bound).then_some((t, b, bound))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: usize,
    pub measured: Rational,
    pub bound: Rational,
    /// Candidate that first reached `measured`.
    pub strategy: String,
}

pub struct Curve {
    pub n: usize,
    pub points: Vec<CurvePoint>,
    /// Backlog series of every candidate run, for envelope checks.
    pub series: Vec<(String, Vec<Rational>)>,
}

/// Every feasible lower-bound plan: the halving branch for small `k` and
/// the amplifying branch for powers of two.
fn candidates(n: usize) -> Vec<MainFillerPlan> {
    let mut ks: Vec<usize> = (1..=usize::BITS as usize).take_while(|&k| (1usize << k.min(62)) <= n).collect();
    ks.extend((1..).map(|e| 1usize << e).take_while(|&k| k <= n));
    ks.sort_unstable();
    ks.dedup();
    ks.into_iter()
        .filter_map(|k| MainFillerPlan::new(n, k, Rational::one()).ok())
        .collect()
}

/// Log-spaced horizons `2^lo ..= 2^hi`.
pub fn log_spaced(lo: u32, hi: u32) -> Result<Vec<usize>> {
    if lo > hi || hi > 40 {
        bail!("bad t-range 2^{lo}..2^{hi}");
    }
    Ok((lo..=hi).map(|e| 1usize << e).collect())
}

/// Runs each candidate once for `max(ts)` rounds in the negative-fill game
/// against greedy; the measured value at `t` is the best backlog any
/// candidate held within its first `t` rounds.
pub fn run_curve(n: usize, ts: &[usize]) -> Result<Curve> {
    if n < 2 {
        bail!("curve needs n >= 2");
    }
    if ts.is_empty() || ts.contains(&0) {
        bail!("t-range must be nonempty and positive");
    }
    let horizon = *ts.iter().max().unwrap();
    let mut series = Vec::new();
    for plan in candidates(n) {
        let name = format!("main(k={},{:?})", plan.k, plan.branch).to_lowercase();
        let mut filler = MainFiller::from_plan(plan);
        let stop = StopRule { max_rounds: horizon, target: None, when_done: true };
        let (trace, _) = play_checked(
            CupState::zeros(n, GameVariant::negative_fill())?,
            &mut filler,
            &mut GreedyEmptier::default(),
            &stop,
            RecordLevel::BacklogOnly,
            true,
        )?;
        series.push((name, trace.backlogs));
    }
    let mut points = Vec::new();
    for &t in ts {
        let mut best = (Rational::zero(), String::from("none"));
        for (name, s) in &series {
            if let Some(m) = s.iter().take(t).max() {
                if *m > best.0 {
                    best = (m.clone(), name.clone());
                }
            }
        }
        points.push(CurvePoint { t, measured: best.0, bound: bound_b_of_t(n, t as f64)?, strategy: best.1 });
    }
    Ok(Curve { n, points, series })
}

impl Curve {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "schema", "n", "t", "measured_backlog", "measured_backlog_float", "bound_b_of_t",
            "bound_b_of_t_float", "strategy",
        ])?;
        for p in &self.points {
            let [m, mf] = rational_cells(&p.measured);
            let [b, bf] = rational_cells(&p.bound);
            w.write_record([
                CURVE_SCHEMA.to_string(),
                self.n.to_string(),
                p.t.to_string(),
                m,
                mf,
                b,
                bf,
                p.strategy.clone(),
            ])?;
        }
        Ok(w.into_inner()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measured_column_is_monotone_and_bound_matches() {
        let ts = log_spaced(2, 12).unwrap();
        let c = run_curve(64, &ts).unwrap();
        assert!(c.points.windows(2).all(|w| w[0].measured <= w[1].measured));
        for p in &c.points {
            assert_eq!(p.bound, bound_b_of_t(64, p.t as f64).unwrap());
        }
        assert!(c.points.last().unwrap().measured >= Rational::from(2usize));
        for (name, s) in &c.series {
            assert_eq!(envelope_violation(64, s), None, "{name}");
        }
    }

    #[test]
    fn rejects_empty_range() {
        assert!(run_curve(64, &[]).is_err());
        assert!(log_spaced(5, 4).is_err());
    }
}
