//! Randomized and exhaustive property suites behind `cupgame verify`.
//!
//! Case `i` of a run with base seed `s` uses seed `s + i`, so any failing
//! case can be replayed alone with `--seed <case seed> --iterations 1`.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{bail, Result};
use cupgame::emptiers::{proportional_sample, GreedyEmptier, Oracle, OracleConfig, OracleEmptier};
use cupgame::fillers::RandomFiller;
use cupgame::order::{
    dominates, majorization_transfer, majorizes, mirror_round, negate_round, perturbation_chain,
    stone_cover_move, stone_transfer, transfer_emptier_move, transfer_filler_move,
    weakly_monopolizes, CoSimulation, SortedSeq,
};
use cupgame::stonegame::{
    enumerate_valid_moves, level_report, no_gaps_check, phi, phi_a, psi, psi_a,
};
use cupgame::{
    apply_filler_move, apply_stone_move, play_moves, rat, CupState, FillerMove, FillerStrategy,
    GameVariant, Rational, StoneMove, StoneState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curve::{envelope, envelope_violation};

pub const SUITES: &[&str] = &[
    "order-fuzz",
    "potentials",
    "no-gaps",
    "oracle-equivalence",
    "cosimulation",
    "proportional-marginals",
];

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    /// Number of cases; each suite has its own default.
    pub iterations: Option<usize>,
    /// Per-case size: moves per game, rounds per co-simulation, draws per
    /// vector, or the oracle horizon.
    pub length: Option<usize>,
    pub seed: u64,
    /// Debug builds only: report a synthetic violation in this case.
    pub inject_failure: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub case: usize,
    pub seed: u64,
    pub message: String,
    pub reproduce: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub iterations: usize,
    pub length: usize,
    pub checks: u64,
    pub violations: usize,
    pub passed: bool,
    /// The first few failures, in case order.
    pub failures: Vec<Failure>,
    pub details: Value,
    pub elapsed_s: f64,
}

/// What one passing case contributes to the report.
#[derive(Debug, Default)]
struct CaseOk {
    checks: u64,
    tags: BTreeMap<String, u64>,
    /// Largest value of the suite's headline ratio seen in this case.
    worst: f64,
}

impl CaseOk {
    fn tag(&mut self, name: impl Into<String>, by: u64) {
        *self.tags.entry(name.into()).or_insert(0) += by;
    }
}

type CaseResult = std::result::Result<CaseOk, String>;

macro_rules! ensure {
    ($ok:expr, $cond:expr, $($msg:tt)+) => {
        $ok.checks += 1;
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn lift<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

const MAX_LISTED: usize = 10;

fn drive(
    suite: &str,
    opts: &SuiteOptions,
    iterations: usize,
    length: usize,
    case: impl Fn(usize, u64, usize) -> CaseResult + Sync,
) -> SuiteReport {
    let start = Instant::now();
    let results: Vec<CaseResult> = (0..iterations)
        .into_par_iter()
        .map(|i| {
            if opts.inject_failure == Some(i) {
                return Err("injected failure".to_string());
            }
            case(i, opts.seed.wrapping_add(i as u64), length)
        })
        .collect();
    let mut checks = 0;
    let mut tags = BTreeMap::new();
    let mut worst = 0f64;
    let mut failures = Vec::new();
    let mut violations = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(ok) => {
                checks += ok.checks;
                worst = worst.max(ok.worst);
                for (k, v) in ok.tags {
                    *tags.entry(k).or_insert(0u64) += v;
                }
            }
            Err(message) => {
                violations += 1;
                if failures.len() < MAX_LISTED {
                    let seed = opts.seed.wrapping_add(i as u64);
                    failures.push(Failure {
                        case: i,
                        seed,
                        message,
                        reproduce: format!(
                            "cupgame verify {suite} --seed {seed} --iterations 1 --length {length}"
                        ),
                    });
                }
            }
        }
    }
    SuiteReport {
        suite: suite.into(),
        seed: opts.seed,
        iterations,
        length,
        checks,
        violations,
        passed: violations == 0,
        failures,
        details: json!({ "tags": tags, "worst": worst }),
        elapsed_s: start.elapsed().as_secs_f64(),
    }
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    if opts.inject_failure.is_some() && !cfg!(debug_assertions) {
        bail!("failure injection is only available in debug builds");
    }
    let it = |d: usize| opts.iterations.unwrap_or(d);
    let len = |d: usize| opts.length.unwrap_or(d);
    Ok(match name {
        "order-fuzz" => drive(name, opts, it(10_000), len(20), order_case),
        "potentials" => drive(name, opts, it(100_000), len(1), potentials_case),
        "no-gaps" => drive(name, opts, it(1_000), len(1_000), no_gaps_case),
        "oracle-equivalence" => {
            let horizon = len(3);
            let cases = oracle_cases();
            let n = opts.iterations.unwrap_or(cases.len()).min(cases.len());
            drive(name, opts, n, horizon, move |i, _, t| oracle_case(&cases[i], t))
        }
        "cosimulation" => drive(name, opts, it(1_000), len(1_000), cosim_case),
        "proportional-marginals" => drive(name, opts, it(20), len(100_000), marginals_case),
        other => bail!("unknown suite '{other}' (known: {})", SUITES.join(", ")),
    })
}

// ---------------------------------------------------------------- generators

/// Moves mass from lower to higher entries, so the result majorizes `y`.
fn spread(y: &[Rational], steps: usize, rng: &mut impl Rng) -> Vec<Rational> {
    let mut x = y.to_vec();
    let n = x.len();
    for _ in 0..steps {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let (hi, lo) = if x[i] >= x[j] { (i, j) } else { (j, i) };
        let d = rat(rng.gen_range(1..=6), 4);
        x[hi] = &x[hi] + &d;
        x[lo] = &x[lo] - &d;
    }
    x
}

/// A filler move with quarter-unit additions.
fn quarter_move(n: usize, rng: &mut impl Rng) -> FillerMove {
    let p = rng.gen_range(1..=n);
    let mut q = vec![0i64; n];
    let mut left = 4 * p;
    while left > 0 {
        let i = rng.gen_range(0..n);
        if q[i] < 4 {
            q[i] += 1;
            left -= 1;
        }
    }
    FillerMove::new(p, q.into_iter().map(|v| rat(v, 4)).collect())
}

fn quarters(rng: &mut impl Rng, len: usize, lo: i64, hi: i64) -> Vec<Rational> {
    (0..len).map(|_| rat(rng.gen_range(lo..hi), 4)).collect()
}

fn nf(v: Vec<Rational>) -> std::result::Result<CupState, String> {
    lift(CupState::new(v, GameVariant::negative_fill()))
}

fn random_stone_move(s: &StoneState, rng: &mut impl Rng) -> Option<StoneMove> {
    let moves = enumerate_valid_moves(s);
    if moves.is_empty() {
        return None;
    }
    let (k, qmax) = moves[rng.gen_range(0..moves.len())];
    Some(StoneMove::new(k, rng.gen_range(1..=qmax)))
}

// ---------------------------------------------------------------- order-fuzz

fn order_case(_: usize, seed: u64, rounds: usize) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = CaseOk::default();
    chain_check(&mut rng, &mut ok)?;
    majorization_check(&mut rng, &mut ok)?;
    monopoly_check(&mut rng, &mut ok)?;
    order_laws_check(&mut rng, &mut ok)?;
    stone_checks(&mut rng, &mut ok)?;
    mirror_check(&mut rng, &mut ok, seed, rounds)?;
    Ok(ok)
}

fn chain_check(rng: &mut ChaCha8Rng, ok: &mut CaseOk) -> std::result::Result<(), String> {
    let n = rng.gen_range(1..12);
    let y = SortedSeq::new(quarters(rng, n, -32, 32));
    let steps = rng.gen_range(0..8);
    let x = SortedSeq::new(spread(y.values(), steps, rng));
    let chain = lift(perturbation_chain(&x, &y))?;
    let mut w = y.values().to_vec();
    for p in &chain {
        ensure!(ok, p.to_index < p.from_index, "chain step {p:?} raises a later index");
        ensure!(ok, p.amount.is_positive() && p.amount < Rational::one(), "chain amount {} outside (0,1)", p.amount);
        p.apply(&mut w);
        ensure!(ok, w.windows(2).all(|t| t[0] >= t[1]), "chain left {w:?} unsorted");
    }
    ensure!(ok, w.as_slice() == x.values(), "chain from {y:?} ends at {w:?}, not {x:?}");
    ok.tag("perturbation-steps", chain.len() as u64);
    Ok(())
}

fn majorization_check(rng: &mut ChaCha8Rng, ok: &mut CaseOk) -> std::result::Result<(), String> {
    let n = rng.gen_range(1..12);
    let ys = quarters(rng, n, -32, 32);
    let steps = rng.gen_range(0..8);
    let xs = spread(&ys, steps, rng);
    let (x, y) = (nf(xs)?, nf(ys)?);
    let mv = quarter_move(n, rng);
    let t = lift(majorization_transfer(&x, &y, &mv))?;
    let mut g = GreedyEmptier::default();
    let xo = lift(play_moves(&x, &t.mv, &mut g))?.2;
    let yo = lift(play_moves(&y, &mv, &mut g))?.2;
    let holds = lift(majorizes(&SortedSeq::new(xo.fills()), &SortedSeq::new(yo.fills())))?;
    ensure!(ok, holds, "majorization lost: x={x:?} y={y:?} move={mv:?}");
    for c in t.cases {
        ok.tag(format!("majorization-case-{c}"), 1);
    }
    Ok(())
}

fn monopoly_check(rng: &mut ChaCha8Rng, ok: &mut CaseOk) -> std::result::Result<(), String> {
    let variant = match rng.gen_range(0..=4) {
        0 => GameVariant::standard(),
        e => lift(GameVariant::augmented(rat(e, 4)))?,
    };
    let unit = variant.unit();
    let dominating = rng.gen_bool(0.25);
    let (av, bv) = loop {
        let n = rng.gen_range(2..10);
        let mut bv = quarters(rng, n, 0, 12);
        bv.sort_by(|x, y| y.cmp(x));
        let mut av = bv.clone();
        if dominating {
            for v in &mut av {
                *v = &*v + rat(rng.gen_range(0..3), 4);
            }
            break (av, bv);
        }
        let (i1, i2) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let c = (rat(rng.gen_range(0..=4), 4) * &unit).min(bv[i2].clone());
        if i1 != i2 && &bv[i1] + &unit > bv[i2] {
            av[i1] = &bv[i1] + &unit;
            av[i2] = &bv[i2] - &c;
            break (av, bv);
        }
    };
    let n = av.len();
    let a = lift(CupState::new(av, variant.clone()))?;
    let b = lift(CupState::new(bv, variant))?;
    ensure!(ok, lift(weakly_monopolizes(&a, &b))?, "generated pair is not related: {a:?} {b:?}");
    let mv = quarter_move(n, rng);
    let amv = lift(transfer_filler_move(&a, &b, &mv))?;
    let (pa, pb) = (lift(apply_filler_move(&a, &amv))?, lift(apply_filler_move(&b, &mv))?);
    ensure!(ok, lift(weakly_monopolizes(&pa, &pb))?, "filler transfer lost the relation: {a:?} {b:?} {mv:?}");
    lift(transfer_emptier_move(&pa, &pb, mv.p()))?;
    ok.checks += 1;
    ok.tag(if dominating { "transfer-dominating" } else { "transfer-monopolizing" }, 1);
    Ok(())
}

fn order_laws_check(rng: &mut ChaCha8Rng, ok: &mut CaseOk) -> std::result::Result<(), String> {
    let n = rng.gen_range(1..10);
    let y: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-8..8), 2)).collect();
    let bumps: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(0..3), 2)).collect();
    let x: Vec<Rational> = y.iter().zip(&bumps).map(|(a, b)| a + b).collect();
    let (xs, ys) = (SortedSeq::new(x.clone()), SortedSeq::new(y.clone()));
    ensure!(ok, lift(dominates(&xs, &ys))?, "pointwise bump not dominating");
    if xs.sum() == ys.sum() {
        ensure!(ok, xs == ys, "equal sums under domination but {xs:?} != {ys:?}");
    }
    let xm = spread(&y, 3, rng);
    let extra: Vec<Rational> = (0..rng.gen_range(0..6)).map(|_| rat(rng.gen_range(-8..8), 2)).collect();
    let xa = SortedSeq::new([xm, extra.clone()].concat());
    let ya = SortedSeq::new([y, extra].concat());
    ensure!(ok, lift(majorizes(&xa, &ya))?, "appending common values broke majorization");
    Ok(())
}

fn stone_checks(rng: &mut ChaCha8Rng, ok: &mut CaseOk) -> std::result::Result<(), String> {
    let n = rng.gen_range(2..16);
    let y: Vec<i64> = (0..n).map(|_| rng.gen_range(-4..4)).collect();
    let ys = lift(StoneState::new(y, None))?;
    let xs: Vec<i64> = ys.positions().iter().map(|v| v + rng.gen_range(0..3)).collect();
    let xs = lift(StoneState::new(xs, None))?;
    if let Some(mv) = random_stone_move(&ys, rng) {
        let y2 = lift(apply_stone_move(&ys, mv))?;
        let x2 = match lift(stone_transfer(&xs, &ys, mv))? {
            Some(m) => lift(apply_stone_move(&xs, m))?,
            None => xs.clone(),
        };
        let holds = x2.positions().iter().zip(y2.positions()).all(|(a, b)| a >= b);
        ensure!(ok, holds, "stone transfer lost domination: x={xs:?} y={ys:?} {mv:?}");
    }

    let n = rng.gen_range(1..14);
    let s = nf((0..n).map(|_| Rational::from_integer(2 * rng.gen_range(-4..4))).collect())?;
    let mv = quarter_move(n, rng);
    let out = lift(play_moves(&s, &mv, &mut GreedyEmptier::default()))?.2;
    let mut cover = s.fills();
    if let Some((k, count)) = lift(stone_cover_move(&s, &mv))? {
        let start = s.count_above(&k);
        let end = start + s.count_at(&k);
        for v in &mut cover[start..start + count] {
            *v = &*v + rat(2, 1);
        }
        for v in &mut cover[end - count..end] {
            *v = &*v - rat(2, 1);
        }
    }
    let holds = lift(majorizes(&SortedSeq::new(cover), &SortedSeq::new(out.fills())))?;
    ensure!(ok, holds, "stone cover does not majorize: {s:?} {mv:?}");
    Ok(())
}

fn mirror_check(rng: &mut ChaCha8Rng, ok: &mut CaseOk, seed: u64, rounds: usize) -> std::result::Result<(), String> {
    let n = rng.gen_range(1..12);
    let mut f = lift(RandomFiller::new(n, seed, rat(1, 4)))?;
    let mut g = GreedyEmptier::default();
    let mut s = lift(CupState::zeros(n, GameVariant::negative_fill()))?;
    let mut m = s.clone();
    for r in 0..rounds {
        let mv = lift(f.next_move(&s))?;
        let back = negate_round(&negate_round(&mv, n), n);
        ensure!(ok, back.additions() == mv.additions() || mv.is_hold(), "negation is not an involution on {mv:?}");
        s = lift(play_moves(&s, &mv, &mut g))?.2;
        m = lift(play_moves(&m, &mirror_round(&mv), &mut g))?.2;
        ensure!(ok, m == s.negated(), "mirror game diverged in round {}", r + 1);
    }
    Ok(())
}

// ---------------------------------------------------------------- stone suites

fn potentials_case(_: usize, seed: u64, moves: usize) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = CaseOk::default();
    let checkpoint = rng.gen_bool(0.5).then(|| rng.gen_range(1..5i64));
    let lo = if checkpoint.is_some() { 0 } else { -6 };
    // Redraw until some level holds two stones.
    let mut s = loop {
        let n = rng.gen_range(2..24);
        let pos: Vec<i64> = (0..n).map(|_| rng.gen_range(lo..12)).collect();
        let s = lift(StoneState::new(pos, checkpoint))?;
        if !enumerate_valid_moves(&s).is_empty() {
            break s;
        }
    };
    for _ in 0..moves {
        let Some(mv) = random_stone_move(&s, &mut rng) else { break };
        let t = lift(apply_stone_move(&s, mv))?;
        let q = mv.q as i128;
        let sum = |x: &StoneState| x.positions().iter().sum::<i64>();
        match checkpoint {
            Some(l) if s.is_checkpoint(mv.k) => {
                let a = mv.k / l;
                let na = t.positions().partition_point(|&x| x >= a * l);
                let dphi = phi_a(&t, a, l, na) - phi_a(&s, a, l, na);
                let dpsi = psi_a(&t, a, l, na) - psi_a(&s, a, l, na);
                ensure!(ok, dphi == q, "checkpoint move {mv:?} on {s:?}: dPhi_a = {dphi}, q = {q}");
                ensure!(ok, dpsi >= q * q, "checkpoint move {mv:?} on {s:?}: dPsi_a = {dpsi} < q^2");
                ensure!(ok, sum(&t) == sum(&s) + mv.q as i64, "checkpoint move changed the sum wrongly");
                ok.tag("checkpoint-moves", 1);
            }
            _ => {
                let (dphi, dpsi) = (phi(&t) - phi(&s), psi(&t) - psi(&s));
                ensure!(ok, dphi == 2 * q, "move {mv:?} on {s:?}: dPhi = {dphi}, q = {q}");
                ensure!(ok, dpsi >= 2 * q * q, "move {mv:?} on {s:?}: dPsi = {dpsi} < 2q^2");
                ensure!(ok, sum(&t) == sum(&s), "move {mv:?} changed the stone sum");
                ok.tag("plain-moves", 1);
            }
        }
        s = t;
    }
    Ok(ok)
}

fn no_gaps_case(_: usize, seed: u64, length: usize) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = CaseOk::default();
    // Smaller games run out of legal moves well before 10^3 moves.
    let n = rng.gen_range(64..=160);
    let l = rng.gen_range(1..=5i64);
    let init = lift(StoneState::zeros(n, Some(l)))?;
    let mut s = init.clone();
    let mut moves = Vec::with_capacity(length);
    for t in 0..length {
        let Some(mv) = random_stone_move(&s, &mut rng) else { break };
        s = lift(apply_stone_move(&s, mv))?;
        moves.push(mv);
        ensure!(ok, no_gaps_check(&s).is_ok(), "gap after move {} (n={n}, l={l}): {:?}", t + 1, s.positions());
    }
    level_check(&init, &moves, &mut ok)?;
    ok.tag("moves", moves.len() as u64);
    if moves.len() < length {
        ok.tag("stuck-games", 1);
    }
    Ok(ok)
}

/// Per-band accounting on a checkpointed trace.
pub fn level_check_report(init: &StoneState, moves: &[StoneMove]) -> std::result::Result<usize, String> {
    let rep = lift(level_report(init, moves))?;
    if !rep.ok() {
        return Err(format!("level report: {}", rep.violations.join("; ")));
    }
    let per_band: usize = rep.levels.iter().map(|s| s.steps).sum();
    if per_band != rep.total_steps {
        return Err(format!("band steps {per_band} != {} moves", rep.total_steps));
    }
    Ok(rep.levels.len())
}

fn level_check(init: &StoneState, moves: &[StoneMove], ok: &mut CaseOk) -> std::result::Result<(), String> {
    let bands = level_check_report(init, moves)?;
    ok.checks += 1;
    ok.tag("level-reports", 1);
    ok.tag("bands", bands as u64);
    Ok(())
}

// ---------------------------------------------------------------- oracle

struct OracleCase {
    variant: GameVariant,
    n: usize,
}

fn oracle_cases() -> Vec<OracleCase> {
    let mut out = Vec::new();
    for variant in [GameVariant::standard(), GameVariant::negative_fill()] {
        for n in [2, 3] {
            out.push(OracleCase { variant: variant.clone(), n });
        }
    }
    out
}

/// Sorted fill vectors over `{0, 1/2, 1}`.
fn start_states(n: usize) -> Vec<Vec<Rational>> {
    let vals = [rat(1, 1), rat(1, 2), rat(0, 1)];
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                let lo = v.last().copied().unwrap_or(0);
                (lo..3).map(move |i| [v.clone(), vec![i]].concat())
            })
            .collect();
    }
    out.into_iter().map(|v| v.into_iter().map(|i| vals[i].clone()).collect()).collect()
}

fn oracle_case(case: &OracleCase, horizon: usize) -> CaseResult {
    let mut ok = CaseOk::default();
    let cfg = lift(OracleConfig::new(rat(1, 2), horizon, 50_000_000))?;
    let mut free = lift(Oracle::new(cfg.clone(), OracleEmptier::Free))?;
    let mut greedy = lift(Oracle::new(cfg, OracleEmptier::Greedy))?;
    for fills in start_states(case.n) {
        let s = lift(CupState::new(fills, case.variant.clone()))?;
        for t in 0..=horizon {
            let (a, b) = (lift(free.value(&s, t))?, lift(greedy.value(&s, t))?);
            ensure!(ok, a == b, "{:?} n={} start {:?} t={t}: free {a} != greedy {b}", case.variant.kind, case.n, s.fills());
        }
    }
    ok.tag("nodes", (free.nodes() + greedy.nodes()) as u64);
    Ok(ok)
}

// ---------------------------------------------------------------- co-simulation

/// Greedy backlog series of a co-simulated game.
fn cosim_case(_: usize, seed: u64, rounds: usize) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = CaseOk::default();
    let n = rng.gen_range(2..=32);
    let l = rng.gen_range(1..=4i64);
    let grid = [rat(1, 1), rat(1, 2), rat(1, 4)][rng.gen_range(0..3)].clone();
    let mut f = lift(RandomFiller::new(n, seed, grid))?;
    let mut sim = lift(CoSimulation::new(n, l))?;
    let mut backlogs = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mv = lift(f.next_move(sim.cups()))?;
        // Checks majorization and domination internally.
        lift(sim.step(&mv))?;
        ok.checks += 2;
        backlogs.push(sim.cups().backlog());
    }
    let rep = sim.report();
    ensure!(ok, Rational::from_integer(2 * rep.max_stone) >= rep.max_cup_backlog, "stones fell below the cups");
    ensure!(ok, rep.max_checkpoint_stone >= rep.max_stone, "checkpointed stones fell below the plain ones");
    // Envelope overruns are counted, not failed: they belong to a separate
    // empirical check.
    if envelope_violation(n, &backlogs).is_some() {
        ok.tag("envelope-violations", 1);
    }
    let init = lift(StoneState::zeros(n, Some(l)))?;
    level_check(&init, &rep.checkpoint_moves, &mut ok)?;
    for (c, k) in &rep.cases {
        ok.tag(format!("majorization-case-{c}"), *k as u64);
    }
    ok.tag("rounds", rep.rounds as u64);
    ok.worst = backlogs
        .iter()
        .enumerate()
        .map(|(i, b)| b.to_f64() / envelope(n, i + 1))
        .fold(0.0, f64::max);
    Ok(ok)
}

// ---------------------------------------------------------------- marginals

/// A random probability vector with denominator `d` and integer sum.
fn random_q(rng: &mut impl Rng) -> Vec<Rational> {
    let n = rng.gen_range(2..=10);
    let d = rng.gen_range(2..=12i64);
    let p = rng.gen_range(1..n) as i64;
    let mut units = vec![0i64; n];
    let mut left = p * d;
    while left > 0 {
        let i = rng.gen_range(0..n);
        if units[i] < d {
            units[i] += 1;
            left -= 1;
        }
    }
    units.into_iter().map(|u| rat(u, d)).collect()
}

/// Largest per-index deviation in binomial standard deviations.
fn marginals_case(_: usize, seed: u64, draws: usize) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = CaseOk::default();
    let q = random_q(&mut rng);
    let p = q.iter().sum::<Rational>().to_i64().unwrap() as usize;
    let mut hits = vec![0u64; q.len()];
    for _ in 0..draws {
        let em = lift(proportional_sample(&q, &mut rng))?;
        let idx = em.indices();
        ensure!(ok, idx.len() == p && idx.windows(2).all(|w| w[0] < w[1]), "draw {idx:?} is not {p} distinct indices");
        for i in idx {
            hits[i] += 1;
        }
    }
    let mut worst = 0f64;
    for (j, (h, qj)) in hits.iter().zip(&q).enumerate() {
        let pj = qj.to_f64();
        let mean = draws as f64 * pj;
        let sd = (draws as f64 * pj * (1.0 - pj)).sqrt();
        let dev = (*h as f64 - mean).abs();
        if sd == 0.0 {
            ensure!(ok, dev == 0.0, "index {j} with q={qj} hit {h} of {draws} times");
        } else {
            let z = dev / sd;
            worst = worst.max(z);
            ensure!(ok, z <= 3.0, "index {j}: q={qj}, {h} hits of {draws}, z={z:.2} (q={q:?})");
        }
    }
    ok.worst = worst;
    ok.tag("indices", q.len() as u64);
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, iterations: usize, length: usize) -> SuiteReport {
        let opts = SuiteOptions { iterations: Some(iterations), length: Some(length), ..Default::default() };
        run_suite(name, &opts).unwrap()
    }

    #[test]
    fn small_runs_pass() {
        for (name, it, len) in [
            ("order-fuzz", 200, 10),
            ("potentials", 500, 4),
            ("no-gaps", 20, 200),
            ("oracle-equivalence", 4, 2),
            ("cosimulation", 10, 100),
            ("proportional-marginals", 3, 20_000),
        ] {
            let r = small(name, it, len);
            assert!(r.passed, "{name}: {:?}", r.failures);
            assert!(r.checks > 0, "{name}");
        }
    }

    #[test]
    fn start_states_are_sorted_multisets() {
        assert_eq!(start_states(2).len(), 6);
        assert_eq!(start_states(3).len(), 10);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("bogus", &SuiteOptions::default()).is_err());
    }

    #[cfg(debug_assertions)]
    #[test]
    fn injected_failure_carries_a_reproducer() {
        let opts = SuiteOptions {
            iterations: Some(5),
            length: Some(1),
            seed: 40,
            inject_failure: Some(3),
        };
        let r = run_suite("potentials", &opts).unwrap();
        assert!(!r.passed);
        assert_eq!(r.failures[0].seed, 43);
        assert!(r.failures[0].reproduce.contains("--seed 43"));
    }
}
