use cupgame::emptiers::{greedy_empty, GreedyEmptier, TiePolicy};
use cupgame::fillers::{
    flat_split_move, AdvancedPhase, ChangeLimited, MainFiller, MainFillerPlan, PhaseStep,
    RandomFiller, WarmupFiller,
};
use cupgame::{
    apply_emptier_move, apply_filler_move, rat, run_game, CupState, FillerMove, FillerStrategy,
    GameVariant, Rational, RecordLevel,
};
use proptest::prelude::*;

fn ties(seed: u64) -> [TiePolicy; 3] {
    [TiePolicy::LowestIndex, TiePolicy::HighestIndex, TiePolicy::Random { seed }]
}

fn greedy_round(s: &CupState, mv: &FillerMove, tie: TiePolicy) -> CupState {
    let post = apply_filler_move(s, mv).unwrap();
    let em = greedy_empty(&post, mv.p(), tie);
    apply_emptier_move(&post, &em, mv.p()).unwrap()
}

proptest! {
    #[test]
    fn flat_split_ignores_tie_policy(
        halves in prop::collection::vec(-6i64..6, 2..16),
        pick in any::<prop::sample::Index>(),
        qf in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let fills: Vec<Rational> = halves.iter().map(|&h| rat(h, 2)).collect();
        let s = CupState::new(fills, GameVariant::negative_fill()).unwrap();
        let levels: Vec<_> = s.runs().iter().filter(|r| r.1 >= 2).collect();
        prop_assume!(!levels.is_empty());
        let (level, count) = levels[pick.index(levels.len())].clone();
        let q = 1 + ((count / 2 - 1) as f64 * qf) as usize;
        let mv = flat_split_move(&s, &level, q).unwrap();
        let outs: Vec<CupState> = ties(seed).iter().map(|&t| greedy_round(&s, &mv, t)).collect();
        prop_assert_eq!(&outs[0], &outs[1]);
        prop_assert_eq!(&outs[0], &outs[2]);
        // The split moves q cups up and q down by half a unit.
        prop_assert_eq!(outs[0].count_at(&(&level + rat(1, 2))), s.count_at(&(&level + rat(1, 2))) + q);
    }

    #[test]
    fn phase_invariants_hold(k in 1usize..6, mult in 1usize..4, extra in 0usize..6, seed in any::<u64>()) {
        let m = 4 * k * mult;
        let n = m + extra;
        let mut s = CupState::zeros(n, GameVariant::negative_fill()).unwrap();
        let mut ph = AdvancedPhase::new(Rational::zero(), k, m).unwrap();
        let gain = ph.phi_gain();
        prop_assert_eq!(&gain, &rat(m as i64, 8 * k as i64));
        let half_k = rat(k as i64, 2);
        loop {
            let before = ph.phi();
            match ph.step(&s).unwrap() {
                PhaseStep::Done => break,
                PhaseStep::Move { mv, .. } => {
                    s = greedy_round(&s, &mv, TiePolicy::Random { seed });
                    prop_assert!(ph.consistent_with(&s));
                    prop_assert_eq!(ph.phi() - before, gain.clone());
                    ph.check_invariants().unwrap();
                    prop_assert!(s.is_half_integral());
                    for (lvl, _) in ph.counts() {
                        prop_assert!(lvl.abs() <= half_k);
                    }
                }
            }
        }
        prop_assert!(ph.steps() <= ph.step_bound());
        prop_assert!(4 * ph.top_count() >= m);
    }

    #[test]
    fn change_limited_respects_gap(n in 2usize..10, gap in 1usize..5, seed in any::<u64>()) {
        let inner = RandomFiller::new(n, seed, rat(1, 2)).unwrap();
        let mut f = ChangeLimited::new(inner, gap).unwrap();
        let mut g = GreedyEmptier::default();
        let s = CupState::zeros(n, GameVariant::negative_fill()).unwrap();
        let trace = run_game(s, &mut f, &mut g, 200, RecordLevel::Full).unwrap();
        let ps: Vec<usize> = trace.rounds.iter().map(|r| r.filler_move.p()).collect();
        let mut run = 1;
        let mut first_run = true;
        for w in ps.windows(2) {
            let d = w[1] as i64 - w[0] as i64;
            prop_assert!(d.abs() <= 1);
            if d == 0 {
                run += 1;
            } else {
                prop_assert!(first_run || run >= gap, "changed after {} rounds", run);
                first_run = false;
                run = 1;
            }
        }
    }
}

#[test]
fn warmup_reaches_half_n_under_every_tie_policy() {
    for n in 2..=12usize {
        for tie in ties(n as u64) {
            let mut f = WarmupFiller::new();
            let mut g = GreedyEmptier::new(tie);
            let s = CupState::zeros(n, GameVariant::standard()).unwrap();
            let trace = run_game(s, &mut f, &mut g, n.pow(3), RecordLevel::BacklogOnly).unwrap();
            assert!(f.is_done(), "n={n} {tie:?} not done");
            assert!(trace.max_backlog() >= rat(n as i64 - 1, 2), "n={n} {tie:?}");
        }
    }
}

fn play_main(n: usize, k: usize, tie: TiePolicy) -> MainFiller {
    let plan = MainFillerPlan::new(n, k, Rational::one()).unwrap();
    let mut f = MainFiller::from_plan(plan);
    let mut g = GreedyEmptier::new(tie);
    let s = CupState::zeros(n, GameVariant::negative_fill()).unwrap();
    let mut game = cupgame::Game::new(s, &mut f, &mut g);
    while !game.filler().is_done() {
        game.step().unwrap();
    }
    f
}

#[test]
fn main_filler_within_round_budget_and_phase_guarantee() {
    for (n, k) in [(64, 8), (256, 8), (256, 16), (1024, 16)] {
        for tie in ties(k as u64) {
            let f = play_main(n, k, tie);
            let plan = f.plan().clone();
            assert!(f.derailed().is_none());
            assert!(f.rounds_used() <= plan.target_rounds(), "n={n} k={k}");
            assert!(*f.achieved_backlog().unwrap() >= plan.guaranteed_backlog, "n={n} k={k}");
        }
    }
}

/// The quoted target `r k'` needs each phase to lift its block by `k'`,
/// while a phase of width `k'` only guarantees `k'/2`.
#[test]
fn main_filler_reaches_quoted_backlog_target() {
    for (n, k) in [(256, 16), (1024, 16)] {
        let f = play_main(n, k, TiePolicy::LowestIndex);
        let target = f.plan().target_backlog();
        let got = f.achieved_backlog().unwrap().clone();
        assert!(got >= target, "n={n} k={k}: backlog {got} < r k' = {target}");
    }
}

#[test]
fn halving_branch_reaches_half_k() {
    let f = play_main(64, 3, TiePolicy::HighestIndex);
    assert_eq!(f.rounds_used(), 3);
    assert!(*f.achieved_backlog().unwrap() >= rat(3, 2));
}
