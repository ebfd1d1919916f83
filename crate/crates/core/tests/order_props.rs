use cupgame::emptiers::GreedyEmptier;
use cupgame::fillers::{flat_split_move, RandomFiller};
use cupgame::order::{
    dominates, majorization_transfer, majorizes, mirror_round, negate_round, perturbation_chain,
    stone_cover_move, stone_transfer, transfer_emptier_move, transfer_filler_move,
    weakly_monopolizes, CoSimulation, SortedSeq,
};
use cupgame::stonegame::{apply_stone_move, enumerate_valid_moves, StoneMove, StoneState};
use cupgame::{
    apply_filler_move, play_moves, rat, CupState, FillerMove, FillerStrategy, GameVariant,
    Rational,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seq(v: &[i64], den: i64) -> SortedSeq {
    SortedSeq::new(v.iter().map(|&x| rat(x, den)).collect())
}

/// Spreads `y` by moving mass from smaller to larger entries; the result
/// majorizes `y`.
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

fn random_move(n: usize, rng: &mut impl Rng) -> FillerMove {
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

fn nf(v: Vec<Rational>) -> CupState {
    CupState::new(v, GameVariant::negative_fill()).unwrap()
}

proptest! {
    #[test]
    fn majorization_is_a_partial_order(y in prop::collection::vec(-8i64..8, 1..10), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = seq(&y, 4);
        let x = SortedSeq::new(spread(y.values(), 4, &mut rng));
        let w = SortedSeq::new(spread(x.values(), 4, &mut rng));
        prop_assert!(majorizes(&y, &y).unwrap());
        prop_assert!(majorizes(&x, &y).unwrap());
        prop_assert!(majorizes(&w, &x).unwrap());
        prop_assert!(majorizes(&w, &y).unwrap());
        if majorizes(&y, &x).unwrap() {
            prop_assert_eq!(&x, &y);
        }
    }

    #[test]
    fn domination_with_equal_sums_is_equality(y in prop::collection::vec(-8i64..8, 1..10), bumps in prop::collection::vec(0i64..3, 10)) {
        let y = seq(&y, 2);
        let x = SortedSeq::new(y.values().iter().zip(&bumps).map(|(v, b)| v + rat(*b, 2)).collect());
        prop_assert!(dominates(&x, &y).unwrap());
        if x.sum() == y.sum() {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn unsorted_pointwise_dominance_survives_sorting(y in prop::collection::vec(-8i64..8, 1..12), bumps in prop::collection::vec(0i64..5, 12)) {
        let x: Vec<Rational> = y.iter().zip(&bumps).map(|(v, b)| rat(v + b, 2)).collect();
        let y: Vec<Rational> = y.iter().map(|&v| rat(v, 2)).collect();
        prop_assert!(dominates(&SortedSeq::new(x), &SortedSeq::new(y)).unwrap());
    }

    #[test]
    fn appending_common_values_keeps_majorization(
        y in prop::collection::vec(-8i64..8, 1..8),
        common in prop::collection::vec(-8i64..8, 0..8),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<Rational> = y.iter().map(|&v| rat(v, 2)).collect();
        let x = spread(&y, 3, &mut rng);
        let extra: Vec<Rational> = common.iter().map(|&v| rat(v, 2)).collect();
        let xa = SortedSeq::new([x, extra.clone()].concat());
        let ya = SortedSeq::new([y, extra].concat());
        prop_assert!(majorizes(&xa, &ya).unwrap());
    }

    #[test]
    fn perturbation_chain_replays(y in prop::collection::vec(-8i64..8, 1..12), steps in 0usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = seq(&y, 4);
        let x = SortedSeq::new(spread(y.values(), steps, &mut rng));
        let chain = perturbation_chain(&x, &y).unwrap();
        let mut w = y.values().to_vec();
        for p in &chain {
            prop_assert!(p.to_index < p.from_index);
            prop_assert!(p.amount.is_positive() && p.amount < Rational::one());
            p.apply(&mut w);
            prop_assert!(w.windows(2).all(|t| t[0] >= t[1]));
        }
        prop_assert_eq!(w.as_slice(), x.values());
    }

    #[test]
    fn majorization_transfer_holds(y in prop::collection::vec(-8i64..8, 1..12), steps in 0usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ys: Vec<Rational> = y.iter().map(|&v| rat(v, 4)).collect();
        let xs = spread(&ys, steps, &mut rng);
        let (x, y) = (nf(xs), nf(ys));
        let mv = random_move(y.n(), &mut rng);
        let t = majorization_transfer(&x, &y, &mv).unwrap();
        let mut g = GreedyEmptier::default();
        let xo = play_moves(&x, &t.mv, &mut g).unwrap().2;
        let yo = play_moves(&y, &mv, &mut g).unwrap().2;
        prop_assert!(majorizes(&SortedSeq::new(xo.fills()), &SortedSeq::new(yo.fills())).unwrap());
    }

    #[test]
    fn monopolization_transfers_hold(
        b in prop::collection::vec(0i64..12, 2..10),
        pick in any::<(prop::sample::Index, prop::sample::Index)>(),
        c in 0i64..=4,
        aug in 0i64..=4,
        seed in any::<u64>(),
    ) {
        let variant = if aug == 0 {
            GameVariant::standard()
        } else {
            GameVariant::augmented(rat(aug, 4)).unwrap()
        };
        let unit = variant.unit();
        let mut bv: Vec<Rational> = b.iter().map(|&v| rat(v, 4)).collect();
        bv.sort_by(|x, y| y.cmp(x));
        let n = bv.len();
        let (i1, i2) = (pick.0.index(n), pick.1.index(n));
        prop_assume!(i1 != i2);
        let c = (rat(c, 4) * &unit).min(bv[i2].clone());
        let mut av = bv.clone();
        av[i1] = &bv[i1] + &unit;
        av[i2] = &bv[i2] - &c;
        prop_assume!(av[i1] > bv[i2]);
        let a = CupState::new(av, variant.clone()).unwrap();
        let b = CupState::new(bv, variant).unwrap();
        prop_assert!(weakly_monopolizes(&a, &b).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mv = random_move(n, &mut rng);
        let amv = transfer_filler_move(&a, &b, &mv).unwrap();
        let (pa, pb) = (apply_filler_move(&a, &amv).unwrap(), apply_filler_move(&b, &mv).unwrap());
        prop_assert!(weakly_monopolizes(&pa, &pb).unwrap());
        transfer_emptier_move(&pa, &pb, mv.p()).unwrap();
    }

    #[test]
    fn stone_transfer_keeps_domination(
        y in prop::collection::vec(-4i64..4, 2..16),
        bumps in prop::collection::vec(0i64..3, 16),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ys = StoneState::new(y.clone(), None).unwrap();
        let xs: Vec<i64> = ys.positions().iter().zip(&bumps).map(|(v, b)| v + b).collect();
        let xs = StoneState::new(xs, None).unwrap();
        let moves = enumerate_valid_moves(&ys);
        prop_assume!(!moves.is_empty());
        let (k, qmax) = moves[rng.gen_range(0..moves.len())];
        let mv = StoneMove::new(k, rng.gen_range(1..=qmax));
        let y2 = apply_stone_move(&ys, mv).unwrap();
        let x2 = match stone_transfer(&xs, &ys, mv).unwrap() {
            Some(m) => apply_stone_move(&xs, m).unwrap(),
            None => xs.clone(),
        };
        prop_assert!(x2.positions().iter().zip(y2.positions()).all(|(a, b)| a >= b));
    }

    #[test]
    fn stone_cover_majorizes_round(x in prop::collection::vec(-4i64..4, 1..14), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = nf(x.iter().map(|&v| Rational::from_integer(2 * v)).collect());
        let mv = random_move(s.n(), &mut rng);
        let out = play_moves(&s, &mv, &mut GreedyEmptier::default()).unwrap().2;
        let mut cover = s.fills();
        if let Some((k, count)) = stone_cover_move(&s, &mv).unwrap() {
            let start = s.count_above(&k);
            let end = start + s.count_at(&k);
            for v in &mut cover[start..start + count] {
                *v = &*v + rat(2, 1);
            }
            for v in &mut cover[end - count..end] {
                *v = &*v - rat(2, 1);
            }
        }
        prop_assert!(majorizes(&SortedSeq::new(cover), &SortedSeq::new(out.fills())).unwrap());
    }

    #[test]
    fn mirrored_games_are_negations(n in 1usize..12, seed in any::<u64>(), t in 1usize..80) {
        let mut f = RandomFiller::new(n, seed, rat(1, 4)).unwrap();
        let mut g = GreedyEmptier::default();
        let mut s = CupState::zeros(n, GameVariant::negative_fill()).unwrap();
        let mut m = s.clone();
        for _ in 0..t {
            let mv = f.next_move(&s).unwrap();
            prop_assert_eq!(mirror_round(&mirror_round(&mv)).additions(), if mv.is_hold() { FillerMove::hold(n).additions() } else { mv.additions() });
            s = play_moves(&s, &mv, &mut g).unwrap().2;
            m = play_moves(&m, &mirror_round(&mv), &mut g).unwrap().2;
            prop_assert_eq!(&m, &s.negated());
        }
    }

    #[test]
    fn cosimulation_invariants(n in 2usize..16, l in 1i64..5, seed in any::<u64>()) {
        let mut f = RandomFiller::new(n, seed, rat(1, 4)).unwrap();
        let mut sim = CoSimulation::new(n, l).unwrap();
        for _ in 0..60 {
            let mv = f.next_move(sim.cups()).unwrap();
            sim.step(&mv).unwrap();
        }
        let r = sim.report();
        prop_assert!(Rational::from_integer(2 * r.max_stone) >= r.max_cup_backlog);
        prop_assert!(r.max_checkpoint_stone >= r.max_stone);
    }
}

#[test]
fn negation_is_an_involution() {
    let mv = FillerMove::new(2, vec![rat(1, 2), rat(1, 2), rat(1, 1), rat(0, 1)]);
    assert_eq!(negate_round(&negate_round(&mv, 4), 4), mv);
}

#[test]
fn mirrored_flat_split_trace() {
    let n = 16;
    let mut g = GreedyEmptier::default();
    let mut s = CupState::zeros(n, GameVariant::negative_fill()).unwrap();
    let mut m = s.clone();
    for _ in 0..20 {
        let (level, count) = s.runs().iter().find(|r| r.1 >= 2).cloned().unwrap();
        let mv = flat_split_move(&s, &level, count / 2).unwrap();
        s = play_moves(&s, &mv, &mut g).unwrap().2;
        m = play_moves(&m, &mirror_round(&mv), &mut g).unwrap().2;
        assert_eq!(m, s.negated());
    }
}
