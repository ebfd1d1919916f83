use cupgame::stonegame::{
    apply_stone_move, enumerate_valid_moves, level_report, no_gaps_check, phi, phi_a, psi, psi_a,
    StoneMove, StoneState,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A uniformly chosen level with at least two stones and a random legal `q`.
fn random_move(s: &StoneState, rng: &mut impl Rng) -> Option<StoneMove> {
    let moves = enumerate_valid_moves(s);
    if moves.is_empty() {
        return None;
    }
    let (k, qmax) = moves[rng.gen_range(0..moves.len())];
    Some(StoneMove::new(k, rng.gen_range(1..=qmax)))
}

fn random_game(n: usize, l: i64, t: usize, seed: u64) -> (StoneState, Vec<StoneMove>, Vec<StoneState>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = StoneState::zeros(n, Some(l)).unwrap();
    let mut s = init.clone();
    let mut moves = Vec::new();
    let mut states = Vec::new();
    for _ in 0..t {
        let Some(mv) = random_move(&s, &mut rng) else { break };
        s = apply_stone_move(&s, mv).unwrap();
        moves.push(mv);
        states.push(s.clone());
    }
    (init, moves, states)
}

proptest! {
    #[test]
    fn plain_moves_conserve_and_raise_potentials(
        pos in prop::collection::vec(-6i64..6, 2..24),
        seed in any::<u64>(),
    ) {
        let s = StoneState::new(pos, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(mv) = random_move(&s, &mut rng) else { return Ok(()) };
        let t = apply_stone_move(&s, mv).unwrap();
        let q = mv.q as i128;
        prop_assert_eq!(t.positions().iter().sum::<i64>(), s.positions().iter().sum::<i64>());
        prop_assert_eq!(t.count_at(mv.k), s.count_at(mv.k) - 2 * mv.q);
        prop_assert_eq!(phi(&t) - phi(&s), 2 * q);
        prop_assert!(psi(&t) - psi(&s) >= 2 * q * q);
    }

    #[test]
    fn checkpoint_moves_raise_band_potentials(
        pos in prop::collection::vec(0i64..12, 2..24),
        l in 1i64..5,
        seed in any::<u64>(),
    ) {
        let s = StoneState::new(pos, Some(l)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(mv) = random_move(&s, &mut rng) else { return Ok(()) };
        let t = apply_stone_move(&s, mv).unwrap();
        let q = mv.q as i128;
        if s.is_checkpoint(mv.k) {
            let a = mv.k / l;
            let na = t.positions().partition_point(|&x| x >= a * l);
            prop_assert_eq!(phi_a(&t, a, l, na) - phi_a(&s, a, l, na), q);
            prop_assert!(psi_a(&t, a, l, na) - psi_a(&s, a, l, na) >= q * q);
            prop_assert_eq!(t.count_at(mv.k), s.count_at(mv.k) - mv.q);
        } else {
            prop_assert_eq!(phi(&t) - phi(&s), 2 * q);
            prop_assert!(psi(&t) - psi(&s) >= 2 * q * q);
        }
        prop_assert!(t.positions().iter().all(|&x| x >= 0));
    }

    #[test]
    fn reachable_checkpoint_states_have_no_gaps(n in 2usize..40, l in 1i64..6, seed in any::<u64>()) {
        let (init, moves, states) = random_game(n, l, 300, seed);
        for (i, s) in states.iter().enumerate() {
            prop_assert!(no_gaps_check(s).is_ok(), "gap after move {}: {:?}", i + 1, s.positions());
        }
        let rep = level_report(&init, &moves).unwrap();
        prop_assert!(rep.ok(), "{:?}", rep.violations);
        let per_band: usize = rep.levels.iter().map(|s| s.steps).sum();
        prop_assert_eq!(per_band, rep.total_steps);
    }

    #[test]
    fn plain_games_keep_potentials_exact(n in 2usize..30, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = StoneState::zeros(n, None).unwrap();
        let mut total_q = 0i128;
        for _ in 0..200 {
            let Some(mv) = random_move(&s, &mut rng) else { break };
            s = apply_stone_move(&s, mv).unwrap();
            total_q += mv.q as i128;
            prop_assert!(no_gaps_check(&s).is_ok());
        }
        prop_assert_eq!(phi(&s), 2 * total_q);
    }
}

#[test]
fn checkpoint_stones_never_drop_below_reached_level() {
    let (_, _, states) = random_game(16, 3, 500, 9);
    let mut floor = vec![0i64; 16];
    for s in &states {
        for (i, &x) in s.positions().iter().enumerate() {
            // Sorted positions: the i-th highest never falls under the last
            // checkpoint it reached.
            assert!(x >= floor[i], "stone {i} fell to {x} below {}", floor[i]);
            floor[i] = floor[i].max(x / 3 * 3);
        }
    }
}
