use proptest::prelude::*;
use setnim_core::grundy::{grundy, Engine, DEFAULT_BUDGET};
use setnim_core::reduction::{merge_reduce, ReductionTrace};
use setnim_core::{apply_move, build_game, builtin_game, Legality, Move, Oracle, Outcome, Position};

const ORACLES: [Oracle; 7] = [
    Oracle::H,
    Oracle::Cn73,
    Oracle::Cn83,
    Oracle::Cn52,
    Oracle::Cn63,
    Oracle::Path { n: 5, k: 3 },
    Oracle::Path { n: 7, k: 4 },
];

fn oracle_and_heights(max: u64) -> impl Strategy<Value = (Oracle, Vec<u64>)> {
    (0..ORACLES.len()).prop_flat_map(move |i| {
        let o = ORACLES[i];
        (Just(o), prop::collection::vec(0..=max, o.n()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn membership_agrees_with_search((o, h) in oracle_and_heights(3)) {
        let spec = o.spec();
        let brute = grundy(&spec, &Position::new(h.clone()), DEFAULT_BUDGET).unwrap().outcome();
        prop_assert_eq!(o.is_p(&h), brute == Outcome::P);
    }

    #[test]
    fn constructive_moves_land_on_p((o, h) in oracle_and_heights(1_000_000_000)) {
        let spec = o.spec();
        let p = Position::new(h.clone());
        let s = o.solve_move(&p, 0).unwrap();
        prop_assert_eq!(s.mv.is_none(), o.is_p(&h));
        if let Some(m) = s.mv {
            prop_assert_eq!(spec.is_legal_move(&p, &m).unwrap(), Legality::Legal);
            prop_assert!(o.is_p(apply_move(&p, &m).unwrap().heights()));
        }
    }

    #[test]
    fn canonical_search_agrees(h in prop::collection::vec(0u64..=4, 5)) {
        let spec = builtin_game("cn:5,2").unwrap();
        let p = Position::new(h);
        let plain = Engine::new(&spec).grundy(&p).unwrap();
        let canon = Engine::new(&spec).with_canonicalization(true).unwrap().grundy(&p).unwrap();
        prop_assert_eq!(plain, canon);
    }

    #[test]
    fn uncached_search_agrees(h in prop::collection::vec(0u64..=1, 5)) {
        let spec = builtin_game("cn:5,2").unwrap();
        let p = Position::new(h);
        prop_assert_eq!(Engine::new(&spec).grundy(&p).unwrap(), Engine::new(&spec).with_cache(false).grundy(&p).unwrap());
    }

    #[test]
    fn merged_moves_lift_and_project(h in prop::collection::vec(0u64..=6, 4)) {
        let g2 = build_game(4, &[vec![0, 3], vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let (merged, step) = merge_reduce(&g2, &[1, 2]).unwrap();
        let mut trace = ReductionTrace::identity(&g2);
        trace.push(step).unwrap();
        let p = Position::new(h);
        let q = trace.project(&p).unwrap();
        prop_assert_eq!(q.heights(), &[p.heights()[0], p.heights()[1] + p.heights()[2], p.heights()[3]][..]);
        for m in merged.legal_moves(q.heights()).collect::<Vec<Move>>() {
            let lifted = trace.lift_move(&m, &p).unwrap();
            prop_assert_eq!(g2.is_legal_move(&p, &lifted).unwrap(), Legality::Legal);
            let after = trace.project(&apply_move(&p, &lifted).unwrap()).unwrap();
            prop_assert_eq!(after, apply_move(&q, &m).unwrap());
        }
    }

    #[test]
    fn position_text_round_trip(h in prop::collection::vec(any::<u64>(), 1..10)) {
        let p = Position::new(h);
        let back: Position = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }
}
