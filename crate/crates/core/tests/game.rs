mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{four_player_game, random_nonempty_game, rng};
use tu_consensus::game::{
    build_core, build_core_with, core_membership, is_core_nonempty, CharacteristicFunction,
    CoreOptions, MissingValue,
};
use tu_consensus::Error;

const FIXTURE: &str = include_str!("fixtures/four_player_game.json");

#[test]
fn fixture_matches_the_example_game() {
    let cf = CharacteristicFunction::from_json(FIXTURE).unwrap();
    assert_eq!(cf, four_player_game());
    assert_eq!(cf.to_json().trim_end(), FIXTURE.trim_end());
}

#[test]
fn fixture_core_rows() {
    let core = build_core(&four_player_game()).unwrap();
    assert_eq!(core.eq_rows().len(), 1);
    assert_eq!(core.ineq_rows().len(), 14);
    let has = |coeffs: [f64; 4], rhs: f64| {
        core.ineq_rows()
            .iter()
            .any(|r| r.coeffs == coeffs && r.rhs == rhs)
    };
    assert!(has([1.0, 1.0, 0.0, 0.0], 5.0));
    assert!(has([0.0, 0.0, 1.0, 1.0], 5.0));
    assert!(has([1.0, 1.0, 1.0, 0.0], 7.0));
    assert!(has([0.0, 1.0, 0.0, 1.0], 0.0));
    assert!((0..4).all(|i| {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        has(e, 2.0)
    }));
}

#[test]
fn membership_examples() {
    let cf = four_player_game();
    assert!(core_membership(&[3.0, 2.0, 2.5, 2.5], &cf, 1e-9));
    assert!(core_membership(&[2.0, 3.0, 3.0, 2.0], &cf, 1e-9));
    assert!(!core_membership(&[3.8, 3.0, 2.2, 1.0], &cf, 1e-3));
    assert!(!core_membership(&[10.0, 0.0, 0.0, 0.0], &cf, 1e-3));
}

#[test]
fn strict_missing_mode() {
    let cf = CharacteristicFunction::new(3, 1.0).unwrap();
    let strict = CoreOptions {
        missing: MissingValue::Strict,
        ..CoreOptions::default()
    };
    assert!(matches!(
        build_core_with(&cf, &strict),
        Err(Error::MissingCoalition(_))
    ));
    let floored = build_core_with(
        &cf,
        &CoreOptions {
            missing: MissingValue::Floor(-1.0),
            ..CoreOptions::default()
        },
    )
    .unwrap();
    assert!(floored.ineq_rows().iter().all(|r| r.rhs == -1.0));
}

#[test]
fn random_games_with_planted_allocation_are_nonempty() {
    let mut r = rng(31);
    for _ in 0..40 {
        let n = r.random_range(2..=6);
        let (cf, x) = random_nonempty_game(&mut r, n);
        assert!(core_membership(&x, &cf, 1e-9));
        let status = is_core_nonempty(&cf).unwrap();
        let w = status
            .witness()
            .expect("planted allocation proves nonemptiness");
        assert!(core_membership(w, &cf, 1e-7));
    }
}

#[test]
fn overdemanding_pairs_empty_the_core() {
    // Every pair asks for more than 2/3 of the grand value.
    for n in 3..=6 {
        let mut cf = CharacteristicFunction::new(n, 1.0).unwrap();
        for a in 0..n {
            for b in a + 1..n {
                cf.set(&[a, b], 0.7).unwrap();
            }
        }
        assert!(!is_core_nonempty(&cf).unwrap().is_nonempty(), "n = {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let (cf, _) = random_nonempty_game(&mut r, n);
        let text = cf.to_json();
        let back = CharacteristicFunction::from_json(&text).unwrap();
        prop_assert_eq!(&back, &cf);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn membership_matches_polyhedron(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let (cf, x) = random_nonempty_game(&mut r, n);
        let core = build_core(&cf).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v + r.random_range(-0.3..0.3)).collect();
        prop_assert_eq!(core_membership(&y, &cf, 1e-9), core.contains(&y, 1e-9));
    }
}
