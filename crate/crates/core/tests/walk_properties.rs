mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use qwalk_core::walk::{evolve, position_distribution, StepOperator};
use qwalk_core::{make_initial, CoinAngle, CoinState, DefectSpec, WalkConfig};

use common::path_sum_distribution;

fn arb_coin_state() -> impl Strategy<Value = CoinState> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter_map("nonzero", |(a, b, c, d)| {
            CoinState::normalized(Complex64::new(a, b), Complex64::new(c, d)).ok()
        })
}

fn config(
    steps: usize,
    theta: f64,
    defect: Option<(i64, f64)>,
    site: i64,
    coin: CoinState,
) -> WalkConfig {
    let mut cfg = WalkConfig::new(steps, CoinAngle::from_degrees(theta).unwrap()).with_initial(site, coin);
    if let Some((n, phi)) = defect {
        cfg = cfg.with_defect(DefectSpec::new(n, phi).unwrap());
    }
    cfg
}

#[test]
fn ten_step_hadamard_matches_path_sum() {
    let coin = CoinState::horizontal();
    let rec = evolve(&config(10, 22.5, None, 0, coin)).unwrap();
    let oracle = path_sum_distribution(10, 22.5, None, 0, coin.amplitudes());
    let dist = rec.final_distribution();
    for x in -10..=10 {
        let want = oracle.get(&x).copied().unwrap_or(0.0);
        assert!((dist.prob(x) - want).abs() < 1e-10, "x={x}");
    }
}

#[test]
fn standard_walk_is_symmetric_for_antisymmetric_coin() {
    let coin = CoinState::antisymmetric();
    for t in 0..=10 {
        let oracle = path_sum_distribution(t, 22.5, None, 0, coin.amplitudes());
        for (&x, &p) in &oracle {
            let mirror = oracle.get(&-x).copied().unwrap_or(0.0);
            assert!((p - mirror).abs() < 1e-10);
        }
        let rec = evolve(&config(t, 22.5, None, 0, coin)).unwrap();
        let d = rec.final_distribution();
        for x in 0..=t as i64 {
            assert!((d.prob(x) - d.prob(-x)).abs() < 1e-10);
        }
    }
}

#[test]
fn unitarity_over_ten_thousand_steps() {
    let coin = CoinAngle::from_degrees(31.0).unwrap();
    let defect = DefectSpec::new(2, 97.0).unwrap();
    let op = StepOperator::new(coin, Some(&defect));
    let mut state = make_initial(0, CoinState::antisymmetric());
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        state = op.apply(&state);
        worst = worst.max((state.norm_sqr() - 1.0).abs());
    }
    assert!(worst < 1e-10, "norm drift {worst:e}");
}

#[test]
fn distant_defect_is_inert() {
    let coin = CoinState::antisymmetric();
    let free = evolve(&config(6, 22.5, None, 0, coin)).unwrap();
    let far = evolve(&config(6, 22.5, Some((7, 180.0)), 0, coin)).unwrap();
    assert_eq!(free.distributions, far.distributions);
    assert_eq!(free.variances, far.variances);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_path_sum_oracle(t in 0usize..=8, theta in 0.0f64..=45.0,
                               defect in prop::option::of((-4i64..4, 0.0f64..360.0)),
                               site in -2i64..2, coin in arb_coin_state()) {
        let rec = evolve(&config(t, theta, defect, site, coin)).unwrap();
        let oracle = path_sum_distribution(t, theta, defect, site, coin.amplitudes());
        let dist = rec.final_distribution();
        for x in (site - t as i64)..=(site + t as i64) {
            let want = oracle.get(&x).copied().unwrap_or(0.0);
            prop_assert!((dist.prob(x) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn parity_and_light_cone(t in 0usize..=12, theta in 0.0f64..=45.0,
                             defect in prop::option::of((-5i64..5, 0.0f64..360.0)),
                             site in -3i64..3, coin in arb_coin_state()) {
        let rec = evolve(&config(t, theta, defect, site, coin)).unwrap();
        for (step, dist) in rec.distributions.iter().enumerate() {
            for x in (site - 20)..=(site + 20) {
                let off = x - site;
                if off.abs() > step as i64 || (off + step as i64) % 2 != 0 {
                    prop_assert_eq!(dist.prob(x), 0.0);
                }
            }
            let total: f64 = dist.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn defect_outside_reach_is_bit_identical(t in 0usize..=10, theta in 0.0f64..=45.0,
                                             gap in 1i64..5, left in any::<bool>(),
                                             phi in 0.0f64..360.0, coin in arb_coin_state()) {
        let n = if left { -(t as i64) - gap } else { t as i64 + gap };
        let free = evolve(&config(t, theta, None, 0, coin)).unwrap();
        let far = evolve(&config(t, theta, Some((n, phi)), 0, coin)).unwrap();
        prop_assert_eq!(free.distributions, far.distributions);
    }

    #[test]
    fn recorded_distribution_matches_state(t in 0usize..=10, theta in 0.0f64..=45.0) {
        let rec = evolve(&config(t, theta, Some((0, 180.0)), 0, CoinState::antisymmetric())).unwrap();
        prop_assert_eq!(rec.final_distribution(), &position_distribution(&rec.final_state));
        prop_assert_eq!(rec.distributions.len(), t + 1);
        prop_assert_eq!(rec.variances.len(), t + 1);
    }
}
