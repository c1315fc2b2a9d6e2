use super::*;
use crate::game::GameParams;
use crate::profiles::{delta1_profile, large_delta_profile, myopic_profile, RowChoice};
use crate::rational::{self, rat};

fn params(n: usize, p: (i64, i64), d: (i64, i64)) -> GameParams {
    GameParams::new(n, rat(p.0, p.1), rat(d.0, d.1)).unwrap()
}

#[test]
fn up_probabilities() {
    for p in [(1, 10), (1, 5), (2, 5)] {
        assert_eq!(up_probability(0, &params(3, p, (0, 1))), rat(1, 2));
    }
    let pr = params(11, (1, 10), (0, 1));
    assert_eq!(up_probability(1, &pr), rat(41, 50));
    for y in -4..=4 {
        assert_eq!(up_probability(y, &pr), up_from_posterior(y, &pr));
    }
}

#[test]
fn myopic_chain_absorption() {
    let pr = params(11, (1, 10), (1, 2));
    let chain = revelation_chain(&myopic_profile(&pr, RowChoice::Reveal), &pr);
    assert_eq!(chain.absorbing_states(), vec![-2, 2]);
    assert!(chain.w_dependent.is_empty());
    let a0 = absorption(&chain, 0).unwrap();
    assert_eq!(a0.hit, vec![(-2, rat(1, 2)), (2, rat(1, 2))]);
    assert_eq!(a0.expected_steps, rat(100, 41));
    let a1 = absorption(&chain, 1).unwrap();
    assert_eq!(a1.hit[1], (2, rat(91, 100)));
    let a2 = absorption(&chain, 2).unwrap();
    assert_eq!(a2.expected_steps, rat(0, 1));
}

#[test]
fn y_max_examples() {
    assert_eq!(y_max_bound(&params(3, (1, 10), (0, 1))).unwrap(), 1);
    assert_eq!(y_max_bound(&params(3, (2, 5), (0, 1))).unwrap(), 1);
    assert_eq!(y_max_bound(&params(3, (1, 10), (1, 2))).unwrap(), 2);
    assert_eq!(y_max_bound(&params(3, (1, 10), (999, 1000))).unwrap(), 5);
    assert_eq!(y_max_bound(&params(3, (1, 10), (1, 1))), Err(CascadeError::DeltaOne));
}

#[test]
fn delta1_profile_never_buys_badly() {
    for n in [2, 3, 5, 11, 21] {
        let pr = params(n, (1, 10), (1, 1));
        let dp = exact_cascade_dp(&delta1_profile(&pr), &pr);
        assert_eq!(dp.minus.probability(CascadeClass::BuyCascade), &rat(0, 1));
        assert!(dp.minus.sums_to_one() && dp.plus.sums_to_one());
    }
}

#[test]
fn large_delta_bad_buys_start_late() {
    for n in [5, 11, 21] {
        let pr = params(n, (1, 10), (999_999, 1_000_000));
        let dp = exact_cascade_dp(&large_delta_profile(&pr), &pr);
        for ((c, w), p) in &dp.minus.onset {
            if *c == CascadeClass::BuyCascade && *p > rat(0, 1) {
                assert!(2 * w >= n as i32, "N={n} onset at w={w}");
            }
        }
    }
}

#[test]
fn myopic_bad_buy_near_gamblers_ruin() {
    let pr = params(11, (1, 10), (1, 2));
    let dp = exact_cascade_dp(&myopic_profile(&pr, RowChoice::Reveal), &pr);
    assert!(dp.minus.sums_to_one());
    let bad = rational::to_f64(dp.minus.probability(CascadeClass::BuyCascade));
    assert!((bad - 1.0 / 82.0).abs() < 2e-3, "{bad}");
    assert!(dp.non_closed_buy.is_empty());
}

#[test]
fn simulation_is_deterministic_and_mode_independent() {
    let pr = params(5, (1, 10), (9, 10));
    let prof = myopic_profile(&pr, RowChoice::Reveal);
    let mut cfg = SimConfig::new(7, 500, 250);
    cfg.mode = crate::par::ExecMode::Sequential;
    let a = simulate(&prof, &pr, &cfg);
    cfg.mode = crate::par::ExecMode::Parallel;
    let b = simulate(&prof, &pr, &cfg);
    assert_eq!(a.runs, b.runs);
}

#[test]
fn short_horizon_counts_unfinished_runs() {
    let pr = params(11, (1, 10), (9, 10));
    let prof = myopic_profile(&pr, RowChoice::Reveal);
    let rep = simulate(&prof, &pr, &SimConfig::new(1, 200, 0));
    assert_eq!(rep.runs.len(), 200);
    assert!(rep.runs.iter().all(|r| r.class == CascadeClass::NoneWithinHorizon));
}
