use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spbe_core::oracle::deviation::Deviation;
use spbe_core::oracle::{check_belief_histories, deviation_test, fpe2_residual, DeviationConfig};
use spbe_core::profiles::{delta1_profile, myopic_profile, RowChoice};
use spbe_core::rational::{rat, to_f64};
use spbe_core::verifier::{check_profile, solve_exact_values};
use spbe_core::{GameParams, Gamma, StrategyProfile};

fn params(n: usize, p: (i64, i64), d: (i64, i64)) -> GameParams {
    GameParams::new(n, rat(p.0, p.1), rat(d.0, d.1)).unwrap()
}

fn assert_fpe2_zero(profile: &StrategyProfile, pr: &GameParams) {
    let values = solve_exact_values(profile, pr).unwrap();
    let rep = fpe2_residual(profile, &values, pr).unwrap();
    assert!(rep.max_residual.is_zero(), "residual {}", rep.max_residual);
    assert!(rep.equations > 0);
}

#[test]
fn fpe2_residual_vanishes_for_myopic_profile() {
    let pr = params(3, (1, 10), (1, 2));
    let prof = myopic_profile(&pr, RowChoice::Buy);
    assert!(check_profile(&prof, &pr).unwrap().passed);
    assert_fpe2_zero(&prof, &pr);
}

#[test]
fn fpe2_residual_vanishes_at_zero_discount() {
    let pr = params(2, (1, 5), (0, 1));
    assert_fpe2_zero(&myopic_profile(&pr, RowChoice::Buy), &pr);
}

#[test]
fn fpe2_residual_vanishes_for_delta1_profile() {
    let pr = params(3, (1, 10), (1, 1));
    assert_fpe2_zero(&delta1_profile(&pr), &pr);
}

#[test]
fn fpe2_residual_vanishes_for_unverified_profiles_too() {
    // The equivalence holds for any total profile; only the argmax can fail.
    let pr = params(3, (1, 10), (1, 2));
    let prof = StrategyProfile::from_fn(3, |_, _, _| Gamma::Reveal);
    assert_fpe2_zero(&prof, &pr);
}

#[test]
fn folded_bayes_updates_match_closed_form() {
    let pr = params(3, (1, 10), (9, 10));
    let prof = myopic_profile(&pr, RowChoice::Reveal);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let chk = check_belief_histories(&prof, &pr, &mut rng, 10_000, 12);
    assert_eq!(chk.exact_mismatches, 0);
    assert!(chk.factorization_max.is_zero());
    assert!(chk.float_max_gap < 1e-12);
}

#[test]
fn myopic_profile_has_no_profitable_deviation() {
    let pr = params(2, (1, 10), (1, 2));
    let prof = myopic_profile(&pr, RowChoice::Reveal);
    let rep = deviation_test(&prof, &pr, &DeviationConfig { seed: 3, ..Default::default() });
    assert!(!rep.detected, "best {} gain {} se {}", rep.best.deviation.label(), rep.best.mean_gain, rep.best.std_error);
}

#[test]
fn forced_wait_at_y2_is_detected() {
    // At N = 2 the row y = 2 is never faced by an undecided free player, so
    // the check runs at N = 3 where (0, 2, 2) is reachable.
    let pr = params(3, (1, 10), (1, 2));
    let mut prof = myopic_profile(&pr, RowChoice::Buy);
    prof.set(0, 2, 2, Gamma::Wait).unwrap();
    assert!(!check_profile(&prof, &pr).unwrap().passed);
    let rep = deviation_test(&prof, &pr, &DeviationConfig { seed: 5, ..Default::default() });
    assert!(rep.detected);
    let fixes = rep.estimates.iter().any(|e| {
        e.mean_gain > 3.0 * e.std_error
            && matches!(&e.deviation, Deviation::Override(c) if c.contains(&((0, 2, 2), Gamma::Buy)))
    });
    assert!(fixes);
}

#[test]
fn zero_discount_reduces_to_one_shot_argmax() {
    let pr = params(3, (1, 5), (0, 1));
    let good = myopic_profile(&pr, RowChoice::Reveal);
    let rep = deviation_test(&good, &pr, &DeviationConfig { seed: 1, n_samples: 20_000, ..Default::default() });
    assert_eq!(rep.exact_gain, Some(rat(0, 1)));
    assert!(!rep.detected);

    let mut bad = good.clone();
    bad.set(0, 0, 0, Gamma::Wait).unwrap();
    let rep = deviation_test(&bad, &pr, &DeviationConfig { seed: 1, n_samples: 20_000, ..Default::default() });
    // Revealing at the start earns (1/2)(1 - 2p)/N over waiting.
    let gain = rep.exact_gain.clone().unwrap();
    assert_eq!(gain, rat(1, 2) * rat(3, 5) / rat(3, 1));
    assert!((rep.best.mean_gain - to_f64(&gain)).abs() < 4.0 * rep.best.std_error + 1e-12);
}
