//! Property tests for the model's structural identities.

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spbe_core::cascade::{absorption, exact_cascade_dp, revelation_chain, up_probability};
use spbe_core::game::{apply_update, instant_reward, public_belief_v, signal_posterior, Gamma, Signal};
use spbe_core::oracle::{bayes_update, JointBelief};
use spbe_core::profiles::{
    delta1_profile, large_delta_profile, myopic_profile, structural_check, PropertyName, RowChoice,
};
use spbe_core::rational::{self, rat, Rational};
use spbe_core::solver::{solve, SolveConfig};
use spbe_core::verifier::{check_profile, equation_residual, solve_exact_values};
use spbe_core::{GameParams, StrategyProfile};

fn p_strategy() -> impl Strategy<Value = Rational> {
    (3i64..=20).prop_flat_map(|b| (1i64..=(b - 1) / 2).prop_map(move |a| rat(a, b)))
}

fn delta_strategy() -> impl Strategy<Value = Rational> {
    (0i64..=20).prop_map(|j| rat(j, 20))
}

fn params_strategy(max_n: usize) -> impl Strategy<Value = GameParams> {
    (1usize..=max_n, p_strategy(), delta_strategy()).prop_map(|(n, p, d)| GameParams::new(n, p, d).unwrap())
}

fn gamma_strategy() -> impl Strategy<Value = Gamma> {
    prop::sample::select(Gamma::ALL.to_vec())
}

fn random_profile(n: usize, seed: u64) -> StrategyProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StrategyProfile::from_fn(n, |_, _, _| Gamma::ALL[rng.random_range(0..3)])
}

proptest! {
    #[test]
    fn reward_is_antisymmetric(p in p_strategy(), e in -40i32..=40) {
        let g = GameParams::new(3, p, Rational::zero()).unwrap();
        prop_assert_eq!(instant_reward::<Rational>(e, &g), -instant_reward::<Rational>(-e, &g));
    }

    #[test]
    fn signal_posterior_sums_to_one(p in p_strategy(), e in -40i32..=40) {
        let g = GameParams::new(3, p, Rational::zero()).unwrap();
        let s = signal_posterior::<Rational>(Signal::Plus, e, &g) + signal_posterior::<Rational>(Signal::Minus, e, &g);
        prop_assert!(s.is_one());
    }

    #[test]
    fn update_moves_state_forward(
        z in 0u8..=1, r in 0u8..=1, w in 0i32..=20, y in -20i32..=20,
        gamma in gamma_strategy(), plus in any::<bool>(),
    ) {
        prop_assume!(y.abs() <= w);
        let x = if plus { Signal::Plus } else { Signal::Minus };
        let u = apply_update(z, r, y, w, gamma, gamma.action(x));
        prop_assert!(u.w >= w);
        prop_assert!((u.y - y).abs() <= 1);
        prop_assert!(u.y.abs() <= u.w);
        let idle = apply_update(z, r, y, w, Gamma::Wait, 0);
        prop_assert_eq!((idle.z, idle.r, idle.y, idle.w), (z, r, y, w));
    }

    #[test]
    fn public_belief_is_increasing_martingale(p in p_strategy(), y in -15i32..=15) {
        let g = GameParams::new(3, p, Rational::zero()).unwrap();
        let b = |y| public_belief_v::<Rational>(y, &g);
        prop_assert!(b(y + 1) > b(y));
        prop_assert_eq!(b(0), rat(1, 2));
        let mix = signal_posterior::<Rational>(Signal::Plus, y, &g) * b(y + 1)
            + signal_posterior::<Rational>(Signal::Minus, y, &g) * b(y - 1);
        prop_assert_eq!(mix, b(y));
    }

    #[test]
    fn chain_up_matches_signal_posterior(p in p_strategy(), y in -15i32..=15) {
        let g = GameParams::new(3, p, Rational::zero()).unwrap();
        prop_assert_eq!(up_probability(y, &g), signal_posterior::<Rational>(Signal::Plus, y, &g));
    }

    #[test]
    fn symmetric_band_absorbs_up_with_half(p in p_strategy(), k in 1i32..=4) {
        let n = 10;
        let g = GameParams::new(n, p, rat(1, 2)).unwrap();
        let prof = StrategyProfile::from_fn(n, |_, y, _| {
            if y >= k { Gamma::Buy } else if y <= -k { Gamma::Wait } else { Gamma::Reveal }
        });
        let chain = revelation_chain(&prof, &g);
        let a = absorption(&chain, 0).unwrap();
        prop_assert_eq!(a.hit.clone(), vec![(-k, rat(1, 2)), (k, rat(1, 2))]);
    }

    #[test]
    fn constant_gamma_update_is_identity(
        p in p_strategy(), n in 1usize..=4, gamma in prop::sample::select(vec![Gamma::Wait, Gamma::Buy]),
        seed in any::<u64>(),
    ) {
        let g = GameParams::new(n, p, Rational::zero()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xt: Vec<i8> = (0..n).map(|_| rng.random_range(-1i8..=1)).collect();
        let pi = JointBelief::<Rational>::closed_form(&xt, &g);
        let actor = rng.random_range(0..n);
        prop_assert_eq!(bayes_update(&pi, gamma, gamma.action(Signal::Plus), actor), pi);
    }

    #[test]
    fn updates_keep_conditional_independence(
        p in p_strategy(), n in 1usize..=4,
        steps in prop::collection::vec((gamma_strategy(), 0u8..=1, 0usize..4), 0..8),
    ) {
        let g = GameParams::new(n, p, Rational::zero()).unwrap();
        let mut pi = JointBelief::<Rational>::prior(&g);
        for (gamma, a, actor) in steps {
            pi = bayes_update(&pi, gamma, a, actor % n);
            prop_assert!(pi.factorization_residual().is_zero());
            prop_assert!(pi.total().is_one());
        }
    }

    #[test]
    fn cascade_rows_sum_to_one(g in params_strategy(12), seed in any::<u64>()) {
        let prof = random_profile(g.n(), seed);
        let dp = exact_cascade_dp(&prof, &g);
        prop_assert!(dp.plus.sums_to_one());
        prop_assert!(dp.minus.sums_to_one());
    }

    #[test]
    fn constructors_are_total_and_structured(g in params_strategy(12)) {
        let n = g.n_i32();
        let basic = [PropertyName::WaitDeepNegative, PropertyName::NoWaitNonNegative, PropertyName::RevealAtZero];
        let profiles = [
            myopic_profile(&g, RowChoice::Buy),
            myopic_profile(&g, RowChoice::Reveal),
            delta1_profile(&g),
            large_delta_profile(&g),
        ];
        for prof in &profiles {
            prop_assert!(prof.is_total());
            for res in structural_check(prof) {
                if basic.contains(&res.name) {
                    prop_assert!(res.passed, "{} {:?}", res.name, res.witnesses);
                }
            }
        }
        for (r, y, w, gm) in profiles[2].entries() {
            prop_assert!(!(r == 0 && gm == Some(Gamma::Buy)), "delta1 buys at {:?}", (y, w));
        }
        for (r, y, w, gm) in profiles[3].entries() {
            if r == 0 && gm == Some(Gamma::Buy) {
                prop_assert!(y + w >= n);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_values_satisfy_every_equation(g in params_strategy(6), seed in any::<u64>()) {
        let prof = random_profile(g.n(), seed);
        // Random profiles at delta = 1 may have non-waiting closed classes.
        let values = match solve_exact_values(&prof, &g) {
            Ok(v) => v,
            Err(_) => { prop_assume!(false); unreachable!() }
        };
        prop_assert!(equation_residual(&prof, &g, &values).unwrap().is_zero());
    }

    #[test]
    fn solver_output_is_consistent(g in params_strategy(7)) {
        let res = solve(&g, &SolveConfig::default()).unwrap();
        for (_, _, _, _, _, _, v) in res.values.entries() {
            prop_assert!((-1.0..=1.0).contains(v));
        }
        for (r, y, w, gm) in res.profile.entries() {
            if let (0, Some(gm)) = (r, gm) {
                if y <= -2 { prop_assert_eq!(gm, Gamma::Wait, "{:?}", (y, w)); }
                if y >= 0 { prop_assert_ne!(gm, Gamma::Wait, "{:?}", (y, w)); }
            }
        }
        if !g.delta_is_one() {
            let exact = solve_exact_values(&res.profile, &g).unwrap();
            let gap = exact.to_f64().max_abs_diff(&res.values);
            prop_assert!(gap < 1e-12, "solver and exact values differ by {gap:e}");
        }
    }

    #[test]
    fn verified_profiles_are_solver_fixed_points(g in params_strategy(6)) {
        let res = solve(&g, &SolveConfig::default()).unwrap();
        let rep = check_profile(&res.profile, &g).unwrap();
        prop_assume!(rep.passed);
        let bound = {
            let qn = rational::pow_signed(g.q(), g.n_i32() + 2);
            rational::to_f64(&((&qn - Rational::one()) / (&qn + Rational::one())))
        };
        for (acting, _, _, _, _, _, v) in rep.values.entries() {
            if acting {
                prop_assert!(rational::to_f64(v).abs() <= bound);
            }
        }
        let again = solve(&g, &SolveConfig { initial: Some(res.profile.clone()), ..Default::default() }).unwrap();
        prop_assert!(again.profile.diff(&res.profile).is_empty());
    }
}
