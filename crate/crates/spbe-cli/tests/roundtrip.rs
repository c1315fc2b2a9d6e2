use proptest::prelude::*;
use spbe_cli::profile_io::ProfileFile;
use spbe_core::rational::rat;
use spbe_core::{GameParams, Gamma, StrategyProfile};

proptest! {
    #[test]
    fn profile_json_round_trip(
        n in 1usize..=9,
        codes in prop::collection::vec(0usize..3, 400),
        a in 1i64..5, d in 0i64..=7,
    ) {
        let g = GameParams::new(n, rat(a, 11), rat(d, 7)).unwrap();
        let mut k = 0;
        let profile = StrategyProfile::from_fn(n, |_, _, _| {
            k += 1;
            Gamma::ALL[codes[k % codes.len()]]
        });
        let text = serde_json::to_string(&ProfileFile::new(&profile, &g)).unwrap();
        let back: ProfileFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.profile().unwrap(), profile);
        let g2 = back.params().unwrap();
        prop_assert_eq!(g2.p(), g.p());
        prop_assert_eq!(g2.delta(), g.delta());
    }
}
