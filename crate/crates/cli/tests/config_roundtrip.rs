use dualhelm::config::RunConfig;
use proptest::prelude::*;

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn resolved_echo_parses_back(
        dim in 1usize..4,
        s in 0.3f64..1.0,
        p in 2.1f64..8.0,
        k in 0.5f64..20.0,
        n_pow in 3u32..8,
        half_width in 1.0f64..64.0,
        delta in prop_oneof![Just(None), (1e-4f64..1.0).prop_map(Some)],
        tol in 1e-12f64..1e-3,
        seed in any::<u64>(),
        eps in prop::collection::vec(1e-3f64..1.0, 1..5),
        json in any::<bool>(),
    ) {
        let mut text = format!(
            "exponents.dim = {dim}\nexponents.s = {s:?}\nexponents.p = {p:?}\nexponents.k = {k:?}\n\
             grid.n = {}\ngrid.L = {half_width:?}\nsolver.tol = {tol:?}\nsolver.seed = {seed}\n\
             levels.eps_list = {}\n",
            1usize << n_pow,
            list(&eps),
        );
        if let Some(d) = delta {
            text.push_str(&format!("resolvent.delta = {d:?}\n"));
        }
        if json {
            text.push_str("output.format = json\n");
        }
        let cfg = RunConfig::parse(&text).unwrap();
        let echo = cfg.to_text();
        let back = RunConfig::parse(&echo).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), echo);
    }
}
