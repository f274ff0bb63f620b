use cyclic_cli::commands::parse_list;
use cyclic_cli::sweep::{self, Route, RunConfig};
use cyclic_core::precision::PrecisionConfig;
use cyclic_core::problem::Problem;
use proptest::prelude::*;

proptest! {
    #[test]
    fn lists_round_trip(items in prop::collection::vec(-50i64..50, 1..12)) {
        let text = items.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        prop_assert_eq!(parse_list(&text).unwrap(), items);
    }

    #[test]
    fn ranges_expand(lo in -20i64..20, len in 0i64..10) {
        let hi = lo + len;
        let parsed = parse_list(&format!("{lo}..{hi}")).unwrap();
        prop_assert_eq!(parsed, (lo..=hi).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// One record per distinct (k, n, route), sorted, with a consistent gap
    /// column.
    #[test]
    fn sweep_layout(
        ks in prop::collection::vec(-1i64..=1, 1..4),
        ns in prop::collection::vec(2usize..=3, 1..3),
        ratio in 0.2f64..0.8,
        both in any::<bool>(),
    ) {
        let problem = Problem::from_json(&format!(
            r#"{{"spectrum": {{"kind": "integer-line"}},
                "coefficients": {{"kind": "geometric", "ratio": {ratio}, "phase": "alternating"}}}}"#
        )).unwrap();
        let routes = if both { vec![Route::Kmatrix, Route::Gram] } else { vec![Route::Gram] };
        let cfg = RunConfig {
            spec: "p.json".into(),
            k_list: ks.clone(),
            n_list: ns.clone(),
            routes: routes.clone(),
            precision: PrecisionConfig::default(),
            workers: 2,
            timings: false,
        };
        let report = sweep::run(&cfg, &problem).unwrap();
        let mut k = ks.clone();
        k.sort_unstable();
        k.dedup();
        let mut n = ns.clone();
        n.sort_unstable();
        n.dedup();
        prop_assert_eq!(report.records.len(), k.len() * n.len() * routes.len());
        let keys: Vec<_> = report.records.iter().map(|r| (r.k, r.n, r.route)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(keys, sorted);
        for r in &report.records {
            prop_assert!(r.error.is_none());
            prop_assert_eq!(r.route_gap.is_some(), both);
        }
    }
}
